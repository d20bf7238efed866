#include <gtest/gtest.h>

#include <json.hpp>

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"

namespace {

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome run_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "skeweig");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = skeweig::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string data(const std::string& name) { return std::string(SKEWEIG_EXAMPLE_DIR) + "/" + name; }

std::size_t count_lines(const std::string& s) {
    std::size_t n = 0;
    for (char c : s) n += c == '\n';
    return n;
}

}  // namespace

TEST(Cli, RotationBlockText) {
    const auto r = run_cli({"--input", data("rot2.mtx"), "--k", "1", "--m", "2"});
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("±i·2 "), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("# converged yes"), std::string::npos);
}

TEST(Cli, KLargerThanMIsUsageError) {
    const auto r = run_cli({"--input", data("band40.mtx"), "--k", "40", "--m", "30"});
    EXPECT_EQ(r.code, 64);
    EXPECT_FALSE(r.err.empty());
}

TEST(Cli, KAboveHalfOrderIsUsageError) {
    const auto r = run_cli({"--input", data("rot2.mtx"), "--k", "2", "--m", "4"});
    EXPECT_EQ(r.code, 64);
}

TEST(Cli, UnknownFlagIsUsageError) {
    EXPECT_EQ(run_cli({"--input", data("rot2.mtx"), "--bogus"}).code, 64);
    EXPECT_EQ(run_cli({"--input", data("rot2.mtx"), "--reorth", "sometimes"}).code, 64);
    EXPECT_EQ(run_cli({}).code, 64);
}

TEST(Cli, MissingFileIsInputError) {
    const auto r = run_cli({"--input", data("does_not_exist.mtx")});
    EXPECT_EQ(r.code, 1);
    EXPECT_FALSE(r.err.empty());
}

TEST(Cli, NonSkewInputAsIsIsInputError) {
    const auto r = run_cli({"--input", data("general_nonskew.mtx")});
    EXPECT_EQ(r.code, 1);
}

TEST(Cli, ParseErrorReportsLine) {
    const auto r = run_cli({"--input", data("bad_line.mtx")});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find(":4:"), std::string::npos) << r.err;
}

TEST(Cli, SymmetrizeMode) {
    const auto r = run_cli({"--input", data("general_nonskew.mtx"), "--mode", "symmetrize", "--k", "1", "--m", "2",
                            "--output", "json"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto doc = nlohmann::json::parse(r.out);
    EXPECT_NEAR(doc["sigmas"][0].get<double>(), 1.0, 1e-15);
}

TEST(Cli, RectangularNeedsBlockEmbed) {
    EXPECT_EQ(run_cli({"--input", data("rect3x2.mtx")}).code, 1);
    const auto r = run_cli({"--input", data("rect3x2.mtx"), "--mode", "block-embed", "--k", "2", "--m", "4",
                            "--output", "json", "--start", "purge-null"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto doc = nlohmann::json::parse(r.out);
    ASSERT_EQ(doc["sigmas"].size(), 2u);
    EXPECT_NEAR(doc["sigmas"][0].get<double>(), 3.0, 1e-14);
    EXPECT_NEAR(doc["sigmas"][1].get<double>(), 2.0, 1e-14);
}

TEST(Cli, JsonSchema) {
    const auto r = run_cli({"--input", data("band40.mtx"), "--k", "3", "--m", "12", "--tol", "1e-10", "--output", "json"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto doc = nlohmann::json::parse(r.out);
    for (const char* key : {"sigmas", "residuals", "mv_count", "restarts", "converged", "anorm_estimate", "wall_time"})
        EXPECT_TRUE(doc.contains(key)) << key;
    EXPECT_EQ(doc["sigmas"].size(), 3u);
    EXPECT_EQ(doc["residuals"].size(), 3u);
    EXPECT_TRUE(doc["converged"].get<bool>());
    const double anorm = doc["anorm_estimate"].get<double>();
    for (const auto& res : doc["residuals"]) EXPECT_LE(res.get<double>(), 1e-10 * anorm);
    const auto sig = doc["sigmas"];
    EXPECT_GT(sig[0].get<double>(), sig[1].get<double>());
}

TEST(Cli, CsvTraceHasOneRowPerStep) {
    const auto r = run_cli({"--input", data("band40.mtx"), "--k", "2", "--m", "8", "--output", "csv-trace"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = run_cli({"--input", data("band40.mtx"), "--k", "2", "--m", "8", "--output", "json"});
    const auto doc = nlohmann::json::parse(j.out);
    const std::size_t restarts = doc["restarts"].get<std::size_t>();
    EXPECT_EQ(count_lines(r.out), 1 + 8 + 6 * restarts);
    EXPECT_EQ(r.out.rfind("cycle,step,mv_count", 0), 0u);
}

TEST(Cli, TraceFile) {
    const std::string path = ::testing::TempDir() + "skeweig_trace.csv";
    const auto r = run_cli({"--input", data("band40.mtx"), "--k", "2", "--m", "8", "--trace", path});
    ASSERT_EQ(r.code, 0) << r.err;
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    EXPECT_EQ(header.rfind("cycle,step", 0), 0u);
    std::remove(path.c_str());
}

TEST(Cli, NotConvergedExitCode) {
    const auto r = run_cli({"--input", data("band40.mtx"), "--k", "6", "--m", "8", "--tol", "1e-15", "--max-restarts",
                            "1"});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.out.find("# converged no"), std::string::npos);
}

TEST(Cli, FileStartVector) {
    const auto a = run_cli({"--input", data("band40.mtx"), "--k", "2", "--m", "10", "--tol", "1e-12", "--output",
                            "json", "--start", "file:" + data("start40.txt")});
    ASSERT_EQ(a.code, 0) << a.err;
    const auto b = run_cli({"--input", data("band40.mtx"), "--k", "2", "--m", "10", "--tol", "1e-12", "--output",
                            "json"});
    const auto da = nlohmann::json::parse(a.out);
    const auto db = nlohmann::json::parse(b.out);
    EXPECT_NEAR(da["sigmas"][0].get<double>(), db["sigmas"][0].get<double>(), 1e-11 * da["anorm_estimate"].get<double>());
}

TEST(Cli, FileStartVectorWrongLength) {
    EXPECT_EQ(run_cli({"--input", data("rot2.mtx"), "--start", "file:" + data("start40.txt")}).code, 1);
}
