#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "skeweig/skeweig.hpp"

namespace skeweig::cli {
namespace {

const char* breakdown_name(Breakdown b) {
    switch (b) {
        case Breakdown::beta: return "beta";
        case Breakdown::gamma: return "gamma";
        default: return "none";
    }
}

std::string fmt(const char* spec, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

void write_trace_csv(std::ostream& os, const SolveTrace& trace) {
    os << "cycle,step,mv_count,theta_max,theta_min,max_phi,max_psi,max_omega,"
          "reorth_p,reorth_pq,reorth_q,reorth_qp,breakdown\n";
    for (const auto& s : trace.steps) {
        os << s.cycle << ',' << s.step << ',' << s.mv_count << ',' << fmt("%.17g", s.theta_max) << ','
           << fmt("%.17g", s.theta_min) << ',' << fmt("%.6e", s.max_phi) << ',' << fmt("%.6e", s.max_psi) << ','
           << fmt("%.6e", s.max_omega) << ',' << s.reorth_p << ',' << s.reorth_pq << ',' << s.reorth_q << ','
           << s.reorth_qp << ',' << breakdown_name(s.breakdown) << '\n';
    }
}

SkewSparseMatrix build_matrix(const RunConfig& cfg) {
    const CooMatrix coo = read_matrix_market(cfg.input);
    if (cfg.mode == "symmetrize") return skew_symmetrize(coo);
    if (cfg.mode == "block-embed") return block_embed(coo);
    if (coo.rows != coo.cols) throw NonSquare("matrix is " + std::to_string(coo.rows) + "x" +
                                              std::to_string(coo.cols) + "; use --mode block-embed");
    return from_triplets(coo.rows, coo.entries);
}

std::vector<double> read_vector(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open start vector '" + path + "'");
    std::vector<double> v;
    std::string tok;
    while (in >> tok) {
        char* end = nullptr;
        const double x = std::strtod(tok.c_str(), &end);
        if (end == tok.c_str() || *end != '\0') throw ParseError("bad number '" + tok + "' in start vector", 0);
        v.push_back(x);
    }
    return v;
}

std::vector<double> start_vector(const RunConfig& cfg, const SkewSparseMatrix& A) {
    if (cfg.start == "uniform") return {};
    if (cfg.start == "purge-null") {
        const std::vector<double> ones(A.n(), 1.0);
        return A.apply(ones);
    }
    const auto v = read_vector(cfg.start.substr(5));
    if (v.size() != A.n())
        throw DimensionMismatch("start vector has " + std::to_string(v.size()) + " entries, matrix order is " +
                                std::to_string(A.n()));
    return v;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    CLI::App app{"Largest conjugate eigenpairs +-i*sigma of a sparse skew-symmetric matrix"};
    app.add_option("--input", cfg.input, "Matrix Market file")->required();
    app.add_option("--mode", cfg.mode, "How to obtain a skew-symmetric matrix from the input")
        ->check(CLI::IsMember({"as-is", "symmetrize", "block-embed"}));
    app.add_option("--k", cfg.k, "Number of conjugate pairs");
    app.add_option("--m", cfg.m, "Maximum subspace dimension");
    app.add_option("--tol", cfg.tol, "Relative residual tolerance");
    app.add_option("--max-restarts", cfg.max_restarts, "Restart limit");
    app.add_option("--reorth", cfg.reorth, "Reorthogonalization")
        ->check(CLI::IsMember({"partial", "full", "none"}));
    app.add_option("--start", cfg.start, "uniform, purge-null or file:PATH")
        ->check([](const std::string& s) {
            if (s == "uniform" || s == "purge-null" || (s.rfind("file:", 0) == 0 && s.size() > 5)) return std::string();
            return std::string("expected uniform, purge-null or file:PATH");
        });
    app.add_option("--output", cfg.output, "Output format")->check(CLI::IsMember({"text", "json", "csv-trace"}));
    app.add_option("--trace", cfg.trace, "Write the per-step trace as CSV to this file");
    app.add_option("--seed", cfg.seed, "Seed for random restart vectors");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        app.exit(e, out, err);
        return converged;
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return usage_error;
    }

    if (cfg.k < 1 || cfg.k >= cfg.m) {
        err << "error: need 1 <= k < m (k = " << cfg.k << ", m = " << cfg.m << ")\n";
        return usage_error;
    }
    if (!(cfg.tol > 0.0)) {
        err << "error: tol must be positive\n";
        return usage_error;
    }

    SolverOptions opts;
    opts.k = cfg.k;
    opts.m = cfg.m;
    opts.tol = cfg.tol;
    opts.max_restarts = cfg.max_restarts;
    opts.seed = cfg.seed;
    opts.reorth.mode = cfg.reorth == "full" ? ReorthMode::full : cfg.reorth == "none" ? ReorthMode::none
                                                                                       : ReorthMode::partial;
    opts.trace_steps = cfg.output == "csv-trace" || !cfg.trace.empty();

    SolveResult res;
    double wall = 0.0;
    try {
        const SkewSparseMatrix A = build_matrix(cfg);
        opts.q1 = start_vector(cfg, A);
        const auto t0 = std::chrono::steady_clock::now();
        res = solve(A, opts);
        wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    } catch (const InvalidOptions& e) {
        err << "error: " << e.what() << '\n';
        return usage_error;
    } catch (const ParseError& e) {
        err << "error: " << cfg.input << ':' << e.line() << ": " << e.what() << '\n';
        return input_error;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return input_error;
    }

    if (!cfg.trace.empty()) {
        std::ofstream tf(cfg.trace);
        if (!tf) {
            err << "error: cannot write trace '" << cfg.trace << "'\n";
            return input_error;
        }
        write_trace_csv(tf, res.trace);
    }

    if (cfg.output == "json") {
        nlohmann::json doc;
        doc["sigmas"] = nlohmann::json::array();
        doc["residuals"] = nlohmann::json::array();
        for (const auto& p : res.pairs) {
            doc["sigmas"].push_back(p.sigma);
            doc["residuals"].push_back(p.residual);
        }
        doc["mv_count"] = res.mv_count;
        doc["restarts"] = res.restarts;
        doc["converged"] = res.converged;
        doc["anorm_estimate"] = res.anorm;
        doc["wall_time"] = wall;
        out << doc.dump(2) << '\n';
    } else if (cfg.output == "csv-trace") {
        write_trace_csv(out, res.trace);
    } else {
        for (const auto& p : res.pairs) out << "±i·" << fmt("%.15g", p.sigma) << "  " << fmt("%.3e", p.residual) << '\n';
        out << "# converged " << (res.converged ? "yes" : "no") << ", #Mv " << res.mv_count << ", restarts "
            << res.restarts << ", time " << fmt("%.3f", wall) << " s\n";
    }
    if (!res.converged) err << "warning: not converged after " << res.restarts << " restarts\n";
    return res.converged ? converged : not_converged;
}

}  // namespace skeweig::cli
