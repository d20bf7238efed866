#ifndef SKEWEIG_TOOLS_CLI_HPP
#define SKEWEIG_TOOLS_CLI_HPP

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <string>

namespace skeweig::cli {

enum ExitCode : int { converged = 0, input_error = 1, not_converged = 2, usage_error = 64 };

struct RunConfig {
    std::string input;
    std::string mode = "as-is";  // as-is | symmetrize | block-embed
    std::size_t k = 1;
    std::size_t m = 30;
    double tol = 1e-8;
    std::size_t max_restarts = 2000;
    std::string reorth = "partial";  // partial | full | none
    std::string start = "uniform";   // uniform | purge-null | file:PATH
    std::string output = "text";     // text | json | csv-trace
    std::string trace;               // optional csv trace file
    std::uint64_t seed = 0;
};

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace skeweig::cli

#endif  // SKEWEIG_TOOLS_CLI_HPP
