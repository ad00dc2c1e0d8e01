#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pdpha/baselines.hpp"
#include "pdpha/model.hpp"

namespace pdpha {

// A method token from the CLI: "dp", "nn", "sa", "bf", "greedy:ckpt" or
// "sample<N>:ckpt" (e.g. "sample1280:model.pdpha").
struct MethodSpec {
    enum class Kind { Dp, BruteForce, NearestNeighbor, Sa, Greedy, Sample };
    Kind kind;
    size_t samples = 0;      // Sample only
    std::string ckpt_path;   // Greedy/Sample only
    std::string token;       // verbatim, used as the report row label
};

MethodSpec parse_method_token(const std::string& token);
std::vector<MethodSpec> parse_method_list(const std::string& csv);

struct MethodRow {
    std::string method;
    double mean_objective = 0.0;
    double gap_percent = 0.0;
    double mean_time_seconds = 0.0;
};

struct EvalReport {
    std::string reference;  // method token or "best"
    size_t instance_count = 0;
    std::vector<MethodRow> rows;
    std::vector<std::string> header_notes;  // extra "# key=value" comment lines

    // schema: "# pdpha-report-v1" comment, then
    // method,instances,mean_objective,gap_percent,mean_time_seconds
    void write_csv(const std::string& path) const;
    std::string table() const;  // human-readable
};

struct BenchOptions {
    int jobs = 1;
    uint64_t seed = 0;          // drives sampling decoders
    bool measure_times = true;  // false writes 0.0 in the time column
    SAConfig sa;
};

// Runs every method on every instance, computes mean objective, gap relative
// to `reference` ("best" = best mean over the listed methods) and mean
// per-instance solve time (solver call only, I/O excluded).
EvalReport run_bench(const std::vector<Instance>& instances, const std::vector<MethodSpec>& methods,
                     const std::string& reference, const BenchOptions& opts);

// Per-instance routes of one method (for the solve command / route dumps).
struct SolvedRoute {
    std::vector<int> perm;
    double objective = 0.0;
    double seconds = 0.0;
};

std::vector<SolvedRoute> run_method(const std::vector<Instance>& instances, const MethodSpec& method,
                                    const BenchOptions& opts);

}  // namespace pdpha
