#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "pdpha/env.hpp"
#include "pdpha/instance.hpp"

namespace pdpha {

struct SolveResult {
    std::vector<int> perm;
    double objective = 0.0;
};

// Calls fn for every precedence-feasible visit order, in lexicographic order.
// There are (2n)!/2^n of them.
void enumerate_feasible_routes(const Instance& inst,
                               const std::function<void(const std::vector<int>&)>& fn);

// Exhaustive optimum; ties resolved to the lexicographically smallest perm.
// Guarded to n <= 4.
SolveResult brute_force(const Instance& inst);

// Exact optimum by dynamic programming over precedence-closed visited sets
// (Held-Karp style restricted to states where every delivery's pickup is
// already in the set). Guarded to 2n <= 20.
SolveResult exact_dp(const Instance& inst);

// Greedy construction: always move to the nearest mask-allowed node, ties to
// the lowest index.
SolveResult nearest_neighbor(const Instance& inst);

struct SAConfig {
    double initial_temperature = 0.0;  // <= 0 means auto: mean pairwise distance
    double cooling = 0.999;            // geometric factor per iteration
    size_t iterations = 20000;
    size_t moves_per_temperature = 1;
    uint64_t seed = 0;

    void validate() const;
};

SAConfig sa_config_from_json_file(const std::string& path);

// Simulated annealing over feasibility-preserving relocate/swap moves,
// starting from the nearest-neighbor route; returns the best solution seen.
SolveResult simulated_annealing(const Instance& inst, const SAConfig& cfg);

// percentage excess over a reference objective
inline double gap_percent(double obj, double ref) { return (obj - ref) / ref * 100.0; }

}  // namespace pdpha
