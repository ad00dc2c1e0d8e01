#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "pdpha/instance.hpp"

namespace pdpha {

// Partial route under construction. Immutable by convention: step() returns a
// new State, so parallel rollouts over different instances share nothing.
struct State {
    const Instance* inst = nullptr;
    std::vector<int> route;           // visited non-depot nodes, in visit order
    std::vector<uint8_t> visited;     // indexed 0..2n (depot entry unused)

    size_t step_count() const { return route.size(); }
    bool complete() const { return route.size() == 2 * inst->n(); }
    int last_node() const { return route.empty() ? 0 : route.back(); }
};

struct ActionMask {
    std::vector<uint8_t> allowed;  // indexed 0..2n; depot always 0

    size_t count_allowed() const {
        size_t c = 0;
        for (uint8_t a : allowed) c += a;
        return c;
    }
};

struct RouteEvaluation {
    std::vector<double> arrival_times;  // per route position
    double total_time = 0.0;            // includes the return leg to the depot
    bool feasible = false;
    std::string violation;              // empty when feasible
};

State initial_state(const Instance& inst);

// allowed(j) <=> j unvisited and (j is a pickup, or j is a delivery whose
// paired pickup was visited). Throws on a completed route.
ActionMask mask(const State& state);

// Appends `action` and returns (new state, reward). Reward is the negative
// incremental travel time; the final step folds in the return leg so that the
// summed rewards equal the negated route objective. Throws on masked actions.
std::pair<State, double> step(const State& state, int action);

// (D_{0,pi_1} + sum D_{pi_k,pi_k+1} + D_{pi_2n,0}) / f for a full permutation
// of 1..2n. Throws if perm is not such a permutation.
double route_objective(const Instance& inst, const std::vector<int>& perm);

// Scores any sequence of node indices; infeasibility is a verdict, never an
// exception.
RouteEvaluation validate_route(const Instance& inst, const std::vector<int>& perm);

// Route/solution JSON line: {"perm":[...], "objective":..., "feasible":...}
// with an optional "time" field (seconds).
std::string route_to_json_line(const std::vector<int>& perm, double objective, bool feasible,
                               double time_seconds = -1.0);

}  // namespace pdpha
