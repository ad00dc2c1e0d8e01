#include "pdpha/env.hpp"

#include "json.hpp"

namespace pdpha {

State initial_state(const Instance& inst) {
    inst.validate();
    State s;
    s.inst = &inst;
    s.visited.assign(inst.num_nodes(), 0);
    return s;
}

ActionMask mask(const State& state) {
    const Instance& inst = *state.inst;
    require(!state.complete(), "mask: route already complete");
    const size_t n = inst.n();
    ActionMask m;
    m.allowed.assign(inst.num_nodes(), 0);
    for (size_t j = 1; j <= 2 * n; ++j) {
        if (state.visited[j]) continue;
        if (inst.is_pickup(j)) {
            m.allowed[j] = 1;
        } else if (state.visited[inst.pickup_of(j)]) {
            m.allowed[j] = 1;
        }
    }
    return m;
}

std::pair<State, double> step(const State& state, int action) {
    const Instance& inst = *state.inst;
    ActionMask m = mask(state);
    if (action < 0 || static_cast<size_t>(action) >= m.allowed.size() || !m.allowed[action]) {
        throw std::invalid_argument("step: action " + std::to_string(action) + " is masked (infeasible)");
    }
    State next = state;
    next.route.push_back(action);
    next.visited[action] = 1;
    double reward = -distance(inst, state.last_node(), action) / inst.speed;
    if (next.complete()) reward -= distance(inst, action, 0) / inst.speed;
    return {std::move(next), reward};
}

namespace {

// permutation of 1..2n check; fills `seen` as a side effect
bool is_full_permutation(const Instance& inst, const std::vector<int>& perm, std::string* why) {
    const size_t n2 = 2 * inst.n();
    if (perm.size() != n2) {
        if (why) *why = "expected " + std::to_string(n2) + " nodes, got " + std::to_string(perm.size());
        return false;
    }
    std::vector<uint8_t> seen(n2 + 1, 0);
    for (int p : perm) {
        if (p < 1 || static_cast<size_t>(p) > n2) {
            if (why) *why = "node index " + std::to_string(p) + " out of range 1.." + std::to_string(n2);
            return false;
        }
        if (seen[p]) {
            if (why) *why = "node " + std::to_string(p) + " visited more than once";
            return false;
        }
        seen[p] = 1;
    }
    return true;
}

}  // namespace

double route_objective(const Instance& inst, const std::vector<int>& perm) {
    inst.validate();
    std::string why;
    if (!is_full_permutation(inst, perm, &why)) {
        throw std::invalid_argument("route_objective: not a permutation of 1..2n: " + why);
    }
    double total = distance(inst, 0, perm.front());
    for (size_t k = 0; k + 1 < perm.size(); ++k) total += distance(inst, perm[k], perm[k + 1]);
    total += distance(inst, perm.back(), 0);
    return total / inst.speed;
}

RouteEvaluation validate_route(const Instance& inst, const std::vector<int>& perm) {
    inst.validate();
    RouteEvaluation ev;

    // arrival times along the sequence as given, clamping indices for safety
    const size_t n2 = 2 * inst.n();
    double t = 0.0;
    int prev = 0;
    bool indices_ok = true;
    for (int p : perm) {
        if (p < 0 || static_cast<size_t>(p) > n2) {
            indices_ok = false;
            break;
        }
        t += distance(inst, prev, p) / inst.speed;
        ev.arrival_times.push_back(t);
        prev = p;
    }
    if (indices_ok && !perm.empty()) t += distance(inst, prev, 0) / inst.speed;
    ev.total_time = indices_ok ? t : 0.0;

    std::string why;
    if (!indices_ok || !is_full_permutation(inst, perm, &why)) {
        ev.feasible = false;
        ev.violation = indices_ok ? why : "node index out of range";
        return ev;
    }
    std::vector<size_t> position(n2 + 1, 0);
    for (size_t k = 0; k < perm.size(); ++k) position[perm[k]] = k;
    for (size_t i = 1; i <= inst.n(); ++i) {
        const size_t d = inst.delivery_of(i);
        if (position[i] > position[d]) {
            ev.feasible = false;
            ev.violation = "precedence violated for pair (" + std::to_string(i) + "," + std::to_string(d) +
                           "): delivery before pickup";
            return ev;
        }
    }
    ev.feasible = true;
    return ev;
}

std::string route_to_json_line(const std::vector<int>& perm, double objective, bool feasible,
                               double time_seconds) {
    nlohmann::json j;
    j["perm"] = perm;
    j["objective"] = objective;
    j["feasible"] = feasible;
    if (time_seconds >= 0.0) j["time"] = time_seconds;
    return j.dump();
}

}  // namespace pdpha
