#include "pdpha/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "json.hpp"

namespace pdpha {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void enumerate_rec(const Instance& inst, std::vector<int>& prefix, std::vector<uint8_t>& visited,
                   const std::function<void(const std::vector<int>&)>& fn) {
    const size_t n = inst.n();
    if (prefix.size() == 2 * n) {
        fn(prefix);
        return;
    }
    for (size_t j = 1; j <= 2 * n; ++j) {
        if (visited[j]) continue;
        if (inst.is_delivery(j) && !visited[inst.pickup_of(j)]) continue;
        visited[j] = 1;
        prefix.push_back(static_cast<int>(j));
        enumerate_rec(inst, prefix, visited, fn);
        prefix.pop_back();
        visited[j] = 0;
    }
}

}  // namespace

void enumerate_feasible_routes(const Instance& inst,
                               const std::function<void(const std::vector<int>&)>& fn) {
    inst.validate();
    std::vector<int> prefix;
    std::vector<uint8_t> visited(inst.num_nodes(), 0);
    prefix.reserve(2 * inst.n());
    enumerate_rec(inst, prefix, visited, fn);
}

SolveResult brute_force(const Instance& inst) {
    inst.validate();
    require(inst.n() <= 4, "brute_force: n must be <= 4 (got " + std::to_string(inst.n()) + ")");
    SolveResult best;
    best.objective = kInf;
    enumerate_feasible_routes(inst, [&](const std::vector<int>& perm) {
        const double obj = route_objective(inst, perm);
        if (obj < best.objective) {  // first hit among ties is lexicographically smallest
            best.objective = obj;
            best.perm = perm;
        }
    });
    return best;
}

SolveResult exact_dp(const Instance& inst) {
    inst.validate();
    const size_t n = inst.n();
    const size_t n2 = 2 * n;
    require(n2 <= 20, "exact_dp: 2n must be <= 20 (got " + std::to_string(n2) + ")");

    // Visited sets are encoded two ways: a 2n-bit mask (bit j-1 <=> node j
    // visited) drives enumeration; a base-3 "pair state" index (0 none,
    // 1 pickup only, 2 both) addresses the table, so only precedence-closed
    // sets are stored.
    std::vector<size_t> pow3(n + 1, 1);
    for (size_t i = 1; i <= n; ++i) pow3[i] = pow3[i - 1] * 3;
    const size_t n_states = pow3[n];

    std::vector<double> best(n_states * n2, kInf);
    std::vector<int8_t> parent(n_states * n2, -1);

    const double f = inst.speed;
    // dense distance matrix; DP transitions hit it heavily
    const size_t nn = inst.num_nodes();
    std::vector<double> dist(nn * nn);
    for (size_t i = 0; i < nn; ++i)
        for (size_t j = 0; j < nn; ++j) dist[i * nn + j] = distance(inst, i, j);

    for (size_t i = 1; i <= n; ++i) {
        const size_t compact = pow3[i - 1];
        best[compact * n2 + (i - 1)] = dist[i] / f;
        parent[compact * n2 + (i - 1)] = 0;
    }

    const uint32_t full = (n2 == 32) ? 0xffffffffu : ((1u << n2) - 1u);
    const uint32_t pick_mask = (1u << n) - 1u;
    for (uint32_t mask = 1; mask < full; ++mask) {
        const uint32_t picks = mask & pick_mask;
        const uint32_t dels = mask >> n;
        if ((dels & ~picks) != 0) continue;  // delivery without its pickup
        size_t compact = 0;
        for (size_t i = 0; i < n; ++i)
            compact += pow3[i] * (((picks >> i) & 1u) + ((dels >> i) & 1u));
        for (size_t last = 1; last <= n2; ++last) {
            if (!((mask >> (last - 1)) & 1u)) continue;
            const double cost = best[compact * n2 + (last - 1)];
            if (cost == kInf) continue;
            for (size_t j = 1; j <= n2; ++j) {
                if ((mask >> (j - 1)) & 1u) continue;
                if (j > n && !((mask >> (j - n - 1)) & 1u)) continue;  // pickup pending
                const size_t pair = (j > n) ? (j - n - 1) : (j - 1);
                const size_t next_compact = compact + pow3[pair];
                const double cand = cost + dist[last * nn + j] / f;
                double& slot = best[next_compact * n2 + (j - 1)];
                if (cand < slot) {
                    slot = cand;
                    parent[next_compact * n2 + (j - 1)] = static_cast<int8_t>(last);
                }
            }
        }
    }

    const size_t full_compact = n_states - 1;  // all digits 2
    SolveResult res;
    res.objective = kInf;
    size_t best_last = 0;
    for (size_t last = 1; last <= n2; ++last) {
        const double cost = best[full_compact * n2 + (last - 1)];
        if (cost == kInf) continue;
        const double total = cost + dist[last * nn] / f;
        if (total < res.objective) {
            res.objective = total;
            best_last = last;
        }
    }
    require(best_last != 0, "exact_dp: no feasible route found");

    // walk parents back to the depot
    size_t compact = full_compact;
    size_t last = best_last;
    res.perm.reserve(n2);
    while (last != 0) {
        res.perm.push_back(static_cast<int>(last));
        const int8_t prev = parent[compact * n2 + (last - 1)];
        const size_t pair = (last > n) ? (last - n - 1) : (last - 1);
        compact -= pow3[pair];
        last = static_cast<size_t>(prev);
    }
    std::reverse(res.perm.begin(), res.perm.end());
    return res;
}

SolveResult nearest_neighbor(const Instance& inst) {
    State st = initial_state(inst);
    double total = 0.0;
    while (!st.complete()) {
        const ActionMask m = mask(st);
        int pick = -1;
        double best = kInf;
        for (size_t j = 1; j < m.allowed.size(); ++j) {
            if (!m.allowed[j]) continue;
            const double d = distance(inst, st.last_node(), j);
            if (d < best) {
                best = d;
                pick = static_cast<int>(j);
            }
        }
        auto [next, reward] = step(st, pick);
        st = std::move(next);
        total -= reward;
    }
    return SolveResult{st.route, total};
}

void SAConfig::validate() const {
    require(cooling > 0.0 && cooling < 1.0, "SA config: cooling must be in (0,1)");
    require(moves_per_temperature >= 1, "SA config: moves_per_temperature must be >= 1");
}

SAConfig sa_config_from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    nlohmann::json j = nlohmann::json::parse(in);
    SAConfig cfg;
    cfg.initial_temperature = j.value("initial_temperature", cfg.initial_temperature);
    cfg.cooling = j.value("cooling", cfg.cooling);
    cfg.iterations = j.value("iterations", cfg.iterations);
    cfg.moves_per_temperature = j.value("moves_per_temperature", cfg.moves_per_temperature);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.validate();
    return cfg;
}

namespace {

bool precedence_ok(const Instance& inst, const std::vector<int>& perm) {
    const size_t n2 = 2 * inst.n();
    std::vector<size_t> pos(n2 + 1, 0);
    for (size_t k = 0; k < perm.size(); ++k) pos[perm[k]] = k;
    for (size_t i = 1; i <= inst.n(); ++i)
        if (pos[i] > pos[inst.delivery_of(i)]) return false;
    return true;
}

}  // namespace

SolveResult simulated_annealing(const Instance& inst, const SAConfig& cfg) {
    cfg.validate();
    SolveResult cur = nearest_neighbor(inst);
    SolveResult best = cur;
    const size_t n2 = 2 * inst.n();
    if (n2 < 2) return best;

    double temp = cfg.initial_temperature;
    if (temp <= 0.0) {
        // mean pairwise node distance
        double s = 0.0;
        size_t cnt = 0;
        for (size_t i = 0; i < inst.num_nodes(); ++i)
            for (size_t j = i + 1; j < inst.num_nodes(); ++j) {
                s += distance(inst, i, j);
                ++cnt;
            }
        temp = s / static_cast<double>(cnt);
    }

    Rng rng(cfg.seed);
    std::vector<int> cand;
    for (size_t it = 0; it < cfg.iterations; ++it) {
        for (size_t mv = 0; mv < cfg.moves_per_temperature; ++mv) {
            cand = cur.perm;
            if (rng.uniform() < 0.5) {
                // relocate one node to a random position
                const size_t from = rng.below(n2);
                size_t to = rng.below(n2);
                if (from == to) continue;
                const int node = cand[from];
                cand.erase(cand.begin() + from);
                cand.insert(cand.begin() + to, node);
            } else {
                const size_t a = rng.below(n2);
                const size_t b = rng.below(n2);
                if (a == b) continue;
                std::swap(cand[a], cand[b]);
            }
            if (!precedence_ok(inst, cand)) continue;
            const double obj = route_objective(inst, cand);
            const double delta = obj - cur.objective;
            if (delta <= 0.0 || rng.uniform() < std::exp(-delta / temp)) {
                cur.perm = cand;
                cur.objective = obj;
                if (cur.objective < best.objective) best = cur;
            }
        }
        temp *= cfg.cooling;
    }
    return best;
}

}  // namespace pdpha
