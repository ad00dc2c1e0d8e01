#include "pdpha/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

#include "pdpha/parallel.hpp"

namespace pdpha {

MethodSpec parse_method_token(const std::string& token) {
    MethodSpec m;
    m.token = token;
    const size_t colon = token.find(':');
    const std::string head = colon == std::string::npos ? token : token.substr(0, colon);
    const std::string rest = colon == std::string::npos ? "" : token.substr(colon + 1);

    if (head == "dp") {
        m.kind = MethodSpec::Kind::Dp;
    } else if (head == "bf") {
        m.kind = MethodSpec::Kind::BruteForce;
    } else if (head == "nn") {
        m.kind = MethodSpec::Kind::NearestNeighbor;
    } else if (head == "sa") {
        m.kind = MethodSpec::Kind::Sa;
    } else if (head == "greedy") {
        m.kind = MethodSpec::Kind::Greedy;
        require(!rest.empty(), "method '" + token + "': greedy needs a checkpoint (greedy:ckpt)");
        m.ckpt_path = rest;
    } else if (head.rfind("sample", 0) == 0 && head.size() > 6) {
        m.kind = MethodSpec::Kind::Sample;
        size_t pos = 0;
        const std::string num = head.substr(6);
        m.samples = std::stoull(num, &pos);
        require(pos == num.size() && m.samples >= 1,
                "method '" + token + "': bad sample count '" + num + "'");
        require(!rest.empty(), "method '" + token + "': sampling needs a checkpoint (sample<N>:ckpt)");
        m.ckpt_path = rest;
    } else {
        throw std::invalid_argument("unknown method token '" + token + "'");
    }
    return m;
}

std::vector<MethodSpec> parse_method_list(const std::string& csv) {
    std::vector<MethodSpec> out;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (!tok.empty()) out.push_back(parse_method_token(tok));
    }
    require(!out.empty(), "no methods given");
    return out;
}

std::vector<SolvedRoute> run_method(const std::vector<Instance>& instances, const MethodSpec& method,
                                    const BenchOptions& opts) {
    std::vector<SolvedRoute> out(instances.size());

    // load once, copy per worker (parameter reads are shared-safe, but each
    // worker binds its own graphs)
    std::optional<PolicyNetwork> model;
    if (method.kind == MethodSpec::Kind::Greedy || method.kind == MethodSpec::Kind::Sample) {
        model.emplace(PolicyNetwork::load(method.ckpt_path));
    }

    parallel_chunks(instances.size(), opts.jobs, [&](size_t, size_t begin, size_t end) {
        std::optional<PolicyNetwork> local;
        if (model) local.emplace(*model);
        for (size_t i = begin; i < end; ++i) {
            const Instance& inst = instances[i];
            const auto t0 = std::chrono::steady_clock::now();
            SolveResult res;
            switch (method.kind) {
                case MethodSpec::Kind::Dp: res = exact_dp(inst); break;
                case MethodSpec::Kind::BruteForce: res = brute_force(inst); break;
                case MethodSpec::Kind::NearestNeighbor: res = nearest_neighbor(inst); break;
                case MethodSpec::Kind::Sa: {
                    SAConfig cfg = opts.sa;
                    cfg.seed = mix_seed(opts.seed, 0x5aULL, i);
                    res = simulated_annealing(inst, cfg);
                    break;
                }
                case MethodSpec::Kind::Greedy: {
                    Rollout r = local->greedy(inst);
                    res = SolveResult{r.perm, r.objective};
                    break;
                }
                case MethodSpec::Kind::Sample: {
                    Rng rng(mix_seed(opts.seed, std::hash<std::string>{}(method.token), i));
                    Rollout r = local->solve_sampling(inst, method.samples, rng);
                    res = SolveResult{r.perm, r.objective};
                    break;
                }
            }
            const double secs =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            out[i] = SolvedRoute{std::move(res.perm), res.objective, opts.measure_times ? secs : 0.0};
        }
    });
    return out;
}

EvalReport run_bench(const std::vector<Instance>& instances, const std::vector<MethodSpec>& methods,
                     const std::string& reference, const BenchOptions& opts) {
    require(!instances.empty(), "bench: no instances");
    require(!methods.empty(), "bench: no methods");

    EvalReport report;
    report.reference = reference;
    report.instance_count = instances.size();

    std::vector<double> means(methods.size(), 0.0);
    std::vector<double> times(methods.size(), 0.0);
    for (size_t mi = 0; mi < methods.size(); ++mi) {
        const std::vector<SolvedRoute> routes = run_method(instances, methods[mi], opts);
        for (const SolvedRoute& r : routes) {
            means[mi] += r.objective;
            times[mi] += r.seconds;
        }
        means[mi] /= static_cast<double>(instances.size());
        times[mi] /= static_cast<double>(instances.size());
    }

    double ref_mean = std::numeric_limits<double>::quiet_NaN();
    if (reference == "best") {
        ref_mean = *std::min_element(means.begin(), means.end());
    } else {
        for (size_t mi = 0; mi < methods.size(); ++mi)
            if (methods[mi].token == reference) ref_mean = means[mi];
        require(std::isfinite(ref_mean),
                "bench: reference '" + reference + "' is not among the methods (or use 'best')");
    }

    for (size_t mi = 0; mi < methods.size(); ++mi) {
        MethodRow row;
        row.method = methods[mi].token;
        row.mean_objective = means[mi];
        row.gap_percent = gap_percent(means[mi], ref_mean);
        row.mean_time_seconds = times[mi];
        report.rows.push_back(std::move(row));
    }
    return report;
}

void EvalReport::write_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << "# pdpha-report-v1\n";
    out << "# reference=" << reference << "\n";
    for (const std::string& note : header_notes) out << "# " << note << "\n";
    out << "method,instances,mean_objective,gap_percent,mean_time_seconds\n";
    char buf[256];
    for (const MethodRow& r : rows) {
        std::snprintf(buf, sizeof(buf), "%s,%zu,%.6f,%.6f,%.6f\n", r.method.c_str(), instance_count,
                      r.mean_objective, r.gap_percent, r.mean_time_seconds);
        out << buf;
    }
    if (!out) throw std::runtime_error("write failed for " + path);
}

std::string EvalReport::table() const {
    std::ostringstream os;
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%-28s %12s %10s %12s\n", "method", "mean obj", "gap %", "time/inst");
    os << buf;
    for (const MethodRow& r : rows) {
        std::snprintf(buf, sizeof(buf), "%-28s %12.4f %9.2f%% %11.4fs\n", r.method.c_str(),
                      r.mean_objective, r.gap_percent, r.mean_time_seconds);
        os << buf;
    }
    return os.str();
}

}  // namespace pdpha
