// pdpha command-line front end: instance generation, training, solving,
// benchmarking and generalization experiments.

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "pdpha/bench.hpp"
#include "pdpha/training.hpp"

namespace {

using namespace pdpha;

uint64_t resolve_seed(const CLI::Option* seed_opt, uint64_t seed_value) {
    if (seed_opt->count() > 0) return seed_value;
    if (const char* env = std::getenv("PDPHA_SEED")) {
        return std::stoull(env);
    }
    return seed_value;
}

int cmd_generate(size_t n, size_t count, const std::string& dist, double sdv, uint64_t seed,
                 const std::string& out_path) {
    GeneratorConfig cfg{n, parse_distribution(dist), sdv, seed};
    const std::vector<Instance> instances = generate_many(cfg, count);
    save_instances(instances, out_path);
    std::cout << "wrote " << instances.size() << " instances to " << out_path << "\n";
    return 0;
}

int cmd_train(const std::string& config_path, const std::string& out_ckpt, const std::string& log_path,
              int jobs, const CLI::Option* seed_opt, uint64_t seed_value) {
    TrainConfig cfg = TrainConfig::from_json_file(config_path);
    if (seed_opt->count() > 0) {
        cfg.seed = seed_value;
    } else if (const char* env = std::getenv("PDPHA_SEED")) {
        cfg.seed = std::stoull(env);
    }
    std::string log = log_path.empty() ? out_ckpt + ".log.csv" : log_path;
    TrainReport report = train(cfg, out_ckpt, log, jobs);
    std::cout << "trained " << report.epochs.size() << " epochs; checkpoint: " << out_ckpt
              << "; log: " << log << "\n";
    if (!report.epochs.empty()) {
        std::cout << "final mean greedy objective on eval set: " << report.epochs.back().mean_greedy_obj
                  << "\n";
    }
    return 0;
}

int cmd_solve(const std::string& ckpt, const std::string& instances_path, const std::string& mode,
              size_t samples, const std::string& out_path, int jobs, uint64_t seed, bool no_times) {
    const std::vector<Instance> instances = load_instances(instances_path);
    MethodSpec spec = mode == "greedy"
                          ? parse_method_token("greedy:" + ckpt)
                          : parse_method_token("sample" + std::to_string(samples) + ":" + ckpt);
    BenchOptions opts;
    opts.jobs = jobs;
    opts.seed = seed;
    opts.measure_times = !no_times;
    const std::vector<SolvedRoute> routes = run_method(instances, spec, opts);

    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot open " + out_path + " for writing");
    for (size_t i = 0; i < routes.size(); ++i) {
        const RouteEvaluation ev = validate_route(instances[i], routes[i].perm);
        out << route_to_json_line(routes[i].perm, routes[i].objective, ev.feasible,
                                  no_times ? -1.0 : routes[i].seconds)
            << "\n";
    }
    std::cout << "solved " << routes.size() << " instances (" << spec.token << ") -> " << out_path
              << "\n";
    return 0;
}

int cmd_bench(const std::string& instances_path, const std::string& methods_csv, const std::string& ref,
              const std::string& out_path, int jobs, uint64_t seed, bool no_times) {
    const std::vector<Instance> instances = load_instances(instances_path);
    const std::vector<MethodSpec> methods = parse_method_list(methods_csv);
    BenchOptions opts;
    opts.jobs = jobs;
    opts.seed = seed;
    opts.measure_times = !no_times;
    EvalReport report = run_bench(instances, methods, ref, opts);
    if (!out_path.empty()) report.write_csv(out_path);
    std::cout << report.table();
    return 0;
}

int cmd_generalize(const std::string& ckpt, size_t train_n, size_t eval_n, size_t count,
                   const std::string& dist, double sdv, const std::string& mode, size_t samples,
                   const std::string& ref, const std::string& out_path, int jobs, uint64_t seed,
                   bool no_times) {
    GeneratorConfig gen{eval_n, parse_distribution(dist), sdv, seed};
    const std::vector<Instance> instances = generate_many(gen, count);

    std::string policy_token = mode == "greedy" ? "greedy:" + ckpt
                                                : "sample" + std::to_string(samples) + ":" + ckpt;
    std::vector<MethodSpec> methods;
    if (ref == "dp") methods.push_back(parse_method_token("dp"));
    methods.push_back(parse_method_token(policy_token));

    BenchOptions opts;
    opts.jobs = jobs;
    opts.seed = seed;
    opts.measure_times = !no_times;
    EvalReport report = run_bench(instances, methods, ref, opts);
    report.header_notes.push_back("train_n=" + std::to_string(train_n));
    report.header_notes.push_back("eval_n=" + std::to_string(eval_n));
    report.header_notes.push_back("dist=" + dist);
    if (parse_distribution(dist) == Distribution::Gaussian)
        report.header_notes.push_back("sdv=" + std::to_string(sdv));
    if (!out_path.empty()) report.write_csv(out_path);
    std::cout << report.table();
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"pdpha: attention-based deep-RL solver and baselines for the single-vehicle "
                 "pickup-and-delivery problem"};
    app.require_subcommand(1);

    uint64_t seed = 0;

    // generate
    auto* gen = app.add_subcommand("generate", "generate random instances into a .pdp.jsonl file");
    size_t gen_n = 10, gen_count = 100;
    std::string gen_dist = "uniform", gen_out = "instances.pdp.jsonl";
    double gen_sdv = 1.0;
    gen->add_option("--n", gen_n, "pickup/delivery pairs per instance")->check(CLI::PositiveNumber);
    gen->add_option("--count", gen_count, "number of instances");
    gen->add_option("--dist", gen_dist, "uniform|gaussian")->check(CLI::IsMember({"uniform", "gaussian"}));
    gen->add_option("--sdv", gen_sdv, "gaussian per-axis standard deviation")->check(CLI::PositiveNumber);
    auto* gen_seed = gen->add_option("--seed", seed, "generator seed (PDPHA_SEED fallback)");
    gen->add_option("--out", gen_out, "output path");

    // train
    auto* tr = app.add_subcommand("train", "train a policy per a JSON config");
    std::string tr_config, tr_out = "ckpt.pdpha", tr_log;
    int tr_jobs = 1;
    tr->add_option("--config", tr_config, "train config JSON")->required()->check(CLI::ExistingFile);
    tr->add_option("--out", tr_out, "output checkpoint path");
    tr->add_option("--log", tr_log, "training log CSV (default <out>.log.csv)");
    tr->add_option("--jobs", tr_jobs, "parallel rollout workers (1 = bit-reproducible)")
        ->check(CLI::PositiveNumber);
    auto* tr_seed = tr->add_option("--seed", seed, "overrides the config seed");

    // solve
    auto* so = app.add_subcommand("solve", "decode routes for an instance file with a checkpoint");
    std::string so_ckpt, so_instances, so_mode = "greedy", so_out = "routes.jsonl";
    size_t so_samples = 1280;
    int so_jobs = 1;
    bool so_no_times = false;
    so->add_option("--ckpt", so_ckpt, "checkpoint path")->required()->check(CLI::ExistingFile);
    so->add_option("--instances", so_instances, "instance .pdp.jsonl")->required()->check(CLI::ExistingFile);
    so->add_option("--mode", so_mode, "greedy|sample")->check(CLI::IsMember({"greedy", "sample"}));
    so->add_option("--samples", so_samples, "samples per instance in sample mode");
    so->add_option("--out", so_out, "output route JSONL");
    so->add_option("--jobs", so_jobs, "parallel workers")->check(CLI::PositiveNumber);
    auto* so_seed = so->add_option("--seed", seed, "sampling seed (PDPHA_SEED fallback)");
    so->add_flag("--no-times", so_no_times, "omit wall-clock fields (byte-stable output)");

    // bench
    auto* be = app.add_subcommand("bench", "run methods over an instance file and report a gap table");
    std::string be_instances, be_methods = "dp,nn,sa", be_ref = "best", be_out;
    int be_jobs = 1;
    bool be_no_times = false;
    be->add_option("--instances", be_instances, "instance .pdp.jsonl")->required()->check(CLI::ExistingFile);
    be->add_option("--methods", be_methods,
                   "comma list: dp,bf,nn,sa,greedy:CKPT,sample<N>:CKPT");
    be->add_option("--ref", be_ref, "gap reference: a method token or 'best'");
    be->add_option("--out", be_out, "report CSV path");
    be->add_option("--jobs", be_jobs, "parallel workers")->check(CLI::PositiveNumber);
    auto* be_seed = be->add_option("--seed", seed, "sampling seed (PDPHA_SEED fallback)");
    be->add_flag("--no-times", be_no_times, "write 0.0 in the time column (byte-stable output)");

    // generalize
    auto* ge = app.add_subcommand("generalize",
                                  "evaluate a checkpoint on a different size or distribution");
    std::string ge_ckpt, ge_dist = "uniform", ge_mode = "greedy", ge_ref = "dp", ge_out;
    size_t ge_train_n = 5, ge_eval_n = 10, ge_count = 100, ge_samples = 128;
    double ge_sdv = 1.0;
    int ge_jobs = 1;
    bool ge_no_times = false;
    ge->add_option("--ckpt", ge_ckpt, "checkpoint path")->required()->check(CLI::ExistingFile);
    ge->add_option("--train-n", ge_train_n, "n the checkpoint was trained on (report label)");
    ge->add_option("--eval-n", ge_eval_n, "n to evaluate on")->check(CLI::PositiveNumber);
    ge->add_option("--count", ge_count, "instances to generate");
    ge->add_option("--dist", ge_dist, "uniform|gaussian")->check(CLI::IsMember({"uniform", "gaussian"}));
    ge->add_option("--sdv", ge_sdv, "gaussian per-axis sdv")->check(CLI::PositiveNumber);
    ge->add_option("--mode", ge_mode, "greedy|sample")->check(CLI::IsMember({"greedy", "sample"}));
    ge->add_option("--samples", ge_samples, "samples per instance in sample mode");
    ge->add_option("--ref", ge_ref, "gap reference: 'dp' or 'best'");
    ge->add_option("--out", ge_out, "report CSV path");
    ge->add_option("--jobs", ge_jobs, "parallel workers")->check(CLI::PositiveNumber);
    auto* ge_seed = ge->add_option("--seed", seed, "generation/sampling seed (PDPHA_SEED fallback)");
    ge->add_flag("--no-times", ge_no_times, "write 0.0 in the time column");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;  // usage errors exit 2, help exits 0
    }

    try {
        if (gen->parsed())
            return cmd_generate(gen_n, gen_count, gen_dist, gen_sdv, resolve_seed(gen_seed, seed), gen_out);
        if (tr->parsed()) return cmd_train(tr_config, tr_out, tr_log, tr_jobs, tr_seed, seed);
        if (so->parsed())
            return cmd_solve(so_ckpt, so_instances, so_mode, so_samples, so_out, so_jobs,
                             resolve_seed(so_seed, seed), so_no_times);
        if (be->parsed())
            return cmd_bench(be_instances, be_methods, be_ref, be_out, be_jobs,
                             resolve_seed(be_seed, seed), be_no_times);
        if (ge->parsed())
            return cmd_generalize(ge_ckpt, ge_train_n, ge_eval_n, ge_count, ge_dist, ge_sdv, ge_mode,
                                  ge_samples, ge_ref, ge_out, ge_jobs, resolve_seed(ge_seed, seed),
                                  ge_no_times);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
