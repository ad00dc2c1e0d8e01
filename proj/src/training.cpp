#include "pdpha/training.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>

#include "pdpha/parallel.hpp"

namespace pdpha {

void TrainConfig::validate() const {
    require(batch_size >= 1, "train config: batch_size must be >= 1");
    require(batches_per_epoch >= 1, "train config: batches_per_epoch must be >= 1");
    require(learning_rate > 0, "train config: learning_rate must be > 0");
    require(alpha > 0 && alpha < 1, "train config: alpha must be in (0,1)");
    require(ttest_eval_size >= 2, "train config: ttest_eval_size must be >= 2");
    require(n >= 1, "train config: n must be >= 1");
    encoder.validate();
    decoder.validate();
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j) {
    TrainConfig c;
    c.epochs = j.value("epochs", c.epochs);
    c.batches_per_epoch = j.value("batches_per_epoch", c.batches_per_epoch);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.alpha = j.value("alpha", c.alpha);
    c.ttest_eval_size = j.value("ttest_eval_size", c.ttest_eval_size);
    c.n = j.value("n", c.n);
    c.seed = j.value("seed", c.seed);
    if (j.contains("encoder")) {
        const nlohmann::json& e = j.at("encoder");
        c.encoder.d_h = e.value("d_h", c.encoder.d_h);
        c.encoder.M = e.value("M", c.encoder.M);
        c.encoder.N = e.value("N", c.encoder.N);
        c.encoder.ff_hidden = e.value("ff_hidden", c.encoder.ff_hidden);
        if (e.contains("attention_mode"))
            c.encoder.attention_mode = parse_attention_mode(e.at("attention_mode").get<std::string>());
        c.encoder.share_kv = e.value("share_kv", c.encoder.share_kv);
    }
    if (j.contains("decoder")) {
        c.decoder.clip = j.at("decoder").value("clip", c.decoder.clip);
    }
    c.validate();
    return c;
}

TrainConfig TrainConfig::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open train config " + path);
    return from_json(nlohmann::json::parse(in));
}

nlohmann::json TrainConfig::to_json() const {
    nlohmann::json j;
    j["epochs"] = epochs;
    j["batches_per_epoch"] = batches_per_epoch;
    j["batch_size"] = batch_size;
    j["learning_rate"] = learning_rate;
    j["alpha"] = alpha;
    j["ttest_eval_size"] = ttest_eval_size;
    j["n"] = n;
    j["seed"] = seed;
    j["encoder"] = {{"d_h", encoder.d_h},
                    {"M", encoder.M},
                    {"N", encoder.N},
                    {"ff_hidden", encoder.ff_hidden},
                    {"attention_mode", attention_mode_name(encoder.attention_mode)},
                    {"share_kv", encoder.share_kv}};
    j["decoder"] = {{"clip", decoder.clip}};
    return j;
}

void TrainReport::write_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << "# pdpha-trainlog-v1\n";
    out << "epoch,mean_sample_reward,mean_greedy_obj,replaced,seconds\n";
    char buf[160];
    for (const EpochStats& e : epochs) {
        std::snprintf(buf, sizeof(buf), "%zu,%.6f,%.6f,%d,%.3f\n", e.epoch, e.mean_sample_reward,
                      e.mean_greedy_obj, e.replaced ? 1 : 0, e.seconds);
        out << buf;
    }
    if (!out) throw std::runtime_error("write failed for " + path);
}

bool TrainReport::same_results(const TrainReport& other) const {
    if (epochs.size() != other.epochs.size()) return false;
    for (size_t i = 0; i < epochs.size(); ++i) {
        const EpochStats& a = epochs[i];
        const EpochStats& b = other.epochs[i];
        if (a.epoch != b.epoch || a.mean_sample_reward != b.mean_sample_reward ||
            a.mean_greedy_obj != b.mean_greedy_obj || a.replaced != b.replaced)
            return false;
    }
    return true;
}

BatchStats reinforce_batch(PolicyNetwork& policy, PolicyNetwork& baseline,
                           const std::vector<Instance>& batch, AdamOptimizer& opt,
                           uint64_t rollout_seed, int jobs) {
    require(!batch.empty(), "reinforce_batch: empty batch");
    const size_t n = batch.front().n();
    for (const Instance& inst : batch)
        require(inst.n() == n, "reinforce_batch: instances must share the same n");

    const size_t B = batch.size();
    std::vector<double> rewards(B), advantages(B), baseline_objs(B);
    const size_t workers = std::min<size_t>(static_cast<size_t>(jobs), B);
    std::vector<GradBuffer> buffers(workers, GradBuffer(policy.params().count()));

    parallel_chunks(B, jobs, [&](size_t worker, size_t begin, size_t end) {
        for (size_t b = begin; b < end; ++b) {
            const Instance& inst = batch[b];
            Graph g(true);
            Embeddings emb = policy.encode_instance(g, inst);
            Rng rng(mix_seed(rollout_seed, b));
            Var total_logp;
            Rollout sampled = rollout_sample(g, inst, emb, policy.decoder_params(),
                                             policy.encoder_config(), policy.decoder_config(), rng,
                                             &total_logp);
            Graph gb(false);
            Embeddings emb_b = baseline.encode_instance(gb, inst);
            Rollout base = rollout_greedy(gb, inst, emb_b, baseline.decoder_params(),
                                          baseline.encoder_config(), baseline.decoder_config());

            // R - v with rewards being negated objectives
            const double advantage = base.objective - sampled.objective;
            rewards[b] = -sampled.objective;
            advantages[b] = advantage;
            baseline_objs[b] = base.objective;

            // loss contribution: (R - v) * (-log p) / B, advantage constant
            Var loss = g.scale(total_logp, -advantage / static_cast<double>(B));
            g.backward(loss, &buffers[worker]);
        }
    });

    for (const GradBuffer& buf : buffers) buf.add_to(policy.params());
    opt.step(policy.params());

    BatchStats st;
    for (size_t b = 0; b < B; ++b) {
        st.mean_reward += rewards[b];
        st.mean_advantage += advantages[b];
        st.mean_baseline_obj += baseline_objs[b];
    }
    st.mean_reward /= static_cast<double>(B);
    st.mean_advantage /= static_cast<double>(B);
    st.mean_baseline_obj /= static_cast<double>(B);
    return st;
}

namespace {

std::vector<double> greedy_objectives(PolicyNetwork& net, const std::vector<Instance>& instances,
                                      int jobs) {
    std::vector<double> objs(instances.size());
    parallel_chunks(instances.size(), jobs, [&](size_t, size_t begin, size_t end) {
        for (size_t i = begin; i < end; ++i) objs[i] = net.greedy(instances[i]).objective;
    });
    return objs;
}

}  // namespace

ReplaceDecision paired_t_test_replace(PolicyNetwork& policy, PolicyNetwork& baseline,
                                      const std::vector<Instance>& eval_instances, double alpha,
                                      int jobs) {
    require(eval_instances.size() >= 2, "paired_t_test_replace: need at least 2 eval instances");
    const std::vector<double> policy_objs = greedy_objectives(policy, eval_instances, jobs);
    const std::vector<double> baseline_objs = greedy_objectives(baseline, eval_instances, jobs);

    ReplaceDecision d;
    d.test = one_sided_paired_ttest(policy_objs, baseline_objs);
    for (size_t i = 0; i < eval_instances.size(); ++i) {
        d.policy_mean_obj += policy_objs[i];
        d.baseline_mean_obj += baseline_objs[i];
    }
    d.policy_mean_obj /= static_cast<double>(eval_instances.size());
    d.baseline_mean_obj /= static_cast<double>(eval_instances.size());
    d.replaced = d.test.p_value < alpha;
    if (d.replaced) baseline.copy_parameters_from(policy);
    return d;
}

TrainReport train(const TrainConfig& cfg, const std::string& checkpoint_path,
                  const std::string& log_path, int jobs, PolicyNetwork* out) {
    cfg.validate();
    PolicyNetwork policy(cfg.encoder, cfg.decoder, mix_seed(cfg.seed, 0x1217));
    PolicyNetwork baseline(policy);  // starts as a copy; only replacement writes it

    // eval set for the baseline-replacement test, fixed for the whole run
    GeneratorConfig eval_gen{cfg.n, Distribution::Uniform, 1.0, mix_seed(cfg.seed, 0xe7a1)};
    const std::vector<Instance> eval_set = generate_many(eval_gen, cfg.ttest_eval_size);

    AdamOptimizer opt(cfg.learning_rate);
    TrainReport report;
    if (cfg.epochs == 0) {
        if (!checkpoint_path.empty()) policy.save(checkpoint_path);
        if (!log_path.empty()) report.write_csv(log_path);
        if (out) *out = std::move(policy);
        return report;
    }

    for (size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        double reward_sum = 0.0;
        for (size_t batch_i = 0; batch_i < cfg.batches_per_epoch; ++batch_i) {
            GeneratorConfig gen{cfg.n, Distribution::Uniform, 1.0,
                                mix_seed(cfg.seed, epoch, batch_i)};
            const std::vector<Instance> batch = generate_many(gen, cfg.batch_size);
            const uint64_t rollout_seed = mix_seed(cfg.seed, epoch * 1000003ULL + batch_i, 0x5a3d);
            BatchStats st = reinforce_batch(policy, baseline, batch, opt, rollout_seed, jobs);
            reward_sum += st.mean_reward;
        }
        ReplaceDecision rd = paired_t_test_replace(policy, baseline, eval_set, cfg.alpha, jobs);

        EpochStats es;
        es.epoch = epoch;
        es.mean_sample_reward = reward_sum / static_cast<double>(cfg.batches_per_epoch);
        es.mean_greedy_obj = rd.policy_mean_obj;
        es.replaced = rd.replaced;
        es.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        report.epochs.push_back(es);

        if (!checkpoint_path.empty()) policy.save(checkpoint_path);
        if (!log_path.empty()) report.write_csv(log_path);
    }
    if (out) *out = std::move(policy);
    return report;
}

}  // namespace pdpha
