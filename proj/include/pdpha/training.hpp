#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "pdpha/model.hpp"
#include "pdpha/stats.hpp"

namespace pdpha {

struct TrainConfig {
    size_t epochs = 15;
    size_t batches_per_epoch = 200;
    size_t batch_size = 64;
    double learning_rate = 1e-4;
    double alpha = 0.05;          // one-sided paired t-test significance
    size_t ttest_eval_size = 1000;
    size_t n = 5;                 // pickup/delivery pairs per instance
    uint64_t seed = 0;
    EncoderConfig encoder;
    DecoderConfig decoder;

    void validate() const;
    static TrainConfig from_json(const nlohmann::json& j);
    static TrainConfig from_json_file(const std::string& path);
    nlohmann::json to_json() const;
};

struct EpochStats {
    size_t epoch = 0;
    double mean_sample_reward = 0.0;  // over the epoch's training rollouts
    double mean_greedy_obj = 0.0;     // policy greedy on the fixed eval set
    bool replaced = false;            // baseline replaced this epoch
    double seconds = 0.0;
};

struct TrainReport {
    std::vector<EpochStats> epochs;

    void write_csv(const std::string& path) const;
    // all fields except wall-clock seconds
    bool same_results(const TrainReport& other) const;
};

struct BatchStats {
    double mean_reward = 0.0;
    double mean_advantage = 0.0;
    double mean_baseline_obj = 0.0;
};

// One REINFORCE step over a batch: sample a rollout from the policy, score the
// greedy-rollout baseline, apply mean((R - v) * -grad log p) through the
// optimizer. Per-instance rollout seeds derive from `rollout_seed`, so results
// do not depend on the worker count except for float summation order.
BatchStats reinforce_batch(PolicyNetwork& policy, PolicyNetwork& baseline,
                           const std::vector<Instance>& batch, AdamOptimizer& opt,
                           uint64_t rollout_seed, int jobs);

struct ReplaceDecision {
    bool replaced = false;
    PairedTTest test;
    double policy_mean_obj = 0.0;
    double baseline_mean_obj = 0.0;
};

// Greedy-decodes both networks on the eval set; replaces the baseline's
// parameters with the policy's iff the one-sided paired t-test rejects at
// `alpha`.
ReplaceDecision paired_t_test_replace(PolicyNetwork& policy, PolicyNetwork& baseline,
                                      const std::vector<Instance>& eval_instances, double alpha,
                                      int jobs);

// Full training loop. Writes the checkpoint after every epoch (and at the
// end) to `checkpoint_path`, and the per-epoch CSV log to `log_path` when
// non-empty. Returns the trained policy via `out`.
TrainReport train(const TrainConfig& cfg, const std::string& checkpoint_path,
                  const std::string& log_path, int jobs, PolicyNetwork* out = nullptr);

}  // namespace pdpha
