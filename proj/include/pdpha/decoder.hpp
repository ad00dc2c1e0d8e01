#pragma once

#include <vector>

#include "pdpha/encoder.hpp"
#include "pdpha/env.hpp"

namespace pdpha {

struct DecoderConfig {
    double clip = 10.0;  // C in the compatibility clipping

    void validate() const { require(clip > 0, "decoder config: clip must be > 0"); }
};

struct DecoderParams {
    Parameter* placeholder = nullptr;  // stands in for the last-node embedding at t=0
    Parameter* glimpse_wq = nullptr;   // (2*d_h, d_h), M head blocks
    Parameter* glimpse_wk = nullptr;
    Parameter* glimpse_wv = nullptr;
    Parameter* glimpse_wo = nullptr;
    Parameter* final_wq = nullptr;
    Parameter* final_wk = nullptr;
};

DecoderParams build_decoder_params(ParamStore& store, const EncoderConfig& cfg, Rng& rng);
DecoderParams bind_decoder_params(ParamStore& store, const EncoderConfig& cfg);

struct Rollout {
    std::vector<int> perm;
    std::vector<double> step_logp;
    double total_logp = 0.0;
    double objective = 0.0;
    std::vector<std::vector<double>> step_probs;  // filled only when requested
};

// Per-instance decoding context: node/graph embeddings plus the key and value
// projections that stay fixed across decode steps.
class DecoderRun {
public:
    DecoderRun(Graph& g, const Embeddings& emb, const DecoderParams& params,
               const EncoderConfig& enc_cfg, const DecoderConfig& dec_cfg);

    // Probability row (1, 2n+1) for the next action given the current state.
    Var step_probabilities(const State& state);

    Graph& graph() { return *g_; }

private:
    Graph* g_;
    const DecoderParams* params_;
    EncoderConfig enc_cfg_;
    DecoderConfig dec_cfg_;
    Var nodes_, graph_emb_, glimpse_k_, glimpse_v_, final_k_;
};

// One-call form matching the per-step contract (recomputes the cached
// projections; rollouts use DecoderRun directly).
Var step_probabilities(Graph& g, const Embeddings& emb, const State& state,
                       const DecoderParams& params, const EncoderConfig& enc_cfg,
                       const DecoderConfig& dec_cfg);

struct RolloutOptions {
    bool record_probs = false;
};

// Greedy decode: argmax at each step, ties to the lowest node index.
Rollout rollout_greedy(Graph& g, const Instance& inst, const Embeddings& emb,
                       const DecoderParams& params, const EncoderConfig& enc_cfg,
                       const DecoderConfig& dec_cfg, const RolloutOptions& opts = {});

// Categorical sampling per step; when total_logp is non-null it receives the
// graph node holding the summed log-probability (for policy gradients).
Rollout rollout_sample(Graph& g, const Instance& inst, const Embeddings& emb,
                       const DecoderParams& params, const EncoderConfig& enc_cfg,
                       const DecoderConfig& dec_cfg, Rng& rng, Var* total_logp = nullptr,
                       const RolloutOptions& opts = {});

// Replays a given visit order, accumulating its log-probability. Throws if the
// sequence ever takes a masked action.
Rollout rollout_forced(Graph& g, const Instance& inst, const Embeddings& emb,
                       const DecoderParams& params, const EncoderConfig& enc_cfg,
                       const DecoderConfig& dec_cfg, const std::vector<int>& actions,
                       Var* total_logp = nullptr);

}  // namespace pdpha
