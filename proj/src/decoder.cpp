#include "pdpha/decoder.hpp"

#include <cmath>

namespace pdpha {

namespace {

constexpr double kMaskValue = -1e18;

template <class Provide>
DecoderParams walk_decoder_params(const EncoderConfig& cfg, Provide&& provide) {
    cfg.validate();
    const size_t d = cfg.d_h;
    DecoderParams p;
    p.placeholder = &provide("dec.placeholder", 1, d);
    p.glimpse_wq = &provide("dec.glimpse.Wq", 2 * d, d);
    p.glimpse_wk = &provide("dec.glimpse.Wk", d, d);
    p.glimpse_wv = &provide("dec.glimpse.Wv", d, d);
    p.glimpse_wo = &provide("dec.glimpse.Wo", d, d);
    p.final_wq = &provide("dec.final.Wq", d, d);
    p.final_wk = &provide("dec.final.Wk", d, d);
    return p;
}

}  // namespace

DecoderParams build_decoder_params(ParamStore& store, const EncoderConfig& cfg, Rng& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(cfg.d_h));
    return walk_decoder_params(cfg, [&](const std::string& name, size_t r, size_t c) -> Parameter& {
        return store.add(name, Tensor::uniform(r, c, -bound, bound, rng));
    });
}

DecoderParams bind_decoder_params(ParamStore& store, const EncoderConfig& cfg) {
    return walk_decoder_params(cfg, [&store](const std::string& name, size_t r, size_t c) -> Parameter& {
        return bind_existing_param(store, name, r, c);
    });
}

DecoderRun::DecoderRun(Graph& g, const Embeddings& emb, const DecoderParams& params,
                       const EncoderConfig& enc_cfg, const DecoderConfig& dec_cfg)
    : g_(&g), params_(&params), enc_cfg_(enc_cfg), dec_cfg_(dec_cfg) {
    dec_cfg.validate();
    nodes_ = emb.nodes;
    graph_emb_ = emb.graph;
    glimpse_k_ = g.matmul(nodes_, g.param(*params.glimpse_wk));
    glimpse_v_ = g.matmul(nodes_, g.param(*params.glimpse_wv));
    final_k_ = g.matmul(nodes_, g.param(*params.final_wk));
}

Var DecoderRun::step_probabilities(const State& state) {
    Graph& g = *g_;
    const size_t M = enc_cfg_.M;
    const size_t dk = enc_cfg_.d_k();
    const double inv_sqrt_dk = 1.0 / std::sqrt(static_cast<double>(dk));

    // context: graph embedding next to the last visited node's embedding
    // (a trainable placeholder before the first move)
    Var h_last = state.route.empty()
                     ? g.param(*params_->placeholder)
                     : g.gather_rows(nodes_, {static_cast<size_t>(state.last_node())});
    Var context = g.concat({graph_emb_, h_last}, 1);  // (1, 2*d_h)

    // glimpse: multi-head attention of the context over all node embeddings
    std::vector<Var> heads;
    heads.reserve(M);
    for (size_t m = 0; m < M; ++m) {
        Var qm = g.matmul(context, g.slice_cols(g.param(*params_->glimpse_wq), m * dk, (m + 1) * dk));
        Var km = g.slice_cols(glimpse_k_, m * dk, (m + 1) * dk);
        Var vm = g.slice_cols(glimpse_v_, m * dk, (m + 1) * dk);
        Var attn = g.softmax(g.scale(g.matmul_nt(qm, km), inv_sqrt_dk), 1);
        heads.push_back(g.matmul(attn, vm));
    }
    Var glimpse = g.matmul(g.concat(heads, 1), g.param(*params_->glimpse_wo));  // (1, d_h)

    // single-head clipped compatibility, masked after clipping so invalid
    // nodes end up with exactly zero probability
    Var q = g.matmul(glimpse, g.param(*params_->final_wq));
    Var logits = g.scale(g.matmul_nt(q, final_k_), inv_sqrt_dk);
    Var clipped = g.scale(g.tanh(logits), dec_cfg_.clip);
    const ActionMask m = mask(state);
    Var masked = g.masked_fill(clipped, m.allowed, kMaskValue);
    return g.softmax(masked, 1);
}

Var step_probabilities(Graph& g, const Embeddings& emb, const State& state,
                       const DecoderParams& params, const EncoderConfig& enc_cfg,
                       const DecoderConfig& dec_cfg) {
    DecoderRun run(g, emb, params, enc_cfg, dec_cfg);
    return run.step_probabilities(state);
}

namespace {

int argmax_allowed(const Tensor& probs, const ActionMask& m) {
    int best = -1;
    double best_p = -1.0;
    for (size_t j = 0; j < m.allowed.size(); ++j) {
        if (!m.allowed[j]) continue;
        if (probs.v[j] > best_p) {  // strict: ties resolve to the lowest index
            best_p = probs.v[j];
            best = static_cast<int>(j);
        }
    }
    require(best >= 0, "argmax_allowed: empty mask");
    return best;
}

int sample_allowed(const Tensor& probs, const ActionMask& m, Rng& rng) {
    const double u = rng.uniform();
    double cum = 0.0;
    int last_allowed = -1;
    for (size_t j = 0; j < m.allowed.size(); ++j) {
        if (!m.allowed[j]) continue;
        cum += probs.v[j];
        last_allowed = static_cast<int>(j);
        if (u < cum) return last_allowed;
    }
    // numerical leftover mass; fall back to the last feasible node
    require(last_allowed >= 0, "sample_allowed: empty mask");
    return last_allowed;
}

enum class DecodeMode { Greedy, Sample, Forced };

Rollout run_rollout(Graph& g, const Instance& inst, const Embeddings& emb,
                    const DecoderParams& params, const EncoderConfig& enc_cfg,
                    const DecoderConfig& dec_cfg, DecodeMode mode, Rng* rng,
                    const std::vector<int>* actions, Var* total_logp_out,
                    const RolloutOptions& opts) {
    DecoderRun run(g, emb, params, enc_cfg, dec_cfg);
    State st = initial_state(inst);
    Rollout out;
    double sum_reward = 0.0;
    Var total_logp;
    const size_t steps = 2 * inst.n();
    out.perm.reserve(steps);
    for (size_t t = 0; t < steps; ++t) {
        Var probs = run.step_probabilities(st);
        const Tensor& pv = g.value(probs);
        const ActionMask m = mask(st);
        int action;
        switch (mode) {
            case DecodeMode::Greedy: action = argmax_allowed(pv, m); break;
            case DecodeMode::Sample: action = sample_allowed(pv, m, *rng); break;
            default: action = (*actions)[t]; break;
        }
        Var logp = g.log(g.pick(probs, 0, static_cast<size_t>(action)));
        total_logp = total_logp.valid() ? g.add(total_logp, logp) : logp;
        out.step_logp.push_back(g.value(logp).v[0]);
        if (opts.record_probs) out.step_probs.push_back(pv.v);
        auto [next, reward] = step(st, action);
        st = std::move(next);
        sum_reward += reward;
        out.perm.push_back(action);
    }
    out.total_logp = g.value(total_logp).v[0];
    out.objective = -sum_reward;
    if (total_logp_out) *total_logp_out = total_logp;
    return out;
}

}  // namespace

Rollout rollout_greedy(Graph& g, const Instance& inst, const Embeddings& emb,
                       const DecoderParams& params, const EncoderConfig& enc_cfg,
                       const DecoderConfig& dec_cfg, const RolloutOptions& opts) {
    return run_rollout(g, inst, emb, params, enc_cfg, dec_cfg, DecodeMode::Greedy, nullptr, nullptr,
                       nullptr, opts);
}

Rollout rollout_sample(Graph& g, const Instance& inst, const Embeddings& emb,
                       const DecoderParams& params, const EncoderConfig& enc_cfg,
                       const DecoderConfig& dec_cfg, Rng& rng, Var* total_logp,
                       const RolloutOptions& opts) {
    return run_rollout(g, inst, emb, params, enc_cfg, dec_cfg, DecodeMode::Sample, &rng, nullptr,
                       total_logp, opts);
}

Rollout rollout_forced(Graph& g, const Instance& inst, const Embeddings& emb,
                       const DecoderParams& params, const EncoderConfig& enc_cfg,
                       const DecoderConfig& dec_cfg, const std::vector<int>& actions,
                       Var* total_logp) {
    require(actions.size() == 2 * inst.n(), "rollout_forced: need exactly 2n actions");
    return run_rollout(g, inst, emb, params, enc_cfg, dec_cfg, DecodeMode::Forced, nullptr, &actions,
                       total_logp, {});
}

}  // namespace pdpha
