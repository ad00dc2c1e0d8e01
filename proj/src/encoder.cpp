#include "pdpha/encoder.hpp"

#include <cmath>

namespace pdpha {

std::string attn_type_name(AttnType t) {
    switch (t) {
        case AttnType::Orig: return "orig";
        case AttnType::Pd: return "pd";
        case AttnType::Dp: return "dp";
        case AttnType::PtoP: return "pP";
        case AttnType::PtoD: return "pD";
        case AttnType::DtoP: return "dP";
        case AttnType::DtoD: return "dD";
    }
    throw std::logic_error("unreachable attention type");
}

std::vector<AttnType> EncoderConfig::active_types() const {
    if (attention_mode == AttentionMode::Seven) {
        return {AttnType::Orig, AttnType::Pd,   AttnType::Dp,  AttnType::PtoP,
                AttnType::PtoD, AttnType::DtoP, AttnType::DtoD};
    }
    return {AttnType::Orig, AttnType::Pd, AttnType::PtoP, AttnType::PtoD};
}

void EncoderConfig::validate() const {
    require(d_h >= 1 && M >= 1 && N >= 1, "encoder config: d_h, M, N must be >= 1");
    require(d_h % M == 0, "encoder config: d_h must be divisible by M");
    require(ff_hidden >= 1, "encoder config: ff_hidden must be >= 1");
}

std::string attention_mode_name(EncoderConfig::AttentionMode m) {
    return m == EncoderConfig::AttentionMode::Seven ? "seven" : "four";
}

EncoderConfig::AttentionMode parse_attention_mode(const std::string& s) {
    if (s == "seven") return EncoderConfig::AttentionMode::Seven;
    if (s == "four") return EncoderConfig::AttentionMode::Four;
    throw std::invalid_argument("unknown attention mode '" + s + "' (expected seven or four)");
}

namespace {

enum class Init { Weight, One, Zero };

// Walks the full parameter layout in registration order; `provide` either
// creates or looks up each tensor.
template <class Provide>
EncoderParams walk_encoder_params(const EncoderConfig& cfg, Provide&& provide) {
    cfg.validate();
    const size_t d = cfg.d_h;
    EncoderParams p;
    p.embed_depot_w = &provide("enc.embed.depot.W", 2, d, Init::Weight);
    p.embed_depot_b = &provide("enc.embed.depot.b", 1, d, Init::Weight);
    p.embed_pickup_w = &provide("enc.embed.pickup.W", 4, d, Init::Weight);
    p.embed_pickup_b = &provide("enc.embed.pickup.b", 1, d, Init::Weight);
    p.embed_delivery_w = &provide("enc.embed.delivery.W", 2, d, Init::Weight);
    p.embed_delivery_b = &provide("enc.embed.delivery.b", 1, d, Init::Weight);

    const auto types = cfg.active_types();
    for (size_t l = 0; l < cfg.N; ++l) {
        const std::string pre = "enc.layer" + std::to_string(l) + ".";
        EncoderLayerParams lp;
        for (AttnType t : types) {
            lp.Wq.push_back(&provide(pre + "attn.Wq." + attn_type_name(t), d, d, Init::Weight));
        }
        if (cfg.share_kv) {
            lp.Wk.push_back(&provide(pre + "attn.Wk", d, d, Init::Weight));
            lp.Wv.push_back(&provide(pre + "attn.Wv", d, d, Init::Weight));
        } else {
            for (AttnType t : types) {
                lp.Wk.push_back(&provide(pre + "attn.Wk." + attn_type_name(t), d, d, Init::Weight));
                lp.Wv.push_back(&provide(pre + "attn.Wv." + attn_type_name(t), d, d, Init::Weight));
            }
        }
        lp.Wo = &provide(pre + "attn.Wo", d, d, Init::Weight);
        lp.bn1_gamma = &provide(pre + "bn1.gamma", 1, d, Init::One);
        lp.bn1_beta = &provide(pre + "bn1.beta", 1, d, Init::Zero);
        lp.ff_w1 = &provide(pre + "ff.W1", d, cfg.ff_hidden, Init::Weight);
        lp.ff_b1 = &provide(pre + "ff.b1", 1, cfg.ff_hidden, Init::Weight);
        lp.ff_w2 = &provide(pre + "ff.W2", cfg.ff_hidden, d, Init::Weight);
        lp.ff_b2 = &provide(pre + "ff.b2", 1, d, Init::Weight);
        lp.bn2_gamma = &provide(pre + "bn2.gamma", 1, d, Init::One);
        lp.bn2_beta = &provide(pre + "bn2.beta", 1, d, Init::Zero);
        p.layers.push_back(std::move(lp));
    }
    return p;
}

}  // namespace

EncoderParams build_encoder_params(ParamStore& store, const EncoderConfig& cfg, Rng& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(cfg.d_h));
    return walk_encoder_params(cfg, [&](const std::string& name, size_t r, size_t c, Init init) -> Parameter& {
        Tensor t = init == Init::One    ? Tensor::filled(r, c, 1.0)
                   : init == Init::Zero ? Tensor(r, c)
                                        : Tensor::uniform(r, c, -bound, bound, rng);
        return store.add(name, std::move(t));
    });
}

EncoderParams bind_encoder_params(ParamStore& store, const EncoderConfig& cfg) {
    return walk_encoder_params(cfg, [&store](const std::string& name, size_t r, size_t c, Init) -> Parameter& {
        return bind_existing_param(store, name, r, c);
    });
}

Var embed_inputs(Graph& g, const Instance& inst, const EncoderParams& params,
                 const EncoderConfig& cfg) {
    cfg.validate();
    inst.validate();
    const size_t n = inst.n();

    Tensor depot_in(1, 2);
    depot_in.v = {inst.depot.x, inst.depot.y};
    Tensor pick_in(n, 4);
    Tensor del_in(n, 2);
    for (size_t i = 0; i < n; ++i) {
        pick_in.at(i, 0) = inst.pickups[i].x;
        pick_in.at(i, 1) = inst.pickups[i].y;
        pick_in.at(i, 2) = inst.deliveries[i].x;
        pick_in.at(i, 3) = inst.deliveries[i].y;
        del_in.at(i, 0) = inst.deliveries[i].x;
        del_in.at(i, 1) = inst.deliveries[i].y;
    }

    Var depot_row = g.add_rowvec(g.matmul(g.constant(std::move(depot_in)), g.param(*params.embed_depot_w)),
                                 g.param(*params.embed_depot_b));
    Var pick_rows = g.add_rowvec(g.matmul(g.constant(std::move(pick_in)), g.param(*params.embed_pickup_w)),
                                 g.param(*params.embed_pickup_b));
    Var del_rows = g.add_rowvec(g.matmul(g.constant(std::move(del_in)), g.param(*params.embed_delivery_w)),
                                g.param(*params.embed_delivery_b));
    return g.concat({depot_row, pick_rows, del_rows}, 0);
}

namespace {

// standard scaled-dot-product multi-head attention of Q over (K, V) rows
Var multihead_attention(Graph& g, Var Q, Var K, Var V, size_t M, size_t dk, double inv_sqrt_dk) {
    std::vector<Var> heads;
    heads.reserve(M);
    for (size_t m = 0; m < M; ++m) {
        Var Qm = g.slice_cols(Q, m * dk, (m + 1) * dk);
        Var Km = g.slice_cols(K, m * dk, (m + 1) * dk);
        Var Vm = g.slice_cols(V, m * dk, (m + 1) * dk);
        Var A = g.softmax(g.scale(g.matmul_nt(Qm, Km), inv_sqrt_dk), 1);
        heads.push_back(g.matmul(A, Vm));
    }
    return g.concat(heads, 1);
}

// per-head feature-axis softmax: rows (r, M*dk) -> softmax within each dk block
Var blockwise_softmax(Graph& g, Var x, size_t M, size_t dk) {
    const size_t r = g.value(x).rows();
    Var flat = g.reshape(x, r * M, dk);
    Var sm = g.softmax(flat, 1);
    return g.reshape(sm, r, M * dk);
}

}  // namespace

Var hetero_attention_layer(Graph& g, Var h, const EncoderLayerParams& lp, const EncoderConfig& cfg,
                           size_t n_pairs, Tensor* multihead_out) {
    const size_t n = n_pairs;
    const size_t d = cfg.d_h;
    const size_t M = cfg.M;
    const size_t dk = cfg.d_k();
    const double inv_sqrt_dk = 1.0 / std::sqrt(static_cast<double>(dk));
    const size_t total = 2 * n + 1;
    require(g.value(h).rows() == total && g.value(h).cols() == d,
            "hetero_attention_layer: input must be (2n+1, d_h)");

    std::vector<size_t> pick_idx(n), del_idx(n);
    for (size_t i = 0; i < n; ++i) {
        pick_idx[i] = 1 + i;
        del_idx[i] = 1 + n + i;
    }

    const auto types = cfg.active_types();
    auto type_pos = [&](AttnType t) {
        for (size_t i = 0; i < types.size(); ++i)
            if (types[i] == t) return i;
        throw std::logic_error("attention type not active");
    };

    // Full-size K/V per type; with sharing enabled every type resolves to the
    // same projection, computed once.
    std::vector<Var> kv_k(cfg.share_kv ? 1 : types.size());
    std::vector<Var> kv_v(kv_k.size());
    auto keys_for = [&](AttnType t) -> Var& {
        size_t i = cfg.share_kv ? 0 : type_pos(t);
        if (!kv_k[i].valid()) kv_k[i] = g.matmul(h, g.param(*lp.Wk[i]));
        return kv_k[i];
    };
    auto values_for = [&](AttnType t) -> Var& {
        size_t i = cfg.share_kv ? 0 : type_pos(t);
        if (!kv_v[i].valid()) kv_v[i] = g.matmul(h, g.param(*lp.Wv[i]));
        return kv_v[i];
    };
    auto query = [&](AttnType t, Var rows) {
        return g.matmul(rows, g.param(*lp.Wq[type_pos(t)]));
    };

    Var hP = g.gather_rows(h, pick_idx);
    Var hD = g.gather_rows(h, del_idx);

    // original attention over all nodes, every node queries
    Var orig = multihead_attention(g, query(AttnType::Orig, h), keys_for(AttnType::Orig),
                                   values_for(AttnType::Orig), M, dk, inv_sqrt_dk);

    // pickup -> paired delivery gate: per-head softmax over the feature axis of
    // the elementwise query*key product, applied as a gate on the value
    auto pair_gate = [&](AttnType t, Var q_rows, const std::vector<size_t>& kv_rows) {
        Var Q = query(t, q_rows);
        Var K = g.gather_rows(keys_for(t), kv_rows);
        Var V = g.gather_rows(values_for(t), kv_rows);
        Var gate = blockwise_softmax(g, g.scale(g.mul(Q, K), inv_sqrt_dk), M, dk);
        return g.mul(gate, V);
    };
    // role attention: q_rows query the kv_rows subset
    auto role_attn = [&](AttnType t, Var q_rows, const std::vector<size_t>& kv_rows) {
        Var Q = query(t, q_rows);
        Var K = g.gather_rows(keys_for(t), kv_rows);
        Var V = g.gather_rows(values_for(t), kv_rows);
        return multihead_attention(g, Q, K, V, M, dk, inv_sqrt_dk);
    };

    Var pick_terms = g.add(pair_gate(AttnType::Pd, hP, del_idx),
                           g.add(role_attn(AttnType::PtoP, hP, pick_idx),
                                 role_attn(AttnType::PtoD, hP, del_idx)));
    Var summed = g.add(orig, g.scatter_rows(pick_terms, pick_idx, total));

    if (cfg.attention_mode == EncoderConfig::AttentionMode::Seven) {
        Var del_terms = g.add(pair_gate(AttnType::Dp, hD, pick_idx),
                              g.add(role_attn(AttnType::DtoP, hD, pick_idx),
                                    role_attn(AttnType::DtoD, hD, del_idx)));
        summed = g.add(summed, g.scatter_rows(del_terms, del_idx, total));
    }

    Var mh = g.matmul(summed, g.param(*lp.Wo));
    if (multihead_out) *multihead_out = g.value(mh);

    Var h1 = g.batch_norm(g.add(h, mh), g.param(*lp.bn1_gamma), g.param(*lp.bn1_beta));
    Var ff = g.add_rowvec(
        g.matmul(g.relu(g.add_rowvec(g.matmul(h1, g.param(*lp.ff_w1)), g.param(*lp.ff_b1))),
                 g.param(*lp.ff_w2)),
        g.param(*lp.ff_b2));
    return g.batch_norm(g.add(h1, ff), g.param(*lp.bn2_gamma), g.param(*lp.bn2_beta));
}

Embeddings encode(Graph& g, const Instance& inst, const EncoderParams& params,
                  const EncoderConfig& cfg, EncodeTrace* trace) {
    Var h = embed_inputs(g, inst, params, cfg);
    for (size_t l = 0; l < cfg.N; ++l) {
        Tensor* mh = nullptr;
        if (trace) {
            trace->multihead.emplace_back();
            mh = &trace->multihead.back();
        }
        h = hetero_attention_layer(g, h, params.layers[l], cfg, inst.n(), mh);
    }
    return Embeddings{h, g.mean_rows(h)};
}

}  // namespace pdpha
