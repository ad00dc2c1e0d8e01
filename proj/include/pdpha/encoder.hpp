#pragma once

#include <string>
#include <vector>

#include "pdpha/graph.hpp"
#include "pdpha/instance.hpp"

namespace pdpha {

// The attention roles. Orig attends over every node; Pd/Dp are the
// pickup<->paired-delivery gates; the remaining four attend from one role's
// nodes over one role's node set.
enum class AttnType { Orig = 0, Pd, Dp, PtoP, PtoD, DtoP, DtoD };

std::string attn_type_name(AttnType t);

struct EncoderConfig {
    size_t d_h = 128;
    size_t M = 8;
    size_t N = 3;
    size_t ff_hidden = 512;
    enum class AttentionMode { Seven, Four } attention_mode = AttentionMode::Seven;
    bool share_kv = true;

    size_t d_k() const { return d_h / M; }
    size_t d_v() const { return d_h / M; }

    // active attention types in a fixed order, Orig first
    std::vector<AttnType> active_types() const;

    void validate() const;
};

std::string attention_mode_name(EncoderConfig::AttentionMode m);
EncoderConfig::AttentionMode parse_attention_mode(const std::string& s);

struct EncoderLayerParams {
    std::vector<Parameter*> Wq;  // one per active type
    std::vector<Parameter*> Wk;  // single shared entry, or one per active type
    std::vector<Parameter*> Wv;
    Parameter* Wo = nullptr;
    Parameter* ff_w1 = nullptr;
    Parameter* ff_b1 = nullptr;
    Parameter* ff_w2 = nullptr;
    Parameter* ff_b2 = nullptr;
    Parameter* bn1_gamma = nullptr;
    Parameter* bn1_beta = nullptr;
    Parameter* bn2_gamma = nullptr;
    Parameter* bn2_beta = nullptr;
};

struct EncoderParams {
    Parameter* embed_depot_w = nullptr;
    Parameter* embed_depot_b = nullptr;
    Parameter* embed_pickup_w = nullptr;  // 4 -> d_h (pickup concatenated with its delivery)
    Parameter* embed_pickup_b = nullptr;
    Parameter* embed_delivery_w = nullptr;
    Parameter* embed_delivery_b = nullptr;
    std::vector<EncoderLayerParams> layers;
};

// Registers all encoder parameters (names "enc.embed.*", "enc.layer{l}.*")
// and returns the handle structure. Weights start U(-1/sqrt(d_h), 1/sqrt(d_h));
// batch-norm affines start at identity.
EncoderParams build_encoder_params(ParamStore& store, const EncoderConfig& cfg, Rng& rng);

// Re-resolves the handle structure against a store that already holds the
// parameters (after a deep copy or a checkpoint load).
EncoderParams bind_encoder_params(ParamStore& store, const EncoderConfig& cfg);

struct Embeddings {
    Var nodes;  // (2n+1, d_h)
    Var graph;  // (1, d_h), mean of node rows
};

// Initial node embeddings h^0: depot through a 2->d_h map, each pickup through
// a 4->d_h map of (pickup; paired delivery), each delivery through a 2->d_h map.
Var embed_inputs(Graph& g, const Instance& inst, const EncoderParams& params,
                 const EncoderConfig& cfg);

// One attention layer: role-restricted multi-head heterogeneous attention,
// skip connection + batch norm, feed-forward sublayer, skip + batch norm.
// When multihead_out is non-null it receives a copy of the MultiHead output
// (after W^O, before the skip connection).
Var hetero_attention_layer(Graph& g, Var h, const EncoderLayerParams& lp, const EncoderConfig& cfg,
                           size_t n_pairs, Tensor* multihead_out = nullptr);

struct EncodeTrace {
    std::vector<Tensor> multihead;  // per layer
};

Embeddings encode(Graph& g, const Instance& inst, const EncoderParams& params,
                  const EncoderConfig& cfg, EncodeTrace* trace = nullptr);

}  // namespace pdpha
