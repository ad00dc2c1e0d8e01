#include "pdpha/model.hpp"

#include "pdpha/checkpoint.hpp"

namespace pdpha {

PolicyNetwork::PolicyNetwork(const EncoderConfig& enc_cfg, const DecoderConfig& dec_cfg, uint64_t seed)
    : enc_cfg_(enc_cfg), dec_cfg_(dec_cfg) {
    enc_cfg.validate();
    dec_cfg.validate();
    Rng rng(mix_seed(seed, 0x9a7a));
    enc_ = build_encoder_params(params_, enc_cfg_, rng);
    dec_ = build_decoder_params(params_, enc_cfg_, rng);
}

PolicyNetwork::PolicyNetwork(const PolicyNetwork& other)
    : enc_cfg_(other.enc_cfg_), dec_cfg_(other.dec_cfg_), params_(other.params_) {
    rebind_handles();
}

PolicyNetwork& PolicyNetwork::operator=(const PolicyNetwork& other) {
    if (this != &other) {
        enc_cfg_ = other.enc_cfg_;
        dec_cfg_ = other.dec_cfg_;
        params_ = other.params_;
        rebind_handles();
    }
    return *this;
}

void PolicyNetwork::rebind_handles() {
    enc_ = bind_encoder_params(params_, enc_cfg_);
    dec_ = bind_decoder_params(params_, enc_cfg_);
}

Embeddings PolicyNetwork::encode_instance(Graph& g, const Instance& inst, EncodeTrace* trace) {
    return encode(g, inst, enc_, enc_cfg_, trace);
}

Rollout PolicyNetwork::greedy(const Instance& inst, const RolloutOptions& opts) {
    Graph g(false);
    Embeddings emb = encode_instance(g, inst);
    return rollout_greedy(g, inst, emb, dec_, enc_cfg_, dec_cfg_, opts);
}

Rollout PolicyNetwork::sample(const Instance& inst, Rng& rng, const RolloutOptions& opts) {
    Graph g(false);
    Embeddings emb = encode_instance(g, inst);
    return rollout_sample(g, inst, emb, dec_, enc_cfg_, dec_cfg_, rng, nullptr, opts);
}

Rollout PolicyNetwork::solve_sampling(const Instance& inst, size_t n_samples, Rng& rng,
                                      const std::vector<size_t>* checkpoints,
                                      std::vector<double>* curve) {
    require(n_samples >= 1, "solve_sampling: need at least one sample");
    Graph g(false);
    Embeddings emb = encode_instance(g, inst);
    const size_t base = g.mark();
    Rollout best;
    if (curve) curve->assign(checkpoints ? checkpoints->size() : 0, 0.0);
    for (size_t s = 0; s < n_samples; ++s) {
        Rollout r = rollout_sample(g, inst, emb, dec_, enc_cfg_, dec_cfg_, rng);
        if (s == 0 || r.objective < best.objective) best = std::move(r);
        if (checkpoints && curve) {
            for (size_t k = 0; k < checkpoints->size(); ++k) {
                if ((*checkpoints)[k] == s + 1) (*curve)[k] = best.objective;
            }
        }
        g.truncate(base);
    }
    return best;
}

void PolicyNetwork::save(const std::string& path) const {
    nlohmann::json hyper;
    hyper["d_h"] = enc_cfg_.d_h;
    hyper["M"] = enc_cfg_.M;
    hyper["N"] = enc_cfg_.N;
    hyper["ff_hidden"] = enc_cfg_.ff_hidden;
    hyper["attention_mode"] = attention_mode_name(enc_cfg_.attention_mode);
    hyper["share_kv"] = enc_cfg_.share_kv;
    hyper["clip"] = dec_cfg_.clip;
    write_checkpoint(path, hyper, params_);
}

PolicyNetwork PolicyNetwork::load(const std::string& path) {
    LoadedCheckpoint ck = read_checkpoint(path);
    EncoderConfig enc_cfg;
    enc_cfg.d_h = ck.hyper.at("d_h").get<size_t>();
    enc_cfg.M = ck.hyper.at("M").get<size_t>();
    enc_cfg.N = ck.hyper.at("N").get<size_t>();
    enc_cfg.ff_hidden = ck.hyper.at("ff_hidden").get<size_t>();
    enc_cfg.attention_mode = parse_attention_mode(ck.hyper.at("attention_mode").get<std::string>());
    enc_cfg.share_kv = ck.hyper.at("share_kv").get<bool>();
    DecoderConfig dec_cfg;
    dec_cfg.clip = ck.hyper.at("clip").get<double>();

    PolicyNetwork net(enc_cfg, dec_cfg, 0);
    require(ck.tensors.size() == net.params_.count(),
            path + ": checkpoint holds " + std::to_string(ck.tensors.size()) + " tensors, model expects " +
                std::to_string(net.params_.count()));
    for (auto& [name, tensor] : ck.tensors) {
        const int idx = net.params_.find(name);
        if (idx < 0) throw std::runtime_error(path + ": unexpected tensor '" + name + "' for this model");
        Parameter& p = net.params_.at(idx);
        if (!p.value.same_shape(tensor)) {
            throw std::runtime_error(path + ": tensor '" + name + "' has shape " + shape_str(tensor) +
                                     ", model expects " + shape_str(p.value));
        }
        p.value = std::move(tensor);
    }
    return net;
}

}  // namespace pdpha
