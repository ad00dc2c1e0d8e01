#pragma once

#include <memory>
#include <string>

#include "pdpha/decoder.hpp"
#include "pdpha/encoder.hpp"

namespace pdpha {

// Encoder + decoder parameter bundle behind one seedable constructor. A
// structural clone of the policy serves as the greedy-rollout baseline.
class PolicyNetwork {
public:
    PolicyNetwork(const EncoderConfig& enc_cfg, const DecoderConfig& dec_cfg, uint64_t seed);

    PolicyNetwork(const PolicyNetwork& other);
    PolicyNetwork& operator=(const PolicyNetwork& other);
    PolicyNetwork(PolicyNetwork&&) = default;
    PolicyNetwork& operator=(PolicyNetwork&&) = default;

    const EncoderConfig& encoder_config() const { return enc_cfg_; }
    const DecoderConfig& decoder_config() const { return dec_cfg_; }

    ParamStore& params() { return params_; }
    const ParamStore& params() const { return params_; }
    const EncoderParams& encoder_params() const { return enc_; }
    const DecoderParams& decoder_params() const { return dec_; }

    size_t param_count() const { return params_.total_values(); }

    void copy_parameters_from(const PolicyNetwork& other) { params_.copy_values_from(other.params_); }

    Embeddings encode_instance(Graph& g, const Instance& inst, EncodeTrace* trace = nullptr);

    // Convenience no-grad decoders (each builds a forward-only graph).
    Rollout greedy(const Instance& inst, const RolloutOptions& opts = {});
    Rollout sample(const Instance& inst, Rng& rng, const RolloutOptions& opts = {});

    // Best of n_samples rollouts; the instance is encoded once. With
    // `curve` non-null, curve[k] receives the best objective seen after
    // checkpoints[k] samples (checkpoints ascending).
    Rollout solve_sampling(const Instance& inst, size_t n_samples, Rng& rng,
                           const std::vector<size_t>* checkpoints = nullptr,
                           std::vector<double>* curve = nullptr);

    void save(const std::string& path) const;
    static PolicyNetwork load(const std::string& path);

private:
    EncoderConfig enc_cfg_;
    DecoderConfig dec_cfg_;
    ParamStore params_;
    EncoderParams enc_;
    DecoderParams dec_;

    void rebind_handles();
};

}  // namespace pdpha
