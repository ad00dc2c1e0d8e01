#pragma once

#include <deque>
#include <string>
#include <unordered_map>
#include <vector>

#include "pdpha/tensor.hpp"

namespace pdpha {

// A trainable tensor with its gradient accumulator.
struct Parameter {
    std::string name;
    Tensor value;
    Tensor grad;
    int index = -1;  // position in the owning ParamStore
};

// Owns all parameters of a model in a fixed registration order. Addresses
// stay stable as parameters are added (deque storage), so modules can keep
// Parameter* handles.
class ParamStore {
public:
    Parameter& add(const std::string& name, Tensor init);

    size_t count() const { return params_.size(); }
    Parameter& at(size_t i) { return params_[i]; }
    const Parameter& at(size_t i) const { return params_[i]; }

    int find(const std::string& name) const;

    void zero_grads();

    // total number of scalar values across all parameters
    size_t total_values() const;

    // Copies values (not grads) from another store; shapes must match.
    void copy_values_from(const ParamStore& other);

    auto begin() { return params_.begin(); }
    auto end() { return params_.end(); }
    auto begin() const { return params_.begin(); }
    auto end() const { return params_.end(); }

private:
    std::deque<Parameter> params_;
    std::unordered_map<std::string, int> by_name_;
};

// Looks up `name` in the store and checks its shape; throws naming the tensor
// on a miss or mismatch.
Parameter& bind_existing_param(ParamStore& store, const std::string& name, size_t rows, size_t cols);

// Per-worker gradient accumulation buffer, aligned with a ParamStore's
// registration order. Lets parallel rollouts accumulate without touching the
// shared Parameter::grad tensors.
class GradBuffer {
public:
    explicit GradBuffer(size_t n_params) : grads_(n_params) {}

    Tensor& slot(int index, const Tensor& like) {
        Tensor& g = grads_[index];
        if (g.empty()) g = Tensor::zeros_like(like);
        return g;
    }

    // store.at(i).grad += grads_[i]
    void add_to(ParamStore& store) const;

    void clear();

private:
    std::vector<Tensor> grads_;
};

// Adaptive-moment optimizer with bias correction (beta1=0.9, beta2=0.999,
// eps=1e-8). step() consumes and zeroes the parameter gradients.
class AdamOptimizer {
public:
    explicit AdamOptimizer(double lr) : lr_(lr) { require(lr > 0, "AdamOptimizer: lr must be > 0"); }

    void step(ParamStore& params);

    double learning_rate() const { return lr_; }
    long step_count() const { return t_; }

private:
    double lr_;
    double beta1_ = 0.9;
    double beta2_ = 0.999;
    double eps_ = 1e-8;
    long t_ = 0;
    std::vector<Tensor> m_, v_;
};

}  // namespace pdpha
