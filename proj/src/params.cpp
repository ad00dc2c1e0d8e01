#include "pdpha/params.hpp"

#include <cmath>

namespace pdpha {

Parameter& ParamStore::add(const std::string& name, Tensor init) {
    require(by_name_.find(name) == by_name_.end(), "ParamStore::add: duplicate parameter name " + name);
    Parameter p;
    p.name = name;
    p.grad = Tensor::zeros_like(init);
    p.value = std::move(init);
    p.index = static_cast<int>(params_.size());
    params_.push_back(std::move(p));
    by_name_[name] = params_.back().index;
    return params_.back();
}

int ParamStore::find(const std::string& name) const {
    auto it = by_name_.find(name);
    return it == by_name_.end() ? -1 : it->second;
}

void ParamStore::zero_grads() {
    for (Parameter& p : params_) p.grad.fill(0.0);
}

size_t ParamStore::total_values() const {
    size_t n = 0;
    for (const Parameter& p : params_) n += p.value.size();
    return n;
}

void ParamStore::copy_values_from(const ParamStore& other) {
    require(count() == other.count(), "copy_values_from: parameter count mismatch");
    for (size_t i = 0; i < count(); ++i) {
        require(params_[i].value.same_shape(other.at(i).value),
                "copy_values_from: shape mismatch for " + params_[i].name);
        params_[i].value.v = other.at(i).value.v;
    }
}

Parameter& bind_existing_param(ParamStore& store, const std::string& name, size_t rows, size_t cols) {
    const int i = store.find(name);
    require(i >= 0, "parameter store is missing " + name);
    Parameter& p = store.at(i);
    require(p.value.rows() == rows && p.value.cols() == cols,
            "parameter " + name + " has shape " + shape_str(p.value) + ", expected (" +
                std::to_string(rows) + "," + std::to_string(cols) + ")");
    return p;
}

void GradBuffer::add_to(ParamStore& store) const {
    for (size_t i = 0; i < grads_.size(); ++i) {
        const Tensor& g = grads_[i];
        if (g.empty()) continue;
        Tensor& dst = store.at(i).grad;
        for (size_t k = 0; k < g.size(); ++k) dst.v[k] += g.v[k];
    }
}

void GradBuffer::clear() {
    for (Tensor& g : grads_) g = Tensor();
}

void AdamOptimizer::step(ParamStore& params) {
    if (m_.empty()) {
        m_.resize(params.count());
        v_.resize(params.count());
        for (size_t i = 0; i < params.count(); ++i) {
            m_[i] = Tensor::zeros_like(params.at(i).value);
            v_[i] = Tensor::zeros_like(params.at(i).value);
        }
    }
    require(m_.size() == params.count(), "AdamOptimizer: parameter count changed");
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (size_t i = 0; i < params.count(); ++i) {
        Parameter& p = params.at(i);
        Tensor& m = m_[i];
        Tensor& v = v_[i];
        for (size_t k = 0; k < p.value.size(); ++k) {
            const double g = p.grad.v[k];
            m.v[k] = beta1_ * m.v[k] + (1.0 - beta1_) * g;
            v.v[k] = beta2_ * v.v[k] + (1.0 - beta2_) * g * g;
            const double mhat = m.v[k] / bc1;
            const double vhat = v.v[k] / bc2;
            p.value.v[k] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
        }
        p.grad.fill(0.0);
    }
}

}  // namespace pdpha
