#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <vector>

#include "pdpha/common.hpp"

namespace pdpha {

// Dense row-major f64 tensor. The model only ever needs rank-2 (vectors are
// carried as 1xC rows).
struct Tensor {
    std::vector<size_t> shape;
    std::vector<double> v;

    Tensor() = default;
    Tensor(size_t rows, size_t cols) : shape{rows, cols}, v(rows * cols, 0.0) {}
    explicit Tensor(std::vector<size_t> s) : shape(std::move(s)) {
        size_t total = 1;
        for (size_t d : shape) total *= d;
        v.assign(total, 0.0);
    }

    bool empty() const { return v.empty(); }
    size_t size() const { return v.size(); }
    size_t rank() const { return shape.size(); }

    size_t rows() const {
        require(rank() == 2, "Tensor::rows: not rank-2");
        return shape[0];
    }
    size_t cols() const {
        require(rank() == 2, "Tensor::cols: not rank-2");
        return shape[1];
    }

    double& at(size_t r, size_t c) { return v[r * shape[1] + c]; }
    double at(size_t r, size_t c) const { return v[r * shape[1] + c]; }

    double* data() { return v.data(); }
    const double* data() const { return v.data(); }

    void fill(double x) { std::fill(v.begin(), v.end(), x); }

    bool same_shape(const Tensor& o) const { return shape == o.shape; }

    static Tensor zeros_like(const Tensor& o) { return Tensor(o.shape); }

    static Tensor row(std::vector<double> xs) {
        Tensor t;
        t.shape = {1, xs.size()};
        t.v = std::move(xs);
        return t;
    }

    static Tensor filled(size_t rows, size_t cols, double x) {
        Tensor t(rows, cols);
        t.fill(x);
        return t;
    }

    static Tensor uniform(size_t rows, size_t cols, double lo, double hi, Rng& rng) {
        Tensor t(rows, cols);
        for (double& x : t.v) x = rng.uniform(lo, hi);
        return t;
    }
};

std::string shape_str(const Tensor& t);

// Throws std::runtime_error naming `op` if any entry is NaN or +-Inf.
void check_finite(const Tensor& t, const char* op);

}  // namespace pdpha
