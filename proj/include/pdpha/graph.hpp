#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "pdpha/params.hpp"
#include "pdpha/tensor.hpp"

namespace pdpha {

class Graph;

// Lightweight handle to a node in a Graph's tape.
struct Var {
    int i = -1;
    bool valid() const { return i >= 0; }
};

// Reverse-mode differentiation tape over rank-2 tensors. All primitives
// validate shapes and reject non-finite outputs. With recording disabled the
// same code path runs forward-only (no backward closures are kept), which is
// what greedy evaluation and sampling use.
class Graph {
public:
    explicit Graph(bool recording = true) : recording_(recording) {}

    bool recording() const { return recording_; }

    Var constant(Tensor t);
    Var param(Parameter& p);

    const Tensor& value(Var a) const { return nodes_[a.i].val; }
    const Tensor& grad(Var a) const { return nodes_[a.i].grad; }

    // --- primitives ---
    Var matmul(Var a, Var b);     // (r,k)x(k,c) -> (r,c)
    Var matmul_nt(Var a, Var b);  // (r,k)x(c,k)^T -> (r,c)
    Var add(Var a, Var b);
    Var sub(Var a, Var b);
    Var mul(Var a, Var b);  // elementwise
    Var scale(Var a, double c);
    Var add_rowvec(Var a, Var row);  // broadcast (1,c) over the rows of (r,c)
    Var concat(const std::vector<Var>& parts, int axis);
    Var slice_cols(Var a, size_t c0, size_t c1);
    Var gather_rows(Var a, std::vector<size_t> idx);
    // places row i of `a` at row idx[i] of a (total_rows, cols) zero matrix
    Var scatter_rows(Var a, std::vector<size_t> idx, size_t total_rows);
    Var reshape(Var a, size_t rows, size_t cols);
    Var softmax(Var a, int axis);
    Var tanh(Var a);
    Var relu(Var a);
    Var log(Var a);
    Var mean_rows(Var a);  // (r,c) -> (1,c)
    Var sum(Var a);        // -> (1,1)
    Var pick(Var a, size_t r, size_t c);
    // entries with allowed[c]==0 are set to `fill` in every row
    Var masked_fill(Var a, const std::vector<uint8_t>& allowed, double fill);
    Var batch_norm(Var x, Var gamma, Var beta, double eps = 1e-5);

    // Accumulates d(loss)/d(param) into every bound Parameter's grad (or into
    // `buffer` slots when given). `loss` must be a scalar (1,1) node.
    void backward(Var loss, GradBuffer* buffer = nullptr);

    // Tape bookmarking: truncate() frees every node created after mark().
    size_t mark() const { return nodes_.size(); }
    void truncate(size_t m) { nodes_.resize(m); }
    void clear() { nodes_.clear(); }
    size_t node_count() const { return nodes_.size(); }

private:
    struct Node {
        Tensor val;
        Tensor grad;
        std::function<void(Graph&, int)> back;  // (graph, own index)
        Parameter* bound = nullptr;
        bool needs_grad = false;
    };

    std::vector<Node> nodes_;
    bool recording_;

    Var push(Tensor val, bool needs_grad, std::function<void(Graph&, int)> back, const char* op);
    bool wants(Var a) const { return nodes_[a.i].needs_grad; }
    Tensor& grad_of(int i);
    friend struct GraphTestAccess;
};

}  // namespace pdpha
