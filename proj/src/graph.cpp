#include "pdpha/graph.hpp"

#include <cmath>

namespace pdpha {

namespace {

void matmul_acc(const Tensor& a, const Tensor& b, Tensor& out) {
    // out += a * b, all row-major; ikj order keeps the inner loop contiguous
    const size_t r = a.rows(), k = a.cols(), c = b.cols();
    for (size_t i = 0; i < r; ++i) {
        const double* arow = a.data() + i * k;
        double* orow = out.data() + i * c;
        for (size_t p = 0; p < k; ++p) {
            const double av = arow[p];
            if (av == 0.0) continue;
            const double* brow = b.data() + p * c;
            for (size_t j = 0; j < c; ++j) orow[j] += av * brow[j];
        }
    }
}

void matmul_nt_acc(const Tensor& a, const Tensor& b, Tensor& out) {
    // out += a * b^T ; a (r,k), b (c,k) -> out (r,c)
    const size_t r = a.rows(), k = a.cols(), c = b.rows();
    for (size_t i = 0; i < r; ++i) {
        const double* arow = a.data() + i * k;
        double* orow = out.data() + i * c;
        for (size_t j = 0; j < c; ++j) {
            const double* brow = b.data() + j * k;
            double s = 0.0;
            for (size_t p = 0; p < k; ++p) s += arow[p] * brow[p];
            orow[j] += s;
        }
    }
}

void matmul_tn_acc(const Tensor& a, const Tensor& b, Tensor& out) {
    // out += a^T * b ; a (k,r), b (k,c) -> out (r,c)
    const size_t k = a.rows(), r = a.cols(), c = b.cols();
    for (size_t p = 0; p < k; ++p) {
        const double* arow = a.data() + p * r;
        const double* brow = b.data() + p * c;
        for (size_t i = 0; i < r; ++i) {
            const double av = arow[i];
            if (av == 0.0) continue;
            double* orow = out.data() + i * c;
            for (size_t j = 0; j < c; ++j) orow[j] += av * brow[j];
        }
    }
}

void softmax_rows(const Tensor& x, Tensor& y) {
    const size_t r = x.rows(), c = x.cols();
    for (size_t i = 0; i < r; ++i) {
        const double* xi = x.data() + i * c;
        double* yi = y.data() + i * c;
        double mx = xi[0];
        for (size_t j = 1; j < c; ++j) mx = std::max(mx, xi[j]);
        double s = 0.0;
        for (size_t j = 0; j < c; ++j) {
            yi[j] = std::exp(xi[j] - mx);
            s += yi[j];
        }
        const double inv = 1.0 / s;
        for (size_t j = 0; j < c; ++j) yi[j] *= inv;
    }
}

}  // namespace

Var Graph::push(Tensor val, bool needs_grad, std::function<void(Graph&, int)> back, const char* op) {
    check_finite(val, op);
    Node n;
    n.val = std::move(val);
    n.needs_grad = needs_grad;
    if (recording_ && needs_grad) n.back = std::move(back);
    nodes_.push_back(std::move(n));
    return Var{static_cast<int>(nodes_.size() - 1)};
}

Tensor& Graph::grad_of(int i) {
    Node& n = nodes_[i];
    if (n.grad.empty()) n.grad = Tensor::zeros_like(n.val);
    return n.grad;
}

Var Graph::constant(Tensor t) {
    return push(std::move(t), false, {}, "constant");
}

Var Graph::param(Parameter& p) {
    Node n;
    n.val = p.value;  // copy; graphs stay valid while parameters are updated
    n.needs_grad = true;
    n.bound = &p;
    check_finite(n.val, "param");
    nodes_.push_back(std::move(n));
    return Var{static_cast<int>(nodes_.size() - 1)};
}

Var Graph::matmul(Var a, Var b) {
    const Tensor& A = value(a);
    const Tensor& B = value(b);
    require(A.cols() == B.rows(), "matmul: inner dimensions differ " + shape_str(A) + " vs " + shape_str(B));
    Tensor out(A.rows(), B.cols());
    matmul_acc(A, B, out);
    int ai = a.i, bi = b.i;
    return push(std::move(out), wants(a) || wants(b), [ai, bi](Graph& g, int self) {
        const Tensor& dC = g.nodes_[self].grad;
        if (g.nodes_[ai].needs_grad) matmul_nt_acc(dC, g.nodes_[bi].val, g.grad_of(ai));
        if (g.nodes_[bi].needs_grad) matmul_tn_acc(g.nodes_[ai].val, dC, g.grad_of(bi));
    }, "matmul");
}

Var Graph::matmul_nt(Var a, Var b) {
    const Tensor& A = value(a);
    const Tensor& B = value(b);
    require(A.cols() == B.cols(), "matmul_nt: inner dimensions differ " + shape_str(A) + " vs " + shape_str(B));
    Tensor out(A.rows(), B.rows());
    matmul_nt_acc(A, B, out);
    int ai = a.i, bi = b.i;
    return push(std::move(out), wants(a) || wants(b), [ai, bi](Graph& g, int self) {
        const Tensor& dC = g.nodes_[self].grad;  // (r,c)
        if (g.nodes_[ai].needs_grad) matmul_acc(dC, g.nodes_[bi].val, g.grad_of(ai));
        if (g.nodes_[bi].needs_grad) matmul_tn_acc(dC, g.nodes_[ai].val, g.grad_of(bi));
    }, "matmul_nt");
}

Var Graph::add(Var a, Var b) {
    const Tensor& A = value(a);
    const Tensor& B = value(b);
    require(A.same_shape(B), "add: shape mismatch " + shape_str(A) + " vs " + shape_str(B));
    Tensor out = A;
    for (size_t i = 0; i < out.size(); ++i) out.v[i] += B.v[i];
    int ai = a.i, bi = b.i;
    return push(std::move(out), wants(a) || wants(b), [ai, bi](Graph& g, int self) {
        const Tensor& dC = g.nodes_[self].grad;
        if (g.nodes_[ai].needs_grad) {
            Tensor& dA = g.grad_of(ai);
            for (size_t i = 0; i < dC.size(); ++i) dA.v[i] += dC.v[i];
        }
        if (g.nodes_[bi].needs_grad) {
            Tensor& dB = g.grad_of(bi);
            for (size_t i = 0; i < dC.size(); ++i) dB.v[i] += dC.v[i];
        }
    }, "add");
}

Var Graph::sub(Var a, Var b) {
    return add(a, scale(b, -1.0));
}

Var Graph::mul(Var a, Var b) {
    const Tensor& A = value(a);
    const Tensor& B = value(b);
    require(A.same_shape(B), "mul: shape mismatch " + shape_str(A) + " vs " + shape_str(B));
    Tensor out = A;
    for (size_t i = 0; i < out.size(); ++i) out.v[i] *= B.v[i];
    int ai = a.i, bi = b.i;
    return push(std::move(out), wants(a) || wants(b), [ai, bi](Graph& g, int self) {
        const Tensor& dC = g.nodes_[self].grad;
        if (g.nodes_[ai].needs_grad) {
            Tensor& dA = g.grad_of(ai);
            const Tensor& B2 = g.nodes_[bi].val;
            for (size_t i = 0; i < dC.size(); ++i) dA.v[i] += dC.v[i] * B2.v[i];
        }
        if (g.nodes_[bi].needs_grad) {
            Tensor& dB = g.grad_of(bi);
            const Tensor& A2 = g.nodes_[ai].val;
            for (size_t i = 0; i < dC.size(); ++i) dB.v[i] += dC.v[i] * A2.v[i];
        }
    }, "mul");
}

Var Graph::scale(Var a, double c) {
    const Tensor& A = value(a);
    Tensor out = A;
    for (double& x : out.v) x *= c;
    int ai = a.i;
    return push(std::move(out), wants(a), [ai, c](Graph& g, int self) {
        const Tensor& dC = g.nodes_[self].grad;
        Tensor& dA = g.grad_of(ai);
        for (size_t i = 0; i < dC.size(); ++i) dA.v[i] += c * dC.v[i];
    }, "scale");
}

Var Graph::add_rowvec(Var a, Var row) {
    const Tensor& A = value(a);
    const Tensor& R = value(row);
    require(R.rows() == 1 && R.cols() == A.cols(),
            "add_rowvec: row must be (1," + std::to_string(A.cols()) + "), got " + shape_str(R));
    Tensor out = A;
    for (size_t i = 0; i < A.rows(); ++i)
        for (size_t j = 0; j < A.cols(); ++j) out.at(i, j) += R.v[j];
    int ai = a.i, ri = row.i;
    return push(std::move(out), wants(a) || wants(row), [ai, ri](Graph& g, int self) {
        const Tensor& dC = g.nodes_[self].grad;
        if (g.nodes_[ai].needs_grad) {
            Tensor& dA = g.grad_of(ai);
            for (size_t i = 0; i < dC.size(); ++i) dA.v[i] += dC.v[i];
        }
        if (g.nodes_[ri].needs_grad) {
            Tensor& dR = g.grad_of(ri);
            for (size_t i = 0; i < dC.rows(); ++i)
                for (size_t j = 0; j < dC.cols(); ++j) dR.v[j] += dC.at(i, j);
        }
    }, "add_rowvec");
}

Var Graph::concat(const std::vector<Var>& parts, int axis) {
    require(!parts.empty(), "concat: no inputs");
    require(axis == 0 || axis == 1, "concat: axis must be 0 or 1");
    const Tensor& first = value(parts[0]);
    size_t rows = first.rows(), cols = first.cols();
    bool any_grad = false;
    for (const Var& p : parts) any_grad = any_grad || wants(p);
    if (axis == 0) {
        rows = 0;
        for (const Var& p : parts) {
            require(value(p).cols() == cols, "concat axis 0: column mismatch");
            rows += value(p).rows();
        }
    } else {
        cols = 0;
        for (const Var& p : parts) {
            require(value(p).rows() == rows, "concat axis 1: row mismatch");
            cols += value(p).cols();
        }
    }
    Tensor out(rows, cols);
    std::vector<int> idx;
    idx.reserve(parts.size());
    for (const Var& p : parts) idx.push_back(p.i);
    if (axis == 0) {
        size_t r0 = 0;
        for (const Var& p : parts) {
            const Tensor& t = value(p);
            std::copy(t.v.begin(), t.v.end(), out.v.begin() + r0 * cols);
            r0 += t.rows();
        }
    } else {
        size_t c0 = 0;
        for (const Var& p : parts) {
            const Tensor& t = value(p);
            for (size_t i = 0; i < rows; ++i)
                std::copy(t.v.begin() + i * t.cols(), t.v.begin() + (i + 1) * t.cols(),
                          out.v.begin() + i * cols + c0);
            c0 += t.cols();
        }
    }
    return push(std::move(out), any_grad, [idx, axis](Graph& g, int self) {
        const Tensor& dC = g.nodes_[self].grad;
        size_t off = 0;
        for (int pi : idx) {
            const Tensor& pv = g.nodes_[pi].val;
            if (g.nodes_[pi].needs_grad) {
                Tensor& dP = g.grad_of(pi);
                if (axis == 0) {
                    for (size_t k = 0; k < pv.size(); ++k) dP.v[k] += dC.v[off * pv.cols() + k];
                } else {
                    for (size_t i = 0; i < pv.rows(); ++i)
                        for (size_t j = 0; j < pv.cols(); ++j) dP.at(i, j) += dC.at(i, off + j);
                }
            }
            off += (axis == 0) ? pv.rows() : pv.cols();
        }
    }, "concat");
}

Var Graph::slice_cols(Var a, size_t c0, size_t c1) {
    const Tensor& A = value(a);
    require(c0 < c1 && c1 <= A.cols(), "slice_cols: bad range");
    Tensor out(A.rows(), c1 - c0);
    for (size_t i = 0; i < A.rows(); ++i)
        for (size_t j = c0; j < c1; ++j) out.at(i, j - c0) = A.at(i, j);
    int ai = a.i;
    return push(std::move(out), wants(a), [ai, c0](Graph& g, int self) {
        const Tensor& dC = g.nodes_[self].grad;
        Tensor& dA = g.grad_of(ai);
        for (size_t i = 0; i < dC.rows(); ++i)
            for (size_t j = 0; j < dC.cols(); ++j) dA.at(i, c0 + j) += dC.at(i, j);
    }, "slice_cols");
}

Var Graph::gather_rows(Var a, std::vector<size_t> idx) {
    const Tensor& A = value(a);
    Tensor out(idx.size(), A.cols());
    for (size_t i = 0; i < idx.size(); ++i) {
        require(idx[i] < A.rows(), "gather_rows: index out of range");
        std::copy(A.v.begin() + idx[i] * A.cols(), A.v.begin() + (idx[i] + 1) * A.cols(),
                  out.v.begin() + i * A.cols());
    }
    int ai = a.i;
    return push(std::move(out), wants(a), [ai, idx = std::move(idx)](Graph& g, int self) {
        const Tensor& dC = g.nodes_[self].grad;
        Tensor& dA = g.grad_of(ai);
        for (size_t i = 0; i < idx.size(); ++i)
            for (size_t j = 0; j < dC.cols(); ++j) dA.at(idx[i], j) += dC.at(i, j);
    }, "gather_rows");
}

Var Graph::scatter_rows(Var a, std::vector<size_t> idx, size_t total_rows) {
    const Tensor& A = value(a);
    require(idx.size() == A.rows(), "scatter_rows: index count must equal rows");
    Tensor out(total_rows, A.cols());
    for (size_t i = 0; i < idx.size(); ++i) {
        require(idx[i] < total_rows, "scatter_rows: index out of range");
        for (size_t j = 0; j < A.cols(); ++j) out.at(idx[i], j) += A.at(i, j);
    }
    int ai = a.i;
    return push(std::move(out), wants(a), [ai, idx = std::move(idx)](Graph& g, int self) {
        const Tensor& dC = g.nodes_[self].grad;
        Tensor& dA = g.grad_of(ai);
        for (size_t i = 0; i < idx.size(); ++i)
            for (size_t j = 0; j < dC.cols(); ++j) dA.at(i, j) += dC.at(idx[i], j);
    }, "scatter_rows");
}

Var Graph::reshape(Var a, size_t rows, size_t cols) {
    const Tensor& A = value(a);
    require(rows * cols == A.size(), "reshape: element count mismatch");
    Tensor out;
    out.shape = {rows, cols};
    out.v = A.v;
    int ai = a.i;
    return push(std::move(out), wants(a), [ai](Graph& g, int self) {
        const Tensor& dC = g.nodes_[self].grad;
        Tensor& dA = g.grad_of(ai);
        for (size_t k = 0; k < dC.size(); ++k) dA.v[k] += dC.v[k];
    }, "reshape");
}

Var Graph::softmax(Var a, int axis) {
    const Tensor& A = value(a);
    require(axis == 0 || axis == 1, "softmax: axis must be 0 or 1");
    Tensor out(A.rows(), A.cols());
    if (axis == 1) {
        softmax_rows(A, out);
    } else {
        // softmax over each column
        for (size_t j = 0; j < A.cols(); ++j) {
            double mx = A.at(0, j);
            for (size_t i = 1; i < A.rows(); ++i) mx = std::max(mx, A.at(i, j));
            double s = 0.0;
            for (size_t i = 0; i < A.rows(); ++i) {
                out.at(i, j) = std::exp(A.at(i, j) - mx);
                s += out.at(i, j);
            }
            for (size_t i = 0; i < A.rows(); ++i) out.at(i, j) /= s;
        }
    }
    int ai = a.i;
    return push(std::move(out), wants(a), [ai, axis](Graph& g, int self) {
        const Tensor& Y = g.nodes_[self].val;
        const Tensor& dY = g.nodes_[self].grad;
        Tensor& dA = g.grad_of(ai);
        if (axis == 1) {
            for (size_t i = 0; i < Y.rows(); ++i) {
                double dot = 0.0;
                for (size_t j = 0; j < Y.cols(); ++j) dot += dY.at(i, j) * Y.at(i, j);
                for (size_t j = 0; j < Y.cols(); ++j)
                    dA.at(i, j) += Y.at(i, j) * (dY.at(i, j) - dot);
            }
        } else {
            for (size_t j = 0; j < Y.cols(); ++j) {
                double dot = 0.0;
                for (size_t i = 0; i < Y.rows(); ++i) dot += dY.at(i, j) * Y.at(i, j);
                for (size_t i = 0; i < Y.rows(); ++i)
                    dA.at(i, j) += Y.at(i, j) * (dY.at(i, j) - dot);
            }
        }
    }, "softmax");
}

Var Graph::tanh(Var a) {
    const Tensor& A = value(a);
    Tensor out = A;
    for (double& x : out.v) x = std::tanh(x);
    int ai = a.i;
    return push(std::move(out), wants(a), [ai](Graph& g, int self) {
        const Tensor& Y = g.nodes_[self].val;
        const Tensor& dY = g.nodes_[self].grad;
        Tensor& dA = g.grad_of(ai);
        for (size_t k = 0; k < Y.size(); ++k) dA.v[k] += dY.v[k] * (1.0 - Y.v[k] * Y.v[k]);
    }, "tanh");
}

Var Graph::relu(Var a) {
    const Tensor& A = value(a);
    Tensor out = A;
    for (double& x : out.v) x = x > 0.0 ? x : 0.0;
    int ai = a.i;
    return push(std::move(out), wants(a), [ai](Graph& g, int self) {
        const Tensor& X = g.nodes_[ai].val;
        const Tensor& dY = g.nodes_[self].grad;
        Tensor& dA = g.grad_of(ai);
        for (size_t k = 0; k < X.size(); ++k)
            if (X.v[k] > 0.0) dA.v[k] += dY.v[k];
    }, "relu");
}

Var Graph::log(Var a) {
    const Tensor& A = value(a);
    Tensor out = A;
    for (double& x : out.v) x = std::log(x);
    int ai = a.i;
    return push(std::move(out), wants(a), [ai](Graph& g, int self) {
        const Tensor& X = g.nodes_[ai].val;
        const Tensor& dY = g.nodes_[self].grad;
        Tensor& dA = g.grad_of(ai);
        for (size_t k = 0; k < X.size(); ++k) dA.v[k] += dY.v[k] / X.v[k];
    }, "log");
}

Var Graph::mean_rows(Var a) {
    const Tensor& A = value(a);
    Tensor out(1, A.cols());
    for (size_t i = 0; i < A.rows(); ++i)
        for (size_t j = 0; j < A.cols(); ++j) out.v[j] += A.at(i, j);
    const double inv = 1.0 / static_cast<double>(A.rows());
    for (double& x : out.v) x *= inv;
    int ai = a.i;
    return push(std::move(out), wants(a), [ai, inv](Graph& g, int self) {
        const Tensor& dY = g.nodes_[self].grad;
        Tensor& dA = g.grad_of(ai);
        for (size_t i = 0; i < dA.rows(); ++i)
            for (size_t j = 0; j < dA.cols(); ++j) dA.at(i, j) += inv * dY.v[j];
    }, "mean_rows");
}

Var Graph::sum(Var a) {
    const Tensor& A = value(a);
    Tensor out(1, 1);
    for (double x : A.v) out.v[0] += x;
    int ai = a.i;
    return push(std::move(out), wants(a), [ai](Graph& g, int self) {
        const double d = g.nodes_[self].grad.v[0];
        Tensor& dA = g.grad_of(ai);
        for (double& x : dA.v) x += d;
    }, "sum");
}

Var Graph::pick(Var a, size_t r, size_t c) {
    const Tensor& A = value(a);
    require(r < A.rows() && c < A.cols(), "pick: index out of range");
    Tensor out(1, 1);
    out.v[0] = A.at(r, c);
    int ai = a.i;
    return push(std::move(out), wants(a), [ai, r, c](Graph& g, int self) {
        g.grad_of(ai).at(r, c) += g.nodes_[self].grad.v[0];
    }, "pick");
}

Var Graph::masked_fill(Var a, const std::vector<uint8_t>& allowed, double fill) {
    const Tensor& A = value(a);
    require(allowed.size() == A.cols(), "masked_fill: mask length must equal columns");
    Tensor out = A;
    for (size_t i = 0; i < A.rows(); ++i)
        for (size_t j = 0; j < A.cols(); ++j)
            if (!allowed[j]) out.at(i, j) = fill;
    int ai = a.i;
    return push(std::move(out), wants(a), [ai, allowed](Graph& g, int self) {
        const Tensor& dY = g.nodes_[self].grad;
        Tensor& dA = g.grad_of(ai);
        for (size_t i = 0; i < dY.rows(); ++i)
            for (size_t j = 0; j < dY.cols(); ++j)
                if (allowed[j]) dA.at(i, j) += dY.at(i, j);
    }, "masked_fill");
}

Var Graph::batch_norm(Var x, Var gamma, Var beta, double eps) {
    const Tensor& X = value(x);
    const Tensor& G = value(gamma);
    const Tensor& B = value(beta);
    const size_t R = X.rows(), C = X.cols();
    require(G.rows() == 1 && G.cols() == C, "batch_norm: gamma must be (1,C)");
    require(B.rows() == 1 && B.cols() == C, "batch_norm: beta must be (1,C)");
    require(eps > 0, "batch_norm: eps must be > 0");
    Tensor xhat(R, C);
    Tensor inv_std(1, C);
    Tensor out(R, C);
    for (size_t j = 0; j < C; ++j) {
        double mean = 0.0;
        for (size_t i = 0; i < R; ++i) mean += X.at(i, j);
        mean /= static_cast<double>(R);
        double var = 0.0;
        for (size_t i = 0; i < R; ++i) {
            const double d = X.at(i, j) - mean;
            var += d * d;
        }
        var /= static_cast<double>(R);  // biased
        const double is = 1.0 / std::sqrt(var + eps);
        inv_std.v[j] = is;
        for (size_t i = 0; i < R; ++i) {
            xhat.at(i, j) = (X.at(i, j) - mean) * is;
            out.at(i, j) = G.v[j] * xhat.at(i, j) + B.v[j];
        }
    }
    int xi = x.i, gi = gamma.i, bi = beta.i;
    return push(std::move(out), wants(x) || wants(gamma) || wants(beta),
                [xi, gi, bi, xhat = std::move(xhat), inv_std = std::move(inv_std)](Graph& g, int self) {
        const Tensor& dY = g.nodes_[self].grad;
        const size_t R = dY.rows(), C = dY.cols();
        const Tensor& G2 = g.nodes_[gi].val;
        if (g.nodes_[gi].needs_grad) {
            Tensor& dG = g.grad_of(gi);
            for (size_t j = 0; j < C; ++j) {
                double s = 0.0;
                for (size_t i = 0; i < R; ++i) s += dY.at(i, j) * xhat.at(i, j);
                dG.v[j] += s;
            }
        }
        if (g.nodes_[bi].needs_grad) {
            Tensor& dB = g.grad_of(bi);
            for (size_t j = 0; j < C; ++j) {
                double s = 0.0;
                for (size_t i = 0; i < R; ++i) s += dY.at(i, j);
                dB.v[j] += s;
            }
        }
        if (g.nodes_[xi].needs_grad) {
            Tensor& dX = g.grad_of(xi);
            const double invR = 1.0 / static_cast<double>(R);
            for (size_t j = 0; j < C; ++j) {
                double sum_dxhat = 0.0, sum_dxhat_xhat = 0.0;
                for (size_t i = 0; i < R; ++i) {
                    const double dxh = dY.at(i, j) * G2.v[j];
                    sum_dxhat += dxh;
                    sum_dxhat_xhat += dxh * xhat.at(i, j);
                }
                for (size_t i = 0; i < R; ++i) {
                    const double dxh = dY.at(i, j) * G2.v[j];
                    dX.at(i, j) += inv_std.v[j] *
                                   (dxh - invR * sum_dxhat - xhat.at(i, j) * invR * sum_dxhat_xhat);
                }
            }
        }
    }, "batch_norm");
}

void Graph::backward(Var loss, GradBuffer* buffer) {
    require(recording_, "backward: graph was not recording");
    require(loss.valid() && static_cast<size_t>(loss.i) < nodes_.size(), "backward: invalid loss node");
    require(value(loss).size() == 1, "backward: loss must be a scalar");
    grad_of(loss.i).v[0] = 1.0;
    for (int i = loss.i; i >= 0; --i) {
        Node& n = nodes_[i];
        if (!n.needs_grad || n.grad.empty()) continue;
        if (n.back) n.back(*this, i);
        if (n.bound) {
            if (buffer) {
                Tensor& dst = buffer->slot(n.bound->index, n.bound->value);
                for (size_t k = 0; k < n.grad.size(); ++k) dst.v[k] += n.grad.v[k];
            } else {
                for (size_t k = 0; k < n.grad.size(); ++k) n.bound->grad.v[k] += n.grad.v[k];
            }
        }
    }
    // reset node grads so the tape can be reused for another backward pass
    for (int i = loss.i; i >= 0; --i) nodes_[i].grad = Tensor();
}

}  // namespace pdpha
