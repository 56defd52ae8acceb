#pragma once

#include <cassert>
#include <span>

#include "seqcopy/tensor.hpp"

// Small dense kernels used by every layer. All matrices are row-major, so
// forward products and gradient accumulation walk contiguous rows. The
// two-block variants consume concatenated inputs [a; b] without forming
// the concatenation.
namespace seqcopy::la {

inline double dot(std::span<const double> a, std::span<const double> b) {
    assert(a.size() == b.size());
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// y += alpha * x
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    assert(x.size() == y.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

// y = W x
inline void matvec(const Tensor& w, std::span<const double> x, std::span<double> y) {
    assert(static_cast<int>(x.size()) == w.cols());
    assert(static_cast<int>(y.size()) == w.rows());
    for (int r = 0; r < w.rows(); ++r) y[r] = dot(w.row(r), x);
}

// y += W x
inline void matvec_add(const Tensor& w, std::span<const double> x, std::span<double> y) {
    assert(static_cast<int>(x.size()) == w.cols());
    for (int r = 0; r < w.rows(); ++r) y[r] += dot(w.row(r), x);
}

// y = W [a; b]
inline void matvec2(const Tensor& w, std::span<const double> a, std::span<const double> b,
                    std::span<double> y) {
    assert(static_cast<int>(a.size() + b.size()) == w.cols());
    const std::size_t na = a.size();
    for (int r = 0; r < w.rows(); ++r) {
        auto row = w.row(r);
        y[r] = dot(row.subspan(0, na), a) + dot(row.subspan(na), b);
    }
}

// dx += W^T g
inline void matvec_t_add(const Tensor& w, std::span<const double> g, std::span<double> dx) {
    assert(static_cast<int>(g.size()) == w.rows());
    assert(static_cast<int>(dx.size()) == w.cols());
    for (int r = 0; r < w.rows(); ++r) axpy(g[r], w.row(r), dx);
}

// [da; db] += W^T g
inline void matvec2_t_add(const Tensor& w, std::span<const double> g, std::span<double> da,
                          std::span<double> db) {
    assert(static_cast<int>(da.size() + db.size()) == w.cols());
    const std::size_t na = da.size();
    for (int r = 0; r < w.rows(); ++r) {
        auto row = w.row(r);
        axpy(g[r], row.subspan(0, na), da);
        axpy(g[r], row.subspan(na), db);
    }
}

// dW += g x^T
inline void outer_add(Tensor& dw, std::span<const double> g, std::span<const double> x) {
    assert(static_cast<int>(g.size()) == dw.rows());
    assert(static_cast<int>(x.size()) == dw.cols());
    for (int r = 0; r < dw.rows(); ++r) axpy(g[r], x, dw.row(r));
}

// dW += g [a; b]^T
inline void outer_add2(Tensor& dw, std::span<const double> g, std::span<const double> a,
                       std::span<const double> b) {
    const std::size_t na = a.size();
    for (int r = 0; r < dw.rows(); ++r) {
        auto row = dw.row(r);
        axpy(g[r], a, row.subspan(0, na));
        axpy(g[r], b, row.subspan(na));
    }
}

inline void add_to(std::span<const double> x, std::span<double> y) { axpy(1.0, x, y); }

}  // namespace seqcopy::la
