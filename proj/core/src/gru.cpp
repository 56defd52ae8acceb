#include "seqcopy/gru.hpp"

#include <cmath>

#include "seqcopy/error.hpp"
#include "seqcopy/linalg.hpp"

namespace seqcopy {

namespace {

void check_dims(const GruParamRefs& p, std::size_t x_size, std::size_t h_size) {
    const int hid = p.w_update->rows();
    const int in = p.w_update->cols() - hid;
    if (in <= 0) throw ShapeError("gru weight narrower than its hidden size");
    if (p.w_reset->rows() != hid || p.w_reset->cols() != in + hid ||
        p.w_cand->rows() != hid || p.w_cand->cols() != in + hid)
        throw ShapeError("gru gate weights disagree on shape");
    if (static_cast<int>(x_size) != in || static_cast<int>(h_size) != hid)
        throw ShapeError("gru input/state size mismatch");
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

Vec gru_cell(const GruParamRefs& p, std::span<const double> x, std::span<const double> h_prev,
             GruCache* cache) {
    check_dims(p, x.size(), h_prev.size());
    const int hid = p.hidden_size();

    Vec z(hid), r(hid);
    la::matvec2(*p.w_update, x, h_prev, z);
    la::matvec2(*p.w_reset, x, h_prev, r);
    if (p.b_update) la::add_to(p.b_update->values(), z);
    if (p.b_reset) la::add_to(p.b_reset->values(), r);
    for (int i = 0; i < hid; ++i) {
        z[i] = sigmoid(z[i]);
        r[i] = sigmoid(r[i]);
    }

    Vec gated(hid);
    for (int i = 0; i < hid; ++i) gated[i] = r[i] * h_prev[i];

    Vec n(hid);
    la::matvec2(*p.w_cand, x, gated, n);
    if (p.b_cand) la::add_to(p.b_cand->values(), n);
    for (int i = 0; i < hid; ++i) n[i] = std::tanh(n[i]);

    Vec h(hid);
    for (int i = 0; i < hid; ++i) h[i] = (1.0 - z[i]) * h_prev[i] + z[i] * n[i];

    if (cache) {
        cache->update = std::move(z);
        cache->reset = std::move(r);
        cache->cand = std::move(n);
        cache->gated_prev = std::move(gated);
    }
    return h;
}

void gru_cell_backward(const GruParamRefs& p, const GruGradRefs& g, std::span<const double> x,
                       std::span<const double> h_prev, const GruCache& cache,
                       std::span<const double> dh_out, std::span<double> dx_acc,
                       std::span<double> dh_prev_acc) {
    const int hid = p.hidden_size();
    const Vec& z = cache.update;
    const Vec& r = cache.reset;
    const Vec& n = cache.cand;

    // h' = (1-z) h + z n
    Vec dz(hid), dn(hid);
    for (int i = 0; i < hid; ++i) {
        dz[i] = dh_out[i] * (n[i] - h_prev[i]);
        dn[i] = dh_out[i] * z[i];
        dh_prev_acc[i] += dh_out[i] * (1.0 - z[i]);
    }

    // candidate pre-activation
    Vec da_n(hid);
    for (int i = 0; i < hid; ++i) da_n[i] = dn[i] * (1.0 - n[i] * n[i]);
    la::outer_add2(*g.w_cand, da_n, x, cache.gated_prev);
    if (g.b_cand) la::add_to(da_n, g.b_cand->values());

    Vec dgated(hid, 0.0);
    la::matvec2_t_add(*p.w_cand, da_n, dx_acc, dgated);

    Vec dr(hid);
    for (int i = 0; i < hid; ++i) {
        dr[i] = dgated[i] * h_prev[i];
        dh_prev_acc[i] += dgated[i] * r[i];
    }

    // gate pre-activations
    Vec da_z(hid), da_r(hid);
    for (int i = 0; i < hid; ++i) {
        da_z[i] = dz[i] * z[i] * (1.0 - z[i]);
        da_r[i] = dr[i] * r[i] * (1.0 - r[i]);
    }
    la::outer_add2(*g.w_update, da_z, x, h_prev);
    la::outer_add2(*g.w_reset, da_r, x, h_prev);
    if (g.b_update) la::add_to(da_z, g.b_update->values());
    if (g.b_reset) la::add_to(da_r, g.b_reset->values());
    la::matvec2_t_add(*p.w_update, da_z, dx_acc, dh_prev_acc);
    la::matvec2_t_add(*p.w_reset, da_r, dx_acc, dh_prev_acc);
}

}  // namespace seqcopy
