#include "seqcopy/param_store.hpp"

#include <algorithm>
#include <cmath>

#include "seqcopy/error.hpp"

namespace seqcopy {

int ParameterStore::add(const std::string& name, Shape shape) {
    return add(name, Tensor(std::move(shape)));
}

int ParameterStore::add(const std::string& name, Tensor init) {
    if (has(name)) throw InvalidArgument("duplicate parameter name: " + name);
    const int idx = size();
    Entry e;
    e.name = name;
    e.grad = Tensor(init.shape());
    e.adam_m = Tensor(init.shape());
    e.adam_v = Tensor(init.shape());
    e.param = std::move(init);
    entries_.push_back(std::move(e));
    index_.emplace(name, idx);
    return idx;
}

int ParameterStore::index_of(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw InvalidArgument("unknown parameter name: " + name);
    return it->second;
}

std::int64_t ParameterStore::value_count() const {
    std::int64_t n = 0;
    for (const auto& e : entries_) n += e.param.size();
    return n;
}

void ParameterStore::zero_grads() {
    for (auto& e : entries_) e.grad.fill(0.0);
}

void ParameterStore::scale_grads(double factor) {
    for (auto& e : entries_)
        for (double& g : e.grad.values()) g *= factor;
}

void clip_gradients(ParameterStore& store, double bound) {
    if (!(bound > 0.0)) throw InvalidArgument("clip bound must be positive");
    for (int i = 0; i < store.size(); ++i)
        for (double& g : store.grad(i).values()) g = std::clamp(g, -bound, bound);
}

void adam_step(ParameterStore& store, const AdamConfig& cfg) {
    const std::int64_t t = store.step_count() + 1;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));

    for (int i = 0; i < store.size(); ++i) {
        Tensor& p = store.param(i);
        Tensor& g = store.grad(i);
        Tensor& m = store.adam_m(i);
        Tensor& v = store.adam_v(i);
        if (!p.same_shape(g) || !p.same_shape(m) || !p.same_shape(v))
            throw InternalError("parameter/gradient shape mismatch for " + store.name(i));

        for (std::int64_t k = 0; k < p.size(); ++k) {
            const double gk = g[k];
            m[k] = cfg.beta1 * m[k] + (1.0 - cfg.beta1) * gk;
            v[k] = cfg.beta2 * v[k] + (1.0 - cfg.beta2) * gk * gk;
            const double m_hat = m[k] / bc1;
            const double v_hat = v[k] / bc2;
            p[k] -= cfg.alpha * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
            if (!std::isfinite(p[k]))
                throw DivergenceError("non-finite parameter after Adam update in " + store.name(i));
        }
        g.fill(0.0);
    }
    store.set_step_count(t);
}

}  // namespace seqcopy
