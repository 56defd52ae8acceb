#pragma once

#include <cstdint>
#include <deque>
#include <string>
#include <unordered_map>

#include "seqcopy/tensor.hpp"

namespace seqcopy {

struct AdamConfig {
    double alpha = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

// Ordered collection of named parameter tensors, each paired with a gradient
// buffer and Adam moment buffers of the same shape. Insertion order is the
// iteration (and checkpoint) order. Entries are stored in a deque so
// references handed out after registration stay valid.
class ParameterStore {
public:
    struct Entry {
        std::string name;
        Tensor param;
        Tensor grad;
        Tensor adam_m;
        Tensor adam_v;
    };

    // Registers a zero-initialized parameter; returns its index.
    int add(const std::string& name, Shape shape);
    // Registers a parameter with the given initial values.
    int add(const std::string& name, Tensor init);

    int size() const { return static_cast<int>(entries_.size()); }
    bool has(const std::string& name) const { return index_.count(name) != 0; }
    int index_of(const std::string& name) const;

    const std::string& name(int i) const { return entries_[i].name; }
    Tensor& param(int i) { return entries_[i].param; }
    const Tensor& param(int i) const { return entries_[i].param; }
    Tensor& grad(int i) { return entries_[i].grad; }
    const Tensor& grad(int i) const { return entries_[i].grad; }
    Tensor& adam_m(int i) { return entries_[i].adam_m; }
    Tensor& adam_v(int i) { return entries_[i].adam_v; }
    const Tensor& adam_m(int i) const { return entries_[i].adam_m; }
    const Tensor& adam_v(int i) const { return entries_[i].adam_v; }

    std::int64_t step_count() const { return step_count_; }
    void set_step_count(std::int64_t s) { step_count_ = s; }

    std::int64_t value_count() const;

    void zero_grads();
    void scale_grads(double factor);

private:
    std::deque<Entry> entries_;
    std::unordered_map<std::string, int> index_;
    std::int64_t step_count_ = 0;
};

// Element-wise clamp of every gradient component to [-bound, bound].
void clip_gradients(ParameterStore& store, double bound);

// Bias-corrected Adam update over every entry; increments step_count and
// zeroes the gradients afterwards.
void adam_step(ParameterStore& store, const AdamConfig& cfg);

}  // namespace seqcopy
