#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "seqcopy/error.hpp"

namespace seqcopy {

// Activations and other transient vectors live in plain std::vector<double>;
// Tensor is reserved for named, shaped storage (parameters, gradients,
// optimizer state). All training math runs at 64-bit precision.
using Vec = std::vector<double>;
using Shape = std::vector<int>;

// Dense row-major tensor of doubles. Rank 1 or 2 in practice.
class Tensor {
public:
    Tensor() = default;

    explicit Tensor(Shape shape) : shape_(std::move(shape)) {
        validate_shape();
        v_.assign(static_cast<std::size_t>(count(shape_)), 0.0);
    }

    Tensor(Shape shape, Vec values) : shape_(std::move(shape)), v_(std::move(values)) {
        validate_shape();
        if (count(shape_) != static_cast<std::int64_t>(v_.size()))
            throw ShapeError("tensor value count does not match shape");
    }

    static Tensor zeros(Shape shape) { return Tensor(std::move(shape)); }

    const Shape& shape() const { return shape_; }
    int rank() const { return static_cast<int>(shape_.size()); }
    std::int64_t size() const { return static_cast<std::int64_t>(v_.size()); }

    int rows() const { return shape_.empty() ? 0 : shape_[0]; }
    int cols() const { return shape_.size() >= 2 ? shape_[1] : 1; }

    double* data() { return v_.data(); }
    const double* data() const { return v_.data(); }
    std::span<double> values() { return v_; }
    std::span<const double> values() const { return v_; }

    std::span<double> row(int r) {
        return {v_.data() + static_cast<std::size_t>(r) * cols(), static_cast<std::size_t>(cols())};
    }
    std::span<const double> row(int r) const {
        return {v_.data() + static_cast<std::size_t>(r) * cols(), static_cast<std::size_t>(cols())};
    }

    double& operator()(int r, int c) { return v_[static_cast<std::size_t>(r) * cols() + c]; }
    double operator()(int r, int c) const { return v_[static_cast<std::size_t>(r) * cols() + c]; }
    double& operator[](std::int64_t i) { return v_[static_cast<std::size_t>(i)]; }
    double operator[](std::int64_t i) const { return v_[static_cast<std::size_t>(i)]; }

    void fill(double x) { v_.assign(v_.size(), x); }

    bool all_finite() const;
    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

    static std::int64_t count(const Shape& s) {
        std::int64_t n = 1;
        for (int d : s) n *= d;
        return n;
    }

private:
    void validate_shape() const {
        if (shape_.empty()) throw ShapeError("tensor shape must not be empty");
        for (int d : shape_)
            if (d <= 0) throw ShapeError("tensor dimensions must be positive");
    }

    Shape shape_;
    Vec v_;
};

}  // namespace seqcopy
