#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "driftids/numgrad/matrix.hpp"

namespace driftids::numgrad {

struct ParamTag {};
struct GradTag {};

// Ordered collection of named tensors with a flat-index view. The name/shape
// layout is fixed once constructed; only values change.
template <typename Tag>
class NamedTensors {
public:
    NamedTensors() = default;

    void add(std::string name, Matrix value) {
        for (const auto& n : names_) {
            require(n != name, ErrorKind::contract, "duplicate tensor name " + name);
        }
        names_.push_back(std::move(name));
        flat_size_ += value.size();
        tensors_.push_back(std::move(value));
    }

    template <typename OtherTag>
    static NamedTensors zeros_like(const NamedTensors<OtherTag>& other) {
        NamedTensors out;
        for (std::size_t i = 0; i < other.count(); ++i) {
            out.add(other.name(i), Matrix(other[i].rows(), other[i].cols()));
        }
        return out;
    }

    std::size_t count() const noexcept { return tensors_.size(); }
    std::size_t flat_size() const noexcept { return flat_size_; }

    const std::string& name(std::size_t i) const { return names_[i]; }
    Matrix& operator[](std::size_t i) { return tensors_[i]; }
    const Matrix& operator[](std::size_t i) const { return tensors_[i]; }

    std::size_t index_of(const std::string& name) const {
        for (std::size_t i = 0; i < names_.size(); ++i) {
            if (names_[i] == name) {
                return i;
            }
        }
        fail(ErrorKind::contract, "no tensor named " + name);
    }
    Matrix& at(const std::string& name) { return tensors_[index_of(name)]; }
    const Matrix& at(const std::string& name) const { return tensors_[index_of(name)]; }

    double flat(std::size_t k) const {
        auto [t, off] = locate(k);
        return tensors_[t].values()[off];
    }
    void set_flat(std::size_t k, double v) {
        auto [t, off] = locate(k);
        tensors_[t].values()[off] = v;
    }
    // Name of the tensor containing flat index k.
    const std::string& flat_owner(std::size_t k) const { return names_[locate(k).first]; }

    std::vector<double> to_flat() const {
        std::vector<double> out;
        out.reserve(flat_size_);
        for (const auto& t : tensors_) {
            out.insert(out.end(), t.values().begin(), t.values().end());
        }
        return out;
    }

    template <typename OtherTag>
    bool same_layout(const NamedTensors<OtherTag>& other) const {
        if (count() != other.count()) {
            return false;
        }
        for (std::size_t i = 0; i < count(); ++i) {
            if (names_[i] != other.name(i) || !tensors_[i].same_shape(other[i])) {
                return false;
            }
        }
        return true;
    }

    void set_zero() {
        for (auto& t : tensors_) {
            t.fill(0.0);
        }
    }

    bool all_finite() const {
        for (const auto& t : tensors_) {
            if (!t.all_finite()) {
                return false;
            }
        }
        return true;
    }

    bool operator==(const NamedTensors& other) const = default;

private:
    std::pair<std::size_t, std::size_t> locate(std::size_t k) const {
        for (std::size_t t = 0; t < tensors_.size(); ++t) {
            if (k < tensors_[t].size()) {
                return {t, k};
            }
            k -= tensors_[t].size();
        }
        fail(ErrorKind::contract, "flat index out of range");
    }

    std::vector<std::string> names_;
    std::vector<Matrix> tensors_;
    std::size_t flat_size_ = 0;
};

using ParamSet = NamedTensors<ParamTag>;
using GradSet = NamedTensors<GradTag>;

// dst += scale * src, elementwise over matching layouts.
template <typename A, typename B>
void axpy(NamedTensors<A>& dst, double scale, const NamedTensors<B>& src) {
    require(dst.same_layout(src), ErrorKind::contract, "tensor set layout mismatch");
    for (std::size_t i = 0; i < dst.count(); ++i) {
        auto d = dst[i].values();
        auto s = src[i].values();
        for (std::size_t k = 0; k < d.size(); ++k) {
            d[k] += scale * s[k];
        }
    }
}

template <typename A, typename B>
void add_into(NamedTensors<A>& dst, const NamedTensors<B>& src) {
    require(dst.same_layout(src), ErrorKind::contract, "tensor set layout mismatch");
    for (std::size_t i = 0; i < dst.count(); ++i) {
        auto d = dst[i].values();
        auto s = src[i].values();
        for (std::size_t k = 0; k < d.size(); ++k) {
            d[k] += s[k];
        }
    }
}

}  // namespace driftids::numgrad
