#pragma once

// Dense row-major rank-2 tensors. Vectors are 1 x n. Double precision is used
// by every test suite; training may run in float via the config precision
// switch, so everything numeric is templated on the scalar type.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "kaleido/rng.hpp"

namespace kaleido {

template <class T>
struct Tensor {
    int rows = 0;
    int cols = 0;
    std::vector<T> v;

    Tensor() = default;
    Tensor(int r, int c) : rows(r), cols(c), v(static_cast<size_t>(r) * c, T(0)) {
        if (r < 0 || c < 0) throw std::invalid_argument("Tensor: negative shape");
    }
    Tensor(int r, int c, T fill) : rows(r), cols(c), v(static_cast<size_t>(r) * c, fill) {}

    size_t size() const { return v.size(); }
    T& at(int r, int c) { return v[static_cast<size_t>(r) * cols + c]; }
    T at(int r, int c) const { return v[static_cast<size_t>(r) * cols + c]; }

    bool same_shape(const Tensor& o) const { return rows == o.rows && cols == o.cols; }

    void fill(T x) {
        for (auto& e : v) e = x;
    }

    void zero() { fill(T(0)); }

    bool all_finite() const {
        for (T e : v)
            if (!std::isfinite(static_cast<double>(e))) return false;
        return true;
    }

    static Tensor row(const std::vector<T>& vals) {
        Tensor t(1, static_cast<int>(vals.size()));
        t.v = vals;
        return t;
    }

    static Tensor uniform(int r, int c, T lo, T hi, RngStream& rng) {
        Tensor t(r, c);
        for (auto& e : t.v) e = static_cast<T>(rng.uniform(static_cast<double>(lo), static_cast<double>(hi)));
        return t;
    }
};

template <class T>
std::string shape_str(const Tensor<T>& t) {
    return "[" + std::to_string(t.rows) + "x" + std::to_string(t.cols) + "]";
}

// c = a * b, accumulating in the i-k-j order so the inner loop streams rows of
// b and c. This is the hot kernel of the whole project.
template <class T>
void matmul(const Tensor<T>& a, const Tensor<T>& b, Tensor<T>& c) {
    if (a.cols != b.rows || c.rows != a.rows || c.cols != b.cols)
        throw std::invalid_argument("matmul: shape mismatch " + shape_str(a) + " x " + shape_str(b));
    const int m = a.rows, k = b.rows, n = b.cols;
    for (int i = 0; i < m; ++i) {
        T* ci = &c.v[static_cast<size_t>(i) * n];
        for (int j = 0; j < n; ++j) ci[j] = T(0);
        const T* ai = &a.v[static_cast<size_t>(i) * k];
        for (int p = 0; p < k; ++p) {
            const T aip = ai[p];
            const T* bp = &b.v[static_cast<size_t>(p) * n];
            for (int j = 0; j < n; ++j) ci[j] += aip * bp[j];
        }
    }
}

// c += a^T * b  (a: [m x r], b: [m x n], c: [r x n]); gradient accumulation path
template <class T>
void matmul_at_b_acc(const Tensor<T>& a, const Tensor<T>& b, Tensor<T>& c) {
    if (a.rows != b.rows || c.rows != a.cols || c.cols != b.cols)
        throw std::invalid_argument("matmul_at_b_acc: shape mismatch");
    const int m = a.rows, r = a.cols, n = b.cols;
    for (int i = 0; i < m; ++i) {
        const T* ai = &a.v[static_cast<size_t>(i) * r];
        const T* bi = &b.v[static_cast<size_t>(i) * n];
        for (int p = 0; p < r; ++p) {
            const T aip = ai[p];
            T* cp = &c.v[static_cast<size_t>(p) * n];
            for (int j = 0; j < n; ++j) cp[j] += aip * bi[j];
        }
    }
}

// c += a * b^T  (a: [m x n], b: [r x n], c: [m x r]); gradient accumulation path
template <class T>
void matmul_a_bt_acc(const Tensor<T>& a, const Tensor<T>& b, Tensor<T>& c) {
    if (a.cols != b.cols || c.rows != a.rows || c.cols != b.rows)
        throw std::invalid_argument("matmul_a_bt_acc: shape mismatch");
    const int m = a.rows, n = a.cols, r = b.rows;
    for (int i = 0; i < m; ++i) {
        const T* ai = &a.v[static_cast<size_t>(i) * n];
        T* ci = &c.v[static_cast<size_t>(i) * r];
        for (int p = 0; p < r; ++p) {
            const T* bp = &b.v[static_cast<size_t>(p) * n];
            T acc = T(0);
            for (int j = 0; j < n; ++j) acc += ai[j] * bp[j];
            ci[p] += acc;
        }
    }
}

}  // namespace kaleido
