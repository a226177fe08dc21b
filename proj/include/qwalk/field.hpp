#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "qwalk/mat2.hpp"

namespace qwalk {

/// Two-component wave function on a periodic ring of n_sites points.
/// Component 0 is psi-minus, component 1 is psi-plus.
struct SpinorField {
    std::size_t n_sites = 0;
    std::vector<cd> minus;
    std::vector<cd> plus;

    SpinorField() = default;
    explicit SpinorField(std::size_t n) : n_sites(n), minus(n), plus(n) {
        if (n == 0) throw std::invalid_argument("SpinorField: n_sites must be positive");
    }

    std::size_t wrap(std::ptrdiff_t p) const {
        const auto n = static_cast<std::ptrdiff_t>(n_sites);
        return static_cast<std::size_t>(((p % n) + n) % n);
    }

    double norm2() const {
        double s = 0;
        for (std::size_t p = 0; p < n_sites; ++p) s += std::norm(minus[p]) + std::norm(plus[p]);
        return s;
    }

    bool finite() const {
        for (std::size_t p = 0; p < n_sites; ++p)
            if (!std::isfinite(minus[p].real()) || !std::isfinite(minus[p].imag()) ||
                !std::isfinite(plus[p].real()) || !std::isfinite(plus[p].imag()))
                return false;
        return true;
    }

    SpinorField& operator+=(const SpinorField& o) {
        for (std::size_t p = 0; p < n_sites; ++p) {
            minus[p] += o.minus[p];
            plus[p] += o.plus[p];
        }
        return *this;
    }
    SpinorField& operator-=(const SpinorField& o) {
        for (std::size_t p = 0; p < n_sites; ++p) {
            minus[p] -= o.minus[p];
            plus[p] -= o.plus[p];
        }
        return *this;
    }
    SpinorField& operator*=(cd s) {
        for (std::size_t p = 0; p < n_sites; ++p) {
            minus[p] *= s;
            plus[p] *= s;
        }
        return *this;
    }
    friend SpinorField operator-(SpinorField a, const SpinorField& b) { return a -= b; }
    friend SpinorField operator+(SpinorField a, const SpinorField& b) { return a += b; }
    friend SpinorField operator*(cd s, SpinorField a) { return a *= s; }
};

/// Hilbertian product <a|b> = sum_p a_p^dag b_p.
inline cd inner(const SpinorField& a, const SpinorField& b) {
    if (a.n_sites != b.n_sites) throw std::invalid_argument("inner: dimension mismatch");
    cd s = 0;
    for (std::size_t p = 0; p < a.n_sites; ++p)
        s += std::conj(a.minus[p]) * b.minus[p] + std::conj(a.plus[p]) * b.plus[p];
    return s;
}

/// Per-site U(2) coin field W_p; a homogeneous coin stores a single matrix.
struct CoinField {
    std::size_t n_sites = 0;
    bool homogeneous = true;
    Mat2 global = Mat2::identity();
    std::vector<Mat2> matrices;  // used when !homogeneous

    static CoinField uniform(std::size_t n, const Mat2& w) {
        if (!w.is_unitary()) throw std::invalid_argument("CoinField: matrix is not unitary");
        CoinField c;
        c.n_sites = n;
        c.global = w;
        return c;
    }

    static CoinField site_dependent(std::vector<Mat2> ws) {
        CoinField c;
        c.n_sites = ws.size();
        c.homogeneous = false;
        for (const Mat2& w : ws)
            if (!w.is_unitary()) throw std::invalid_argument("CoinField: matrix is not unitary");
        c.matrices = std::move(ws);
        return c;
    }

    const Mat2& at(std::size_t p) const { return homogeneous ? global : matrices[p]; }
};

/// Sequence of time slices Psi_j, j = 0..J.
struct Trajectory {
    std::vector<SpinorField> slices;

    std::size_t steps() const { return slices.empty() ? 0 : slices.size() - 1; }
    std::size_t n_sites() const { return slices.empty() ? 0 : slices.front().n_sites; }
    const SpinorField& operator[](std::size_t j) const { return slices[j]; }
};

/// Per-site complex density or current.
struct ScalarField {
    std::vector<cd> values;

    std::size_t size() const { return values.size(); }
    cd& operator[](std::size_t p) { return values[p]; }
    const cd& operator[](std::size_t p) const { return values[p]; }
    cd at_wrapped(std::ptrdiff_t p) const {
        const auto n = static_cast<std::ptrdiff_t>(values.size());
        return values[static_cast<std::size_t>(((p % n) + n) % n)];
    }
    cd total() const {
        cd s = 0;
        for (const cd& v : values) s += v;
        return s;
    }
};

}  // namespace qwalk
