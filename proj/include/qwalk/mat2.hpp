#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>

namespace qwalk {

using cd = std::complex<double>;

/// Dense 2x2 complex matrix with value semantics. Row-major storage.
struct Mat2 {
    std::array<cd, 4> a{};  // a[2*r + c]

    constexpr cd& operator()(int r, int c) { return a[2 * r + c]; }
    constexpr const cd& operator()(int r, int c) const { return a[2 * r + c]; }

    static Mat2 identity() { return {{cd(1), cd(0), cd(0), cd(1)}}; }
    static Mat2 zero() { return {}; }
    static Mat2 diag(cd d0, cd d1) { return {{d0, cd(0), cd(0), d1}}; }
    static Mat2 pauli_x() { return {{cd(0), cd(1), cd(1), cd(0)}}; }
    static Mat2 pauli_z() { return {{cd(1), cd(0), cd(0), cd(-1)}}; }

    Mat2 adjoint() const {
        return {{std::conj(a[0]), std::conj(a[2]), std::conj(a[1]), std::conj(a[3])}};
    }

    cd trace() const { return a[0] + a[3]; }
    cd det() const { return a[0] * a[3] - a[1] * a[2]; }

    friend Mat2 operator*(const Mat2& x, const Mat2& y) {
        Mat2 r;
        r.a[0] = x.a[0] * y.a[0] + x.a[1] * y.a[2];
        r.a[1] = x.a[0] * y.a[1] + x.a[1] * y.a[3];
        r.a[2] = x.a[2] * y.a[0] + x.a[3] * y.a[2];
        r.a[3] = x.a[2] * y.a[1] + x.a[3] * y.a[3];
        return r;
    }
    friend Mat2 operator+(const Mat2& x, const Mat2& y) {
        Mat2 r;
        for (int i = 0; i < 4; ++i) r.a[i] = x.a[i] + y.a[i];
        return r;
    }
    friend Mat2 operator-(const Mat2& x, const Mat2& y) {
        Mat2 r;
        for (int i = 0; i < 4; ++i) r.a[i] = x.a[i] - y.a[i];
        return r;
    }
    friend Mat2 operator*(cd s, const Mat2& x) {
        Mat2 r;
        for (int i = 0; i < 4; ++i) r.a[i] = s * x.a[i];
        return r;
    }
    friend Mat2 operator*(const Mat2& x, cd s) { return s * x; }

    /// Max absolute entry of the matrix.
    double max_abs() const {
        double m = 0;
        for (const cd& z : a) m = std::max(m, std::abs(z));
        return m;
    }

    /// ||W^dag W - 1||_max, zero for a unitary matrix.
    double unitarity_defect() const {
        return (adjoint() * *this - identity()).max_abs();
    }

    bool is_unitary(double tol = 1e-12) const { return unitarity_defect() < tol; }
};

/// Apply a matrix to a spin pair.
inline std::array<cd, 2> apply(const Mat2& m, const std::array<cd, 2>& v) {
    return {m.a[0] * v[0] + m.a[1] * v[1], m.a[2] * v[0] + m.a[3] * v[1]};
}

/// exp(i theta sigma_1) = cos(theta) 1 + i sin(theta) sigma_1.
inline Mat2 exp_i_sigma1(double theta) {
    const cd c(std::cos(theta), 0.0);
    const cd is(0.0, std::sin(theta));
    return {{c, is, is, c}};
}

/// Eigendecomposition of a 2x2 unitary: columns of `vectors` are orthonormal
/// eigenvectors, `phases` the eigenphases in (-pi, pi].
///
/// Deterministic conventions: phases sorted ascending; each eigenvector's
/// first nonvanishing component made real positive; a degenerate spectrum
/// (multiple of the identity) returns the identity basis.
struct UnitaryEigen {
    std::array<double, 2> phases{};
    Mat2 vectors = Mat2::identity();
};

inline UnitaryEigen eigen_unitary(const Mat2& u, double degeneracy_tol = 1e-12) {
    if (!u.is_unitary(1e-10)) throw std::invalid_argument("eigen_unitary: matrix is not unitary");
    const cd tr = u.trace();
    const cd dt = u.det();
    const cd disc = std::sqrt(tr * tr - 4.0 * dt);
    cd mu0 = 0.5 * (tr + disc);
    cd mu1 = 0.5 * (tr - disc);

    UnitaryEigen out;
    if (std::abs(mu0 - mu1) < degeneracy_tol) {
        const double ph = std::arg(mu0);
        out.phases = {ph, ph};
        out.vectors = Mat2::identity();
        return out;
    }

    auto phase0 = std::arg(mu0);
    auto phase1 = std::arg(mu1);
    if (phase1 < phase0) {
        std::swap(mu0, mu1);
        std::swap(phase0, phase1);
    }
    out.phases = {phase0, phase1};

    // Column of (u - mu1 * 1) with the larger norm spans the mu0 eigenspace.
    const Mat2 b = u - Mat2::diag(mu1, mu1);
    std::array<cd, 2> v0{b.a[0], b.a[2]};
    const std::array<cd, 2> alt{b.a[1], b.a[3]};
    if (std::norm(alt[0]) + std::norm(alt[1]) > std::norm(v0[0]) + std::norm(v0[1]))
        v0 = alt;

    auto normalize_fix = [](std::array<cd, 2>& v) {
        const double n = std::sqrt(std::norm(v[0]) + std::norm(v[1]));
        v[0] /= n;
        v[1] /= n;
        const cd lead = (std::abs(v[0]) > 1e-14) ? v[0] : v[1];
        const cd ph = std::conj(lead) / std::abs(lead);
        v[0] *= ph;
        v[1] *= ph;
    };
    normalize_fix(v0);

    // A normal matrix with distinct eigenvalues has orthogonal eigenspaces.
    std::array<cd, 2> v1{-std::conj(v0[1]), std::conj(v0[0])};
    normalize_fix(v1);

    out.vectors = {{v0[0], v1[0], v0[1], v1[1]}};
    return out;
}

}  // namespace qwalk
