#pragma once

#include <array>
#include <cmath>
#include <map>
#include <stdexcept>
#include <vector>

#include "qwalk/extended_action.hpp"

namespace qwalk {

/// Finite sum of terms (matrix x integer site shift). A term (M, d) maps a
/// spinor field f to M f_{p+d} per site. Composition multiplies matrices and
/// adds shifts, which encodes products like W sigma_3 (T - 1) exactly.
struct ShiftOp {
    std::map<int, Mat2> terms;

    static ShiftOp matrix(const Mat2& m) {
        ShiftOp o;
        o.terms[0] = m;
        return o;
    }
    static ShiftOp identity() { return matrix(Mat2::identity()); }

    /// T = E_11 (x) shift(+1) + E_22 (x) shift(-1).
    static ShiftOp translation() {
        ShiftOp o;
        o.terms[+1] = Mat2::diag(1, 0);
        o.terms[-1] = Mat2::diag(0, 1);
        return o;
    }

    /// C = (shift(+1) + shift(-1)) / 2 on both components.
    static ShiftOp neighbor_avg() {
        ShiftOp o;
        o.terms[+1] = Mat2::diag(0.5, 0.5);
        o.terms[-1] = Mat2::diag(0.5, 0.5);
        return o;
    }

    friend ShiftOp operator+(const ShiftOp& x, const ShiftOp& y) {
        ShiftOp r = x;
        for (const auto& [d, m] : y.terms) {
            auto it = r.terms.find(d);
            if (it == r.terms.end())
                r.terms[d] = m;
            else
                it->second = it->second + m;
        }
        return r;
    }
    friend ShiftOp operator-(const ShiftOp& x, const ShiftOp& y) { return x + (cd(-1) * y); }
    friend ShiftOp operator*(cd s, const ShiftOp& x) {
        ShiftOp r = x;
        for (auto& [d, m] : r.terms) m = s * m;
        return r;
    }
    friend ShiftOp operator*(const ShiftOp& x, const ShiftOp& y) {
        ShiftOp r;
        for (const auto& [dx, mx] : x.terms)
            for (const auto& [dy, my] : y.terms) {
                const int d = dx + dy;
                const Mat2 m = mx * my;
                auto it = r.terms.find(d);
                if (it == r.terms.end())
                    r.terms[d] = m;
                else
                    it->second = it->second + m;
            }
        return r;
    }

    SpinorField operator()(const SpinorField& f) const {
        SpinorField out(f.n_sites);
        for (const auto& [d, m] : terms) {
            for (std::size_t p = 0; p < f.n_sites; ++p) {
                const std::size_t q = f.wrap(static_cast<std::ptrdiff_t>(p) + d);
                const auto v = apply(m, {f.minus[q], f.plus[q]});
                out.minus[p] += v[0];
                out.plus[p] += v[1];
            }
        }
        return out;
    }

    /// Conjugate every matrix coefficient: M -> B^dag M B.
    ShiftOp conjugated(const Mat2& basis) const {
        ShiftOp r = *this;
        const Mat2 bd = basis.adjoint();
        for (auto& [d, m] : r.terms) m = bd * m * basis;
        return r;
    }
};

/// Scale a spin-operator matrix (written in the eigenbasis) per the SOLT law:
/// LL entry x lambda^2, RR entry x lambda^-2, off-diagonal unchanged.
inline Mat2 solt_transform(const Mat2& op, double lambda) {
    if (lambda <= 0) throw std::invalid_argument("solt_transform: lambda must be positive");
    Mat2 r = op;
    r(0, 0) *= lambda * lambda;
    r(1, 1) /= lambda * lambda;
    return r;
}

inline ShiftOp solt_transform(const ShiftOp& op, double lambda) {
    ShiftOp r = op;
    for (auto& [d, m] : r.terms) m = solt_transform(m, lambda);
    return r;
}

/// Eigenbasis of W sigma_3 plus the basis scaling lambda of a Lorentz frame.
/// Columns of basis_matrix are (b_L, b_R), the normalized eigenvectors with
/// eigenphases alpha_L <= alpha_R in (-pi, pi]; sigma_bar3 is the operator
/// represented by the third Pauli matrix in that basis.
struct SpinFrame {
    double lambda = 1;
    double alpha_L = 0, alpha_R = 0;
    Mat2 basis_matrix = Mat2::identity();
    Mat2 sigma_bar3 = Mat2::pauli_z();
};

inline SpinFrame spin_frame_of(const Mat2& coin_matrix, double lambda) {
    if (lambda <= 0) throw std::invalid_argument("spin_frame_of: lambda must be positive");
    const UnitaryEigen eig = eigen_unitary(coin_matrix * Mat2::pauli_z());
    SpinFrame f;
    f.lambda = lambda;
    f.alpha_L = eig.phases[0];
    f.alpha_R = eig.phases[1];
    f.basis_matrix = eig.vectors;
    f.sigma_bar3 = eig.vectors * Mat2::pauli_z() * eig.vectors.adjoint();
    return f;
}

/// A Lorentz frame: boost rapidity phi with spin scaling lambda = e^{phi/2},
/// so that lambda^2 = e^{phi}, and coordinates X = boost(phi) applied to
/// (j, p). U and V are the boosted images of the grid 2-bein vectors (1,0)
/// and (0,1); indices are lowered with eta = diag(1,-1).
struct FrameSpec {
    double rapidity = 0;
    double lambda = 1;

    static FrameSpec boost(double phi) { return {phi, std::exp(0.5 * phi)}; }
    static FrameSpec identity() { return {}; }

    void validate() const {
        if (lambda <= 0) throw std::invalid_argument("FrameSpec: lambda must be positive");
        if (std::abs(lambda * lambda - std::exp(rapidity)) > 1e-12 * std::exp(std::abs(rapidity)))
            throw std::invalid_argument("FrameSpec: lambda^2 must equal exp(rapidity)");
    }

    CoordinateField coordinates(std::size_t n_sites) const {
        return CoordinateField::boost(n_sites, rapidity);
    }

    std::array<double, 2> u_upper() const { return {std::cosh(rapidity), std::sinh(rapidity)}; }
    std::array<double, 2> v_upper() const { return {std::sinh(rapidity), std::cosh(rapidity)}; }
    std::array<double, 2> u_lower() const { return {std::cosh(rapidity), -std::sinh(rapidity)}; }
    std::array<double, 2> v_lower() const { return {std::sinh(rapidity), -std::cosh(rapidity)}; }
};

/// Totals of all covariant-action contributions in a given frame.
struct CovariantTerms {
    cd kbar{}, dkj{}, dkp{}, ksupp{};
    cd m1{}, m2{}, m3{};
    double delta = 1;  // Delta(grad X), Lorentz invariant (1 for boosts)
    cd sigma_L() const { return kbar + dkj + dkp + ksupp + m1 + m2 + m3; }
};

namespace detail {
/// Field components in the eigenbasis, rescaled per the frame:
/// f' = diag(1/lambda, lambda) . basis^dag . f.
inline SpinorField to_frame_components(const SpinorField& f, const SpinFrame& frame) {
    SpinorField e = apply_matrix(frame.basis_matrix.adjoint(), f);
    for (std::size_t p = 0; p < e.n_sites; ++p) {
        e.minus[p] /= frame.lambda;
        e.plus[p] *= frame.lambda;
    }
    return e;
}

/// eta'-paired bilinear sum over sites of a SOLT-transported operator:
/// sum_p (Psi'_p)^dag (O' f')_p. Algebraically equal to the grid-frame value
/// sum_p Psi_p^dag (O f)_p; computed through the primed route on purpose.
inline cd frame_bilinear(const SpinorField& psi, const ShiftOp& op_grid, const SpinorField& f,
                         const SpinFrame& frame) {
    const ShiftOp op_primed =
        solt_transform(op_grid.conjugated(frame.basis_matrix), frame.lambda);
    return inner(to_frame_components(psi, frame), op_primed(to_frame_components(f, frame)));
}
}  // namespace detail

/// Grid-basis spin operators entering the covariant action.
struct CovariantOperators {
    ShiftOp m1, m23;           // (1 - WC)(1 +- T)/2
    ShiftOp ksupp;             // 1 - T
    ShiftOp dkj;               // W s3 [(s3 - sb3) + sb3 (T-1) + (s3 - sb3)(T-1)]
    ShiftOp dk_u;              // s3 - sb3
    ShiftOp dk_v;              // T - 1
};

inline CovariantOperators covariant_operators(const Mat2& w, const SpinFrame& frame) {
    const ShiftOp one = ShiftOp::identity();
    const ShiftOp t = ShiftOp::translation();
    const ShiftOp wc = ShiftOp::matrix(w) * ShiftOp::neighbor_avg();
    const ShiftOp s3 = ShiftOp::matrix(Mat2::pauli_z());
    const ShiftOp sb3 = ShiftOp::matrix(frame.sigma_bar3);
    const ShiftOp ws3 = ShiftOp::matrix(w * Mat2::pauli_z());
    const ShiftOp ds = s3 - sb3;
    const ShiftOp tm1 = t - one;
    CovariantOperators ops;
    ops.m1 = cd(0.5) * ((one - wc) * (one + t));
    ops.m23 = cd(0.5) * ((one - wc) * (one - t));
    ops.ksupp = one - t;
    ops.dkj = ws3 * (ds + sb3 * tm1 + ds * tm1);
    ops.dk_u = ds;
    ops.dk_v = tm1;
    return ops;
}

/// The manifestly covariant action evaluated in the given frame: fields in
/// primed components, extra operators transported by SOLT, the main kinetic
/// term built from the frame's 2-bein with the Dirac matrices
/// Gamma_0 = gamma^0 gamma^0 = 1 and Gamma_1 = gamma^0 gamma^1 = diag(-1, 1)
/// in the eigenbasis, and scalar coefficients from the boosted U, V fields.
inline CovariantTerms covariant_action(const Trajectory& phi_traj, const Trajectory& psi_traj,
                                       const CoinField& coin, const FrameSpec& frame) {
    detail::require_homogeneous(coin, "covariant_action");
    frame.validate();
    const std::size_t steps = phi_traj.steps();
    if (psi_traj.slices.size() < steps)
        throw std::invalid_argument("covariant_action: Psi trajectory too short");

    const Mat2& w = coin.global;
    const SpinFrame spin = spin_frame_of(w, frame.lambda);
    const CovariantOperators ops = covariant_operators(w, spin);

    // Frame scalars; constant across the lattice for an affine boost map.
    const CoordinateField x = frame.coordinates(phi_traj.n_sites());
    const GradEntry ge = coordinate_gradients(x, 0, 0).at(0, 0);
    const TetradEntry ce = c_coefficients(x, 0, 0).at(0, 0);
    const auto ul = frame.u_lower();
    const auto vl = frame.v_lower();
    const double u_dot_gj = ul[0] * ge.gj[0] + ul[1] * ge.gj[1];
    const double v_dot_gj = vl[0] * ge.gj[0] + vl[1] * ge.gj[1];
    const double u_dot_gp = ul[0] * ge.gp[0] + ul[1] * ge.gp[1];
    const double v_dot_gp = vl[0] * ge.gp[0] + vl[1] * ge.gp[1];

    // Eigenbasis matrix of D_p = W sigma_3 sigma_bar3 grad_p; kept unscaled,
    // the lambda factors of the kinetic term live in the 2-bein instead.
    const cd dp_L = std::polar(1.0, spin.alpha_L);
    const cd dp_R = -std::polar(1.0, spin.alpha_R);
    // gamma^0 gamma^a component signs: Gamma_0 = diag(1, 1), Gamma_1 = diag(-1, 1).
    const double cj_L = ce.cj[0] - ce.cj[1], cj_R = ce.cj[0] + ce.cj[1];
    const double cp_L = ce.cp[0] - ce.cp[1], cp_R = ce.cp[0] + ce.cp[1];

    CovariantTerms out;
    out.delta = ge.delta;
    for (std::size_t j = 0; j < steps; ++j) {
        const SpinorField& phi = phi_traj[j];
        const SpinorField& psi = psi_traj[j];
        const SpinorField gj = phi_traj[j + 1] - phi;

        const SpinorField phi_f = detail::to_frame_components(phi, spin);
        const SpinorField psi_f = detail::to_frame_components(psi, spin);
        const SpinorField gj_f = detail::to_frame_components(gj, spin);
        const SpinorField gp_f = grad_p(phi_f);

        for (std::size_t p = 0; p < phi.n_sites; ++p) {
            const cd kL = std::conj(psi_f.minus[p]) *
                          (cj_L * gj_f.minus[p] + cp_L * dp_L * gp_f.minus[p]);
            const cd kR = std::conj(psi_f.plus[p]) *
                          (cj_R * gj_f.plus[p] + cp_R * dp_R * gp_f.plus[p]);
            out.kbar += (kL + kR) * ge.delta;
        }

        out.m1 += ge.delta * detail::frame_bilinear(psi, ops.m1, phi, spin);
        out.m2 += (u_dot_gj + v_dot_gp) * detail::frame_bilinear(psi, ops.m23, phi, spin);
        out.m3 += detail::frame_bilinear(psi, ops.m23, phi, spin);
        out.ksupp += detail::frame_bilinear(psi, ops.ksupp, gj, spin);
        out.dkj += v_dot_gj * detail::frame_bilinear(psi, ops.dkj, grad_p(phi), spin);
        out.dkp += u_dot_gp * detail::frame_bilinear(psi, ops.dk_u, gj, spin) -
                   v_dot_gp * detail::frame_bilinear(psi, ops.dk_v, gj, spin);
    }
    return out;
}

/// Stress-energy components per time slice; the lower index is 'time'/'space'
/// in the active frame (grid labels j/p in the grid frame), the upper index
/// is always a grid index.
struct StressEnergyField {
    std::vector<ScalarField> t_time_j, t_time_p;    // T_0^j, T_0^p (grid: T_j^j, T_j^p)
    std::vector<ScalarField> t_space_j, t_space_p;  // T_1^j, T_1^p (grid: T_p^j, T_p^p)
};

/// Grid-frame components T_j^j = H, T_j^p = J_H, T_p^j = P, T_p^p = J_P.
inline StressEnergyField stress_energy_grid(const Trajectory& phi_traj, const CoinField& coin) {
    detail::require_homogeneous(coin, "stress_energy_grid");
    StressEnergyField t;
    for (const SpinorField& s : phi_traj.slices) {
        t.t_time_j.push_back(energy_density(s, coin));
        t.t_time_p.push_back(energy_current(s, coin));
        t.t_space_j.push_back(momentum_density(s));
        t.t_space_p.push_back(momentum_current(s));
    }
    return t;
}

/// Lower-index Lorentz transform with the frame's C-coefficients:
/// T_0^q = C_0^j T_j^q + C_0^p T_p^q and T_1^q = C_1^j T_j^q + C_1^p T_p^q.
inline StressEnergyField stress_energy_transform(const StressEnergyField& t,
                                                 const FrameSpec& frame) {
    frame.validate();
    if (t.t_time_j.empty()) throw std::invalid_argument("stress_energy_transform: empty tensor");
    const std::size_t n = t.t_time_j.front().size();
    const TetradEntry c = c_coefficients(frame.coordinates(n), 0, 0).at(0, 0);
    StressEnergyField out;
    for (std::size_t j = 0; j < t.t_time_j.size(); ++j) {
        ScalarField a, b, cfld, d;
        a.values.resize(n);
        b.values.resize(n);
        cfld.values.resize(n);
        d.values.resize(n);
        for (std::size_t p = 0; p < n; ++p) {
            a[p] = c.cj[0] * t.t_time_j[j][p] + c.cp[0] * t.t_space_j[j][p];
            b[p] = c.cj[0] * t.t_time_p[j][p] + c.cp[0] * t.t_space_p[j][p];
            cfld[p] = c.cj[1] * t.t_time_j[j][p] + c.cp[1] * t.t_space_j[j][p];
            d[p] = c.cj[1] * t.t_time_p[j][p] + c.cp[1] * t.t_space_p[j][p];
        }
        out.t_time_j.push_back(std::move(a));
        out.t_time_p.push_back(std::move(b));
        out.t_space_j.push_back(std::move(cfld));
        out.t_space_p.push_back(std::move(d));
    }
    return out;
}

/// Conservation residuals of a stress-energy field with the energy stencils.
struct StressEnergyResiduals {
    double time_row = 0;   // grad_j T_0^j + grad_p T_0^p
    double space_row = 0;  // grad_j T_1^j + grad_p T_1^p
};

inline StressEnergyResiduals stress_energy_residuals(const StressEnergyField& t) {
    return {local_balance_residual(t.t_time_j, t.t_time_p),
            local_balance_residual(t.t_space_j, t.t_space_p)};
}

/// Smooth two-component samples on a fine periodic (t, x) grid with equal
/// steps h in both directions; index (it, ix) -> it * n_x + ix.
struct DiracField {
    std::size_t n_t = 0, n_x = 0;
    double h = 1;
    std::vector<cd> minus, plus;

    std::size_t idx(std::ptrdiff_t it, std::ptrdiff_t ix) const {
        const auto nt = static_cast<std::ptrdiff_t>(n_t);
        const auto nx = static_cast<std::ptrdiff_t>(n_x);
        return static_cast<std::size_t>((((it % nt) + nt) % nt) * nx + (((ix % nx) + nx) % nx));
    }
};

/// Flat 2D Dirac Lagrangian density per interior sample point, evaluated in
/// the frame's triplet (eta', gamma', e'): fields rescaled to primed
/// components, gamma matrices unchanged, 2-bein block
///   (e')^t_0 = (e')^x_1 = (lambda^2 + lambda^-2)/2,
///   (e')^x_0 = (e')^t_1 = (-lambda^2 + lambda^-2)/2.
/// The identity frame (lambda = 1) reduces to
///   L = (Psi^-)*(d_t - d_x)Psi^- + (Psi^+)*(d_t + d_x)Psi^+
///       + i m [(Psi^-)* Psi^+ + (Psi^+)* Psi^-].
/// Derivatives are central differences on the sample grid.
inline std::vector<cd> dirac_lagrangian(const DiracField& f, double m, const FrameSpec& frame) {
    frame.validate();
    const double l2 = frame.lambda * frame.lambda;
    const double et0 = 0.5 * (l2 + 1.0 / l2);
    const double ex0 = 0.5 * (-l2 + 1.0 / l2);
    const double et1 = ex0, ex1 = et0;
    // gamma^0 gamma^0 = 1, gamma^0 gamma^1 = diag(-1, 1): per-component
    // derivative coefficients.
    const double ct_m = et0 - et1, cx_m = ex0 - ex1;
    const double ct_p = et0 + et1, cx_p = ex0 + ex1;

    std::vector<cd> out(f.n_t * f.n_x);
    const cd im(0, m);
    for (std::ptrdiff_t it = 0; it < static_cast<std::ptrdiff_t>(f.n_t); ++it) {
        for (std::ptrdiff_t ix = 0; ix < static_cast<std::ptrdiff_t>(f.n_x); ++ix) {
            const cd pm = f.minus[f.idx(it, ix)] / frame.lambda;
            const cd pp = f.plus[f.idx(it, ix)] * frame.lambda;
            const cd dtm = (f.minus[f.idx(it + 1, ix)] - f.minus[f.idx(it - 1, ix)]) /
                           (2 * f.h * frame.lambda);
            const cd dxm = (f.minus[f.idx(it, ix + 1)] - f.minus[f.idx(it, ix - 1)]) /
                           (2 * f.h * frame.lambda);
            const cd dtp = (f.plus[f.idx(it + 1, ix)] - f.plus[f.idx(it - 1, ix)]) *
                           (frame.lambda / (2 * f.h));
            const cd dxp = (f.plus[f.idx(it, ix + 1)] - f.plus[f.idx(it, ix - 1)]) *
                           (frame.lambda / (2 * f.h));
            out[f.idx(it, ix)] = std::conj(pm) * (ct_m * dtm + cx_m * dxm + im * pp) +
                                 std::conj(pp) * (ct_p * dtp + cx_p * dxp + im * pm);
        }
    }
    return out;
}

/// 2-bein components e[mu][a] and the Jacobian N[mu'][nu] of a coordinate
/// change x -> x'; returns the components in the unprimed coordinates,
/// (e)^mu_a = (N^-1)^mu_{nu'} (e)^{nu'}_a with the explicit 2x2 inverse.
inline std::array<std::array<double, 2>, 2> two_bein_change(
    const std::array<std::array<double, 2>, 2>& e_prime,
    const std::array<std::array<double, 2>, 2>& jacobian) {
    const double det =
        jacobian[0][0] * jacobian[1][1] - jacobian[0][1] * jacobian[1][0];
    if (std::abs(det) < 1e-14) throw std::domain_error("two_bein_change: singular Jacobian");
    // (N^-1)^t_t' = +dx'/dx / det, (N^-1)^t_x' = -dt'/dx / det,
    // (N^-1)^x_t' = -dx'/dt / det, (N^-1)^x_x' = +dt'/dt / det.
    const double ninv[2][2] = {{jacobian[1][1] / det, -jacobian[0][1] / det},
                               {-jacobian[1][0] / det, jacobian[0][0] / det}};
    std::array<std::array<double, 2>, 2> out{};
    for (int mu = 0; mu < 2; ++mu)
        for (int a = 0; a < 2; ++a)
            out[static_cast<std::size_t>(mu)][static_cast<std::size_t>(a)] =
                ninv[mu][0] * e_prime[0][static_cast<std::size_t>(a)] +
                ninv[mu][1] * e_prime[1][static_cast<std::size_t>(a)];
    return out;
}

}  // namespace qwalk
