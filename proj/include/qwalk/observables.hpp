#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "qwalk/field.hpp"
#include "qwalk/walk.hpp"

namespace qwalk {

/// Q_p = |psi^-_p|^2 + |psi^+_p|^2, the local charge density.
inline ScalarField charge_density(const SpinorField& state) {
    ScalarField q;
    q.values.resize(state.n_sites);
    for (std::size_t p = 0; p < state.n_sites; ++p)
        q[p] = std::norm(state.minus[p]) + std::norm(state.plus[p]);
    return q;
}

/// -Psi^dag sigma_3 Psi, the charge current of the split J_H = J_Q + J_h.
inline ScalarField charge_current(const SpinorField& state) {
    ScalarField j;
    j.values.resize(state.n_sites);
    for (std::size_t p = 0; p < state.n_sites; ++p)
        j[p] = -(std::norm(state.minus[p]) - std::norm(state.plus[p]));
    return j;
}

/// Per-site polar form psi^-+ = rho^-+ exp(i (mu -+ delta)): moduli rho,
/// half-sum phase mu and half-difference phase delta, reduced to (-pi, pi].
/// Zero-modulus components get phase 0.
struct PolarDecomposition {
    std::size_t n_sites = 0;
    std::vector<double> rho_minus, rho_plus;
    std::vector<double> mu, delta;
};

namespace detail {
inline double wrap_pi(double x) {
    const double two_pi = 2.0 * std::numbers::pi;
    x = std::fmod(x, two_pi);
    if (x > std::numbers::pi) x -= two_pi;
    if (x <= -std::numbers::pi) x += two_pi;
    return x;
}
}  // namespace detail

inline PolarDecomposition polar_decompose(const SpinorField& state) {
    PolarDecomposition d;
    d.n_sites = state.n_sites;
    d.rho_minus.resize(d.n_sites);
    d.rho_plus.resize(d.n_sites);
    d.mu.resize(d.n_sites);
    d.delta.resize(d.n_sites);
    for (std::size_t p = 0; p < d.n_sites; ++p) {
        d.rho_minus[p] = std::abs(state.minus[p]);
        d.rho_plus[p] = std::abs(state.plus[p]);
        const double dm = d.rho_minus[p] > 0 ? std::arg(state.minus[p]) : 0.0;
        const double dp = d.rho_plus[p] > 0 ? std::arg(state.plus[p]) : 0.0;
        d.mu[p] = detail::wrap_pi(0.5 * (dp + dm));
        d.delta[p] = detail::wrap_pi(0.5 * (dp - dm));
    }
    return d;
}

inline SpinorField polar_reconstruct(const PolarDecomposition& d) {
    SpinorField s(d.n_sites);
    for (std::size_t p = 0; p < d.n_sites; ++p) {
        s.minus[p] = d.rho_minus[p] * std::polar(1.0, d.mu[p] - d.delta[p]);
        s.plus[p] = d.rho_plus[p] * std::polar(1.0, d.mu[p] + d.delta[p]);
    }
    return s;
}

/// The cyclic-phase density and current in their pointwise form:
/// J_j = (rho^-)^2 + (rho^+)^2 and J_p = -(rho^-)^2 + (rho^+)^2.
struct Appendix2Currents {
    ScalarField time_component;   // J_j
    ScalarField space_component;  // J_p
};

inline Appendix2Currents appendix2_currents(const PolarDecomposition& d) {
    Appendix2Currents c;
    c.time_component.values.resize(d.n_sites);
    c.space_component.values.resize(d.n_sites);
    for (std::size_t p = 0; p < d.n_sites; ++p) {
        const double m2 = d.rho_minus[p] * d.rho_minus[p];
        const double p2 = d.rho_plus[p] * d.rho_plus[p];
        c.time_component[p] = m2 + p2;
        c.space_component[p] = -m2 + p2;
    }
    return c;
}

/// Local charge conservation residual for an on-shell trajectory with an
/// arbitrary (possibly site- and time-dependent) unitary coin.
///
/// The conserved pair derived from the cyclic phase is J_j = Q together with
/// the spatial flux evaluated on the pre-coin state T Psi_{j-1}:
///   (J_p)_{j,p} = -1/2 (T Psi_{j-1})_p^dag sigma_3 (T Psi_{j-1})_p.
/// For coins commuting with sigma_3 this flux reduces to half the pointwise
/// current -(rho^-)^2 + (rho^+)^2 of `appendix2_currents`; for general coins
/// the shifted form is the one that satisfies the stencil identity exactly.
/// Returns max over j = 1..J, all p of
///   (Q_{j,p+1} + Q_{j,p-1})/2 - Q_{j-1,p} + (J_p)_{j,p+1} - (J_p)_{j,p-1}.
inline double charge_conservation_residual(const Trajectory& traj) {
    if (traj.slices.size() < 2)
        throw std::invalid_argument("charge_conservation_residual: need >= 2 slices");
    const std::size_t n = traj.n_sites();
    double worst = 0;
    ScalarField q_prev = charge_density(traj[0]);
    for (std::size_t j = 1; j < traj.slices.size(); ++j) {
        const ScalarField q = charge_density(traj[j]);
        const SpinorField pre = apply_translation(traj[j - 1]);
        ScalarField jp;
        jp.values.resize(n);
        for (std::size_t p = 0; p < n; ++p)
            jp[p] = -0.5 * (std::norm(pre.minus[p]) - std::norm(pre.plus[p]));
        for (std::size_t p = 0; p < n; ++p) {
            const auto s = static_cast<std::ptrdiff_t>(p);
            const cd r = 0.5 * (q.at_wrapped(s + 1) + q.at_wrapped(s - 1)) - q_prev[p] +
                         jp.at_wrapped(s + 1) - jp.at_wrapped(s - 1);
            worst = std::max(worst, std::abs(r));
        }
        q_prev = q;
    }
    return worst;
}

namespace detail {
inline void require_homogeneous(const CoinField& coin, const char* who) {
    if (!coin.homogeneous)
        throw std::invalid_argument(std::string(who) +
                                    ": conservation requires a homogeneous coin");
}

inline ScalarField bilinear(const SpinorField& bra, const SpinorField& ket, bool sigma3,
                            cd scale = cd(1)) {
    ScalarField f;
    f.values.resize(bra.n_sites);
    const double sgn = sigma3 ? -1.0 : 1.0;
    for (std::size_t p = 0; p < bra.n_sites; ++p)
        f[p] = scale * (std::conj(bra.minus[p]) * ket.minus[p] +
                        sgn * std::conj(bra.plus[p]) * ket.plus[p]);
    return f;
}
}  // namespace detail

/// H_p = Psi^dag_p ((1 - U^dag) Psi)_p, complex-valued in general.
inline ScalarField energy_density(const SpinorField& state, const CoinField& coin) {
    detail::require_homogeneous(coin, "energy_density");
    const SpinorField u = state - step_adjoint(state, coin);
    return detail::bilinear(state, u, /*sigma3=*/false);
}

/// h_p = -Psi^dag_p (U^dag Psi)_p, so that H = Q + h pointwise.
inline ScalarField pseudo_energy_density(const SpinorField& state, const CoinField& coin) {
    detail::require_homogeneous(coin, "pseudo_energy_density");
    const SpinorField u = step_adjoint(state, coin);
    return detail::bilinear(state, u, /*sigma3=*/false, cd(-1));
}

/// (J_H)_p = -Psi^dag_p sigma_3 ((1 - U^dag) Psi)_p.
inline ScalarField energy_current(const SpinorField& state, const CoinField& coin) {
    detail::require_homogeneous(coin, "energy_current");
    const SpinorField u = state - step_adjoint(state, coin);
    return detail::bilinear(state, u, /*sigma3=*/true, cd(-1));
}

/// (J_h)_p = +Psi^dag_p sigma_3 (U^dag Psi)_p, so that J_H = J_Q + J_h.
inline ScalarField pseudo_energy_current(const SpinorField& state, const CoinField& coin) {
    detail::require_homogeneous(coin, "pseudo_energy_current");
    const SpinorField u = step_adjoint(state, coin);
    return detail::bilinear(state, u, /*sigma3=*/true);
}

/// P_p = 1/2 Psi^dag_p sigma_3 ((T - T^dag) Psi)_p. Complex in this
/// convention: a normalized plane wave of wavenumber k totals i sin k.
inline ScalarField momentum_density(const SpinorField& state) {
    const SpinorField d = apply_translation(state) - apply_translation(state, true);
    return detail::bilinear(state, d, /*sigma3=*/true, cd(0.5));
}

/// (J_P)_p = -1/2 Psi^dag_p ((T - T^dag) Psi)_p.
inline ScalarField momentum_current(const SpinorField& state) {
    const SpinorField d = apply_translation(state) - apply_translation(state, true);
    return detail::bilinear(state, d, /*sigma3=*/false, cd(-0.5));
}

/// Max over (j,p) and over real/imaginary parts of
/// D_{j+1,p} - (D_{j,p+1} + D_{j,p-1})/2 + (F_{j,p+1} - F_{j,p-1})/2
/// for a density/current pair evaluated on every slice.
inline double local_balance_residual(const std::vector<ScalarField>& density,
                                     const std::vector<ScalarField>& flux) {
    double worst = 0;
    for (std::size_t j = 0; j + 1 < density.size(); ++j) {
        const std::size_t n = density[j].size();
        for (std::size_t p = 0; p < n; ++p) {
            const auto s = static_cast<std::ptrdiff_t>(p);
            const cd r = density[j + 1][p] -
                         0.5 * (density[j].at_wrapped(s + 1) + density[j].at_wrapped(s - 1)) +
                         0.5 * (flux[j].at_wrapped(s + 1) - flux[j].at_wrapped(s - 1));
            worst = std::max({worst, std::abs(r.real()), std::abs(r.imag())});
        }
    }
    return worst;
}

/// Local energy conservation residual for a homogeneous coin (averaged time
/// stencil + halved space stencil); < 1e-12 on shell.
inline double energy_conservation_residual(const Trajectory& traj, const CoinField& coin) {
    detail::require_homogeneous(coin, "energy_conservation_residual");
    std::vector<ScalarField> h, jh;
    h.reserve(traj.slices.size());
    jh.reserve(traj.slices.size());
    for (const SpinorField& s : traj.slices) {
        h.push_back(energy_density(s, coin));
        jh.push_back(energy_current(s, coin));
    }
    return local_balance_residual(h, jh);
}

/// Momentum analogue of the energy residual, built from the same stencils.
/// The total momentum is conserved; this local form is reported as measured.
inline double momentum_balance_residual(const Trajectory& traj) {
    std::vector<ScalarField> pd, jp;
    pd.reserve(traj.slices.size());
    jp.reserve(traj.slices.size());
    for (const SpinorField& s : traj.slices) {
        pd.push_back(momentum_density(s));
        jp.push_back(momentum_current(s));
    }
    return local_balance_residual(pd, jp);
}

struct SliceTotals {
    cd energy;
    cd momentum;
    cd charge;
};

/// Per-slice totals (H_j, P_j, Q_j); all three constant for homogeneous coins.
inline std::vector<SliceTotals> totals(const Trajectory& traj, const CoinField& coin) {
    std::vector<SliceTotals> out;
    out.reserve(traj.slices.size());
    for (const SpinorField& s : traj.slices) {
        SliceTotals t;
        t.energy = coin.homogeneous ? energy_density(s, coin).total() : cd(0);
        t.momentum = momentum_density(s).total();
        t.charge = charge_density(s).total();
        out.push_back(t);
    }
    return out;
}

}  // namespace qwalk
