#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "qwalk/observables.hpp"
#include "qwalk/walk.hpp"

namespace qwalk {

/// Apply a single 2x2 matrix to every site of a spinor field.
inline SpinorField apply_matrix(const Mat2& m, const SpinorField& f) {
    SpinorField out(f.n_sites);
    for (std::size_t p = 0; p < f.n_sites; ++p) {
        const auto v = apply(m, {f.minus[p], f.plus[p]});
        out.minus[p] = v[0];
        out.plus[p] = v[1];
    }
    return out;
}

/// Componentwise neighbour average C: (C f)_p = (f_{p+1} + f_{p-1}) / 2.
inline SpinorField avg_neighbors(const SpinorField& f) {
    SpinorField out(f.n_sites);
    for (std::size_t p = 0; p < f.n_sites; ++p) {
        const auto q = static_cast<std::ptrdiff_t>(p);
        out.minus[p] = 0.5 * (f.minus[f.wrap(q + 1)] + f.minus[f.wrap(q - 1)]);
        out.plus[p] = 0.5 * (f.plus[f.wrap(q + 1)] + f.plus[f.wrap(q - 1)]);
    }
    return out;
}

/// Componentwise central difference: (grad_p f)_p = (f_{p+1} - f_{p-1}) / 2.
inline SpinorField grad_p(const SpinorField& f) {
    SpinorField out(f.n_sites);
    for (std::size_t p = 0; p < f.n_sites; ++p) {
        const auto q = static_cast<std::ptrdiff_t>(p);
        out.minus[p] = 0.5 * (f.minus[f.wrap(q + 1)] - f.minus[f.wrap(q - 1)]);
        out.plus[p] = 0.5 * (f.plus[f.wrap(q + 1)] - f.plus[f.wrap(q - 1)]);
    }
    return out;
}

/// Per-site sesquilinear pairing Psi_p^dag f_p.
inline ScalarField site_bilinear(const SpinorField& bra, const SpinorField& f) {
    ScalarField out;
    out.values.resize(bra.n_sites);
    for (std::size_t p = 0; p < bra.n_sites; ++p)
        out[p] = std::conj(bra.minus[p]) * f.minus[p] + std::conj(bra.plus[p]) * f.plus[p];
    return out;
}

/// Space-time coordinates X^0, X^1 assigned to grid points, stored as an
/// affine map of (j, p) plus an optional site-periodic perturbation. The
/// affine part is differentiated analytically, so linear maps (grid labels,
/// boosts) stay exact on the periodic lattice despite X^1 ~ p not being a
/// periodic function of p.
struct CoordinateField {
    std::size_t n_sites = 0;
    // X^mu = a[mu][0] * j + a[mu][1] * p + b[mu] + pert[j - pert_j_first][p][mu]
    std::array<std::array<double, 2>, 2> a{{{1.0, 0.0}, {0.0, 1.0}}};
    std::array<double, 2> b{0.0, 0.0};
    std::ptrdiff_t pert_j_first = 0;
    std::vector<std::vector<std::array<double, 2>>> pert;  // empty: purely affine

    static CoordinateField grid(std::size_t n_sites) {
        CoordinateField x;
        x.n_sites = n_sites;
        return x;
    }

    /// Boost by rapidity phi: X^0 = cosh(phi) j + sinh(phi) p,
    /// X^1 = sinh(phi) j + cosh(phi) p.
    static CoordinateField boost(std::size_t n_sites, double phi) {
        CoordinateField x;
        x.n_sites = n_sites;
        const double ch = std::cosh(phi), sh = std::sinh(phi);
        x.a = {{{ch, sh}, {sh, ch}}};
        return x;
    }

    static CoordinateField affine(std::size_t n_sites, double a00, double a01, double a10,
                                  double a11, double b0 = 0, double b1 = 0) {
        CoordinateField x;
        x.n_sites = n_sites;
        x.a = {{{a00, a01}, {a10, a11}}};
        x.b = {b0, b1};
        return x;
    }

    bool has_perturbation() const { return !pert.empty(); }

    double pert_value(int mu, std::ptrdiff_t j, std::ptrdiff_t p) const {
        if (pert.empty()) return 0.0;
        const std::ptrdiff_t row = j - pert_j_first;
        if (row < 0 || row >= static_cast<std::ptrdiff_t>(pert.size()))
            throw std::out_of_range("CoordinateField: slice outside stored perturbation range");
        const auto n = static_cast<std::ptrdiff_t>(n_sites);
        return pert[static_cast<std::size_t>(row)][static_cast<std::size_t>(((p % n) + n) % n)]
                   [static_cast<std::size_t>(mu)];
    }

    /// Full coordinate value; the affine part uses the unwrapped p.
    double value(int mu, std::ptrdiff_t j, std::ptrdiff_t p) const {
        return a[static_cast<std::size_t>(mu)][0] * static_cast<double>(j) +
               a[static_cast<std::size_t>(mu)][1] * static_cast<double>(p) +
               b[static_cast<std::size_t>(mu)] + pert_value(mu, j, p);
    }
};

/// Gradients at one site: gj[mu] = (grad_j X^mu), gp[mu] = (grad_p X^mu),
/// delta = their 2x2 determinant.
struct GradEntry {
    std::array<double, 2> gj{};
    std::array<double, 2> gp{};
    double delta = 0;
};

struct CoordGradients {
    std::size_t n_sites = 0;
    std::ptrdiff_t j_first = 0;  // grid time of rows[0]
    std::vector<std::vector<GradEntry>> rows;

    const GradEntry& at(std::ptrdiff_t j, std::size_t p) const {
        return rows[static_cast<std::size_t>(j - j_first)][p];
    }
};

/// Discrete coordinate gradients on slices j = j_begin .. j_end (inclusive):
/// grad_j X = (X_{j,p-1} + X_{j,p+1})/2 - X_{j-1,p} and
/// grad_p X = (X_{j,p+1} - X_{j,p-1})/2; exact for affine X.
inline CoordGradients coordinate_gradients(const CoordinateField& x, std::ptrdiff_t j_begin,
                                           std::ptrdiff_t j_end, double degeneracy_tol = 1e-12) {
    if (j_end < j_begin)
        throw std::invalid_argument("coordinate_gradients: empty slice range");
    CoordGradients g;
    g.n_sites = x.n_sites;
    g.j_first = j_begin;
    g.rows.resize(static_cast<std::size_t>(j_end - j_begin + 1));
    for (std::ptrdiff_t j = j_begin; j <= j_end; ++j) {
        auto& row = g.rows[static_cast<std::size_t>(j - j_begin)];
        row.resize(x.n_sites);
        for (std::size_t p = 0; p < x.n_sites; ++p) {
            const auto q = static_cast<std::ptrdiff_t>(p);
            GradEntry e;
            for (int mu = 0; mu < 2; ++mu) {
                double dj = x.a[static_cast<std::size_t>(mu)][0];
                double dp = x.a[static_cast<std::size_t>(mu)][1];
                if (x.has_perturbation()) {
                    const double fp = x.pert_value(mu, j, q + 1);
                    const double fm = x.pert_value(mu, j, q - 1);
                    dj += 0.5 * (fp + fm) - x.pert_value(mu, j - 1, q);
                    dp += 0.5 * (fp - fm);
                }
                e.gj[static_cast<std::size_t>(mu)] = dj;
                e.gp[static_cast<std::size_t>(mu)] = dp;
            }
            e.delta = e.gj[0] * e.gp[1] - e.gp[0] * e.gj[1];
            if (std::abs(e.delta) < degeneracy_tol)
                throw std::domain_error("coordinate_gradients: degenerate coordinate map");
            row[p] = e;
        }
    }
    return g;
}

/// Inverse of the gradient matrix: the 2-bein coefficients C^q_a.
struct TetradEntry {
    std::array<double, 2> cj{};  // C^j_0, C^j_1
    std::array<double, 2> cp{};  // C^p_0, C^p_1
};

struct TetradCoefficients {
    std::size_t n_sites = 0;
    std::ptrdiff_t j_first = 0;
    std::vector<std::vector<TetradEntry>> rows;

    const TetradEntry& at(std::ptrdiff_t j, std::size_t p) const {
        return rows[static_cast<std::size_t>(j - j_first)][p];
    }
};

inline TetradCoefficients c_coefficients(const CoordGradients& g) {
    TetradCoefficients c;
    c.n_sites = g.n_sites;
    c.j_first = g.j_first;
    c.rows.resize(g.rows.size());
    for (std::size_t r = 0; r < g.rows.size(); ++r) {
        c.rows[r].resize(g.n_sites);
        for (std::size_t p = 0; p < g.n_sites; ++p) {
            const GradEntry& e = g.rows[r][p];
            TetradEntry t;
            t.cj[0] = +e.gp[1] / e.delta;
            t.cp[0] = -e.gj[1] / e.delta;
            t.cj[1] = -e.gp[0] / e.delta;
            t.cp[1] = +e.gj[0] / e.delta;
            c.rows[r][p] = t;
        }
    }
    return c;
}

inline TetradCoefficients c_coefficients(const CoordinateField& x, std::ptrdiff_t j_begin,
                                         std::ptrdiff_t j_end) {
    return c_coefficients(coordinate_gradients(x, j_begin, j_end));
}

/// Totals of the extended-action pieces summed over all slices and sites.
struct SigmaTerms {
    cd m1{}, m2{}, m3{};
    cd kj{}, kp{}, ksupp{};
    cd sigma() const { return m1 + m2 + m3 + kj + kp + ksupp; }
};

namespace detail {
/// The two mass-operator images of Phi on one slice:
/// m1f = (1 - WC)(1 + T)/2 Phi and m3f = (1 - WC)(1 - T)/2 Phi.
struct MassFields {
    SpinorField m1f, m3f;
};

inline MassFields mass_fields(const SpinorField& phi, const Mat2& w) {
    const SpinorField t = apply_translation(phi);
    SpinorField hp = phi + t;
    hp *= 0.5;
    SpinorField hm = phi - t;
    hm *= 0.5;
    return {hp - apply_matrix(w, avg_neighbors(hp)), hm - apply_matrix(w, avg_neighbors(hm))};
}
}  // namespace detail

/// All per-slice contributions to the extended action
///   Sigma = sum_j (M^1 + M^2 + M^3 + K^j + K^p + K^supp)_j
/// evaluated with the supplied coordinate gradients. Psi is treated as an
/// independent field; on-shell callers pass Psi_j = U Phi_j. Phi needs J+1
/// slices, Psi at least J; gradients must cover slices 0..J-1.
inline SigmaTerms sigma_terms(const Trajectory& phi_traj, const Trajectory& psi_traj,
                              const CoinField& coin, const CoordGradients& grads) {
    detail::require_homogeneous(coin, "sigma_terms");
    const std::size_t steps = phi_traj.steps();
    if (psi_traj.slices.size() < steps)
        throw std::invalid_argument("sigma_terms: Psi trajectory too short");
    if (grads.j_first > 0 ||
        grads.j_first + static_cast<std::ptrdiff_t>(grads.rows.size()) <
            static_cast<std::ptrdiff_t>(steps))
        throw std::invalid_argument("sigma_terms: gradients do not cover slices 0..J-1");
    if (phi_traj.n_sites() != grads.n_sites || psi_traj.n_sites() != grads.n_sites)
        throw std::invalid_argument("sigma_terms: dimension mismatch");

    const Mat2& w = coin.global;
    const Mat2 sigma3 = Mat2::pauli_z();
    SigmaTerms out;
    for (std::size_t j = 0; j < steps; ++j) {
        const SpinorField& phi = phi_traj[j];
        const SpinorField& psi = psi_traj[j];
        const SpinorField gj = phi_traj[j + 1] - phi;
        const SpinorField gp = grad_p(phi);
        const auto mf = detail::mass_fields(phi, w);

        const ScalarField bil_m1 = site_bilinear(psi, mf.m1f);
        const ScalarField bil_m3 = site_bilinear(psi, mf.m3f);
        const ScalarField bil_ws_gp = site_bilinear(psi, apply_matrix(w * sigma3, gp));
        const ScalarField bil_wt_gp = site_bilinear(psi, apply_matrix(w, apply_translation(gp)));
        const ScalarField bil_s_gj = site_bilinear(psi, apply_matrix(sigma3, gj));
        const ScalarField bil_t_gj = site_bilinear(psi, apply_translation(gj));
        const ScalarField bil_gj = site_bilinear(psi, gj);

        for (std::size_t p = 0; p < grads.n_sites; ++p) {
            const GradEntry& e = grads.at(static_cast<std::ptrdiff_t>(j), p);
            out.m1 += e.delta * bil_m1[p];
            out.m2 += (e.gj[0] - e.gp[1]) * bil_m3[p];
            out.m3 += bil_m3[p];
            out.kj += -e.gj[0] * bil_ws_gp[p] - e.gj[1] * bil_wt_gp[p];
            out.kp += e.gp[0] * bil_s_gj[p] + e.gp[1] * bil_t_gj[p];
            out.ksupp += bil_gj[p] - bil_t_gj[p];
        }
    }
    return out;
}

inline SigmaTerms sigma_terms(const Trajectory& phi_traj, const Trajectory& psi_traj,
                              const CoinField& coin, const CoordinateField& x) {
    return sigma_terms(phi_traj, psi_traj, coin,
                       coordinate_gradients(x, 0, static_cast<std::ptrdiff_t>(phi_traj.steps()) - 1));
}

/// Psi trajectory with Psi_j = U Phi_j for j = 0..J-1 (the on-shell choice).
inline Trajectory onshell_psi(const Trajectory& phi_traj, const CoinField& coin) {
    Trajectory psi;
    psi.slices.reserve(phi_traj.steps());
    for (std::size_t j = 0; j < phi_traj.steps(); ++j) psi.slices.push_back(step(phi_traj[j], coin));
    return psi;
}

/// Per-site functional derivatives of Sigma with respect to the four
/// coordinate-gradient values, for slices j = 0..J-1.
struct SigmaDerivatives {
    std::vector<ScalarField> d_gj0;  // dSigma / d(grad_j X^0)
    std::vector<ScalarField> d_gp0;  // dSigma / d(grad_p X^0)
    std::vector<ScalarField> d_gj1;  // dSigma / d(grad_j X^1)
    std::vector<ScalarField> d_gp1;  // dSigma / d(grad_p X^1)
};

/// Closed-form derivatives of the Sigma implemented above. Sigma is per-site
/// multilinear in the gradient slots, so these are exact:
///   d/d(gj0) = -Psi^dag W sigma_3 grad_p(Phi) + Psi^dag m3f + gp1 Psi^dag m1f
///   d/d(gp0) = +Psi^dag sigma_3 grad_j(Phi)              - gj1 Psi^dag m1f
///   d/d(gj1) = -Psi^dag W T grad_p(Phi)                  - gp0 Psi^dag m1f
///   d/d(gp1) = +Psi^dag T grad_j(Phi)     - Psi^dag m3f  + gj0 Psi^dag m1f
/// (the m3f pieces come from M^2, the m1f pieces from the determinant in M^1).
inline SigmaDerivatives functional_derivatives_closed_form(const Trajectory& phi_traj,
                                                           const Trajectory& psi_traj,
                                                           const CoinField& coin,
                                                           const CoordGradients& grads) {
    detail::require_homogeneous(coin, "functional_derivatives_closed_form");
    const std::size_t steps = phi_traj.steps();
    if (psi_traj.slices.size() < steps)
        throw std::invalid_argument("functional_derivatives_closed_form: Psi trajectory too short");
    const Mat2& w = coin.global;
    const Mat2 sigma3 = Mat2::pauli_z();
    SigmaDerivatives out;
    for (std::size_t j = 0; j < steps; ++j) {
        const SpinorField& phi = phi_traj[j];
        const SpinorField& psi = psi_traj[j];
        const SpinorField gj = phi_traj[j + 1] - phi;
        const SpinorField gp = grad_p(phi);
        const auto mf = detail::mass_fields(phi, w);

        const ScalarField bil_m1 = site_bilinear(psi, mf.m1f);
        const ScalarField bil_m3 = site_bilinear(psi, mf.m3f);
        const ScalarField bil_ws_gp = site_bilinear(psi, apply_matrix(w * sigma3, gp));
        const ScalarField bil_wt_gp = site_bilinear(psi, apply_matrix(w, apply_translation(gp)));
        const ScalarField bil_s_gj = site_bilinear(psi, apply_matrix(sigma3, gj));
        const ScalarField bil_t_gj = site_bilinear(psi, apply_translation(gj));

        const std::size_t n = grads.n_sites;
        ScalarField dj0, dp0, dj1, dp1;
        dj0.values.resize(n);
        dp0.values.resize(n);
        dj1.values.resize(n);
        dp1.values.resize(n);
        for (std::size_t p = 0; p < n; ++p) {
            const GradEntry& e = grads.at(static_cast<std::ptrdiff_t>(j), p);
            dj0[p] = -bil_ws_gp[p] + bil_m3[p] + e.gp[1] * bil_m1[p];
            dp0[p] = bil_s_gj[p] - e.gj[1] * bil_m1[p];
            dj1[p] = -bil_wt_gp[p] - e.gp[0] * bil_m1[p];
            dp1[p] = bil_t_gj[p] - bil_m3[p] + e.gj[0] * bil_m1[p];
        }
        out.d_gj0.push_back(std::move(dj0));
        out.d_gp0.push_back(std::move(dp0));
        out.d_gj1.push_back(std::move(dj1));
        out.d_gp1.push_back(std::move(dp1));
    }
    return out;
}

/// Diagnostic only: the "naive" coordinate action obtained by substituting
/// grad_j -> C^j_0 grad_j + C^p_0 grad_p and grad_p -> C^j_1 grad_j + C^p_1
/// grad_p directly into the alternate action. Not asserted against anything.
inline cd naive_coordinate_action(const Trajectory& phi_traj, const Trajectory& psi_traj,
                                  const CoinField& coin, const TetradCoefficients& cs) {
    detail::require_homogeneous(coin, "naive_coordinate_action");
    const Mat2& w = coin.global;
    const Mat2 sigma3 = Mat2::pauli_z();
    cd s = 0;
    for (std::size_t j = 0; j < phi_traj.steps(); ++j) {
        const SpinorField& phi = phi_traj[j];
        const SpinorField& psi = psi_traj[j];
        const SpinorField gj = phi_traj[j + 1] - phi;
        const SpinorField gp = grad_p(phi);
        const SpinorField wc = apply_matrix(w, avg_neighbors(phi));
        const SpinorField ws_gj = apply_matrix(w * sigma3, gj);
        const SpinorField ws_gp = apply_matrix(w * sigma3, gp);
        const ScalarField b_gj = site_bilinear(psi, gj);
        const ScalarField b_gp = site_bilinear(psi, gp);
        const ScalarField b_ws_gj = site_bilinear(psi, ws_gj);
        const ScalarField b_ws_gp = site_bilinear(psi, ws_gp);
        const ScalarField b_rest = site_bilinear(psi, phi - wc);
        for (std::size_t p = 0; p < phi.n_sites; ++p) {
            const TetradEntry& c = cs.at(static_cast<std::ptrdiff_t>(j), p);
            // grad_0 Phi - W sigma_3 grad_1 Phi - (1 - WC) Phi, paired with Psi.
            s += c.cj[0] * b_gj[p] + c.cp[0] * b_gp[p] -
                 (c.cj[1] * b_ws_gj[p] + c.cp[1] * b_ws_gp[p]) - b_rest[p];
        }
    }
    return s;
}

/// On-shell report: closed-form derivatives at grid coordinates vs the
/// observables-module densities (-H, -J_H, -P, -J_P at each slice).
struct OnshellReport {
    bool on_shell = true;
    double max_discrepancy = 0;
    double energy_residual = 0;
    double momentum_residual = 0;
};

inline OnshellReport onshell_energy_momentum_check(const Trajectory& phi_traj,
                                                   const CoinField& coin,
                                                   double onshell_tol = 1e-10) {
    const std::size_t steps = phi_traj.steps();
    OnshellReport rep;
    for (std::size_t j = 0; j < steps; ++j) {
        const SpinorField diff = phi_traj[j + 1] - step(phi_traj[j], coin);
        for (std::size_t p = 0; p < phi_traj.n_sites(); ++p)
            rep.on_shell = rep.on_shell && std::abs(diff.minus[p]) < onshell_tol &&
                           std::abs(diff.plus[p]) < onshell_tol;
    }

    const CoordinateField x = CoordinateField::grid(phi_traj.n_sites());
    const CoordGradients g = coordinate_gradients(x, 0, static_cast<std::ptrdiff_t>(steps) - 1);
    const Trajectory psi = onshell_psi(phi_traj, coin);
    const SigmaDerivatives d = functional_derivatives_closed_form(phi_traj, psi, coin, g);

    // The equality pairs the derivative at slice j with the densities of the
    // evolved field Psi_j = U Phi_j.
    for (std::size_t j = 0; j < steps; ++j) {
        const ScalarField h = energy_density(psi[j], coin);
        const ScalarField jh = energy_current(psi[j], coin);
        const ScalarField pm = momentum_density(psi[j]);
        const ScalarField jp = momentum_current(psi[j]);
        for (std::size_t p = 0; p < phi_traj.n_sites(); ++p) {
            rep.max_discrepancy = std::max({rep.max_discrepancy, std::abs(d.d_gj0[j][p] + h[p]),
                                            std::abs(d.d_gp0[j][p] + jh[p]),
                                            std::abs(d.d_gj1[j][p] + pm[p]),
                                            std::abs(d.d_gp1[j][p] + jp[p])});
        }
    }
    rep.energy_residual = energy_conservation_residual(phi_traj, coin);
    rep.momentum_residual = momentum_balance_residual(phi_traj);
    return rep;
}

}  // namespace qwalk
