#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "qwalk/lorentz.hpp"
#include "qwalk/walk.hpp"

namespace qwalk {

/// Parameters of a continuum-limit run: coin W(eps) = exp(i eps m sigma_1),
/// lattice spacing eps in both directions (x = eps p, t = eps j), physical
/// wavenumber k and final time t_final. t_final/eps must be an integer and
/// k eps must be a lattice Fourier mode, i.e. 2 pi / (k eps) an integer.
struct DiracParams {
    double m = 1;
    double epsilon = 0.1;
    double k = std::numbers::pi / 8;
    double t_final = 4;

    std::size_t steps() const {
        const double s = t_final / epsilon;
        const double r = std::round(s);
        if (r < 1 || std::abs(s - r) > 1e-9)
            throw std::invalid_argument("DiracParams: t_final/epsilon must be a positive integer");
        return static_cast<std::size_t>(r);
    }

    std::size_t n_sites() const {
        const double kappa = k * epsilon;
        if (kappa <= 0) throw std::invalid_argument("DiracParams: k * epsilon must be positive");
        const double n = 2 * std::numbers::pi / kappa;
        const double r = std::round(n);
        if (r < 4 || std::abs(n - r) > 1e-6)
            throw std::invalid_argument("DiracParams: 2 pi / (k epsilon) must be an integer");
        return static_cast<std::size_t>(r);
    }
};

inline Mat2 coin_of_epsilon(const DiracParams& params) {
    if (params.epsilon <= 0) throw std::invalid_argument("coin_of_epsilon: epsilon must be > 0");
    return exp_i_sigma1(params.epsilon * params.m);
}

/// Normalized plane wave exp(i kappa p)/sqrt(N) in the minus component.
inline SpinorField plane_wave_minus(std::size_t n_sites, double kappa) {
    SpinorField s(n_sites);
    const double norm = 1.0 / std::sqrt(static_cast<double>(n_sites));
    for (std::size_t p = 0; p < n_sites; ++p)
        s.minus[p] = std::polar(norm, kappa * static_cast<double>(p));
    return s;
}

/// Analytic evolution of the plane-wave spinor under the free Dirac symbol:
/// amplitude(t) = exp(i t (k sigma_3 + m sigma_1)) (1, 0)^T, carried on the
/// lattice plane wave exp(i k eps p)/sqrt(N).
inline SpinorField dirac_reference(const DiracParams& params) {
    const double om = std::sqrt(params.k * params.k + params.m * params.m);
    // exp(i t (k sigma_3 + m sigma_1)) = cos(om t) + i sin(om t)/om * (k sigma_3 + m sigma_1)
    const double t = params.t_final;
    const double c = std::cos(om * t);
    const double s = (om > 0) ? std::sin(om * t) / om : t;
    const cd a_minus = cd(c, s * params.k);   // acting on initial (1, 0)
    const cd a_plus = cd(0, s * params.m);
    const std::size_t n = params.n_sites();
    SpinorField ref(n);
    const double kappa = params.k * params.epsilon;
    const double norm = 1.0 / std::sqrt(static_cast<double>(n));
    for (std::size_t p = 0; p < n; ++p) {
        const cd wave = std::polar(norm, kappa * static_cast<double>(p));
        ref.minus[p] = a_minus * wave;
        ref.plus[p] = a_plus * wave;
    }
    return ref;
}

/// Eigenphases of the one-step walk symbol W(eps) diag(e^{i kappa}, e^{-i kappa})
/// at lattice wavenumber kappa = k eps; theta = +-eps sqrt(k^2 + m^2) + O(eps^2).
inline std::array<double, 2> walk_eigenphases(const DiracParams& params) {
    const double kappa = params.k * params.epsilon;
    const Mat2 symbol = coin_of_epsilon(params) *
                        Mat2::diag(std::polar(1.0, kappa), std::polar(1.0, -kappa));
    return eigen_unitary(symbol).phases;
}

struct ConvergencePoint {
    double epsilon;
    double error;  // L2 distance between the evolved walk and dirac_reference
};

struct ConvergenceStudy {
    std::vector<ConvergencePoint> points;
    double fitted_order = 0;  // slope of log(error) vs log(epsilon)
};

namespace detail {
inline double loglog_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const auto n = static_cast<double>(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double lx = std::log(xs[i]), ly = std::log(ys[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}
}  // namespace detail

/// Walk-vs-Dirac L2 error for a single epsilon.
inline ConvergencePoint convergence_point(double m, double k, double t_final, double eps) {
    const DiracParams params{m, eps, k, t_final};
    const std::size_t n = params.n_sites();
    const std::size_t steps = params.steps();
    const CoinField coin = CoinField::uniform(n, coin_of_epsilon(params));
    SpinorField state = plane_wave_minus(n, k * eps);
    for (std::size_t j = 0; j < steps; ++j) state = step(state, coin);
    const SpinorField ref = dirac_reference(params);
    return {eps, std::sqrt((state - ref).norm2())};
}

inline ConvergenceStudy convergence_study(double m, double k, double t_final,
                                          const std::vector<double>& eps_list) {
    if (eps_list.size() < 3)
        throw std::invalid_argument("convergence_study: need at least 3 epsilon values");
    ConvergenceStudy study;
    std::vector<double> xs, ys;
    for (double eps : eps_list) {
        const ConvergencePoint pt = convergence_point(m, k, t_final, eps);
        study.points.push_back(pt);
        xs.push_back(pt.epsilon);
        ys.push_back(pt.error);
    }
    study.fitted_order = detail::loglog_slope(xs, ys);
    return study;
}

/// Magnitudes of the action contributions at grid coordinates for one eps,
/// evaluated on a short on-shell run from a plane wave with a generic spin
/// amplitude (both components populated so no term vanishes by accident).
struct TermMagnitudes {
    double epsilon;
    double kbar, m1, m2, m3, ksupp, dkj, dkp;
};

inline TermMagnitudes term_magnitudes(double m, double k, double eps, std::size_t steps = 4) {
    DiracParams params{m, eps, k, /*t_final=*/eps};  // t_final unused here
    const std::size_t n = params.n_sites();
    const CoinField coin = CoinField::uniform(n, coin_of_epsilon(params));
    SpinorField init(n);
    const double kappa = k * eps;
    const double norm = 1.0 / std::sqrt(static_cast<double>(n));
    for (std::size_t p = 0; p < n; ++p) {
        const cd wave = std::polar(norm, kappa * static_cast<double>(p));
        init.minus[p] = 0.8 * wave;
        init.plus[p] = 0.6 * wave;
    }
    const Trajectory phi = evolve(init, coin, steps);
    const Trajectory psi = onshell_psi(phi, coin);
    const CovariantTerms terms = covariant_action(phi, psi, coin, FrameSpec::identity());
    return {eps,
            std::abs(terms.kbar),
            std::abs(terms.m1),
            std::abs(terms.m2),
            std::abs(terms.m3),
            std::abs(terms.ksupp),
            std::abs(terms.dkj),
            std::abs(terms.dkp)};
}

/// Fitted log-log slopes of each action term across eps_list. Terms whose
/// magnitude stays below `trivial_tol` for every eps are reported with slope
/// +infinity (they have already vanished identically, e.g. M^2 and the
/// Delta-K^j coefficient at grid coordinates).
struct DecayStudy {
    std::vector<TermMagnitudes> rows;
    double slope_kbar, slope_m1, slope_m2, slope_m3, slope_ksupp, slope_dkj, slope_dkp;
};

inline DecayStudy decay_study(double m, double k, const std::vector<double>& eps_list,
                              double trivial_tol = 1e-14) {
    if (eps_list.size() < 3) throw std::invalid_argument("decay_study: need at least 3 epsilons");
    DecayStudy study{};
    for (double eps : eps_list) study.rows.push_back(term_magnitudes(m, k, eps));
    auto slope = [&](auto member) {
        std::vector<double> xs, ys;
        bool trivial = true;
        for (const auto& r : study.rows) {
            const double v = r.*member;
            if (v > trivial_tol) trivial = false;
            xs.push_back(r.epsilon);
            ys.push_back(std::max(v, 1e-300));
        }
        if (trivial) return std::numeric_limits<double>::infinity();
        return detail::loglog_slope(xs, ys);
    };
    study.slope_kbar = slope(&TermMagnitudes::kbar);
    study.slope_m1 = slope(&TermMagnitudes::m1);
    study.slope_m2 = slope(&TermMagnitudes::m2);
    study.slope_m3 = slope(&TermMagnitudes::m3);
    study.slope_ksupp = slope(&TermMagnitudes::ksupp);
    study.slope_dkj = slope(&TermMagnitudes::dkj);
    study.slope_dkp = slope(&TermMagnitudes::dkp);
    return study;
}

}  // namespace qwalk
