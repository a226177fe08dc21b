#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace qwalk {

/// Potential phi(q) supplied together with its derivative.
struct Potential {
    std::function<double(double)> value;
    std::function<double(double)> derivative;

    static Potential free_particle() {
        return {[](double) { return 0.0; }, [](double) { return 0.0; }};
    }
    static Potential harmonic() {
        return {[](double q) { return 0.5 * q * q; }, [](double q) { return q; }};
    }
    static Potential constant(double c) {
        return {[c](double) { return c; }, [](double) { return 0.0; }};
    }
};

struct MechTrajectory {
    std::vector<double> q, p;
    std::vector<double> t, Pi;  // filled by the extended scheme only
};

/// One step of the symplectic scheme derived from the discrete mechanical
/// action: p_j = p_prev - phi'(q_j), q_next = q_j + p_j.
struct SymplecticStep {
    double q_next;
    double p_j;
};

inline SymplecticStep symplectic_step(double q_j, double p_prev, const Potential& phi) {
    const double p_j = p_prev - phi.derivative(q_j);
    return {q_j + p_j, p_j};
}

/// Exact inverse of symplectic_step: recover (q_j, p_prev) from (q_next, p_j).
inline SymplecticStep symplectic_step_inverse(double q_next, double p_j, const Potential& phi) {
    const double q_j = q_next - p_j;
    return {q_j, p_j + phi.derivative(q_j)};  // q_next slot holds q_j here
}

/// The per-step energy change of the symplectic scheme with H = p^2/2 + phi(q):
/// H_{j+1} - H_j = phi(q_j + p_j) - phi(q_j) - p_j phi'(q_{j+1}) + phi'(q_{j+1})^2 / 2,
/// an exact algebraic identity (zero only for constant potentials).
inline double energy_drift(double q_j, double p_j, const Potential& phi) {
    const double q_next = q_j + p_j;
    const double g = phi.derivative(q_next);
    return phi.value(q_next) - phi.value(q_j) - p_j * g + 0.5 * g * g;
}

/// Run the symplectic scheme; p_prev_init plays the role of p_{-1}.
inline MechTrajectory symplectic_run(double q0, double p_prev_init, std::size_t steps,
                                     const Potential& phi) {
    MechTrajectory traj;
    traj.q.reserve(steps + 1);
    traj.p.reserve(steps + 1);
    double q = q0, p_prev = p_prev_init;
    for (std::size_t j = 0; j <= steps; ++j) {
        const auto s = symplectic_step(q, p_prev, phi);
        traj.q.push_back(q);
        traj.p.push_back(s.p_j);
        q = s.q_next;
        p_prev = s.p_j;
    }
    return traj;
}

/// One step of the extended scheme with the time variable t_j as a dynamical
/// quantity. Unknowns (q_next, t_next) solve, with u = (q_next - q_j)/V and
/// V = t_next - t_j:
///   F1 = u - pi_prev + V phi'(q_j)            (momentum update pi_j = u)
///   F2 = -u^2/2 - phi(q_j) - Pi_target        (Pi_j stays at its target)
/// by damped Newton from the closed-form guess u = +-sqrt(-2 (Pi + phi(q_j))),
/// V = (pi_prev - u)/phi'(q_j). When phi'(q_j) ~ 0 the system leaves V free
/// (cyclic t); V falls back to v_fallback as the free-particle convention.
struct ExtendedStep {
    double q_next;
    double t_next;
    double pi_j;  // equals u_j for the mechanical action
};

inline ExtendedStep extended_step(double q_j, double t_j, double pi_prev, double Pi_target,
                                  const Potential& phi, double solver_tol,
                                  double v_fallback = 1.0) {
    if (solver_tol <= 0) throw std::invalid_argument("extended_step: solver_tol must be > 0");
    const double disc = -2.0 * (Pi_target + phi.value(q_j));
    if (disc < 0)
        throw std::domain_error("extended_step: no real velocity (target energy below potential)");
    const double grad = phi.derivative(q_j);
    double u = std::sqrt(disc);
    if (std::abs(-u - pi_prev) < std::abs(u - pi_prev)) u = -u;

    double v;
    if (std::abs(grad) < 1e-13) {
        v = v_fallback;  // t is cyclic at this point; Pi does not constrain V
        u = pi_prev;     // F1 reduces to u = pi_prev
    } else {
        v = (pi_prev - u) / grad;
        // Newton polish on (q_next, t_next); the guess already solves the
        // system exactly in real arithmetic, so this only sharpens round-off.
        double qn = q_j + u * v, tn = t_j + v;
        for (int it = 0; it < 50; ++it) {
            const double vv = tn - t_j;
            if (vv <= 0) break;
            const double uu = (qn - q_j) / vv;
            const double f1 = uu - pi_prev + vv * grad;
            const double f2 = -0.5 * uu * uu - phi.value(q_j) - Pi_target;
            if (std::abs(f1) < solver_tol && std::abs(f2) < solver_tol) break;
            const double j11 = 1.0 / vv, j12 = -uu / vv + grad;
            const double j21 = -uu / vv, j22 = uu * uu / vv;
            const double det = j11 * j22 - j12 * j21;
            if (std::abs(det) < 1e-300) break;
            double dq = (-f1 * j22 + f2 * j12) / det;
            double dt = (-f2 * j11 + f1 * j21) / det;
            double damp = 1.0;
            while (tn + damp * dt <= t_j && damp > 1e-8) damp *= 0.5;
            qn += damp * dq;
            tn += damp * dt;
        }
        const double vv = tn - t_j;
        const double uu = (qn - q_j) / vv;
        if (vv <= 0) throw std::domain_error("extended_step: non-positive time step");
        if (std::abs(uu - pi_prev + vv * grad) > 50 * solver_tol ||
            std::abs(-0.5 * uu * uu - phi.value(q_j) - Pi_target) > 50 * solver_tol)
            throw std::runtime_error("extended_step: Newton iteration did not converge");
        return {qn, tn, uu};
    }
    if (v <= 0) throw std::domain_error("extended_step: non-positive time step");
    return {q_j + u * v, t_j + v, u};
}

/// Run the extended scheme from (q0, t0) with initial velocity u0 and first
/// time step v_init. The conserved momentum target is
/// Pi_0 = -u0^2/2 - phi(q0); the pre-initial momentum pi_{-1} is chosen as
/// u0 + v_init phi'(q0) so that the first step reproduces (u0, v_init).
inline MechTrajectory extended_run(double q0, double t0, double u0, double v_init,
                                   std::size_t steps, const Potential& phi, double solver_tol) {
    MechTrajectory traj;
    const double Pi0 = -0.5 * u0 * u0 - phi.value(q0);
    double q = q0, t = t0;
    double pi_prev = u0 + v_init * phi.derivative(q0);
    double v_prev = v_init;
    traj.q.push_back(q);
    traj.t.push_back(t);
    traj.p.push_back(pi_prev);
    traj.Pi.push_back(Pi0);
    for (std::size_t j = 0; j < steps; ++j) {
        const ExtendedStep s = extended_step(q, t, pi_prev, Pi0, phi, solver_tol, v_prev);
        v_prev = s.t_next - t;
        // Pi_j pairs the step velocity u_j with the pre-step position q_j.
        traj.Pi.push_back(-0.5 * s.pi_j * s.pi_j - phi.value(q));
        q = s.q_next;
        t = s.t_next;
        pi_prev = s.pi_j;
        traj.q.push_back(q);
        traj.t.push_back(t);
        traj.p.push_back(s.pi_j);
    }
    return traj;
}

/// Conservation report for either scheme.
struct CyclicMomentumReport {
    double max_delta_p = 0;   // symplectic momentum spread (free particle: 0)
    double max_delta_Pi = 0;  // extended-scheme Pi spread (0 when no t data)
    double max_delta_H = 0;   // symplectic energy spread, reported not asserted
};

inline CyclicMomentumReport cyclic_momentum_check(const MechTrajectory& traj,
                                                  const Potential& phi) {
    CyclicMomentumReport rep;
    for (std::size_t j = 0; j < traj.p.size(); ++j)
        rep.max_delta_p = std::max(rep.max_delta_p, std::abs(traj.p[j] - traj.p.front()));
    if (!traj.Pi.empty())
        for (double v : traj.Pi)
            rep.max_delta_Pi = std::max(rep.max_delta_Pi, std::abs(v - traj.Pi.front()));
    if (traj.t.empty() && traj.q.size() == traj.p.size()) {
        const double h0 = 0.5 * traj.p.front() * traj.p.front() + phi.value(traj.q.front());
        for (std::size_t j = 0; j < traj.q.size(); ++j) {
            const double h = 0.5 * traj.p[j] * traj.p[j] + phi.value(traj.q[j]);
            rep.max_delta_H = std::max(rep.max_delta_H, std::abs(h - h0));
        }
    }
    return rep;
}

}  // namespace qwalk
