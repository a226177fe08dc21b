#pragma once

#include <stdexcept>

#include "qwalk/field.hpp"

namespace qwalk {

/// Spatial translation T: (T psi)^-_p = psi^-_{p+1}, (T psi)^+_p = psi^+_{p-1}
/// (periodic); dagger=true applies the adjoint. Exact index shifts.
inline SpinorField apply_translation(const SpinorField& state, bool dagger = false) {
    SpinorField out(state.n_sites);
    const std::ptrdiff_t s = dagger ? -1 : +1;
    for (std::size_t p = 0; p < state.n_sites; ++p) {
        out.minus[p] = state.minus[state.wrap(static_cast<std::ptrdiff_t>(p) + s)];
        out.plus[p] = state.plus[state.wrap(static_cast<std::ptrdiff_t>(p) - s)];
    }
    return out;
}

/// One walk step U = V T: shift, then mix spin components with the coin.
inline SpinorField step(const SpinorField& state, const CoinField& coin) {
    if (coin.n_sites != state.n_sites) throw std::invalid_argument("step: dimension mismatch");
    SpinorField t = apply_translation(state);
    SpinorField out(state.n_sites);
    for (std::size_t p = 0; p < state.n_sites; ++p) {
        const auto v = apply(coin.at(p), {t.minus[p], t.plus[p]});
        out.minus[p] = v[0];
        out.plus[p] = v[1];
    }
    return out;
}

/// Adjoint step U^dag = T^dag V^dag.
inline SpinorField step_adjoint(const SpinorField& state, const CoinField& coin) {
    if (coin.n_sites != state.n_sites)
        throw std::invalid_argument("step_adjoint: dimension mismatch");
    SpinorField v(state.n_sites);
    for (std::size_t p = 0; p < state.n_sites; ++p) {
        const auto w = apply(coin.at(p).adjoint(), {state.minus[p], state.plus[p]});
        v.minus[p] = w[0];
        v.plus[p] = w[1];
    }
    return apply_translation(v, /*dagger=*/true);
}

/// Psi_{j+1} = U Psi_j for `steps` steps; slice 0 is the initial state.
inline Trajectory evolve(const SpinorField& initial, const CoinField& coin, std::size_t steps) {
    if (steps < 1) throw std::invalid_argument("evolve: steps must be >= 1");
    Trajectory traj;
    traj.slices.reserve(steps + 1);
    traj.slices.push_back(initial);
    for (std::size_t j = 0; j < steps; ++j) traj.slices.push_back(step(traj.slices.back(), coin));
    return traj;
}

/// Time-varying coin variant: coins[j] advances slice j to j+1.
inline Trajectory evolve(const SpinorField& initial, const std::vector<CoinField>& coins) {
    if (coins.empty()) throw std::invalid_argument("evolve: steps must be >= 1");
    Trajectory traj;
    traj.slices.reserve(coins.size() + 1);
    traj.slices.push_back(initial);
    for (const CoinField& c : coins) traj.slices.push_back(step(traj.slices.back(), c));
    return traj;
}

enum class StencilKind {
    grad_p,          // (f_{p+1} - f_{p-1}) / 2
    avg_C,           // (f_{p+1} + f_{p-1}) / 2
    grad_j_plain,    // f_{j+1,p} - f_{j,p}
    grad_j_avg,      // f_{j+1,p} - (f_{j,p+1} + f_{j,p-1}) / 2
    grad_p_doubled,  // f_{p+1} - f_{p-1}
};

/// Spatial stencils act on `field`; the two time-differencing kinds combine
/// `next` (slice j+1) with `field` (slice j). Periodic wrap everywhere.
inline ScalarField stencil(const ScalarField& field, StencilKind kind,
                           const ScalarField* next = nullptr) {
    const std::size_t n = field.size();
    ScalarField out;
    out.values.resize(n);
    const bool needs_next = kind == StencilKind::grad_j_plain || kind == StencilKind::grad_j_avg;
    if (needs_next && (next == nullptr || next->size() != n))
        throw std::invalid_argument("stencil: time-differencing kinds need the j+1 slice");
    for (std::size_t p = 0; p < n; ++p) {
        const auto q = static_cast<std::ptrdiff_t>(p);
        switch (kind) {
            case StencilKind::grad_p:
                out[p] = 0.5 * (field.at_wrapped(q + 1) - field.at_wrapped(q - 1));
                break;
            case StencilKind::avg_C:
                out[p] = 0.5 * (field.at_wrapped(q + 1) + field.at_wrapped(q - 1));
                break;
            case StencilKind::grad_j_plain:
                out[p] = (*next)[p] - field[p];
                break;
            case StencilKind::grad_j_avg:
                out[p] = (*next)[p] - 0.5 * (field.at_wrapped(q + 1) + field.at_wrapped(q - 1));
                break;
            case StencilKind::grad_p_doubled:
                out[p] = field.at_wrapped(q + 1) - field.at_wrapped(q - 1);
                break;
        }
    }
    return out;
}

/// Basic action S = sum_j <Psi_{j+1} | Psi_{j+1} - U_j Psi_j>. Vanishes on
/// every trajectory produced by `evolve`.
inline cd action_S(const Trajectory& traj, const CoinField& coin) {
    if (traj.slices.size() < 2) throw std::invalid_argument("action_S: need >= 2 slices");
    cd s = 0;
    for (std::size_t j = 0; j + 1 < traj.slices.size(); ++j) {
        const SpinorField u = step(traj[j], coin);
        s += inner(traj[j + 1], traj[j + 1] - u);
    }
    return s;
}

/// Alternate on-shell-equivalent form sum_j <Psi_j | U^dag Psi_{j+1} - Psi_j>,
/// obtained by moving U onto the bra.
inline cd action_S_alternate(const Trajectory& traj, const CoinField& coin) {
    if (traj.slices.size() < 2) throw std::invalid_argument("action_S_alternate: need >= 2 slices");
    cd s = 0;
    for (std::size_t j = 0; j + 1 < traj.slices.size(); ++j) {
        const SpinorField ud = step_adjoint(traj[j + 1], coin);
        s += inner(traj[j], ud - traj[j]);
    }
    return s;
}

/// Max absolute central finite-difference derivative of Re S and Im S with
/// respect to every real and imaginary amplitude component of the interior
/// slices (j = 1..J-1; the endpoint slices carry one-sided boundary terms
/// even on shell).
inline double stationarity_residual(const Trajectory& traj, const CoinField& coin,
                                    double fd_step = 1e-5) {
    if (fd_step <= 0) throw std::invalid_argument("stationarity_residual: fd_step must be > 0");
    Trajectory work = traj;
    double worst = 0;
    auto probe = [&](cd& slot) {
        const cd saved = slot;
        for (int part = 0; part < 2; ++part) {
            const cd delta = (part == 0) ? cd(fd_step, 0) : cd(0, fd_step);
            slot = saved + delta;
            const cd sp = action_S(work, coin);
            slot = saved - delta;
            const cd sm = action_S(work, coin);
            slot = saved;
            const cd d = (sp - sm) / (2.0 * fd_step);
            worst = std::max({worst, std::abs(d.real()), std::abs(d.imag())});
        }
    };
    for (std::size_t j = 1; j + 1 < work.slices.size(); ++j) {
        for (std::size_t p = 0; p < work.n_sites(); ++p) {
            probe(work.slices[j].minus[p]);
            probe(work.slices[j].plus[p]);
        }
    }
    return worst;
}

}  // namespace qwalk
