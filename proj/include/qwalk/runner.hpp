#pragma once

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <thread>

#include <json.hpp>

#include "qwalk/config.hpp"
#include "qwalk/continuum.hpp"
#include "qwalk/csv.hpp"
#include "qwalk/extended_action.hpp"
#include "qwalk/lorentz.hpp"
#include "qwalk/mechanics.hpp"
#include "qwalk/observables.hpp"
#include "qwalk/random.hpp"
#include "qwalk/walk.hpp"

namespace qwalk {

/// Parallelism cap: min(hardware threads, QWALK_THREADS if set).
inline unsigned max_threads() {
    unsigned n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("QWALK_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && v >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(v));
    }
    return n;
}

namespace detail {
inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string item;
    std::stringstream ss(s);
    while (std::getline(ss, item, sep)) parts.push_back(item);
    return parts;
}

inline std::uint64_t spec_seed(const std::vector<std::string>& parts, const std::string& what) {
    if (parts.size() != 2) throw ConfigError("config error: " + what + " needs a seed");
    try {
        return std::stoull(parts[1]);
    } catch (const std::exception&) {
        throw ConfigError("config error: bad seed in " + what);
    }
}
}  // namespace detail

inline CoinField make_coin(const std::string& spec, std::size_t n_sites) {
    const auto parts = detail::split(spec, ':');
    const std::string& kind = parts.front();
    if (kind == "identity") return CoinField::uniform(n_sites, Mat2::identity());
    if (kind == "hadamard") {
        const double s = 1.0 / std::sqrt(2.0);
        return CoinField::uniform(n_sites, Mat2{{cd(s), cd(s), cd(s), cd(-s)}});
    }
    if (kind == "random") return random_homogeneous_coin(n_sites, detail::spec_seed(parts, spec));
    if (kind == "random_site") return random_site_coin(n_sites, detail::spec_seed(parts, spec));
    throw ConfigError("config error: unknown coin spec '" + spec + "'");
}

inline SpinorField make_state(const std::string& spec, std::size_t n_sites) {
    const auto parts = detail::split(spec, ':');
    const std::string& kind = parts.front();
    if (kind == "random") return random_state(n_sites, detail::spec_seed(parts, spec));
    if (kind == "delta") {
        if (parts.size() != 2) throw ConfigError("config error: delta needs a site index");
        SpinorField s(n_sites);
        s.minus[std::stoull(parts[1]) % n_sites] = 1;
        return s;
    }
    if (kind == "plane_wave") {
        if (parts.size() != 2) throw ConfigError("config error: plane_wave needs a mode index");
        const double k =
            2.0 * std::numbers::pi * std::stod(parts[1]) / static_cast<double>(n_sites);
        return plane_wave_minus(n_sites, k);
    }
    if (kind == "gaussian") {
        if (parts.size() != 3) throw ConfigError("config error: gaussian needs center:width");
        const double c = std::stod(parts[1]), w = std::stod(parts[2]);
        SpinorField s(n_sites);
        for (std::size_t p = 0; p < n_sites; ++p) {
            const double d = static_cast<double>(p) - c;
            s.minus[p] = std::exp(-d * d / (2 * w * w));
        }
        s *= 1.0 / std::sqrt(s.norm2());
        return s;
    }
    throw ConfigError("config error: unknown initial_state spec '" + spec + "'");
}

namespace detail {
class AssertionLog {
public:
    void check(const std::string& name, double value, double tol) {
        const bool ok = value < tol;
        all_ok_ = all_ok_ && ok;
        std::cout << (ok ? "PASS " : "FAIL ") << name << " value=" << value << " tol=" << tol
                  << "\n";
    }
    void note(const std::string& name, double value) {
        std::cout << "INFO " << name << " value=" << value << "\n";
    }
    bool ok() const { return all_ok_; }

private:
    bool all_ok_ = true;
};

inline void write_totals_csv(const std::string& path, const std::vector<SliceTotals>& totals) {
    CsvWriter csv(path, {"j", "energy_re", "energy_im", "momentum_re", "momentum_im", "charge_re",
                         "charge_im"});
    for (std::size_t j = 0; j < totals.size(); ++j)
        csv.row({static_cast<double>(j), totals[j].energy.real(), totals[j].energy.imag(),
                 totals[j].momentum.real(), totals[j].momentum.imag(), totals[j].charge.real(),
                 totals[j].charge.imag()});
}

inline void write_density_csv(const std::string& path, const std::vector<ScalarField>& rows) {
    CsvWriter csv(path, {"j", "p", "re", "im"});
    for (std::size_t j = 0; j < rows.size(); ++j)
        for (std::size_t p = 0; p < rows[j].size(); ++p)
            csv.row({static_cast<double>(j), static_cast<double>(p), rows[j][p].real(),
                     rows[j][p].imag()});
}
}  // namespace detail

inline int run(const RunSpec& spec) {
    namespace fs = std::filesystem;
    validate_spec(spec);
    fs::create_directories(spec.output_path);
    const auto out = [&](const std::string& name) {
        return (fs::path(spec.output_path) / name).string();
    };
    detail::AssertionLog log;

    switch (spec.experiment) {
        case Experiment::simulate: {
            const CoinField coin = make_coin(spec.coin, spec.n_sites);
            const SpinorField init = make_state(spec.initial_state, spec.n_sites);
            const Trajectory traj = evolve(init, coin, spec.steps);
            const double n0 = init.norm2();
            double drift = 0;
            for (const SpinorField& s : traj.slices)
                drift = std::max(drift, std::abs(s.norm2() - n0) / n0);
            log.check("norm_drift_relative", drift, 1e-12);

            CsvWriter csv(out("final_state.csv"),
                          {"p", "minus_re", "minus_im", "plus_re", "plus_im"});
            const SpinorField& last = traj.slices.back();
            for (std::size_t p = 0; p < spec.n_sites; ++p)
                csv.row({static_cast<double>(p), last.minus[p].real(), last.minus[p].imag(),
                         last.plus[p].real(), last.plus[p].imag()});
            detail::write_totals_csv(out("totals.csv"), totals(traj, coin));
            break;
        }

        case Experiment::conserve: {
            const CoinField coin = make_coin(spec.coin, spec.n_sites);
            const SpinorField init = make_state(spec.initial_state, spec.n_sites);
            const Trajectory traj = evolve(init, coin, spec.steps);

            const auto tot = totals(traj, coin);
            double q_drift = 0;
            for (const auto& t : tot)
                q_drift = std::max(q_drift,
                                   std::abs(t.charge - tot.front().charge) /
                                       std::abs(tot.front().charge));
            log.check("total_charge_drift_relative", q_drift, 1e-12);
            log.check("charge_conservation_residual", charge_conservation_residual(traj), 1e-12);

            std::vector<ScalarField> q_rows;
            for (const SpinorField& s : traj.slices) q_rows.push_back(charge_density(s));
            detail::write_density_csv(out("charge_residual.csv"), q_rows);

            if (coin.homogeneous) {
                log.check("energy_conservation_residual",
                          energy_conservation_residual(traj, coin), 1e-12);
                double h_drift = 0, p_drift = 0;
                for (const auto& t : tot) {
                    h_drift = std::max(h_drift, std::abs(t.energy - tot.front().energy));
                    p_drift = std::max(p_drift, std::abs(t.momentum - tot.front().momentum));
                }
                log.check("total_energy_drift", h_drift, 1e-12);
                log.check("total_momentum_drift", p_drift, 1e-12);
                log.note("momentum_local_balance_residual", momentum_balance_residual(traj));
                std::vector<ScalarField> h_rows;
                for (const SpinorField& s : traj.slices)
                    h_rows.push_back(energy_density(s, coin));
                detail::write_density_csv(out("energy_residual.csv"), h_rows);
            }
            detail::write_totals_csv(out("totals.csv"), tot);
            break;
        }

        case Experiment::extended: {
            const CoinField coin = make_coin(spec.coin, spec.n_sites);
            const SpinorField init = make_state(spec.initial_state, spec.n_sites);
            const Trajectory phi = evolve(init, coin, spec.steps);
            const Trajectory psi = onshell_psi(phi, coin);
            const CoordinateField grid = CoordinateField::grid(spec.n_sites);
            const SigmaTerms terms = sigma_terms(phi, psi, coin, grid);
            const cd s_tilde = action_S_alternate(phi, coin);

            log.check("sigma_minus_alternate_action", std::abs(terms.sigma() - s_tilde), 1e-12);
            log.check("m2_on_grid_coordinates", std::abs(terms.m2), 1e-12);
            const OnshellReport rep = onshell_energy_momentum_check(phi, coin);
            log.check("onshell_derivative_discrepancy", rep.max_discrepancy, 1e-12);

            nlohmann::json j;
            j["sigma_re"] = terms.sigma().real();
            j["sigma_im"] = terms.sigma().imag();
            j["m1"] = {terms.m1.real(), terms.m1.imag()};
            j["m2"] = {terms.m2.real(), terms.m2.imag()};
            j["m3"] = {terms.m3.real(), terms.m3.imag()};
            j["kj"] = {terms.kj.real(), terms.kj.imag()};
            j["kp"] = {terms.kp.real(), terms.kp.imag()};
            j["ksupp"] = {terms.ksupp.real(), terms.ksupp.imag()};
            j["onshell_discrepancy"] = rep.max_discrepancy;
            j["energy_residual"] = rep.energy_residual;
            j["momentum_residual"] = rep.momentum_residual;
            std::ofstream(out("extended_report.json")) << j.dump(2) << "\n";
            break;
        }

        case Experiment::lorentz: {
            const CoinField coin = make_coin(spec.coin, spec.n_sites);
            const SpinorField init = make_state(spec.initial_state, spec.n_sites);
            const Trajectory phi = evolve(init, coin, spec.steps);
            const Trajectory psi = onshell_psi(phi, coin);

            const cd sigma0 = covariant_action(phi, psi, coin, FrameSpec::identity()).sigma_L();
            FrameSpec frame = FrameSpec::boost(spec.rapidity);
            if (spec.lambda > 0) frame.lambda = spec.lambda;
            const CovariantTerms terms = covariant_action(phi, psi, coin, frame);
            log.check("sigma_L_frame_invariance", std::abs(terms.sigma_L() - sigma0), 1e-10);
            log.check("boost_volume_measure_minus_one", std::abs(terms.delta - 1.0), 1e-13);

            const StressEnergyField grid_t = stress_energy_grid(phi, coin);
            const StressEnergyField frame_t = stress_energy_transform(grid_t, frame);
            const StressEnergyResiduals res = stress_energy_residuals(frame_t);
            log.check("transformed_stress_energy_residual_time", res.time_row, 1e-12);
            log.check("transformed_stress_energy_residual_space", res.space_row, 1e-12);

            CsvWriter csv(out("stress_energy_frame.csv"),
                          {"j", "p", "t0j_re", "t0j_im", "t0p_re", "t0p_im", "t1j_re", "t1j_im",
                           "t1p_re", "t1p_im"});
            for (std::size_t j = 0; j < frame_t.t_time_j.size(); ++j)
                for (std::size_t p = 0; p < spec.n_sites; ++p)
                    csv.row({static_cast<double>(j), static_cast<double>(p),
                             frame_t.t_time_j[j][p].real(), frame_t.t_time_j[j][p].imag(),
                             frame_t.t_time_p[j][p].real(), frame_t.t_time_p[j][p].imag(),
                             frame_t.t_space_j[j][p].real(), frame_t.t_space_j[j][p].imag(),
                             frame_t.t_space_p[j][p].real(), frame_t.t_space_p[j][p].imag()});

            nlohmann::json j;
            j["rapidity"] = frame.rapidity;
            j["lambda"] = frame.lambda;
            j["sigma_L_identity"] = {sigma0.real(), sigma0.imag()};
            j["sigma_L_frame"] = {terms.sigma_L().real(), terms.sigma_L().imag()};
            j["invariance_defect"] = std::abs(terms.sigma_L() - sigma0);
            j["stress_energy_residuals"] = {res.time_row, res.space_row};
            std::ofstream(out("lorentz_report.json")) << j.dump(2) << "\n";
            break;
        }

        case Experiment::continuum: {
            // Independent epsilon runs, capped by QWALK_THREADS.
            const unsigned cap = max_threads();
            std::vector<std::future<ConvergencePoint>> jobs;
            std::vector<ConvergencePoint> points(spec.epsilon_list.size());
            for (std::size_t i = 0; i < spec.epsilon_list.size(); ++i) {
                const double eps = spec.epsilon_list[i];
                const auto policy = (cap > 1) ? std::launch::async : std::launch::deferred;
                jobs.push_back(std::async(policy, [&, eps] {
                    return convergence_point(spec.mass, spec.wavenumber, spec.t_final, eps);
                }));
            }
            for (std::size_t i = 0; i < jobs.size(); ++i) points[i] = jobs[i].get();
            std::vector<double> xs, ys;
            for (const auto& pt : points) {
                xs.push_back(pt.epsilon);
                ys.push_back(pt.error);
            }
            const double order = detail::loglog_slope(xs, ys);
            log.check("convergence_order_deficit", std::max(0.0, 0.9 - order), 1e-12);
            log.note("fitted_order", order);

            CsvWriter csv(out("convergence.csv"), {"epsilon", "error", "order"});
            for (const auto& pt : points) csv.row({pt.epsilon, pt.error, order});

            const DecayStudy decay = decay_study(spec.mass, spec.wavenumber, spec.epsilon_list);
            const double base = std::min(decay.slope_kbar, decay.slope_m1);
            const double extras = std::min({decay.slope_m2, decay.slope_m3, decay.slope_ksupp,
                                            decay.slope_dkj, decay.slope_dkp});
            log.check("extra_term_decay_deficit", std::max(0.0, base + 0.9 - extras), 1e-12);
            break;
        }

        case Experiment::mechanics: {
            const Potential phi = Potential::harmonic();
            // Symplectic run with the drift-formula identity checked per step.
            double worst_identity = 0;
            {
                double q = 1.0, p_prev = 0.0;
                CsvWriter csv(out("mechanics.csv"), {"j", "q", "p", "H"});
                for (std::size_t j = 0; j < spec.steps; ++j) {
                    const auto s = symplectic_step(q, p_prev, phi);
                    const double h = 0.5 * s.p_j * s.p_j + phi.value(q);
                    const double p_next = s.p_j - phi.derivative(s.q_next);
                    const double h_next = 0.5 * p_next * p_next + phi.value(s.q_next);
                    worst_identity = std::max(
                        worst_identity, std::abs(h_next - h - energy_drift(q, s.p_j, phi)));
                    csv.row({static_cast<double>(j), q, s.p_j, h});
                    q = s.q_next;
                    p_prev = s.p_j;
                }
            }
            log.check("energy_drift_identity", worst_identity, 1e-12);

            // The extended scheme determines the time step from
            // V_j = (pi_{j-1} - u_j)/phi'(q_j), so it is only solvable while the
            // trajectory stays away from turning points (u -> 0) and from
            // extrema of the potential (phi' -> 0). This window of the harmonic
            // oscillator stays solvable for over 1100 steps.
            const std::size_t ext_steps = std::min<std::size_t>(spec.steps, 1000);
            const MechTrajectory ext =
                extended_run(0.3, 0.0, 0.7, 0.001, ext_steps, phi, spec.solver_tol);
            const CyclicMomentumReport rep = cyclic_momentum_check(ext, phi);
            log.check("extended_Pi_drift", rep.max_delta_Pi, 1e-10);

            const MechTrajectory fp = symplectic_run(0.0, 1.0, spec.steps,
                                                     Potential::free_particle());
            const CyclicMomentumReport fr = cyclic_momentum_check(fp, Potential::free_particle());
            log.check("free_particle_momentum_drift", fr.max_delta_p, 1e-15);
            log.check("free_particle_energy_drift", fr.max_delta_H, 1e-15);

            CsvWriter csv(out("mechanics_extended.csv"), {"j", "q", "p", "t", "Pi"});
            for (std::size_t j = 0; j < ext.q.size(); ++j)
                csv.row({static_cast<double>(j), ext.q[j], ext.p[j], ext.t[j], ext.Pi[j]});
            break;
        }
    }
    return log.ok() ? 0 : 1;
}

}  // namespace qwalk
