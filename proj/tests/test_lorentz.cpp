#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numbers>

#include "qwalk/lorentz.hpp"
#include "qwalk/random.hpp"

using namespace qwalk;
using std::numbers::pi;

namespace {

double mat_dist(const Mat2& a, const Mat2& b) {
    double worst = 0;
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) worst = std::max(worst, std::abs(a(r, c) - b(r, c)));
    return worst;
}

Trajectory random_offshell(std::size_t n, std::size_t slices, std::uint64_t seed) {
    Trajectory t;
    for (std::size_t j = 0; j < slices; ++j) t.slices.push_back(random_state(n, seed + j));
    return t;
}

}  // namespace

TEST_CASE("shift operator algebra") {
    const SpinorField f = random_state(12, 3);
    const ShiftOp t = ShiftOp::translation();
    CHECK(std::sqrt((t(f) - apply_translation(f)).norm2()) < 1e-15);

    // C f reproduces the componentwise neighbour average.
    CHECK(std::sqrt((ShiftOp::neighbor_avg()(f) - avg_neighbors(f)).norm2()) < 1e-15);

    // Products compose shifts: (T * T) f = T(T f).
    CHECK(std::sqrt(((t * t)(f) - apply_translation(apply_translation(f))).norm2()) < 1e-15);

    // Conjugation acts on the matrix part only.
    std::mt19937_64 rng(9);
    const Mat2 b = haar_unitary(rng);
    const SpinorField lhs = t.conjugated(b)(f);
    const SpinorField rhs = apply_matrix(b.adjoint(), t(apply_matrix(b, f)));
    CHECK(std::sqrt((lhs - rhs).norm2()) < 1e-14);
}

TEST_CASE("spin frame of special coins") {
    // W = sigma_3: W sigma_3 = 1 is degenerate, convention picks the identity
    // basis with both eigenphases zero.
    const SpinFrame fz = spin_frame_of(Mat2::pauli_z(), 1.0);
    CHECK(fz.alpha_L == 0.0);
    CHECK(fz.alpha_R == 0.0);
    CHECK(mat_dist(fz.basis_matrix, Mat2::identity()) == 0.0);
    CHECK(mat_dist(fz.sigma_bar3, Mat2::pauli_z()) == 0.0);

    // W = 1: W sigma_3 = sigma_3 has eigenphases {0, pi} on the standard basis.
    const SpinFrame fi = spin_frame_of(Mat2::identity(), 2.0);
    CHECK(fi.alpha_L == doctest::Approx(0.0));
    CHECK(fi.alpha_R == doctest::Approx(pi));
    CHECK(mat_dist(fi.sigma_bar3, Mat2::pauli_z()) < 1e-15);

    CHECK_THROWS_AS(spin_frame_of(Mat2::identity(), 0.0), std::invalid_argument);
}

TEST_CASE("spin frame invariants for random coins") {
    for (std::uint64_t seed = 1; seed <= 25; ++seed) {
        std::mt19937_64 rng(seed);
        const Mat2 w = haar_unitary(rng);
        const SpinFrame f = spin_frame_of(w, 1.5);
        const Mat2& s = f.sigma_bar3;
        CHECK(mat_dist(s * s, Mat2::identity()) < 1e-13);
        const Mat2 ws3 = w * Mat2::pauli_z();
        CHECK(mat_dist(ws3 * s, s * ws3) < 1e-13);
        // Similarity: basis^dag (W sigma_3) basis is diagonal with the phases.
        const Mat2 d = f.basis_matrix.adjoint() * ws3 * f.basis_matrix;
        CHECK(std::abs(d(0, 0) - std::polar(1.0, f.alpha_L)) < 1e-13);
        CHECK(std::abs(d(1, 1) - std::polar(1.0, f.alpha_R)) < 1e-13);
        CHECK(std::abs(d(0, 1)) < 1e-13);
        CHECK(std::abs(d(1, 0)) < 1e-13);
        CHECK(f.alpha_L <= f.alpha_R);
    }
}

TEST_CASE("spin-operator scaling law") {
    Mat2 m;
    m(0, 0) = cd(3, 1);
    m(0, 1) = cd(0, 2);
    m(1, 0) = 5;
    m(1, 1) = cd(-1, 4);
    CHECK(mat_dist(solt_transform(m, 1.0), m) == 0.0);

    const Mat2 s = solt_transform(m, 2.0);
    CHECK(std::abs(s(0, 0) - 4.0 * m(0, 0)) < 1e-15);
    CHECK(std::abs(s(1, 1) - m(1, 1) / 4.0) < 1e-15);
    CHECK(std::abs(s(0, 1) - m(0, 1)) == 0.0);
    CHECK(std::abs(s(1, 0) - m(1, 0)) == 0.0);

    // Inverse scaling undoes it.
    CHECK(mat_dist(solt_transform(s, 0.5), m) < 1e-15);
    CHECK_THROWS_AS(solt_transform(m, -1.0), std::invalid_argument);
}

TEST_CASE("scaled Dirac matrices keep the Clifford relations") {
    // In the eigenbasis: gamma^0 antidiagonal(1, 1), gamma^1 = [[0,1],[-1,0]].
    Mat2 g0, g1;
    g0(0, 1) = 1;
    g0(1, 0) = 1;
    g1(0, 1) = 1;
    g1(1, 0) = -1;
    for (double lambda : {0.5, 1.0, 2.0, std::exp(0.35)}) {
        const Mat2 t0 = solt_transform(g0, lambda);
        const Mat2 t1 = solt_transform(g1, lambda);
        CHECK(mat_dist(t0 * t0, Mat2::identity()) < 1e-13);
        CHECK(mat_dist(t1 * t1, cd(-1) * Mat2::identity()) < 1e-13);
        CHECK(mat_dist(t0 * t1 + t1 * t0, Mat2()) < 1e-13);
        CHECK(mat_dist(t0 * t1, g0 * g1) < 1e-13);
    }
}

TEST_CASE("projection on the boosted frame vector") {
    // With eta = diag(1,-1) the frame vector V has V.V = -1, so the projector
    // onto V reads P(A)^mu = -(A.V) V^mu. Check P(V) = V, P(U) = 0 and P^2 = P.
    for (double phi : {0.1, 0.5, 1.0, -0.7}) {
        const FrameSpec f = FrameSpec::boost(phi);
        const auto vu = f.v_upper(), vl = f.v_lower();
        const auto uu = f.u_upper();
        auto project = [&](std::array<double, 2> a) {
            const double a_dot_v = a[0] * vl[0] + a[1] * vl[1];
            return std::array<double, 2>{-a_dot_v * vu[0], -a_dot_v * vu[1]};
        };
        CHECK(vu[0] * vl[0] + vu[1] * vl[1] == doctest::Approx(-1.0).epsilon(1e-13));
        CHECK(uu[0] * f.u_lower()[0] + uu[1] * f.u_lower()[1] ==
              doctest::Approx(1.0).epsilon(1e-13));
        const auto pv = project(vu);
        CHECK(std::abs(pv[0] - vu[0]) < 1e-12);
        CHECK(std::abs(pv[1] - vu[1]) < 1e-12);
        const auto pu = project(uu);
        CHECK(std::abs(pu[0]) < 1e-12);
        CHECK(std::abs(pu[1]) < 1e-12);
        const std::array<double, 2> a{0.3, -1.7};
        const auto pa = project(a), ppa = project(project(a));
        CHECK(std::abs(ppa[0] - pa[0]) < 1e-12);
        CHECK(std::abs(ppa[1] - pa[1]) < 1e-12);
    }
}

TEST_CASE("frame spec validation") {
    FrameSpec f = FrameSpec::boost(0.8);
    CHECK_NOTHROW(f.validate());
    f.lambda = 2.0;  // inconsistent with exp(0.4)
    CHECK_THROWS_AS(f.validate(), std::invalid_argument);
    FrameSpec g;
    g.lambda = -1;
    g.rapidity = 0;
    CHECK_THROWS_AS(g.validate(), std::invalid_argument);
}

TEST_CASE("covariant action: identity frame reduces to the grid action") {
    const std::size_t n = 16, J = 6;
    const CoinField coin = random_homogeneous_coin(n, 11);
    const Trajectory phi = evolve(random_state(n, 12), coin, J);
    const Trajectory psi = onshell_psi(phi, coin);
    const CovariantTerms id = covariant_action(phi, psi, coin, FrameSpec::identity());
    const SigmaTerms grid = sigma_terms(phi, psi, coin, CoordinateField::grid(n));
    CHECK(std::abs(id.sigma_L() - grid.sigma()) < 1e-12);
    CHECK(id.delta == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("covariant action is frame independent") {
    const std::size_t n = 16, J = 6;
    const CoinField coin = random_homogeneous_coin(n, 21);

    // On shell.
    const Trajectory phi = evolve(random_state(n, 22), coin, J);
    const Trajectory psi = onshell_psi(phi, coin);
    const cd ref = covariant_action(phi, psi, coin, FrameSpec::identity()).sigma_L();
    for (double rap : {0.1, 0.5, 1.0, -1.0}) {
        const CovariantTerms t = covariant_action(phi, psi, coin, FrameSpec::boost(rap));
        CHECK(std::abs(t.sigma_L() - ref) < 1e-10);
        CHECK(t.delta == doctest::Approx(1.0).epsilon(1e-13));
    }

    // Off shell, Psi independent: invariance is algebraic, not dynamical.
    const Trajectory phi_o = random_offshell(n, J + 1, 800);
    const Trajectory psi_o = random_offshell(n, J, 900);
    const cd ref_o = covariant_action(phi_o, psi_o, coin, FrameSpec::identity()).sigma_L();
    for (double rap : {0.5, -0.8}) {
        CHECK(std::abs(covariant_action(phi_o, psi_o, coin, FrameSpec::boost(rap)).sigma_L() -
                       ref_o) < 1e-10);
    }
}

TEST_CASE("stress-energy grid components are the conserved densities") {
    const std::size_t n = 16;
    const CoinField coin = random_homogeneous_coin(n, 31);
    const Trajectory traj = evolve(random_state(n, 32), coin, 4);
    const StressEnergyField t = stress_energy_grid(traj, coin);
    for (std::size_t j = 0; j < traj.slices.size(); ++j) {
        const ScalarField h = energy_density(traj[j], coin);
        const ScalarField pm = momentum_density(traj[j]);
        for (std::size_t p = 0; p < n; ++p) {
            CHECK(std::abs(t.t_time_j[j][p] - h[p]) == 0.0);
            CHECK(std::abs(t.t_space_j[j][p] - pm[p]) == 0.0);
        }
    }

    // Zero state: identically zero tensor.
    Trajectory z;
    z.slices = {SpinorField(n), SpinorField(n)};
    const StressEnergyField tz = stress_energy_grid(z, coin);
    for (std::size_t p = 0; p < n; ++p) CHECK(std::abs(tz.t_time_j[0][p]) == 0.0);

    // Plane waves give site-independent densities.
    SpinorField pw(n);
    for (std::size_t p = 0; p < n; ++p)
        pw.minus[p] = std::polar(1.0 / std::sqrt(double(n)), 2 * pi * 3 * double(p) / double(n));
    Trajectory tp;
    tp.slices = {pw};
    const StressEnergyField tw = stress_energy_grid(tp, coin);
    for (std::size_t p = 1; p < n; ++p) {
        CHECK(std::abs(tw.t_time_j[0][p] - tw.t_time_j[0][0]) < 1e-14);
        CHECK(std::abs(tw.t_space_p[0][p] - tw.t_space_p[0][0]) < 1e-14);
    }
}

TEST_CASE("stress-energy transform: identity, boost mixing, conservation") {
    const std::size_t n = 24, J = 10;
    const CoinField coin = random_homogeneous_coin(n, 41);
    const Trajectory traj = evolve(random_state(n, 42), coin, J);
    const StressEnergyField t = stress_energy_grid(traj, coin);

    const StressEnergyField ti = stress_energy_transform(t, FrameSpec::identity());
    for (std::size_t p = 0; p < n; ++p)
        CHECK(std::abs(ti.t_time_p[2][p] - t.t_time_p[2][p]) < 1e-15);

    // Boost mixes rows with the inverse gradient matrix:
    // T_0^q = cosh(phi) T_j^q - sinh(phi) T_p^q for this map orientation.
    const double phi = 0.5, ch = std::cosh(phi), sh = std::sinh(phi);
    const StressEnergyField tb = stress_energy_transform(t, FrameSpec::boost(phi));
    for (std::size_t j = 0; j < t.t_time_j.size(); ++j)
        for (std::size_t p = 0; p < n; ++p) {
            CHECK(std::abs(tb.t_time_j[j][p] - (ch * t.t_time_j[j][p] - sh * t.t_space_j[j][p])) <
                  1e-13);
            CHECK(std::abs(tb.t_space_p[j][p] - (ch * t.t_space_p[j][p] - sh * t.t_time_p[j][p])) <
                  1e-13);
        }

    // The transformed tensor satisfies the same local balance laws.
    const StressEnergyResiduals r = stress_energy_residuals(tb);
    CHECK(r.time_row < 1e-12);
    CHECK(r.space_row < 1e-12);
    const StressEnergyResiduals rg = stress_energy_residuals(t);
    CHECK(rg.time_row < 1e-12);
    CHECK(rg.space_row < 1e-12);

    StressEnergyField empty;
    CHECK_THROWS_AS(stress_energy_transform(empty, FrameSpec::identity()), std::invalid_argument);
}

TEST_CASE("continuum Dirac Lagrangian in boosted frames") {
    // Smooth plane-wave sample on a periodic (t, x) grid.
    const std::size_t nt = 24, nx = 24;
    DiracField f;
    f.n_t = nt;
    f.n_x = nx;
    f.h = 0.25;
    f.minus.resize(nt * nx);
    f.plus.resize(nt * nx);
    const double k = 2 * pi / (double(nx) * f.h);
    for (std::size_t it = 0; it < nt; ++it)
        for (std::size_t ix = 0; ix < nx; ++ix) {
            const double tt = double(it) * f.h, xx = double(ix) * f.h;
            f.plus[it * nx + ix] = std::polar(1.0, k * (xx - tt));
            f.minus[it * nx + ix] = std::polar(0.7, k * (xx + tt) + 0.3);
        }

    // Massless right-mover: (d_t + d_x) annihilates the plus component exactly
    // even at finite h because the central differences match.
    DiracField rm = f;
    std::fill(rm.minus.begin(), rm.minus.end(), cd(0));
    for (const cd& v : dirac_lagrangian(rm, 0.0, FrameSpec::identity()))
        CHECK(std::abs(v) < 1e-13);

    // The frame triplet drops out: boosted evaluation equals the identity
    // frame pointwise.
    const std::vector<cd> l0 = dirac_lagrangian(f, 0.8, FrameSpec::identity());
    const std::vector<cd> l1 = dirac_lagrangian(f, 0.8, FrameSpec::boost(2.0 * std::log(2.0)));
    const std::vector<cd> l2 = dirac_lagrangian(f, 0.8, FrameSpec::boost(-0.6));
    for (std::size_t i = 0; i < l0.size(); ++i) {
        CHECK(std::abs(l1[i] - l0[i]) < 1e-12);
        CHECK(std::abs(l2[i] - l0[i]) < 1e-12);
    }
}

TEST_CASE("2-bein components under coordinate changes") {
    using Block = std::array<std::array<double, 2>, 2>;
    const Block ident{{{1.0, 0.0}, {0.0, 1.0}}};
    CHECK(two_bein_change(ident, ident) == ident);

    // The boosted-frame block [[cosh, -sinh], [-sinh, cosh]] pulled back along
    // x -> x' = boost(-phi) x is the grid 2-bein.
    const double phi = 0.9, ch = std::cosh(phi), sh = std::sinh(phi);
    const Block e_prime{{{ch, -sh}, {-sh, ch}}};
    const Block jac{{{ch, -sh}, {-sh, ch}}};
    const Block back = two_bein_change(e_prime, jac);
    CHECK(std::abs(back[0][0] - 1.0) < 1e-13);
    CHECK(std::abs(back[0][1]) < 1e-13);
    CHECK(std::abs(back[1][0]) < 1e-13);
    CHECK(std::abs(back[1][1] - 1.0) < 1e-13);

    // Two successive changes compose through the Jacobian product.
    auto boost_block = [](double a) {
        return Block{{{std::cosh(a), std::sinh(a)}, {std::sinh(a), std::cosh(a)}}};
    };
    const Block j1 = boost_block(0.4), j2 = boost_block(-1.1);
    Block j12{};
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c)
            for (int m = 0; m < 2; ++m) j12[r][c] += j1[r][m] * j2[m][c];
    const Block seq = two_bein_change(two_bein_change(e_prime, j1), j2);
    const Block direct = two_bein_change(e_prime, j12);
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) CHECK(std::abs(seq[r][c] - direct[r][c]) < 1e-12);

    const Block singular{{{1.0, 1.0}, {1.0, 1.0}}};
    CHECK_THROWS_AS(two_bein_change(ident, singular), std::domain_error);
}
