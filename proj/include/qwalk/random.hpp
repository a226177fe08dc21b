#pragma once

#include <cstdint>
#include <random>

#include "qwalk/field.hpp"
#include "qwalk/mat2.hpp"

namespace qwalk {

/// Haar-distributed U(2) matrix via QR of a complex Gaussian matrix
/// (Ginibre ensemble), with the R diagonal phases divided out.
inline Mat2 haar_unitary(std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    cd z00(g(rng), g(rng)), z01(g(rng), g(rng));
    cd z10(g(rng), g(rng)), z11(g(rng), g(rng));

    // Gram-Schmidt on the two columns.
    double n0 = std::sqrt(std::norm(z00) + std::norm(z10));
    cd q00 = z00 / n0, q10 = z10 / n0;
    cd proj = std::conj(q00) * z01 + std::conj(q10) * z11;
    cd r01 = z01 - proj * q00, r11 = z11 - proj * q10;
    double n1 = std::sqrt(std::norm(r01) + std::norm(r11));
    cd q01 = r01 / n1, q11 = r11 / n1;

    // R_00 = n0 > 0 already; fix the second column's phase from <q1|z1>.
    cd r = std::conj(q01) * z01 + std::conj(q11) * z11;
    cd ph = r / std::abs(r);
    return {{q00, q01 / ph, q10, q11 / ph}};
}

inline CoinField random_homogeneous_coin(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return CoinField::uniform(n, haar_unitary(rng));
}

inline CoinField random_site_coin(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<Mat2> ws(n);
    for (auto& w : ws) w = haar_unitary(rng);
    return CoinField::site_dependent(std::move(ws));
}

/// Normalized random state with independent Gaussian components.
inline SpinorField random_state(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    SpinorField s(n);
    for (std::size_t p = 0; p < n; ++p) {
        s.minus[p] = cd(g(rng), g(rng));
        s.plus[p] = cd(g(rng), g(rng));
    }
    s *= 1.0 / std::sqrt(s.norm2());
    return s;
}

}  // namespace qwalk
