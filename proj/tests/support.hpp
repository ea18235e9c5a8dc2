#pragma once

// Shared oracles and generators for the test suites. Everything here is
// test-only and deliberately independent of the library code paths it is
// used to check.

#include <array>
#include <cmath>
#include <random>

#include "lovtomo/qstate.hpp"
#include "lovtomo/tomography.hpp"

namespace testsup {

using lovtomo::Complex;
using lovtomo::DensityMatrix;
using lovtomo::Operator2;
using lovtomo::Operator4;
using lovtomo::TwoQubitKet;

inline std::mt19937_64 make_rng(std::uint64_t seed) { return std::mt19937_64(seed); }

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Complex random_complex(std::mt19937_64& rng, double scale = 1.0) {
    return Complex(uniform(rng, -scale, scale), uniform(rng, -scale, scale));
}

// random Hermitian via (A + A^dag)/2
inline Operator4 random_hermitian(std::mt19937_64& rng, double scale = 1.0) {
    Operator4 a;
    for (auto& v : a.m) v = random_complex(rng, scale);
    Operator4 h;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            h.at(i, j) = 0.5 * (a.at(i, j) + std::conj(a.at(j, i)));
    return h;
}

// closed-form single-qubit unitary exp(i theta n.sigma)
inline Operator2 random_unitary2(std::mt19937_64& rng) {
    double theta = uniform(rng, 0.0, 2.0 * M_PI);
    double nz = uniform(rng, -1.0, 1.0);
    double az = uniform(rng, 0.0, 2.0 * M_PI);
    double r = std::sqrt(std::max(0.0, 1.0 - nz * nz));
    double nx = r * std::cos(az), ny = r * std::sin(az);
    double c = std::cos(theta), s = std::sin(theta);
    Operator2 u;
    u.at(0, 0) = Complex(c, s * nz);
    u.at(0, 1) = Complex(s * ny, s * nx);
    u.at(1, 0) = Complex(-s * ny, s * nx);
    u.at(1, 1) = Complex(c, -s * nz);
    return u;
}

// random mixed state rho = T^dag T / Tr(T^dag T), T dense
inline DensityMatrix random_density(std::mt19937_64& rng) {
    Operator4 t;
    for (auto& v : t.m) v = random_complex(rng);
    Operator4 rho;
    double trace = 0.0;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            Complex s(0, 0);
            for (int k = 0; k < 4; ++k) s += std::conj(t.at(k, i)) * t.at(k, j);
            rho.at(i, j) = s;
            if (i == j) trace += s.real();
        }
    for (auto& v : rho.m) v /= trace;
    return DensityMatrix::unchecked(rho);
}

inline TwoQubitKet random_pure_state(std::mt19937_64& rng) {
    TwoQubitKet k;
    double n = 0.0;
    for (auto& c : k.a) {
        c = random_complex(rng);
        n += std::norm(c);
    }
    n = std::sqrt(n);
    for (auto& c : k.a) c /= n;
    return k;
}

inline double max_entry_diff(const Operator4& a, const Operator4& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < 16; ++i) worst = std::max(worst, std::abs(a.m[i] - b.m[i]));
    return worst;
}

inline double max_entry_diff(const Operator2& a, const Operator2& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < 4; ++i) worst = std::max(worst, std::abs(a.m[i] - b.m[i]));
    return worst;
}

// exact expected counts of the 16 canonical settings for a given state
inline lovtomo::PixelCounts expected_counts(const DensityMatrix& rho, double flux) {
    lovtomo::PixelCounts counts{};
    auto settings = lovtomo::canonical_settings();
    for (std::size_t k = 0; k < 16; ++k) {
        TwoQubitKet m = lovtomo::tensor(lovtomo::polarization_ket(settings[k].first),
                                        lovtomo::polarization_ket(settings[k].second));
        Complex p(0, 0);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j)
                p += std::conj(m.a[static_cast<std::size_t>(i)]) * rho.at(i, j) *
                     m.a[static_cast<std::size_t>(j)];
        counts[k] = flux * p.real();
    }
    return counts;
}

// Hermitian square root via the library eigensolver
inline Operator4 hermitian_sqrt(const Operator4& h) {
    auto es = lovtomo::eigen_hermitian(h);
    Operator4 out;
    for (int k = 0; k < 4; ++k) {
        double lam = std::max(0.0, es.values[static_cast<std::size_t>(k)]);
        double s = std::sqrt(lam);
        const auto& v = es.vectors[static_cast<std::size_t>(k)];
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j)
                out.at(i, j) += s * v.a[static_cast<std::size_t>(i)] *
                                std::conj(v.a[static_cast<std::size_t>(j)]);
    }
    return out;
}

// Uhlmann fidelity F(rho, sigma) = (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2
inline double uhlmann_fidelity(const DensityMatrix& rho, const DensityMatrix& sigma) {
    Operator4 s = hermitian_sqrt(rho.matrix());
    Operator4 m = s * sigma.matrix() * s;
    // symmetrize rounding residue before the second decomposition
    Operator4 herm;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) herm.at(i, j) = 0.5 * (m.at(i, j) + std::conj(m.at(j, i)));
    auto es = lovtomo::eigen_hermitian(herm);
    double tr = 0.0;
    for (double lam : es.values) tr += std::sqrt(std::max(0.0, lam));
    return tr * tr;
}

// 0.5 * sum |eigenvalues of rho - sigma|
inline double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma) {
    Operator4 d;
    for (std::size_t i = 0; i < 16; ++i) d.m[i] = rho.matrix().m[i] - sigma.matrix().m[i];
    auto es = lovtomo::eigen_hermitian(d);
    double s = 0.0;
    for (double lam : es.values) s += std::abs(lam);
    return 0.5 * s;
}

}  // namespace testsup
