#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "lovtomo/io.hpp"
#include "lovtomo/lattice.hpp"
#include "support.hpp"

using namespace lovtomo;

namespace {

LatticeParams simple_params(double spacing = 8.08e-5, int n_passes = 2) {
    LatticeParams p;
    p.wavelength = 808e-9;
    p.delta_n = 808e-9 / spacing;  // theta 45 deg
    p.incline_theta = M_PI / 4.0;
    p.n_passes = n_passes;
    return p;
}

}  // namespace

TEST_CASE("lattice spacing") {
    LatticeParams p;
    p.wavelength = 808e-9;
    p.delta_n = 1e-2;
    p.incline_theta = M_PI / 4.0;
    CHECK(lattice_spacing(p) == doctest::Approx(8.08e-5).epsilon(1e-12));
    p.delta_n = 2e-2;
    CHECK(lattice_spacing(p) == doctest::Approx(4.04e-5).epsilon(1e-12));

    p.delta_n = 0.0;
    CHECK_THROWS_AS(lattice_spacing(p), std::invalid_argument);
    p.delta_n = 1e-2;
    p.incline_theta = 0.0;
    CHECK_THROWS_AS(lattice_spacing(p), std::invalid_argument);
}

TEST_CASE("default configuration reproduces the published detector-plane spacing") {
    SimulationConfig c = default_config();
    double a = lattice_spacing(c.lattice()) / c.magnification;
    CHECK(a == doctest::Approx(0.519e-3).epsilon(1e-12));
    CHECK(c.width == 140);
    CHECK(c.height == 140);
    CHECK(c.pixel_pitch == doctest::Approx(13e-6));
}

TEST_CASE("gradient unitaries") {
    LatticeParams p = simple_params();
    double a = lattice_spacing(p);

    CHECK(testsup::max_entry_diff(gradient_unitary_x(p.origin_x, p), Operator2::identity()) < 1e-12);
    CHECK(testsup::max_entry_diff(gradient_unitary_y(p.origin_y, p), Operator2::identity()) < 1e-12);

    // half period: i*sigma_x and diag(i, -i)
    Operator2 ux = gradient_unitary_x(p.origin_x + a / 2, p);
    CHECK(std::abs(ux.at(0, 1) - Complex(0, 1)) < 1e-12);
    CHECK(std::abs(ux.at(0, 0)) < 1e-12);
    Operator2 uy = gradient_unitary_y(p.origin_y + a / 2, p);
    CHECK(std::abs(uy.at(0, 0) - Complex(0, 1)) < 1e-12);
    CHECK(std::abs(uy.at(1, 1) - Complex(0, -1)) < 1e-12);

    // full period: U_x picks up a sign
    Operator2 ux_a = gradient_unitary_x(p.origin_x + a, p);
    CHECK(std::abs(ux_a.at(0, 0) - Complex(-1, 0)) < 1e-12);
    CHECK(std::abs(ux_a.at(1, 1) - Complex(-1, 0)) < 1e-12);

    auto rng = testsup::make_rng(21);
    double worst = 0.0;
    for (int it = 0; it < 1000; ++it) {
        double y = testsup::uniform(rng, -5 * a, 5 * a);
        worst = std::max(worst, unitarity_residual(gradient_unitary_y(y, p)));
        double x = testsup::uniform(rng, -5 * a, 5 * a);
        worst = std::max(worst, unitarity_residual(gradient_unitary_x(x, p)));
    }
    CHECK(worst < 1e-12);
}

TEST_CASE("lov operator periodicity and sign structure") {
    LatticeParams p = simple_params();
    double a = lattice_spacing(p);

    CHECK(testsup::max_entry_diff(lov_operator(p.origin_x, p.origin_y, p), Operator2::identity()) <
          1e-12);

    auto rng = testsup::make_rng(5);
    for (int it = 0; it < 200; ++it) {
        double x = testsup::uniform(rng, -3 * a, 3 * a);
        double y = testsup::uniform(rng, -3 * a, 3 * a);
        CHECK(testsup::max_entry_diff(lov_operator(x + a, y, p), lov_operator(x, y, p)) < 1e-12);
        CHECK(testsup::max_entry_diff(lov_operator(x, y + a, p), lov_operator(x, y, p)) < 1e-12);
        CHECK(unitarity_residual(lov_operator(x, y, p)) < 1e-12);

        // U_x(x + a) = -U_x(x)
        Operator2 ux = gradient_unitary_x(x, p);
        Operator2 ux_shift = gradient_unitary_x(x + a, p);
        for (std::size_t e = 0; e < 4; ++e)
            CHECK(std::abs(ux_shift.m[e] + ux.m[e]) < 1e-12);
    }

    // odd pass count: period doubles to 2a
    LatticeParams odd = simple_params(8.08e-5, 1);
    double dx = 0.37 * a;
    CHECK(testsup::max_entry_diff(lov_operator(dx + 2 * a, 0.1 * a, odd),
                                  lov_operator(dx, 0.1 * a, odd)) < 1e-12);
}

TEST_CASE("circular amplitudes") {
    LatticeParams p = simple_params();
    double a = lattice_spacing(p);

    auto [a0, b0] = circular_amplitudes(p.origin_x, p.origin_y, p);
    CHECK(std::abs(a0 - Complex(1, 0)) < 1e-12);
    CHECK(std::abs(b0) < 1e-12);

    Ket2 l = polarization_ket(Pol::L);
    Ket2 r = polarization_ket(Pol::R);
    auto rng = testsup::make_rng(17);
    for (int it = 0; it < 1000; ++it) {
        double x = testsup::uniform(rng, -3 * a, 3 * a);
        double y = testsup::uniform(rng, -3 * a, 3 * a);
        auto [ampA, ampB] = circular_amplitudes(x, y, p);
        CHECK(std::norm(ampA) + std::norm(ampB) == doctest::Approx(1.0).epsilon(1e-12));

        // the det-1 unitary column structure ties the two circular inputs
        // together by conjugation: U|R> = conj(A)|R> - conj(B)|L>
        Operator2 u = lov_operator(x, y, p);
        Ket2 ur = apply(u, r);
        CHECK(std::abs(inner(r, ur) - std::conj(ampA)) < 1e-12);
        CHECK(std::abs(inner(l, ur) + std::conj(ampB)) < 1e-12);
        CHECK(std::abs(std::abs(inner(r, ur)) - std::abs(ampA)) < 1e-12);
        CHECK(std::abs(std::abs(inner(l, ur)) - std::abs(ampB)) < 1e-12);
    }
}

TEST_CASE("lov state") {
    LatticeParams p = simple_params();
    double a = lattice_spacing(p);

    TwoQubitKet at_origin = lov_state(p.origin_x, p.origin_y, p);
    CHECK(std::abs(inner(bell_state(Bell::PhiPlus), at_origin)) == doctest::Approx(1.0).epsilon(1e-12));

    // operator periodicity carries over to the state
    double f_origin = fidelity(DensityMatrix::pure(at_origin), bell_state(Bell::PhiPlus));
    double f_shift = fidelity(DensityMatrix::pure(lov_state(p.origin_x + a, p.origin_y, p)),
                              bell_state(Bell::PhiPlus));
    CHECK(f_origin == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(f_shift == doctest::Approx(1.0).epsilon(1e-12));

    auto rng = testsup::make_rng(29);
    for (int it = 0; it < 1000; ++it) {
        double x = testsup::uniform(rng, -3 * a, 3 * a);
        double y = testsup::uniform(rng, -3 * a, 3 * a);
        TwoQubitKet psi = lov_state(x, y, p);
        CHECK(psi.norm() == doctest::Approx(1.0).epsilon(1e-12));
        Operator2 idler = partial_trace(DensityMatrix::pure(psi), Subsystem::Signal);
        CHECK(std::abs(idler.at(0, 0) - Complex(0.5, 0)) < 1e-12);
        CHECK(std::abs(idler.at(1, 1) - Complex(0.5, 0)) < 1e-12);
        CHECK(std::abs(idler.at(0, 1)) < 1e-12);
        CHECK(std::abs(idler.at(1, 0)) < 1e-12);
    }
}

TEST_CASE("field evaluation") {
    LatticeParams p = simple_params();

    // 1x1 grid centered on the origin
    GridGeometry g1{1, 1, 1e-3, 1.0};
    LatticeParams centered = p;
    centered.origin_x = g1.pixel_pitch / 2;
    centered.origin_y = g1.pixel_pitch / 2;
    BeamEnvelope env{1.0, centered.origin_x, centered.origin_y};
    SpinOrbitField f1 = evaluate_field(centered, g1, env);
    CHECK(f1.weights[0] == doctest::Approx(1.0));
    CHECK(std::abs(inner(bell_state(Bell::PhiPlus), f1.kets[0])) == doctest::Approx(1.0).epsilon(1e-12));

    SimulationConfig c = default_config();
    SpinOrbitField field = evaluate_field(c.lattice(), c.grid(), c.beam());
    double wsum = 0.0;
    for (double w : field.weights) {
        CHECK(w >= 0.0);
        wsum += w;
    }
    CHECK(wsum == doctest::Approx(1.0).epsilon(1e-9));
    for (const auto& k : field.kets) CHECK(k.norm() == doctest::Approx(1.0).epsilon(1e-12));

    // shifting the gradient origin by one full period changes nothing
    double a = lattice_spacing(c.lattice());
    SimulationConfig shifted = c;
    shifted.origin_x += a;
    shifted.origin_y += a;
    SpinOrbitField field2 = evaluate_field(shifted.lattice(), shifted.grid(), shifted.beam());
    double worst = 0.0;
    for (std::size_t i = 0; i < field.kets.size(); ++i)
        for (std::size_t q = 0; q < 4; ++q)
            worst = std::max(worst, std::abs(field.kets[i].a[q] - field2.kets[i].a[q]));
    CHECK(worst < 1e-12);
}

TEST_CASE("projection probabilities") {
    TwoQubitKet phi_plus = bell_state(Bell::PhiPlus);
    CHECK(projection_probability(phi_plus, Pol::H, Pol::H) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(projection_probability(phi_plus, Pol::H, Pol::V) == doctest::Approx(0.0).epsilon(1e-12));
    // Phi+ = (|LR> + |RL>)/sqrt2 has no |RR> component
    CHECK(projection_probability(phi_plus, Pol::R, Pol::R) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("intensity maps and projector completeness") {
    SimulationConfig c = default_config();
    c.width = 60;
    c.height = 48;
    SpinOrbitField field = evaluate_field(c.lattice(), c.grid(), c.beam());

    auto check_pair_completeness = [&](Pol s1, Pol s2, Pol i1, Pol i2) {
        RealMap sum = make_map(field.grid);
        for (Pol s : {s1, s2})
            for (Pol i : {i1, i2}) {
                RealMap m = theoretical_intensity(field, s, i);
                for (std::size_t p = 0; p < sum.values.size(); ++p) sum.values[p] += m.values[p];
            }
        double worst = 0.0;
        for (std::size_t p = 0; p < sum.values.size(); ++p)
            worst = std::max(worst, std::abs(sum.values[p] - field.weights[p]));
        CHECK(worst < 1e-9);
    };
    check_pair_completeness(Pol::H, Pol::V, Pol::H, Pol::V);
    check_pair_completeness(Pol::D, Pol::A, Pol::D, Pol::A);
    check_pair_completeness(Pol::R, Pol::L, Pol::R, Pol::L);

    for (const auto& v : theoretical_intensity(field, Pol::R, Pol::L).values) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
}

TEST_CASE("frame simulation") {
    SimulationConfig c = default_config();
    c.width = 40;
    c.height = 40;
    SpinOrbitField field = evaluate_field(c.lattice(), c.grid(), c.beam());

    CountFrame zero = simulate_frame(field, Pol::H, Pol::H, 0.0, 0.0, 3);
    for (auto v : zero.counts) CHECK(v == 0);

    // identical inputs give identical frames
    CountFrame f1 = simulate_frame(field, Pol::D, Pol::R, 5e4, 1.0, 123);
    CountFrame f2 = simulate_frame(field, Pol::D, Pol::R, 5e4, 1.0, 123);
    CHECK(f1.counts == f2.counts);
    CountFrame f3 = simulate_frame(field, Pol::D, Pol::R, 5e4, 1.0, 124);
    CHECK(f1.counts != f3.counts);

    // total counts match the Poisson expectation within 5 sigma
    RealMap intensity = theoretical_intensity(field, Pol::D, Pol::R);
    double expected = 0.0;
    for (double v : intensity.values) expected += 5e4 * v;
    expected += 1.0 * static_cast<double>(field.grid.pixel_count());
    double total = 0.0;
    for (auto v : f1.counts) total += static_cast<double>(v);
    CHECK(std::abs(total - expected) < 5.0 * std::sqrt(expected));

    CHECK_THROWS_AS(simulate_frame(field, Pol::A, Pol::H, 10.0, 0.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(simulate_frame(field, Pol::H, Pol::H, -1.0, 0.0, 1), std::invalid_argument);
}

TEST_CASE("poisson sampler statistics") {
    // mean/variance agreement in both the Knuth and PTRS regimes
    for (double mean : {0.5, 4.0, 40.0, 4000.0}) {
        SplitMix64 rng{hash_combine(2024, static_cast<std::uint64_t>(mean))};
        const int n = 20000;
        double sum = 0.0, sq = 0.0;
        for (int i = 0; i < n; ++i) {
            double v = static_cast<double>(poisson_sample(rng, mean));
            sum += v;
            sq += v * v;
        }
        double m = sum / n;
        double var = sq / n - m * m;
        CHECK(std::abs(m - mean) < 5.0 * std::sqrt(mean / n));
        CHECK(var == doctest::Approx(mean).epsilon(0.1));
    }
}
