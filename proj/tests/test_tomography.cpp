#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "lovtomo/io.hpp"
#include "lovtomo/tomography.hpp"
#include "support.hpp"

using namespace lovtomo;

TEST_CASE("canonical setting order") {
    auto settings = canonical_settings();
    CHECK(settings[0] == std::pair{Pol::H, Pol::H});
    CHECK(settings[1] == std::pair{Pol::H, Pol::V});
    CHECK(settings[2] == std::pair{Pol::H, Pol::D});
    CHECK(settings[3] == std::pair{Pol::H, Pol::R});
    CHECK(settings[4] == std::pair{Pol::V, Pol::H});
    CHECK(settings[15] == std::pair{Pol::R, Pol::R});
    CHECK(setting_index(Pol::D, Pol::R) == 11);
    CHECK_THROWS_AS(setting_index(Pol::A, Pol::H), std::invalid_argument);
    CHECK_THROWS_AS(setting_index(Pol::H, Pol::L), std::invalid_argument);
}

TEST_CASE("flux estimation") {
    PixelCounts counts{};
    counts[setting_index(Pol::H, Pol::H)] = 25;
    counts[setting_index(Pol::V, Pol::V)] = 25;
    counts[setting_index(Pol::D, Pol::D)] = 999;  // outside the H/V quadruple
    CHECK(estimate_flux(counts) == doctest::Approx(50.0));

    PixelCounts zeros{};
    zeros[setting_index(Pol::D, Pol::R)] = 7;
    CHECK(estimate_flux(zeros) == 0.0);  // degenerate: H/V quadruple empty

    PixelCounts bad{};
    bad[0] = -1.0;
    CHECK_THROWS_AS(estimate_flux(bad), std::invalid_argument);
}

TEST_CASE("linear inversion on exact probabilities") {
    // maximally mixed
    PixelCounts counts{};
    for (auto& c : counts) c = 0.25 * 1000;
    Operator4 rho = linear_inversion(counts, 1000.0);
    CHECK(testsup::max_entry_diff(rho, DensityMatrix::maximally_mixed().matrix()) < 1e-10);

    // pure Phi+ from forward-computed Born probabilities
    DensityMatrix target = DensityMatrix::pure(bell_state(Bell::PhiPlus));
    PixelCounts exact = testsup::expected_counts(target, 1e6);
    rho = linear_inversion(exact, 1e6);
    CHECK(testsup::max_entry_diff(rho, target.matrix()) < 1e-10);

    CHECK_THROWS_AS(linear_inversion(counts, 0.0), std::invalid_argument);
}

TEST_CASE("linear inversion passes unphysical estimates through") {
    auto rng = testsup::make_rng(31);
    DensityMatrix gen = testsup::random_density(rng);
    PixelCounts counts = testsup::expected_counts(gen, 50.0);
    // Poisson-ish perturbation at low flux frequently sends an eigenvalue negative
    SplitMix64 noise{42};
    bool saw_negative = false;
    for (int attempt = 0; attempt < 50 && !saw_negative; ++attempt) {
        PixelCounts noisy;
        for (std::size_t k = 0; k < 16; ++k)
            noisy[k] = static_cast<double>(poisson_sample(noise, counts[k]));
        double flux = estimate_flux(noisy);
        if (flux <= 0) continue;
        Operator4 est = linear_inversion(noisy, flux);
        auto es = eigen_hermitian(est);
        if (es.values[3] < 0.0) saw_negative = true;
    }
    CHECK(saw_negative);
}

TEST_CASE("projection to the physical set") {
    auto rng = testsup::make_rng(41);

    // already physical: unchanged
    DensityMatrix rho = testsup::random_density(rng);
    DensityMatrix proj = project_to_physical(rho.matrix());
    CHECK(testsup::max_entry_diff(proj.matrix(), rho.matrix()) < 1e-10);

    // clamp and renormalize: diag(1.2, .2, -.2, -.2) -> diag(1.2, .2, 0, 0)/1.4
    Operator4 h;
    h.at(0, 0) = Complex(1.2, 0);
    h.at(1, 1) = Complex(0.2, 0);
    h.at(2, 2) = Complex(-0.2, 0);
    h.at(3, 3) = Complex(-0.2, 0);
    proj = project_to_physical(h);
    CHECK(proj.at(0, 0).real() == doctest::Approx(1.2 / 1.4).epsilon(1e-12));
    CHECK(proj.at(1, 1).real() == doctest::Approx(0.2 / 1.4).epsilon(1e-12));
    CHECK(std::abs(proj.at(2, 2)) < 1e-12);
    CHECK(std::abs(proj.at(3, 3)) < 1e-12);

    // all-nonpositive input falls back to maximally mixed
    Operator4 neg;
    for (int i = 0; i < 4; ++i) neg.at(i, i) = Complex(-1.0, 0);
    proj = project_to_physical(neg);
    CHECK(testsup::max_entry_diff(proj.matrix(), DensityMatrix::maximally_mixed().matrix()) < 1e-12);

    for (int it = 0; it < 1000; ++it) {
        Operator4 rnd = testsup::random_hermitian(rng);
        DensityMatrix p = project_to_physical(rnd);
        auto es = eigen_hermitian(p.matrix());
        CHECK(es.values[3] >= -1e-12);
        CHECK(p.trace_real() == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("cholesky parametrization round trip") {
    auto rng = testsup::make_rng(12);
    for (int it = 0; it < 200; ++it) {
        DensityMatrix rho = testsup::random_density(rng);
        CholeskyParams p = params_from_density(rho);
        DensityMatrix back = density_from_params(p);
        CHECK(testsup::max_entry_diff(back.matrix(), rho.matrix()) < 1e-9);
    }

    // rank-deficient input goes through the jitter path
    DensityMatrix pure = DensityMatrix::pure(bell_state(Bell::PhiMinus));
    CholeskyParams p = params_from_density(pure);
    DensityMatrix back = density_from_params(p);
    CHECK(testsup::max_entry_diff(back.matrix(), pure.matrix()) < 1e-6);
}

TEST_CASE("negative log likelihood") {
    auto rng = testsup::make_rng(77);
    DensityMatrix gen = testsup::random_density(rng);
    const double flux = 1e4;
    PixelCounts counts = testsup::expected_counts(gen, flux);
    CholeskyParams at_gen = params_from_density(gen);
    double base = negative_log_likelihood(at_gen, counts, flux);

    // global minimum among random perturbations when counts equal expectations
    for (int it = 0; it < 1000; ++it) {
        CholeskyParams perturbed = at_gen;
        for (auto& t : perturbed.t) t += testsup::uniform(rng, -0.05, 0.05);
        CHECK(negative_log_likelihood(perturbed, counts, flux) >= base - 1e-9);
    }

    // joint scaling of flux and counts leaves the argmin in place
    PixelCounts scaled;
    for (std::size_t k = 0; k < 16; ++k) scaled[k] = 10.0 * counts[k];
    DensityMatrix fit1 = mle_reconstruct(counts).rho;
    DensityMatrix fit2 = mle_reconstruct(scaled).rho;
    CHECK(testsup::max_entry_diff(fit1.matrix(), fit2.matrix()) < 1e-7);

    // all-zero counts with forced positive flux stays finite
    PixelCounts zeros{};
    double v = negative_log_likelihood(at_gen, zeros, 100.0);
    CHECK(std::isfinite(v));
}

TEST_CASE("mle on noiseless counts") {
    // pure Phi+ at high flux
    DensityMatrix target = DensityMatrix::pure(bell_state(Bell::PhiPlus));
    PixelTomographyResult res = mle_reconstruct(testsup::expected_counts(target, 1e6));
    CHECK(res.status == TomoStatus::Converged);
    CHECK(fidelity(res.rho, bell_state(Bell::PhiPlus)) >= 0.9999);
    CHECK(res.flux_estimate == doctest::Approx(1e6).epsilon(1e-9));

    // maximally mixed
    res = mle_reconstruct(testsup::expected_counts(DensityMatrix::maximally_mixed(), 1e6));
    CHECK(testsup::trace_distance(res.rho, DensityMatrix::maximally_mixed()) <= 1e-3);

    // degenerate pixel
    PixelCounts zeros{};
    res = mle_reconstruct(zeros);
    CHECK(res.status == TomoStatus::DegenerateZeroCounts);
    CHECK(testsup::max_entry_diff(res.rho.matrix(), DensityMatrix::maximally_mixed().matrix()) <
          1e-12);
}

TEST_CASE("mle oracle equivalence over random states") {
    auto rng = testsup::make_rng(314);
    for (int it = 0; it < 40; ++it) {
        DensityMatrix gen = testsup::random_density(rng);
        PixelCounts counts = testsup::expected_counts(gen, 1e6);
        Operator4 lin = linear_inversion(counts, estimate_flux(counts));
        CHECK(testsup::max_entry_diff(lin, gen.matrix()) < 1e-8);
        PixelTomographyResult res = mle_reconstruct(counts);
        CHECK(testsup::uhlmann_fidelity(res.rho, gen) >= 0.9999);
        CHECK(res.rho.hermiticity_residual() < 1e-9);
        CHECK(res.rho.trace_real() == doctest::Approx(1.0).epsilon(1e-9));
        auto es = eigen_hermitian(res.rho.matrix());
        CHECK(es.values[3] >= -1e-9);
    }
}

TEST_CASE("statistical consistency across flux decades") {
    auto rng = testsup::make_rng(2718);
    DensityMatrix gen = testsup::random_density(rng);
    TwoQubitKet probe = testsup::random_pure_state(rng);
    PixelCounts expected = testsup::expected_counts(gen, 1.0);

    auto median_error = [&](double flux, int reps, std::uint64_t seed) {
        std::vector<double> errs;
        for (int r = 0; r < reps; ++r) {
            SplitMix64 noise{hash_combine(seed, static_cast<std::uint64_t>(r))};
            PixelCounts noisy;
            for (std::size_t k = 0; k < 16; ++k)
                noisy[k] = static_cast<double>(poisson_sample(noise, flux * expected[k]));
            if (estimate_flux(noisy) <= 0) {
                errs.push_back(1.0);
                continue;
            }
            DensityMatrix rho = mle_reconstruct(noisy).rho;
            errs.push_back(1.0 - testsup::uhlmann_fidelity(rho, gen));
        }
        std::sort(errs.begin(), errs.end());
        return errs[errs.size() / 2];
    };

    double med2 = median_error(1e2, 30, 1);
    double med4 = median_error(1e4, 30, 2);
    CHECK(med4 < med2);
    (void)probe;
}

TEST_CASE("measurement set validation") {
    GridGeometry g{4, 4, 1e-5, 1.0};
    auto make_frame = [&](Pol s, Pol i) {
        CountFrame f;
        f.signal = s;
        f.idler = i;
        f.grid = g;
        f.counts.assign(g.pixel_count(), 5);
        return f;
    };

    std::vector<CountFrame> frames;
    for (auto [s, i] : canonical_settings()) frames.push_back(make_frame(s, i));
    MeasurementSet set = make_measurement_set(frames);
    CHECK(set.grid.width == 4);

    // missing one
    std::vector<CountFrame> fifteen(frames.begin(), frames.end() - 1);
    CHECK_THROWS_WITH_AS(make_measurement_set(fifteen), doctest::Contains("expected 16 frames"),
                         std::invalid_argument);

    // duplicate
    std::vector<CountFrame> dup = fifteen;
    dup.push_back(make_frame(Pol::H, Pol::H));
    CHECK_THROWS_WITH_AS(make_measurement_set(dup), doctest::Contains("duplicate setting HH"),
                         std::invalid_argument);

    // dimension mismatch
    std::vector<CountFrame> mixed = frames;
    mixed[3].grid.width = 8;
    mixed[3].counts.assign(mixed[3].grid.pixel_count(), 1);
    CHECK_THROWS_WITH_AS(make_measurement_set(mixed), doctest::Contains("mismatched dimensions"),
                         std::invalid_argument);
}

TEST_CASE("pixelwise tomography is deterministic and thread independent") {
    SimulationConfig c = default_config();
    c.width = 6;
    c.height = 5;
    SpinOrbitField field = evaluate_field(c.lattice(), c.grid(), c.beam());

    std::vector<CountFrame> frames;
    for (auto [s, i] : canonical_settings())
        frames.push_back(simulate_frame(field, s, i, 2e5, 1.0, 99));
    MeasurementSet set = make_measurement_set(frames);

    TomographyMap seq = pixelwise_tomography(set, 1);
    TomographyMap par = pixelwise_tomography(set, 4);
    REQUIRE(seq.pixels.size() == par.pixels.size());
    for (std::size_t p = 0; p < seq.pixels.size(); ++p) {
        CHECK(testsup::max_entry_diff(seq.pixels[p].rho.matrix(), par.pixels[p].rho.matrix()) == 0.0);
        CHECK(seq.pixels[p].status == par.pixels[p].status);
        CHECK(seq.pixels[p].iterations == par.pixels[p].iterations);
    }
}

TEST_CASE("scalar noiseless pipeline: 1x1 grid") {
    SimulationConfig c = default_config();
    c.width = 1;
    c.height = 1;
    // place the single pixel on the gradient origin
    c.origin_x = 0.5 * c.pixel_pitch;
    c.origin_y = 0.5 * c.pixel_pitch;
    SpinOrbitField field = evaluate_field(c.lattice(), c.grid(), c.beam());

    std::vector<CountFrame> frames;
    for (auto [s, i] : canonical_settings()) {
        CountFrame f;
        f.signal = s;
        f.idler = i;
        f.grid = c.grid();
        double p = projection_probability(field.kets[0], s, i);
        f.counts.assign(1, static_cast<std::uint64_t>(std::llround(1e6 * p)));
        frames.push_back(f);
    }
    TomographyMap map = pixelwise_tomography(make_measurement_set(frames), 1);
    CHECK(fidelity(map.pixels[0].rho, bell_state(Bell::PhiPlus)) >= 0.9999);
}
