#include "lovtomo/lattice.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace lovtomo {

RealMap make_map(const GridGeometry& grid, double fill) {
    RealMap map;
    map.grid = grid;
    map.values.assign(grid.pixel_count(), fill);
    return map;
}

int tomo_label_index(Pol p) {
    switch (p) {
        case Pol::H: return 0;
        case Pol::V: return 1;
        case Pol::D: return 2;
        case Pol::R: return 3;
        default:
            throw std::invalid_argument(
                std::string("label outside the tomographic set {H,V,D,R}: ") + pol_to_char(p));
    }
}

double lattice_spacing(const LatticeParams& params) {
    if (!(params.wavelength > 0.0) || !std::isfinite(params.wavelength))
        throw std::invalid_argument("lattice_spacing: wavelength must be positive");
    double denom = params.delta_n * std::tan(params.incline_theta);
    if (!(denom > 0.0) || !std::isfinite(denom))
        throw std::invalid_argument(
            "lattice_spacing: delta_n * tan(theta) must be positive (spacing would be infinite)");
    double a = params.wavelength / denom;
    if (!std::isfinite(a) || !(a > 0.0))
        throw std::invalid_argument("lattice_spacing: spacing is not finite");
    return a;
}

Operator2 gradient_unitary_x(double x, const LatticeParams& params) {
    double a = lattice_spacing(params);
    double phi = M_PI * (x - params.origin_x) / a;
    // exp(i phi sigma_x) = cos(phi) I + i sin(phi) sigma_x
    double c = std::cos(phi), s = std::sin(phi);
    Operator2 u;
    u.m = {Complex(c, 0), Complex(0, s), Complex(0, s), Complex(c, 0)};
    return u;
}

Operator2 gradient_unitary_y(double y, const LatticeParams& params) {
    double a = lattice_spacing(params);
    double psi = M_PI * (y - params.origin_y) / a;
    // exp(i psi sigma_z) = diag(e^{i psi}, e^{-i psi})
    Operator2 u;
    u.m = {std::polar(1.0, psi), Complex(0, 0), Complex(0, 0), std::polar(1.0, -psi)};
    return u;
}

Operator2 lov_operator(double x, double y, const LatticeParams& params) {
    if (params.n_passes < 1) throw std::invalid_argument("lov_operator: n_passes must be >= 1");
    Operator2 step = gradient_unitary_x(x, params) * gradient_unitary_y(y, params);
    Operator2 u = step;
    for (int n = 1; n < params.n_passes; ++n) u = u * step;
    return u;
}

std::pair<Complex, Complex> circular_amplitudes(double x, double y, const LatticeParams& params) {
    Operator2 u = lov_operator(x, y, params);
    Ket2 l = polarization_ket(Pol::L);
    Ket2 r = polarization_ket(Pol::R);
    Ket2 ul = apply(u, l);
    return {inner(l, ul), inner(r, ul)};
}

TwoQubitKet lov_state(double x, double y, const LatticeParams& params) {
    Operator2 u = lov_operator(x, y, params);
    TwoQubitKet phi_plus = bell_state(Bell::PhiPlus);
    TwoQubitKet psi = apply(tensor(u, Operator2::identity()), phi_plus);
    double n = psi.norm();
    for (auto& c : psi.a) c /= n;
    return psi;
}

SpinOrbitField evaluate_field(const LatticeParams& params, const GridGeometry& grid,
                              const BeamEnvelope& envelope) {
    if (grid.width < 1 || grid.height < 1)
        throw std::invalid_argument("evaluate_field: grid must be at least 1x1");
    if (!(grid.pixel_pitch > 0.0))
        throw std::invalid_argument("evaluate_field: pixel_pitch must be positive");
    if (!(envelope.waist > 0.0))
        throw std::invalid_argument("evaluate_field: waist must be positive");

    SpinOrbitField field;
    field.grid = grid;
    field.kets.resize(grid.pixel_count());
    field.weights.resize(grid.pixel_count());

    double wsum = 0.0;
    for (int j = 0; j < grid.height; ++j) {
        for (int i = 0; i < grid.width; ++i) {
            double gx = (i + 0.5) * grid.pixel_pitch;
            double gy = (j + 0.5) * grid.pixel_pitch;
            std::size_t idx = grid.index(i, j);
            field.kets[idx] =
                lov_state(grid.magnification * gx, grid.magnification * gy, params);
            double dx = gx - envelope.center_x;
            double dy = gy - envelope.center_y;
            double w = std::exp(-2.0 * (dx * dx + dy * dy) / (envelope.waist * envelope.waist));
            field.weights[idx] = w;
            wsum += w;
        }
    }
    for (auto& w : field.weights) w /= wsum;
    return field;
}

double projection_probability(const TwoQubitKet& state, Pol signal, Pol idler) {
    TwoQubitKet meas = tensor(polarization_ket(signal), polarization_ket(idler));
    return std::norm(inner(meas, state));
}

RealMap theoretical_intensity(const SpinOrbitField& field, Pol signal, Pol idler) {
    RealMap map = make_map(field.grid);
    TwoQubitKet meas = tensor(polarization_ket(signal), polarization_ket(idler));
    for (std::size_t p = 0; p < field.kets.size(); ++p)
        map.values[p] = field.weights[p] * std::norm(inner(meas, field.kets[p]));
    return map;
}

std::uint64_t SplitMix64::next() {
    state += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

double SplitMix64::uniform() {
    // 52 random bits plus a half-ulp offset keeps the value inside (0, 1)
    return (static_cast<double>(next() >> 12) + 0.5) * 0x1.0p-52;
}

std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) {
    SplitMix64 rng{a ^ (b + 0x9E3779B97F4A7C15ull + (a << 6) + (a >> 2))};
    return rng.next();
}

namespace {

std::uint64_t poisson_knuth(SplitMix64& rng, double mean) {
    double limit = std::exp(-mean);
    std::uint64_t k = 0;
    double p = 1.0;
    do {
        ++k;
        p *= rng.uniform();
    } while (p > limit);
    return k - 1;
}

// Hormann's transformed rejection (PTRS); exact for mean >= 10.
std::uint64_t poisson_ptrs(SplitMix64& rng, double mean) {
    double log_mean = std::log(mean);
    double b = 0.931 + 2.53 * std::sqrt(mean);
    double a = -0.059 + 0.02483 * b;
    double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    double v_r = 0.9277 - 3.6224 / (b - 2.0);
    for (;;) {
        double u = rng.uniform() - 0.5;
        double v = rng.uniform();
        double us = 0.5 - std::abs(u);
        double kf = std::floor((2.0 * a / us + b) * u + mean + 0.43);
        if (us >= 0.07 && v <= v_r) return static_cast<std::uint64_t>(kf);
        if (kf < 0.0 || (us < 0.013 && v > us)) continue;
        double log_accept = kf * log_mean - mean - std::lgamma(kf + 1.0) -
                            std::log(v * inv_alpha / (a / (us * us) + b));
        if (log_accept >= 0.0) return static_cast<std::uint64_t>(kf);
    }
}

}  // namespace

std::uint64_t poisson_sample(SplitMix64& rng, double mean) {
    if (!(mean > 0.0)) return 0;
    if (mean < 10.0) return poisson_knuth(rng, mean);
    return poisson_ptrs(rng, mean);
}

CountFrame simulate_frame(const SpinOrbitField& field, Pol signal, Pol idler,
                          double mean_total_counts, double background_rate,
                          std::uint64_t seed) {
    if (mean_total_counts < 0.0)
        throw std::invalid_argument("simulate_frame: mean_total_counts must be >= 0");
    if (background_rate < 0.0)
        throw std::invalid_argument("simulate_frame: background_rate must be >= 0");
    int setting = 4 * tomo_label_index(signal) + tomo_label_index(idler);

    CountFrame frame;
    frame.signal = signal;
    frame.idler = idler;
    frame.grid = field.grid;
    frame.seed = seed;
    frame.counts.resize(field.grid.pixel_count());

    TwoQubitKet meas = tensor(polarization_ket(signal), polarization_ket(idler));
    std::uint64_t stream = hash_combine(seed, static_cast<std::uint64_t>(setting));
    for (std::size_t p = 0; p < frame.counts.size(); ++p) {
        double mean = mean_total_counts * field.weights[p] * std::norm(inner(meas, field.kets[p])) +
                      background_rate;
        SplitMix64 rng{hash_combine(stream, static_cast<std::uint64_t>(p))};
        frame.counts[p] = poisson_sample(rng, mean);
    }
    return frame;
}

}  // namespace lovtomo
