#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "lovtomo/grid.hpp"
#include "lovtomo/qstate.hpp"

// Spin-orbit lattice simulator: LOV prism-pair operators evaluated on a
// pixel grid, projection intensities, and Poisson count-frame generation.

namespace lovtomo {

/// Parameters of the birefringent gradient operators
///   U_x = exp(i pi/a (x - x0) sigma_x),  U_y = exp(i pi/a (y - y0) sigma_z)
/// with lattice spacing a = wavelength / (delta_n * tan(incline_theta)).
/// All lengths (x0, y0 included) are in the prism plane.
struct LatticeParams {
    double wavelength = 0.0;     // m
    double delta_n = 0.0;        // birefringence
    double incline_theta = 0.0;  // rad
    double origin_x = 0.0;       // m
    double origin_y = 0.0;       // m
    int n_passes = 2;            // number of LOV prism-pair sets
};

/// Gaussian beam envelope in grid coordinates: weight ~ exp(-2 r^2 / waist^2).
struct BeamEnvelope {
    double waist = 0.0;     // m
    double center_x = 0.0;  // m
    double center_y = 0.0;  // m
};

/// a = wavelength / (delta_n * tan(theta)); throws if the spacing is not
/// finite and positive (theta = 0 or delta_n = 0).
double lattice_spacing(const LatticeParams& params);

Operator2 gradient_unitary_x(double x, const LatticeParams& params);
Operator2 gradient_unitary_y(double y, const LatticeParams& params);

/// (U_x(x) U_y(y))^n_passes.
Operator2 lov_operator(double x, double y, const LatticeParams& params);

/// (A, B) with A = <L|U|L>, B = <R|U|L> for U = lov_operator(x, y).
/// |A|^2 + |B|^2 = 1. Note U|R> = conj(A)|R> - conj(B)|L>: the cross
/// amplitudes of the two circular inputs agree in modulus, not as complex
/// numbers.
std::pair<Complex, Complex> circular_amplitudes(double x, double y, const LatticeParams& params);

/// Normalized per-position two-photon ket (lov_operator x I)|Phi+>.
TwoQubitKet lov_state(double x, double y, const LatticeParams& params);

/// Per-pixel lattice state plus envelope weight; kets are unit norm and the
/// weights are nonnegative and sum to 1 over the grid.
struct SpinOrbitField {
    GridGeometry grid;
    std::vector<TwoQubitKet> kets;
    std::vector<double> weights;
};

/// Evaluates lov_state at every pixel center (grid coordinates scaled by
/// grid.magnification into the prism plane) and the normalized envelope.
SpinOrbitField evaluate_field(const LatticeParams& params, const GridGeometry& grid,
                              const BeamEnvelope& envelope);

/// |(<s| x <i|) |psi>|^2.
double projection_probability(const TwoQubitKet& state, Pol signal, Pol idler);

/// Per-pixel envelope weight times projection probability.
RealMap theoretical_intensity(const SpinOrbitField& field, Pol signal, Pol idler);

/// Index of a label within the tomographic set {H, V, D, R}; throws
/// std::invalid_argument for D/A-complement labels outside the set.
int tomo_label_index(Pol p);

/// Photon counts on a grid for one (signal, idler) polarization setting.
struct CountFrame {
    Pol signal = Pol::H;
    Pol idler = Pol::H;
    GridGeometry grid;
    std::vector<std::uint64_t> counts;
    std::uint64_t exposures = 1;
    std::uint64_t seed = 0;
};

/// Per-pixel count ~ Poisson(mean_total_counts * intensity + background_rate),
/// drawn from a pseudorandom stream keyed on (seed, settings, pixel index):
/// identical inputs reproduce identical frames bit for bit, independent of
/// any parallel partitioning. Settings must come from the tomographic set
/// {H, V, D, R}.
CountFrame simulate_frame(const SpinOrbitField& field, Pol signal, Pol idler,
                          double mean_total_counts, double background_rate,
                          std::uint64_t seed);

// Deterministic PRNG used by the frame simulator; exposed for tests.
struct SplitMix64 {
    std::uint64_t state;

    std::uint64_t next();
    /// Uniform double in the open interval (0, 1).
    double uniform();
};

std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b);

/// Exact Poisson sampler (Knuth below mean 10, transformed rejection above).
std::uint64_t poisson_sample(SplitMix64& rng, double mean);

}  // namespace lovtomo
