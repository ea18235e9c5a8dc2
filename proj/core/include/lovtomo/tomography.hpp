#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "lovtomo/grid.hpp"
#include "lovtomo/lattice.hpp"
#include "lovtomo/qstate.hpp"

// Per-pixel two-qubit state reconstruction from 16-setting count data:
// linear inversion, projection to the physical set, and maximum-likelihood
// refinement under a Poisson count model.

namespace lovtomo {

/// The tomographically complete setting order used everywhere: row-major
/// {H,V,D,R} x {H,V,D,R}, signal label outer. Index k = 4*signal + idler.
inline constexpr std::array<Pol, 4> kTomoBasis{Pol::H, Pol::V, Pol::D, Pol::R};

std::array<std::pair<Pol, Pol>, 16> canonical_settings();

/// Index of a (signal, idler) pair in the canonical order; throws if either
/// label is outside the tomographic set.
int setting_index(Pol signal, Pol idler);

/// The 16 canonical frames of one acquisition; frames[k] holds setting k.
struct MeasurementSet {
    GridGeometry grid;
    std::vector<CountFrame> frames;  // size 16, canonical order
};

/// Validates (all 16 settings present exactly once, identical dimensions)
/// and orders frames canonically. Throws std::invalid_argument naming the
/// missing/duplicate setting or the dimension mismatch.
MeasurementSet make_measurement_set(std::vector<CountFrame> frames);

/// Counts of the 16 canonical settings at one pixel.
using PixelCounts = std::array<double, 16>;

/// 16 real parameters of a lower-triangular T with rho = T^dag T / Tr(T^dag T):
/// t[0..3] the real diagonal, then (Re, Im) of T10, T20, T21, T30, T31, T32.
struct CholeskyParams {
    std::array<double, 16> t{};
};

DensityMatrix density_from_params(const CholeskyParams& p);

/// Lower-triangular factor of a physical rho (T^dag T = rho up to the trace
/// normalization). Adds diagonal jitter 1e-8 when rho is rank deficient.
CholeskyParams params_from_density(const DensityMatrix& rho);

/// n(H,H) + n(H,V) + n(V,H) + n(V,V): total flux over the complete
/// H/V x H/V sub-basis. Zero signals a degenerate pixel.
double estimate_flux(const PixelCounts& counts);

/// The unique Hermitian matrix whose Born probabilities reproduce
/// counts/flux on the 16 canonical projectors. May have negative
/// eigenvalues; physicality is deferred to project_to_physical.
Operator4 linear_inversion(const PixelCounts& counts, double flux);

/// Clamps negative eigenvalues to zero and renormalizes the trace; an
/// all-nonpositive input falls back to the maximally mixed state.
DensityMatrix project_to_physical(const Operator4& hermitian);

/// Poisson negative log-likelihood with constant terms dropped:
///   sum_k [ nbar_k - n_k ln(nbar_k) ],  nbar_k = flux * <Pi_k> + 1e-12.
double negative_log_likelihood(const CholeskyParams& params, const PixelCounts& counts,
                               double flux);

enum class TomoStatus : char {
    Converged = 'C',
    MaxIterations = 'M',
    DegenerateZeroCounts = 'Z',
};

struct PixelTomographyResult {
    DensityMatrix rho;
    double nll = 0.0;
    int iterations = 0;
    double flux_estimate = 0.0;
    TomoStatus status = TomoStatus::Converged;
};

/// Full single-pixel reconstruction: linear inversion seed, physical
/// projection, BFGS maximum-likelihood refinement. Terminates when the
/// relative NLL improvement drops below 1e-10 or after 10000 iterations;
/// the accepted NLL sequence is non-increasing. Counts must be nonnegative
/// and in canonical setting order; an all-zero H/V quadruple returns the
/// maximally mixed state with DegenerateZeroCounts status.
PixelTomographyResult mle_reconstruct(const PixelCounts& counts);

struct TomographyMap {
    GridGeometry grid;
    std::vector<PixelTomographyResult> pixels;  // row-major
};

/// mle_reconstruct at every pixel. Pixels are independent pure
/// computations; the result is identical for any thread count.
/// threads == 0 uses the hardware concurrency.
TomographyMap pixelwise_tomography(const MeasurementSet& set, int threads = 0);

}  // namespace lovtomo
