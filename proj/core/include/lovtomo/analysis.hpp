#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "lovtomo/grid.hpp"
#include "lovtomo/qstate.hpp"
#include "lovtomo/tomography.hpp"

// Analysis products: Bell-fidelity maps, the highest-fidelity histogram,
// the entangled-pixel fraction, and the lattice-spacing estimate.

namespace lovtomo {

inline constexpr std::array<Bell, 4> kBellOrder{Bell::PhiPlus, Bell::PhiMinus, Bell::PsiPlus,
                                                Bell::PsiMinus};

struct FidelityMap {
    GridGeometry grid;
    std::vector<double> values;  // row-major, in [0, 1]
    Bell target = Bell::PhiPlus;
};

/// Per-pixel fidelity with one Bell state; degenerate pixels carry their
/// maximally mixed fallback (0.25).
FidelityMap bell_fidelity_map(const TomographyMap& map, Bell target);

struct MaxFidelityResult {
    RealMap max_values;
    std::vector<Bell> argmax;  // row-major
};

/// Index of the largest of four fidelities; ties resolve to the earliest
/// label in kBellOrder.
Bell argmax_bell(const std::array<double, 4>& fidelities);

/// Pixel-wise maximum over the four Bell fidelities and its label.
MaxFidelityResult max_bell_fidelity(const TomographyMap& map);

struct FidelityHistogram {
    int n_bins = 0;
    std::vector<std::uint64_t> counts;  // uniform bins over [0,1], last bin right-inclusive
    std::uint64_t total = 0;
};

FidelityHistogram fidelity_histogram(const RealMap& max_map, int n_bins);

struct WitnessSummary {
    double threshold = 0.5;
    double entangled_fraction = 0.0;
    std::uint64_t entangled_pixels = 0;
    std::uint64_t total_pixels = 0;
    /// Argmax-label counts over the entangled pixels, kBellOrder indexing.
    std::array<std::uint64_t, 4> argmax_counts{};
};

/// Fraction of pixels whose max Bell fidelity strictly exceeds the
/// threshold (separable states cannot exceed 0.5).
WitnessSummary entangled_fraction(const MaxFidelityResult& max_result, double threshold);

struct SpacingEstimate {
    double spacing = 0.0;      // m
    double uncertainty = 0.0;  // m
    std::string method;
};

/// Lattice period of an intensity map. The map is detrended by subtracting
/// a Gaussian-blurred copy (removes the beam envelope pedestal), the period
/// along each axis is located as the peak of a Hann-windowed line spectrum
/// with parabolic refinement, and the detection is accepted only when the
/// normalized autocorrelation at that lag exceeds 10% of the central peak.
/// Axis estimates whose ratio is close to 2 are treated as fundamental +
/// second harmonic of one lattice period. spacing = mean of the reconciled
/// axis periods * pixel_pitch; uncertainty = (half their absolute
/// difference + half a pixel) * pixel_pitch. Throws std::runtime_error when
/// no significant periodicity exists.
SpacingEstimate estimate_lattice_spacing(const RealMap& intensity, double pixel_pitch);

/// (mean absolute difference, max absolute difference); throws on geometry
/// mismatch.
std::pair<double, double> map_difference(const FidelityMap& a, const FidelityMap& b);

}  // namespace lovtomo
