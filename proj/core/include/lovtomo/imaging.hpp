#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "lovtomo/grid.hpp"

// Display-path post-processing: background subtraction, Gaussian smoothing,
// normalization and PGM/PPM export. Display output never feeds back into
// tomography, which consumes raw CountFrames only.

namespace lovtomo {

using RealImage = RealMap;

enum class BackgroundMethod { CornerMedian, FixedValue };

struct FilterConfig {
    BackgroundMethod background_method = BackgroundMethod::CornerMedian;
    double fixed_background = 0.0;
    double sigma = 1.0;       // px
    bool adaptive = false;
    std::string colormap = "gray";
};

/// Subtracts the background level and clamps at zero. The corner-median
/// method uses the median over the four 4x4 corner blocks and requires an
/// image of at least 8x8.
RealImage subtract_background(const RealImage& img, const FilterConfig& config);

/// Separable Gaussian convolution, kernel truncated at +-ceil(3 sigma) and
/// renormalized to unit sum, edges handled by reflection.
RealImage gaussian_filter(const RealImage& img, double sigma);

/// sigma = clamp(5 / sqrt(median of the top-decile-intensity pixels), 0.5, 3.0):
/// lower counts (noisier images) get more smoothing.
double adaptive_sigma(const RealImage& img);

/// Divides by the maximum; throws std::runtime_error on an all-zero image.
RealImage normalize(const RealImage& img);

struct ColorRamp {
    std::array<std::array<std::uint8_t, 3>, 256> rgb{};
};

/// Black -> red -> yellow -> white, 256 entries:
/// t = i/255, R = min(1,3t), G = clamp(3t-1), B = clamp(3t-2), each * 255.
ColorRamp heat_ramp();

/// PGM export of a normalized image (values in [0,1]); P5 binary by default,
/// P2 when ascii is set. Header is exactly "P5\n<w> <h>\n255\n". Throws on
/// out-of-range values.
std::vector<std::uint8_t> render_pgm(const RealImage& img, bool ascii = false);

/// PPM export through a 256-entry color ramp; P6 binary or P3 ASCII.
std::vector<std::uint8_t> render_ppm(const RealImage& img, const ColorRamp& ramp,
                                     bool ascii = false);

}  // namespace lovtomo
