#pragma once

#include <cstddef>
#include <vector>

namespace lovtomo {

/// Pixel grid of the detection plane. Pixel (i, j) has its center at
/// ((i + 0.5) * pixel_pitch, (j + 0.5) * pixel_pitch) in grid coordinates;
/// `magnification` maps grid coordinates to the prism plane where the
/// lattice operators are defined (prism = magnification * grid).
struct GridGeometry {
    int width = 0;
    int height = 0;
    double pixel_pitch = 0.0;     // m per pixel
    double magnification = 1.0;

    std::size_t pixel_count() const {
        return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    }
    std::size_t index(int i, int j) const {
        return static_cast<std::size_t>(j) * static_cast<std::size_t>(width) +
               static_cast<std::size_t>(i);
    }
    bool same_shape(const GridGeometry& o) const {
        return width == o.width && height == o.height;
    }
};

/// Real-valued image on a grid, row-major (row j, then column i).
struct RealMap {
    GridGeometry grid;
    std::vector<double> values;

    double& at(int i, int j) { return values[grid.index(i, j)]; }
    double at(int i, int j) const { return values[grid.index(i, j)]; }
};

RealMap make_map(const GridGeometry& grid, double fill = 0.0);

}  // namespace lovtomo
