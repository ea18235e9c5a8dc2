#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "lovtomo/grid.hpp"
#include "lovtomo/lattice.hpp"
#include "lovtomo/tomography.hpp"

// On-disk formats and the flat key=value configuration. All writers format
// floating-point values with shortest round-trip precision, so identical
// data serializes to identical bytes.

namespace lovtomo {

/// Full pipeline configuration. origin_* and beam_center_* are in grid
/// coordinates; lattice() converts the origin into the prism plane through
/// the magnification. Defaults reproduce the published geometry: 140x140
/// pixels of 13 um, detector-plane lattice spacing 0.519 mm (theta = 45 deg
/// and delta_n back-computed; only the ratio matters), origin and beam
/// center at the grid center, waist 0.45x the grid side.
struct SimulationConfig {
    double wavelength = 808e-9;
    double delta_n = 808e-9 / 0.519e-3;      // theta at 45 deg makes a = 0.519 mm
    double incline_theta = 0.78539816339744831;  // pi/4
    int n_passes = 2;
    int width = 140;
    int height = 140;
    double pixel_pitch = 13e-6;
    double magnification = 1.0;
    double origin_x = 0.5 * 140 * 13e-6;
    double origin_y = 0.5 * 140 * 13e-6;
    double waist = 0.45 * 140 * 13e-6;
    double beam_center_x = 0.5 * 140 * 13e-6;
    double beam_center_y = 0.5 * 140 * 13e-6;
    double mean_total_counts = 1e6;
    double background_rate = 0.0;
    std::uint64_t seed = 1;
    std::uint64_t exposures = 2000;
    std::string output_dir = "out";

    GridGeometry grid() const;
    BeamEnvelope beam() const;
    LatticeParams lattice() const;
};

SimulationConfig default_config();

/// Parses "key = value" lines ('#' comments, blank lines allowed). Unknown
/// or duplicate keys and invariant violations throw std::invalid_argument
/// naming the offending key. Omitted keys keep their defaults; an omitted
/// origin or beam center follows the (possibly overridden) grid center.
SimulationConfig parse_config(std::istream& in);
SimulationConfig parse_config_file(const std::string& path);

/// Canonical serialization; parse(serialize(c)) == c exactly.
std::string serialize_config(const SimulationConfig& config);

/// Canonical frame filename, e.g. "frame_HD.txt".
std::string frame_filename(Pol signal, Pol idler);
std::string intensity_filename(Pol signal, Pol idler);

// FRAME format: text header (FRAME 1, width, height, signal, idler,
// exposures, seed) followed by row-major whitespace-separated counts.
void write_frame(std::ostream& out, const CountFrame& frame);
void write_frame_file(const std::string& path, const CountFrame& frame);
CountFrame read_frame(std::istream& in);
CountFrame read_frame_file(const std::string& path);

// TOMO format: "TOMO 1" header with dimensions, then one line per pixel
// (row-major): status char and 16 reals -- the four real diagonal entries
// rho00..rho33 followed by (Re, Im) of the upper-triangle entries in the
// order (0,1),(0,2),(0,3),(1,2),(1,3),(2,3).
void write_tomo(std::ostream& out, const TomographyMap& map);
void write_tomo_file(const std::string& path, const TomographyMap& map);
/// Reads a TOMO file; per-pixel diagnostics (nll, iterations, flux) are not
/// serialized and read back as zero. Validates physicality per pixel.
TomographyMap read_tomo(std::istream& in);
TomographyMap read_tomo_file(const std::string& path);

// CSV map format: geometry header row "width,height,pixel_pitch_m", one
// values row, then height rows of width comma-separated values.
void write_map_csv(std::ostream& out, const RealMap& map);
void write_map_csv_file(const std::string& path, const RealMap& map);
RealMap read_map_csv(std::istream& in);
RealMap read_map_csv_file(const std::string& path);

void write_bytes_file(const std::string& path, const std::vector<std::uint8_t>& bytes);

/// Shortest round-trip decimal representation of a double.
std::string format_double(double v);

}  // namespace lovtomo
