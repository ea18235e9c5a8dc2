#include "lovtomo/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace lovtomo {

namespace {

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file for reading: " + path);
    return in;
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open file for writing: " + path);
    return out;
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_double_value(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    std::size_t used = 0;
    double v;
    try {
        v = std::stod(t, &used);
    } catch (const std::exception&) {
        throw std::invalid_argument("config key " + key + ": invalid numeric value '" + t + "'");
    }
    if (used != t.size() || !std::isfinite(v))
        throw std::invalid_argument("config key " + key + ": invalid numeric value '" + t + "'");
    return v;
}

std::uint64_t parse_u64_value(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc{} || ptr != t.data() + t.size())
        throw std::invalid_argument("config key " + key + ": invalid integer value '" + t + "'");
    return v;
}

int parse_int_value(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    int v = 0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc{} || ptr != t.data() + t.size())
        throw std::invalid_argument("config key " + key + ": invalid integer value '" + t + "'");
    return v;
}

void expect_header_line(std::istream& in, const std::string& want, const std::string& what) {
    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error(what + ": unexpected end of file, expected '" + want + "'");
    if (trim(line) != want)
        throw std::runtime_error(what + ": expected '" + want + "', got '" + trim(line) + "'");
}

std::string header_value(std::istream& in, const std::string& key, const std::string& what) {
    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error(what + ": unexpected end of file, expected '" + key + "'");
    std::istringstream ls(line);
    std::string k;
    ls >> k;
    if (k != key) throw std::runtime_error(what + ": expected header key '" + key + "', got '" + k + "'");
    std::string v;
    std::getline(ls, v);
    v = trim(v);
    if (v.empty()) throw std::runtime_error(what + ": empty value for header key '" + key + "'");
    return v;
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

GridGeometry SimulationConfig::grid() const {
    GridGeometry g;
    g.width = width;
    g.height = height;
    g.pixel_pitch = pixel_pitch;
    g.magnification = magnification;
    return g;
}

BeamEnvelope SimulationConfig::beam() const {
    return BeamEnvelope{waist, beam_center_x, beam_center_y};
}

LatticeParams SimulationConfig::lattice() const {
    LatticeParams p;
    p.wavelength = wavelength;
    p.delta_n = delta_n;
    p.incline_theta = incline_theta;
    p.origin_x = magnification * origin_x;
    p.origin_y = magnification * origin_y;
    p.n_passes = n_passes;
    return p;
}

SimulationConfig default_config() {
    return SimulationConfig{};
}

SimulationConfig parse_config(std::istream& in) {
    SimulationConfig c = default_config();
    bool have_origin_x = false, have_origin_y = false;
    bool have_center_x = false, have_center_y = false;
    std::map<std::string, bool> seen;

    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": expected 'key = value', got '" + line + "'");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw std::invalid_argument("config line " + std::to_string(lineno) + ": empty key");
        if (seen[key])
            throw std::invalid_argument("config key " + key + ": duplicate assignment");
        seen[key] = true;

        if (key == "wavelength") c.wavelength = parse_double_value(key, value);
        else if (key == "delta_n") c.delta_n = parse_double_value(key, value);
        else if (key == "incline_theta") c.incline_theta = parse_double_value(key, value);
        else if (key == "n_passes") c.n_passes = parse_int_value(key, value);
        else if (key == "width") c.width = parse_int_value(key, value);
        else if (key == "height") c.height = parse_int_value(key, value);
        else if (key == "pixel_pitch") c.pixel_pitch = parse_double_value(key, value);
        else if (key == "magnification") c.magnification = parse_double_value(key, value);
        else if (key == "origin_x") { c.origin_x = parse_double_value(key, value); have_origin_x = true; }
        else if (key == "origin_y") { c.origin_y = parse_double_value(key, value); have_origin_y = true; }
        else if (key == "waist") c.waist = parse_double_value(key, value);
        else if (key == "beam_center_x") { c.beam_center_x = parse_double_value(key, value); have_center_x = true; }
        else if (key == "beam_center_y") { c.beam_center_y = parse_double_value(key, value); have_center_y = true; }
        else if (key == "mean_total_counts") c.mean_total_counts = parse_double_value(key, value);
        else if (key == "background_rate") c.background_rate = parse_double_value(key, value);
        else if (key == "seed") c.seed = parse_u64_value(key, value);
        else if (key == "exposures") c.exposures = parse_u64_value(key, value);
        else if (key == "output_dir") {
            if (value.empty())
                throw std::invalid_argument("config key output_dir: empty value");
            c.output_dir = value;
        } else {
            throw std::invalid_argument("unknown config key: " + key);
        }
    }

    // unspecified origin and beam center follow the configured grid center
    if (!have_origin_x) c.origin_x = 0.5 * c.width * c.pixel_pitch;
    if (!have_origin_y) c.origin_y = 0.5 * c.height * c.pixel_pitch;
    if (!have_center_x) c.beam_center_x = 0.5 * c.width * c.pixel_pitch;
    if (!have_center_y) c.beam_center_y = 0.5 * c.height * c.pixel_pitch;

    if (c.width < 1) throw std::invalid_argument("config key width: must be >= 1");
    if (c.height < 1) throw std::invalid_argument("config key height: must be >= 1");
    if (!(c.pixel_pitch > 0.0)) throw std::invalid_argument("config key pixel_pitch: must be > 0");
    if (!(c.magnification > 0.0))
        throw std::invalid_argument("config key magnification: must be > 0");
    if (!(c.wavelength > 0.0)) throw std::invalid_argument("config key wavelength: must be > 0");
    if (!(c.delta_n * std::tan(c.incline_theta) > 0.0))
        throw std::invalid_argument(
            "config key delta_n/incline_theta: delta_n * tan(theta) must be > 0");
    if (c.n_passes < 1) throw std::invalid_argument("config key n_passes: must be >= 1");
    if (!(c.waist > 0.0)) throw std::invalid_argument("config key waist: must be > 0");
    if (c.mean_total_counts < 0.0)
        throw std::invalid_argument("config key mean_total_counts: must be >= 0");
    if (c.background_rate < 0.0)
        throw std::invalid_argument("config key background_rate: must be >= 0");
    if (c.exposures < 1) throw std::invalid_argument("config key exposures: must be >= 1");
    return c;
}

SimulationConfig parse_config_file(const std::string& path) {
    std::ifstream in = open_input(path);
    return parse_config(in);
}

std::string serialize_config(const SimulationConfig& c) {
    std::ostringstream out;
    out << "wavelength = " << format_double(c.wavelength) << "\n"
        << "delta_n = " << format_double(c.delta_n) << "\n"
        << "incline_theta = " << format_double(c.incline_theta) << "\n"
        << "n_passes = " << c.n_passes << "\n"
        << "width = " << c.width << "\n"
        << "height = " << c.height << "\n"
        << "pixel_pitch = " << format_double(c.pixel_pitch) << "\n"
        << "magnification = " << format_double(c.magnification) << "\n"
        << "origin_x = " << format_double(c.origin_x) << "\n"
        << "origin_y = " << format_double(c.origin_y) << "\n"
        << "waist = " << format_double(c.waist) << "\n"
        << "beam_center_x = " << format_double(c.beam_center_x) << "\n"
        << "beam_center_y = " << format_double(c.beam_center_y) << "\n"
        << "mean_total_counts = " << format_double(c.mean_total_counts) << "\n"
        << "background_rate = " << format_double(c.background_rate) << "\n"
        << "seed = " << c.seed << "\n"
        << "exposures = " << c.exposures << "\n"
        << "output_dir = " << c.output_dir << "\n";
    return out.str();
}

std::string frame_filename(Pol signal, Pol idler) {
    return std::string("frame_") + pol_to_char(signal) + pol_to_char(idler) + ".txt";
}

std::string intensity_filename(Pol signal, Pol idler) {
    return std::string("intensity_") + pol_to_char(signal) + pol_to_char(idler) + ".csv";
}

void write_frame(std::ostream& out, const CountFrame& frame) {
    out << "FRAME 1\n"
        << "width " << frame.grid.width << "\n"
        << "height " << frame.grid.height << "\n"
        << "signal " << pol_to_char(frame.signal) << "\n"
        << "idler " << pol_to_char(frame.idler) << "\n"
        << "exposures " << frame.exposures << "\n"
        << "seed " << frame.seed << "\n";
    for (int j = 0; j < frame.grid.height; ++j) {
        for (int i = 0; i < frame.grid.width; ++i) {
            if (i) out << ' ';
            out << frame.counts[frame.grid.index(i, j)];
        }
        out << '\n';
    }
}

void write_frame_file(const std::string& path, const CountFrame& frame) {
    auto out = open_output(path);
    write_frame(out, frame);
}

CountFrame read_frame(std::istream& in) {
    expect_header_line(in, "FRAME 1", "FRAME");
    CountFrame frame;
    frame.grid.width = parse_int_value("width", header_value(in, "width", "FRAME"));
    frame.grid.height = parse_int_value("height", header_value(in, "height", "FRAME"));
    std::string sig = header_value(in, "signal", "FRAME");
    std::string idl = header_value(in, "idler", "FRAME");
    if (sig.size() != 1 || idl.size() != 1)
        throw std::runtime_error("FRAME: signal/idler must be single labels");
    frame.signal = pol_from_char(sig[0]);
    frame.idler = pol_from_char(idl[0]);
    frame.exposures = parse_u64_value("exposures", header_value(in, "exposures", "FRAME"));
    frame.seed = parse_u64_value("seed", header_value(in, "seed", "FRAME"));
    if (frame.grid.width < 1 || frame.grid.height < 1)
        throw std::runtime_error("FRAME: dimensions must be positive");

    frame.counts.resize(frame.grid.pixel_count());
    for (std::size_t p = 0; p < frame.counts.size(); ++p) {
        long long v;
        if (!(in >> v)) throw std::runtime_error("FRAME: truncated count data");
        if (v < 0) throw std::runtime_error("FRAME: negative count");
        frame.counts[p] = static_cast<std::uint64_t>(v);
    }
    long long extra;
    if (in >> extra) throw std::runtime_error("FRAME: trailing data after counts");
    return frame;
}

CountFrame read_frame_file(const std::string& path) {
    auto in = open_input(path);
    try {
        return read_frame(in);
    } catch (const std::exception& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
}

namespace {

// serialization order of the 16 real density-matrix entries
std::array<double, 16> rho_to_reals(const DensityMatrix& rho) {
    std::array<double, 16> r{};
    int n = 0;
    for (int i = 0; i < 4; ++i) r[static_cast<std::size_t>(n++)] = rho.at(i, i).real();
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) {
            r[static_cast<std::size_t>(n++)] = rho.at(i, j).real();
            r[static_cast<std::size_t>(n++)] = rho.at(i, j).imag();
        }
    return r;
}

DensityMatrix reals_to_rho(const std::array<double, 16>& r) {
    Operator4 m;
    int n = 0;
    for (int i = 0; i < 4; ++i) m.at(i, i) = Complex(r[static_cast<std::size_t>(n++)], 0);
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) {
            double re = r[static_cast<std::size_t>(n++)];
            double im = r[static_cast<std::size_t>(n++)];
            m.at(i, j) = Complex(re, im);
            m.at(j, i) = Complex(re, -im);
        }
    return DensityMatrix::from_matrix(m);
}

}  // namespace

void write_tomo(std::ostream& out, const TomographyMap& map) {
    out << "TOMO 1\n"
        << "width " << map.grid.width << "\n"
        << "height " << map.grid.height << "\n"
        << "pixel_pitch " << format_double(map.grid.pixel_pitch) << "\n";
    for (const auto& px : map.pixels) {
        out << static_cast<char>(px.status);
        for (double v : rho_to_reals(px.rho)) out << ' ' << format_double(v);
        out << '\n';
    }
}

void write_tomo_file(const std::string& path, const TomographyMap& map) {
    auto out = open_output(path);
    write_tomo(out, map);
}

TomographyMap read_tomo(std::istream& in) {
    expect_header_line(in, "TOMO 1", "TOMO");
    TomographyMap map;
    map.grid.width = parse_int_value("width", header_value(in, "width", "TOMO"));
    map.grid.height = parse_int_value("height", header_value(in, "height", "TOMO"));
    map.grid.pixel_pitch =
        parse_double_value("pixel_pitch", header_value(in, "pixel_pitch", "TOMO"));
    if (map.grid.width < 1 || map.grid.height < 1)
        throw std::runtime_error("TOMO: dimensions must be positive");
    map.pixels.resize(map.grid.pixel_count());
    for (std::size_t p = 0; p < map.pixels.size(); ++p) {
        std::string status;
        if (!(in >> status)) throw std::runtime_error("TOMO: truncated pixel records");
        if (status != "C" && status != "M" && status != "Z")
            throw std::runtime_error("TOMO: invalid status '" + status + "'");
        std::array<double, 16> r{};
        for (auto& v : r)
            if (!(in >> v)) throw std::runtime_error("TOMO: truncated pixel record");
        PixelTomographyResult& px = map.pixels[p];
        px.status = static_cast<TomoStatus>(status[0]);
        try {
            px.rho = reals_to_rho(r);
        } catch (const std::exception& e) {
            throw std::runtime_error("TOMO: pixel " + std::to_string(p) + ": " + e.what());
        }
    }
    std::string extra;
    if (in >> extra) throw std::runtime_error("TOMO: trailing data after pixel records");
    return map;
}

TomographyMap read_tomo_file(const std::string& path) {
    auto in = open_input(path);
    try {
        return read_tomo(in);
    } catch (const std::exception& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
}

void write_map_csv(std::ostream& out, const RealMap& map) {
    out << "width,height,pixel_pitch_m\n"
        << map.grid.width << ',' << map.grid.height << ',' << format_double(map.grid.pixel_pitch)
        << '\n';
    for (int j = 0; j < map.grid.height; ++j) {
        for (int i = 0; i < map.grid.width; ++i) {
            if (i) out << ',';
            out << format_double(map.at(i, j));
        }
        out << '\n';
    }
}

void write_map_csv_file(const std::string& path, const RealMap& map) {
    auto out = open_output(path);
    write_map_csv(out, map);
}

RealMap read_map_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || trim(line) != "width,height,pixel_pitch_m")
        throw std::runtime_error("CSV: expected geometry header 'width,height,pixel_pitch_m'");
    if (!std::getline(in, line)) throw std::runtime_error("CSV: missing geometry row");
    std::istringstream geom(line);
    std::string wtext, htext, ptext;
    if (!std::getline(geom, wtext, ',') || !std::getline(geom, htext, ',') ||
        !std::getline(geom, ptext))
        throw std::runtime_error("CSV: malformed geometry row");
    RealMap map;
    map.grid.width = parse_int_value("width", wtext);
    map.grid.height = parse_int_value("height", htext);
    map.grid.pixel_pitch = parse_double_value("pixel_pitch_m", ptext);
    if (map.grid.width < 1 || map.grid.height < 1)
        throw std::runtime_error("CSV: dimensions must be positive");
    map.values.resize(map.grid.pixel_count());
    for (int j = 0; j < map.grid.height; ++j) {
        if (!std::getline(in, line))
            throw std::runtime_error("CSV: truncated at row " + std::to_string(j));
        std::istringstream row(line);
        std::string cell;
        for (int i = 0; i < map.grid.width; ++i) {
            if (!std::getline(row, cell, ','))
                throw std::runtime_error("CSV: row " + std::to_string(j) + " has too few columns");
            map.at(i, j) = parse_double_value("value", cell);
        }
        if (std::getline(row, cell))
            throw std::runtime_error("CSV: row " + std::to_string(j) + " has too many columns");
    }
    while (std::getline(in, line))
        if (!trim(line).empty()) throw std::runtime_error("CSV: trailing data after value rows");
    return map;
}

RealMap read_map_csv_file(const std::string& path) {
    auto in = open_input(path);
    try {
        return read_map_csv(in);
    } catch (const std::exception& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
}

void write_bytes_file(const std::string& path, const std::vector<std::uint8_t>& bytes) {
    auto out = open_output(path);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("failed writing " + path);
}

}  // namespace lovtomo
