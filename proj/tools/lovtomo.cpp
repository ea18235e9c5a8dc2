// lovtomo: simulate the spin-orbit lattice two-photon experiment, run
// per-pixel tomography on count frames, analyze the results, and render
// display images.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "lovtomo/analysis.hpp"
#include "lovtomo/imaging.hpp"
#include "lovtomo/io.hpp"

namespace fs = std::filesystem;
using namespace lovtomo;

namespace {

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open file for writing: " + path);
    out << text;
    if (!out) throw std::runtime_error("failed writing " + path);
}

int run_simulate(const std::string& config_path, const std::string& out_override) {
    SimulationConfig config = config_path.empty() ? default_config() : parse_config_file(config_path);
    if (!out_override.empty()) config.output_dir = out_override;

    fs::create_directories(config.output_dir);
    fs::path dir(config.output_dir);

    write_text_file((dir / "config.cfg").string(), serialize_config(config));

    SpinOrbitField field = evaluate_field(config.lattice(), config.grid(), config.beam());

    RealMap envelope = make_map(field.grid);
    envelope.values = field.weights;
    write_map_csv_file((dir / "envelope.csv").string(), envelope);

    for (auto [s, i] : canonical_settings()) {
        RealMap intensity = theoretical_intensity(field, s, i);
        write_map_csv_file((dir / intensity_filename(s, i)).string(), intensity);

        CountFrame frame = simulate_frame(field, s, i, config.mean_total_counts,
                                          config.background_rate, config.seed);
        frame.exposures = config.exposures;
        write_frame_file((dir / frame_filename(s, i)).string(), frame);
    }
    std::cout << "simulate: wrote 16 frames and 16 intensity maps to " << config.output_dir
              << "\n";
    return 0;
}

int run_reconstruct(const std::string& frames_dir, std::string out_path, int threads) {
    fs::path dir(frames_dir);
    std::vector<CountFrame> frames;
    for (auto [s, i] : canonical_settings()) {
        fs::path p = dir / frame_filename(s, i);
        if (!fs::exists(p))
            throw std::runtime_error(std::string("missing frame for setting ") + pol_to_char(s) +
                                     pol_to_char(i) + ": " + p.string());
        frames.push_back(read_frame_file(p.string()));
    }
    MeasurementSet set = make_measurement_set(std::move(frames));

    TomographyMap map = pixelwise_tomography(set, threads);

    std::size_t converged = 0, max_iter = 0, degenerate = 0;
    for (const auto& px : map.pixels) {
        switch (px.status) {
            case TomoStatus::Converged: ++converged; break;
            case TomoStatus::MaxIterations: ++max_iter; break;
            case TomoStatus::DegenerateZeroCounts: ++degenerate; break;
        }
    }

    if (out_path.empty()) out_path = (dir / "tomo.txt").string();
    write_tomo_file(out_path, map);
    std::cout << "reconstruct: " << map.pixels.size() << " pixels (converged " << converged
              << ", max_iterations " << max_iter << ", degenerate " << degenerate << ") -> "
              << out_path << "\n";
    return 0;
}

int run_analyze(const std::string& tomo_path, const std::string& out_dir,
                const std::string& intensity_path, int bins, double threshold) {
    TomographyMap map = read_tomo_file(tomo_path);
    fs::create_directories(out_dir);
    fs::path dir(out_dir);

    for (Bell b : kBellOrder) {
        FidelityMap f = bell_fidelity_map(map, b);
        RealMap values{f.grid, f.values};
        write_map_csv_file((dir / (std::string("fidelity_") + bell_name(b) + ".csv")).string(),
                           values);
    }

    MaxFidelityResult max_result = max_bell_fidelity(map);
    write_map_csv_file((dir / "max_fidelity.csv").string(), max_result.max_values);

    RealMap argmax = make_map(map.grid);
    for (std::size_t p = 0; p < max_result.argmax.size(); ++p)
        argmax.values[p] = static_cast<double>(static_cast<int>(max_result.argmax[p]));
    write_map_csv_file((dir / "argmax.csv").string(), argmax);

    FidelityHistogram hist = fidelity_histogram(max_result.max_values, bins);
    {
        std::ostringstream h;
        h << "bin_lo,bin_hi,count\n";
        for (int b = 0; b < hist.n_bins; ++b)
            h << format_double(static_cast<double>(b) / hist.n_bins) << ','
              << format_double(static_cast<double>(b + 1) / hist.n_bins) << ','
              << hist.counts[static_cast<std::size_t>(b)] << '\n';
        write_text_file((dir / "histogram.csv").string(), h.str());
    }

    WitnessSummary witness = entangled_fraction(max_result, threshold);

    std::size_t converged = 0, max_iter = 0, degenerate = 0;
    for (const auto& px : map.pixels) {
        switch (px.status) {
            case TomoStatus::Converged: ++converged; break;
            case TomoStatus::MaxIterations: ++max_iter; break;
            case TomoStatus::DegenerateZeroCounts: ++degenerate; break;
        }
    }

    std::ostringstream summary;
    summary << "pixels " << witness.total_pixels << "\n"
            << "threshold " << format_double(witness.threshold) << "\n"
            << "entangled_pixels " << witness.entangled_pixels << "\n"
            << "entangled_fraction " << format_double(witness.entangled_fraction) << "\n"
            << "argmax_phi_plus " << witness.argmax_counts[0] << "\n"
            << "argmax_phi_minus " << witness.argmax_counts[1] << "\n"
            << "argmax_psi_plus " << witness.argmax_counts[2] << "\n"
            << "argmax_psi_minus " << witness.argmax_counts[3] << "\n"
            << "status_converged " << converged << "\n"
            << "status_max_iterations " << max_iter << "\n"
            << "status_degenerate " << degenerate << "\n";

    if (!intensity_path.empty()) {
        RealMap intensity = read_map_csv_file(intensity_path);
        SpacingEstimate spacing =
            estimate_lattice_spacing(intensity, intensity.grid.pixel_pitch);
        summary << "lattice_spacing_m " << format_double(spacing.spacing) << "\n"
                << "lattice_spacing_uncertainty_m " << format_double(spacing.uncertainty) << "\n"
                << "lattice_spacing_method " << spacing.method << "\n";
    }
    write_text_file((dir / "summary.txt").string(), summary.str());
    std::cout << "analyze: entangled_fraction " << format_double(witness.entangled_fraction)
              << " (" << witness.entangled_pixels << "/" << witness.total_pixels << ") -> "
              << out_dir << "\n";
    return 0;
}

int run_render(const std::string& input_path, const std::string& out_path, double sigma,
               bool adaptive, bool no_background, const std::string& colormap, bool ascii) {
    // FRAME files start with their magic line; anything else is a map CSV
    RealImage img;
    {
        std::ifstream probe(input_path, std::ios::binary);
        if (!probe) throw std::runtime_error("cannot open file for reading: " + input_path);
        std::string first;
        std::getline(probe, first);
        probe.close();
        if (first.rfind("FRAME 1", 0) == 0) {
            CountFrame frame = read_frame_file(input_path);
            img = make_map(frame.grid);
            for (std::size_t p = 0; p < frame.counts.size(); ++p)
                img.values[p] = static_cast<double>(frame.counts[p]);
        } else {
            img = read_map_csv_file(input_path);
        }
    }

    if (!no_background) img = subtract_background(img, FilterConfig{});
    double s = adaptive || sigma <= 0.0 ? adaptive_sigma(img) : sigma;
    img = gaussian_filter(img, s);
    img = normalize(img);

    std::vector<std::uint8_t> bytes;
    if (colormap == "gray") {
        bytes = render_pgm(img, ascii);
    } else if (colormap == "heat") {
        bytes = render_ppm(img, heat_ramp(), ascii);
    } else {
        throw std::runtime_error("unknown colormap: " + colormap + " (expected gray or heat)");
    }
    write_bytes_file(out_path, bytes);
    std::cout << "render: sigma " << format_double(s) << " -> " << out_path << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"spin-orbit lattice simulation, pixel-wise tomography and analysis"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    auto* simulate = app.add_subcommand(
        "simulate", "generate count frames and analytic intensity maps from a config");
    simulate->add_option("--config", config_path, "key=value config file (defaults reproduce the published geometry)");
    simulate->add_option("--out", out_dir, "output directory (overrides config output_dir)");

    std::string frames_dir, tomo_out;
    int threads = 0;
    auto* reconstruct =
        app.add_subcommand("reconstruct", "pixel-wise maximum-likelihood tomography on 16 frames");
    reconstruct->add_option("--frames", frames_dir, "directory holding the 16 canonical frame files")
        ->required();
    reconstruct->add_option("--out", tomo_out, "output TOMO file (default <frames>/tomo.txt)");
    reconstruct->add_option("--threads", threads, "worker threads (0 = hardware concurrency)");

    std::string tomo_path, analysis_dir, intensity_path;
    int bins = 50;
    double threshold = 0.5;
    auto* analyze = app.add_subcommand("analyze", "Bell-fidelity maps, histogram, witness summary");
    analyze->add_option("--tomo", tomo_path, "TOMO file from reconstruct")->required();
    analyze->add_option("--out", analysis_dir, "output directory")->required();
    analyze->add_option("--intensity", intensity_path,
                        "intensity CSV for the lattice-spacing estimate");
    analyze->add_option("--bins", bins, "histogram bin count (default 50)");
    analyze->add_option("--threshold", threshold, "witness threshold (default 0.5)");

    std::string render_in, render_out, colormap = "gray";
    double sigma = 0.0;
    bool adaptive = false, no_background = false, ascii = false;
    auto* render = app.add_subcommand("render", "background-subtract, smooth and export PGM/PPM");
    render->add_option("--input", render_in, "FRAME file or map CSV")->required();
    render->add_option("--out", render_out, "output image path")->required();
    auto* sigma_opt = render->add_option("--sigma", sigma, "fixed Gaussian sigma in pixels");
    auto* adaptive_opt =
        render->add_flag("--adaptive", adaptive, "count-driven sigma selection (default)");
    sigma_opt->excludes(adaptive_opt);
    adaptive_opt->excludes(sigma_opt);
    render->add_flag("--no-background", no_background, "skip background subtraction");
    render->add_option("--colormap", colormap, "gray (PGM) or heat (PPM)");
    render->add_flag("--ascii", ascii, "ASCII P2/P3 instead of binary P5/P6");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    try {
        if (simulate->parsed()) return run_simulate(config_path, out_dir);
        if (reconstruct->parsed()) return run_reconstruct(frames_dir, tomo_out, threads);
        if (analyze->parsed())
            return run_analyze(tomo_path, analysis_dir, intensity_path, bins, threshold);
        if (render->parsed())
            return run_render(render_in, render_out, sigma, adaptive, no_background, colormap,
                              ascii);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
