#include "lovtomo/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "lovtomo/imaging.hpp"

namespace lovtomo {

namespace {

std::array<TwoQubitKet, 4> bell_kets() {
    std::array<TwoQubitKet, 4> out;
    for (std::size_t b = 0; b < 4; ++b) out[b] = bell_state(kBellOrder[b]);
    return out;
}

}  // namespace

FidelityMap bell_fidelity_map(const TomographyMap& map, Bell target) {
    FidelityMap out;
    out.grid = map.grid;
    out.target = target;
    out.values.resize(map.pixels.size());
    TwoQubitKet psi = bell_state(target);
    for (std::size_t p = 0; p < map.pixels.size(); ++p)
        out.values[p] = fidelity(map.pixels[p].rho, psi);
    return out;
}

Bell argmax_bell(const std::array<double, 4>& fidelities) {
    std::size_t best = 0;
    for (std::size_t b = 1; b < 4; ++b)
        if (fidelities[b] > fidelities[best]) best = b;
    return kBellOrder[best];
}

MaxFidelityResult max_bell_fidelity(const TomographyMap& map) {
    MaxFidelityResult out;
    out.max_values = make_map(map.grid);
    out.argmax.resize(map.pixels.size());
    const auto kets = bell_kets();
    for (std::size_t p = 0; p < map.pixels.size(); ++p) {
        std::array<double, 4> f{};
        for (std::size_t b = 0; b < 4; ++b) f[b] = fidelity(map.pixels[p].rho, kets[b]);
        Bell label = argmax_bell(f);
        out.argmax[p] = label;
        out.max_values.values[p] = f[static_cast<std::size_t>(label)];
    }
    return out;
}

FidelityHistogram fidelity_histogram(const RealMap& max_map, int n_bins) {
    if (n_bins < 1) throw std::invalid_argument("fidelity_histogram: n_bins must be >= 1");
    FidelityHistogram h;
    h.n_bins = n_bins;
    h.counts.assign(static_cast<std::size_t>(n_bins), 0);
    h.total = max_map.values.size();
    for (double v : max_map.values) {
        int bin = static_cast<int>(std::floor(v * n_bins));
        bin = std::clamp(bin, 0, n_bins - 1);  // last bin right-inclusive
        ++h.counts[static_cast<std::size_t>(bin)];
    }
    return h;
}

WitnessSummary entangled_fraction(const MaxFidelityResult& max_result, double threshold) {
    if (!(threshold > 0.0) || !(threshold < 1.0))
        throw std::invalid_argument("entangled_fraction: threshold must lie in (0, 1)");
    WitnessSummary s;
    s.threshold = threshold;
    s.total_pixels = max_result.max_values.values.size();
    for (std::size_t p = 0; p < s.total_pixels; ++p) {
        if (max_result.max_values.values[p] > threshold) {
            ++s.entangled_pixels;
            for (std::size_t b = 0; b < 4; ++b)
                if (max_result.argmax[p] == kBellOrder[b]) {
                    ++s.argmax_counts[b];
                    break;
                }
        }
    }
    s.entangled_fraction =
        s.total_pixels == 0 ? 0.0
                            : static_cast<double>(s.entangled_pixels) / static_cast<double>(s.total_pixels);
    return s;
}

namespace {

// normalized autocorrelation of the rows at one lag, pooled over all rows
double ncc_at_lag(const RealMap& m, int lag) {
    int w = m.grid.width, h = m.grid.height;
    if (lag <= 0 || lag >= w) return 0.0;
    double num = 0.0, ea = 0.0, eb = 0.0;
    for (int j = 0; j < h; ++j)
        for (int i = 0; i + lag < w; ++i) {
            double a = m.at(i, j), b = m.at(i + lag, j);
            num += a * b;
            ea += a * a;
            eb += b * b;
        }
    double den = std::sqrt(ea * eb);
    return den > 0.0 ? num / den : 0.0;
}

RealMap transpose(const RealMap& m) {
    RealMap t;
    t.grid = m.grid;
    std::swap(t.grid.width, t.grid.height);
    t.values.resize(m.values.size());
    for (int j = 0; j < m.grid.height; ++j)
        for (int i = 0; i < m.grid.width; ++i) t.at(j, i) = m.at(i, j);
    return t;
}

// Period along the row direction: peak of the Hann-windowed line power
// spectrum pooled over rows, refined parabolically on an 8x zero-padded
// frequency grid. Returns 0 when no interior peak exists.
double axis_period(const RealMap& m) {
    int w = m.grid.width, h = m.grid.height;
    const int pad = 8;
    double fstep = 1.0 / (pad * w);
    double fmin = 2.0 / w;   // at least two periods across the axis
    double fmax = 0.45;      // just below Nyquist
    int nf = static_cast<int>((fmax - fmin) / fstep);
    if (nf < 3) return 0.0;

    std::vector<double> window(static_cast<std::size_t>(w));
    for (int i = 0; i < w; ++i)
        window[static_cast<std::size_t>(i)] = 0.5 - 0.5 * std::cos(2.0 * M_PI * (i + 0.5) / w);

    double mean = 0.0;
    for (double v : m.values) mean += v;
    mean /= static_cast<double>(m.values.size());

    std::vector<double> power(static_cast<std::size_t>(nf), 0.0);
    std::vector<double> cosv(static_cast<std::size_t>(w)), sinv(static_cast<std::size_t>(w));
    for (int fi = 0; fi < nf; ++fi) {
        double f = fmin + fi * fstep;
        for (int i = 0; i < w; ++i) {
            double ang = 2.0 * M_PI * f * i;
            cosv[static_cast<std::size_t>(i)] = std::cos(ang) * window[static_cast<std::size_t>(i)];
            sinv[static_cast<std::size_t>(i)] = std::sin(ang) * window[static_cast<std::size_t>(i)];
        }
        double total = 0.0;
        for (int j = 0; j < h; ++j) {
            double re = 0.0, im = 0.0;
            for (int i = 0; i < w; ++i) {
                double v = m.at(i, j) - mean;
                re += v * cosv[static_cast<std::size_t>(i)];
                im += v * sinv[static_cast<std::size_t>(i)];
            }
            total += re * re + im * im;
        }
        power[static_cast<std::size_t>(fi)] = total;
    }

    int best = 0;
    for (int fi = 1; fi < nf; ++fi)
        if (power[static_cast<std::size_t>(fi)] > power[static_cast<std::size_t>(best)]) best = fi;
    if (best == 0 || best == nf - 1) return 0.0;
    if (!(power[static_cast<std::size_t>(best)] > 0.0)) return 0.0;

    double y1 = power[static_cast<std::size_t>(best - 1)];
    double y2 = power[static_cast<std::size_t>(best)];
    double y3 = power[static_cast<std::size_t>(best + 1)];
    double den = y1 - 2.0 * y2 + y3;
    double off = den != 0.0 ? 0.5 * (y1 - y3) / den : 0.0;
    double fpk = fmin + (best + off) * fstep;
    return fpk > 0.0 ? 1.0 / fpk : 0.0;
}

}  // namespace

SpacingEstimate estimate_lattice_spacing(const RealMap& intensity, double pixel_pitch) {
    if (!(pixel_pitch > 0.0))
        throw std::invalid_argument("estimate_lattice_spacing: pixel_pitch must be positive");
    int w = intensity.grid.width, h = intensity.grid.height;
    if (w < 8 || h < 8)
        throw std::runtime_error("lattice spacing estimation failed: map smaller than 8x8");

    // remove the beam-envelope pedestal before looking for periodicity
    double sigma = std::min(w, h) / 8.0;
    RealMap detrended = intensity;
    RealMap smooth = gaussian_filter(intensity, sigma);
    for (std::size_t p = 0; p < detrended.values.size(); ++p)
        detrended.values[p] -= smooth.values[p];

    RealMap detrended_t = transpose(detrended);
    double period_x = axis_period(detrended);
    double period_y = axis_period(detrended_t);
    if (period_x <= 0.0 || period_y <= 0.0)
        throw std::runtime_error("lattice spacing estimation failed: no spectral peak found");

    // the literal 10%-of-central-peak criterion, on the normalized
    // autocorrelation at the detected lag
    double ncc_x = ncc_at_lag(detrended, static_cast<int>(std::lround(period_x)));
    double ncc_y = ncc_at_lag(detrended_t, static_cast<int>(std::lround(period_y)));
    if (ncc_x <= 0.1 || ncc_y <= 0.1)
        throw std::runtime_error(
            "lattice spacing estimation failed: no off-center autocorrelation peak above 10% of "
            "the central peak");

    // a projection map can show the second harmonic (half period) along one
    // axis; reconcile when the two axis periods sit near a 1:2 ratio
    double lo = std::min(period_x, period_y);
    double hi = std::max(period_x, period_y);
    double est_px, diff_px;
    if (std::abs(hi / lo - 2.0) <= 0.25) {
        est_px = 0.5 * (hi + 2.0 * lo);
        diff_px = std::abs(hi - 2.0 * lo);
    } else {
        est_px = 0.5 * (period_x + period_y);
        diff_px = std::abs(period_x - period_y);
    }

    SpacingEstimate out;
    out.spacing = est_px * pixel_pitch;
    out.uncertainty = (0.5 * diff_px + 0.5) * pixel_pitch;
    out.method = "detrended-axis-spectrum";
    return out;
}

std::pair<double, double> map_difference(const FidelityMap& a, const FidelityMap& b) {
    if (!a.grid.same_shape(b.grid) || a.values.size() != b.values.size())
        throw std::invalid_argument("map_difference: geometry mismatch");
    double sum = 0.0, worst = 0.0;
    for (std::size_t p = 0; p < a.values.size(); ++p) {
        double d = std::abs(a.values[p] - b.values[p]);
        sum += d;
        worst = std::max(worst, d);
    }
    double mean = a.values.empty() ? 0.0 : sum / static_cast<double>(a.values.size());
    return {mean, worst};
}

}  // namespace lovtomo
