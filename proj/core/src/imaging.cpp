#include "lovtomo/imaging.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace lovtomo {

namespace {

double median_of(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    std::size_t n = v.size();
    if (n % 2 == 1) return v[n / 2];
    return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// symmetric reflection: -1 -> 0, -2 -> 1, n -> n-1, ...
int reflect_index(int i, int n) {
    while (i < 0 || i >= n) {
        if (i < 0) i = -i - 1;
        if (i >= n) i = 2 * n - 1 - i;
    }
    return i;
}

void append_text(std::vector<std::uint8_t>& out, const std::string& s) {
    out.insert(out.end(), s.begin(), s.end());
}

int quantize(double v) {
    if (v < -1e-9 || v > 1.0 + 1e-9)
        throw std::invalid_argument("render: image values outside [0, 1]; normalize first");
    return static_cast<int>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

}  // namespace

RealImage subtract_background(const RealImage& img, const FilterConfig& config) {
    RealImage out = img;
    double level = 0.0;
    if (config.background_method == BackgroundMethod::FixedValue) {
        level = config.fixed_background;
    } else {
        int w = img.grid.width, h = img.grid.height;
        if (w < 8 || h < 8)
            throw std::invalid_argument(
                "subtract_background: corner-median method needs an image of at least 8x8");
        std::vector<double> corner;
        corner.reserve(64);
        const int xs[2] = {0, w - 4};
        const int ys[2] = {0, h - 4};
        for (int bx : xs)
            for (int by : ys)
                for (int j = 0; j < 4; ++j)
                    for (int i = 0; i < 4; ++i) corner.push_back(img.at(bx + i, by + j));
        level = median_of(std::move(corner));
    }
    for (auto& v : out.values) v = std::max(0.0, v - level);
    return out;
}

RealImage gaussian_filter(const RealImage& img, double sigma) {
    if (!(sigma > 0.0)) throw std::invalid_argument("gaussian_filter: sigma must be positive");
    int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
    double sum = 0.0;
    for (int k = -radius; k <= radius; ++k) {
        double w = std::exp(-0.5 * (k * k) / (sigma * sigma));
        kernel[static_cast<std::size_t>(k + radius)] = w;
        sum += w;
    }
    for (auto& w : kernel) w /= sum;

    int w = img.grid.width, h = img.grid.height;
    RealImage tmp = img, out = img;
    // horizontal pass
    for (int j = 0; j < h; ++j)
        for (int i = 0; i < w; ++i) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k)
                acc += kernel[static_cast<std::size_t>(k + radius)] * img.at(reflect_index(i + k, w), j);
            tmp.at(i, j) = acc;
        }
    // vertical pass
    for (int j = 0; j < h; ++j)
        for (int i = 0; i < w; ++i) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k)
                acc += kernel[static_cast<std::size_t>(k + radius)] * tmp.at(i, reflect_index(j + k, h));
            out.at(i, j) = acc;
        }
    return out;
}

double adaptive_sigma(const RealImage& img) {
    if (img.values.empty()) throw std::invalid_argument("adaptive_sigma: empty image");
    std::vector<double> sorted = img.values;
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    std::size_t top = std::max<std::size_t>(1, sorted.size() / 10);
    sorted.resize(top);
    double med = median_of(std::move(sorted));
    if (!(med > 0.0)) return 3.0;
    return std::clamp(5.0 / std::sqrt(med), 0.5, 3.0);
}

RealImage normalize(const RealImage& img) {
    double peak = 0.0;
    for (double v : img.values) peak = std::max(peak, v);
    if (!(peak > 0.0)) throw std::runtime_error("normalize: degenerate all-zero image");
    RealImage out = img;
    for (auto& v : out.values) v /= peak;
    return out;
}

ColorRamp heat_ramp() {
    ColorRamp ramp;
    for (int i = 0; i < 256; ++i) {
        double t = i / 255.0;
        auto channel = [](double x) {
            return static_cast<std::uint8_t>(std::lround(std::clamp(x, 0.0, 1.0) * 255.0));
        };
        ramp.rgb[static_cast<std::size_t>(i)] = {channel(3.0 * t), channel(3.0 * t - 1.0),
                                                 channel(3.0 * t - 2.0)};
    }
    return ramp;
}

std::vector<std::uint8_t> render_pgm(const RealImage& img, bool ascii) {
    std::vector<std::uint8_t> out;
    std::string header = std::string(ascii ? "P2" : "P5") + "\n" +
                         std::to_string(img.grid.width) + " " + std::to_string(img.grid.height) +
                         "\n255\n";
    append_text(out, header);
    if (ascii) {
        for (int j = 0; j < img.grid.height; ++j) {
            std::string row;
            for (int i = 0; i < img.grid.width; ++i) {
                if (i) row += ' ';
                row += std::to_string(quantize(img.at(i, j)));
            }
            row += '\n';
            append_text(out, row);
        }
    } else {
        out.reserve(out.size() + img.values.size());
        for (int j = 0; j < img.grid.height; ++j)
            for (int i = 0; i < img.grid.width; ++i)
                out.push_back(static_cast<std::uint8_t>(quantize(img.at(i, j))));
    }
    return out;
}

std::vector<std::uint8_t> render_ppm(const RealImage& img, const ColorRamp& ramp, bool ascii) {
    std::vector<std::uint8_t> out;
    std::string header = std::string(ascii ? "P3" : "P6") + "\n" +
                         std::to_string(img.grid.width) + " " + std::to_string(img.grid.height) +
                         "\n255\n";
    append_text(out, header);
    if (ascii) {
        for (int j = 0; j < img.grid.height; ++j) {
            std::string row;
            for (int i = 0; i < img.grid.width; ++i) {
                const auto& rgb = ramp.rgb[static_cast<std::size_t>(quantize(img.at(i, j)))];
                if (i) row += ' ';
                row += std::to_string(rgb[0]) + ' ' + std::to_string(rgb[1]) + ' ' +
                       std::to_string(rgb[2]);
            }
            row += '\n';
            append_text(out, row);
        }
    } else {
        out.reserve(out.size() + 3 * img.values.size());
        for (int j = 0; j < img.grid.height; ++j)
            for (int i = 0; i < img.grid.width; ++i) {
                const auto& rgb = ramp.rgb[static_cast<std::size_t>(quantize(img.at(i, j)))];
                out.push_back(rgb[0]);
                out.push_back(rgb[1]);
                out.push_back(rgb[2]);
            }
    }
    return out;
}

}  // namespace lovtomo
