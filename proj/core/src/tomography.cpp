#include "lovtomo/tomography.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <string>
#include <thread>

namespace lovtomo {

namespace {

constexpr double kLogGuard = 1e-12;   // floor on expected counts inside the log
constexpr double kRelTol = 1e-10;     // relative NLL improvement stop
constexpr int kMaxIterations = 10000;

// measurement kets of the 16 canonical settings
const std::array<TwoQubitKet, 16>& measurement_kets() {
    static const std::array<TwoQubitKet, 16> kets = [] {
        std::array<TwoQubitKet, 16> out;
        for (int s = 0; s < 4; ++s)
            for (int i = 0; i < 4; ++i)
                out[static_cast<std::size_t>(4 * s + i)] =
                    tensor(polarization_ket(kTomoBasis[static_cast<std::size_t>(s)]),
                           polarization_ket(kTomoBasis[static_cast<std::size_t>(i)]));
        return out;
    }();
    return kets;
}

// Hermitian basis behind the 16 real degrees of freedom of rho: the four
// diagonal projectors, then (E_ij + E_ji) and (iE_ij - iE_ji) per i<j pair
// in the order (0,1),(0,2),(0,3),(1,2),(1,3),(2,3).
const std::array<Operator4, 16>& hermitian_basis() {
    static const std::array<Operator4, 16> basis = [] {
        std::array<Operator4, 16> out;
        int n = 0;
        for (int i = 0; i < 4; ++i) {
            Operator4 e;
            e.at(i, i) = Complex(1, 0);
            out[static_cast<std::size_t>(n++)] = e;
        }
        for (int i = 0; i < 4; ++i)
            for (int j = i + 1; j < 4; ++j) {
                Operator4 re;
                re.at(i, j) = Complex(1, 0);
                re.at(j, i) = Complex(1, 0);
                out[static_cast<std::size_t>(n++)] = re;
                Operator4 im;
                im.at(i, j) = Complex(0, 1);
                im.at(j, i) = Complex(0, -1);
                out[static_cast<std::size_t>(n++)] = im;
            }
        return out;
    }();
    return basis;
}

double born_probability(const Operator4& rho, const TwoQubitKet& m) {
    Complex s(0, 0);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            s += std::conj(m.a[static_cast<std::size_t>(i)]) * rho.at(i, j) *
                 m.a[static_cast<std::size_t>(j)];
    return s.real();
}

// 16x16 linear solve with partial pivoting; A is row-major, destroyed.
void solve16(std::array<double, 16 * 16>& a, std::array<double, 16>& b) {
    constexpr int n = 16;
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(a[static_cast<std::size_t>(r * n + col)]) >
                std::abs(a[static_cast<std::size_t>(piv * n + col)]))
                piv = r;
        if (std::abs(a[static_cast<std::size_t>(piv * n + col)]) < 1e-14)
            throw std::runtime_error("linear_inversion: singular design matrix");
        if (piv != col) {
            for (int c = 0; c < n; ++c)
                std::swap(a[static_cast<std::size_t>(col * n + c)],
                          a[static_cast<std::size_t>(piv * n + c)]);
            std::swap(b[static_cast<std::size_t>(col)], b[static_cast<std::size_t>(piv)]);
        }
        double d = a[static_cast<std::size_t>(col * n + col)];
        for (int r = col + 1; r < n; ++r) {
            double f = a[static_cast<std::size_t>(r * n + col)] / d;
            if (f == 0.0) continue;
            for (int c = col; c < n; ++c)
                a[static_cast<std::size_t>(r * n + c)] -= f * a[static_cast<std::size_t>(col * n + c)];
            b[static_cast<std::size_t>(r)] -= f * b[static_cast<std::size_t>(col)];
        }
    }
    for (int r = n - 1; r >= 0; --r) {
        double s = b[static_cast<std::size_t>(r)];
        for (int c = r + 1; c < n; ++c)
            s -= a[static_cast<std::size_t>(r * n + c)] * b[static_cast<std::size_t>(c)];
        b[static_cast<std::size_t>(r)] = s / a[static_cast<std::size_t>(r * n + r)];
    }
}

// design matrix mapping the 16 rho coefficients to the 16 Born probabilities
const std::array<double, 16 * 16>& design_matrix() {
    static const std::array<double, 16 * 16> m = [] {
        std::array<double, 16 * 16> out{};
        const auto& kets = measurement_kets();
        const auto& basis = hermitian_basis();
        for (int k = 0; k < 16; ++k)
            for (int p = 0; p < 16; ++p)
                out[static_cast<std::size_t>(k * 16 + p)] =
                    born_probability(basis[static_cast<std::size_t>(p)],
                                     kets[static_cast<std::size_t>(k)]);
        return out;
    }();
    return m;
}

struct Mat4c {
    Complex m[4][4] = {};
};

// lower-triangular T with T^dag T = A, via Cholesky of the index-reversed
// matrix; returns false when a pivot drops below the rank tolerance
bool factor_tdag_t(const Operator4& a, Mat4c& t) {
    Complex b[4][4];
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) b[i][j] = a.at(3 - i, 3 - j);
    Complex l[4][4] = {};
    for (int j = 0; j < 4; ++j) {
        double d = b[j][j].real();
        for (int k = 0; k < j; ++k) d -= std::norm(l[j][k]);
        if (d < 1e-14) return false;
        double diag = std::sqrt(d);
        l[j][j] = Complex(diag, 0);
        for (int i = j + 1; i < 4; ++i) {
            Complex s = b[i][j];
            for (int k = 0; k < j; ++k) s -= l[i][k] * std::conj(l[j][k]);
            l[i][j] = s / diag;
        }
    }
    // T = (P L P)^dag, P the index reversal
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) t.m[i][j] = std::conj(l[3 - j][3 - i]);
    return true;
}

Mat4c params_to_t(const CholeskyParams& p) {
    Mat4c t;
    t.m[0][0] = Complex(p.t[0], 0);
    t.m[1][1] = Complex(p.t[1], 0);
    t.m[2][2] = Complex(p.t[2], 0);
    t.m[3][3] = Complex(p.t[3], 0);
    t.m[1][0] = Complex(p.t[4], p.t[5]);
    t.m[2][0] = Complex(p.t[6], p.t[7]);
    t.m[2][1] = Complex(p.t[8], p.t[9]);
    t.m[3][0] = Complex(p.t[10], p.t[11]);
    t.m[3][1] = Complex(p.t[12], p.t[13]);
    t.m[3][2] = Complex(p.t[14], p.t[15]);
    return t;
}

CholeskyParams t_to_params(const Mat4c& t) {
    CholeskyParams p;
    p.t[0] = t.m[0][0].real();
    p.t[1] = t.m[1][1].real();
    p.t[2] = t.m[2][2].real();
    p.t[3] = t.m[3][3].real();
    p.t[4] = t.m[1][0].real();
    p.t[5] = t.m[1][0].imag();
    p.t[6] = t.m[2][0].real();
    p.t[7] = t.m[2][0].imag();
    p.t[8] = t.m[2][1].real();
    p.t[9] = t.m[2][1].imag();
    p.t[10] = t.m[3][0].real();
    p.t[11] = t.m[3][0].imag();
    p.t[12] = t.m[3][1].real();
    p.t[13] = t.m[3][1].imag();
    p.t[14] = t.m[3][2].real();
    p.t[15] = t.m[3][2].imag();
    return p;
}

// (row, col, is_imag) of each parameter slot
struct ParamSlot {
    int r, c;
    bool imag;
};
constexpr std::array<ParamSlot, 16> kSlots{{{0, 0, false},
                                            {1, 1, false},
                                            {2, 2, false},
                                            {3, 3, false},
                                            {1, 0, false},
                                            {1, 0, true},
                                            {2, 0, false},
                                            {2, 0, true},
                                            {2, 1, false},
                                            {2, 1, true},
                                            {3, 0, false},
                                            {3, 0, true},
                                            {3, 1, false},
                                            {3, 1, true},
                                            {3, 2, false},
                                            {3, 2, true}}};

// NLL and its gradient over the 16 T parameters. p_k = |T m_k|^2 / tau with
// tau = sum |T_ij|^2; nbar_k = flux p_k + guard;
// NLL = sum(nbar_k - n_k ln nbar_k).
double nll_and_gradient(const CholeskyParams& params, const PixelCounts& counts, double flux,
                        std::array<double, 16>* grad) {
    const auto& kets = measurement_kets();
    Mat4c t = params_to_t(params);

    double tau = 0.0;
    for (const double v : params.t) tau += v * v;
    if (tau <= 0.0) tau = kLogGuard;

    Complex v[16][4];
    double q[16];
    double nll = 0.0;
    double gk[16];
    for (int k = 0; k < 16; ++k) {
        const auto& m = kets[static_cast<std::size_t>(k)];
        double qk = 0.0;
        for (int r = 0; r < 4; ++r) {
            Complex s(0, 0);
            for (int c = 0; c <= r; ++c) s += t.m[r][c] * m.a[static_cast<std::size_t>(c)];
            v[k][r] = s;
            qk += std::norm(s);
        }
        q[k] = qk;
        double nbar = flux * qk / tau + kLogGuard;
        nll += nbar - counts[static_cast<std::size_t>(k)] * std::log(nbar);
        gk[k] = flux * (1.0 - counts[static_cast<std::size_t>(k)] / nbar);
    }
    if (!grad) return nll;

    // dp_k/dt = (dq_k * tau - q_k * dtau) / tau^2
    double sum_gq = 0.0;
    for (int k = 0; k < 16; ++k) sum_gq += gk[k] * q[k];
    for (int s = 0; s < 16; ++s) {
        const ParamSlot slot = kSlots[static_cast<std::size_t>(s)];
        double dtau = 2.0 * params.t[static_cast<std::size_t>(s)];
        double acc = 0.0;
        for (int k = 0; k < 16; ++k) {
            const Complex& mk = kets[static_cast<std::size_t>(k)].a[static_cast<std::size_t>(slot.c)];
            Complex prod = std::conj(v[k][slot.r]) * mk;
            double dq = slot.imag ? -2.0 * prod.imag() : 2.0 * prod.real();
            acc += gk[k] * dq;
        }
        (*grad)[static_cast<std::size_t>(s)] = (acc * tau - sum_gq * dtau) / (tau * tau);
    }
    return nll;
}

void validate_counts(const PixelCounts& counts) {
    for (double c : counts)
        if (!(c >= 0.0) || !std::isfinite(c))
            throw std::invalid_argument("tomography: counts must be finite and nonnegative");
}

}  // namespace

std::array<std::pair<Pol, Pol>, 16> canonical_settings() {
    std::array<std::pair<Pol, Pol>, 16> out;
    for (int s = 0; s < 4; ++s)
        for (int i = 0; i < 4; ++i)
            out[static_cast<std::size_t>(4 * s + i)] = {kTomoBasis[static_cast<std::size_t>(s)],
                                                        kTomoBasis[static_cast<std::size_t>(i)]};
    return out;
}

int setting_index(Pol signal, Pol idler) {
    return 4 * tomo_label_index(signal) + tomo_label_index(idler);
}

MeasurementSet make_measurement_set(std::vector<CountFrame> frames) {
    if (frames.size() != 16)
        throw std::invalid_argument("measurement set: expected 16 frames, got " +
                                    std::to_string(frames.size()));
    MeasurementSet set;
    set.frames.resize(16);
    std::array<bool, 16> seen{};
    for (auto& f : frames) {
        int k = setting_index(f.signal, f.idler);
        std::string name = std::string{pol_to_char(f.signal)} + pol_to_char(f.idler);
        if (seen[static_cast<std::size_t>(k)])
            throw std::invalid_argument("measurement set: duplicate setting " + name);
        seen[static_cast<std::size_t>(k)] = true;
        if (f.counts.size() != f.grid.pixel_count())
            throw std::invalid_argument("measurement set: frame " + name +
                                        " count data does not match its dimensions");
        set.frames[static_cast<std::size_t>(k)] = std::move(f);
    }
    const auto settings = canonical_settings();
    for (int k = 0; k < 16; ++k)
        if (!seen[static_cast<std::size_t>(k)]) {
            auto [s, i] = settings[static_cast<std::size_t>(k)];
            throw std::invalid_argument(std::string("measurement set: missing setting ") +
                                        pol_to_char(s) + pol_to_char(i));
        }
    set.grid = set.frames[0].grid;
    for (const auto& f : set.frames)
        if (!f.grid.same_shape(set.grid))
            throw std::invalid_argument("measurement set: frames have mismatched dimensions");
    return set;
}

DensityMatrix density_from_params(const CholeskyParams& p) {
    Mat4c t = params_to_t(p);
    double tau = 0.0;
    for (const double v : p.t) tau += v * v;
    if (tau <= 0.0)
        throw std::invalid_argument("density_from_params: zero parameter vector");
    Operator4 rho;
    // rho = T^dag T / tau
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            Complex s(0, 0);
            for (int r = std::max(i, j); r < 4; ++r) s += std::conj(t.m[r][i]) * t.m[r][j];
            rho.at(i, j) = s / tau;
        }
    return DensityMatrix::unchecked(rho);
}

CholeskyParams params_from_density(const DensityMatrix& rho) {
    Mat4c t;
    if (!factor_tdag_t(rho.matrix(), t)) {
        Operator4 jittered = rho.matrix();
        for (int i = 0; i < 4; ++i) jittered.at(i, i) += Complex(1e-8, 0);
        if (!factor_tdag_t(jittered, t))
            throw std::runtime_error("params_from_density: factorization failed after jitter");
    }
    return t_to_params(t);
}

double estimate_flux(const PixelCounts& counts) {
    validate_counts(counts);
    return counts[setting_index(Pol::H, Pol::H)] + counts[setting_index(Pol::H, Pol::V)] +
           counts[setting_index(Pol::V, Pol::H)] + counts[setting_index(Pol::V, Pol::V)];
}

Operator4 linear_inversion(const PixelCounts& counts, double flux) {
    if (!(flux > 0.0)) throw std::invalid_argument("linear_inversion: flux must be positive");
    std::array<double, 16 * 16> a = design_matrix();
    std::array<double, 16> b{};
    for (int k = 0; k < 16; ++k) b[static_cast<std::size_t>(k)] = counts[static_cast<std::size_t>(k)] / flux;
    solve16(a, b);
    const auto& basis = hermitian_basis();
    Operator4 rho;
    for (int p = 0; p < 16; ++p)
        for (int i = 0; i < 16; ++i)
            rho.m[static_cast<std::size_t>(i)] +=
                b[static_cast<std::size_t>(p)] * basis[static_cast<std::size_t>(p)].m[static_cast<std::size_t>(i)];
    return rho;
}

DensityMatrix project_to_physical(const Operator4& hermitian) {
    EigenSystem4 es = eigen_hermitian(hermitian);
    double total = 0.0;
    std::array<double, 4> lam{};
    for (int k = 0; k < 4; ++k) {
        lam[static_cast<std::size_t>(k)] = std::max(0.0, es.values[static_cast<std::size_t>(k)]);
        total += lam[static_cast<std::size_t>(k)];
    }
    if (total <= 0.0) return DensityMatrix::maximally_mixed();
    Operator4 rho;
    for (int k = 0; k < 4; ++k) {
        double w = lam[static_cast<std::size_t>(k)] / total;
        if (w == 0.0) continue;
        const auto& v = es.vectors[static_cast<std::size_t>(k)];
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j)
                rho.at(i, j) += w * v.a[static_cast<std::size_t>(i)] *
                                std::conj(v.a[static_cast<std::size_t>(j)]);
    }
    return DensityMatrix::unchecked(rho);
}

double negative_log_likelihood(const CholeskyParams& params, const PixelCounts& counts,
                               double flux) {
    if (!(flux > 0.0))
        throw std::invalid_argument("negative_log_likelihood: flux must be positive");
    validate_counts(counts);
    return nll_and_gradient(params, counts, flux, nullptr);
}

PixelTomographyResult mle_reconstruct(const PixelCounts& counts) {
    validate_counts(counts);
    PixelTomographyResult result;
    result.flux_estimate = estimate_flux(counts);
    if (result.flux_estimate <= 0.0) {
        result.rho = DensityMatrix::maximally_mixed();
        result.status = TomoStatus::DegenerateZeroCounts;
        return result;
    }
    const double flux = result.flux_estimate;

    DensityMatrix seed = project_to_physical(linear_inversion(counts, flux));
    CholeskyParams x = params_from_density(seed);

    std::array<double, 16> g{}, g_new{};
    double f = nll_and_gradient(x, counts, flux, &g);

    // dense BFGS on the 16 parameters with Armijo backtracking
    std::array<double, 16 * 16> h{};
    auto reset_h = [&h] {
        h.fill(0.0);
        for (int i = 0; i < 16; ++i) h[static_cast<std::size_t>(i * 16 + i)] = 1.0;
    };
    reset_h();

    result.status = TomoStatus::MaxIterations;
    int iter = 0;
    for (; iter < kMaxIterations; ++iter) {
        std::array<double, 16> dir{};
        double descent = 0.0;
        for (int i = 0; i < 16; ++i) {
            double s = 0.0;
            for (int j = 0; j < 16; ++j)
                s -= h[static_cast<std::size_t>(i * 16 + j)] * g[static_cast<std::size_t>(j)];
            dir[static_cast<std::size_t>(i)] = s;
            descent += s * g[static_cast<std::size_t>(i)];
        }
        if (descent >= 0.0) {  // lost positive definiteness; restart from steepest descent
            reset_h();
            descent = 0.0;
            for (int i = 0; i < 16; ++i) {
                dir[static_cast<std::size_t>(i)] = -g[static_cast<std::size_t>(i)];
                descent -= g[static_cast<std::size_t>(i)] * g[static_cast<std::size_t>(i)];
            }
            if (descent == 0.0) {
                result.status = TomoStatus::Converged;
                break;
            }
        }

        double alpha = 1.0;
        CholeskyParams x_new = x;
        double f_new = f;
        bool improved = false;
        while (alpha > 1e-20) {
            for (int i = 0; i < 16; ++i)
                x_new.t[static_cast<std::size_t>(i)] =
                    x.t[static_cast<std::size_t>(i)] + alpha * dir[static_cast<std::size_t>(i)];
            f_new = nll_and_gradient(x_new, counts, flux, nullptr);
            if (f_new <= f + 1e-4 * alpha * descent) {
                improved = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!improved) {
            result.status = TomoStatus::Converged;
            break;
        }

        nll_and_gradient(x_new, counts, flux, &g_new);

        // BFGS inverse-Hessian update, skipped when curvature is too small
        std::array<double, 16> s_vec{}, y_vec{};
        double sy = 0.0, ss = 0.0, yy = 0.0;
        for (int i = 0; i < 16; ++i) {
            s_vec[static_cast<std::size_t>(i)] = alpha * dir[static_cast<std::size_t>(i)];
            y_vec[static_cast<std::size_t>(i)] =
                g_new[static_cast<std::size_t>(i)] - g[static_cast<std::size_t>(i)];
            sy += s_vec[static_cast<std::size_t>(i)] * y_vec[static_cast<std::size_t>(i)];
            ss += s_vec[static_cast<std::size_t>(i)] * s_vec[static_cast<std::size_t>(i)];
            yy += y_vec[static_cast<std::size_t>(i)] * y_vec[static_cast<std::size_t>(i)];
        }
        if (sy > 1e-12 * std::sqrt(ss * yy)) {
            std::array<double, 16> hy{};
            double yhy = 0.0;
            for (int i = 0; i < 16; ++i) {
                double acc = 0.0;
                for (int j = 0; j < 16; ++j)
                    acc += h[static_cast<std::size_t>(i * 16 + j)] * y_vec[static_cast<std::size_t>(j)];
                hy[static_cast<std::size_t>(i)] = acc;
                yhy += y_vec[static_cast<std::size_t>(i)] * acc;
            }
            double r = 1.0 / sy;
            for (int i = 0; i < 16; ++i)
                for (int j = 0; j < 16; ++j) {
                    double upd = (1.0 + r * yhy) * r * s_vec[static_cast<std::size_t>(i)] *
                                     s_vec[static_cast<std::size_t>(j)] -
                                 r * (s_vec[static_cast<std::size_t>(i)] * hy[static_cast<std::size_t>(j)] +
                                      hy[static_cast<std::size_t>(i)] * s_vec[static_cast<std::size_t>(j)]);
                    h[static_cast<std::size_t>(i * 16 + j)] += upd;
                }
        }

        double rel_improvement = (f - f_new) / std::max(1.0, std::abs(f_new));
        x = x_new;
        f = f_new;
        g = g_new;
        if (rel_improvement < kRelTol) {
            result.status = TomoStatus::Converged;
            ++iter;
            break;
        }
    }

    result.rho = density_from_params(x);
    result.nll = f;
    result.iterations = iter;
    return result;
}

TomographyMap pixelwise_tomography(const MeasurementSet& set, int threads) {
    const std::size_t n_pixels = set.grid.pixel_count();
    TomographyMap map;
    map.grid = set.grid;
    map.pixels.resize(n_pixels);

    unsigned n_threads = threads > 0 ? static_cast<unsigned>(threads)
                                     : std::max(1u, std::thread::hardware_concurrency());
    n_threads = static_cast<unsigned>(
        std::min<std::size_t>(n_threads, std::max<std::size_t>(1, n_pixels)));

    std::atomic<std::size_t> next{0};
    constexpr std::size_t kChunk = 64;
    auto worker = [&] {
        for (;;) {
            std::size_t begin = next.fetch_add(kChunk);
            if (begin >= n_pixels) return;
            std::size_t end = std::min(begin + kChunk, n_pixels);
            for (std::size_t p = begin; p < end; ++p) {
                PixelCounts counts;
                for (int k = 0; k < 16; ++k)
                    counts[static_cast<std::size_t>(k)] =
                        static_cast<double>(set.frames[static_cast<std::size_t>(k)].counts[p]);
                map.pixels[p] = mle_reconstruct(counts);
            }
        }
    };

    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_threads);
        for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    return map;
}

}  // namespace lovtomo
