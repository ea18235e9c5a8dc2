#include "lovtomo/qstate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace lovtomo {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

}  // namespace

Pol pol_from_char(char c) {
    switch (c) {
        case 'H': return Pol::H;
        case 'V': return Pol::V;
        case 'D': return Pol::D;
        case 'A': return Pol::A;
        case 'R': return Pol::R;
        case 'L': return Pol::L;
        default: throw std::invalid_argument(std::string("unknown polarization label: ") + c);
    }
}

char pol_to_char(Pol p) {
    switch (p) {
        case Pol::H: return 'H';
        case Pol::V: return 'V';
        case Pol::D: return 'D';
        case Pol::A: return 'A';
        case Pol::R: return 'R';
        case Pol::L: return 'L';
    }
    throw std::invalid_argument("unknown polarization label");
}

const char* bell_name(Bell b) {
    switch (b) {
        case Bell::PhiPlus: return "phi_plus";
        case Bell::PhiMinus: return "phi_minus";
        case Bell::PsiPlus: return "psi_plus";
        case Bell::PsiMinus: return "psi_minus";
    }
    throw std::invalid_argument("unknown Bell label");
}

double Ket2::norm() const {
    return std::sqrt(std::norm(a[0]) + std::norm(a[1]));
}

double TwoQubitKet::norm() const {
    double s = 0.0;
    for (const auto& c : a) s += std::norm(c);
    return std::sqrt(s);
}

Operator2 Operator2::identity() {
    Operator2 u;
    u.m = {Complex(1, 0), Complex(0, 0), Complex(0, 0), Complex(1, 0)};
    return u;
}

Operator2 Operator2::adjoint() const {
    Operator2 r;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) r.at(i, j) = std::conj(at(j, i));
    return r;
}

Operator4 Operator4::identity() {
    Operator4 u;
    for (int i = 0; i < 4; ++i) u.at(i, i) = Complex(1, 0);
    return u;
}

Operator4 Operator4::adjoint() const {
    Operator4 r;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) r.at(i, j) = std::conj(at(j, i));
    return r;
}

Complex Operator4::trace() const {
    return at(0, 0) + at(1, 1) + at(2, 2) + at(3, 3);
}

Operator2 operator*(const Operator2& a, const Operator2& b) {
    Operator2 r;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            r.at(i, j) = a.at(i, 0) * b.at(0, j) + a.at(i, 1) * b.at(1, j);
    return r;
}

Operator4 operator*(const Operator4& a, const Operator4& b) {
    Operator4 r;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            Complex s(0, 0);
            for (int k = 0; k < 4; ++k) s += a.at(i, k) * b.at(k, j);
            r.at(i, j) = s;
        }
    return r;
}

Ket2 apply(const Operator2& u, const Ket2& k) {
    Ket2 r;
    r.a[0] = u.at(0, 0) * k.a[0] + u.at(0, 1) * k.a[1];
    r.a[1] = u.at(1, 0) * k.a[0] + u.at(1, 1) * k.a[1];
    return r;
}

TwoQubitKet apply(const Operator4& u, const TwoQubitKet& k) {
    TwoQubitKet r;
    for (int i = 0; i < 4; ++i) {
        Complex s(0, 0);
        for (int j = 0; j < 4; ++j) s += u.at(i, j) * k.a[static_cast<std::size_t>(j)];
        r.a[static_cast<std::size_t>(i)] = s;
    }
    return r;
}

Complex inner(const Ket2& a, const Ket2& b) {
    return std::conj(a.a[0]) * b.a[0] + std::conj(a.a[1]) * b.a[1];
}

Complex inner(const TwoQubitKet& a, const TwoQubitKet& b) {
    Complex s(0, 0);
    for (std::size_t i = 0; i < 4; ++i) s += std::conj(a.a[i]) * b.a[i];
    return s;
}

Operator2 pauli_x() {
    Operator2 u;
    u.m = {Complex(0, 0), Complex(1, 0), Complex(1, 0), Complex(0, 0)};
    return u;
}

Operator2 pauli_y() {
    Operator2 u;
    u.m = {Complex(0, 0), Complex(0, -1), Complex(0, 1), Complex(0, 0)};
    return u;
}

Operator2 pauli_z() {
    Operator2 u;
    u.m = {Complex(1, 0), Complex(0, 0), Complex(0, 0), Complex(-1, 0)};
    return u;
}

double unitarity_residual(const Operator2& u) {
    Operator2 p = u.adjoint() * u;
    double worst = 0.0;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            Complex want = (i == j) ? Complex(1, 0) : Complex(0, 0);
            worst = std::max(worst, std::abs(p.at(i, j) - want));
        }
    return worst;
}

DensityMatrix DensityMatrix::pure(const TwoQubitKet& psi) {
    double n = psi.norm();
    if (!(n > 0.0) || !std::isfinite(n))
        throw std::invalid_argument("density matrix: zero or non-finite ket");
    Operator4 m;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            m.at(i, j) = psi.a[static_cast<std::size_t>(i)] *
                         std::conj(psi.a[static_cast<std::size_t>(j)]) / (n * n);
    return DensityMatrix(m);
}

double DensityMatrix::hermiticity_residual() const {
    double worst = 0.0;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            worst = std::max(worst, std::abs(m_.at(i, j) - std::conj(m_.at(j, i))));
    return worst;
}

double DensityMatrix::trace_real() const {
    return m_.trace().real();
}

DensityMatrix DensityMatrix::from_matrix(const Operator4& m) {
    DensityMatrix rho(m);
    if (rho.hermiticity_residual() > 1e-9)
        throw std::invalid_argument("density matrix: not Hermitian within 1e-9");
    if (std::abs(rho.trace_real() - 1.0) > 1e-9)
        throw std::invalid_argument("density matrix: trace deviates from 1 beyond 1e-9");
    EigenSystem4 es = eigen_hermitian(m);
    if (es.values[3] < -1e-9)
        throw std::invalid_argument("density matrix: negative eigenvalue beyond 1e-9");
    return rho;
}

Ket2 polarization_ket(Pol label) {
    Ket2 k;
    switch (label) {
        case Pol::H: k.a = {Complex(1, 0), Complex(0, 0)}; break;
        case Pol::V: k.a = {Complex(0, 0), Complex(1, 0)}; break;
        case Pol::D: k.a = {Complex(kInvSqrt2, 0), Complex(kInvSqrt2, 0)}; break;
        case Pol::A: k.a = {Complex(kInvSqrt2, 0), Complex(-kInvSqrt2, 0)}; break;
        case Pol::R: k.a = {Complex(kInvSqrt2, 0), Complex(0, kInvSqrt2)}; break;
        case Pol::L: k.a = {Complex(kInvSqrt2, 0), Complex(0, -kInvSqrt2)}; break;
        default: throw std::invalid_argument("unknown polarization label");
    }
    return k;
}

TwoQubitKet bell_state(Bell label) {
    TwoQubitKet k;
    const Complex z(0, 0), p(kInvSqrt2, 0), n(-kInvSqrt2, 0);
    switch (label) {
        case Bell::PhiPlus: k.a = {p, z, z, p}; break;
        case Bell::PhiMinus: k.a = {p, z, z, n}; break;
        case Bell::PsiPlus: k.a = {z, p, p, z}; break;
        case Bell::PsiMinus: k.a = {z, p, n, z}; break;
        default: throw std::invalid_argument("unknown Bell label");
    }
    return k;
}

TwoQubitKet tensor(const Ket2& a, const Ket2& b) {
    TwoQubitKet k;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            k.a[static_cast<std::size_t>(2 * i + j)] =
                a.a[static_cast<std::size_t>(i)] * b.a[static_cast<std::size_t>(j)];
    return k;
}

Operator4 tensor(const Operator2& a, const Operator2& b) {
    Operator4 r;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 2; ++k)
                for (int l = 0; l < 2; ++l)
                    r.at(2 * i + k, 2 * j + l) = a.at(i, j) * b.at(k, l);
    return r;
}

double fidelity(const DensityMatrix& rho, const TwoQubitKet& psi) {
    if (rho.hermiticity_residual() > 1e-9)
        throw std::invalid_argument("fidelity: rho not Hermitian within 1e-9");
    if (std::abs(rho.trace_real() - 1.0) > 1e-9)
        throw std::invalid_argument("fidelity: rho trace deviates from 1 beyond 1e-9");
    Complex s(0, 0);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            s += std::conj(psi.a[static_cast<std::size_t>(i)]) * rho.at(i, j) *
                 psi.a[static_cast<std::size_t>(j)];
    double f = s.real();
    if (f < -1e-9 || f > 1.0 + 1e-9)
        throw std::invalid_argument("fidelity: value outside [0,1], rho is not physical");
    return std::clamp(f, 0.0, 1.0);
}

Operator2 partial_trace(const DensityMatrix& rho, Subsystem traced_out) {
    Operator2 r;
    if (traced_out == Subsystem::Signal) {
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                r.at(i, j) = rho.at(i, j) + rho.at(2 + i, 2 + j);
    } else {
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                r.at(i, j) = rho.at(2 * i, 2 * j) + rho.at(2 * i + 1, 2 * j + 1);
    }
    return r;
}

EigenSystem4 eigen_hermitian(const Operator4& m) {
    double herm = 0.0;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            herm = std::max(herm, std::abs(m.at(i, j) - std::conj(m.at(j, i))));
    if (herm > 1e-9) throw std::invalid_argument("eigen_hermitian: input not Hermitian within 1e-9");

    // symmetrized working copy
    Complex a[4][4];
    Complex v[4][4] = {};
    double scale = 0.0;
    for (int i = 0; i < 4; ++i) {
        v[i][i] = Complex(1, 0);
        for (int j = 0; j < 4; ++j) {
            a[i][j] = 0.5 * (m.at(i, j) + std::conj(m.at(j, i)));
            scale = std::max(scale, std::abs(a[i][j]));
        }
    }
    if (scale == 0.0) scale = 1.0;

    // cyclic complex Jacobi sweeps
    const double tol = 1e-15 * scale;
    for (int sweep = 0; sweep < 60; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < 4; ++p)
            for (int q = p + 1; q < 4; ++q) off = std::max(off, std::abs(a[p][q]));
        if (off <= tol) break;
        for (int p = 0; p < 4; ++p) {
            for (int q = p + 1; q < 4; ++q) {
                double b = std::abs(a[p][q]);
                if (b <= tol * 1e-2) continue;
                Complex phase = a[p][q] / b;  // a_pq = b * phase
                double theta = 0.5 * std::atan2(2.0 * b, a[p][p].real() - a[q][q].real());
                double c = std::cos(theta), s = std::sin(theta);
                // R: R_pp = c, R_pq = -s*phase, R_qp = s*conj(phase), R_qq = c
                // rows: A <- R^dag A
                for (int j = 0; j < 4; ++j) {
                    Complex ap = a[p][j], aq = a[q][j];
                    a[p][j] = c * ap + s * phase * aq;
                    a[q][j] = -s * std::conj(phase) * ap + c * aq;
                }
                // columns: A <- A R ; eigenvector accumulation V <- V R
                for (int i = 0; i < 4; ++i) {
                    Complex ap = a[i][p], aq = a[i][q];
                    a[i][p] = c * ap + s * std::conj(phase) * aq;
                    a[i][q] = -s * phase * ap + c * aq;
                    Complex vp = v[i][p], vq = v[i][q];
                    v[i][p] = c * vp + s * std::conj(phase) * vq;
                    v[i][q] = -s * phase * vp + c * vq;
                }
            }
        }
    }

    EigenSystem4 out;
    std::array<int, 4> order{0, 1, 2, 3};
    std::array<double, 4> vals{};
    for (int i = 0; i < 4; ++i) vals[static_cast<std::size_t>(i)] = a[i][i].real();
    std::sort(order.begin(), order.end(),
              [&](int x, int y) { return vals[static_cast<std::size_t>(x)] > vals[static_cast<std::size_t>(y)]; });
    for (int k = 0; k < 4; ++k) {
        int src = order[static_cast<std::size_t>(k)];
        out.values[static_cast<std::size_t>(k)] = vals[static_cast<std::size_t>(src)];
        for (int i = 0; i < 4; ++i)
            out.vectors[static_cast<std::size_t>(k)].a[static_cast<std::size_t>(i)] = v[i][src];
    }
    return out;
}

}  // namespace lovtomo
