#pragma once

#include <array>
#include <complex>
#include <cstddef>

// Complex linear algebra and quantum-state primitives for two-level and
// two-qubit systems. Basis conventions used throughout the library:
//   - single qubit: (H, V), H = |0>, V = |1>
//   - two qubits:   (HH, HV, VH, VV), signal qubit first
// Kets are unit norm; global phase carries no meaning and comparisons in
// tests should be phase-insensitive.

namespace lovtomo {

using Complex = std::complex<double>;

// ---------------------------------------------------------------------------
// labels

enum class Pol { H, V, D, A, R, L };
enum class Bell { PhiPlus, PhiMinus, PsiPlus, PsiMinus };
enum class Subsystem { Signal, Idler };

/// Parses one of H,V,D,A,R,L; throws std::invalid_argument otherwise.
Pol pol_from_char(char c);
char pol_to_char(Pol p);

/// Bell label names as used in file outputs ("phi_plus", ...).
const char* bell_name(Bell b);

// ---------------------------------------------------------------------------
// value types

struct Ket2 {
    std::array<Complex, 2> a{};

    double norm() const;
};

struct TwoQubitKet {
    std::array<Complex, 4> a{};

    double norm() const;
};

/// 2x2 complex matrix, row-major.
struct Operator2 {
    std::array<Complex, 4> m{};

    Complex& at(int r, int c) { return m[static_cast<std::size_t>(2 * r + c)]; }
    const Complex& at(int r, int c) const { return m[static_cast<std::size_t>(2 * r + c)]; }

    static Operator2 identity();
    Operator2 adjoint() const;
    Complex trace() const { return m[0] + m[3]; }
};

/// 4x4 complex matrix, row-major.
struct Operator4 {
    std::array<Complex, 16> m{};

    Complex& at(int r, int c) { return m[static_cast<std::size_t>(4 * r + c)]; }
    const Complex& at(int r, int c) const { return m[static_cast<std::size_t>(4 * r + c)]; }

    static Operator4 identity();
    Operator4 adjoint() const;
    Complex trace() const;
};

Operator2 operator*(const Operator2& a, const Operator2& b);
Operator4 operator*(const Operator4& a, const Operator4& b);
Ket2 apply(const Operator2& u, const Ket2& k);
TwoQubitKet apply(const Operator4& u, const TwoQubitKet& k);

Complex inner(const Ket2& a, const Ket2& b);           // <a|b>
Complex inner(const TwoQubitKet& a, const TwoQubitKet& b);

Operator2 pauli_x();
Operator2 pauli_y();
Operator2 pauli_z();

/// Max entrywise |U^dag U - I|; zero for an exact unitary.
double unitarity_residual(const Operator2& u);

// ---------------------------------------------------------------------------
// density matrices

/// 4x4 Hermitian, PSD, unit-trace matrix. The checked factories enforce the
/// physicality tolerances (hermiticity/trace 1e-9, min eigenvalue >= -1e-9);
/// `unchecked` is for internal code paths that construct physical matrices
/// by construction.
class DensityMatrix {
  public:
    DensityMatrix() : m_(Operator4::identity()) {
        for (auto& v : m_.m) v *= 0.25;
    }

    static DensityMatrix pure(const TwoQubitKet& psi);
    static DensityMatrix from_matrix(const Operator4& m);   // validates, throws
    static DensityMatrix unchecked(const Operator4& m) { return DensityMatrix(m); }
    static DensityMatrix maximally_mixed() { return DensityMatrix(); }

    const Operator4& matrix() const { return m_; }
    const Complex& at(int r, int c) const { return m_.at(r, c); }

    double hermiticity_residual() const;
    double trace_real() const;

  private:
    explicit DensityMatrix(const Operator4& m) : m_(m) {}
    Operator4 m_;
};

// ---------------------------------------------------------------------------
// operations

/// Unit-norm polarization ket in the (H, V) basis.
///   D=(H+V)/sqrt2, A=(H-V)/sqrt2, R=(H+iV)/sqrt2, L=(H-iV)/sqrt2
Ket2 polarization_ket(Pol label);

/// Standard Bell state in the (HH, HV, VH, VV) ordering.
TwoQubitKet bell_state(Bell label);

/// Kronecker product, left factor on the signal (first) qubit.
TwoQubitKet tensor(const Ket2& a, const Ket2& b);
Operator4 tensor(const Operator2& a, const Operator2& b);

/// <psi|rho|psi> for a pure target. Discards imaginary residue up to 1e-10
/// and clamps to [0, 1]; throws on a rho that violates the physicality
/// tolerances.
double fidelity(const DensityMatrix& rho, const TwoQubitKet& psi);

/// Traces out the named subsystem; returns the 2x2 state of the other one.
Operator2 partial_trace(const DensityMatrix& rho, Subsystem traced_out);

struct EigenSystem4 {
    std::array<double, 4> values{};        // descending
    std::array<TwoQubitKet, 4> vectors{};  // orthonormal, vectors[k] <-> values[k]
};

/// Eigendecomposition of a 4x4 Hermitian matrix (cyclic complex Jacobi).
/// Throws std::invalid_argument if the input is not Hermitian within 1e-9.
EigenSystem4 eigen_hermitian(const Operator4& m);

}  // namespace lovtomo
