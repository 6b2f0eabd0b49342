#pragma once

// Dense complex linear algebra for quantum registers and gates.
//
// Qubit ordering: in a register of N qubits, qubit 1 is the most significant
// bit of the basis index. tensor(a, b) places `a` on the lower-numbered
// qubits, so applyAt(u, v, k) acts on qubits k+1 .. k+u.qubits().

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qmll/error.hpp"

namespace qmll {

using Complex = std::complex<double>;

// Construction-time unitarity tolerance on ||M^dagger M - I||_F.
inline constexpr double kUnitaryTolerance = 1e-9;
// Tolerance for end-to-end equalities (semantics, round trips).
inline constexpr double kSemanticTolerance = 1e-8;

class ComplexMatrix {
 public:
  ComplexMatrix() = default;
  ComplexMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), entries_(rows * cols) {}
  ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<Complex> entries)
      : rows_(rows), cols_(cols), entries_(std::move(entries)) {
    if (entries_.size() != rows_ * cols_)
      throw PreconditionError("matrix entry count does not match its shape");
  }
  ComplexMatrix(std::initializer_list<std::initializer_list<Complex>> rows) {
    rows_ = rows.size();
    cols_ = rows_ ? rows.begin()->size() : 0;
    for (const auto& r : rows) {
      if (r.size() != cols_) throw PreconditionError("ragged matrix literal");
      entries_.insert(entries_.end(), r.begin(), r.end());
    }
  }

  static ComplexMatrix identity(std::size_t n) {
    ComplexMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool square() const { return rows_ == cols_; }
  const std::vector<Complex>& entries() const { return entries_; }

  Complex& operator()(std::size_t r, std::size_t c) { return entries_[r * cols_ + c]; }
  const Complex& operator()(std::size_t r, std::size_t c) const { return entries_[r * cols_ + c]; }

  friend bool operator==(const ComplexMatrix&, const ComplexMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Complex> entries_;
};

inline ComplexMatrix matmul(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.cols() != b.rows())
    throw PreconditionError("matmul: dimension mismatch (" + std::to_string(a.cols()) + " vs " +
                            std::to_string(b.rows()) + ")");
  ComplexMatrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const Complex aik = a(i, k);
      if (aik == Complex(0.0)) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix c(a.rows() * b.rows(), a.cols() * b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      for (std::size_t k = 0; k < b.rows(); ++k)
        for (std::size_t l = 0; l < b.cols(); ++l)
          c(i * b.rows() + k, j * b.cols() + l) = a(i, j) * b(k, l);
  return c;
}

inline ComplexMatrix adjoint(const ComplexMatrix& a) {
  ComplexMatrix c(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) c(j, i) = std::conj(a(i, j));
  return c;
}

inline double maxAbsDifference(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw PreconditionError("approxEqual: shape mismatch");
  double worst = 0.0;
  for (std::size_t i = 0; i < a.entries().size(); ++i)
    worst = std::max(worst, std::abs(a.entries()[i] - b.entries()[i]));
  return worst;
}

inline bool approxEqual(const ComplexMatrix& a, const ComplexMatrix& b, double tol) {
  return maxAbsDifference(a, b) <= tol;
}

// ||M^dagger M - I||_F
inline double unitarityDefect(const ComplexMatrix& m) {
  if (!m.square()) return INFINITY;
  ComplexMatrix p = matmul(adjoint(m), m);
  double sum = 0.0;
  for (std::size_t i = 0; i < p.rows(); ++i)
    for (std::size_t j = 0; j < p.cols(); ++j)
      sum += std::norm(p(i, j) - (i == j ? Complex(1.0) : Complex(0.0)));
  return std::sqrt(sum);
}

// Number of qubits n with 2^n == dim, or nullopt.
inline std::optional<std::size_t> qubitCount(std::size_t dim) {
  std::size_t n = 0;
  while ((std::size_t{1} << n) < dim) ++n;
  if ((std::size_t{1} << n) != dim) return std::nullopt;
  return n;
}

class UnitaryMatrix {
 public:
  // Throws PreconditionError unless m is a 2^n x 2^n unitary within tol.
  explicit UnitaryMatrix(ComplexMatrix m, double tol = kUnitaryTolerance) : m_(std::move(m)) {
    if (!m_.square()) throw PreconditionError("unitary: matrix is not square");
    auto n = qubitCount(m_.rows());
    if (!n) throw PreconditionError("unitary: dimension is not a power of two");
    qubits_ = *n;
    double defect = unitarityDefect(m_);
    if (!(defect <= tol))
      throw PreconditionError("unitary: matrix is not unitary (defect " + std::to_string(defect) +
                              ")");
  }

  static UnitaryMatrix identity(std::size_t qubits) {
    return UnitaryMatrix(ComplexMatrix::identity(std::size_t{1} << qubits));
  }

  std::size_t qubits() const { return qubits_; }
  std::size_t dim() const { return m_.rows(); }
  const ComplexMatrix& matrix() const { return m_; }
  bool isIdentity(double tol = 1e-12) const {
    return approxEqual(m_, ComplexMatrix::identity(dim()), tol);
  }

  friend bool operator==(const UnitaryMatrix& a, const UnitaryMatrix& b) { return a.m_ == b.m_; }

 private:
  std::size_t qubits_ = 0;
  ComplexMatrix m_;
};

// The product and tensor of unitaries are unitary; the checks below use a
// looser bound so that accumulated rounding along long reductions is not
// mistaken for a broken invariant.
inline UnitaryMatrix matmul(const UnitaryMatrix& a, const UnitaryMatrix& b) {
  return UnitaryMatrix(matmul(a.matrix(), b.matrix()), kSemanticTolerance);
}

inline UnitaryMatrix tensor(const UnitaryMatrix& a, const UnitaryMatrix& b) {
  return UnitaryMatrix(kron(a.matrix(), b.matrix()), kSemanticTolerance);
}

inline UnitaryMatrix adjoint(const UnitaryMatrix& u) {
  return UnitaryMatrix(adjoint(u.matrix()), kSemanticTolerance);
}

class StateVector {
 public:
  StateVector() : amplitudes_{Complex(1.0)} {}
  StateVector(std::size_t qubits, std::vector<Complex> amplitudes)
      : qubits_(qubits), amplitudes_(std::move(amplitudes)) {
    if (amplitudes_.size() != (std::size_t{1} << qubits_))
      throw PreconditionError("state vector size is not 2^qubits");
  }

  static StateVector basis(std::size_t qubits, std::size_t index) {
    std::vector<Complex> a(std::size_t{1} << qubits);
    if (index >= a.size()) throw PreconditionError("basis index out of range");
    a[index] = 1.0;
    return StateVector(qubits, std::move(a));
  }

  std::size_t qubits() const { return qubits_; }
  std::size_t dim() const { return amplitudes_.size(); }
  const std::vector<Complex>& amplitudes() const { return amplitudes_; }
  std::vector<Complex>& amplitudes() { return amplitudes_; }
  const Complex& operator[](std::size_t i) const { return amplitudes_[i]; }

  double norm() const {
    double s = 0.0;
    for (const auto& a : amplitudes_) s += std::norm(a);
    return std::sqrt(s);
  }

 private:
  std::size_t qubits_ = 0;
  std::vector<Complex> amplitudes_;
};

inline double maxAbsDifference(const StateVector& a, const StateVector& b) {
  if (a.dim() != b.dim()) throw PreconditionError("state vectors differ in size");
  double worst = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

// Applies I_offset (x) u (x) I_rest to the register without materializing
// the full operator.
inline StateVector applyAt(const UnitaryMatrix& u, const StateVector& v, std::size_t offset) {
  const std::size_t k = u.qubits();
  const std::size_t n = v.qubits();
  if (offset + k > n)
    throw PreconditionError("applyAt: gate on qubits " + std::to_string(offset + 1) + ".." +
                            std::to_string(offset + k) + " exceeds register of " +
                            std::to_string(n) + " qubits");
  const std::size_t low = n - offset - k;
  const std::size_t block = std::size_t{1} << k;
  const std::size_t lowDim = std::size_t{1} << low;
  const std::size_t highDim = std::size_t{1} << offset;
  const ComplexMatrix& m = u.matrix();

  std::vector<Complex> out(v.dim());
  std::vector<Complex> in(block);
  for (std::size_t hi = 0; hi < highDim; ++hi)
    for (std::size_t lo = 0; lo < lowDim; ++lo) {
      const std::size_t base = (hi << (k + low)) | lo;
      for (std::size_t b = 0; b < block; ++b) in[b] = v[base | (b << low)];
      for (std::size_t r = 0; r < block; ++r) {
        Complex acc = 0.0;
        for (std::size_t c = 0; c < block; ++c) acc += m(r, c) * in[c];
        out[base | (r << low)] = acc;
      }
    }
  return StateVector(n, std::move(out));
}

// I_offset (x) u (x) I_rest as an explicit matrix on `total` qubits.
inline ComplexMatrix embed(const UnitaryMatrix& u, std::size_t offset, std::size_t total) {
  if (offset + u.qubits() > total) throw PreconditionError("embed: gate exceeds register");
  return kron(kron(ComplexMatrix::identity(std::size_t{1} << offset), u.matrix()),
              ComplexMatrix::identity(std::size_t{1} << (total - offset - u.qubits())));
}

// ---------------------------------------------------------------------------
// Named gate library: I{n}, H, X, Y, Z, S, T, CNOT, SWAP.

namespace gates {

inline UnitaryMatrix I(std::size_t n = 1) { return UnitaryMatrix::identity(n); }
inline UnitaryMatrix H() {
  const double s = 1.0 / std::sqrt(2.0);
  return UnitaryMatrix(ComplexMatrix{{s, s}, {s, -s}});
}
inline UnitaryMatrix X() { return UnitaryMatrix(ComplexMatrix{{0.0, 1.0}, {1.0, 0.0}}); }
inline UnitaryMatrix Y() {
  return UnitaryMatrix(ComplexMatrix{{0.0, Complex(0, -1)}, {Complex(0, 1), 0.0}});
}
inline UnitaryMatrix Z() { return UnitaryMatrix(ComplexMatrix{{1.0, 0.0}, {0.0, -1.0}}); }
inline UnitaryMatrix S() { return UnitaryMatrix(ComplexMatrix{{1.0, 0.0}, {0.0, Complex(0, 1)}}); }
inline UnitaryMatrix T() {
  return UnitaryMatrix(ComplexMatrix{{1.0, 0.0}, {0.0, std::polar(1.0, M_PI / 4)}});
}
// Control on the first (most significant) qubit.
inline UnitaryMatrix CNOT() {
  return UnitaryMatrix(
      ComplexMatrix{{1.0, 0.0, 0.0, 0.0}, {0.0, 1.0, 0.0, 0.0}, {0.0, 0.0, 0.0, 1.0}, {0.0, 0.0, 1.0, 0.0}});
}
inline UnitaryMatrix SWAP() {
  return UnitaryMatrix(
      ComplexMatrix{{1.0, 0.0, 0.0, 0.0}, {0.0, 0.0, 1.0, 0.0}, {0.0, 1.0, 0.0, 0.0}, {0.0, 0.0, 0.0, 1.0}});
}

// "I" alone is accepted as I1.
inline std::optional<UnitaryMatrix> byName(const std::string& name) {
  if (name == "H") return H();
  if (name == "X") return X();
  if (name == "Y") return Y();
  if (name == "Z") return Z();
  if (name == "S") return S();
  if (name == "T") return T();
  if (name == "CNOT") return CNOT();
  if (name == "SWAP") return SWAP();
  if (name == "I") return I(1);
  if (name.size() > 1 && name[0] == 'I') {
    std::size_t n = 0;
    for (std::size_t i = 1; i < name.size(); ++i) {
      if (name[i] < '0' || name[i] > '9') return std::nullopt;
      n = n * 10 + static_cast<std::size_t>(name[i] - '0');
      if (n > 16) return std::nullopt;
    }
    if (n == 0) return std::nullopt;
    return I(n);
  }
  return std::nullopt;
}

inline std::string identityName(std::size_t n) { return "I" + std::to_string(n); }

// Library name of u when it matches a named gate entry-wise within tol.
inline std::optional<std::string> nameOf(const UnitaryMatrix& u, double tol = 1e-12) {
  if (u.isIdentity(tol)) return identityName(u.qubits());
  static const char* kNames[] = {"H", "X", "Y", "Z", "S", "T", "CNOT", "SWAP"};
  for (const char* name : kNames) {
    UnitaryMatrix g = *byName(name);
    if (g.qubits() == u.qubits() && approxEqual(g.matrix(), u.matrix(), tol)) return name;
  }
  return std::nullopt;
}

}  // namespace gates

}  // namespace qmll
