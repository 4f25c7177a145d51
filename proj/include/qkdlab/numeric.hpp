#pragma once

// Dense complex linear algebra and entropy functions for small operators
// (dimension <= 32). Basis convention: subsystems are ordered as their
// labels, and a composite index is the row-major Kronecker index, i.e. the
// first subsystem is the slowest-varying digit.

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace qkdlab {

using Complex = std::complex<double>;

namespace tolerance {
inline constexpr double kHermitian = 1e-12;
inline constexpr double kTrace = 1e-12;
inline constexpr double kMinEigenvalue = -1e-10;
inline constexpr double kEigenInputHermitian = 1e-10;
inline constexpr double kEntropyCutoff = 1e-14;
inline constexpr double kProbabilitySum = 1e-12;
}  // namespace tolerance

class ComplexMatrix {
 public:
  ComplexMatrix() = default;
  explicit ComplexMatrix(std::size_t dim);
  ComplexMatrix(std::size_t dim, std::vector<Complex> entries);

  static ComplexMatrix identity(std::size_t dim);
  static ComplexMatrix diagonal(std::span<const double> values);
  // |v><v|
  static ComplexMatrix projector(std::span<const Complex> v);

  std::size_t dim() const { return dim_; }
  Complex& operator()(std::size_t row, std::size_t col) { return entries_[row * dim_ + col]; }
  const Complex& operator()(std::size_t row, std::size_t col) const {
    return entries_[row * dim_ + col];
  }
  std::span<const Complex> entries() const { return entries_; }

  ComplexMatrix adjoint() const;
  Complex trace() const;
  // max |a_ij - b_ij|
  double max_abs_diff(const ComplexMatrix& other) const;
  // max |a_ij - conj(a_ji)|
  double hermiticity_defect() const;
  bool is_finite() const;

  ComplexMatrix& operator+=(const ComplexMatrix& rhs);
  ComplexMatrix& operator-=(const ComplexMatrix& rhs);
  ComplexMatrix& operator*=(Complex scale);

  friend ComplexMatrix operator+(ComplexMatrix lhs, const ComplexMatrix& rhs) { return lhs += rhs; }
  friend ComplexMatrix operator-(ComplexMatrix lhs, const ComplexMatrix& rhs) { return lhs -= rhs; }
  friend ComplexMatrix operator*(ComplexMatrix lhs, Complex scale) { return lhs *= scale; }
  friend ComplexMatrix operator*(Complex scale, ComplexMatrix rhs) { return rhs *= scale; }
  friend ComplexMatrix operator*(const ComplexMatrix& lhs, const ComplexMatrix& rhs);

 private:
  std::size_t dim_ = 0;
  std::vector<Complex> entries_;
};

// Kronecker product; `a` carries the slow index.
ComplexMatrix tensor_product(const ComplexMatrix& a, const ComplexMatrix& b);

struct EigenSystem {
  std::vector<double> values;  // ascending
  ComplexMatrix vectors;       // column k belongs to values[k]
};

// Cyclic Jacobi rotations. Eigenvectors are phase-fixed so that their
// largest-magnitude component (first one on ties) is real and positive.
EigenSystem hermitian_eigensystem(const ComplexMatrix& m);
std::vector<double> hermitian_eigenvalues(const ComplexMatrix& m);

class DensityOperator {
 public:
  // Validates Hermiticity, unit trace and positivity.
  DensityOperator(ComplexMatrix matrix, std::vector<std::size_t> dims,
                  std::vector<std::string> labels);

  const ComplexMatrix& matrix() const { return matrix_; }
  const std::vector<std::size_t>& dims() const { return dims_; }
  const std::vector<std::string>& labels() const { return labels_; }
  std::size_t dim() const { return matrix_.dim(); }

  bool has_label(std::string_view label) const;
  std::size_t position(std::string_view label) const;
  std::size_t dim_of(std::string_view label) const { return dims_[position(label)]; }
  double purity() const;

 private:
  ComplexMatrix matrix_;
  std::vector<std::size_t> dims_;
  std::vector<std::string> labels_;
};

DensityOperator partial_trace(const DensityOperator& rho, std::span<const std::string> keep);
DensityOperator partial_trace(const DensityOperator& rho, std::initializer_list<std::string> keep);

// -sum p log2 p over a spectrum. Values in [-1e-10, 0) are clamped to zero,
// values below 1e-14 contribute nothing, anything more negative throws.
double spectrum_entropy(std::span<const double> spectrum);

double von_neumann_entropy(const DensityOperator& rho);
// S(XE) - S(E)
double conditional_vn_entropy(const DensityOperator& rho, std::string_view x_label,
                              std::string_view e_label);

class ProbabilityVector {
 public:
  explicit ProbabilityVector(std::vector<double> weights);
  std::span<const double> weights() const { return weights_; }
  double entropy() const;

 private:
  std::vector<double> weights_;
};

// Joint distribution p(x, y) stored row-major with x as the slow index.
class JointDistribution {
 public:
  JointDistribution(std::size_t x_size, std::size_t y_size, std::vector<double> weights);
  std::size_t x_size() const { return x_size_; }
  std::size_t y_size() const { return y_size_; }
  double operator()(std::size_t x, std::size_t y) const { return joint_.weights()[x * y_size_ + y]; }
  const ProbabilityVector& joint() const { return joint_; }
  ProbabilityVector marginal_y() const;

 private:
  std::size_t x_size_;
  std::size_t y_size_;
  ProbabilityVector joint_;
};

// H(X,Y) - H(Y) in bits.
double shannon_cond_entropy(const JointDistribution& joint);
double binary_entropy(double q);
// 1/2 sum |mu_i| over the eigenvalues of a - b.
double trace_distance(const DensityOperator& a, const DensityOperator& b);

}  // namespace qkdlab
