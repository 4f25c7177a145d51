#include "qkdlab/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "qkdlab/errors.hpp"

namespace qkdlab {

namespace {

constexpr double kJacobiThreshold = 1e-14;
constexpr int kJacobiMaxSweeps = 100;

void require_same_dim(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.dim() != b.dim()) throw DomainError("matrix dimension mismatch");
}

std::size_t product(std::span<const std::size_t> dims) {
  return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
}

}  // namespace

ComplexMatrix::ComplexMatrix(std::size_t dim) : dim_(dim), entries_(dim * dim) {}

ComplexMatrix::ComplexMatrix(std::size_t dim, std::vector<Complex> entries)
    : dim_(dim), entries_(std::move(entries)) {
  if (entries_.size() != dim_ * dim_) throw DomainError("matrix entries do not form a square");
  if (!is_finite()) throw DomainError("matrix has non-finite entries");
}

ComplexMatrix ComplexMatrix::identity(std::size_t dim) {
  ComplexMatrix m(dim);
  for (std::size_t i = 0; i < dim; ++i) m(i, i) = 1.0;
  return m;
}

ComplexMatrix ComplexMatrix::diagonal(std::span<const double> values) {
  ComplexMatrix m(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) m(i, i) = values[i];
  return m;
}

ComplexMatrix ComplexMatrix::projector(std::span<const Complex> v) {
  ComplexMatrix m(v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = 0; j < v.size(); ++j) m(i, j) = v[i] * std::conj(v[j]);
  return m;
}

ComplexMatrix ComplexMatrix::adjoint() const {
  ComplexMatrix out(dim_);
  for (std::size_t i = 0; i < dim_; ++i)
    for (std::size_t j = 0; j < dim_; ++j) out(j, i) = std::conj((*this)(i, j));
  return out;
}

Complex ComplexMatrix::trace() const {
  Complex t = 0.0;
  for (std::size_t i = 0; i < dim_; ++i) t += (*this)(i, i);
  return t;
}

double ComplexMatrix::max_abs_diff(const ComplexMatrix& other) const {
  require_same_dim(*this, other);
  double worst = 0.0;
  for (std::size_t k = 0; k < entries_.size(); ++k)
    worst = std::max(worst, std::abs(entries_[k] - other.entries_[k]));
  return worst;
}

double ComplexMatrix::hermiticity_defect() const {
  double worst = 0.0;
  for (std::size_t i = 0; i < dim_; ++i)
    for (std::size_t j = i; j < dim_; ++j)
      worst = std::max(worst, std::abs((*this)(i, j) - std::conj((*this)(j, i))));
  return worst;
}

bool ComplexMatrix::is_finite() const {
  return std::all_of(entries_.begin(), entries_.end(), [](const Complex& z) {
    return std::isfinite(z.real()) && std::isfinite(z.imag());
  });
}

ComplexMatrix& ComplexMatrix::operator+=(const ComplexMatrix& rhs) {
  require_same_dim(*this, rhs);
  for (std::size_t k = 0; k < entries_.size(); ++k) entries_[k] += rhs.entries_[k];
  return *this;
}

ComplexMatrix& ComplexMatrix::operator-=(const ComplexMatrix& rhs) {
  require_same_dim(*this, rhs);
  for (std::size_t k = 0; k < entries_.size(); ++k) entries_[k] -= rhs.entries_[k];
  return *this;
}

ComplexMatrix& ComplexMatrix::operator*=(Complex scale) {
  for (auto& z : entries_) z *= scale;
  return *this;
}

ComplexMatrix operator*(const ComplexMatrix& lhs, const ComplexMatrix& rhs) {
  require_same_dim(lhs, rhs);
  const std::size_t n = lhs.dim();
  ComplexMatrix out(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) {
      const Complex a = lhs(i, k);
      if (a == Complex{}) continue;
      for (std::size_t j = 0; j < n; ++j) out(i, j) += a * rhs(k, j);
    }
  return out;
}

ComplexMatrix tensor_product(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (!a.is_finite() || !b.is_finite()) throw DomainError("tensor_product of non-finite matrix");
  const std::size_t da = a.dim();
  const std::size_t db = b.dim();
  ComplexMatrix out(da * db);
  for (std::size_t i = 0; i < da; ++i)
    for (std::size_t j = 0; j < da; ++j)
      for (std::size_t k = 0; k < db; ++k)
        for (std::size_t l = 0; l < db; ++l) out(i * db + k, j * db + l) = a(i, j) * b(k, l);
  return out;
}

EigenSystem hermitian_eigensystem(const ComplexMatrix& m) {
  if (m.hermiticity_defect() > tolerance::kEigenInputHermitian)
    throw DomainError("hermitian_eigensystem: input is not Hermitian");
  const std::size_t n = m.dim();
  // Work on the exactly Hermitian part.
  ComplexMatrix a = m;
  for (std::size_t i = 0; i < n; ++i) {
    a(i, i) = a(i, i).real();
    for (std::size_t j = i + 1; j < n; ++j) {
      const Complex avg = 0.5 * (m(i, j) + std::conj(m(j, i)));
      a(i, j) = avg;
      a(j, i) = std::conj(avg);
    }
  }
  ComplexMatrix v = ComplexMatrix::identity(n);

  double scale = 0.0;
  for (const auto& z : a.entries()) scale += std::norm(z);
  const double threshold = kJacobiThreshold * std::max(1.0, std::sqrt(scale));

  for (int sweep = 0; sweep < kJacobiMaxSweeps; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j) off += std::norm(a(i, j));
    if (std::sqrt(off) < threshold) break;

    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const Complex apq = a(p, q);
        const double mag = std::abs(apq);
        if (mag == 0.0) continue;
        // Rotate the phase of a_pq away, then apply a real Jacobi rotation.
        const Complex phase_conj = std::conj(apq) / mag;
        const double theta = (a(q, q).real() - a(p, p).real()) / (2.0 * mag);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        const Complex jpp = c;
        const Complex jpq = s;
        const Complex jqp = -s * phase_conj;
        const Complex jqq = c * phase_conj;

        for (std::size_t k = 0; k < n; ++k) {
          const Complex akp = a(k, p);
          const Complex akq = a(k, q);
          a(k, p) = akp * jpp + akq * jqp;
          a(k, q) = akp * jpq + akq * jqq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const Complex apk = a(p, k);
          const Complex aqk = a(q, k);
          a(p, k) = std::conj(jpp) * apk + std::conj(jqp) * aqk;
          a(q, k) = std::conj(jpq) * apk + std::conj(jqq) * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        a(p, p) = a(p, p).real();
        a(q, q) = a(q, q).real();
        for (std::size_t k = 0; k < n; ++k) {
          const Complex vkp = v(k, p);
          const Complex vkq = v(k, q);
          v(k, p) = vkp * jpp + vkq * jqp;
          v(k, q) = vkp * jpq + vkq * jqq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return a(i, i).real() < a(j, j).real(); });

  EigenSystem out;
  out.values.reserve(n);
  out.vectors = ComplexMatrix(n);
  for (std::size_t col = 0; col < n; ++col) {
    const std::size_t src = order[col];
    out.values.push_back(a(src, src).real());
    std::size_t pivot = 0;
    for (std::size_t k = 1; k < n; ++k)
      if (std::abs(v(k, src)) > std::abs(v(pivot, src)) + 1e-12) pivot = k;
    const Complex fix = std::abs(v(pivot, src)) > 0.0 ? std::conj(v(pivot, src)) / std::abs(v(pivot, src))
                                                        : Complex{1.0};
    for (std::size_t k = 0; k < n; ++k) out.vectors(k, col) = v(k, src) * fix;
  }
  return out;
}

std::vector<double> hermitian_eigenvalues(const ComplexMatrix& m) {
  return hermitian_eigensystem(m).values;
}

DensityOperator::DensityOperator(ComplexMatrix matrix, std::vector<std::size_t> dims,
                                 std::vector<std::string> labels)
    : matrix_(std::move(matrix)), dims_(std::move(dims)), labels_(std::move(labels)) {
  if (dims_.empty() || dims_.size() != labels_.size())
    throw DomainError("density operator needs one label per subsystem");
  if (std::find(dims_.begin(), dims_.end(), std::size_t{0}) != dims_.end())
    throw DomainError("subsystem dimension must be positive");
  if (product(dims_) != matrix_.dim()) throw DomainError("subsystem dimensions do not match matrix");
  for (std::size_t i = 0; i < labels_.size(); ++i)
    for (std::size_t j = i + 1; j < labels_.size(); ++j)
      if (labels_[i] == labels_[j]) throw DomainError("duplicate subsystem label " + labels_[i]);
  if (!matrix_.is_finite()) throw DomainError("density operator has non-finite entries");
  if (matrix_.hermiticity_defect() > tolerance::kHermitian)
    throw DomainError("density operator is not Hermitian");
  if (std::abs(matrix_.trace() - 1.0) > tolerance::kTrace)
    throw DomainError("density operator trace is not 1");
  const auto spectrum = hermitian_eigenvalues(matrix_);
  if (spectrum.front() < tolerance::kMinEigenvalue) {
    std::ostringstream msg;
    msg << "density operator is not positive semidefinite (min eigenvalue " << spectrum.front() << ")";
    throw DomainError(msg.str());
  }
}

bool DensityOperator::has_label(std::string_view label) const {
  return std::find(labels_.begin(), labels_.end(), label) != labels_.end();
}

std::size_t DensityOperator::position(std::string_view label) const {
  const auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) throw DomainError("unknown subsystem label " + std::string(label));
  return static_cast<std::size_t>(it - labels_.begin());
}

double DensityOperator::purity() const { return (matrix_ * matrix_).trace().real(); }

DensityOperator partial_trace(const DensityOperator& rho, std::span<const std::string> keep) {
  if (keep.empty()) throw DomainError("partial_trace: nothing to keep");
  const auto& dims = rho.dims();
  const std::size_t count = dims.size();
  std::vector<bool> kept(count, false);
  for (const auto& label : keep) kept[rho.position(label)] = true;

  std::vector<std::size_t> kept_dims;
  std::vector<std::string> kept_labels;
  std::vector<std::size_t> traced_dims;
  for (std::size_t s = 0; s < count; ++s) {
    if (kept[s]) {
      kept_dims.push_back(dims[s]);
      kept_labels.push_back(rho.labels()[s]);
    } else {
      traced_dims.push_back(dims[s]);
    }
  }
  const std::size_t kept_total = product(kept_dims);
  const std::size_t traced_total = product(traced_dims);

  // Full index for a (kept, traced) pair of compound indices.
  auto compose = [&](std::size_t kept_index, std::size_t traced_index) {
    std::vector<std::size_t> digits(count);
    for (std::size_t s = count; s-- > 0;) {
      if (kept[s]) {
        digits[s] = kept_index % dims[s];
        kept_index /= dims[s];
      } else {
        digits[s] = traced_index % dims[s];
        traced_index /= dims[s];
      }
    }
    std::size_t full = 0;
    for (std::size_t s = 0; s < count; ++s) full = full * dims[s] + digits[s];
    return full;
  };

  std::vector<std::size_t> lookup(kept_total * traced_total);
  for (std::size_t k = 0; k < kept_total; ++k)
    for (std::size_t t = 0; t < traced_total; ++t) lookup[k * traced_total + t] = compose(k, t);

  const ComplexMatrix& m = rho.matrix();
  ComplexMatrix out(kept_total);
  for (std::size_t r = 0; r < kept_total; ++r)
    for (std::size_t c = 0; c < kept_total; ++c) {
      Complex sum = 0.0;
      for (std::size_t t = 0; t < traced_total; ++t)
        sum += m(lookup[r * traced_total + t], lookup[c * traced_total + t]);
      out(r, c) = sum;
    }
  return DensityOperator(std::move(out), std::move(kept_dims), std::move(kept_labels));
}

DensityOperator partial_trace(const DensityOperator& rho, std::initializer_list<std::string> keep) {
  return partial_trace(rho, std::span<const std::string>(keep.begin(), keep.size()));
}

double spectrum_entropy(std::span<const double> spectrum) {
  double h = 0.0;
  for (double lambda : spectrum) {
    if (lambda < tolerance::kMinEigenvalue) throw DomainError("negative eigenvalue in entropy");
    if (lambda < tolerance::kEntropyCutoff) continue;
    h -= lambda * std::log2(lambda);
  }
  return h;
}

double von_neumann_entropy(const DensityOperator& rho) {
  const auto spectrum = hermitian_eigenvalues(rho.matrix());
  return spectrum_entropy(spectrum);
}

double conditional_vn_entropy(const DensityOperator& rho, std::string_view x_label,
                              std::string_view e_label) {
  const std::string x(x_label);
  const std::string e(e_label);
  const auto xe = partial_trace(rho, {x, e});
  const auto only_e = partial_trace(rho, {e});
  return von_neumann_entropy(xe) - von_neumann_entropy(only_e);
}

ProbabilityVector::ProbabilityVector(std::vector<double> weights) : weights_(std::move(weights)) {
  double sum = 0.0;
  for (double w : weights_) {
    if (!(w >= 0.0 && w <= 1.0)) throw DomainError("probability outside [0,1]");
    sum += w;
  }
  if (std::abs(sum - 1.0) > tolerance::kProbabilitySum) throw DomainError("probabilities do not sum to 1");
}

double ProbabilityVector::entropy() const {
  double h = 0.0;
  for (double w : weights_)
    if (w > 0.0) h -= w * std::log2(w);
  return h;
}

JointDistribution::JointDistribution(std::size_t x_size, std::size_t y_size, std::vector<double> weights)
    : x_size_(x_size), y_size_(y_size), joint_(std::move(weights)) {
  if (joint_.weights().size() != x_size * y_size) throw DomainError("joint distribution has wrong size");
}

ProbabilityVector JointDistribution::marginal_y() const {
  std::vector<double> y(y_size_, 0.0);
  for (std::size_t i = 0; i < x_size_; ++i)
    for (std::size_t j = 0; j < y_size_; ++j) y[j] += (*this)(i, j);
  // Re-normalize rounding so the marginal passes its own sum check.
  const double total = std::accumulate(y.begin(), y.end(), 0.0);
  for (auto& w : y) w = std::clamp(w / total, 0.0, 1.0);
  return ProbabilityVector(std::move(y));
}

double shannon_cond_entropy(const JointDistribution& joint) {
  return joint.joint().entropy() - joint.marginal_y().entropy();
}

double binary_entropy(double q) {
  if (!(q >= 0.0 && q <= 1.0)) throw DomainError("binary_entropy: q outside [0,1]");
  if (q == 0.0 || q == 1.0) return 0.0;
  return -q * std::log2(q) - (1.0 - q) * std::log2(1.0 - q);
}

double trace_distance(const DensityOperator& a, const DensityOperator& b) {
  if (a.dims() != b.dims()) throw DomainError("trace_distance: dimension mismatch");
  const auto spectrum = hermitian_eigenvalues(a.matrix() - b.matrix());
  double sum = 0.0;
  for (double mu : spectrum) sum += std::abs(mu);
  return 0.5 * sum;
}

}  // namespace qkdlab
