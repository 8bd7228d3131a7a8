#include "affcode/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "affcode/errors.hpp"

namespace affcode {

namespace {

void check_dim(int dim) {
  if (dim < 1 || dim > kMaxDim) {
    throw ShapeError("dimension must lie in 1.." + std::to_string(kMaxDim) +
                     ", got " + std::to_string(dim));
  }
}

// One-sided (Hestenes) Jacobi: rotates column pairs of a copy of t until they
// are mutually orthogonal; the column norms are then the singular values.
std::array<double, kMaxDim> jacobi_column_norms(const Matrix& t) {
  const int d = t.dim();
  Matrix a = t;
  constexpr double kEps = 1e-15;
  for (int sweep = 0; sweep < 64; ++sweep) {
    bool rotated = false;
    for (int p = 0; p < d - 1; ++p) {
      for (int q = p + 1; q < d; ++q) {
        double alpha = 0.0;
        double beta = 0.0;
        double gamma = 0.0;
        for (int i = 0; i < d; ++i) {
          alpha += a(i, p) * a(i, p);
          beta += a(i, q) * a(i, q);
          gamma += a(i, p) * a(i, q);
        }
        if (gamma == 0.0 || std::abs(gamma) <= kEps * std::sqrt(alpha * beta)) {
          continue;
        }
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double tan = std::copysign(1.0, zeta) /
                           (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double cos = 1.0 / std::sqrt(1.0 + tan * tan);
        const double sin = cos * tan;
        for (int i = 0; i < d; ++i) {
          const double ap = a(i, p);
          const double aq = a(i, q);
          a(i, p) = cos * ap - sin * aq;
          a(i, q) = sin * ap + cos * aq;
        }
      }
    }
    if (!rotated) break;
  }
  std::array<double, kMaxDim> norms{};
  for (int j = 0; j < d; ++j) {
    double sum = 0.0;
    for (int i = 0; i < d; ++i) sum += a(i, j) * a(i, j);
    norms[static_cast<std::size_t>(j)] = std::sqrt(sum);
  }
  std::sort(norms.begin(), norms.begin() + d, std::greater<>());
  return norms;
}

}  // namespace

Vector::Vector(int dim) : dim_(dim) { check_dim(dim); }

Vector::Vector(std::initializer_list<double> values)
    : dim_(static_cast<int>(values.size())) {
  check_dim(dim_);
  std::copy(values.begin(), values.end(), v_.begin());
}

Vector Vector::from_span(std::span<const double> values) {
  Vector v(static_cast<int>(values.size()));
  std::copy(values.begin(), values.end(), v.v_.begin());
  return v;
}

double Vector::norm() const {
  double sum = 0.0;
  for (int i = 0; i < dim_; ++i) sum += (*this)[i] * (*this)[i];
  return std::sqrt(sum);
}

Vector& Vector::operator+=(const Vector& other) {
  if (dim_ != other.dim_) throw ShapeError("vector dimension mismatch");
  for (int i = 0; i < dim_; ++i) (*this)[i] += other[i];
  return *this;
}

Vector& Vector::operator*=(double factor) {
  for (int i = 0; i < dim_; ++i) (*this)[i] *= factor;
  return *this;
}

Vector operator-(const Vector& a, const Vector& b) {
  if (a.dim_ != b.dim_) throw ShapeError("vector dimension mismatch");
  Vector out(a.dim_);
  for (int i = 0; i < a.dim_; ++i) out[i] = a[i] - b[i];
  return out;
}

bool operator==(const Vector& a, const Vector& b) {
  if (a.dim_ != b.dim_) return false;
  return std::equal(a.v_.begin(), a.v_.begin() + a.dim_, b.v_.begin());
}

Matrix::Matrix(int dim) : dim_(dim) { check_dim(dim); }

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows)
    : dim_(static_cast<int>(rows.size())) {
  check_dim(dim_);
  int r = 0;
  for (const auto& row : rows) {
    if (static_cast<int>(row.size()) != dim_) {
      throw ShapeError("matrix must be square");
    }
    int c = 0;
    for (double x : row) (*this)(r, c++) = x;
    ++r;
  }
}

Matrix Matrix::identity(int dim) {
  Matrix m(dim);
  for (int i = 0; i < dim; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::diagonal(std::span<const double> entries) {
  Matrix m(static_cast<int>(entries.size()));
  for (int i = 0; i < m.dim(); ++i) m(i, i) = entries[static_cast<std::size_t>(i)];
  return m;
}

Matrix Matrix::diagonal(std::initializer_list<double> entries) {
  return diagonal(std::span<const double>(entries.begin(), entries.size()));
}

Matrix Matrix::from_row_major(int dim, std::span<const double> entries) {
  if (entries.size() != static_cast<std::size_t>(dim * dim)) {
    throw ShapeError("expected " + std::to_string(dim * dim) +
                     " entries for a square matrix, got " +
                     std::to_string(entries.size()));
  }
  Matrix m(dim);
  for (int r = 0; r < dim; ++r) {
    for (int c = 0; c < dim; ++c) {
      m(r, c) = entries[static_cast<std::size_t>(r * dim + c)];
    }
  }
  return m;
}

double Matrix::determinant() const {
  // Gaussian elimination with partial pivoting.
  Matrix a = *this;
  double det = 1.0;
  for (int k = 0; k < dim_; ++k) {
    int pivot = k;
    for (int r = k + 1; r < dim_; ++r) {
      if (std::abs(a(r, k)) > std::abs(a(pivot, k))) pivot = r;
    }
    if (a(pivot, k) == 0.0) return 0.0;
    if (pivot != k) {
      for (int c = 0; c < dim_; ++c) std::swap(a(k, c), a(pivot, c));
      det = -det;
    }
    det *= a(k, k);
    for (int r = k + 1; r < dim_; ++r) {
      const double f = a(r, k) / a(k, k);
      for (int c = k; c < dim_; ++c) a(r, c) -= f * a(k, c);
    }
  }
  return det;
}

double Matrix::max_abs() const {
  double m = 0.0;
  for (int r = 0; r < dim_; ++r) {
    for (int c = 0; c < dim_; ++c) m = std::max(m, std::abs((*this)(r, c)));
  }
  return m;
}

bool Matrix::all_finite() const {
  for (int r = 0; r < dim_; ++r) {
    for (int c = 0; c < dim_; ++c) {
      if (!std::isfinite((*this)(r, c))) return false;
    }
  }
  return true;
}

Matrix Matrix::transpose() const {
  Matrix t(dim_);
  for (int r = 0; r < dim_; ++r) {
    for (int c = 0; c < dim_; ++c) t(c, r) = (*this)(r, c);
  }
  return t;
}

Matrix& Matrix::operator*=(double factor) {
  for (int r = 0; r < dim_; ++r) {
    for (int c = 0; c < dim_; ++c) (*this)(r, c) *= factor;
  }
  return *this;
}

Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.dim_ != b.dim_) throw ShapeError("matrix dimension mismatch");
  Matrix out(a.dim_);
  for (int r = 0; r < a.dim_; ++r) {
    for (int c = 0; c < a.dim_; ++c) {
      double sum = 0.0;
      for (int k = 0; k < a.dim_; ++k) sum += a(r, k) * b(k, c);
      out(r, c) = sum;
    }
  }
  return out;
}

Vector operator*(const Matrix& a, const Vector& x) {
  if (a.dim() != x.dim()) throw ShapeError("matrix/vector dimension mismatch");
  Vector out(a.dim());
  for (int r = 0; r < a.dim(); ++r) {
    double sum = 0.0;
    for (int k = 0; k < a.dim(); ++k) sum += a(r, k) * x[k];
    out[r] = sum;
  }
  return out;
}

bool operator==(const Matrix& a, const Matrix& b) {
  if (a.dim_ != b.dim_) return false;
  for (int r = 0; r < a.dim_; ++r) {
    for (int c = 0; c < a.dim_; ++c) {
      if (a(r, c) != b(r, c)) return false;
    }
  }
  return true;
}

AffineMap AffineMap::identity(int dim) {
  return AffineMap{Matrix::identity(dim), Vector(dim)};
}

Vector AffineMap::operator()(const Vector& x) const {
  return linear * x + translation;
}

AffineMap compose(const AffineMap& outer, const AffineMap& inner) {
  if (outer.dim() != inner.dim() || outer.translation.dim() != inner.translation.dim()) {
    throw ShapeError("cannot compose maps of different dimensions");
  }
  return AffineMap{outer.linear * inner.linear,
                   outer.linear * inner.translation + outer.translation};
}

SingularSpectrum::SingularSpectrum(int dim, std::array<double, kMaxDim> values)
    : dim_(dim), values_(values) {}

double SingularSpectrum::product() const {
  double p = 1.0;
  for (int i = 0; i < dim_; ++i) p *= (*this)[i];
  return p;
}

SingularSpectrum singular_values(const Matrix& t) {
  if (t.dim() < 1) throw InvalidMatrixError("empty matrix");
  if (!t.all_finite()) throw InvalidMatrixError("matrix has non-finite entries");
  const double det = std::abs(t.determinant());
  if (!(det > 0.0)) throw InvalidMatrixError("matrix is singular");
  const int d = t.dim();
  if (d == 1) return SingularSpectrum(1, {std::abs(t(0, 0))});
  auto values = jacobi_column_norms(t);
  double head = 1.0;
  for (int i = 0; i < d - 1; ++i) head *= values[static_cast<std::size_t>(i)];
  values[static_cast<std::size_t>(d - 1)] = det / head;
  return SingularSpectrum(d, values);
}

LogSpectrum log_singular_values(const Matrix& t) {
  ScaledProduct p(t.dim());
  p.right_multiply(t);
  return p.log_spectrum();
}

ScaledProduct::ScaledProduct(int dim) : normalized_(Matrix::identity(dim)) {}

void ScaledProduct::right_multiply(const Matrix& factor) {
  const double det = std::abs(factor.determinant());
  if (!(det > 0.0) || !factor.all_finite()) {
    throw InvalidMatrixError("factor is singular or non-finite");
  }
  right_multiply(factor, std::log(det));
}

void ScaledProduct::right_multiply(const Matrix& factor, double log_abs_det_factor) {
  normalized_ = normalized_ * factor;
  const double m = normalized_.max_abs();
  if (!(m > 0.0) || !std::isfinite(m)) {
    throw InvalidMatrixError("product became singular or non-finite");
  }
  normalized_ *= 1.0 / m;
  log_scale_ += std::log(m);
  log_abs_det_ += log_abs_det_factor;
}

Matrix ScaledProduct::value() const {
  Matrix m = normalized_;
  m *= std::exp(log_scale_);
  return m;
}

LogSpectrum ScaledProduct::log_spectrum() const {
  const int d = dim();
  LogSpectrum out;
  out.dim = d;
  if (d == 1) {
    out.values[0] = log_abs_det_;
    return out;
  }
  const auto norms = jacobi_column_norms(normalized_);
  double head = 0.0;
  for (int i = 0; i < d - 1; ++i) {
    const double v = std::log(norms[static_cast<std::size_t>(i)]) + log_scale_;
    out.values[static_cast<std::size_t>(i)] = v;
    head += v;
  }
  // Recover the smallest from |det|; clamp so ordering survives rounding.
  double last = log_abs_det_ - head;
  last = std::min(last, out.values[static_cast<std::size_t>(d - 2)]);
  out.values[static_cast<std::size_t>(d - 1)] = last;
  return out;
}

}  // namespace affcode
