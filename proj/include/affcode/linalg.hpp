#pragma once

// Small dense linear algebra for ambient dimensions 1..4.

#include <array>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace affcode {

inline constexpr int kMaxDim = 4;

class Vector {
 public:
  Vector() = default;
  explicit Vector(int dim);
  Vector(std::initializer_list<double> values);
  static Vector from_span(std::span<const double> values);

  int dim() const { return dim_; }
  double operator[](int i) const { return v_[static_cast<std::size_t>(i)]; }
  double& operator[](int i) { return v_[static_cast<std::size_t>(i)]; }

  double norm() const;
  Vector& operator+=(const Vector& other);
  Vector& operator*=(double factor);
  friend Vector operator+(Vector a, const Vector& b) { return a += b; }
  friend Vector operator-(const Vector& a, const Vector& b);
  friend bool operator==(const Vector& a, const Vector& b);

 private:
  int dim_ = 0;
  std::array<double, kMaxDim> v_{};
};

class Matrix {
 public:
  Matrix() = default;
  // Zero matrix.
  explicit Matrix(int dim);
  // Rows given explicitly; must be square.
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(int dim);
  static Matrix diagonal(std::span<const double> entries);
  static Matrix diagonal(std::initializer_list<double> entries);
  static Matrix from_row_major(int dim, std::span<const double> entries);

  int dim() const { return dim_; }
  double operator()(int r, int c) const { return a_[index(r, c)]; }
  double& operator()(int r, int c) { return a_[index(r, c)]; }

  double determinant() const;
  double max_abs() const;
  bool all_finite() const;
  Matrix transpose() const;

  Matrix& operator*=(double factor);
  friend Matrix operator*(const Matrix& a, const Matrix& b);
  friend Vector operator*(const Matrix& a, const Vector& x);
  friend bool operator==(const Matrix& a, const Matrix& b);

 private:
  static std::size_t index(int r, int c) {
    return static_cast<std::size_t>(r * kMaxDim + c);
  }
  int dim_ = 0;
  std::array<double, kMaxDim * kMaxDim> a_{};
};

// f(x) = linear * x + translation.
struct AffineMap {
  Matrix linear;
  Vector translation;

  static AffineMap identity(int dim);
  int dim() const { return linear.dim(); }
  Vector operator()(const Vector& x) const;
};

// outer ∘ inner.
AffineMap compose(const AffineMap& outer, const AffineMap& inner);

// Singular values in non-increasing order.
class SingularSpectrum {
 public:
  SingularSpectrum() = default;
  SingularSpectrum(int dim, std::array<double, kMaxDim> values);

  int dim() const { return dim_; }
  double operator[](int i) const { return values_[static_cast<std::size_t>(i)]; }
  double largest() const { return values_[0]; }
  double smallest() const { return values_[static_cast<std::size_t>(dim_ - 1)]; }
  double product() const;

 private:
  int dim_ = 0;
  std::array<double, kMaxDim> values_{};
};

// Logarithms of singular values, non-increasing.  Used for long products whose
// singular values leave the double range.
struct LogSpectrum {
  int dim = 0;
  std::array<double, kMaxDim> values{};
};

// Throws InvalidMatrixError for singular or non-finite input.
SingularSpectrum singular_values(const Matrix& t);
LogSpectrum log_singular_values(const Matrix& t);

// A product of matrices kept as exp(log_scale) * normalized, with log|det|
// accumulated from the factors.  The smallest singular value is recovered
// from the determinant, which keeps it accurate when the product is badly
// conditioned.
class ScaledProduct {
 public:
  ScaledProduct() = default;
  explicit ScaledProduct(int dim);

  // this <- this * factor.
  void right_multiply(const Matrix& factor, double log_abs_det_factor);
  void right_multiply(const Matrix& factor);

  int dim() const { return normalized_.dim(); }
  const Matrix& normalized() const { return normalized_; }
  double log_scale() const { return log_scale_; }
  double log_abs_det() const { return log_abs_det_; }
  // exp(log_scale) * normalized; may underflow for deep products.
  Matrix value() const;
  LogSpectrum log_spectrum() const;

 private:
  Matrix normalized_;
  double log_scale_ = 0.0;
  double log_abs_det_ = 0.0;
};

}  // namespace affcode
