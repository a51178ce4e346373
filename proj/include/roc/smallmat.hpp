#ifndef ROC_SMALLMAT_HPP
#define ROC_SMALLMAT_HPP

// Dense small-matrix kernel for dimensions 2..8: ordered SVD, Ky Fan
// norms, conformality tests and rank-one segment construction. All
// operations are pure functions of their inputs and safe to call
// concurrently.

#include <array>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <vector>

#include "roc/errors.hpp"

namespace roc {

inline constexpr int kMinDim = 2;
inline constexpr int kMaxDim = 8;

// Small dense n-by-n matrix, row-major, fixed capacity.
class Matrix {
 public:
  explicit Matrix(int n);
  static Matrix identity(int n);
  static Matrix diagonal(std::span<const double> d);
  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

  int dim() const { return n_; }
  double& operator()(int i, int j) { return a_[static_cast<std::size_t>(i) * kMaxDim + j]; }
  double operator()(int i, int j) const { return a_[static_cast<std::size_t>(i) * kMaxDim + j]; }

  Matrix& operator+=(const Matrix& rhs);
  Matrix& operator-=(const Matrix& rhs);
  Matrix& operator*=(double s);

 private:
  int n_;
  std::array<double, kMaxDim * kMaxDim> a_{};
};

Matrix operator+(Matrix lhs, const Matrix& rhs);
Matrix operator-(Matrix lhs, const Matrix& rhs);
Matrix operator*(double s, Matrix m);
Matrix operator*(const Matrix& a, const Matrix& b);

Matrix transpose(const Matrix& m);
double frobenius_norm(const Matrix& m);
double determinant(const Matrix& m);  // LU with partial pivoting
Matrix inverse(const Matrix& m);      // Gauss-Jordan; throws DomainError if singular
bool all_finite(const Matrix& m);

// xi (x) eta, the rank-one matrix with entries xi_i * eta_j.
Matrix outer(std::span<const double> xi, std::span<const double> eta);

// 2x2 counterclockwise rotation.
Matrix planar_rotation(double angle);

// Ordered singular-value tuple: weakly decreasing, nonnegative, finite.
// Strict positivity (membership in the open cone over zero) is checked
// where energies require it, not on construction, so that singular
// matrices such as rank-one directions can be decomposed.
class OrderedTuple {
 public:
  OrderedTuple(std::span<const double> values);
  OrderedTuple(std::initializer_list<double> values);

  int dim() const { return n_; }
  double operator[](int i) const { return v_[static_cast<std::size_t>(i)]; }
  std::span<const double> values() const { return {v_.data(), static_cast<std::size_t>(n_)}; }
  bool strictly_positive() const;
  // Largest index gap structure: true if all entries distinct at relative tol.
  bool strictly_ordered(double rel_tol = 0.0) const;

 private:
  int n_;
  std::array<double, kMaxDim> v_{};
};

struct Svd {
  Matrix U;
  OrderedTuple s;
  Matrix V;
  bool det_positive;  // orientation flag: det F > 0
};

// F = U diag(s) V^T with U, V orthogonal and s weakly decreasing.
// Closed form for n = 2, cyclic one-sided Jacobi for n >= 3.
Svd svd_ordered(const Matrix& F);
OrderedTuple singular_values(const Matrix& F);

// Sum of the k largest singular values; k = 1 is the operator norm.
double ky_fan_norm(const Matrix& F, int k);

// True iff all singular values coincide within tol relative to the
// largest one. For n = 2 this characterizes CSO(2) membership.
bool is_conformal(const Matrix& F, double tol = 1e-9);

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
  double length() const { return hi - lo; }
};

// A rank-one line segment t -> F + t * (xi (x) eta) staying in GL+(n)
// for t in t_range.
struct RankOneSegment {
  Matrix F;
  std::vector<double> xi;
  std::vector<double> eta;
  Matrix H;  // outer(xi, eta), cached
  Interval t_range{0.0, 1.0};

  Matrix at(double t) const;
};

// Validates the segment invariants: rank(H) = 1 within tol, and
// det(F + tH) > 0 at both interval endpoints.
RankOneSegment make_segment_from(const Matrix& F, std::span<const double> xi,
                                 std::span<const double> eta,
                                 Interval t_range = {0.0, 1.0});

// Seeded random admissible segment. F = scale * Q1 diag(d) Q2 with
// log-uniform d, unit xi/eta; H is rescaled via the determinant lemma
// det(F + tH) = det F * (1 + t eta.F^-1 xi) so that both endpoint
// determinants exceed 0.1 * det F.
RankOneSegment make_segment(std::uint64_t seed, int n, double scale = 1.0);

// Deterministic random source. Only the mt19937_64 engine from the
// standard library is used; all transforms are implemented here so
// that streams are reproducible across platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  double uniform();                        // [0, 1)
  double uniform(double a, double b);      // [a, b)
  double normal();                         // Box-Muller
  std::vector<double> unit_vector(int n);  // uniform on the sphere
  Matrix rotation(int n);                  // Haar-ish via QR, det +1
  std::uint64_t raw() { return eng_(); }

 private:
  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace roc

#endif
