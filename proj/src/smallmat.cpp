#include "roc/smallmat.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

namespace roc {

namespace {

void check_dim(int n) {
  if (n < 2 || n > kMaxDim)
    throw InputError("matrix dimension must be in [2, 8], got " + std::to_string(n));
}

double sign_nonzero(double x) { return x < 0.0 ? -1.0 : 1.0; }

}  // namespace

Matrix::Matrix(int n) : n_(n) { check_dim(n); }

Matrix Matrix::identity(int n) {
  Matrix m(n);
  for (int i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::diagonal(std::span<const double> d) {
  Matrix m(static_cast<int>(d.size()));
  for (int i = 0; i < m.dim(); ++i) m(i, i) = d[static_cast<std::size_t>(i)];
  return m;
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix m(static_cast<int>(rows.size()));
  int i = 0;
  for (const auto& row : rows) {
    if (static_cast<int>(row.size()) != m.dim())
      throw InputError("from_rows: ragged row in matrix literal");
    int j = 0;
    for (double x : row) m(i, j++) = x;
    ++i;
  }
  return m;
}

Matrix& Matrix::operator+=(const Matrix& rhs) {
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) (*this)(i, j) += rhs(i, j);
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& rhs) {
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) (*this)(i, j) -= rhs(i, j);
  return *this;
}

Matrix& Matrix::operator*=(double s) {
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) (*this)(i, j) *= s;
  return *this;
}

Matrix operator+(Matrix lhs, const Matrix& rhs) { return lhs += rhs; }
Matrix operator-(Matrix lhs, const Matrix& rhs) { return lhs -= rhs; }
Matrix operator*(double s, Matrix m) { return m *= s; }

Matrix operator*(const Matrix& a, const Matrix& b) {
  Matrix c(a.dim());
  for (int i = 0; i < a.dim(); ++i)
    for (int j = 0; j < a.dim(); ++j) {
      double acc = 0.0;
      for (int k = 0; k < a.dim(); ++k) acc += a(i, k) * b(k, j);
      c(i, j) = acc;
    }
  return c;
}

Matrix transpose(const Matrix& m) {
  Matrix t(m.dim());
  for (int i = 0; i < m.dim(); ++i)
    for (int j = 0; j < m.dim(); ++j) t(j, i) = m(i, j);
  return t;
}

double frobenius_norm(const Matrix& m) {
  double acc = 0.0;
  for (int i = 0; i < m.dim(); ++i)
    for (int j = 0; j < m.dim(); ++j) acc += m(i, j) * m(i, j);
  return std::sqrt(acc);
}

bool all_finite(const Matrix& m) {
  for (int i = 0; i < m.dim(); ++i)
    for (int j = 0; j < m.dim(); ++j)
      if (!std::isfinite(m(i, j))) return false;
  return true;
}

double determinant(const Matrix& m) {
  const int n = m.dim();
  Matrix a = m;
  double det = 1.0;
  for (int k = 0; k < n; ++k) {
    int piv = k;
    for (int i = k + 1; i < n; ++i)
      if (std::abs(a(i, k)) > std::abs(a(piv, k))) piv = i;
    if (a(piv, k) == 0.0) return 0.0;
    if (piv != k) {
      for (int j = 0; j < n; ++j) std::swap(a(piv, j), a(k, j));
      det = -det;
    }
    det *= a(k, k);
    for (int i = k + 1; i < n; ++i) {
      const double f = a(i, k) / a(k, k);
      for (int j = k; j < n; ++j) a(i, j) -= f * a(k, j);
    }
  }
  return det;
}

Matrix inverse(const Matrix& m) {
  const int n = m.dim();
  Matrix a = m;
  Matrix inv = Matrix::identity(n);
  for (int k = 0; k < n; ++k) {
    int piv = k;
    for (int i = k + 1; i < n; ++i)
      if (std::abs(a(i, k)) > std::abs(a(piv, k))) piv = i;
    if (std::abs(a(piv, k)) < 1e-300)
      throw DomainError("inverse: matrix is numerically singular");
    if (piv != k)
      for (int j = 0; j < n; ++j) {
        std::swap(a(piv, j), a(k, j));
        std::swap(inv(piv, j), inv(k, j));
      }
    const double p = a(k, k);
    for (int j = 0; j < n; ++j) {
      a(k, j) /= p;
      inv(k, j) /= p;
    }
    for (int i = 0; i < n; ++i) {
      if (i == k) continue;
      const double f = a(i, k);
      if (f == 0.0) continue;
      for (int j = 0; j < n; ++j) {
        a(i, j) -= f * a(k, j);
        inv(i, j) -= f * inv(k, j);
      }
    }
  }
  return inv;
}

Matrix outer(std::span<const double> xi, std::span<const double> eta) {
  if (xi.size() != eta.size()) throw InputError("outer: size mismatch");
  Matrix h(static_cast<int>(xi.size()));
  for (int i = 0; i < h.dim(); ++i)
    for (int j = 0; j < h.dim(); ++j) h(i, j) = xi[static_cast<std::size_t>(i)] * eta[static_cast<std::size_t>(j)];
  return h;
}

OrderedTuple::OrderedTuple(std::span<const double> values)
    : n_(static_cast<int>(values.size())) {
  check_dim(n_);
  for (int i = 0; i < n_; ++i) {
    const double x = values[static_cast<std::size_t>(i)];
    if (!std::isfinite(x)) throw InputError("OrderedTuple: non-finite entry");
    if (x < 0.0) throw InputError("OrderedTuple: negative entry");
    if (i > 0 && x > v_[static_cast<std::size_t>(i - 1)])
      throw InputError("OrderedTuple: entries must be weakly decreasing");
    v_[static_cast<std::size_t>(i)] = x;
  }
}

OrderedTuple::OrderedTuple(std::initializer_list<double> values)
    : OrderedTuple(std::span<const double>(values.begin(), values.size())) {}

bool OrderedTuple::strictly_positive() const { return v_[static_cast<std::size_t>(n_ - 1)] > 0.0; }

bool OrderedTuple::strictly_ordered(double rel_tol) const {
  const double scale = v_[0];
  for (int i = 0; i + 1 < n_; ++i)
    if (v_[static_cast<std::size_t>(i)] - v_[static_cast<std::size_t>(i + 1)] <= rel_tol * scale)
      return false;
  return true;
}

namespace {

// Closed-form planar SVD. With E=(a+d)/2, F=(a-d)/2, G=(c+b)/2,
// H=(c-b)/2 the matrix decomposes as R(alpha) diag(s1, s2) R(beta)^T
// where s1 = Q+R, s2 = Q-R (signed), alpha-beta = atan2(H,E) and
// alpha+beta = atan2(G,F). A negative s2 means det < 0 and is folded
// into the last column of V.
Svd svd2_closed(const Matrix& m) {
  const double a = m(0, 0), b = m(0, 1), c = m(1, 0), d = m(1, 1);
  const double e = 0.5 * (a + d);
  const double f = 0.5 * (a - d);
  const double g = 0.5 * (c + b);
  const double h = 0.5 * (c - b);
  const double q = std::hypot(e, h);
  const double r = std::hypot(f, g);
  double s1 = q + r;
  double s2 = q - r;
  const double a1 = std::atan2(g, f);  // alpha + beta
  const double a2 = std::atan2(h, e);  // alpha - beta
  const double alpha = 0.5 * (a1 + a2);
  const double beta = 0.5 * (a1 - a2);
  Matrix u(2), v(2);
  const double ca = std::cos(alpha), sa = std::sin(alpha);
  const double cb = std::cos(beta), sb = std::sin(beta);
  u(0, 0) = ca; u(0, 1) = -sa; u(1, 0) = sa; u(1, 1) = ca;
  v(0, 0) = cb; v(0, 1) = -sb; v(1, 0) = sb; v(1, 1) = cb;
  bool det_pos = s2 > 0.0;
  if (s2 < 0.0) {
    s2 = -s2;
    v(0, 1) = -v(0, 1);
    v(1, 1) = -v(1, 1);
  }
  const double sv[2] = {s1, s2};
  return Svd{u, OrderedTuple(std::span<const double>(sv, 2)), v, det_pos};
}

// Cyclic one-sided Jacobi: orthogonalize the columns of A by right
// rotations accumulated into V; singular values are the column norms.
Svd svd_jacobi(const Matrix& m) {
  const int n = m.dim();
  Matrix a = m;
  Matrix v = Matrix::identity(n);
  const double off_tol = 1e-15;
  for (int sweep = 0; sweep < 60; ++sweep) {
    bool changed = false;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        double app = 0.0, aqq = 0.0, apq = 0.0;
        for (int i = 0; i < n; ++i) {
          app += a(i, p) * a(i, p);
          aqq += a(i, q) * a(i, q);
          apq += a(i, p) * a(i, q);
        }
        if (std::abs(apq) <= off_tol * std::sqrt(app * aqq) || apq == 0.0) continue;
        const double zeta = (aqq - app) / (2.0 * apq);
        const double t = sign_nonzero(zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        if (std::abs(t) < 1e-17) continue;  // rotation below resolution
        changed = true;
        const double cs = 1.0 / std::sqrt(1.0 + t * t);
        const double sn = cs * t;
        for (int i = 0; i < n; ++i) {
          const double ap = a(i, p), aq = a(i, q);
          a(i, p) = cs * ap - sn * aq;
          a(i, q) = sn * ap + cs * aq;
          const double vp = v(i, p), vq = v(i, q);
          v(i, p) = cs * vp - sn * vq;
          v(i, q) = sn * vp + cs * vq;
        }
      }
    }
    if (!changed) break;
  }

  std::array<double, kMaxDim> sv{};
  std::array<int, kMaxDim> order{};
  for (int j = 0; j < n; ++j) {
    double nrm = 0.0;
    for (int i = 0; i < n; ++i) nrm += a(i, j) * a(i, j);
    sv[static_cast<std::size_t>(j)] = std::sqrt(nrm);
    order[static_cast<std::size_t>(j)] = j;
  }
  std::stable_sort(order.begin(), order.begin() + n, [&](int x, int y) {
    return sv[static_cast<std::size_t>(x)] > sv[static_cast<std::size_t>(y)];
  });

  Matrix u = Matrix::identity(n);
  Matrix vs(n);
  std::array<double, kMaxDim> ssorted{};
  const double smax = sv[static_cast<std::size_t>(order[0])];
  const double rank_tol = std::max(1e-290, smax * 1e-14 * n);
  std::vector<int> deficient;
  for (int j = 0; j < n; ++j) {
    const int src = order[static_cast<std::size_t>(j)];
    const double s = sv[static_cast<std::size_t>(src)];
    ssorted[static_cast<std::size_t>(j)] = s;
    for (int i = 0; i < n; ++i) vs(i, j) = v(i, src);
    if (s > rank_tol) {
      for (int i = 0; i < n; ++i) u(i, j) = a(i, src) / s;
    } else {
      ssorted[static_cast<std::size_t>(j)] = s;  // keep tiny value as-is
      deficient.push_back(j);
    }
  }
  // Orthonormal completion for (numerically) zero singular directions.
  for (int j : deficient) {
    double best_res = -1.0;
    std::array<double, kMaxDim> best{};
    for (int cand = 0; cand < n; ++cand) {
      std::array<double, kMaxDim> w{};
      w[static_cast<std::size_t>(cand)] = 1.0;
      for (int pass = 0; pass < 2; ++pass) {
        for (int k = 0; k < n; ++k) {
          if (k == j) continue;
          bool k_deficient = false;
          for (int dj : deficient)
            if (dj == k && dj > j) k_deficient = true;  // not yet filled
          if (k_deficient) continue;
          double proj = 0.0;
          for (int i = 0; i < n; ++i) proj += u(i, k) * w[static_cast<std::size_t>(i)];
          for (int i = 0; i < n; ++i) w[static_cast<std::size_t>(i)] -= proj * u(i, k);
        }
      }
      double nrm = 0.0;
      for (int i = 0; i < n; ++i) nrm += w[static_cast<std::size_t>(i)] * w[static_cast<std::size_t>(i)];
      nrm = std::sqrt(nrm);
      if (nrm > best_res) {
        best_res = nrm;
        for (int i = 0; i < n; ++i) best[static_cast<std::size_t>(i)] = w[static_cast<std::size_t>(i)] / nrm;
      }
    }
    for (int i = 0; i < n; ++i) u(i, j) = best[static_cast<std::size_t>(i)];
  }

  return Svd{u, OrderedTuple(std::span<const double>(ssorted.data(), static_cast<std::size_t>(n))),
             vs, determinant(m) > 0.0};
}

}  // namespace

Svd svd_ordered(const Matrix& f) {
  if (!all_finite(f)) throw InputError("svd_ordered: non-finite entries");
  if (f.dim() == 2) return svd2_closed(f);
  return svd_jacobi(f);
}

OrderedTuple singular_values(const Matrix& f) { return svd_ordered(f).s; }

double ky_fan_norm(const Matrix& f, int k) {
  if (k < 1 || k > f.dim())
    throw InputError("ky_fan_norm: k must be in [1, n], got " + std::to_string(k));
  const OrderedTuple s = singular_values(f);
  double acc = 0.0;
  for (int i = 0; i < k; ++i) acc += s[i];
  return acc;
}

bool is_conformal(const Matrix& f, double tol) {
  const Svd dec = svd_ordered(f);
  if (!dec.det_positive) throw DomainError("is_conformal: det F must be positive");
  return (dec.s[0] - dec.s[f.dim() - 1]) <= tol * dec.s[0];
}

Matrix RankOneSegment::at(double t) const {
  Matrix m = F;
  for (int i = 0; i < m.dim(); ++i)
    for (int j = 0; j < m.dim(); ++j) m(i, j) += t * H(i, j);
  return m;
}

RankOneSegment make_segment_from(const Matrix& f, std::span<const double> xi,
                                 std::span<const double> eta, Interval t_range) {
  if (static_cast<int>(xi.size()) != f.dim() || static_cast<int>(eta.size()) != f.dim())
    throw InputError("make_segment_from: vector dimension mismatch");
  if (!(t_range.lo < t_range.hi)) throw InputError("make_segment_from: empty t range");
  RankOneSegment seg{f, std::vector<double>(xi.begin(), xi.end()),
                     std::vector<double>(eta.begin(), eta.end()), outer(xi, eta), t_range};
  const OrderedTuple hs = singular_values(seg.H);
  if (!(hs[0] > 0.0) || hs[1] > 1e-12 * hs[0])
    throw InputError("make_segment_from: direction is not rank one");
  if (determinant(seg.at(t_range.lo)) <= 0.0 || determinant(seg.at(t_range.hi)) <= 0.0)
    throw InputError("make_segment_from: det(F + tH) must stay positive on the interval");
  return seg;
}

RankOneSegment make_segment(std::uint64_t seed, int n, double scale) {
  check_dim(n);
  if (!(scale > 0.0)) throw InputError("make_segment: scale must be positive");
  Rng rng(seed);
  for (int attempt = 0; attempt < 64; ++attempt) {
    const Matrix q1 = rng.rotation(n);
    const Matrix q2 = rng.rotation(n);
    std::vector<double> d(static_cast<std::size_t>(n));
    for (auto& x : d) x = scale * std::exp(rng.uniform(-0.8, 0.8));
    const Matrix f = q1 * Matrix::diagonal(d) * transpose(q2);
    std::vector<double> xi = rng.unit_vector(n);
    const std::vector<double> eta = rng.unit_vector(n);

    // det(F + tH) = det F * (1 + t * eta . F^-1 xi): rescale xi so the
    // endpoint ratios stay well above the 0.1 floor.
    const Matrix finv = inverse(f);
    double c = 0.0;
    for (int i = 0; i < n; ++i) {
      double fx = 0.0;
      for (int j = 0; j < n; ++j) fx += finv(i, j) * xi[static_cast<std::size_t>(j)];
      c += eta[static_cast<std::size_t>(i)] * fx;
    }
    if (!std::isfinite(c)) continue;
    if (c < -0.85) {
      const double shrink = 0.85 / -c;
      for (auto& x : xi) x *= shrink;
    }
    RankOneSegment seg{f, xi, eta, outer(xi, eta), {0.0, 1.0}};
    const double det0 = determinant(seg.at(0.0));
    const double det1 = determinant(seg.at(1.0));
    if (det0 > 0.0 && det1 > 0.1 * det0) return seg;
  }
  throw SamplingError("make_segment: retry budget exhausted");
}

double Rng::uniform() {
  return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double a, double b) { return a + (b - a) * uniform(); }

double Rng::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double ang = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(ang);
  have_spare_ = true;
  return r * std::cos(ang);
}

std::vector<double> Rng::unit_vector(int n) {
  for (int attempt = 0; attempt < 64; ++attempt) {
    std::vector<double> v(static_cast<std::size_t>(n));
    double nrm = 0.0;
    for (auto& x : v) {
      x = normal();
      nrm += x * x;
    }
    nrm = std::sqrt(nrm);
    if (nrm > 1e-6) {
      for (auto& x : v) x /= nrm;
      return v;
    }
  }
  throw SamplingError("unit_vector: degenerate draws");
}

Matrix Rng::rotation(int n) {
  // Gram-Schmidt on a Gaussian matrix, then fix orientation.
  Matrix g(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g(i, j) = normal();
  for (int j = 0; j < n; ++j) {
    for (int pass = 0; pass < 2; ++pass)
      for (int k = 0; k < j; ++k) {
        double proj = 0.0;
        for (int i = 0; i < n; ++i) proj += g(i, k) * g(i, j);
        for (int i = 0; i < n; ++i) g(i, j) -= proj * g(i, k);
      }
    double nrm = 0.0;
    for (int i = 0; i < n; ++i) nrm += g(i, j) * g(i, j);
    nrm = std::sqrt(nrm);
    if (nrm < 1e-8) return rotation(n);  // re-draw on a degenerate column
    for (int i = 0; i < n; ++i) g(i, j) /= nrm;
  }
  if (determinant(g) < 0.0)
    for (int i = 0; i < n; ++i) g(i, n - 1) = -g(i, n - 1);
  return g;
}

Matrix planar_rotation(double angle) {
  Matrix r(2);
  r(0, 0) = std::cos(angle);
  r(0, 1) = -std::sin(angle);
  r(1, 0) = std::sin(angle);
  r(1, 1) = std::cos(angle);
  return r;
}

}  // namespace roc
