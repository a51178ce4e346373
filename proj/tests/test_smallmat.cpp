#include <cmath>
#include <limits>

#include "doctest.h"
#include "roc/linescan.hpp"
#include "roc/smallmat.hpp"

using namespace roc;

namespace {

double reconstruction_error(const Matrix& f, const Svd& dec) {
  const int n = f.dim();
  Matrix r(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int k = 0; k < n; ++k) acc += dec.U(i, k) * dec.s[k] * dec.V(j, k);
      r(i, j) = acc - f(i, j);
    }
  return frobenius_norm(r);
}

double orthogonality_error(const Matrix& q) {
  const Matrix qtq = transpose(q) * q;
  Matrix d = qtq - Matrix::identity(q.dim());
  return frobenius_norm(d);
}

}  // namespace

TEST_CASE("svd of simple diagonal cases") {
  const Svd id2 = svd_ordered(Matrix::identity(2));
  CHECK(id2.s[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(id2.s[1] == doctest::Approx(1.0).epsilon(1e-14));

  const Svd d32 = svd_ordered(Matrix::from_rows({{3, 0}, {0, 2}}));
  CHECK(d32.s[0] == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(d32.s[1] == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("svd of a shear matrix matches the eigenvalue oracle") {
  // Singular values of [[1,2],[0,1]] are the square roots of the
  // eigenvalues of F^T F = [[1,2],[2,5]], i.e. sqrt(3 +/- 2 sqrt(2)).
  const double s1 = std::sqrt(3.0 + 2.0 * std::sqrt(2.0));
  const double s2 = std::sqrt(3.0 - 2.0 * std::sqrt(2.0));
  CHECK(s1 == doctest::Approx(1.0 + std::sqrt(2.0)).epsilon(1e-15));
  CHECK(s2 == doctest::Approx(std::sqrt(2.0) - 1.0).epsilon(1e-13));

  const Matrix f = Matrix::from_rows({{1, 2}, {0, 1}});
  const Svd dec = svd_ordered(f);
  CHECK(dec.s[0] == doctest::Approx(s1).epsilon(1e-14));
  CHECK(dec.s[1] == doctest::Approx(s2).epsilon(1e-12));
  CHECK(reconstruction_error(f, dec) <= 1e-12 * frobenius_norm(f));
}

TEST_CASE("svd reconstruction, orthogonality and ordering on random matrices") {
  Rng rng(20240811);
  for (int n = 2; n <= 8; ++n) {
    const int trials = 10000 / 7 + 1;
    for (int trial = 0; trial < trials; ++trial) {
      Matrix f(n);
      const double scale = std::exp(rng.uniform(-2.0, 2.0));
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) f(i, j) = scale * rng.normal();
      const Svd dec = svd_ordered(f);
      const double nf = frobenius_norm(f);
      REQUIRE(reconstruction_error(f, dec) <= 1e-12 * std::max(nf, 1e-300));
      REQUIRE(orthogonality_error(dec.U) <= 1e-12);
      REQUIRE(orthogonality_error(dec.V) <= 1e-12);
      for (int i = 0; i + 1 < n; ++i) REQUIRE(dec.s[i] >= dec.s[i + 1]);
      REQUIRE(dec.s[n - 1] >= 0.0);
    }
  }
}

TEST_CASE("closed-form planar svd agrees with an explicit trace/det oracle") {
  Rng rng(7);
  for (int trial = 0; trial < 2000; ++trial) {
    Matrix f(2);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) f(i, j) = rng.normal();
    // Eigenvalues of F^T F from trace and determinant.
    const double tr = f(0, 0) * f(0, 0) + f(0, 1) * f(0, 1) + f(1, 0) * f(1, 0) +
                      f(1, 1) * f(1, 1);
    const double det = f(0, 0) * f(1, 1) - f(0, 1) * f(1, 0);
    const double disc = std::sqrt(std::max(tr * tr - 4.0 * det * det, 0.0));
    const double e1 = std::sqrt(0.5 * (tr + disc));
    const double e2 = std::sqrt(std::max(0.5 * (tr - disc), 0.0));
    const Svd dec = svd_ordered(f);
    CHECK(dec.s[0] == doctest::Approx(e1).epsilon(1e-12));
    CHECK(dec.s[1] == doctest::Approx(e2).scale(std::max(e1, 1.0)).epsilon(1e-12));
    CHECK(dec.det_positive == (det > 0.0));
  }
}

TEST_CASE("svd flags orientation for det <= 0 but still reconstructs") {
  const Matrix f = Matrix::from_rows({{1, 0}, {0, -2}});
  const Svd dec = svd_ordered(f);
  CHECK_FALSE(dec.det_positive);
  CHECK(dec.s[0] == doctest::Approx(2.0));
  CHECK(dec.s[1] == doctest::Approx(1.0));
  CHECK(reconstruction_error(f, dec) <= 1e-12 * frobenius_norm(f));
}

TEST_CASE("svd rejects non-finite input") {
  Matrix f = Matrix::identity(2);
  f(0, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(svd_ordered(f), InputError);
}

TEST_CASE("rank-one matrices decompose with one vanishing singular value") {
  Rng rng(99);
  for (int n = 2; n <= 5; ++n) {
    const auto xi = rng.unit_vector(n);
    const auto eta = rng.unit_vector(n);
    const Matrix h = outer(xi, eta);
    const Svd dec = svd_ordered(h);
    CHECK(dec.s[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(dec.s[1] <= 1e-13);
    CHECK(orthogonality_error(dec.U) <= 1e-12);
    CHECK(orthogonality_error(dec.V) <= 1e-12);
  }
}

TEST_CASE("ky fan norms") {
  const double d[3] = {3, 2, 1};
  CHECK(ky_fan_norm(Matrix::diagonal(std::span<const double>(d, 3)), 2) == doctest::Approx(5.0));
  CHECK(ky_fan_norm(Matrix::identity(3), 3) == doctest::Approx(3.0));
  CHECK(ky_fan_norm(Matrix::from_rows({{1, 2}, {0, 1}}), 1) ==
        doctest::Approx(1.0 + std::sqrt(2.0)));
  CHECK_THROWS_AS(ky_fan_norm(Matrix::identity(2), 0), InputError);
  CHECK_THROWS_AS(ky_fan_norm(Matrix::identity(2), 3), InputError);
}

TEST_CASE("conformality test") {
  const Matrix scaled_rot = 2.0 * planar_rotation(30.0 * 3.14159265358979 / 180.0);
  CHECK(is_conformal(scaled_rot));
  CHECK_FALSE(is_conformal(Matrix::from_rows({{2, 0}, {0, 1}})));
  CHECK(is_conformal(Matrix::from_rows({{1.0 + 1e-12, 0}, {0, 1}}), 1e-9));
  CHECK_THROWS_AS(is_conformal(Matrix::from_rows({{1, 0}, {0, -1}})), DomainError);
}

TEST_CASE("make_segment produces admissible seeded segments") {
  for (int n = 2; n <= 4; ++n) {
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
      const RankOneSegment seg = make_segment(seed, n);
      const double det0 = determinant(seg.at(seg.t_range.lo));
      const double det1 = determinant(seg.at(seg.t_range.hi));
      CHECK(det0 > 0.0);
      CHECK(det1 > 0.1 * det0 - 1e-15);
      const OrderedTuple hs = singular_values(seg.H);
      CHECK(hs[1] <= 1e-12 * hs[0]);
    }
  }
}

TEST_CASE("make_segment is deterministic in the seed") {
  const RankOneSegment a = make_segment(1234, 3);
  const RankOneSegment b = make_segment(1234, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(a.F(i, j) == b.F(i, j));
  for (int i = 0; i < 3; ++i) {
    CHECK(a.xi[static_cast<std::size_t>(i)] == b.xi[static_cast<std::size_t>(i)]);
    CHECK(a.eta[static_cast<std::size_t>(i)] == b.eta[static_cast<std::size_t>(i)]);
  }
}

TEST_CASE("explicit segment: det(I + t e1(x)e1) = 1 + t") {
  const std::vector<double> e1 = {1, 0};
  const RankOneSegment seg = make_segment_from(Matrix::identity(2), e1, e1);
  for (double t : {0.0, 0.25, 0.5, 1.0})
    CHECK(determinant(seg.at(t)) == doctest::Approx(1.0 + t).epsilon(1e-14));
}

TEST_CASE("determinant lemma oracle: det(F+tH) = det F (1 + t eta.F^-1 xi)") {
  Rng rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform() * 3);
    const RankOneSegment seg = make_segment(1000 + static_cast<std::uint64_t>(trial), n);
    const Matrix finv = inverse(seg.F);
    double c = 0.0;
    for (int i = 0; i < n; ++i) {
      double fx = 0.0;
      for (int j = 0; j < n; ++j) fx += finv(i, j) * seg.xi[static_cast<std::size_t>(j)];
      c += seg.eta[static_cast<std::size_t>(i)] * fx;
    }
    const double detf = determinant(seg.F);
    for (double t : {0.2, 0.7, 1.0}) {
      const double direct = determinant(seg.at(t));
      const double lemma = detf * (1.0 + t * c);
      CHECK(direct == doctest::Approx(lemma).epsilon(1e-12));
    }
  }
}

TEST_CASE("det(F + tH) is affine in t along rank-one directions") {
  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform() * 5);
    const RankOneSegment seg = make_segment(7000 + static_cast<std::uint64_t>(trial), n);
    const double detf = determinant(seg.F);
    for (double t : {0.1, 0.3, 0.5, 0.7, 0.9}) {
      const double h = 0.05;
      const double second_diff = determinant(seg.at(t - h)) - 2.0 * determinant(seg.at(t)) +
                                 determinant(seg.at(t + h));
      CHECK(std::abs(second_diff) <= 1e-10 * std::abs(detf));
    }
  }
}

TEST_CASE("ky fan norms are midpoint-convex along rank-one lines") {
  Rng rng(13);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform() * 5);
    const RankOneSegment seg = make_segment(3000 + static_cast<std::uint64_t>(trial), n);
    for (int k = 1; k <= n; ++k) {
      auto f = [&](double t) { return ky_fan_norm(seg.at(t), k); };
      CHECK(midpoint_convexity_worst(f, seg.t_range, 24) <= 1e-8);
    }
  }
}

TEST_CASE("matrix type and segment validation errors") {
  CHECK_THROWS_AS(Matrix(1), InputError);
  CHECK_THROWS_AS(Matrix(9), InputError);
  const double bad[2] = {1.0, 2.0};
  CHECK_THROWS_AS(OrderedTuple(std::span<const double>(bad, 2)), InputError);
  const std::vector<double> e1 = {1, 0};
  const std::vector<double> e2 = {0, 1};
  // det(I + t e1(x)e2) = 1 for all t, fine; but a two-column direction is not rank one.
  Matrix not_rank_one = Matrix::identity(2);
  CHECK_THROWS_AS(
      make_segment_from(not_rank_one, std::vector<double>{0, 0}, e2), InputError);
  // det hits zero inside the range.
  CHECK_THROWS_AS(
      make_segment_from(Matrix::identity(2), std::vector<double>{-2, 0}, e1), InputError);
}
