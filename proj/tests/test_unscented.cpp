#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "spukf/unscented.hpp"

using namespace spukf;

namespace {

double weight_sum(const SigmaPointSet& s) {
  double w = 0.0;
  for (double x : s.weights) w += x;
  return w;
}

std::vector<Vector> mapped(const SigmaPointSet& s, const std::function<Vector(const Vector&)>& g) {
  std::vector<Vector> out;
  for (const auto& p : s.points) out.push_back(g(p));
  return out;
}

}  // namespace

TEST(SigmaPoints, ScalarKappaTwo) {
  const auto s = generate_sigma_points(Vector{{0.0}}, Matrix{{1.0}}, 2.0);
  ASSERT_EQ(s.size(), 3u);
  EXPECT_DOUBLE_EQ(s.points[0](0), 0.0);
  EXPECT_NEAR(s.points[1](0), std::sqrt(3.0), 1e-15);
  EXPECT_NEAR(s.points[2](0), -std::sqrt(3.0), 1e-15);
  EXPECT_NEAR(s.weights[0], 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(s.weights[1], 1.0 / 6.0, 1e-15);
  EXPECT_NEAR(s.weights[2], 1.0 / 6.0, 1e-15);
}

TEST(SigmaPoints, TranslationEquivariance) {
  std::mt19937_64 rng(1);
  const Matrix p = oracle::random_spd(rng, 3);
  const Vector mu{{1.0, -2.0, 5.0}};
  const auto a = generate_sigma_points(Vector::Zero(3), p, 0.5);
  const auto b = generate_sigma_points(mu, p, 0.5);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_LT((b.points[i] - a.points[i] - mu).norm(), 1e-14);
    EXPECT_EQ(a.weights[i], b.weights[i]);
  }
}

TEST(SigmaPoints, KappaZeroInThreeDimensions) {
  const auto s = generate_sigma_points(Vector::Zero(3), Matrix::Identity(3, 3), 0.0);
  ASSERT_EQ(s.size(), 7u);
  EXPECT_EQ(s.weights[0], 0.0);
  int nonzero = 0;
  for (const auto& d : s.offsets) nonzero += d.norm() > 0.0;
  EXPECT_EQ(nonzero, 6);
}

TEST(SigmaPoints, StructureAndRejection) {
  std::mt19937_64 rng(2);
  const Matrix p = oracle::random_spd(rng, 4);
  const Vector mu = oracle::random_matrix(rng, 4, 1);
  const auto s = generate_sigma_points(mu, p, default_kappa(4));
  EXPECT_NEAR(weight_sum(s), 1.0, 1e-12);
  for (std::size_t i = 0; i < s.size(); ++i) EXPECT_LT((s.points[i] - mu - s.offsets[i]).norm(), 1e-14);
  for (std::size_t i = 1; i <= 4; ++i) EXPECT_EQ(s.offsets[i + 4], -s.offsets[i]);
  EXPECT_THROW(generate_sigma_points(mu, p, -4.0), InvalidArgument);
  EXPECT_THROW(generate_sigma_points(mu, Matrix::Identity(3, 3), 0.0), DimensionMismatch);
}

TEST(SimplexPoints, WeightsSumToOne) {
  for (int n = 1; n <= 10; ++n)
    for (double w0 : {0.0, 0.25, 0.5, 0.9}) {
      const auto s = generate_simplex_sigma_points(Vector::Zero(n), Matrix::Identity(n, n), w0);
      EXPECT_EQ(s.size(), static_cast<std::size_t>(n + 2));
      EXPECT_NEAR(weight_sum(s), 1.0, 1e-12);
    }
}

TEST(SimplexPoints, ScalarHalfWeight) {
  const auto s = generate_simplex_sigma_points(Vector{{0.0}}, Matrix{{1.0}}, 0.5);
  ASSERT_EQ(s.size(), 3u);
  EXPECT_DOUBLE_EQ(s.weights[0], 0.5);
  EXPECT_DOUBLE_EQ(s.weights[1], 0.25);
  EXPECT_DOUBLE_EQ(s.weights[2], 0.25);
}

TEST(SimplexPoints, RejectsBadWeight) {
  EXPECT_THROW(generate_simplex_sigma_points(Vector::Zero(2), Matrix::Identity(2, 2), 1.0), InvalidArgument);
  EXPECT_THROW(generate_simplex_sigma_points(Vector::Zero(2), Matrix::Identity(2, 2), -0.1), InvalidArgument);
}

TEST(MomentMatching, StandardAndSimplex) {
  std::mt19937_64 rng(3);
  for (int n = 1; n <= 9; ++n) {
    const Matrix p = oracle::random_spd(rng, n);
    const Vector mu = oracle::random_matrix(rng, n, 1);
    for (bool simplex : {false, true}) {
      const auto s = simplex ? generate_simplex_sigma_points(mu, p, 0.5) : generate_sigma_points(mu, p, 1.0);
      const Vector m = ut_mean(s);
      EXPECT_LT((m - mu).norm(), 1e-10 * (1.0 + mu.norm()));
      EXPECT_LT((ut_covariance(s, m) - p).norm(), 1e-10 * p.norm()) << "n=" << n << " simplex=" << simplex;
    }
  }
}

TEST(UtMean, Basics) {
  const std::vector<Vector> same(3, Vector{{1.0, 2.0}});
  EXPECT_LT((ut_mean(same, {0.2, 0.3, 0.5}) - same[0]).norm(), 1e-15);
  const auto s = generate_sigma_points(Vector{{1.0, 4.0}}, Matrix{{2.0, 0.3}, {0.3, 1.0}}, 1.0);
  EXPECT_LT((ut_mean(s) - Vector{{1.0, 4.0}}).norm(), 1e-14);
  const auto doubled = mapped(s, [](const Vector& y) { return Vector(2.0 * y); });
  EXPECT_LT((ut_mean(doubled, s.weights) - Vector{{2.0, 8.0}}).norm(), 1e-14);
}

TEST(UtCovariance, Basics) {
  const std::vector<Vector> same(3, Vector{{1.0, 2.0}});
  EXPECT_EQ(ut_covariance(same, {0.2, 0.3, 0.5}, same[0]), Matrix::Zero(2, 2));
  const auto s = generate_sigma_points(Vector{{0.0}}, Matrix{{1.0}}, 2.0);
  const auto doubled = mapped(s, [](const Vector& y) { return Vector(2.0 * y); });
  EXPECT_NEAR(ut_covariance(doubled, s.weights, ut_mean(doubled, s.weights))(0, 0), 4.0, 1e-14);

  std::mt19937_64 rng(4);
  const auto s5 = generate_sigma_points(Vector::Zero(5), oracle::random_spd(rng, 5), 0.0);
  const auto sq = mapped(s5, [](const Vector& y) { return Vector(y.array().square()); });
  const Matrix c = ut_covariance(sq, s5.weights, ut_mean(sq, s5.weights));
  EXPECT_LE((c - c.transpose()).cwiseAbs().maxCoeff(), 1e-14 * c.cwiseAbs().maxCoeff());
}

TEST(UtCrossCovariance, Basics) {
  const auto s = generate_sigma_points(Vector{{0.0}}, Matrix{{1.0}}, 2.0);
  const std::vector<Vector> flat(3, Vector{{7.0}});
  EXPECT_EQ(ut_cross_covariance(s, flat, ut_mean(s), Vector{{7.0}}), Matrix::Zero(1, 1));
  const auto tripled = mapped(s, [](const Vector& y) { return Vector(3.0 * y); });
  EXPECT_NEAR(ut_cross_covariance(s, tripled, ut_mean(s), ut_mean(tripled, s.weights))(0, 0), 3.0, 1e-14);

  std::mt19937_64 rng(5);
  const auto s3 = generate_sigma_points(Vector::Ones(3), oracle::random_spd(rng, 3), 0.0);
  const Vector m = ut_mean(s3);
  EXPECT_LT((ut_cross_covariance(s3, s3.points, m, m) - ut_covariance(s3, m)).norm(), 1e-14);
}

TEST(UtProperties, AffineExactness) {
  std::mt19937_64 rng(6);
  for (bool simplex : {false, true}) {
    const Matrix p = oracle::random_spd(rng, 4);
    const Vector mu = oracle::random_matrix(rng, 4, 1);
    const Matrix a = oracle::random_matrix(rng, 3, 4);
    const Vector b = oracle::random_matrix(rng, 3, 1);
    const auto s = simplex ? generate_simplex_sigma_points(mu, p, 0.5) : generate_sigma_points(mu, p, 0.0);
    const auto z = mapped(s, [&](const Vector& y) { return Vector(a * y + b); });
    const Vector m = ut_mean(z, s.weights);
    const Matrix expected = a * p * a.transpose();
    EXPECT_LT((m - (a * mu + b)).norm(), 1e-10 * (a * mu + b).norm());
    EXPECT_LT((ut_covariance(z, s.weights, m) - expected).norm(), 1e-10 * expected.norm());
  }
}

TEST(UtProperties, QuadraticMeanMatchesGaussHermite) {
  // g(y) = y^T M y + c^T y in two dimensions, n + kappa = 3.
  const Matrix mq{{1.0, 0.4}, {0.4, -0.5}};
  const Vector c{{0.3, -1.2}};
  auto g = [&](const Vector& y) { return Vector::Constant(1, y.dot(mq * y) + c.dot(y)); };
  const Vector mu{{0.5, -1.0}};
  const Matrix p{{2.0, 0.6}, {0.6, 1.0}};
  const auto s = generate_sigma_points(mu, p, 1.0);
  const double ut = ut_mean(mapped(s, g), s.weights)(0);

  // Tensor Gauss-Hermite (probabilists') quadrature with five nodes per axis.
  const double nodes[5] = {-2.85697001387281, -1.35562617997427, 0.0, 1.35562617997427, 2.85697001387281};
  const double weights[5] = {0.0112574113277207, 0.222075922005613, 0.533333333333333, 0.222075922005613,
                             0.0112574113277207};
  const Matrix l = Eigen::LLT<Matrix>(p).matrixL();
  double gh = 0.0;
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) gh += weights[i] * weights[j] * g(mu + l * Vector{{nodes[i], nodes[j]}})(0);
  EXPECT_NEAR(ut, gh, 1e-10 * std::abs(gh) + 1e-12);
  EXPECT_NEAR(ut, g(mu)(0) + (p * mq).trace(), 1e-12);
}

TEST(AugmentState, Assembly) {
  const Vector mu{{1.0, 2.0}};
  auto [m0, p0] = augment_state(mu, Matrix::Identity(2, 2), Matrix(0, 0));
  EXPECT_EQ(m0, mu);
  EXPECT_EQ(p0, Matrix::Identity(2, 2));

  auto [m1, p1] = augment_state(mu, Matrix::Identity(2, 2), Matrix::Identity(1, 1));
  EXPECT_EQ(m1, (Vector{{1.0, 2.0, 0.0}}));
  EXPECT_EQ(p1, Matrix::Identity(3, 3));

  std::mt19937_64 rng(7);
  const Matrix p = oracle::random_spd(rng, 3), q = oracle::random_spd(rng, 2);
  auto [m2, p2] = augment_state(Vector::Zero(3), p, q);
  EXPECT_TRUE(p2.isApprox(p2.transpose()));
  EXPECT_GT(Eigen::SelfAdjointEigenSolver<Matrix>(p2).eigenvalues().minCoeff(), 0.0);
  EXPECT_THROW(augment_state(Vector::Zero(3), p, q, Matrix::Zero(2, 2)), DimensionMismatch);
}
