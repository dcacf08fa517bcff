#include "dbalign/error.hpp"
#include "dbalign/measures.hpp"
#include "dbalign/model.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace dbalign;

namespace {

CorrelationModel scalar_model(double sa, double sb, double sab) {
  CorrelationModel m;
  m.mu_a = Vector::Zero(1);
  m.mu_b = Vector::Zero(1);
  m.sigma_a = Matrix::Constant(1, 1, sa);
  m.sigma_b = Matrix::Constant(1, 1, sb);
  m.sigma_ab = Matrix::Constant(1, 1, sab);
  return m;
}

ErrorKind kind_of(const auto& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorKind::IoError;
}

}  // namespace

TEST(ValidateCovariance, CanonicalInstanceIsValid) {
  CorrelationModel m = CorrelationModel::from_canonical({0.5, 0.5});
  const auto v = validate_covariance(m);
  EXPECT_NEAR(v.min_eigenvalue_a, 1.0, 1e-12);
  EXPECT_NEAR(v.min_eigenvalue_b, 1.0, 1e-12);
  EXPECT_NEAR(v.min_eigenvalue_joint, 0.5, 1e-12);
}

TEST(ValidateCovariance, IndefiniteMarginalIsNamed) {
  CorrelationModel m = CorrelationModel::from_canonical({0.1, 0.1});
  m.sigma_a << 1, 2, 2, 1;
  try {
    validate_covariance(m);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotPositiveDefinite);
    EXPECT_NE(std::string(e.what()).find("sigma_a"), std::string::npos);
  }
}

TEST(ValidateCovariance, IndefiniteJointBlock) {
  try {
    validate_covariance(scalar_model(1, 1, 1.5));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotPositiveDefinite);
    EXPECT_NE(std::string(e.what()).find("full block"), std::string::npos);
  }
}

TEST(ValidateCovariance, AsymmetryAndDimensions) {
  CorrelationModel m = CorrelationModel::from_canonical({0.3, 0.3});
  m.sigma_b(0, 1) = 0.1;
  EXPECT_EQ(kind_of([&] { validate_covariance(m); }), ErrorKind::AsymmetryBeyondTolerance);

  CorrelationModel bad = CorrelationModel::from_canonical({0.3, 0.3});
  bad.sigma_ab = Matrix::Zero(3, 2);
  EXPECT_EQ(kind_of([&] { validate_covariance(bad); }), ErrorKind::DimensionMismatch);

  CorrelationModel nan = CorrelationModel::from_canonical({0.3});
  nan.sigma_ab(0, 0) = std::nan("");
  EXPECT_EQ(kind_of([&] { validate_covariance(nan); }), ErrorKind::NonFiniteInput);
}

TEST(Canonicalize, AlreadyCanonical) {
  const auto c = canonicalize(CorrelationModel::from_canonical({0.7, 0.3}));
  ASSERT_EQ(c.model.dim(), 2u);
  EXPECT_NEAR(c.model.rho()[0], 0.7, 1e-12);
  EXPECT_NEAR(c.model.rho()[1], 0.3, 1e-12);
  EXPECT_TRUE(c.transform_a.linear_map.cwiseAbs().isApprox(Matrix::Identity(2, 2), 1e-12));
  EXPECT_TRUE(c.transform_b.linear_map.cwiseAbs().isApprox(Matrix::Identity(2, 2), 1e-12));
}

TEST(Canonicalize, ScalarCase) {
  const auto c = canonicalize(scalar_model(4, 1, 1.2));
  ASSERT_EQ(c.model.dim(), 1u);
  EXPECT_NEAR(c.model.rho()[0], 0.6, 1e-12);
}

TEST(Canonicalize, ZeroCrossCovarianceDropsEverything) {
  CorrelationModel m = CorrelationModel::from_canonical({0.4, 0.4, 0.4});
  m.sigma_ab.setZero();
  const auto c = canonicalize(m);
  EXPECT_EQ(c.model.dim(), 0u);
  EXPECT_EQ(c.transform_a.linear_map.rows(), 0);
  EXPECT_EQ(c.transform_a.linear_map.cols(), 3);
}

TEST(Canonicalize, PerfectCorrelationRejected) {
  EXPECT_EQ(kind_of([] { canonicalize(scalar_model(1, 1, 1.0 - 1e-13)); }),
            ErrorKind::PerfectCorrelation);
}

TEST(Canonicalize, NegativeCorrelationAbsorbed) {
  const auto c = canonicalize(scalar_model(1, 1, -0.6));
  ASSERT_EQ(c.model.dim(), 1u);
  EXPECT_NEAR(c.model.rho()[0], 0.6, 1e-12);
  // The transformed pair must have positive cross-covariance.
  const double cross = c.transform_a.linear_map(0, 0) * -0.6 * c.transform_b.linear_map(0, 0);
  EXPECT_NEAR(cross, 0.6, 1e-12);
}

TEST(Canonicalize, RankOfWhitenedCrossCovariance) {
  std::mt19937_64 gen(11);
  auto m = oracle::random_model(gen, 5, 4);
  // Rank-2 cross covariance.
  Eigen::JacobiSVD<Matrix> svd(m.sigma_ab, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Vector sv = svd.singularValues();
  sv.tail(sv.size() - 2).setZero();
  m.sigma_ab = svd.matrixU().leftCols(4) * sv.asDiagonal() * svd.matrixV().transpose();
  const auto c = canonicalize(m);
  EXPECT_EQ(c.model.dim(), 2u);
  EXPECT_EQ(c.transform_a.linear_map.rows(), 2);
  EXPECT_EQ(c.transform_b.linear_map.rows(), 2);
}

TEST(Canonicalize, DimensionNeverExceedsMinSide) {
  std::mt19937_64 gen(12);
  for (int k = 0; k < 50; ++k) {
    const auto da = static_cast<Eigen::Index>(1 + gen() % 8);
    const auto db = static_cast<Eigen::Index>(1 + gen() % 8);
    const auto c = canonicalize(oracle::random_model(gen, da, db));
    EXPECT_LE(static_cast<Eigen::Index>(c.model.dim()), std::min(da, db));
    const auto& r = c.model.rho();
    EXPECT_TRUE(std::is_sorted(r.rbegin(), r.rend()));
    for (double x : r) {
      EXPECT_GT(x, 0.0);
      EXPECT_LT(x, 1.0);
    }
  }
}

TEST(Canonicalize, PreservesInformationAndSigma) {
  std::mt19937_64 gen(2024);
  for (int k = 0; k < 200; ++k) {
    const auto da = static_cast<Eigen::Index>(1 + gen() % 8);
    const auto db = static_cast<Eigen::Index>(1 + gen() % 8);
    const auto m = oracle::random_model(gen, da, db);
    const auto c = canonicalize(m);
    EXPECT_NEAR(mutual_information_general(m), mutual_information(c.model), 1e-8);
    EXPECT_NEAR(sigma_general(m), sigma(c.model), 1e-8);
  }
}

TEST(Canonicalize, Deterministic) {
  std::mt19937_64 gen(5);
  const auto m = oracle::random_model(gen, 6, 5);
  const auto c1 = canonicalize(m);
  const auto c2 = canonicalize(m);
  EXPECT_EQ(c1.model, c2.model);
  EXPECT_EQ(c1.transform_a.linear_map, c2.transform_a.linear_map);
  EXPECT_EQ(c1.transform_b.linear_map, c2.transform_b.linear_map);
  EXPECT_EQ(c1.transform_a.offset, c2.transform_a.offset);
}

TEST(ApplyTransform, IdentityAndCentering) {
  Matrix rows(3, 2);
  rows << 1, 2, 3, 4, 5, 6;
  EXPECT_EQ(apply_transform(FeatureTransform::identity(2), rows), rows);

  FeatureTransform t = FeatureTransform::identity(2);
  t.offset = Vector(2);
  t.offset << 1.5, -2.0;
  Matrix same = rows;
  same.rowwise() = t.offset.transpose();
  EXPECT_TRUE(apply_transform(t, same).isZero(0.0));

  EXPECT_THROW(apply_transform(t, Matrix::Zero(2, 3)), Error);
}

TEST(ApplyTransform, ScalarExampleAndEmpiricalVariance) {
  CorrelationModel m = scalar_model(4, 1, 1.2);
  m.mu_a(0) = 1.0;
  const auto c = canonicalize(m);
  Matrix row(1, 1);
  row(0, 0) = 3.0;
  EXPECT_NEAR(std::abs(apply_transform(c.transform_a, row)(0, 0)), 1.0, 1e-12);

  std::mt19937_64 gen(99);
  std::normal_distribution<double> g(0.0, 2.0);
  Matrix samples(100000, 1);
  for (Eigen::Index i = 0; i < samples.rows(); ++i) samples(i, 0) = 1.0 + g(gen);
  const Matrix out = apply_transform(c.transform_a, samples);
  std::vector<double> v(out.data(), out.data() + out.size());
  EXPECT_NEAR(oracle::variance(v), 1.0, 0.02);
}

TEST(ApplyTransform, EmpiricalMomentsOfGeneralModel) {
  std::mt19937_64 gen(314);
  const auto m = oracle::random_model(gen, 4, 3);
  const auto c = canonicalize(m);
  const auto d = static_cast<Eigen::Index>(c.model.dim());

  // Independent sampler: Cholesky factor of the joint covariance.
  const Matrix joint = m.joint_covariance();
  const Matrix l = Eigen::LLT<Matrix>(joint).matrixL();
  const Eigen::Index n = 100000;
  Matrix xa(n, 4), xb(n, 3);
  std::normal_distribution<double> g(0.0, 1.0);
  Vector z(7);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < 7; ++k) z(k) = g(gen);
    const Vector s = l * z;
    xa.row(i) = (s.head(4) + m.mu_a).transpose();
    xb.row(i) = (s.tail(3) + m.mu_b).transpose();
  }
  const Matrix ta = apply_transform(c.transform_a, xa);
  const Matrix tb = apply_transform(c.transform_b, xb);
  ASSERT_EQ(ta.cols(), d);
  for (Eigen::Index k = 0; k < d; ++k) {
    std::vector<double> ca(ta.col(k).data(), ta.col(k).data() + n);
    std::vector<double> cb(tb.col(k).data(), tb.col(k).data() + n);
    EXPECT_NEAR(oracle::mean(ca), 0.0, 0.02);
    EXPECT_NEAR(oracle::mean(cb), 0.0, 0.02);
    EXPECT_NEAR(oracle::variance(ca), 1.0, 0.05);
    EXPECT_NEAR(oracle::variance(cb), 1.0, 0.05);
    EXPECT_NEAR(oracle::correlation(ca, cb), c.model.rho()[static_cast<std::size_t>(k)], 0.05);
  }
}

TEST(CanonicalModel, NormalisesInput) {
  CanonicalModel m({0.2, -0.7, 0.0, 0.5});
  EXPECT_EQ(m.rho(), (std::vector<double>{0.7, 0.5, 0.2}));
  EXPECT_THROW(CanonicalModel({1.0}), Error);
  EXPECT_THROW(CanonicalModel({1.0 - 1e-16}), Error);
  EXPECT_THROW(CanonicalModel({std::nan("")}), Error);
}

TEST(DatabasePair, Validation) {
  DatabasePair p{{"a", "b"}, {"x", "y"}, Matrix::Zero(2, 1), Matrix::Zero(2, 1)};
  EXPECT_NO_THROW(p.validate());
  p.users_b = {"x", "x"};
  EXPECT_EQ(kind_of([&] { p.validate(); }), ErrorKind::IdentifierMismatch);
  p.users_b = {"x", "y"};
  p.b = Matrix::Zero(3, 1);
  EXPECT_EQ(kind_of([&] { p.validate(); }), ErrorKind::DimensionMismatch);
}
