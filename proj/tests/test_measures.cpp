#include "dbalign/error.hpp"
#include "dbalign/measures.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

using namespace dbalign;

namespace {

double llr_of(const CanonicalModel& m, const std::vector<double>& x, const std::vector<double>& y) {
  return log_likelihood_ratio(m, x, y);
}

}  // namespace

TEST(MutualInformation, Examples) {
  EXPECT_EQ(mutual_information(CanonicalModel{}), 0.0);
  // -ln(0.64)/2 evaluated to 30 digits: 0.223143551314209755766...
  EXPECT_NEAR(mutual_information(CanonicalModel({0.6})), 0.22314355131420976, 1e-15);
  EXPECT_NEAR(mutual_information(CanonicalModel({0.6, 0.6})), 0.44628710262841951, 1e-15);
}

TEST(MutualInformation, GeneralRoute) {
  CorrelationModel zero = CorrelationModel::from_canonical({0.4, 0.4});
  zero.sigma_ab.setZero();
  EXPECT_NEAR(mutual_information_general(zero), 0.0, 1e-15);
  EXPECT_NEAR(mutual_information_general(CorrelationModel::from_canonical({0.6})), 0.22314355131420976,
              1e-14);

  CorrelationModel scalar = CorrelationModel::from_canonical({0.1});
  scalar.sigma_a(0, 0) = 4.0;
  scalar.sigma_ab(0, 0) = 1.2;
  EXPECT_NEAR(mutual_information_general(scalar), 0.22314355131420976, 1e-14);
  EXPECT_NEAR(sigma_general(scalar), 0.6, 1e-14);
}

TEST(Sigma, Examples) {
  EXPECT_EQ(sigma(CanonicalModel{}), 0.0);
  EXPECT_NEAR(sigma(CanonicalModel({0.6, 0.8})), 1.0, 1e-15);
  EXPECT_NEAR(sigma(CanonicalModel({0.5})), 0.5, 1e-15);
  EXPECT_NEAR(sigma_general(CorrelationModel::from_canonical({0.6, 0.8})), 1.0, 1e-14);
  CorrelationModel zero = CorrelationModel::from_canonical({0.4});
  zero.sigma_ab.setZero();
  EXPECT_EQ(sigma_general(zero), 0.0);
}

TEST(LogLikelihoodRatio, Examples) {
  const CanonicalModel m({0.6});
  EXPECT_NEAR(llr_of(m, {0.0}, {0.0}), mutual_information(m), 1e-15);
  EXPECT_EQ(llr_of(CanonicalModel{}, {}, {}), 0.0);
  EXPECT_NEAR(llr_of(m, {1.0}, {1.0}), 0.59814355131420976, 1e-14);
  EXPECT_NEAR(llr_of(m, {1.0}, {1.0}), oracle::llr({0.6}, {1.0}, {1.0}), 1e-14);
}

TEST(LogLikelihoodRatio, MatchesDensityOracle) {
  std::mt19937_64 gen(8);
  std::normal_distribution<double> g(0.0, 1.5);
  std::uniform_real_distribution<double> u(0.01, 0.95);
  for (int k = 0; k < 500; ++k) {
    const std::size_t d = 1 + gen() % 6;
    std::vector<double> rho(d), x(d), y(d);
    for (std::size_t i = 0; i < d; ++i) {
      rho[i] = u(gen);
      x[i] = g(gen);
      y[i] = g(gen);
    }
    // The oracle consumes rho in the model's sorted order.
    const CanonicalModel m(rho);
    std::vector<std::size_t> order(d);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return rho[a] > rho[b]; });
    std::vector<double> xs(d), ys(d), rs(d);
    for (std::size_t i = 0; i < d; ++i) {
      xs[i] = x[order[i]];
      ys[i] = y[order[i]];
      rs[i] = rho[order[i]];
    }
    EXPECT_NEAR(llr_of(m, xs, ys), oracle::llr(rs, xs, ys), 1e-11);
  }
}

TEST(LogLikelihoodRatio, RejectsBadInput) {
  const CanonicalModel m({0.6});
  EXPECT_THROW(llr_of(m, {1.0, 2.0}, {1.0}), Error);
  try {
    llr_of(m, {std::nan("")}, {1.0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NonFiniteInput);
  }
}

TEST(LogLikelihoodRatio, AdditiveOverCoordinates) {
  std::mt19937_64 gen(3);
  std::normal_distribution<double> g;
  const CanonicalModel joint({0.8, 0.5, 0.3});
  for (int k = 0; k < 100; ++k) {
    std::vector<double> x{g(gen), g(gen), g(gen)}, y{g(gen), g(gen), g(gen)};
    double parts = 0.0;
    for (std::size_t i = 0; i < 3; ++i) parts += llr_of(CanonicalModel({joint.rho()[i]}), {x[i]}, {y[i]});
    EXPECT_NEAR(llr_of(joint, x, y), parts, 1e-13);
  }
}

TEST(Summary, SigmaBoundedByInformation) {
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> u(1e-6, 0.999);
  for (int k = 0; k < 1000; ++k) {
    std::vector<double> rho(1 + gen() % 20);
    for (auto& r : rho) r = u(gen);
    const auto s = summarize(CanonicalModel(rho));
    EXPECT_GE(s.mutual_information, 0.0);
    EXPECT_LE(s.sigma, std::sqrt(2.0 * s.mutual_information) * (1.0 + 1e-12));
  }
}

TEST(Summary, NearOneStaysFinite) {
  const CanonicalModel m({1.0 - 1e-9});
  EXPECT_TRUE(std::isfinite(mutual_information(m)));
  EXPECT_NEAR(mutual_information(m), -0.5 * (std::log1p(-(1.0 - 1e-9)) + std::log(2.0 - 1e-9)), 1e-6);
}

// Moments of the LLR by direct sampling with std::normal_distribution, an
// independent generator from the library's.
TEST(LogLikelihoodRatio, MonteCarloMoments) {
  const std::vector<double> rho{0.8, 0.6, 0.3};
  const CanonicalModel m(rho);
  const double info = mutual_information(m);
  const double sig = sigma(m);
  std::mt19937_64 gen(2718);
  std::normal_distribution<double> g;
  const int samples = 1000000;
  std::vector<double> values(samples);
  std::vector<double> x(3), y(3);
  for (int k = 0; k < samples; ++k) {
    for (std::size_t i = 0; i < 3; ++i) {
      x[i] = g(gen);
      y[i] = rho[i] * x[i] + std::sqrt(1.0 - rho[i] * rho[i]) * g(gen);
    }
    values[static_cast<std::size_t>(k)] = llr_of(m, x, y);
  }
  EXPECT_NEAR(oracle::mean(values), info, 4.0 * sig / 1000.0);
  EXPECT_NEAR(oracle::variance(values) / (sig * sig), 1.0, 0.05);
}

TEST(LogLikelihoodRatio, ExponentHasUnitMeanUnderIndependence) {
  const CanonicalModel m({0.5, 0.4});
  std::mt19937_64 gen(1618);
  std::normal_distribution<double> g;
  const int samples = 1000000;
  std::vector<double> values(samples);
  for (auto& v : values) {
    std::vector<double> x{g(gen), g(gen)}, y{g(gen), g(gen)};
    v = std::exp(llr_of(m, x, y));
  }
  const double se = std::sqrt(oracle::variance(values) / samples);
  EXPECT_NEAR(oracle::mean(values), 1.0, 3.0 * se);
}

TEST(MutualInformation, MonteCarloKullbackLeibler) {
  // I is the KL divergence of the joint from the product; estimate it as the
  // sample mean of the density-oracle log ratio.
  std::mt19937_64 gen(4);
  std::normal_distribution<double> g;
  const int samples = 1000000;
  std::vector<double> values(samples);
  for (auto& v : values) {
    const double x = g(gen);
    const double y = 0.6 * x + 0.8 * g(gen);
    v = oracle::llr({0.6}, {x}, {y});
  }
  const double se = std::sqrt(oracle::variance(values) / samples);
  EXPECT_NEAR(oracle::mean(values), mutual_information(CanonicalModel({0.6})), 3.0 * se);
}
