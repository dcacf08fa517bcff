#include "dbalign/synth.hpp"

#include "dbalign/error.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

namespace dbalign {

namespace {

constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

std::uint64_t splitmix_finalize(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

TrialSeed derive_trial_seed(std::uint64_t master, std::uint64_t trial) { return {master, trial}; }

std::uint64_t engine_seed(const TrialSeed& seed) {
  const std::uint64_t base = splitmix_finalize(seed.master_seed + kGoldenGamma);
  return splitmix_finalize(base + seed.trial_index * kGoldenGamma);
}

double TrialRng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double TrialRng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

std::uint64_t TrialRng::below(std::uint64_t bound) {
  // Rejection on the top of the range removes modulo bias.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % bound;
}

std::vector<std::size_t> sample_permutation(std::size_t n, TrialRng& rng) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i));
    std::swap(perm[i - 1], perm[j]);
  }
  return perm;
}

Matching sample_matching(std::size_t n, const TrialSeed& seed) {
  if (n == 0) throw Error(ErrorKind::InvalidArgument, "n must be positive");
  TrialRng rng(seed);
  const auto perm = sample_permutation(n, rng);
  return Matching::from_permutation(default_ids('u', n), default_ids('v', n), perm);
}

PlantedInstance sample_instance(std::size_t n, const CanonicalModel& rho, const TrialSeed& seed) {
  if (n == 0) throw Error(ErrorKind::InvalidArgument, "n must be positive");
  TrialRng rng(seed);

  PlantedInstance inst;
  inst.model = rho;
  inst.truth_permutation = sample_permutation(n, rng);

  const auto& r = rho.rho();
  const auto d = static_cast<Eigen::Index>(r.size());
  std::vector<double> noise_scale(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) noise_scale[i] = std::sqrt((1.0 - r[i]) * (1.0 + r[i]));

  auto& db = inst.databases;
  db.users_a = default_ids('u', n);
  db.users_b = default_ids('v', n);
  db.a.resize(static_cast<Eigen::Index>(n), d);
  db.b.resize(static_cast<Eigen::Index>(n), d);
  for (std::size_t u = 0; u < n; ++u) {
    const auto row_a = static_cast<Eigen::Index>(u);
    const auto row_b = static_cast<Eigen::Index>(inst.truth_permutation[u]);
    for (Eigen::Index i = 0; i < d; ++i) db.a(row_a, i) = rng.normal();
    for (Eigen::Index i = 0; i < d; ++i) {
      const auto k = static_cast<std::size_t>(i);
      db.b(row_b, i) = r[k] * db.a(row_a, i) + noise_scale[k] * rng.normal();
    }
  }
  inst.truth = Matching::from_permutation(db.users_a, db.users_b, inst.truth_permutation);
  return inst;
}

PlantedInstance sample_general_instance(std::size_t n, const CorrelationModel& model, const TrialSeed& seed) {
  if (n == 0) throw Error(ErrorKind::InvalidArgument, "n must be positive");
  PlantedInstance inst;
  inst.model = canonicalize(model).model;

  Eigen::SelfAdjointEigenSolver<Matrix> es(model.joint_covariance());
  const Vector root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const Matrix factor = es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();

  TrialRng rng(seed);
  inst.truth_permutation = sample_permutation(n, rng);
  const auto da = model.dim_a();
  const auto db_dim = model.dim_b();
  Vector mean(da + db_dim);
  mean << model.mu_a, model.mu_b;

  auto& db = inst.databases;
  db.users_a = default_ids('u', n);
  db.users_b = default_ids('v', n);
  db.a.resize(static_cast<Eigen::Index>(n), da);
  db.b.resize(static_cast<Eigen::Index>(n), db_dim);
  Vector z(da + db_dim);
  for (std::size_t u = 0; u < n; ++u) {
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = rng.normal();
    const Vector sample = mean + factor * z;
    db.a.row(static_cast<Eigen::Index>(u)) = sample.head(da).transpose();
    db.b.row(static_cast<Eigen::Index>(inst.truth_permutation[u])) = sample.tail(db_dim).transpose();
  }
  inst.truth = Matching::from_permutation(db.users_a, db.users_b, inst.truth_permutation);
  return inst;
}

}  // namespace dbalign
