#pragma once

#include "dbalign/model.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace dbalign {

/// Identifies the generator stream of one trial.
struct TrialSeed {
  std::uint64_t master_seed = 0;
  std::uint64_t trial_index = 0;

  friend bool operator==(const TrialSeed&, const TrialSeed&) = default;
};

// Recorded in report headers so runs can be replayed.
inline constexpr const char* kRngName = "mt19937_64 seeded by splitmix64(master, trial) v1";
inline constexpr const char* kGaussianMethod = "box-muller";

TrialSeed derive_trial_seed(std::uint64_t master, std::uint64_t trial);

/// 64-bit engine seed for a trial: splitmix64 finaliser applied to
/// mix(master) + trial * golden_gamma. Injective in trial for fixed master.
std::uint64_t engine_seed(const TrialSeed& seed);

/// Per-trial random source. Uniforms take the top 53 bits of the engine;
/// normals come from Box-Muller pairs.
class TrialRng {
 public:
  explicit TrialRng(const TrialSeed& seed) : engine_(engine_seed(seed)) {}

  std::uint64_t next_u64() { return engine_(); }
  double uniform();  // [0, 1)
  double normal();
  std::uint64_t below(std::uint64_t bound);  // uniform on [0, bound)

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

struct PlantedInstance {
  DatabasePair databases;
  Matching truth;
  CanonicalModel model;
  /// truth as indices: user a_i is matched with b_{truth_permutation[i]}.
  std::vector<std::size_t> truth_permutation;
};

/// Uniform permutation by Fisher-Yates over the B side.
std::vector<std::size_t> sample_permutation(std::size_t n, TrialRng& rng);

Matching sample_matching(std::size_t n, const TrialSeed& seed);

/// Draws a planted instance: matched rows satisfy Y = rho X + sqrt(1-rho^2) Z
/// coordinate-wise. Rows of B are stored in users_b order.
PlantedInstance sample_instance(std::size_t n, const CanonicalModel& rho, const TrialSeed& seed);

/// Planted instance in the original feature space of a general model: each
/// matched pair is mu + S z with S S^T the joint covariance (symmetric
/// square root). `model` of the result holds the canonical correlations.
PlantedInstance sample_general_instance(std::size_t n, const CorrelationModel& model, const TrialSeed& seed);

}  // namespace dbalign
