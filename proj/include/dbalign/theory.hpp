#pragma once

#include "dbalign/measures.hpp"
#include "dbalign/model.hpp"

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string_view>

namespace dbalign {

/// Cycle-length histogram of the permutation relating two bijective
/// matchings: counts[l] is the number of cycles of length l.
struct CycleType {
  std::map<std::size_t, std::size_t> counts;

  /// sum over l of l * counts[l].
  std::size_t size() const;
  /// Number of 1-cycles, i.e. pairs the two matchings share.
  std::size_t fixed_points() const;

  friend bool operator==(const CycleType&, const CycleType&) = default;
};

/// Cycle type of pi(i) = perm[i]. perm must be a permutation of 0..n-1.
CycleType cycle_type_of_permutation(std::span<const std::size_t> perm);

/// Cycle type of m2^-1 o m1 over the A-side identifiers. Throws
/// IdentifierMismatch unless both are bijective over the same identifiers.
CycleType cycle_type(const Matching& m1, const Matching& m2);

/// Determinant of the l x l circulant s I - (t/2)(S + S^-1), S the cyclic
/// shift, as the product of its eigenvalues s - t cos(2 pi j / l). For
/// s > |t| the product is accumulated in log space.
double shifted_laplacian_det(std::size_t ell, double s, double t);

/// ln of the above; requires s > |t| so every eigenvalue is positive.
double log_shifted_laplacian_det(std::size_t ell, double s, double t);

/// Bhattacharyya coefficient between the planted-model laws under two
/// matchings whose relative permutation has the given cycle type. Product
/// over coordinates of
///   (1 - rho^2)^(n/2) * prod_l det L^l(1 - rho^2/2, rho^2/2)^(-k_l / 2).
double bhattacharyya_r(const CycleType& cycles, const CanonicalModel& rho);
double log_bhattacharyya_r(const CycleType& cycles, const CanonicalModel& rho);

enum class Verdict { Achievable, Converse, Gap };

std::string_view to_string(Verdict v);

/// Distance of a configuration from a theorem's threshold, in nats. The
/// theorems are asymptotic; the verdict only reports the sign of the margin.
struct RegimeVerdict {
  double quantity = 0.0;  // I / ln n
  Verdict verdict = Verdict::Gap;
  double margin = 0.0;
  /// Union-bound failure estimate x / (1 - x), x = n e^{-I/2}; present when x < 1.
  std::optional<double> failure_probability_bound;
  /// Set when the underlying statement needs d growing with n.
  bool asymptotic_only = false;
};

/// margin = I - 2 ln n; Achievable when positive, Gap otherwise.
RegimeVerdict map_achievability_margin(const CanonicalModel& rho, std::size_t n);

/// Constant-correlation model with d coordinates. margin = 2 ln n - I;
/// Converse when positive, Gap otherwise.
RegimeVerdict map_converse_predicate(double rho_const, std::size_t d, std::size_t n);
RegimeVerdict map_converse_from_information(double mutual_information, std::size_t n);

/// Admissible thresholds ln(n^2/eps_fp) <= tau <= I - sigma sqrt(n/eps_fn).
struct ThresholdWindow {
  bool feasible = false;
  double lower = 0.0;
  double upper = 0.0;
  /// Window midpoint when feasible.
  double tau = 0.0;
  /// lower - upper; positive exactly when infeasible.
  double gap = 0.0;
};

ThresholdWindow bht_threshold_window(const CorrelationSummary& summary, std::size_t n, double eps_fn,
                                     double eps_fp);

/// Lower bound on expected FN + FP for any pairwise test:
/// max(0, (n/2) (ln n - I) / (2 ln n + 1)).
double bht_converse_bound(double mutual_information, std::size_t n);

}  // namespace dbalign
