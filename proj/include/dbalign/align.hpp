#pragma once

#include "dbalign/measures.hpp"
#include "dbalign/model.hpp"
#include "dbalign/synth.hpp"
#include "dbalign/theory.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace dbalign {

/// scores(u, v) = LLR(A_u, B_v), rows and columns labelled by user ids.
struct ScoreMatrix {
  Matrix scores;
  std::vector<std::string> users_a;
  std::vector<std::string> users_b;

  std::size_t size() const noexcept { return users_a.size(); }
};

/// A bijection as row -> column indices, with its total score summed in row
/// order.
struct Assignment {
  std::vector<std::size_t> column_of_row;
  double weight = 0.0;
};

struct ErrorCounts {
  std::size_t false_negatives = 0;
  std::size_t false_positives = 0;
  bool exact = false;

  friend bool operator==(const ErrorCounts&, const ErrorCounts&) = default;
};

struct AlignmentReport {
  std::string algorithm;  // "map" or "bht"
  Matching predicted;
  std::optional<Matching> truth;
  std::size_t false_negatives = 0;
  std::size_t false_positives = 0;
  bool exact = false;
  double total_score = 0.0;
  std::optional<double> threshold;
  double wall_time_seconds = 0.0;
  std::optional<TrialSeed> seed;
};

inline constexpr std::size_t kDefaultBruteForceCap = 9;

/// Databases must already be in canonical coordinates (d columns each).
ScoreMatrix score_matrix(const DatabasePair& databases, const CanonicalModel& rho);

/// Sum of scores(i, column_of_row[i]) accumulated in row order.
double assignment_weight(const Matrix& scores, const std::vector<std::size_t>& column_of_row);

/// Maximum-weight perfect assignment (Hungarian, O(n^3)). Among optimal
/// assignments the lexicographically smallest column sequence is returned.
Assignment max_weight_assignment(const Matrix& scores);

/// Exhaustive search over all n! assignments, same tie-break. Throws
/// InstanceTooLarge when n > cap.
Assignment brute_force_assignment(const Matrix& scores, std::size_t cap = kDefaultBruteForceCap);

/// MAP alignment: the bijection maximising total LLR.
Matching map_align(const ScoreMatrix& scores);

std::pair<Matching, double> brute_force_align(const ScoreMatrix& scores,
                                              std::size_t cap = kDefaultBruteForceCap);

/// All pairs with score >= tau.
Matching bht_align(const ScoreMatrix& scores, double tau);

/// Same as theory's bht_threshold_window.
ThresholdWindow select_threshold(const CorrelationSummary& summary, std::size_t n, double eps_fn,
                                 double eps_fp);

/// FN = |truth \ predicted|, FP = |predicted \ truth|.
ErrorCounts score_alignment(const Matching& predicted, const Matching& truth);

/// Index-level scoring used by the harness; avoids materialising pair lists.
ErrorCounts score_assignment(const std::vector<std::size_t>& predicted,
                             const std::vector<std::size_t>& truth);
ErrorCounts score_threshold(const Matrix& scores, double tau, const std::vector<std::size_t>& truth);

}  // namespace dbalign
