#include "dbalign/align.hpp"

#include "dbalign/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <utility>

namespace dbalign {

ScoreMatrix score_matrix(const DatabasePair& databases, const CanonicalModel& rho) {
  databases.validate();
  const auto d = static_cast<Eigen::Index>(rho.dim());
  if (databases.a.cols() != d || databases.b.cols() != d) {
    throw Error(ErrorKind::DimensionMismatch, "databases must have " + std::to_string(d) +
                                                  " canonical columns");
  }
  if (!databases.a.allFinite() || !databases.b.allFinite()) {
    throw Error(ErrorKind::NonFiniteInput, "database contains non-finite features");
  }

  // LLR(x, y) = I - sum alpha_i (x_i^2 + y_i^2) + sum beta_i x_i y_i with
  // alpha = rho^2 / (2(1 - rho^2)), beta = rho / (1 - rho^2).
  Vector alpha(d);
  Vector beta(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    const double r = rho.rho()[static_cast<std::size_t>(i)];
    const double q = (1.0 - r) * (1.0 + r);
    alpha(i) = r * r / (2.0 * q);
    beta(i) = r / q;
  }
  const double info = mutual_information(rho);

  const Vector row_a = databases.a.array().square().matrix() * alpha;
  const Vector row_b = databases.b.array().square().matrix() * alpha;

  ScoreMatrix out;
  out.users_a = databases.users_a;
  out.users_b = databases.users_b;
  out.scores.noalias() = (databases.a * beta.asDiagonal()) * databases.b.transpose();
  out.scores.colwise() -= row_a;
  out.scores.rowwise() -= row_b.transpose();
  out.scores.array() += info;
  return out;
}

double assignment_weight(const Matrix& scores, const std::vector<std::size_t>& column_of_row) {
  double w = 0.0;
  for (std::size_t i = 0; i < column_of_row.size(); ++i) {
    w += scores(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(column_of_row[i]));
  }
  return w;
}

namespace {

void check_scores(const Matrix& scores) {
  if (scores.rows() != scores.cols()) throw Error(ErrorKind::DimensionMismatch, "score matrix must be square");
  if (!scores.allFinite()) throw Error(ErrorKind::NonFiniteScore, "score matrix has non-finite entries");
}

struct HungarianResult {
  std::vector<std::size_t> column_of_row;
  std::vector<double> row_potential;
  std::vector<double> col_potential;
};

// Shortest augmenting path Hungarian method minimising cost = -score.
// Potentials satisfy cost(i,j) - u_i - v_j >= 0 with equality on the matching.
HungarianResult hungarian(const Matrix& scores) {
  const auto n = static_cast<std::size_t>(scores.rows());
  constexpr double inf = std::numeric_limits<double>::infinity();
  auto cost = [&](std::size_t i, std::size_t j) {
    return -scores(static_cast<Eigen::Index>(i - 1), static_cast<Eigen::Index>(j - 1));
  };

  // 1-based with column 0 as the virtual source.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0, j) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  HungarianResult out;
  out.column_of_row.assign(n, 0);
  for (std::size_t j = 1; j <= n; ++j) out.column_of_row[p[j] - 1] = j - 1;
  out.row_potential.assign(u.begin() + 1, u.end());
  out.col_potential.assign(v.begin() + 1, v.end());
  return out;
}

// Rewrites an optimal assignment into the lexicographically smallest perfect
// matching of the tight-edge graph (edges with zero reduced cost), which is
// exactly the set of optimal assignments.
std::vector<std::size_t> lexicographic_optimum(const Matrix& scores, const HungarianResult& h) {
  const auto n = static_cast<std::size_t>(scores.rows());
  const double scale = std::max(1.0, scores.cwiseAbs().maxCoeff());
  const double tol = 1e-9 * scale;
  auto tight = [&](std::size_t i, std::size_t j) {
    const double reduced = -scores(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) -
                           h.row_potential[i] - h.col_potential[j];
    return std::abs(reduced) <= tol;
  };

  std::vector<std::size_t> col_of_row = h.column_of_row;
  std::vector<std::size_t> row_of_col(n);
  for (std::size_t i = 0; i < n; ++i) row_of_col[col_of_row[i]] = i;
  std::vector<bool> col_fixed(n, false);

  std::vector<std::size_t> parent_row(n);
  std::vector<bool> seen_row(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < col_of_row[i]; ++j) {
      if (col_fixed[j] || !tight(i, j)) continue;
      // Force (i, j): the row currently on j must reach i's column through
      // an alternating path of tight edges avoiding fixed rows/columns.
      const std::size_t displaced = row_of_col[j];
      const std::size_t target = col_of_row[i];
      std::fill(seen_row.begin(), seen_row.end(), false);
      std::vector<std::size_t> queue{displaced};
      seen_row[displaced] = true;
      seen_row[i] = true;
      std::size_t found_from = n;
      for (std::size_t head = 0; head < queue.size() && found_from == n; ++head) {
        const std::size_t r = queue[head];
        for (std::size_t c = 0; c < n; ++c) {
          if (c == j || col_fixed[c] || c == col_of_row[r] || !tight(r, c)) continue;
          if (c == target) {
            found_from = r;
            break;
          }
          const std::size_t next = row_of_col[c];
          if (seen_row[next]) continue;
          seen_row[next] = true;
          parent_row[next] = r;
          queue.push_back(next);
        }
      }
      if (found_from == n) continue;
      // Shift along the path: each row on it takes the column that leads
      // towards `target`, then i takes j.
      std::size_t r = found_from;
      std::size_t c = target;
      while (true) {
        const std::size_t previous = col_of_row[r];
        col_of_row[r] = c;
        row_of_col[c] = r;
        if (r == displaced) break;
        c = previous;
        r = parent_row[r];
      }
      col_of_row[i] = j;
      row_of_col[j] = i;
      break;
    }
    col_fixed[col_of_row[i]] = true;
  }
  return col_of_row;
}

}  // namespace

Assignment max_weight_assignment(const Matrix& scores) {
  check_scores(scores);
  Assignment out;
  if (scores.rows() == 0) return out;
  const HungarianResult h = hungarian(scores);
  const double base_weight = assignment_weight(scores, h.column_of_row);
  out.column_of_row = lexicographic_optimum(scores, h);
  out.weight = assignment_weight(scores, out.column_of_row);
  // Reduced-cost tolerance may admit a near-tie that rounds lower; keep the
  // Hungarian optimum in that case.
  if (out.weight < base_weight) {
    out.column_of_row = h.column_of_row;
    out.weight = base_weight;
  }
  return out;
}

Assignment brute_force_assignment(const Matrix& scores, std::size_t cap) {
  check_scores(scores);
  const auto n = static_cast<std::size_t>(scores.rows());
  if (n > cap) {
    throw Error(ErrorKind::InstanceTooLarge,
                "brute force limited to n <= " + std::to_string(cap) + ", got " + std::to_string(n));
  }
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Assignment best{perm, assignment_weight(scores, perm)};
  // Lexicographic enumeration; strict improvement keeps the smallest optimum.
  while (std::next_permutation(perm.begin(), perm.end())) {
    const double w = assignment_weight(scores, perm);
    if (w > best.weight) best = {perm, w};
  }
  return best;
}

Matching map_align(const ScoreMatrix& scores) {
  const Assignment a = max_weight_assignment(scores.scores);
  return Matching::from_permutation(scores.users_a, scores.users_b, a.column_of_row);
}

std::pair<Matching, double> brute_force_align(const ScoreMatrix& scores, std::size_t cap) {
  const Assignment a = brute_force_assignment(scores.scores, cap);
  return {Matching::from_permutation(scores.users_a, scores.users_b, a.column_of_row), a.weight};
}

Matching bht_align(const ScoreMatrix& scores, double tau) {
  if (std::isnan(tau)) throw Error(ErrorKind::InvalidArgument, "threshold is NaN");
  Matching m;
  m.bijective = false;
  for (Eigen::Index i = 0; i < scores.scores.rows(); ++i) {
    for (Eigen::Index j = 0; j < scores.scores.cols(); ++j) {
      if (scores.scores(i, j) >= tau) {
        m.pairs.emplace_back(scores.users_a[static_cast<std::size_t>(i)],
                             scores.users_b[static_cast<std::size_t>(j)]);
      }
    }
  }
  return m;
}

ThresholdWindow select_threshold(const CorrelationSummary& summary, std::size_t n, double eps_fn,
                                 double eps_fp) {
  return bht_threshold_window(summary, n, eps_fn, eps_fp);
}

ErrorCounts score_alignment(const Matching& predicted, const Matching& truth) {
  if (!truth.bijective) throw Error(ErrorKind::IdentifierMismatch, "truth must be bijective");
  truth.validate();
  std::set<IdPair> truth_set(truth.pairs.begin(), truth.pairs.end());
  std::set<std::string> ids_a;
  std::set<std::string> ids_b;
  for (const auto& [a, b] : truth.pairs) {
    ids_a.insert(a);
    ids_b.insert(b);
  }
  std::set<IdPair> predicted_set;
  for (const auto& pair : predicted.pairs) {
    if (!ids_a.contains(pair.first) || !ids_b.contains(pair.second)) {
      throw Error(ErrorKind::IdentifierMismatch, "predicted pair (" + pair.first + ", " + pair.second +
                                                     ") uses unknown identifiers");
    }
    predicted_set.insert(pair);
  }
  ErrorCounts out;
  std::size_t hits = 0;
  for (const auto& pair : predicted_set) hits += truth_set.contains(pair) ? 1 : 0;
  out.false_negatives = truth_set.size() - hits;
  out.false_positives = predicted_set.size() - hits;
  out.exact = out.false_negatives == 0 && out.false_positives == 0;
  return out;
}

ErrorCounts score_assignment(const std::vector<std::size_t>& predicted,
                             const std::vector<std::size_t>& truth) {
  if (predicted.size() != truth.size()) throw Error(ErrorKind::IdentifierMismatch, "assignment sizes differ");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hits += predicted[i] == truth[i] ? 1 : 0;
  ErrorCounts out;
  out.false_negatives = truth.size() - hits;
  out.false_positives = truth.size() - hits;
  out.exact = hits == truth.size();
  return out;
}

ErrorCounts score_threshold(const Matrix& scores, double tau, const std::vector<std::size_t>& truth) {
  if (static_cast<std::size_t>(scores.rows()) != truth.size()) {
    throw Error(ErrorKind::DimensionMismatch, "score matrix and truth disagree on n");
  }
  ErrorCounts out;
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    const auto t = static_cast<Eigen::Index>(truth[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = 0; j < scores.cols(); ++j) {
      const bool accepted = scores(i, j) >= tau;
      if (j == t) {
        out.false_negatives += accepted ? 0 : 1;
      } else {
        out.false_positives += accepted ? 1 : 0;
      }
    }
  }
  out.exact = out.false_negatives == 0 && out.false_positives == 0;
  return out;
}

}  // namespace dbalign
