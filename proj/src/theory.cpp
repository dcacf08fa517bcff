#include "dbalign/theory.hpp"

#include "dbalign/error.hpp"

#include <cmath>
#include <numbers>
#include <unordered_map>

namespace dbalign {

std::size_t CycleType::size() const {
  std::size_t n = 0;
  for (const auto& [len, k] : counts) n += len * k;
  return n;
}

std::size_t CycleType::fixed_points() const {
  const auto it = counts.find(1);
  return it == counts.end() ? 0 : it->second;
}

CycleType cycle_type_of_permutation(std::span<const std::size_t> perm) {
  const std::size_t n = perm.size();
  std::vector<bool> visited(n, false);
  CycleType out;
  for (std::size_t start = 0; start < n; ++start) {
    if (visited[start]) continue;
    std::size_t len = 0;
    for (std::size_t i = start; !visited[i]; i = perm[i]) {
      if (perm[i] >= n) throw Error(ErrorKind::InvalidArgument, "not a permutation");
      visited[i] = true;
      ++len;
    }
    ++out.counts[len];
  }
  if (out.size() != n) throw Error(ErrorKind::InvalidArgument, "not a permutation");
  return out;
}

CycleType cycle_type(const Matching& m1, const Matching& m2) {
  if (!m1.bijective || !m2.bijective || m1.pairs.size() != m2.pairs.size()) {
    throw Error(ErrorKind::IdentifierMismatch, "cycle type needs two bijective matchings of equal size");
  }
  m1.validate();
  m2.validate();
  const std::size_t n = m1.pairs.size();

  std::unordered_map<std::string, std::size_t> index_a;
  for (std::size_t i = 0; i < n; ++i) index_a.emplace(m1.pairs[i].first, i);
  std::unordered_map<std::string, std::size_t> a_of_b;  // m2^-1
  for (const auto& [a, b] : m2.pairs) {
    const auto it = index_a.find(a);
    if (it == index_a.end()) throw Error(ErrorKind::IdentifierMismatch, "identifier " + a + " missing from m1");
    a_of_b.emplace(b, it->second);
  }

  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto it = a_of_b.find(m1.pairs[i].second);
    if (it == a_of_b.end()) {
      throw Error(ErrorKind::IdentifierMismatch, "identifier " + m1.pairs[i].second + " missing from m2");
    }
    perm[i] = it->second;
  }
  return cycle_type_of_permutation(perm);
}

namespace {

double eigenvalue(std::size_t ell, std::size_t j, double s, double t) {
  const double angle = 2.0 * std::numbers::pi * static_cast<double>(j % ell) / static_cast<double>(ell);
  return s - t * std::cos(angle);
}

}  // namespace

double log_shifted_laplacian_det(std::size_t ell, double s, double t) {
  if (ell == 0) throw Error(ErrorKind::InvalidArgument, "cycle length must be positive");
  if (!(s > std::abs(t))) throw Error(ErrorKind::InvalidArgument, "log determinant needs s > |t|");
  double total = 0.0;
  for (std::size_t j = 1; j <= ell; ++j) total += std::log(eigenvalue(ell, j, s, t));
  return total;
}

double shifted_laplacian_det(std::size_t ell, double s, double t) {
  if (ell == 0) throw Error(ErrorKind::InvalidArgument, "cycle length must be positive");
  if (s > std::abs(t)) return std::exp(log_shifted_laplacian_det(ell, s, t));
  double prod = 1.0;
  for (std::size_t j = 1; j <= ell; ++j) prod *= eigenvalue(ell, j, s, t);
  return prod;
}

double log_bhattacharyya_r(const CycleType& cycles, const CanonicalModel& rho) {
  const double n = static_cast<double>(cycles.size());
  double total = 0.0;
  for (double r : rho.rho()) {
    const double r2 = r * r;
    const double q = (1.0 - r) * (1.0 + r);
    double term = 0.5 * n * std::log(q);
    for (const auto& [len, k] : cycles.counts) {
      // det L^1 = s - t = 1 - rho^2 exactly; skip the trig round-off.
      const double log_det = len == 1 ? std::log(q) : log_shifted_laplacian_det(len, 1.0 - r2 / 2.0, r2 / 2.0);
      term -= 0.5 * static_cast<double>(k) * log_det;
    }
    total += term;
  }
  return total;
}

double bhattacharyya_r(const CycleType& cycles, const CanonicalModel& rho) {
  return std::exp(log_bhattacharyya_r(cycles, rho));
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Achievable: return "achievable";
    case Verdict::Converse: return "converse";
    case Verdict::Gap: return "gap";
  }
  return "gap";
}

namespace {

void require_n(std::size_t n) {
  if (n < 2) throw Error(ErrorKind::InvalidArgument, "n must be at least 2");
}

}  // namespace

RegimeVerdict map_achievability_margin(const CanonicalModel& rho, std::size_t n) {
  require_n(n);
  const double info = mutual_information(rho);
  const double log_n = std::log(static_cast<double>(n));
  RegimeVerdict out;
  out.quantity = info / log_n;
  out.margin = info - 2.0 * log_n;
  out.verdict = out.margin > 0.0 ? Verdict::Achievable : Verdict::Gap;
  const double x = static_cast<double>(n) * std::exp(-info / 2.0);
  if (x < 1.0) out.failure_probability_bound = x / (1.0 - x);
  return out;
}

RegimeVerdict map_converse_from_information(double mutual_information, std::size_t n) {
  require_n(n);
  const double log_n = std::log(static_cast<double>(n));
  RegimeVerdict out;
  out.quantity = mutual_information / log_n;
  out.margin = 2.0 * log_n - mutual_information;
  out.verdict = out.margin > 0.0 ? Verdict::Converse : Verdict::Gap;
  out.asymptotic_only = true;
  return out;
}

RegimeVerdict map_converse_predicate(double rho_const, std::size_t d, std::size_t n) {
  return map_converse_from_information(mutual_information(CanonicalModel::constant(rho_const, d)), n);
}

ThresholdWindow bht_threshold_window(const CorrelationSummary& summary, std::size_t n, double eps_fn,
                                     double eps_fp) {
  if (n == 0) throw Error(ErrorKind::InvalidArgument, "n must be positive");
  if (!(eps_fn > 0.0) || !(eps_fp > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "error budgets must be positive");
  }
  const double nn = static_cast<double>(n);
  ThresholdWindow w;
  w.lower = std::log(nn * nn / eps_fp);
  w.upper = summary.mutual_information - summary.sigma * std::sqrt(nn / eps_fn);
  w.gap = w.lower - w.upper;
  w.feasible = w.lower <= w.upper;
  w.tau = w.feasible ? 0.5 * (w.lower + w.upper) : 0.0;
  return w;
}

double bht_converse_bound(double mutual_information, std::size_t n) {
  require_n(n);
  const double log_n = std::log(static_cast<double>(n));
  return std::max(0.0, 0.5 * static_cast<double>(n) * (log_n - mutual_information) / (2.0 * log_n + 1.0));
}

}  // namespace dbalign
