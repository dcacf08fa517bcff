#include "dbalign/measures.hpp"

#include "dbalign/error.hpp"

#include <cmath>

namespace dbalign {

namespace {

// (1 - r)(1 + r) keeps precision as r approaches 1.
double one_minus_sq(double r) { return (1.0 - r) * (1.0 + r); }

double log_det_pd(const Matrix& m, const char* name) {
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorKind::PerfectCorrelation, std::string(name) + " is singular");
  }
  const Matrix& l = llt.matrixLLT();
  return 2.0 * l.diagonal().array().log().sum();
}

}  // namespace

double mutual_information(const CanonicalModel& rho) {
  double total = 0.0;
  for (double r : rho.rho()) {
    if (r >= 1.0) throw Error(ErrorKind::PerfectCorrelation, "rho_i >= 1");
    total -= 0.5 * std::log(one_minus_sq(r));
  }
  return total;
}

double mutual_information_general(const CorrelationModel& model) {
  validate_covariance(model);
  const double joint = log_det_pd(model.joint_covariance(), "joint covariance");
  const double a = log_det_pd(model.sigma_a, "sigma_a");
  const double b = log_det_pd(model.sigma_b, "sigma_b");
  return -0.5 * (joint - a - b);
}

double sigma(const CanonicalModel& rho) {
  double total = 0.0;
  for (double r : rho.rho()) total += r * r;
  return std::sqrt(total);
}

double sigma_general(const CorrelationModel& model) {
  validate_covariance(model);
  Eigen::LLT<Matrix> la(model.sigma_a);
  Eigen::LLT<Matrix> lb(model.sigma_b);
  const Matrix left = la.solve(model.sigma_ab);                          // Sa^-1 Sab
  const Matrix right = lb.solve(model.sigma_ab.transpose());             // Sb^-1 Sab^T
  return std::sqrt(std::max(0.0, (left * right).trace()));
}

CorrelationSummary summarize(const CanonicalModel& rho) {
  return {mutual_information(rho), sigma(rho)};
}

double log_likelihood_ratio(const CanonicalModel& rho, std::span<const double> x,
                            std::span<const double> y) {
  const auto& r = rho.rho();
  if (x.size() != r.size() || y.size() != r.size()) {
    throw Error(ErrorKind::DimensionMismatch, "feature vectors must have length " + std::to_string(r.size()));
  }
  double total = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) {
      throw Error(ErrorKind::NonFiniteInput, "feature vector entry is not finite");
    }
    const double q = one_minus_sq(r[i]);
    const double quad = r[i] * r[i] * (x[i] * x[i] + y[i] * y[i]) - 2.0 * r[i] * x[i] * y[i];
    total += -0.5 * std::log(q) - quad / (2.0 * q);
  }
  return total;
}

}  // namespace dbalign
