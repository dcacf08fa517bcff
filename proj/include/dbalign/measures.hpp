#pragma once

#include "dbalign/model.hpp"

#include <span>

namespace dbalign {

/// Information content of one matched pair, in nats.
struct CorrelationSummary {
  double mutual_information = 0.0;
  /// Standard deviation of the log-likelihood ratio under the joint law.
  double sigma = 0.0;
};

/// -1/2 sum ln(1 - rho_i^2).
double mutual_information(const CanonicalModel& rho);

/// -1/2 ln(det Sigma / (det Sigma_a det Sigma_b)), evaluated without
/// canonicalizing.
double mutual_information_general(const CorrelationModel& model);

/// sqrt(sum rho_i^2).
double sigma(const CanonicalModel& rho);

/// sqrt(tr(Sigma_a^-1 Sigma_ab Sigma_b^-1 Sigma_ab^T)).
double sigma_general(const CorrelationModel& model);

CorrelationSummary summarize(const CanonicalModel& rho);

/// ln p_XY(x, y) - ln p_X(x) - ln p_Y(y) for canonical-coordinate vectors.
double log_likelihood_ratio(const CanonicalModel& rho, std::span<const double> x,
                            std::span<const double> y);

}  // namespace dbalign
