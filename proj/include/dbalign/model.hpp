#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace dbalign {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr double kDefaultDropTolerance = 1e-10;

/// General joint-Gaussian feature model. A-side features have mean mu_a and
/// covariance sigma_a, B-side mu_b / sigma_b, and sigma_ab is the
/// cross-covariance of a matched pair.
struct CorrelationModel {
  Vector mu_a;
  Vector mu_b;
  Matrix sigma_a;
  Matrix sigma_b;
  Matrix sigma_ab;

  Eigen::Index dim_a() const { return sigma_a.rows(); }
  Eigen::Index dim_b() const { return sigma_b.rows(); }

  /// The full (d_a + d_b) square block covariance.
  Matrix joint_covariance() const;

  /// Canonical model embedded as a general one: zero means, identity
  /// marginals, diagonal cross-covariance.
  static CorrelationModel from_canonical(const std::vector<double>& rho);
};

/// Reduced model: per-coordinate correlations, each in (0, 1), sorted
/// non-increasing. Construction normalises the input (absolute values,
/// zeros dropped, sorted) and rejects |rho_i| >= 1 - perfect_tolerance.
class CanonicalModel {
 public:
  CanonicalModel() = default;
  explicit CanonicalModel(std::vector<double> rho,
                          double perfect_tolerance = kDefaultDropTolerance);

  /// d copies of a single correlation value.
  static CanonicalModel constant(double rho, std::size_t d);

  const std::vector<double>& rho() const noexcept { return rho_; }
  std::size_t dim() const noexcept { return rho_.size(); }
  bool empty() const noexcept { return rho_.empty(); }

  friend bool operator==(const CanonicalModel&, const CanonicalModel&) = default;

 private:
  std::vector<double> rho_;
};

/// Affine map row -> linear_map * (row - offset).
struct FeatureTransform {
  Vector offset;
  Matrix linear_map;

  static FeatureTransform identity(Eigen::Index d);
};

struct CovarianceValidation {
  double min_eigenvalue_a = 0.0;
  double min_eigenvalue_b = 0.0;
  double min_eigenvalue_joint = 0.0;
};

struct Canonicalization {
  CanonicalModel model;
  FeatureTransform transform_a;
  FeatureTransform transform_b;
};

/// Throws Error{DimensionMismatch | AsymmetryBeyondTolerance |
/// NotPositiveDefinite} on failure; otherwise returns the eigenvalue margins.
CovarianceValidation validate_covariance(const CorrelationModel& model);

/// Whitens both sides with Cholesky factors, then rotates with the SVD of the
/// whitened cross-covariance. Singular values at or below drop_tolerance are
/// discarded together with their coordinates.
Canonicalization canonicalize(const CorrelationModel& model,
                              double drop_tolerance = kDefaultDropTolerance);

/// Applies t to every row of `rows`.
Matrix apply_transform(const FeatureTransform& t, const Matrix& rows);

/// Two databases whose rows are per-user feature vectors.
struct DatabasePair {
  std::vector<std::string> users_a;
  std::vector<std::string> users_b;
  Matrix a;
  Matrix b;

  std::size_t size() const noexcept { return users_a.size(); }

  /// Throws DimensionMismatch / IdentifierMismatch when the invariants fail.
  void validate() const;
};

using IdPair = std::pair<std::string, std::string>;

/// A set of (identifier_a, identifier_b) pairs. `bijective` marks full
/// one-to-one matchings; BHT output is an arbitrary pair subset.
struct Matching {
  std::vector<IdPair> pairs;
  bool bijective = false;

  /// Builds the bijective matching users_a[i] -> users_b[column_of_row[i]].
  static Matching from_permutation(const std::vector<std::string>& users_a,
                                   const std::vector<std::string>& users_b,
                                   const std::vector<std::size_t>& column_of_row);

  /// Sorts pairs lexicographically so equal sets compare equal.
  void normalize();

  /// Throws IdentifierMismatch if a bijective matching repeats an identifier.
  void validate() const;

  friend bool operator==(const Matching&, const Matching&) = default;
};

/// "u1".."un" and "v1".."vn".
std::vector<std::string> default_ids(char prefix, std::size_t n);

}  // namespace dbalign
