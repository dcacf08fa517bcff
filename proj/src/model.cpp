#include "dbalign/model.hpp"

#include "dbalign/error.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace dbalign {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorKind::AsymmetryBeyondTolerance: return "AsymmetryBeyondTolerance";
    case ErrorKind::PerfectCorrelation: return "PerfectCorrelation";
    case ErrorKind::NonFiniteInput: return "NonFiniteInput";
    case ErrorKind::NonFiniteScore: return "NonFiniteScore";
    case ErrorKind::InstanceTooLarge: return "InstanceTooLarge";
    case ErrorKind::IdentifierMismatch: return "IdentifierMismatch";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

bool is_validation_error(ErrorKind kind) {
  return kind != ErrorKind::IoError;
}

Matrix CorrelationModel::joint_covariance() const {
  const auto da = dim_a();
  const auto db = dim_b();
  Matrix full(da + db, da + db);
  full.topLeftCorner(da, da) = sigma_a;
  full.topRightCorner(da, db) = sigma_ab;
  full.bottomLeftCorner(db, da) = sigma_ab.transpose();
  full.bottomRightCorner(db, db) = sigma_b;
  return full;
}

CorrelationModel CorrelationModel::from_canonical(const std::vector<double>& rho) {
  const auto d = static_cast<Eigen::Index>(rho.size());
  CorrelationModel m;
  m.mu_a = Vector::Zero(d);
  m.mu_b = Vector::Zero(d);
  m.sigma_a = Matrix::Identity(d, d);
  m.sigma_b = Matrix::Identity(d, d);
  m.sigma_ab = Matrix::Zero(d, d);
  for (Eigen::Index i = 0; i < d; ++i) m.sigma_ab(i, i) = rho[static_cast<std::size_t>(i)];
  return m;
}

CanonicalModel::CanonicalModel(std::vector<double> rho, double perfect_tolerance) {
  rho_.reserve(rho.size());
  for (double r : rho) {
    if (!std::isfinite(r)) throw Error(ErrorKind::NonFiniteInput, "rho contains a non-finite value");
    const double a = std::abs(r);
    if (a >= 1.0 - perfect_tolerance) {
      throw Error(ErrorKind::PerfectCorrelation,
                  "correlation " + std::to_string(r) + " is numerically perfect");
    }
    if (a > 0.0) rho_.push_back(a);
  }
  std::stable_sort(rho_.begin(), rho_.end(), std::greater<>());
}

CanonicalModel CanonicalModel::constant(double rho, std::size_t d) {
  return CanonicalModel(std::vector<double>(d, rho));
}

FeatureTransform FeatureTransform::identity(Eigen::Index d) {
  return {Vector::Zero(d), Matrix::Identity(d, d)};
}

namespace {

double scale_of(const Matrix& m) {
  return m.size() == 0 ? 1.0 : std::max(1.0, m.cwiseAbs().maxCoeff());
}

void check_square(const Matrix& m, Eigen::Index d, const char* name) {
  if (m.rows() != d || m.cols() != d) {
    throw Error(ErrorKind::DimensionMismatch, std::string(name) + " must be " + std::to_string(d) +
                                                  "x" + std::to_string(d));
  }
}

void check_finite(const Matrix& m, const char* name) {
  if (!m.allFinite()) throw Error(ErrorKind::NonFiniteInput, std::string(name) + " has non-finite entries");
}

void check_symmetric(const Matrix& m, const char* name) {
  const double tol = 1e-9 * scale_of(m);
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > tol) {
    throw Error(ErrorKind::AsymmetryBeyondTolerance, std::string(name) + " is not symmetric");
  }
}

double min_eigenvalue(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

Matrix cholesky_factor(const Matrix& m, const char* name) {
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorKind::NotPositiveDefinite, std::string(name) + " Cholesky failed");
  }
  return llt.matrixL();
}

}  // namespace

CovarianceValidation validate_covariance(const CorrelationModel& model) {
  const auto da = model.sigma_a.rows();
  const auto db = model.sigma_b.rows();
  check_square(model.sigma_a, da, "sigma_a");
  check_square(model.sigma_b, db, "sigma_b");
  if (model.sigma_ab.rows() != da || model.sigma_ab.cols() != db) {
    throw Error(ErrorKind::DimensionMismatch, "sigma_ab must be " + std::to_string(da) + "x" + std::to_string(db));
  }
  if (model.mu_a.size() != da || model.mu_b.size() != db) {
    throw Error(ErrorKind::DimensionMismatch, "mean vectors do not match covariance dimensions");
  }
  if (da == 0 || db == 0) throw Error(ErrorKind::DimensionMismatch, "feature dimensions must be positive");
  check_finite(model.sigma_a, "sigma_a");
  check_finite(model.sigma_b, "sigma_b");
  check_finite(model.sigma_ab, "sigma_ab");
  if (!model.mu_a.allFinite() || !model.mu_b.allFinite()) {
    throw Error(ErrorKind::NonFiniteInput, "means have non-finite entries");
  }
  check_symmetric(model.sigma_a, "sigma_a");
  check_symmetric(model.sigma_b, "sigma_b");

  const Matrix full = model.joint_covariance();
  const double tol = kDefaultDropTolerance * scale_of(full);

  CovarianceValidation out;
  out.min_eigenvalue_a = min_eigenvalue(model.sigma_a);
  if (out.min_eigenvalue_a <= tol) throw Error(ErrorKind::NotPositiveDefinite, "sigma_a");
  out.min_eigenvalue_b = min_eigenvalue(model.sigma_b);
  if (out.min_eigenvalue_b <= tol) throw Error(ErrorKind::NotPositiveDefinite, "sigma_b");
  out.min_eigenvalue_joint = min_eigenvalue(full);
  if (out.min_eigenvalue_joint < -tol) throw Error(ErrorKind::NotPositiveDefinite, "full block covariance");
  return out;
}

Canonicalization canonicalize(const CorrelationModel& model, double drop_tolerance) {
  validate_covariance(model);

  const Matrix la = cholesky_factor(model.sigma_a, "sigma_a");
  const Matrix lb = cholesky_factor(model.sigma_b, "sigma_b");
  const auto la_tri = la.triangularView<Eigen::Lower>();
  const auto lb_tri = lb.triangularView<Eigen::Lower>();

  // Whitened cross-covariance La^-1 Sab Lb^-T.
  const Matrix left = la_tri.solve(model.sigma_ab);
  const Matrix whitened = lb_tri.solve(left.transpose()).transpose();

  Eigen::JacobiSVD<Matrix> svd(whitened, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vector& s = svd.singularValues();

  std::vector<double> rho;
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) >= 1.0 - drop_tolerance) {
      throw Error(ErrorKind::PerfectCorrelation, "canonical correlation " + std::to_string(s(i)) + " reaches 1");
    }
    if (s(i) > drop_tolerance) {
      rho.push_back(s(i));
      keep.push_back(i);
    }
  }

  const auto d = static_cast<Eigen::Index>(keep.size());
  Matrix u(model.dim_a(), d);
  Matrix v(model.dim_b(), d);
  for (Eigen::Index k = 0; k < d; ++k) {
    u.col(k) = svd.matrixU().col(keep[static_cast<std::size_t>(k)]);
    v.col(k) = svd.matrixV().col(keep[static_cast<std::size_t>(k)]);
  }

  // U^T La^-1 == (La^-T U)^T.
  const Matrix map_a = la_tri.transpose().solve(u).transpose();
  const Matrix map_b = lb_tri.transpose().solve(v).transpose();

  Canonicalization out;
  out.model = CanonicalModel(rho, drop_tolerance);
  out.transform_a = {model.mu_a, map_a};
  out.transform_b = {model.mu_b, map_b};
  return out;
}

Matrix apply_transform(const FeatureTransform& t, const Matrix& rows) {
  if (rows.cols() != t.offset.size() || t.linear_map.cols() != t.offset.size()) {
    throw Error(ErrorKind::DimensionMismatch,
                "transform expects " + std::to_string(t.offset.size()) + " columns, got " +
                    std::to_string(rows.cols()));
  }
  const Matrix centered = rows.rowwise() - t.offset.transpose();
  return centered * t.linear_map.transpose();
}

void DatabasePair::validate() const {
  if (users_a.size() != users_b.size() || static_cast<std::size_t>(a.rows()) != users_a.size() ||
      static_cast<std::size_t>(b.rows()) != users_b.size()) {
    throw Error(ErrorKind::DimensionMismatch, "databases must have the same number of users");
  }
  if (users_a.empty()) throw Error(ErrorKind::DimensionMismatch, "databases must be non-empty");
  for (const auto* side : {&users_a, &users_b}) {
    std::unordered_set<std::string> seen(side->begin(), side->end());
    if (seen.size() != side->size()) throw Error(ErrorKind::IdentifierMismatch, "duplicate user identifier");
  }
}

Matching Matching::from_permutation(const std::vector<std::string>& users_a,
                                    const std::vector<std::string>& users_b,
                                    const std::vector<std::size_t>& column_of_row) {
  Matching m;
  m.bijective = true;
  m.pairs.reserve(column_of_row.size());
  for (std::size_t i = 0; i < column_of_row.size(); ++i) {
    m.pairs.emplace_back(users_a.at(i), users_b.at(column_of_row[i]));
  }
  return m;
}

void Matching::normalize() { std::sort(pairs.begin(), pairs.end()); }

void Matching::validate() const {
  if (!bijective) return;
  std::unordered_set<std::string> left;
  std::unordered_set<std::string> right;
  for (const auto& [a, b] : pairs) {
    if (!left.insert(a).second || !right.insert(b).second) {
      throw Error(ErrorKind::IdentifierMismatch, "bijective matching repeats identifier");
    }
  }
}

std::vector<std::string> default_ids(char prefix, std::size_t n) {
  std::vector<std::string> ids;
  ids.reserve(n);
  for (std::size_t i = 1; i <= n; ++i) ids.push_back(prefix + std::to_string(i));
  return ids;
}

}  // namespace dbalign
