#include "dbalign/io.hpp"

#include "dbalign/error.hpp"
#include "dbalign/synth.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace dbalign::io {

namespace fs = std::filesystem;

std::string format_double(double x) {
  char buf[64];
  const int len = std::snprintf(buf, sizeof buf, "%.17g", x);
  return std::string(buf, static_cast<std::size_t>(len));
}

namespace {

double finite_number(const json& v, const char* field) {
  if (!v.is_number()) throw Error(ErrorKind::ParseError, std::string(field) + " must contain numbers");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw Error(ErrorKind::NonFiniteInput, std::string(field) + " has a non-finite entry");
  return x;
}

Vector vector_field(const json& j, const char* field) {
  if (!j.contains(field) || !j.at(field).is_array()) {
    throw Error(ErrorKind::ParseError, std::string("missing array field ") + field);
  }
  const auto& arr = j.at(field);
  Vector v(static_cast<Eigen::Index>(arr.size()));
  for (std::size_t i = 0; i < arr.size(); ++i) v(static_cast<Eigen::Index>(i)) = finite_number(arr[i], field);
  return v;
}

Matrix matrix_field(const json& j, const char* field) {
  if (!j.contains(field) || !j.at(field).is_array()) {
    throw Error(ErrorKind::ParseError, std::string("missing matrix field ") + field);
  }
  const auto& rows = j.at(field);
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows[0].size();
  Matrix m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
  for (std::size_t i = 0; i < r; ++i) {
    if (!rows[i].is_array() || rows[i].size() != c) {
      throw Error(ErrorKind::DimensionMismatch, std::string(field) + " rows have unequal lengths");
    }
    for (std::size_t k = 0; k < c; ++k) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = finite_number(rows[i][k], field);
    }
  }
  return m;
}

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_json(const Vector& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) {
    if (!cell.empty() && cell.back() == '\r') cell.pop_back();
    cells.push_back(cell);
  }
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_double(const std::string& text, const fs::path& path) {
  double x = 0.0;
  const auto* begin = text.data();
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(begin, end, x);
  if (ec != std::errc() || ptr != end) {
    throw Error(ErrorKind::ParseError, path.string() + ": bad number '" + text + "'");
  }
  if (!std::isfinite(x)) throw Error(ErrorKind::NonFiniteInput, path.string() + ": non-finite value");
  return x;
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  return in;
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  return out;
}

}  // namespace

CorrelationModel model_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorKind::ParseError, "model must be a JSON object");
  CorrelationModel m;
  m.sigma_a = matrix_field(j, "sigma_a");
  m.sigma_b = matrix_field(j, "sigma_b");
  m.sigma_ab = matrix_field(j, "sigma_ab");
  m.mu_a = j.contains("mu_a") ? vector_field(j, "mu_a") : Vector::Zero(m.sigma_a.rows());
  m.mu_b = j.contains("mu_b") ? vector_field(j, "mu_b") : Vector::Zero(m.sigma_b.rows());
  // An empty JSON matrix loses its column count; recover it from the blocks.
  if (m.sigma_ab.size() == 0) m.sigma_ab = Matrix::Zero(m.sigma_a.rows(), m.sigma_b.rows());
  return m;
}

json model_to_json(const CorrelationModel& m) {
  return json{{"mu_a", vector_json(m.mu_a)},
              {"mu_b", vector_json(m.mu_b)},
              {"sigma_a", matrix_json(m.sigma_a)},
              {"sigma_b", matrix_json(m.sigma_b)},
              {"sigma_ab", matrix_json(m.sigma_ab)}};
}

CanonicalModel canonical_from_json(const json& j) {
  const Vector v = vector_field(j, "rho");
  return CanonicalModel(std::vector<double>(v.data(), v.data() + v.size()));
}

json canonical_to_json(const CanonicalModel& m) { return json{{"rho", m.rho()}}; }

CorrelationModel load_model_file(const fs::path& path) {
  json j;
  try {
    j = json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::ParseError, path.string() + ": " + e.what());
  }
  if (j.is_object() && j.contains("rho") && !j.contains("sigma_ab")) {
    return CorrelationModel::from_canonical(canonical_from_json(j).rho());
  }
  return model_from_json(j);
}

void write_database_csv(const fs::path& path, const std::vector<std::string>& ids, const Matrix& rows) {
  if (static_cast<std::size_t>(rows.rows()) != ids.size()) {
    throw Error(ErrorKind::DimensionMismatch, "id count does not match row count");
  }
  auto out = open_out(path);
  out << "id";
  for (Eigen::Index k = 0; k < rows.cols(); ++k) out << ",f" << (k + 1);
  out << '\n';
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    out << ids[static_cast<std::size_t>(i)];
    for (Eigen::Index k = 0; k < rows.cols(); ++k) out << ',' << format_double(rows(i, k));
    out << '\n';
  }
  if (!out) throw Error(ErrorKind::IoError, "failed writing " + path.string());
}

DatabaseTable read_database_csv(const fs::path& path) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::ParseError, path.string() + ": empty file");
  const auto header = split_csv_line(line);
  if (header.empty() || header[0] != "id") {
    throw Error(ErrorKind::ParseError, path.string() + ": header must start with 'id'");
  }
  const std::size_t d = header.size() - 1;
  std::vector<std::string> ids;
  std::vector<double> values;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != d + 1) {
      throw Error(ErrorKind::DimensionMismatch, path.string() + ": row for '" + cells[0] + "' has wrong width");
    }
    ids.push_back(cells[0]);
    for (std::size_t k = 1; k <= d; ++k) values.push_back(parse_double(cells[k], path));
  }
  DatabaseTable t;
  t.ids = std::move(ids);
  t.rows.resize(static_cast<Eigen::Index>(t.ids.size()), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < t.ids.size(); ++i) {
    for (std::size_t k = 0; k < d; ++k) {
      t.rows(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = values[i * d + k];
    }
  }
  return t;
}

void write_matching_csv(const fs::path& path, const Matching& m) {
  auto out = open_out(path);
  out << "u,v\n";
  for (const auto& [a, b] : m.pairs) out << a << ',' << b << '\n';
  if (!out) throw Error(ErrorKind::IoError, "failed writing " + path.string());
}

Matching read_matching_csv(const fs::path& path, bool bijective) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line) || split_csv_line(line) != std::vector<std::string>{"u", "v"}) {
    throw Error(ErrorKind::ParseError, path.string() + ": header must be 'u,v'");
  }
  Matching m;
  m.bijective = bijective;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != 2) throw Error(ErrorKind::ParseError, path.string() + ": expected two columns");
    m.pairs.emplace_back(cells[0], cells[1]);
  }
  m.validate();
  return m;
}

json matching_to_json(const Matching& m) {
  json pairs = json::array();
  for (const auto& [a, b] : m.pairs) pairs.push_back(json::array({a, b}));
  return json{{"bijective", m.bijective}, {"pairs", std::move(pairs)}};
}

json report_to_json(const AlignmentReport& r) {
  json j{{"algorithm", r.algorithm},
         {"predicted", matching_to_json(r.predicted)},
         {"false_negatives", r.false_negatives},
         {"false_positives", r.false_positives},
         {"exact", r.exact},
         {"total_score", r.total_score},
         {"wall_time", r.wall_time_seconds},
         {"generator", {{"rng", kRngName}, {"gaussian", kGaussianMethod}}}};
  j["truth"] = r.truth ? matching_to_json(*r.truth) : json(nullptr);
  j["threshold"] = r.threshold ? json(*r.threshold) : json(nullptr);
  if (r.seed) {
    j["seed"] = {{"master_seed", r.seed->master_seed}, {"trial_index", r.seed->trial_index}};
  } else {
    j["seed"] = nullptr;
  }
  return j;
}

std::string read_text(const fs::path& path) {
  auto in = open_in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
  if (!out) throw Error(ErrorKind::IoError, "failed writing " + path.string());
}

}  // namespace dbalign::io
