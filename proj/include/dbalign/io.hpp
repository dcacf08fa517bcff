#pragma once

#include "dbalign/align.hpp"
#include "dbalign/model.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace dbalign::io {

using json = nlohmann::json;

/// Shortest round-trip free formatting: 17 significant digits.
std::string format_double(double x);

CorrelationModel model_from_json(const json& j);
json model_to_json(const CorrelationModel& m);
CanonicalModel canonical_from_json(const json& j);
json canonical_to_json(const CanonicalModel& m);

/// Accepts either a general model or a {"rho": [...]} canonical model; the
/// latter is embedded as a general one.
CorrelationModel load_model_file(const std::filesystem::path& path);

/// Database CSV: header `id,f1,...,fd`, one row per user.
void write_database_csv(const std::filesystem::path& path, const std::vector<std::string>& ids,
                        const Matrix& rows);
struct DatabaseTable {
  std::vector<std::string> ids;
  Matrix rows;
};
DatabaseTable read_database_csv(const std::filesystem::path& path);

/// Matching CSV: header `u,v`.
void write_matching_csv(const std::filesystem::path& path, const Matching& m);
Matching read_matching_csv(const std::filesystem::path& path, bool bijective);

json matching_to_json(const Matching& m);
json report_to_json(const AlignmentReport& r);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace dbalign::io
