#pragma once

// CSV ingestion with a column role map, and JSON documents for fitted models
// and simulation truth.

#include "semifit/core.hpp"

#include <json.hpp>

#include <iosfwd>
#include <string>
#include <vector>

namespace semifit {

struct CsvTable {
  std::vector<std::string> header;
  MatrixXd values;  // rows x header.size()

  Index column(const std::string& name) const;  // -1 when absent
};

/// Comma-delimited, '.' decimal point, first row is the header.
CsvTable read_csv(std::istream& in);
CsvTable read_csv_file(const std::string& path);
void write_csv(std::ostream& out, const std::vector<std::string>& header, const MatrixXd& values);
void write_csv_file(const std::string& path, const std::vector<std::string>& header,
                    const MatrixXd& values);

/// Assigns each column to one of outcome / int / uint / ignore. Columns not
/// named anywhere are ignored.
struct RoleMap {
  std::string outcome;
  std::vector<std::string> int_cols;
  std::vector<std::string> uint_cols;
  std::vector<std::string> ignore;

  /// outcome "y", int = columns prefixed "xint", uint = columns prefixed "xuint".
  static RoleMap defaults_for(const CsvTable& table);
  static RoleMap from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

  void validate(const CsvTable& table, bool need_outcome) const;
};

Dataset dataset_from_table(const CsvTable& table, const RoleMap& roles);

/// Feature blocks selected by name, in the given order.
MatrixXd columns_by_name(const CsvTable& table, const std::vector<std::string>& names);

nlohmann::json model_to_json(const FittedModel& model);
FittedModel model_from_json(const nlohmann::json& j);
void save_model(const FittedModel& model, const std::string& path);
FittedModel load_model(const std::string& path);

nlohmann::json params_to_json(const Params& params);

/// Shortest round-trip formatting for doubles.
std::string format_double(double v);

}  // namespace semifit
