#include "semifit/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace semifit {

using nlohmann::json;

namespace {

std::string trim(std::string s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& cell, std::size_t row, const std::string& column) {
  double v = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  if (!cell.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (cell.empty() || ec != std::errc() || ptr != last) {
    throw Error(ErrorCode::Parse, "cannot parse '" + cell + "' in column " + column +
                                      " at data row " + std::to_string(row + 1));
  }
  return v;
}

VectorXd to_vector(const json& j, const char* field) {
  if (!j.contains(field) || !j.at(field).is_array()) {
    throw Error(ErrorCode::Parse, std::string("model JSON: missing array '") + field + "'");
  }
  const auto& a = j.at(field);
  VectorXd v(static_cast<Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) v[static_cast<Index>(i)] = a[i].get<double>();
  return v;
}

json from_vector(const VectorXd& v) {
  json a = json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

// Column-major flattening.
json from_matrix(const MatrixXd& m) {
  json a = json::array();
  for (Index j = 0; j < m.cols(); ++j) {
    for (Index i = 0; i < m.rows(); ++i) a.push_back(m(i, j));
  }
  return a;
}

MatrixXd to_matrix(const json& j, const char* field, Index rows, Index cols) {
  const VectorXd flat = to_vector(j, field);
  if (flat.size() != rows * cols) {
    throw Error(ErrorCode::Parse, std::string("model JSON: '") + field + "' has wrong length");
  }
  return flat.reshaped(rows, cols);
}

}  // namespace

Index CsvTable::column(const std::string& name) const {
  auto it = std::find(header.begin(), header.end(), name);
  return it == header.end() ? -1 : static_cast<Index>(it - header.begin());
}

CsvTable read_csv(std::istream& in) {
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::Parse, "empty CSV input");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  table.header = split_line(line);
  std::set<std::string> seen;
  for (const auto& h : table.header) {
    if (h.empty()) throw Error(ErrorCode::Parse, "CSV header has an empty column name");
    if (!seen.insert(h).second) throw Error(ErrorCode::Parse, "duplicate CSV column " + h);
  }
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto cells = split_line(line);
    if (cells.size() != table.header.size()) {
      throw Error(ErrorCode::Parse, "CSV data row " + std::to_string(rows.size() + 1) + " has " +
                                        std::to_string(cells.size()) + " fields, header has " +
                                        std::to_string(table.header.size()));
    }
    std::vector<double> row(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      row[c] = parse_number(cells[c], rows.size(), table.header[c]);
    }
    rows.push_back(std::move(row));
  }
  table.values.resize(static_cast<Index>(rows.size()), static_cast<Index>(table.header.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      table.values(static_cast<Index>(r), static_cast<Index>(c)) = rows[r][c];
    }
  }
  return table;
}

CsvTable read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  return read_csv(in);
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) return std::to_string(v);
  return std::string(buf, ptr);
}

void write_csv(std::ostream& out, const std::vector<std::string>& header, const MatrixXd& values) {
  if (static_cast<Index>(header.size()) != values.cols()) {
    throw Error(ErrorCode::ShapeMismatch, "CSV header/value column mismatch");
  }
  for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
  out << '\n';
  for (Index r = 0; r < values.rows(); ++r) {
    for (Index c = 0; c < values.cols(); ++c) out << (c ? "," : "") << format_double(values(r, c));
    out << '\n';
  }
}

void write_csv_file(const std::string& path, const std::vector<std::string>& header,
                    const MatrixXd& values) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
  write_csv(out, header, values);
}

RoleMap RoleMap::defaults_for(const CsvTable& table) {
  RoleMap roles;
  if (table.column("y") >= 0) roles.outcome = "y";
  for (const auto& h : table.header) {
    if (h.rfind("xuint", 0) == 0) {
      roles.uint_cols.push_back(h);
    } else if (h.rfind("xint", 0) == 0) {
      roles.int_cols.push_back(h);
    }
  }
  return roles;
}

RoleMap RoleMap::from_json(const json& j) {
  RoleMap roles;
  try {
    if (j.contains("outcome")) roles.outcome = j.at("outcome").get<std::string>();
    if (j.contains("int")) roles.int_cols = j.at("int").get<std::vector<std::string>>();
    if (j.contains("uint")) roles.uint_cols = j.at("uint").get<std::vector<std::string>>();
    if (j.contains("ignore")) roles.ignore = j.at("ignore").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("role map: ") + e.what());
  }
  return roles;
}

json RoleMap::to_json() const {
  return json{{"outcome", outcome}, {"int", int_cols}, {"uint", uint_cols}, {"ignore", ignore}};
}

void RoleMap::validate(const CsvTable& table, bool need_outcome) const {
  std::set<std::string> assigned;
  auto claim = [&](const std::string& name, const char* role) {
    if (table.column(name) < 0) {
      throw Error(ErrorCode::InvalidArgument,
                  std::string("column '") + name + "' (" + role + ") not found in CSV header");
    }
    if (!assigned.insert(name).second) {
      throw Error(ErrorCode::InvalidArgument,
                  "column '" + name + "' is assigned to more than one role");
    }
  };
  if (need_outcome) {
    if (outcome.empty()) throw Error(ErrorCode::InvalidArgument, "no outcome column given");
    claim(outcome, "outcome");
  }
  for (const auto& c : int_cols) claim(c, "int");
  for (const auto& c : uint_cols) claim(c, "uint");
  for (const auto& c : ignore) claim(c, "ignore");
  if (int_cols.empty()) throw Error(ErrorCode::InvalidArgument, "no interpretable columns given");
  if (uint_cols.size() < 2) {
    throw Error(ErrorCode::InvalidArgument, "need at least two uninterpretable columns");
  }
}

MatrixXd columns_by_name(const CsvTable& table, const std::vector<std::string>& names) {
  MatrixXd out(table.values.rows(), static_cast<Index>(names.size()));
  for (std::size_t k = 0; k < names.size(); ++k) {
    const Index c = table.column(names[k]);
    if (c < 0) throw Error(ErrorCode::ShapeMismatch, "column '" + names[k] + "' not found");
    out.col(static_cast<Index>(k)) = table.values.col(c);
  }
  return out;
}

Dataset dataset_from_table(const CsvTable& table, const RoleMap& roles) {
  roles.validate(table, true);
  return Dataset(table.values.col(table.column(roles.outcome)),
                 columns_by_name(table, roles.int_cols), columns_by_name(table, roles.uint_cols),
                 roles.int_cols, roles.uint_cols);
}

json params_to_json(const Params& params) {
  return json{{"psi", from_vector(params.psi)},
              {"gamma", from_matrix(params.gamma)},
              {"q", params.gamma.rows()},
              {"d", params.gamma.cols()}};
}

json model_to_json(const FittedModel& m) {
  const auto& s = m.standardizer;
  json j;
  j["format"] = "semifit-model/1";
  j["p"] = m.p();
  j["q"] = m.q();
  j["d"] = m.d();
  j["n_train"] = m.train_y.size();
  j["psi"] = from_vector(m.params.psi);
  j["psi_init"] = from_vector(m.psi_init);
  j["gamma"] = from_matrix(m.params.gamma);
  j["delta"] = m.config.delta;
  j["bandwidth"] = from_vector(m.bandwidth);
  j["standardizer"] = json{{"mean_int", from_vector(s.mean_int())},
                           {"std_int", from_vector(s.std_int())},
                           {"mean_uint", from_vector(s.mean_uint())},
                           {"std_uint", from_vector(s.std_uint())}};
  j["train_proj"] = from_matrix(m.train_proj);
  j["train_y"] = from_vector(m.train_y);
  j["train_h"] = from_vector(m.train_h);
  j["objective_value"] = m.objective_value;
  j["initial_objective"] = m.initial_objective;
  j["evaluations"] = m.evaluations;
  j["converged"] = m.converged;
  j["seed"] = m.config.seed;
  j["optimizer"] = json{{"max_evals", m.config.optimizer.max_evals},
                        {"restarts", m.config.optimizer.restarts},
                        {"x_tol", m.config.optimizer.x_tol},
                        {"f_tol", m.config.optimizer.f_tol}};
  j["bandwidth_override"] = m.config.bandwidth_override ? from_vector(*m.config.bandwidth_override)
                                                        : json(nullptr);
  j["names_int"] = m.names_int;
  j["names_uint"] = m.names_uint;
  return j;
}

FittedModel model_from_json(const json& j) {
  try {
    const auto p = j.at("p").get<Index>();
    const auto q = j.at("q").get<Index>();
    const auto d = j.at("d").get<Index>();
    const auto n = j.at("n_train").get<Index>();
    const auto& sj = j.at("standardizer");
    FittedModel m;
    m.params = Params{to_vector(j, "psi"), to_matrix(j, "gamma", q, d)};
    m.psi_init = to_vector(j, "psi_init");
    m.standardizer = Standardizer(to_vector(sj, "mean_int"), to_vector(sj, "std_int"),
                                  to_vector(sj, "mean_uint"), to_vector(sj, "std_uint"));
    m.train_proj = to_matrix(j, "train_proj", n, d);
    m.train_y = to_vector(j, "train_y");
    m.train_h = to_vector(j, "train_h");
    m.bandwidth = to_vector(j, "bandwidth");
    m.config.d = static_cast<int>(d);
    m.config.delta = j.at("delta").get<double>();
    m.config.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("optimizer")) {
      const auto& o = j.at("optimizer");
      m.config.optimizer = {o.at("max_evals").get<int>(), o.at("restarts").get<int>(),
                            o.at("x_tol").get<double>(), o.at("f_tol").get<double>()};
    }
    if (j.contains("bandwidth_override") && !j.at("bandwidth_override").is_null()) {
      m.config.bandwidth_override = to_vector(j, "bandwidth_override");
    }
    m.objective_value = j.at("objective_value").get<double>();
    m.initial_objective = j.value("initial_objective", m.objective_value);
    m.evaluations = j.value("evaluations", 0);
    m.converged = j.value("converged", true);
    m.names_int = j.value("names_int", std::vector<std::string>{});
    m.names_uint = j.value("names_uint", std::vector<std::string>{});

    if (m.params.psi.size() != p || m.psi_init.size() != p || m.standardizer.mean_int().size() != p ||
        m.standardizer.mean_uint().size() != q || m.train_y.size() != n || m.train_h.size() != n ||
        m.bandwidth.size() != d) {
      throw Error(ErrorCode::Parse, "model JSON: inconsistent dimensions");
    }
    if (!(m.bandwidth.array() > 0.0).all()) {
      throw Error(ErrorCode::Parse, "model JSON: bandwidth entries must be positive");
    }
    return m;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("model JSON: ") + e.what());
  }
}

void save_model(const FittedModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
  out << model_to_json(model).dump(2) << '\n';
}

FittedModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("model JSON: ") + e.what());
  }
  return model_from_json(j);
}

}  // namespace semifit
