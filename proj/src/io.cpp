#include "ibkit/io.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "ibkit/corpus.hpp"
#include "ibkit/errors.hpp"

namespace ibkit::io {

namespace {

using nlohmann::json;

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    // trim surrounding whitespace
    std::size_t a = 0, b = cell.size();
    while (a < b && std::isspace(static_cast<unsigned char>(cell[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(cell[b - 1]))) --b;
    cells.push_back(cell.substr(a, b - a));
  }
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    rows.push_back(split_csv_line(line));
  }
  return rows;
}

double parse_cell(const std::string& cell, std::size_t row, std::size_t col) {
  try {
    std::size_t used = 0;
    const double v = std::stod(cell, &used);
    if (used != cell.size()) throw std::invalid_argument(cell);
    return v;
  } catch (const std::exception&) {
    std::ostringstream msg;
    msg << "cell at row " << row + 1 << ", column " << col + 1 << " is not a number: '"
        << cell << "'";
    throw Error(ErrorCode::ParseError, msg.str());
  }
}

bool looks_numeric(const std::string& cell) {
  try {
    std::size_t used = 0;
    std::stod(cell, &used);
    return used == cell.size();
  } catch (const std::exception&) {
    return false;
  }
}

json parse_json_text(const std::string& text) {
  json parsed = json::parse(text, nullptr, false);
  if (parsed.is_discarded()) {
    throw Error(ErrorCode::ParseError, "invalid JSON input");
  }
  return parsed;
}

Eigen::MatrixXd matrix_from_json(const json& rows, const char* what) {
  if (!rows.is_array() || rows.empty() || !rows[0].is_array() || rows[0].empty()) {
    throw Error(ErrorCode::ParseError, std::string(what) + " must be a non-empty 2D array");
  }
  const std::size_t cols = rows[0].size();
  Eigen::MatrixXd m(rows.size(), cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!rows[i].is_array() || rows[i].size() != cols) {
      throw Error(ErrorCode::ParseError,
                  std::string(what) + ": row " + std::to_string(i + 1) + " has ragged width");
    }
    for (std::size_t j = 0; j < cols; ++j) {
      if (!rows[i][j].is_number()) {
        throw Error(ErrorCode::ParseError, std::string(what) + ": entry (" + std::to_string(i + 1) +
                                               "," + std::to_string(j + 1) + ") is not a number");
      }
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j].get<double>();
    }
  }
  return m;
}

}  // namespace

prob::JointXY parse_joint_csv(const std::string& text) {
  const auto rows = csv_rows(text);
  if (rows.size() < 2) throw Error(ErrorCode::ParseError, "joint CSV needs a header and data rows");
  const auto& header = rows[0];
  if (header.size() < 2) throw Error(ErrorCode::ParseError, "joint CSV header too short");

  const std::string first = header[0];
  const bool labeled_rows = first.empty() || first == "x" || first == "X";
  const std::size_t first_col = labeled_rows ? 1 : 0;
  std::vector<std::string> y_labels(header.begin() + static_cast<std::ptrdiff_t>(first_col),
                                    header.end());
  const std::size_t ny = y_labels.size();
  if (ny < 1) throw Error(ErrorCode::ParseError, "joint CSV has no Y columns");

  std::vector<std::string> x_labels;
  Eigen::MatrixXd table(static_cast<Eigen::Index>(rows.size() - 1), static_cast<Eigen::Index>(ny));
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (row.size() != ny + first_col) {
      throw Error(ErrorCode::ParseError,
                  "row " + std::to_string(i + 1) + " has " + std::to_string(row.size()) +
                      " cells, expected " + std::to_string(ny + first_col));
    }
    if (labeled_rows) {
      if (looks_numeric(row[0])) x_labels.push_back("x" + row[0]);
      else x_labels.push_back(row[0]);
    }
    for (std::size_t j = 0; j < ny; ++j) {
      table(static_cast<Eigen::Index>(i - 1), static_cast<Eigen::Index>(j)) =
          parse_cell(row[j + first_col], i, j + first_col);
    }
  }
  return prob::JointXY(std::move(table), std::move(x_labels), std::move(y_labels));
}

prob::JointXY parse_joint_json(const std::string& text) {
  const json parsed = parse_json_text(text);
  if (!parsed.contains("p_xy")) throw Error(ErrorCode::ParseError, "missing key 'p_xy'");
  Eigen::MatrixXd table = matrix_from_json(parsed["p_xy"], "p_xy");
  std::vector<std::string> xl, yl;
  if (parsed.contains("x_labels")) xl = parsed["x_labels"].get<std::vector<std::string>>();
  if (parsed.contains("y_labels")) yl = parsed["y_labels"].get<std::vector<std::string>>();
  return prob::JointXY(std::move(table), std::move(xl), std::move(yl));
}

ConditionalTable parse_conditional_json(const std::string& text) {
  const json parsed = parse_json_text(text);
  if (!parsed.contains("p_y_given_x")) {
    throw Error(ErrorCode::ParseError, "missing key 'p_y_given_x'");
  }
  ConditionalTable out;
  out.p_y_given_x = matrix_from_json(parsed["p_y_given_x"], "p_y_given_x");
  const Eigen::Index n = out.p_y_given_x.rows();
  if (parsed.contains("p_x")) {
    const auto& px = parsed["p_x"];
    if (!px.is_array() || static_cast<Eigen::Index>(px.size()) != n) {
      throw Error(ErrorCode::ParseError, "p_x length must match p_y_given_x rows");
    }
    out.p_x.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) out.p_x(i) = px[static_cast<std::size_t>(i)].get<double>();
  } else {
    out.p_x = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  }
  return out;
}

ProfileAtoms parse_profile_csv(const std::string& text) {
  const auto rows = csv_rows(text);
  if (rows.size() < 2) throw Error(ErrorCode::ParseError, "profile CSV needs a header and rows");
  const auto& header = rows[0];
  if (header.size() != 3 || header[0] != "w" || header[1] != "mass" || header[2] != "p1") {
    throw Error(ErrorCode::ParseError, "profile CSV header must be exactly 'w,mass,p1'");
  }
  ProfileAtoms atoms;
  const Eigen::Index n = static_cast<Eigen::Index>(rows.size() - 1);
  atoms.w.resize(n);
  atoms.mass.resize(n);
  atoms.p1.resize(n);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].size() != 3) {
      throw Error(ErrorCode::ParseError, "row " + std::to_string(i + 1) + " needs 3 cells");
    }
    atoms.w(static_cast<Eigen::Index>(i - 1)) = parse_cell(rows[i][0], i, 0);
    atoms.mass(static_cast<Eigen::Index>(i - 1)) = parse_cell(rows[i][1], i, 1);
    atoms.p1(static_cast<Eigen::Index>(i - 1)) = parse_cell(rows[i][2], i, 2);
  }
  return atoms;
}

prob::JointXY joint_from_samples_csv(const std::string& text) {
  const auto rows = csv_rows(text);
  if (rows.size() < 2 || rows[0].size() != 2 || rows[0][0] != "x" || rows[0][1] != "y") {
    throw Error(ErrorCode::ParseError, "sample CSV header must be exactly 'x,y'");
  }
  std::map<std::string, Eigen::Index> x_ids, y_ids;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].size() != 2) {
      throw Error(ErrorCode::ParseError, "sample row " + std::to_string(i + 1) + " needs 2 cells");
    }
    x_ids.emplace(rows[i][0], 0);
    y_ids.emplace(rows[i][1], 0);
  }
  Eigen::Index next_id = 0;
  for (auto& [label, id] : x_ids) id = next_id++;
  next_id = 0;
  for (auto& [label, id] : y_ids) id = next_id++;
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(x_ids.size()),
                                                 static_cast<Eigen::Index>(y_ids.size()));
  for (std::size_t i = 1; i < rows.size(); ++i) {
    counts(x_ids[rows[i][0]], y_ids[rows[i][1]]) += 1.0;
  }
  counts /= counts.sum();
  std::vector<std::string> x_labels(x_ids.size()), y_labels(y_ids.size());
  for (const auto& [label, id] : x_ids) x_labels[static_cast<std::size_t>(id)] = label;
  for (const auto& [label, id] : y_ids) y_labels[static_cast<std::size_t>(id)] = label;
  return prob::JointXY(std::move(counts), std::move(x_labels), std::move(y_labels));
}

prob::JointXY load_joint(const std::string& source) {
  if (source.rfind("fixture:", 0) == 0) {
    return corpus::builtin(source.substr(8));
  }
  if (source.rfind("samples:", 0) == 0) {
    return joint_from_samples_csv(read_file(source.substr(8)));
  }
  const std::string text = read_file(source);
  if (source.size() >= 5 && source.substr(source.size() - 5) == ".json") {
    const json parsed = parse_json_text(text);
    if (parsed.contains("p_xy")) return parse_joint_json(text);
    if (parsed.contains("p_y_given_x")) {
      ConditionalTable cond = parse_conditional_json(text);
      return prob::JointXY(cond.p_x.asDiagonal() * cond.p_y_given_x);
    }
    throw Error(ErrorCode::ParseError, "JSON input needs 'p_xy' or 'p_y_given_x'");
  }
  return parse_joint_csv(text);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open input file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::ParseError, "cannot open output file '" + path + "'");
  out << content;
}

std::string fmt(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", value);
  return buf;
}

}  // namespace ibkit::io
