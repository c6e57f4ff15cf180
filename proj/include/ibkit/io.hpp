#pragma once

#include <Eigen/Core>

#include <optional>
#include <string>
#include <vector>

#include "ibkit/pareto.hpp"
#include "ibkit/prob.hpp"

namespace ibkit::io {

// Joint table parsers. CSV carries a header row of Y labels (optionally
// preceded by an "x" label column); JSON uses {"p_xy": [[...]],
// "x_labels": [...], "y_labels": [...]}. Errors are ParseError with the
// offending row/column named.
prob::JointXY parse_joint_csv(const std::string& text);
prob::JointXY parse_joint_json(const std::string& text);

struct ConditionalTable {
  Eigen::MatrixXd p_y_given_x;
  Eigen::VectorXd p_x;  // defaults to uniform when absent
};

// {"p_y_given_x": [[...]], "p_x": [...]} with p_x optional.
ConditionalTable parse_conditional_json(const std::string& text);

struct ProfileAtoms {
  Eigen::VectorXd w;
  Eigen::VectorXd mass;
  Eigen::VectorXd p1;
};

// CSV with header w,mass,p1 (one likelihood atom per row).
ProfileAtoms parse_profile_csv(const std::string& text);

// Labeled-sample CSV with header x,y, one observation per row; builds the
// empirical joint table (symbols ordered lexicographically).
prob::JointXY joint_from_samples_csv(const std::string& text);

// Loads a joint from a path (.csv or .json by extension), from the scheme
// "fixture:<name>" for built-in tables, or "samples:<path>" for labeled
// observations. Conditional-table JSON ({"p_y_given_x", "p_x"}) is folded
// into a joint with p_x defaulting to uniform.
prob::JointXY load_joint(const std::string& source);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

// Fixed-format double for byte-stable outputs.
std::string fmt(double value);

}  // namespace ibkit::io
