// ibkit command-line front end: ingest joint tables, run IB sweeps and
// phase/learnability/Pareto analyses, emit machine-readable JSON/CSV.

#include <CLI11.hpp>
#include <json.hpp>

#include <Eigen/Core>

#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ibkit/corpus.hpp"
#include "ibkit/errors.hpp"
#include "ibkit/io.hpp"
#include "ibkit/learnability.hpp"
#include "ibkit/log.hpp"
#include "ibkit/pareto.hpp"
#include "ibkit/phase.hpp"
#include "ibkit/prob.hpp"
#include "ibkit/solver.hpp"

namespace {

using nlohmann::json;
using namespace ibkit;

constexpr const char* kSchemaVersion = "1";

enum ExitCode { kOk = 0, kValidation = 2, kNoConvergence = 3 };

struct Output {
  std::string path;    // empty = stdout
  std::string format;  // "json" or "csv"
};

void emit(const Output& out, const std::string& content) {
  if (out.path.empty()) {
    std::fputs(content.c_str(), stdout);
  } else {
    io::write_file(out.path, content);
  }
}

json config_json(const std::map<std::string, std::string>& config) {
  json c = json::object();
  for (const auto& [k, v] : config) c[k] = v;
  return c;
}

std::string render_json(const std::string& command,
                        const std::map<std::string, std::string>& config, json results) {
  json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["command"] = command;
  doc["config"] = config_json(config);
  doc["results"] = std::move(results);
  return doc.dump(2) + "\n";
}

std::string csv_header(const std::string& command,
                       const std::map<std::string, std::string>& config) {
  std::ostringstream ss;
  ss << "# schema_version=" << kSchemaVersion << "\n# command=" << command << "\n";
  for (const auto& [k, v] : config) ss << "# " << k << "=" << v << "\n";
  return ss.str();
}

std::vector<double> vector_to_std(const Eigen::VectorXd& v) {
  return {v.data(), v.data() + v.size()};
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

// Shared input resolution: a path, "fixture:<name>", or "analytic" for the
// closed-form warmup (profile-backed commands bin it; joint-backed commands
// receive the fine-binned table).
prob::JointXY resolve_joint(const std::string& input, Eigen::Index fine_bins) {
  if (input == "analytic") {
    return pareto::joint_from_profile(corpus::analytic_warmup_profile(fine_bins));
  }
  return io::load_joint(input);
}

struct SolverFlags {
  double tol = 1e-10;
  int max_iter = 100000;
  int restarts = 5;
  std::uint64_t seed = 0;

  void attach(CLI::App* cmd) {
    cmd->add_option("--tol", tol, "fixed-point tolerance");
    cmd->add_option("--max-iter", max_iter, "iteration cap per restart");
    cmd->add_option("--restarts", restarts, "random restarts per solve");
    cmd->add_option("--seed", seed, "PRNG seed");
  }

  [[nodiscard]] solver::SolveParams params() const {
    solver::SolveParams p;
    p.tol = tol;
    p.max_iter = max_iter;
    p.restarts = restarts;
    p.seed = seed;
    return p;
  }

  void record(std::map<std::string, std::string>& config) const {
    config["tol"] = io::fmt(tol);
    config["max_iter"] = std::to_string(max_iter);
    config["restarts"] = std::to_string(restarts);
    config["seed"] = std::to_string(seed);
  }
};

int cmd_mi(const std::string& input, const Output& out) {
  prob::JointXY joint = io::load_joint(input);
  std::map<std::string, std::string> config{{"input", input}, {"format", out.format}};
  json results;
  results["i_xy_bits"] = prob::mutual_information(joint);
  results["h_x_bits"] = prob::entropy_x(joint);
  results["h_y_bits"] = prob::entropy_y(joint);
  results["h_y_given_x_bits"] = prob::conditional_entropy_y_given_x(joint);
  if (out.format == "csv") {
    std::ostringstream ss;
    ss << csv_header("mi", config) << "key,value\n";
    for (const auto& [k, v] : results.items()) ss << k << "," << io::fmt(v.get<double>()) << "\n";
    emit(out, ss.str());
  } else {
    emit(out, render_json("mi", config, results));
  }
  return kOk;
}

int cmd_sweep(const std::string& input, double beta_min, double beta_max, int steps,
              Eigen::Index z_dim, bool warm_start, const SolverFlags& flags, const Output& out) {
  prob::JointXY joint = io::load_joint(input);
  const auto grid = solver::log_spaced(beta_min, beta_max, steps);
  solver::SweepOptions options;
  options.warm_start = warm_start;
  const auto results = solver::sweep(joint, z_dim, grid, flags.params(), options);

  std::map<std::string, std::string> config{
      {"input", input},          {"beta_min", io::fmt(beta_min)}, {"beta_max", io::fmt(beta_max)},
      {"steps", std::to_string(steps)}, {"z_dim", std::to_string(z_dim)},
      {"warm_start", warm_start ? "true" : "false"}, {"format", out.format}};
  flags.record(config);

  bool all_converged = true;
  if (out.format == "csv") {
    std::ostringstream ss;
    ss << csv_header("sweep", config) << "beta,i_xz_bits,i_yz_bits,objective_bits,converged\n";
    for (std::size_t i = 0; i < results.size(); ++i) {
      ss << io::fmt(grid[i]) << ',' << io::fmt(results[i].i_xz) << ',' << io::fmt(results[i].i_yz)
         << ',' << io::fmt(results[i].objective) << ',' << (results[i].converged ? 1 : 0) << "\n";
      all_converged = all_converged && results[i].converged;
    }
    emit(out, ss.str());
  } else {
    json points = json::array();
    for (std::size_t i = 0; i < results.size(); ++i) {
      points.push_back({{"beta", grid[i]},
                        {"i_xz_bits", results[i].i_xz},
                        {"i_yz_bits", results[i].i_yz},
                        {"objective_bits", results[i].objective},
                        {"iterations", results[i].iterations},
                        {"converged", results[i].converged}});
      all_converged = all_converged && results[i].converged;
    }
    emit(out, render_json("sweep", config, json{{"points", points}}));
  }
  return all_converged ? kOk : kNoConvergence;
}

int cmd_phase(const std::string& input, Eigen::Index z_dim, const phase::DiscoveryOptions& options,
              const SolverFlags& flags, const Output& out) {
  prob::JointXY joint = io::load_joint(input);
  phase::PhaseReport report = phase::find_phase_transitions(joint, z_dim, flags.params(), options);

  std::map<std::string, std::string> config{
      {"input", input},
      {"z_dim", std::to_string(z_dim)},
      {"patience", std::to_string(options.patience)},
      {"delta", io::fmt(options.delta)},
      {"max_ratio", io::fmt(options.max_ratio)},
      {"start_beta", io::fmt(options.start_beta)},
      {"warm_start", options.warm_start ? "true" : "false"},
      {"snapshots", options.snapshots ? "true" : "false"},
      {"format", out.format}};
  flags.record(config);

  if (out.format == "csv") {
    std::ostringstream ss;
    ss << csv_header("phase", config);
    for (double b : report.transitions) ss << "# transition=" << io::fmt(b) << "\n";
    for (const std::string& w : report.warnings) ss << "# warning=" << w << "\n";
    ss << "beta,g,i_xz_bits,i_yz_bits\n";
    for (const auto& t : report.trace) {
      ss << io::fmt(t.beta) << ',' << io::fmt(t.g) << ',' << io::fmt(t.i_xz) << ','
         << io::fmt(t.i_yz) << "\n";
    }
    emit(out, ss.str());
  } else {
    json trace = json::array();
    for (const auto& t : report.trace) {
      trace.push_back(
          {{"beta", t.beta}, {"g", t.g}, {"i_xz_bits", t.i_xz}, {"i_yz_bits", t.i_yz}});
    }
    json results{{"transitions", report.transitions},
                 {"trace", trace},
                 {"warnings", report.warnings}};
    if (options.snapshots) {
      json snaps = json::array();
      for (const auto& enc : report.encoder_snapshots) snaps.push_back(matrix_to_json(enc));
      results["encoder_snapshots"] = snaps;
    }
    emit(out, render_json("phase", config, results));
  }
  return kOk;
}

int cmd_learnability(const std::optional<std::string>& input, const std::string& method,
                     std::optional<double> rho, double prior0, Eigen::Index copies,
                     const Output& out) {
  std::map<std::string, std::string> config{{"method", method}, {"format", out.format}};
  if (input) config["input"] = *input;
  if (rho) config["rho"] = io::fmt(*rho);
  config["prior0"] = io::fmt(prior0);
  config["copies"] = std::to_string(copies);

  std::optional<corpus::NoiseSpec> noise;
  if (rho) {
    corpus::NoiseSpec spec = corpus::NoiseSpec::binary_symmetric(*rho, copies);
    spec.prior = Eigen::Vector2d(prior0, 1.0 - prior0);
    noise = spec;
  }

  json methods = json::object();
  if (method == "class-conditional" && !noise) {
    throw Error(ErrorCode::OutOfRange, "learnability: class-conditional needs --rho");
  }
  if ((method == "class-conditional" || method == "all") && noise) {
    methods["class_conditional"] = {{"beta0", learnability::beta0_class_conditional(*noise)}};
  }
  if (method != "class-conditional") {
    std::optional<prob::JointXY> joint;
    if (input) joint = io::load_joint(*input);
    else if (noise) joint = corpus::class_conditional_joint(*noise);
    if (!joint) {
      throw Error(ErrorCode::OutOfRange, "learnability: need --input or --rho");
    }
    if (method == "maxcorr" || method == "all") {
      auto mc = learnability::beta0_maxcorr(*joint);
      methods["maxcorr"] = {{"beta0", mc.beta0}, {"h_star", vector_to_std(mc.h_star)}};
    }
    if (method == "conspicuous" || method == "info-estimate" || method == "all") {
      auto cs = learnability::conspicuous_search(joint->p_y_given_x(), joint->p_x());
      if (method == "conspicuous" || method == "all") {
        methods["conspicuous"] = {{"beta0", cs.beta0},
                                  {"subset", cs.subset},
                                  {"pivot_class", cs.pivot_class}};
      }
      if (method == "info-estimate" || method == "all") {
        methods["info_estimate"] = {{"beta0", learnability::beta0_info_estimate(*joint, cs.subset)}};
      }
    }
  }

  if (out.format == "csv") {
    std::ostringstream ss;
    ss << csv_header("learnability", config) << "method,beta0\n";
    for (const auto& [name, value] : methods.items()) {
      ss << name << ',' << io::fmt(value["beta0"].get<double>()) << "\n";
    }
    emit(out, ss.str());
  } else {
    emit(out, render_json("learnability", config, json{{"methods", methods}}));
  }
  return kOk;
}

int cmd_pareto(const std::string& input, Eigen::Index fine_bins, Eigen::Index max_clusters,
               Eigen::Index positive_class, std::uint64_t budget, bool dp, const Output& out) {
  pareto::LikelihoodProfile profile;
  std::optional<double> i_xy;
  if (input == "analytic") {
    profile = corpus::analytic_warmup_profile(fine_bins);
  } else if (input.size() >= 4 && input.substr(input.size() - 4) == ".csv" &&
             io::read_file(input).rfind("w,", 0) == 0) {
    const io::ProfileAtoms atoms = io::parse_profile_csv(io::read_file(input));
    profile = pareto::build_profile(atoms.w, atoms.mass, atoms.p1, fine_bins,
                                    pareto::Provenance::Empirical);
  } else {
    prob::JointXY joint = io::load_joint(input);
    profile = pareto::profile_from_joint(joint, positive_class);
    i_xy = prob::mutual_information(joint);
  }

  pareto::FrontierOptions options;
  options.exhaustive_budget = budget;
  options.use_dp = dp;
  std::vector<pareto::ParetoPoint> points;
  try {
    points = pareto::frontier(profile, max_clusters, options);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::BudgetExceeded) throw;
    log::warn("pareto: enumeration over budget, falling back to DP mode");
    options.use_dp = true;
    dp = true;
    points = pareto::frontier(profile, max_clusters, options);
  }

  std::map<std::string, std::string> config{
      {"input", input},
      {"fine_bins", std::to_string(fine_bins)},
      {"max_clusters", std::to_string(max_clusters)},
      {"positive_class", std::to_string(positive_class)},
      {"budget", std::to_string(budget)},
      {"dp", dp ? "true" : "false"},
      {"format", out.format}};

  auto boundaries_str = [](const pareto::Binning& b) {
    std::ostringstream ss;
    for (std::size_t i = 0; i < b.boundaries.size(); ++i) {
      if (i) ss << ';';
      ss << b.boundaries[i];
    }
    return ss.str();
  };

  if (out.format == "csv") {
    std::ostringstream ss;
    ss << csv_header("pareto", config) << "m,h_bits,i_bits,is_corner,boundaries\n";
    for (const auto& p : points) {
      ss << p.m << ',' << io::fmt(p.h_z) << ',' << io::fmt(p.i_zy) << ','
         << (p.is_corner ? 1 : 0) << ',' << boundaries_str(p.binning) << "\n";
    }
    emit(out, ss.str());
  } else {
    const double cap = i_xy ? *i_xy : profile.mi();
    json list = json::array();
    for (const auto& p : points) {
      const auto bl = pareto::bloat_loss(p, cap);
      json entry{{"m", p.m},
                 {"h_bits", p.h_z},
                 {"i_bits", p.i_zy},
                 {"is_corner", p.is_corner},
                 {"bloat_bits", bl.bloat},
                 {"loss_bits", bl.loss}};
      json bs = json::array();
      for (Eigen::Index b : p.binning.boundaries) bs.push_back(b);
      entry["boundaries"] = bs;
      list.push_back(std::move(entry));
    }
    json results{{"points", list}, {"profile_mi_bits", profile.mi()}};
    if (i_xy) results["i_xy_bits"] = *i_xy;
    emit(out, render_json("pareto", config, results));
  }
  return kOk;
}

int cmd_dib(const std::string& input, Eigen::Index fine_bins, double beta_i_min,
            double beta_i_max, int steps, Eigen::Index z_dim, std::uint64_t seed,
            const Output& out) {
  prob::JointXY joint = resolve_joint(input, fine_bins);
  const auto grid = solver::log_spaced(beta_i_min, beta_i_max, steps);

  std::map<std::string, std::string> config{
      {"input", input},
      {"fine_bins", std::to_string(fine_bins)},
      {"beta_i_min", io::fmt(beta_i_min)},
      {"beta_i_max", io::fmt(beta_i_max)},
      {"steps", std::to_string(steps)},
      {"z_dim", std::to_string(z_dim)},
      {"seed", std::to_string(seed)},
      {"format", out.format}};

  bool all_converged = true;
  std::ostringstream csv;
  json list = json::array();
  csv << csv_header("dib", config) << "beta_i,h_bits,i_bits,objective_bits,converged\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto r = solver::dib_solve(joint, grid[i], z_dim, seed ^ static_cast<std::uint64_t>(i));
    all_converged = all_converged && r.converged;
    csv << io::fmt(grid[i]) << ',' << io::fmt(r.i_xz) << ',' << io::fmt(r.i_yz) << ','
        << io::fmt(r.objective) << ',' << (r.converged ? 1 : 0) << "\n";
    list.push_back({{"beta_i", grid[i]},
                    {"h_bits", r.i_xz},
                    {"i_bits", r.i_yz},
                    {"objective_bits", r.objective},
                    {"converged", r.converged}});
  }
  if (out.format == "csv") emit(out, csv.str());
  else emit(out, render_json("dib", config, json{{"points", list}}));
  return all_converged ? kOk : kNoConvergence;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ibkit: exact information-bottleneck analysis of discrete joint distributions"};
  app.require_subcommand(1);

  Output out;
  out.format = "json";
  app.add_option("--output", out.path, "output file (stdout when omitted)")->capture_default_str();
  app.add_option("--format", out.format, "json or csv")
      ->check(CLI::IsMember({"json", "csv"}))
      ->capture_default_str();

  std::string input;
  SolverFlags flags;

  auto* mi = app.add_subcommand("mi", "mutual information of a joint table");
  mi->add_option("--input", input, "joint CSV/JSON path or fixture:<name>")->required();

  auto* sweep = app.add_subcommand("sweep", "IB solve across a log-spaced beta grid");
  double beta_min = 0.5, beta_max = 10.0, beta_single = 0.0;
  int steps = 20;
  Eigen::Index z_dim = 2;
  bool warm_start = false;
  sweep->add_option("--input", input)->required();
  sweep->add_option("--beta", beta_single, "solve a single beta instead of a grid");
  sweep->add_option("--beta-min", beta_min)->capture_default_str();
  sweep->add_option("--beta-max", beta_max)->capture_default_str();
  sweep->add_option("--steps", steps)->capture_default_str();
  sweep->add_option("--z-dim", z_dim)->capture_default_str();
  sweep->add_flag("--warm-start", warm_start, "reuse the previous beta's encoder");
  flags.attach(sweep);

  auto* ph = app.add_subcommand("phase", "discover IB phase transitions");
  phase::DiscoveryOptions discovery;
  bool cold_inner = false;
  ph->add_option("--input", input)->required();
  ph->add_option("--z-dim", z_dim)->capture_default_str();
  ph->add_option("--patience", discovery.patience)->capture_default_str();
  ph->add_option("--delta", discovery.delta)->capture_default_str();
  ph->add_option("--max-ratio", discovery.max_ratio)->capture_default_str();
  ph->add_option("--start-beta", discovery.start_beta)->capture_default_str();
  ph->add_flag("--cold-inner", cold_inner, "disable warm starts inside the discovery loop");
  ph->add_flag("--snapshots", discovery.snapshots, "embed per-step encoders in JSON output");
  flags.attach(ph);

  auto* learn = app.add_subcommand("learnability", "onset-of-learning estimators");
  std::string method = "all";
  std::optional<double> rho;
  double prior0 = 0.5;
  Eigen::Index copies = 2;
  std::optional<std::string> learn_input;
  std::string learn_input_raw;
  learn->add_option("--input", learn_input_raw, "joint table (optional when --rho is given)");
  learn->add_option("--method", method)
      ->check(CLI::IsMember({"all", "maxcorr", "conspicuous", "class-conditional", "info-estimate"}))
      ->capture_default_str();
  double rho_raw = -1.0;
  learn->add_option("--rho", rho_raw, "symmetric binary flip rate for class-conditional noise");
  learn->add_option("--prior0", prior0, "p(y*=0) for the noise construction")->capture_default_str();
  learn->add_option("--copies", copies, "x symbols per true class")->capture_default_str();

  auto* par = app.add_subcommand("pareto", "Pareto frontier of H(Z) vs I(Z;Y)");
  Eigen::Index fine_bins = 2000, max_clusters = 5, positive_class = 0;
  std::uint64_t budget = 5'000'000;
  bool dp = false;
  par->add_option("--input", input, "joint table, profile CSV (w,mass,p1), or 'analytic'")
      ->required();
  par->add_option("--fine-bins", fine_bins)->capture_default_str();
  par->add_option("--max-clusters", max_clusters)->capture_default_str();
  par->add_option("--positive-class", positive_class)->capture_default_str();
  par->add_option("--budget", budget)->capture_default_str();
  par->add_flag("--dp", dp, "corners by DP with a sampled in-between envelope");

  auto* dib = app.add_subcommand("dib", "deterministic-IB points across a beta_i grid");
  double beta_i_min = 1e-3, beta_i_max = 10.0, beta_i_single = 0.0;
  int dib_steps = 20;
  Eigen::Index dib_z = 5;
  std::uint64_t dib_seed = 0;
  dib->add_option("--input", input, "joint table or 'analytic'")->required();
  dib->add_option("--fine-bins", fine_bins)->capture_default_str();
  dib->add_option("--beta-i", beta_i_single, "single prediction weight instead of a grid");
  dib->add_option("--beta-i-min", beta_i_min)->capture_default_str();
  dib->add_option("--beta-i-max", beta_i_max)->capture_default_str();
  dib->add_option("--steps", dib_steps)->capture_default_str();
  dib->add_option("--z-dim", dib_z)->capture_default_str();
  dib->add_option("--seed", dib_seed)->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (mi->parsed()) return cmd_mi(input, out);
    if (sweep->parsed()) {
      if (beta_single > 0.0) {
        beta_min = beta_max = beta_single;
        steps = 1;
      }
      return cmd_sweep(input, beta_min, beta_max, steps, z_dim, warm_start, flags, out);
    }
    if (ph->parsed()) {
      discovery.warm_start = !cold_inner;
      return cmd_phase(input, z_dim, discovery, flags, out);
    }
    if (learn->parsed()) {
      if (!learn_input_raw.empty()) learn_input = learn_input_raw;
      if (rho_raw >= 0.0) rho = rho_raw;
      return cmd_learnability(learn_input, method, rho, prior0, copies, out);
    }
    if (par->parsed()) {
      return cmd_pareto(input, fine_bins, max_clusters, positive_class, budget, dp, out);
    }
    if (dib->parsed()) {
      if (beta_i_single > 0.0) {
        beta_i_min = beta_i_max = beta_i_single;
        dib_steps = 1;
      }
      return cmd_dib(input, fine_bins, beta_i_min, beta_i_max, dib_steps, dib_z, dib_seed, out);
    }
  } catch (const Error& e) {
    json err{{"error", {{"code", e.code_name()}, {"message", e.what()}}}};
    std::fprintf(stderr, "%s\n", err.dump().c_str());
    return e.code() == ErrorCode::NoConvergence ? kNoConvergence : kValidation;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "{\"error\":{\"code\":\"internal\",\"message\":\"%s\"}}\n", e.what());
    return kValidation;
  }
  return kOk;
}
