#pragma once

#include "mlsdc/collocation.hpp"
#include "mlsdc/problems.hpp"
#include "mlsdc/study.hpp"
#include "mlsdc/sweeper.hpp"

#include "json.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace mlsdc::cli {

using nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

class ConfigError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// One expected-order annotation. `metric` is order (fitted error slope),
/// gain (order(k) - order(k-1)) or contraction (contraction slope).
struct ExpectedCheck {
  std::string metric = "contraction";
  int k = 1;
  std::string relation = "band";  // band | at_most | at_least
  double expected = 0.0;
  double tol = 0.0;

  bool passes(double value) const {
    if (!std::isfinite(value)) return false;
    if (relation == "at_most") return value <= expected;
    if (relation == "at_least") return value >= expected;
    return std::abs(value - expected) <= tol;
  }

  std::string describe() const {
    std::ostringstream os;
    os << metric << "(k=" << k << ") ";
    if (relation == "at_most") os << "<= " << expected;
    else if (relation == "at_least") os << ">= " << expected;
    else os << "= " << expected << " +- " << tol;
    return os.str();
  }

  friend bool operator==(const ExpectedCheck&, const ExpectedCheck&) = default;
};

struct ProblemParams {
  std::string id;  // heat1d | allencahn2d | auzinger | zero
  double nu = 0.1;
  int kappa = 4;
  double eps = 0.2;
  double lambda = -0.75;
  double rho = 3.0;
  int dim = 1;  // zero problem only

  friend bool operator==(const ProblemParams&, const ProblemParams&) = default;
};

struct StudyConfig {
  int schema_version = kSchemaVersion;
  std::string name = "custom";
  std::string figure;
  std::string note;
  ProblemParams problem;
  std::string method = "SDC";
  int M = 3;
  int M_H = 3;
  int N_h = 0;  // points per axis, fine level (0 for pointwise problems)
  int N_H = 0;  // coarse level
  std::string preconditioner = "right_rectangle";
  int p = 8;
  std::string guess = "spread";
  std::uint64_t seed = 0;
  std::vector<double> dt;
  int k_max = 4;
  double t_end = 0.0;
  std::string order_reference = "exact";  // exact | last_node
  double node_tol = 1e-12;
  double collocation_tol = 1e-11;
  double fit_floor = 1e-13;
  double contraction_floor = 1e-12;
  int fourier_cutoff = -1;  // -1: default 2 kappa + 2 on gridded problems, 0: off
  bool timing = true;
  std::vector<ExpectedCheck> checks;

  friend bool operator==(const StudyConfig&, const StudyConfig&) = default;

  bool is_mlsdc() const { return method == "MLSDC"; }
  bool gridded() const { return problem.id == "heat1d" || problem.id == "allencahn2d"; }

  std::size_t effective_cutoff() const {
    if (fourier_cutoff >= 0) return static_cast<std::size_t>(fourier_cutoff);
    return gridded() ? static_cast<std::size_t>(2 * problem.kappa + 2) : 0;
  }

  /// Cross-field checks; throws ConfigError naming the violated constraint.
  void validate() const {
    auto fail = [](const std::string& what) { throw ConfigError("invalid config: " + what); };
    if (schema_version != kSchemaVersion)
      fail("schema_version " + std::to_string(schema_version) + " is not supported (expected " +
           std::to_string(kSchemaVersion) + ")");
    if (problem.id.empty()) fail("missing required key 'problem.id'");
    const std::set<std::string> ids{"heat1d", "allencahn2d", "auzinger", "zero"};
    if (!ids.count(problem.id)) fail("unknown problem.id '" + problem.id + "'");
    if (method != "SDC" && method != "MLSDC") fail("method must be SDC or MLSDC");
    if (M < 1) fail("collocation.M must be >= 1");
    if (is_mlsdc() && (M_H < 1 || M_H > M)) fail("collocation.M_H must satisfy 1 <= M_H <= M");
    if (dt.empty()) fail("dt list must not be empty");
    for (std::size_t i = 0; i < dt.size(); ++i) {
      if (!(dt[i] > 0.0)) fail("dt values must be > 0");
      if (i > 0 && !(dt[i] < dt[i - 1])) fail("dt values must be strictly decreasing");
    }
    if (k_max < 0) fail("k_max must be >= 0");
    if (!(node_tol > 0.0) || !(collocation_tol > 0.0)) fail("tolerances must be > 0");
    if (order_reference != "exact" && order_reference != "last_node")
      fail("order_reference must be exact or last_node");
    try {
      (void)preconditioner_from_string(preconditioner);
      (void)guess_kind_from_string(guess);
    } catch (const std::invalid_argument& e) {
      fail(e.what());
    }
    if (problem.id == "heat1d") {
      if (!(problem.nu > 0.0)) fail("problem.nu must be > 0");
      if (N_h < 1) fail("space.N_h must be >= 1");
      if (is_mlsdc() && N_h != N_H && N_h != 2 * N_H + 1)
        fail("Dirichlet grids need space.N_h = 2 N_H + 1 (or N_h = N_H)");
    }
    if (problem.id == "allencahn2d") {
      if (!(problem.eps > 0.0)) fail("problem.eps must be > 0");
      if (N_h < 3) fail("space.N_h must be >= 3");
      if (is_mlsdc() && N_h != N_H && N_h != 2 * N_H)
        fail("periodic grids need space.N_h = 2 N_H (or N_h = N_H)");
    }
    if (problem.id == "heat1d" || problem.id == "allencahn2d") {
      if (problem.kappa < 1) fail("problem.kappa must be >= 1");
      if (is_mlsdc() && N_h != N_H) {
        if (p < 2 || p % 2 != 0) fail("p must be even and >= 2");
        if (p > N_H) fail("p=" + std::to_string(p) + " exceeds space.N_H=" + std::to_string(N_H));
      }
      if (fourier_cutoff > N_h) fail("fourier_cutoff exceeds the number of grid points");
    }
    if (problem.id == "auzinger" && !(problem.rho > 0.0)) fail("problem.rho must be > 0");
    if (problem.id == "zero" && problem.dim < 1) fail("problem.dim must be >= 1");
    if (t_end > 0.0)
      for (double h : dt) {
        const double s = t_end / h;
        if (std::abs(s - std::round(s)) > 1e-9 * s) fail("t_end must be an integer multiple of every dt");
      }
    for (const auto& c : checks) {
      if (c.metric != "order" && c.metric != "gain" && c.metric != "contraction")
        fail("check metric must be order, gain or contraction");
      if (c.relation != "band" && c.relation != "at_most" && c.relation != "at_least")
        fail("check relation must be band, at_most or at_least");
      if (c.k < 0 || c.k > k_max) fail("check k=" + std::to_string(c.k) + " outside 0..k_max");
      if ((c.metric != "order") && c.k < 1) fail("gain/contraction checks need k >= 1");
    }
  }

  std::shared_ptr<const IVProblem> make_problem(int n) const {
    if (problem.id == "heat1d") return std::make_shared<Heat1D>(n, problem.nu, problem.kappa);
    if (problem.id == "allencahn2d") return std::make_shared<AllenCahn2D>(n, problem.eps, problem.kappa);
    if (problem.id == "auzinger") return std::make_shared<Auzinger>(problem.lambda, problem.rho);
    return std::make_shared<ZeroProblem>(static_cast<std::size_t>(problem.dim));
  }

  StudySetup to_setup(int jobs = 1) const {
    validate();
    StudySetup s;
    s.label = name;
    s.problem = make_problem(N_h);
    s.method = method_from_string(method);
    if (s.method == Method::MLSDC) s.coarse_problem = gridded() ? make_problem(N_H) : s.problem;
    s.num_nodes = M;
    s.coarse_nodes = is_mlsdc() ? M_H : M;
    s.interpolation_order = p;
    s.sweep.preconditioner = preconditioner_from_string(preconditioner);
    s.sweep.node_solve_tol = node_tol;
    s.guess = {guess_kind_from_string(guess), seed};
    s.dt_list = dt;
    s.k_max = k_max;
    s.t_end = t_end;
    s.collocation_tol = collocation_tol;
    s.order_reference = order_reference == "exact" ? OrderReference::Exact : OrderReference::LastNode;
    s.tail_cutoff = effective_cutoff();
    s.fit_floor = fit_floor;
    s.contraction_floor = contraction_floor;
    s.jobs = jobs;
    s.timing = timing;
    return s;
  }
};

// ---- JSON <-> StudyConfig ----

namespace detail {

/// Reads keys from one JSON object and complains about anything left over.
class Reader {
 public:
  Reader(const ordered_json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where("") + ": expected an object");
  }

  template <class T>
  void opt(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(where(key) + ": " + e.what());
    }
  }

  template <class T>
  void req(const char* key, T& out) {
    if (!j_.contains(key)) throw ConfigError("missing required key '" + where(key) + "'");
    opt(key, out);
  }

  const ordered_json* child(const char* key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  std::string where(const std::string& key) const {
    if (key.empty()) return path_.empty() ? "<root>" : path_;
    return path_.empty() ? key : path_ + "." + key;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError("unknown key '" + where(it.key()) + "'");
  }

 private:
  const ordered_json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

}  // namespace detail

inline ordered_json to_json(const ExpectedCheck& c) {
  ordered_json j{{"metric", c.metric}, {"k", c.k}, {"relation", c.relation}, {"expected", c.expected}};
  if (c.relation == "band") j["tol"] = c.tol;
  return j;
}

inline ordered_json to_json(const StudyConfig& c) {
  ordered_json prob{{"id", c.problem.id}};
  if (c.problem.id == "heat1d") {
    prob["nu"] = c.problem.nu;
    prob["kappa"] = c.problem.kappa;
  } else if (c.problem.id == "allencahn2d") {
    prob["eps"] = c.problem.eps;
    prob["kappa"] = c.problem.kappa;
  } else if (c.problem.id == "auzinger") {
    prob["lambda"] = c.problem.lambda;
    prob["rho"] = c.problem.rho;
  } else if (c.problem.id == "zero") {
    prob["dim"] = c.problem.dim;
  }
  ordered_json checks = ordered_json::array();
  for (const auto& ch : c.checks) checks.push_back(to_json(ch));
  return ordered_json{
      {"schema_version", c.schema_version},
      {"name", c.name},
      {"figure", c.figure},
      {"note", c.note},
      {"problem", prob},
      {"method", c.method},
      {"collocation", {{"M", c.M}, {"M_H", c.M_H}}},
      {"space", {{"N_h", c.N_h}, {"N_H", c.N_H}}},
      {"preconditioner", c.preconditioner},
      {"p", c.p},
      {"guess", {{"kind", c.guess}, {"seed", c.seed}}},
      {"dt", c.dt},
      {"k_max", c.k_max},
      {"t_end", c.t_end},
      {"order_reference", c.order_reference},
      {"tolerances",
       {{"node", c.node_tol},
        {"collocation", c.collocation_tol},
        {"fit_floor", c.fit_floor},
        {"contraction_floor", c.contraction_floor}}},
      {"fourier_cutoff", c.fourier_cutoff},
      {"timing", c.timing},
      {"checks", checks},
  };
}

inline ExpectedCheck check_from_json(const ordered_json& j, const std::string& path) {
  ExpectedCheck c;
  detail::Reader r(j, path);
  r.req("metric", c.metric);
  r.req("k", c.k);
  r.opt("relation", c.relation);
  r.req("expected", c.expected);
  r.opt("tol", c.tol);
  r.finish();
  return c;
}

/// Parses and validates. Unknown keys anywhere are errors.
inline StudyConfig config_from_json(const ordered_json& j) {
  StudyConfig c;
  detail::Reader r(j, "");
  r.req("schema_version", c.schema_version);
  if (c.schema_version != kSchemaVersion)
    throw ConfigError("unsupported schema_version " + std::to_string(c.schema_version));
  r.opt("name", c.name);
  r.opt("figure", c.figure);
  r.opt("note", c.note);
  const ordered_json* prob = r.child("problem");
  if (!prob) throw ConfigError("missing required key 'problem.id'");
  {
    detail::Reader pr(*prob, "problem");
    pr.req("id", c.problem.id);
    pr.opt("nu", c.problem.nu);
    pr.opt("kappa", c.problem.kappa);
    pr.opt("eps", c.problem.eps);
    pr.opt("lambda", c.problem.lambda);
    pr.opt("rho", c.problem.rho);
    pr.opt("dim", c.problem.dim);
    pr.finish();
  }
  r.opt("method", c.method);
  if (const auto* col = r.child("collocation")) {
    detail::Reader cr(*col, "collocation");
    cr.req("M", c.M);
    c.M_H = c.M;
    cr.opt("M_H", c.M_H);
    cr.finish();
  }
  if (const auto* sp = r.child("space")) {
    detail::Reader sr(*sp, "space");
    sr.req("N_h", c.N_h);
    c.N_H = c.N_h;
    sr.opt("N_H", c.N_H);
    sr.finish();
  }
  r.opt("preconditioner", c.preconditioner);
  r.opt("p", c.p);
  if (const auto* g = r.child("guess")) {
    detail::Reader gr(*g, "guess");
    gr.req("kind", c.guess);
    gr.opt("seed", c.seed);
    gr.finish();
  }
  r.req("dt", c.dt);
  r.opt("k_max", c.k_max);
  r.opt("t_end", c.t_end);
  r.opt("order_reference", c.order_reference);
  if (const auto* t = r.child("tolerances")) {
    detail::Reader tr(*t, "tolerances");
    tr.opt("node", c.node_tol);
    tr.opt("collocation", c.collocation_tol);
    tr.opt("fit_floor", c.fit_floor);
    tr.opt("contraction_floor", c.contraction_floor);
    tr.finish();
  }
  r.opt("fourier_cutoff", c.fourier_cutoff);
  r.opt("timing", c.timing);
  if (const auto* ch = r.child("checks")) {
    if (!ch->is_array()) throw ConfigError("checks: expected an array");
    for (std::size_t i = 0; i < ch->size(); ++i)
      c.checks.push_back(check_from_json((*ch)[i], "checks[" + std::to_string(i) + "]"));
  }
  r.finish();
  c.validate();
  return c;
}

inline StudyConfig parse_config_text(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("parse error: ") + e.what());
  }
  return config_from_json(j);
}

inline StudyConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config_text(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

}  // namespace mlsdc::cli
