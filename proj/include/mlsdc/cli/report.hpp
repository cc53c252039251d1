#pragma once

#include "mlsdc/cli/config.hpp"
#include "mlsdc/study.hpp"

#include "json.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace mlsdc::cli {

inline constexpr const char* kCsvHeader =
    "preset,dt,k,err_coll,err_exact,err_last,order_fit,contraction_slope,E_max,wall_ms";

struct CheckOutcome {
  ExpectedCheck check;
  double value = 0.0;
  bool pass = false;
};

inline double metric_value(const StudyResult& r, const ExpectedCheck& c) {
  const auto k = static_cast<std::size_t>(c.k);
  if (c.metric == "order") return k < r.order.size() ? r.order[k] : NAN;
  if (c.metric == "gain") return (k >= 1 && k < r.order.size()) ? r.order[k] - r.order[k - 1] : NAN;
  return k < r.contraction.size() ? r.contraction[k] : NAN;
}

inline std::vector<CheckOutcome> evaluate_checks(const StudyConfig& cfg, const StudyResult& r) {
  std::vector<CheckOutcome> out;
  for (const auto& c : cfg.checks) {
    const double v = metric_value(r, c);
    out.push_back({c, v, c.passes(v)});
  }
  return out;
}

namespace detail {

inline std::string num(double v, const char* fmt) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

inline nlohmann::ordered_json num_or_null(double v) {
  return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(nullptr);
}

}  // namespace detail

inline std::string format_csv(const StudyResult& r) {
  std::ostringstream os;
  os << kCsvHeader << '\n';
  for (const auto& row : r.rows) {
    os << row.preset << ',' << detail::num(row.dt, "%.10g") << ',' << row.k << ','
       << detail::num(row.err_coll, "%.6e") << ',' << detail::num(row.err_exact, "%.6e") << ','
       << detail::num(row.err_last, "%.6e") << ',' << detail::num(row.order_fit, "%.4f") << ','
       << detail::num(row.contraction_slope, "%.4f") << ',' << detail::num(row.E_max, "%.6e") << ','
       << detail::num(row.wall_ms, "%.3f") << '\n';
  }
  return os.str();
}

inline nlohmann::ordered_json make_summary(const StudyConfig& cfg, const StudyResult& r,
                                           const std::vector<CheckOutcome>& checks) {
  using nlohmann::ordered_json;
  ordered_json orders = ordered_json::array(), contraction = ordered_json::array();
  for (double v : r.order) orders.push_back(detail::num_or_null(v));
  for (double v : r.contraction) contraction.push_back(detail::num_or_null(v));
  ordered_json cj = ordered_json::array();
  bool all = true;
  for (const auto& c : checks) {
    all = all && c.pass;
    cj.push_back({{"check", c.check.describe()},
                  {"value", detail::num_or_null(c.value)},
                  {"pass", c.pass}});
  }
  ordered_json tail{{"cutoff", cfg.effective_cutoff()},
                    {"indexing", "folded"},
                    {"heuristic_2d", r.tail_heuristic}};
  return ordered_json{{"schema_version", kSchemaVersion},
                      {"preset", cfg.name},
                      {"figure", cfg.figure},
                      {"note", cfg.note},
                      {"order_reference", cfg.order_reference},
                      {"orders", orders},
                      {"contraction_slopes", contraction},
                      {"checks", cj},
                      {"all_checks_pass", all},
                      {"fourier_tail", tail},
                      {"notes", r.notes},
                      {"config", to_json(cfg)}};
}

/// Guide slope per iteration: an order check if present, otherwise the
/// k = 0 fit plus k times the expected gain / contraction slope.
inline std::vector<double> guide_orders(const StudyConfig& cfg, const StudyResult& r) {
  std::vector<double> g(r.order.size(), NAN);
  double per_iter = NAN;
  for (const auto& c : cfg.checks)
    if ((c.metric == "gain" || c.metric == "contraction") && c.relation == "band") per_iter = c.expected;
  for (std::size_t k = 0; k < g.size(); ++k) {
    for (const auto& c : cfg.checks)
      if (c.metric == "order" && c.relation == "band" && static_cast<std::size_t>(c.k) == k) g[k] = c.expected;
    if (std::isnan(g[k]) && !std::isnan(per_iter) && std::isfinite(r.order[0]))
      g[k] = r.order[0] + per_iter * static_cast<double>(k);
  }
  return g;
}

inline std::string plot_script(const StudyConfig& cfg, const StudyResult& r,
                               const std::string& csv_name) {
  const std::string column = cfg.problem.id == "allencahn2d"
                                 ? "err_coll"
                                 : (cfg.order_reference == "exact" ? "err_exact" : "err_last");
  std::ostringstream guides;
  guides << "{";
  const auto g = guide_orders(cfg, r);
  bool first = true;
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (std::isnan(g[k])) continue;
    guides << (first ? "" : ", ") << k << ": " << detail::num(g[k], "%.4f");
    first = false;
  }
  guides << "}";
  std::ostringstream os;
  os << "#!/usr/bin/env python3\n"
     << "# Log-log error vs dt for preset " << cfg.name << ", one series per iteration k.\n"
     << "import csv, os, sys\n"
     << "import matplotlib\n"
     << "matplotlib.use('Agg')\n"
     << "import matplotlib.pyplot as plt\n\n"
     << "HERE = os.path.dirname(os.path.abspath(__file__))\n"
     << "CSV = os.path.join(HERE, '" << csv_name << "')\n"
     << "COLUMN = '" << column << "'\n"
     << "GUIDES = " << guides.str() << "  # expected order per k\n\n"
     << "series = {}\n"
     << "with open(CSV) as f:\n"
     << "    for row in csv.DictReader(f):\n"
     << "        err = float(row[COLUMN])\n"
     << "        if err != err or err <= 0.0:\n"
     << "            continue\n"
     << "        series.setdefault(int(row['k']), []).append((float(row['dt']), err))\n\n"
     << "fig, ax = plt.subplots(figsize=(6, 5))\n"
     << "for k, pts in sorted(series.items()):\n"
     << "    pts.sort(reverse=True)\n"
     << "    dts = [p[0] for p in pts]\n"
     << "    errs = [p[1] for p in pts]\n"
     << "    line, = ax.loglog(dts, errs, 'o', label=f'k={k}')\n"
     << "    if k in GUIDES:\n"
     << "        q = GUIDES[k]\n"
     << "        ax.loglog(dts, [errs[0] * (d / dts[0]) ** q for d in dts], '-',\n"
     << "                  color=line.get_color(), alpha=0.6)\n"
     << "ax.set_xlabel('dt')\n"
     << "ax.set_ylabel(COLUMN)\n"
     << "ax.set_title('" << cfg.name << "')\n"
     << "ax.legend(fontsize='small')\n"
     << "out = sys.argv[1] if len(sys.argv) > 1 else os.path.join(HERE, '" << cfg.name << ".png')\n"
     << "fig.savefig(out, dpi=120, bbox_inches='tight')\n"
     << "print(out)\n";
  return os.str();
}

struct RunOptions {
  std::filesystem::path out_dir = "mlsdc-out";
  int jobs = 1;
  bool plot = true;
};

struct RunOutcome {
  StudyResult result;
  std::vector<CheckOutcome> checks;
  bool all_pass = true;
  std::filesystem::path csv_path, summary_path, plot_path;
};

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + p.string() + "'");
  out << text;
}

/// Runs the study and writes CSV, summary and (optionally) the plot script.
inline RunOutcome run_and_write(const StudyConfig& cfg, const RunOptions& opt) {
  RunOutcome o;
  o.result = run_convergence_study(cfg.to_setup(opt.jobs));
  o.checks = evaluate_checks(cfg, o.result);
  for (const auto& c : o.checks) o.all_pass = o.all_pass && c.pass;
  std::filesystem::create_directories(opt.out_dir);
  o.csv_path = opt.out_dir / (cfg.name + ".csv");
  o.summary_path = opt.out_dir / (cfg.name + ".summary.json");
  write_file(o.csv_path, format_csv(o.result));
  write_file(o.summary_path, make_summary(cfg, o.result, o.checks).dump(2) + "\n");
  if (opt.plot) {
    o.plot_path = opt.out_dir / (cfg.name + "_plot.py");
    write_file(o.plot_path, plot_script(cfg, o.result, o.csv_path.filename().string()));
  }
  return o;
}

}  // namespace mlsdc::cli
