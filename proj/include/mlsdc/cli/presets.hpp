#pragma once

#include "mlsdc/cli/config.hpp"

#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace mlsdc::cli {

namespace detail {

/// base * 2^-first .. base * 2^-last
inline std::vector<double> halvings(double base, int first, int last) {
  std::vector<double> dt;
  for (int j = first; j <= last; ++j) dt.push_back(std::ldexp(base, -j));
  return dt;
}

inline std::vector<ExpectedCheck> band(const std::string& metric, std::vector<int> ks,
                                       double expected, double tol) {
  std::vector<ExpectedCheck> out;
  for (int k : ks) out.push_back({metric, k, "band", expected, tol});
  return out;
}

inline std::vector<ExpectedCheck> at_most(const std::string& metric, std::vector<int> ks,
                                          double bound) {
  std::vector<ExpectedCheck> out;
  for (int k : ks) out.push_back({metric, k, "at_most", bound, 0.0});
  return out;
}

// order(k) = a k + b within tol
inline std::vector<ExpectedCheck> linear_orders(std::vector<int> ks, double a, double b, double tol) {
  std::vector<ExpectedCheck> out;
  for (int k : ks) out.push_back({"order", k, "band", a * k + b, tol});
  return out;
}

inline StudyConfig heat_base() {
  StudyConfig c;
  c.problem = {"heat1d", 0.1, 4};
  c.M = c.M_H = 5;
  c.N_h = c.N_H = 255;
  c.dt = halvings(0.2, 1, 6);
  c.k_max = 5;
  c.collocation_tol = 1e-10;
  return c;
}

inline StudyConfig heat_mlsdc(int N_h, int N_H, int p) {
  StudyConfig c = heat_base();
  c.method = "MLSDC";
  c.N_h = N_h;
  c.N_H = N_H;
  c.p = p;
  return c;
}

inline StudyConfig allencahn_base(int N) {
  StudyConfig c;
  c.problem.id = "allencahn2d";
  c.problem.eps = 0.2;
  c.problem.kappa = 4;
  c.M = c.M_H = 3;
  c.N_h = c.N_H = N;
  c.dt = halvings(0.1, 1, 6);
  c.k_max = 4;
  c.collocation_tol = 1e-10;
  return c;
}

inline StudyConfig allencahn_mlsdc(int N, int p) {
  StudyConfig c = allencahn_base(N);
  c.method = "MLSDC";
  c.N_H = N / 2;
  c.p = p;
  return c;
}

inline StudyConfig auzinger_base(double base) {
  StudyConfig c;
  c.problem.id = "auzinger";
  c.M = c.M_H = 8;
  c.dt = halvings(base, 0, 3);
  c.k_max = 4;
  c.t_end = 1.0;
  c.order_reference = "last_node";
  c.node_tol = 5e-15;
  c.collocation_tol = 1e-14;
  return c;
}

inline StudyConfig auzinger_mlsdc(double base, int M_H) {
  StudyConfig c = auzinger_base(base);
  c.method = "MLSDC";
  c.M_H = M_H;
  c.p = M_H;
  return c;
}

inline StudyConfig named(StudyConfig c, std::string name, std::string figure, std::string note) {
  c.name = std::move(name);
  c.figure = std::move(figure);
  c.note = std::move(note);
  return c;
}

inline StudyConfig with_random(StudyConfig c) {
  c.guess = "random";
  c.seed = 20240601;
  return c;
}

inline StudyConfig with_checks(StudyConfig c, std::vector<ExpectedCheck> checks) {
  for (auto& ch : checks) c.checks.push_back(ch);
  return c;
}

inline std::map<std::string, StudyConfig> build_presets() {
  std::map<std::string, StudyConfig> p;
  auto add = [&](StudyConfig c) { p[c.name] = std::move(c); };

  // heat: N = 255, M = 5, kappa = 4, nu = 0.1, single step, dt = 0.1 .. 0.1/32
  add(with_checks(named(heat_base(), "heat-fig1a", "1a", "SDC, spread initial guess"),
                  [] {
                    auto v = band("gain", {1, 2, 3, 4}, 1.0, 0.4);
                    auto w = band("contraction", {2, 3, 4}, 1.0, 0.4);
                    v.insert(v.end(), w.begin(), w.end());
                    return v;
                  }()));
  add(with_checks(named(with_random(heat_base()), "heat-fig1b", "1b", "SDC, random initial guess"),
                  at_most("contraction", {2, 3}, 1.4)));
  add(with_checks(named(heat_mlsdc(255, 127, 8), "heat-fig1c", "1c",
                        "MLSDC, N_h=255/N_H=127, p=8, spread initial guess"),
                  band("contraction", {2, 3}, 2.0, 0.5)));
  add(with_checks(named(heat_mlsdc(15, 7, 6), "heat-fig1d", "1d",
                        "MLSDC, coarse grids dx_h=1/16, dx_H=1/8 (p=6, largest even order <= N_H)"),
                  at_most("contraction", {2, 3}, 1.5)));
  {
    StudyConfig c = heat_mlsdc(255, 127, 4);
    c.dt = halvings(0.02, 1, 6);
    add(with_checks(named(c, "heat-fig1e", "1e", "MLSDC, p=4, smaller step sizes"),
                    at_most("contraction", {2, 3}, 1.5)));
  }
  add(with_checks(named(with_random(heat_mlsdc(255, 127, 8)), "heat-fig1f", "1f",
                        "MLSDC, random initial guess"),
                  at_most("contraction", {2, 3}, 1.5)));

  // Allen-Cahn: eps = 0.2, kappa = 4, M = 3, single step, dt = 0.05 .. 0.05/32
  struct AcGrid {
    std::string suffix;
    int good;
    int small;
    std::string tag;
  };
  for (const AcGrid& g : {AcGrid{"", 128, 32, ""}, AcGrid{"-ds", 64, 16, " (downscaled grids)"}}) {
    const std::string n = std::to_string(g.good), nh = std::to_string(g.good / 2);
    add(with_checks(named(allencahn_base(g.good), "allencahn-fig2a" + g.suffix, "2a",
                          "SDC, N=" + n + ", spread initial guess" + g.tag),
                    band("contraction", {2}, 1.0, 0.4)));
    add(with_checks(named(with_random(allencahn_base(g.good)), "allencahn-fig2b" + g.suffix, "2b",
                          "SDC, N=" + n + ", random initial guess" + g.tag),
                    at_most("contraction", {2}, 1.5)));
    add(with_checks(named(allencahn_mlsdc(g.good, 8), "allencahn-fig2c" + g.suffix, "2c",
                          "MLSDC, N_h=" + n + "/N_H=" + nh + ", p=8, spread initial guess" + g.tag),
                    band("contraction", {2}, 2.0, 0.5)));
    add(with_checks(named(allencahn_mlsdc(g.small, 8), "allencahn-fig2d" + g.suffix, "2d",
                          "MLSDC, N_h=" + std::to_string(g.small) + "/N_H=" +
                              std::to_string(g.small / 2) + ", p=8" + g.tag),
                    at_most("contraction", {2}, 1.5)));
    add(with_checks(named(allencahn_mlsdc(g.good, 2), "allencahn-fig2e" + g.suffix, "2e",
                          "MLSDC, p=2" + g.tag),
                    at_most("contraction", {2}, 1.5)));
    add(with_checks(named(with_random(allencahn_mlsdc(g.good, 8)), "allencahn-fig2f" + g.suffix, "2f",
                          "MLSDC, random initial guess" + g.tag),
                    at_most("contraction", {2}, 1.5)));
  }
  {
    StudyConfig alias = p.at("allencahn-fig2c");
    alias.name = "allencahn-fig2-good";
    add(alias);
  }

  // Auzinger: M_h=8, t_end = 1, error at t_end
  const std::string auz = "λ=-0.75, ρ=3, M_h=8";
  add(with_checks(named(auzinger_base(0.125), "auzinger-fig3a", "3a", "SDC, " + auz + ", dt 2^-3..2^-6"),
                  linear_orders({1, 2, 3}, 1.0, 0.0, 0.6)));
  add(with_checks(named(with_random(auzinger_base(0.125)), "auzinger-fig3b", "3b",
                        "SDC, " + auz + ", random initial guess"),
                  linear_orders({2, 3}, 1.0, -1.0, 0.6)));
  add(with_checks(named(auzinger_mlsdc(0.125, 6), "auzinger-fig3c", "3c",
                        "MLSDC, " + auz + ", M_H=6=p (M_H inferred), dt 2^-3..2^-6"),
                  linear_orders({1, 2, 3}, 2.0, 0.0, 0.6)));
  add(with_checks(named(auzinger_mlsdc(0.5, 6), "auzinger-fig3d", "3d",
                        "MLSDC, " + auz + ", M_H=6, larger steps dt 2^-1..2^-4"),
                  [] {
                    std::vector<ExpectedCheck> v;
                    for (int k : {2, 3}) v.push_back({"order", k, "at_most", 2.0 * k - 0.3, 0.0});
                    return v;
                  }()));
  add(with_checks(named(auzinger_mlsdc(0.125, 2), "auzinger-fig3e", "3e",
                        "MLSDC, " + auz + ", p=M_H=2"),
                  linear_orders({1, 2, 3}, 1.0, 1.0, 0.6)));
  add(with_checks(named(with_random(auzinger_mlsdc(0.125, 6)), "auzinger-fig3f", "3f",
                        "MLSDC, " + auz + ", M_H=6, random initial guess"),
                  linear_orders({2, 3}, 1.0, -1.0, 0.6)));
  return p;
}

}  // namespace detail

inline const std::map<std::string, StudyConfig>& presets() {
  static const std::map<std::string, StudyConfig> table = detail::build_presets();
  return table;
}

inline const StudyConfig& find_preset(const std::string& name) {
  const auto& t = presets();
  const auto it = t.find(name);
  if (it == t.end()) throw ConfigError("unknown preset '" + name + "' (see `list`)");
  return it->second;
}

}  // namespace mlsdc::cli
