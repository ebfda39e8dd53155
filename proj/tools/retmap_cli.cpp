// retmap: coefficients, verification sweeps and oracles for the first-return
// map of  X' = -Y,  Y' = X^3 - Y^3.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <future>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "retmap/retmap.hpp"

namespace {

using nlohmann::ordered_json;
using namespace retmap;

constexpr const char* kVersion = "0.1.0";

struct RunConfig {
  std::string command;
  int order = 6;
  int grid = 2048;
  std::string grid_kind = "uniform";
  std::vector<double> epsilon;
  std::string epsilon_range;
  double alpha = 0.05;
  double eta = 1.0;
  double delta = 0.1;
  std::vector<double> T{1.0};
  double tol = 1e-12;
  double quadrature_tol = 1e-10;
  int max_iter = 500;
  int samples = 11;
  std::string format = "json";
  std::string out;
};

// Thrown for bad configurations; maps to exit code 2 like DomainError.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

ordered_json num(double value, double error) { return ordered_json{{"value", value}, {"error", error}}; }

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// One table per command: the CSV form, and the rows reused by the JSON form.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row) { rows.push_back(std::move(row)); }
};

std::string to_csv(const Table& t) {
  std::ostringstream os;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << cells[i];
    os << '\n';
  };
  line(t.header);
  for (const auto& r : t.rows) line(r);
  return os.str();
}

struct Output {
  ordered_json data;
  Table table;
};

GridKind parse_grid_kind(const std::string& s) {
  if (s == "uniform") return GridKind::uniform;
  if (s == "chebyshev" || s == "chebyshev-lobatto") return GridKind::chebyshev_lobatto;
  throw ConfigError("unknown grid kind '" + s + "'");
}

std::vector<double> sweep_points(const RunConfig& cfg) {
  std::vector<double> eps = cfg.epsilon;
  if (!cfg.epsilon_range.empty()) {
    // start:stop:count, inclusive of both ends
    double a = 0.0, b = 0.0;
    int n = 0;
    char c1 = 0, c2 = 0;
    std::istringstream is(cfg.epsilon_range);
    if (!(is >> a >> c1 >> b >> c2 >> n) || c1 != ':' || c2 != ':' || n < 1 || (n == 1 && a != b)) {
      throw ConfigError("--epsilon-range expects start:stop:count, got '" + cfg.epsilon_range + "'");
    }
    for (int i = 0; i < n; ++i) eps.push_back(n == 1 ? a : a + (b - a) * i / (n - 1));
  }
  if (eps.empty()) eps = {0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45};
  for (double e : eps) {
    if (!(e > 0.0 && e <= 0.5)) throw ConfigError("epsilon values must lie in (0, 0.5], got " + fmt17(e));
  }
  return eps;
}

void validate(const RunConfig& cfg) {
  if (cfg.order < 1) throw ConfigError("--order must be at least 1");
  if (cfg.grid < Grid::kMinIntervals) throw ConfigError("--grid must be at least 64");
  if (!(cfg.tol > 0.0) || !(cfg.quadrature_tol > 0.0)) throw ConfigError("tolerances must be positive");
  if (cfg.max_iter < 1) throw ConfigError("--max-iter must be positive");
  if (cfg.samples < 2) throw ConfigError("--samples must be at least 2");
  parse_grid_kind(cfg.grid_kind);
}

// The grid error is reported rather than enforced, so coarse grids still run;
// meta.grid_converged records whether it met --quadrature-tol.
VSeries v_series(const RunConfig& cfg, int order, ordered_json& meta) {
  VSeriesOptions opts;
  opts.quadrature_tol = std::numeric_limits<double>::infinity();
  const auto vs = compute_v_series(order, Grid::make(cfg.grid, parse_grid_kind(cfg.grid_kind)), opts);
  const double worst = *std::max_element(vs.c_error.begin(), vs.c_error.end());
  meta["grid_error"] = worst;
  meta["grid_converged"] = worst <= cfg.quadrature_tol;
  return vs;
}

Output cmd_coeffs(const RunConfig& cfg, ordered_json& meta) {
  const auto vs = v_series(cfg, cfg.order, meta);
  const auto rm = full_turn_series(half_turn_series(vs, cfg.order), cfg.order);
  const auto rm_fine = full_turn_series(half_turn_series(std::span<const double>(vs.c_refined), cfg.order), cfg.order);
  Output out;
  out.table.header = {"n", "c_n", "c_n_error", "X_n", "X_n_error"};
  ordered_json rows = ordered_json::array();
  for (int n = 1; n <= cfg.order; ++n) {
    const auto i = static_cast<std::size_t>(n);
    const double x = rm.x_coeffs[i];
    const double x_err = std::abs(x - rm_fine.x_coeffs[i]);
    const double c = vs.c_n(n);
    const double c_err = vs.c_error[i - 1];
    rows.push_back({{"n", n}, {"c_n", num(c, c_err)}, {"X_n", num(x, x_err)}});
    out.table.add({std::to_string(n), fmt17(c), fmt17(c_err), fmt17(x), fmt17(x_err)});
  }
  out.data["coefficients"] = std::move(rows);
  return out;
}

struct SweepPoint {
  double epsilon;
  double oracle;
  double oracle_error;
};

// Compares against a second run one decade away in tolerance.
SweepPoint sweep_one(double eps, double tol) {
  const double ref_tol = tol > 1e-13 ? std::max(tol / 10.0, 1e-13) : tol * 10.0;
  const double x = integrate_original(eps, tol);
  return {eps, x, std::abs(x - integrate_original(eps, ref_tol))};
}

Output cmd_verify(const RunConfig& cfg, ordered_json& meta) {
  const auto eps = sweep_points(cfg);
  const int order = cfg.order;
  const auto vs = v_series(cfg, order, meta);
  const auto rm = full_turn_series(half_turn_series(vs, order), order);
  const auto rm_fine = full_turn_series(half_turn_series(std::span<const double>(vs.c_refined), order), order);

  std::vector<std::future<SweepPoint>> jobs;
  for (double e : eps) {
    jobs.push_back(std::async(std::launch::async, [e, tol = cfg.tol] {
      try {
        return sweep_one(e, tol);
      } catch (const IntegrationFailure& err) {
        throw IntegrationFailure(std::string(err.what()) + " (epsilon = " + fmt17(e) + ")");
      }
    }));
  }
  std::vector<SweepPoint> points;
  for (auto& j : jobs) points.push_back(j.get());  // input order

  Output out;
  out.table.header = {"epsilon", "oracle", "oracle_error"};
  for (int k = 0; k <= order; ++k) {
    out.table.header.push_back("partial_" + std::to_string(k));
    out.table.header.push_back("partial_" + std::to_string(k) + "_error");
    out.table.header.push_back("residual_" + std::to_string(k));
    out.table.header.push_back("residual_" + std::to_string(k) + "_error");
  }
  std::vector<std::vector<double>> residuals(static_cast<std::size_t>(order) + 1);
  ordered_json rows = ordered_json::array();
  for (const auto& p : points) {
    ordered_json row{{"epsilon", p.epsilon}, {"oracle", num(p.oracle, p.oracle_error)}};
    std::vector<std::string> cells{fmt17(p.epsilon), fmt17(p.oracle), fmt17(p.oracle_error)};
    ordered_json partials = ordered_json::array();
    ordered_json res = ordered_json::array();
    for (int k = 0; k <= order; ++k) {
      const double s = rm.x_partial_sum(p.epsilon, k);
      const double s_err = std::abs(s - rm_fine.x_partial_sum(p.epsilon, k));
      const double r = p.oracle - s;
      const double r_err = p.oracle_error + s_err;
      residuals[static_cast<std::size_t>(k)].push_back(r);
      partials.push_back(num(s, s_err));
      res.push_back(num(r, r_err));
      for (double v : {s, s_err, r, r_err}) cells.push_back(fmt17(v));
    }
    row["partial_sums"] = std::move(partials);
    row["residuals"] = std::move(res);
    rows.push_back(std::move(row));
    out.table.add(std::move(cells));
  }
  out.data["points"] = std::move(rows);

  ordered_json slopes = ordered_json::array();
  for (int k = 0; k <= order; ++k) {
    const auto& r = residuals[static_cast<std::size_t>(k)];
    const bool usable = eps.size() >= 2 && std::none_of(r.begin(), r.end(), [](double v) { return v == 0.0; });
    ordered_json entry{{"order", k}, {"expected", 3 * k + 4}};
    if (usable) {
      const auto fit = fit_power_law(eps, r);
      entry["slope"] = num(fit.exponent, fit.exponent_stderr);
    } else {
      entry["slope"] = nullptr;
    }
    slopes.push_back(std::move(entry));
  }
  out.data["slope_fits"] = std::move(slopes);
  return out;
}

Output cmd_fixedpoint(const RunConfig& cfg, ordered_json& meta) {
  FixedPointOptions opts;
  opts.tol = cfg.tol;
  opts.max_iter = cfg.max_iter;
  const auto grid = Grid::make(cfg.grid, parse_grid_kind(cfg.grid_kind));
  const auto r = solve_fixed_point(grid, cfg.delta, opts);
  // A posteriori bound on the distance to the discrete fixed point.
  const double q = r.contraction_estimate;
  const double iter_err = q < 1.0 ? r.final_step_norm * q / (1.0 - q) : r.final_step_norm;
  meta["ball_radius"] = opts.ball_radius;
  Output out;
  out.data["delta"] = cfg.delta;
  out.data["iterations"] = r.iterations;
  out.data["final_step_norm"] = r.final_step_norm;
  out.data["contraction_estimate"] = num(q, 0.0);
  out.data["contraction_bound"] = 1.5 * std::abs(cfg.delta) * std::sqrt(4.0 + opts.ball_radius) / 5.0;
  out.table.header = {"xi", "v", "v_error"};
  ordered_json samples = ordered_json::array();
  for (int i = 0; i < cfg.samples; ++i) {
    const double xi = static_cast<double>(i) / (cfg.samples - 1);
    const double v = r.solution(xi);
    samples.push_back({{"xi", xi}, {"v", num(v, iter_err)}});
    out.table.add({fmt17(xi), fmt17(v), fmt17(iter_err)});
  }
  out.data["samples"] = std::move(samples);
  return out;
}

Output cmd_melnikov(const RunConfig& cfg, ordered_json& meta) {
  const auto vs = v_series(cfg, 1, meta);
  const double c1 = vs.c_n(1);
  const double c1_err = vs.c_error[0];
  Output out;
  out.table.header = {"T", "closed_form", "closed_form_error", "quadrature", "quadrature_error", "difference"};
  ordered_json rows = ordered_json::array();
  for (double T : cfg.T) {
    double q_err = 0.0;
    const double closed = melnikov(T, c1);
    const double closed_err = 8.0 * c1_err * std::pow(T, 1.75);
    const double quad = melnikov_quadrature(T, &q_err);
    rows.push_back({{"T", T},
                    {"closed_form", num(closed, closed_err)},
                    {"quadrature", num(quad, q_err)},
                    {"difference", num(closed - quad, closed_err + q_err)}});
    out.table.add({fmt17(T), fmt17(closed), fmt17(closed_err), fmt17(quad), fmt17(q_err), fmt17(closed - quad)});
  }
  out.data["melnikov"] = std::move(rows);
  return out;
}

Output cmd_trace(const RunConfig& cfg, ordered_json&) {
  const double ref_tol = cfg.tol > 1e-13 ? std::max(cfg.tol / 10.0, 1e-13) : cfg.tol * 10.0;
  const auto tr = integrate_normalized(cfg.eta, cfg.alpha, cfg.tol);
  const auto ref = integrate_normalized(cfg.eta, cfg.alpha, ref_tol);
  Output out;
  out.table.header = {"kind", "index", "axis", "t", "t_error", "x", "x_error", "y", "y_error"};
  ordered_json events = ordered_json::array();
  for (std::size_t i = 0; i < tr.events.size(); ++i) {
    const auto& e = tr.events[i];
    const auto& f = ref.events[i];
    const State s = tr.at(e.time);
    const State sr = ref.at(f.time);
    const double t_err = std::abs(e.time - f.time);
    const double x_err = std::abs(s.x - sr.x);
    const double y_err = std::abs(s.y - sr.y);
    events.push_back({{"index", e.index},
                      {"axis", to_string(e.axis)},
                      {"value", num(e.value, std::abs(e.value - f.value))},
                      {"time", num(e.time, t_err)},
                      {"x", num(s.x, x_err)},
                      {"y", num(s.y, y_err)}});
    out.table.add({"event", std::to_string(e.index), to_string(e.axis), fmt17(e.time), fmt17(t_err), fmt17(s.x),
                   fmt17(x_err), fmt17(s.y), fmt17(y_err)});
  }
  const double t_end = std::min(tr.last_event().time, ref.last_event().time);
  ordered_json samples = ordered_json::array();
  for (int i = 0; i < cfg.samples; ++i) {
    const double t = t_end * i / (cfg.samples - 1);
    const State s = tr.at(t);
    const State sr = ref.at(t);
    const double x_err = std::abs(s.x - sr.x);
    const double y_err = std::abs(s.y - sr.y);
    samples.push_back({{"t", t}, {"x", num(s.x, x_err)}, {"y", num(s.y, y_err)}});
    out.table.add({"sample", std::to_string(i), "", fmt17(t), "0", fmt17(s.x), fmt17(x_err), fmt17(s.y), fmt17(y_err)});
  }
  const auto lyap = lyapunov_audit(tr, 10.0 * cfg.tol);
  out.data["events"] = std::move(events);
  out.data["samples"] = std::move(samples);
  out.data["lyapunov"] = {{"start", num(lyap.l_start, 0.0)},
                          {"end", num(lyap.l_end, lyap.max_violation)},
                          {"monotone", lyap.monotone}};
  out.data["steps"] = tr.stats.accepted;
  return out;
}

ordered_json config_json(const RunConfig& cfg) {
  return {{"order", cfg.order}, {"grid", cfg.grid},    {"grid_kind", cfg.grid_kind},
          {"alpha", cfg.alpha}, {"eta", cfg.eta},      {"delta", cfg.delta},
          {"T", cfg.T},         {"tol", cfg.tol},      {"quadrature_tol", cfg.quadrature_tol},
          {"max_iter", cfg.max_iter}, {"samples", cfg.samples}, {"epsilon", cfg.epsilon},
          {"epsilon_range", cfg.epsilon_range}, {"format", cfg.format}};
}

int run(const RunConfig& cfg) {
  validate(cfg);
  ordered_json meta{{"tool", "retmap"}, {"version", kVersion}, {"command", cfg.command}, {"config", config_json(cfg)}};
  Output out;
  if (cfg.command == "coeffs") out = cmd_coeffs(cfg, meta);
  else if (cfg.command == "verify") out = cmd_verify(cfg, meta);
  else if (cfg.command == "fixedpoint") out = cmd_fixedpoint(cfg, meta);
  else if (cfg.command == "melnikov") out = cmd_melnikov(cfg, meta);
  else if (cfg.command == "trace") out = cmd_trace(cfg, meta);
  else throw ConfigError("unknown command " + cfg.command);

  std::string text;
  if (cfg.format == "csv") {
    text = to_csv(out.table);
  } else {
    ordered_json doc{{"meta", std::move(meta)}, {"data", std::move(out.data)}};
    text = doc.dump(2) + "\n";
  }
  if (cfg.out.empty() || cfg.out == "-") {
    std::cout << text;
  } else {
    std::ofstream f(cfg.out, std::ios::binary);
    if (!f) throw ConfigError("cannot open output file " + cfg.out);
    f << text;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"First-return map of X' = -Y, Y' = X^3 - Y^3: series coefficients and oracles"};
  app.set_version_flag("--version", kVersion);
  app.fallthrough();  // subcommands see the shared options below
  app.require_subcommand(1);
  app.set_config("--config", "", "flat key = value file; command-line flags take precedence");

  RunConfig cfg;
  app.add_option("--order", cfg.order, "series order N")->capture_default_str();
  app.add_option("--grid", cfg.grid, "grid intervals M")->capture_default_str();
  app.add_option("--grid-kind", cfg.grid_kind, "uniform | chebyshev")->capture_default_str();
  app.add_option("--epsilon", cfg.epsilon, "epsilon values for verify");
  app.add_option("--epsilon-range", cfg.epsilon_range, "start:stop:count for verify");
  app.add_option("--alpha", cfg.alpha, "damping alpha for trace")->capture_default_str();
  app.add_option("--eta", cfg.eta, "starting point eta for trace")->capture_default_str();
  app.add_option("--delta", cfg.delta, "delta for fixedpoint")->capture_default_str();
  app.add_option("--T", cfg.T, "energy levels for melnikov")->capture_default_str();
  app.add_option("--tol", cfg.tol, "ODE / fixed-point tolerance")->capture_default_str();
  app.add_option("--quadrature-tol", cfg.quadrature_tol, "grid error target for c_n")->capture_default_str();
  app.add_option("--max-iter", cfg.max_iter, "fixed-point iteration cap")->capture_default_str();
  app.add_option("--samples", cfg.samples, "output samples (fixedpoint, trace)")->capture_default_str();
  app.add_option("--format", cfg.format, "json | csv")
      ->check(CLI::IsMember({"json", "csv"}))
      ->capture_default_str();
  app.add_option("--out", cfg.out, "output file (default stdout)");

  for (const char* name : {"coeffs", "verify", "fixedpoint", "melnikov", "trace"}) {
    app.add_subcommand(name, "")->callback([&cfg, name] { cfg.command = name; });
  }
  app.get_subcommand("coeffs")->description("c_n and X_n with grid error estimates");
  app.get_subcommand("verify")->description("ODE oracle against series partial sums over an epsilon sweep");
  app.get_subcommand("fixedpoint")->description("Picard iteration for v at one delta");
  app.get_subcommand("melnikov")->description("closed-form and quadrature Melnikov integral");
  app.get_subcommand("trace")->description("one rotation of the normalized system");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    return run(cfg);
  } catch (const ConfigError& e) {
    std::cerr << "retmap: config error: " << e.what() << '\n';
    return 2;
  } catch (const DomainError& e) {
    std::cerr << "retmap: invalid input: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "retmap: numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "retmap: numerical failure: " << e.what() << '\n';
    return 3;
  }
}
