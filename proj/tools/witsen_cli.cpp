#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "witsen/bounds.hpp"
#include "witsen/lattice.hpp"
#include "witsen/scalar_exact.hpp"
#include "witsen/strategy_sim.hpp"
#include "witsen/sweep.hpp"
#include "witsen/verify.hpp"

using json = nlohmann::ordered_json;
using namespace witsen;

namespace {

constexpr int kOk = 0;
constexpr int kVerifyFailed = 1;
constexpr int kUsage = 2;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Flag values that may also come from a JSON config file. A flag given on
// the command line wins over the file.
struct Binding {
  CLI::App* command;
  CLI::Option* option;
  std::string key;
  std::function<void(const json&)> assign;
};

struct Settings {
  int m = 1;
  double k = 0.2;
  double sigma0 = 5.0;
  double xi = 0.0;  // 0: take it from the lattice
  std::string lattice = "grid";
  std::uint64_t seed = 1;
  std::int64_t n = 1000000;
  std::string out;
  std::string format;
  std::string config;
  double power = 0.0;
  std::string strategy = "lattice";
  std::string decoder;
  double delta = 0.0;
  double alpha = 0.0;
  double scale = 1.0;
  std::string suite = "all";
  std::string mode = "analytic";
  std::string optimize = "none";
  std::vector<double> k_range{-2.5, 1.0, 41};
  std::vector<double> sigma0_range{-1.0, 3.0, 41};
  int samples = 1000;
  unsigned threads = 0;
  bool free_L = false;
};

template <typename T>
void bind_flag(CLI::App* app, std::vector<Binding>& bindings, const std::string& key, T& target, const std::string& help) {
  CLI::Option* opt = app->add_option("--" + key, target, help);
  bindings.push_back({app, opt, key, [&target](const json& j) { target = j.get<T>(); }});
}

void apply_config(const Settings& s, const std::vector<Binding>& bindings) {
  if (s.config.empty()) return;
  std::ifstream in(s.config);
  if (!in) throw UsageError("cannot open config file " + s.config);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw UsageError(std::string("bad config file: ") + e.what());
  }
  if (!doc.is_object()) throw UsageError("config file must hold a JSON object");
  for (const auto& b : bindings) {
    if (!b.command->parsed() || b.option->count() > 0 || !doc.contains(b.key)) continue;
    try {
      b.assign(doc[b.key]);
    } catch (const json::exception& e) {
      throw UsageError("config key '" + b.key + "': " + e.what());
    }
  }
}

LatticeKind parse_lattice(const std::string& name) {
  if (name == "grid") return LatticeKind::IntegerGrid;
  if (name == "hex") return LatticeKind::HexagonalA2;
  throw UsageError("--lattice must be grid or hex");
}

double resolve_xi(const Settings& s) {
  if (s.xi > 0.0) return s.xi;
  return make_lattice(parse_lattice(s.lattice), s.m, 1.0).xi;
}

json bound_json(const BoundResult& r) {
  json j;
  j["value"] = r.value;
  j["P"] = r.p_star;
  j["branch"] = std::string(to_string(r.branch));
  if (r.sigma_g_sq) j["sigmaG_sq"] = *r.sigma_g_sq;
  if (r.truncation_L) j["L"] = *r.truncation_L;
  return j;
}

json params_json(const ProblemParams& p) { return {{"m", p.m}, {"k", p.k()}, {"sigma0", p.sigma0()}}; }

void emit(const Settings& s, const std::string& text) {
  if (s.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream file(s.out);
  if (!file) throw UsageError("cannot write " + s.out);
  file << text;
}

int cmd_bounds(const Settings& s) {
  const auto params = ProblemParams::from_k_sigma0(s.m, s.k, s.sigma0);
  const double xi = resolve_xi(s);
  const LowerBoundSearch search = s.free_L ? LowerBoundSearch::free_truncation() : LowerBoundSearch{};
  const BoundResult up1 = upper_thm1(params, xi);
  const BoundResult best = best_upper(params, xi);
  const BoundResult low2 = lower_thm2(params);
  const BoundResult low3 = lower_thm3(params, search);
  json j;
  j["params"] = params_json(params);
  j["xi"] = xi;
  j["upper_thm1"] = bound_json(up1);
  j["best_upper"] = bound_json(best);
  j["lower_thm2"] = bound_json(low2);
  j["lower_thm3"] = bound_json(low3);
  j["lower"] = low3.value;
  j["ratio"] = best.value / low3.value;
  emit(s, j.dump(2) + "\n");
  return kOk;
}

AxisRange parse_axis(const std::vector<double>& v, const char* name) {
  if (v.size() != 3) throw UsageError(std::string("--") + name + " takes lo hi n");
  return {v[0], v[1], static_cast<int>(v[2])};
}

Decoder parse_decoder(const std::string& name, double scale) {
  if (name == "mmse") return Decoder::mmse();
  if (name == "mle") return Decoder::mle();
  if (name == "scaled-mle") return Decoder::scaled_mle(scale);
  throw UsageError("decoder must be mmse, mle or scaled-mle");
}

int cmd_sweep(const Settings& s) {
  SweepGrid grid;
  grid.m = s.m;
  grid.lattice = parse_lattice(s.lattice);
  if (s.xi > 0.0) grid.xi = s.xi;
  grid.k = parse_axis(s.k_range, "k-range");
  grid.sigma0 = parse_axis(s.sigma0_range, "sigma0-range");
  SweepOptions options;
  if (s.mode == "analytic") {
    options.mode = SweepMode::AnalyticRatio;
  } else if (s.mode == "exact-scalar") {
    options.mode = SweepMode::ExactScalarRatio;
  } else {
    throw UsageError("--mode must be analytic or exact-scalar");
  }
  options.decoder = parse_decoder(s.decoder.empty() ? "mle" : s.decoder, s.scale);
  if (s.free_L) options.search = LowerBoundSearch::free_truncation();
  options.threads = s.threads;
  const SweepResult result = run_sweep(grid, options);

  std::ostringstream text;
  if (s.format.empty() || s.format == "csv") {
    write_sweep_csv(text, result);
  } else if (s.format == "json") {
    json rows = json::array();
    for (const auto& r : result.records) {
      rows.push_back({{"k", r.k},
                      {"sigma0", r.sigma0},
                      {"upper", bound_json(r.upper)},
                      {"lower", bound_json(r.lower)},
                      {"ratio", r.ratio},
                      {"status", r.status}});
    }
    json j{{"m", result.m}, {"xi", result.xi}, {"max_ratio", result.max_ratio}, {"flagged", result.n_flagged},
           {"records", rows}};
    text << j.dump(2) << "\n";
  } else {
    throw UsageError("--format must be csv or json");
  }
  emit(s, text.str());
  std::cerr << "max ratio " << result.max_ratio << " (" << result.n_flagged << " flagged points)\n";
  return kOk;
}

StrategyConfig build_strategy(const Settings& s, const ProblemParams& params) {
  StrategyConfig cfg;
  std::string decoder = s.decoder;
  if (s.strategy == "lattice") {
    const LatticeKind kind = parse_lattice(s.lattice);
    LatticeSpec lattice;
    if (s.power > 0.0) {
      lattice = lattice_for_power(kind, params.m, s.power);
    } else if (s.delta > 0.0) {
      lattice = make_lattice(kind, params.m, s.delta);
    } else {
      throw UsageError("lattice strategy needs --P or --delta");
    }
    cfg.gamma1 = LatticeQuantize{lattice};
    if (decoder.empty()) decoder = "packing-sphere";
  } else if (s.strategy == "slopey") {
    if (!(s.delta > 0.0)) throw UsageError("slopey strategy needs --delta");
    cfg.gamma1 = SlopeyMap{s.delta, s.alpha};
    if (decoder.empty()) decoder = "mmse";
  } else if (s.strategy == "zero-input") {
    cfg.gamma1 = ZeroInput{};
    if (decoder.empty()) decoder = "mmse";
  } else if (s.strategy == "zero-forcing") {
    cfg.gamma1 = ZeroForcing{};
    if (decoder.empty()) decoder = "mmse";
  } else {
    throw UsageError("--strategy must be lattice, slopey, zero-input or zero-forcing");
  }
  if (decoder == "packing-sphere") {
    cfg.gamma2 = PackingSphere{};
  } else if (decoder == "nearest" || decoder == "mle") {
    cfg.gamma2 = NearestLattice{};
  } else if (decoder == "scaled-mle") {
    cfg.gamma2 = ScaledMle{s.scale};
  } else if (decoder == "mmse") {
    cfg.gamma2 = Mmse{};
  } else if (decoder == "identity") {
    cfg.gamma2 = Identity{};
  } else {
    throw UsageError("--decoder must be packing-sphere, nearest, scaled-mle, mmse or identity");
  }
  return cfg;
}

int cmd_simulate(const Settings& s) {
  const auto params = ProblemParams::from_k_sigma0(s.m, s.k, s.sigma0);
  if (s.n < 1) throw UsageError("--n must be positive");
  const StrategyConfig cfg = build_strategy(s, params);
  try {
    cfg.validate(params.m);
  } catch (const InvalidStrategy& e) {
    throw UsageError(e.what());
  }
  SimulationOptions options;
  options.threads = s.threads;
  const CostEstimate est = simulate(params, cfg, s.n, s.seed, options);
  json j;
  j["params"] = params_json(params);
  j["strategy"] = s.strategy;
  j["seed"] = est.seed;
  j["n_samples"] = est.n_samples;
  j["j1"] = est.j1_mean;
  j["j2"] = est.j2_mean;
  j["total"] = est.total_mean;
  j["stderr"] = est.total_stderr;
  j["j1_stderr"] = est.j1_stderr;
  j["j2_stderr"] = est.j2_stderr;
  if (const auto* l = std::get_if<LatticeQuantize>(&cfg.gamma1); l && std::holds_alternative<PackingSphere>(cfg.gamma2)) {
    const double power = l->lattice.covering_radius * l->lattice.covering_radius / l->lattice.m;
    const double bound = upper_thm1_at_p(params, l->lattice.xi, power);
    j["P"] = power;
    j["analytic_bound"] = bound;
    j["within_bound"] = est.total_mean - 3.0 * est.total_stderr <= bound;
  }
  emit(s, j.dump(2) + "\n");
  return kOk;
}

int cmd_scalar_exact(const Settings& s) {
  const auto params = ProblemParams::from_k_sigma0(1, s.k, s.sigma0);
  const Decoder decoder = parse_decoder(s.decoder.empty() ? "mmse" : s.decoder, s.scale);
  ScalarOptimum result;
  if (s.optimize == "none") {
    if (!(s.delta > 0.0)) throw UsageError("--delta is required unless --optimize is given");
    result = evaluate_scalar(params, {s.delta, s.alpha, s.sigma0}, decoder);
  } else if (s.optimize == "pure") {
    result = optimize_scalar(params, ScalarFamily::PureQuant, decoder);
  } else if (s.optimize == "slopey") {
    result = optimize_scalar(params, ScalarFamily::Slopey, decoder);
  } else {
    throw UsageError("--optimize must be none, pure or slopey");
  }
  json j;
  j["params"] = params_json(params);
  j["decoder"] = std::string(to_string(decoder.kind));
  j["delta"] = result.strategy.delta;
  j["alpha"] = result.strategy.alpha;
  j["j1"] = result.j1;
  j["j2"] = result.j2;
  j["total"] = result.total;
  j["error_bound"] = result.error_bound;
  emit(s, j.dump(2) + "\n");
  return kOk;
}

int cmd_verify(const Settings& s) {
  const auto suite = parse_suite(s.suite);
  if (!suite) throw UsageError("--suite must be all, specfn, bounds, case-analysis or table1");
  VerifyOptions options;
  options.m = s.m;
  if (s.xi > 0.0) options.xi = s.xi;
  options.seed = s.seed;
  options.case_samples = s.samples;
  const auto checks = run_verification(*suite, options);
  json arr = json::array();
  bool ok = true;
  for (const auto& c : checks) {
    ok = ok && c.passed;
    std::cerr << (c.passed ? "PASS " : "FAIL ") << c.suite << '/' << c.name << ": " << c.detail << '\n';
    arr.push_back({{"suite", c.suite},
                   {"name", c.name},
                   {"passed", c.passed},
                   {"value", c.value},
                   {"target", c.target},
                   {"detail", c.detail}});
  }
  emit(s, json{{"passed", ok}, {"checks", arr}}.dump(2) + "\n");
  return ok ? kOk : kVerifyFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bounds, exact costs and simulations for the vector Witsenhausen problem"};
  app.require_subcommand(1);
  Settings s;
  std::vector<Binding> bindings;

  const auto common = [&](CLI::App* sub) {
    bind_flag(sub, bindings, "m", s.m, "dimension");
    bind_flag(sub, bindings, "xi", s.xi, "packing-covering ratio (default: from the lattice)");
    bind_flag(sub, bindings, "lattice", s.lattice, "grid or hex");
    bind_flag(sub, bindings, "seed", s.seed, "random seed");
    bind_flag(sub, bindings, "out", s.out, "write output to this path");
    bind_flag(sub, bindings, "format", s.format, "csv or json");
    bind_flag(sub, bindings, "threads", s.threads, "worker threads (0: hardware)");
    sub->add_option("--config", s.config, "JSON file of flag defaults");
  };
  const auto problem = [&](CLI::App* sub) {
    bind_flag(sub, bindings, "k", s.k, "input-cost weight k");
    bind_flag(sub, bindings, "sigma0", s.sigma0, "initial-state standard deviation");
  };

  CLI::App* bounds = app.add_subcommand("bounds", "upper and lower bounds at one point");
  common(bounds);
  problem(bounds);
  bounds->add_flag("--free-L", s.free_L, "optimize the truncation level of the lower bound");

  CLI::App* sweep = app.add_subcommand("sweep", "ratio surface over a (k, sigma0) grid");
  common(sweep);
  bind_flag(sweep, bindings, "mode", s.mode, "analytic or exact-scalar");
  bind_flag(sweep, bindings, "decoder", s.decoder, "decoder for exact-scalar: mle, mmse");
  sweep->add_option("--k-range", s.k_range, "log10 lo, log10 hi, points")->expected(3);
  sweep->add_option("--sigma0-range", s.sigma0_range, "log10 lo, log10 hi, points")->expected(3);
  sweep->add_flag("--free-L", s.free_L, "optimize the truncation level of the lower bound");

  CLI::App* simulate_cmd = app.add_subcommand("simulate", "Monte Carlo cost of a strategy");
  common(simulate_cmd);
  problem(simulate_cmd);
  bind_flag(simulate_cmd, bindings, "n", s.n, "samples");
  bind_flag(simulate_cmd, bindings, "P", s.power, "first-stage power; sets the lattice so r_c^2 = m P");
  bind_flag(simulate_cmd, bindings, "strategy", s.strategy, "lattice, slopey, zero-input, zero-forcing");
  bind_flag(simulate_cmd, bindings, "decoder", s.decoder, "packing-sphere, nearest, scaled-mle, mmse, identity");
  bind_flag(simulate_cmd, bindings, "delta", s.delta, "lattice or bin spacing");
  bind_flag(simulate_cmd, bindings, "alpha", s.alpha, "slope inside each bin");
  bind_flag(simulate_cmd, bindings, "scale", s.scale, "scaled-MLE factor");

  CLI::App* scalar = app.add_subcommand("scalar-exact", "exact scalar costs by quadrature");
  common(scalar);
  problem(scalar);
  bind_flag(scalar, bindings, "delta", s.delta, "bin width");
  bind_flag(scalar, bindings, "alpha", s.alpha, "slope inside each bin");
  bind_flag(scalar, bindings, "decoder", s.decoder, "mmse, mle or scaled-mle");
  bind_flag(scalar, bindings, "scale", s.scale, "scaled-MLE factor");
  bind_flag(scalar, bindings, "optimize", s.optimize, "none, pure or slopey");

  CLI::App* verify = app.add_subcommand("verify", "run verification suites");
  common(verify);
  bind_flag(verify, bindings, "suite", s.suite, "all, specfn, bounds, case-analysis, table1");
  bind_flag(verify, bindings, "samples", s.samples, "random points for the case analysis");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    apply_config(s, bindings);
    if (bounds->parsed()) return cmd_bounds(s);
    if (sweep->parsed()) return cmd_sweep(s);
    if (simulate_cmd->parsed()) return cmd_simulate(s);
    if (scalar->parsed()) return cmd_scalar_exact(s);
    if (verify->parsed()) return cmd_verify(s);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kVerifyFailed;
  }
  return kUsage;
}
