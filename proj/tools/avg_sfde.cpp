// avg_sfde: classify, evaluate, simulate and verify the averaged-feedback SFDE
//   dX = (a X + b/(1+t) int_{-1}^t X) dt + sigma dB.
//
// Exit codes: 0 success, 1 verification failure, 2 usage error, 3 numeric error.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "avgsfde/autocov.hpp"
#include "avgsfde/core.hpp"
#include "avgsfde/io.hpp"
#include "avgsfde/meanpath.hpp"
#include "avgsfde/montecarlo.hpp"
#include "avgsfde/resolvent.hpp"
#include "avgsfde/verify.hpp"

using namespace avgsfde;

namespace {

enum Exit { ok = 0, verification_failed = 1, usage = 2, numeric = 3 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ModelOpts {
  std::optional<double> a, b, alpha, beta;
  double sigma = 1.0;
  double psi0 = 1.0;
  double psi_int = 0.0;
};

struct RunOpts {
  ModelOpts model;
  std::string t_grid = "1:1000:log61";
  double t = 1.0;
  std::optional<double> t_max;
  double dt = 1.0 / 128.0;
  std::string delta = "1:1000:log31";
  std::size_t n_paths = 1;
  std::uint64_t seed = 1;
  std::uint64_t verify_seed = verify::Options{}.seed;
  std::string out;
  double tol = 1e-9;
  std::string suite = "all";
  std::string a_range = "-2:2:0.1";
  std::string b_range = "-2:2:0.1";
  std::string scheme = "euler";
  std::size_t stride = 0;
};

void add_model(CLI::App* sub, ModelOpts& m) {
  sub->add_option("--a", m.a, "drift coefficient a");
  sub->add_option("--b", m.b, "average-feedback coefficient b");
  sub->add_option("--alpha", m.alpha, "market parameter alpha (a = alpha + beta, b = -alpha)");
  sub->add_option("--beta", m.beta, "market parameter beta");
}

void add_history(CLI::App* sub, ModelOpts& m) {
  sub->add_option("--sigma", m.sigma, "noise intensity")->capture_default_str();
  sub->add_option("--psi0", m.psi0, "initial value psi(0)")->capture_default_str();
  sub->add_option("--psi-int", m.psi_int, "integral of psi over [-1, 0]")->capture_default_str();
}

Params resolve(const ModelOpts& m) {
  const bool ab = m.a || m.b, market = m.alpha || m.beta;
  if (ab && market) throw UsageError("give either --a/--b or --alpha/--beta, not both");
  Params p;
  if (market) {
    if (!m.alpha || !m.beta) throw UsageError("--alpha and --beta must be given together");
    std::tie(p.a, p.b) = market_to_ab(*m.alpha, *m.beta);
  } else {
    if (!m.a || !m.b) throw UsageError("model needs --a and --b (or --alpha and --beta)");
    p.a = *m.a;
    p.b = *m.b;
  }
  p.sigma = m.sigma;
  p.psi0 = m.psi0;
  p.psi_int = m.psi_int;
  p.validate();
  return p;
}

const char* behaviour(RegimeLabel l) {
  switch (l) {
    case RegimeLabel::RecurrentOU:
      return "recurrent: fluctuations of size sqrt(2 log t); X - U -> 0 for the Ornstein-Uhlenbeck process U on the same noise";
    case RegimeLabel::RecurrentShifted:
      return "recurrent: X - U converges to a Gaussian level L; the running average tends to L";
    case RegimeLabel::PolynomialGrowth: return "polynomial growth: X(t) / t^(-(1+b/a)) -> C, C Gaussian";
    case RegimeLabel::ExponentialGrowth: return "exponential growth: X(t) / (exp(a t) t^(b/a)) -> C, C Gaussian";
    case RegimeLabel::SubexponentialGrowth:
      return "subexponential growth: X(t) / (t^(-1/4) exp(2 sqrt(b t))) -> C, C Gaussian";
    case RegimeLabel::BrownianLike:
      return "Brownian-like: Var X(t) / t -> sigma^2/3, iterated-logarithm constant sigma/sqrt(3), mean -> 0";
    case RegimeLabel::DegenerateOU: return "b = 0: Ornstein-Uhlenbeck process";
    case RegimeLabel::DegenerateBM: return "a = b = 0: scaled Brownian motion";
    case RegimeLabel::DegenerateExp: return "b = 0: X(t) exp(-a t) converges almost surely";
  }
  return "";
}

bool near_degenerate(double a, double b, const Regime& r) {
  if (r.degenerate_integer || is_zero(a) || is_zero(b)) return false;
  const double q = b / a, n = std::round(q);
  return std::abs(q - n) <= 1e-6 && ((a < 0 && n >= 1) || (a > 0 && n <= -1));
}

void describe(io::Document& doc, const Params& p) {
  const Regime r = classify(p);
  const auto [alpha, beta] = ab_to_market(p.a, p.b);
  auto& s = doc.section("params");
  s.set("a", p.a).set("b", p.b).set("alpha", alpha).set("beta", beta);
  s.set("sigma", p.sigma).set("psi0", p.psi0).set("psi_int", p.psi_int);
  auto& g = doc.section("regime");
  g.set("label", to_string(r.label));
  g.set("degenerate_integer", r.degenerate_integer);
  if (r.degenerate_integer) g.set("integer_ratio", r.integer_ratio);
  g.set("near_degenerate", near_degenerate(p.a, p.b, r));
  g.set("recurrent", is_recurrent(r.label));
  g.set("growth", is_growth(r.label));
  g.set("behaviour", behaviour(r.label));
  g.set("normalizer", normalizer_formula(r.label));
  g.set("market_inverse", "alpha = -b, beta = a + b");
}

// Data stream and summary stream: data to --out when given (summary to stdout),
// otherwise data to stdout and summary to stderr.
struct Sinks {
  std::ofstream file;
  std::ostream* data = &std::cout;
  std::ostream* summary = &std::cerr;

  explicit Sinks(const std::string& out) {
    if (out.empty()) return;
    file.open(out);
    if (!file) throw UsageError("cannot write '" + out + "'");
    data = &file;
    summary = &std::cout;
  }
};

double normalizer_or_nan(const Regime& r, const Params& p, double t) {
  if (!has_normalizer(r.label)) return std::nan("");
  try {
    return growth_normalizer(r, p.a, p.b, t);
  } catch (const Error&) {
    return std::nan("");
  }
}

// ---------------------------------------------------------------------------

int cmd_classify(const RunOpts& o) {
  const Params p = resolve(o.model);
  io::Document doc{"classify", {}};
  describe(doc, p);
  Sinks sinks(o.out);
  io::write_document(*sinks.data, doc);
  return ok;
}

int cmd_mean(const RunOpts& o) {
  const Params p = resolve(o.model);
  const auto ts = io::parse_grid(o.t_grid);
  for (double t : ts)
    if (!(t >= 0.0)) throw UsageError("--t grid must be nonnegative");
  const MeanSolution sol = mean_solution(p);
  const Regime reg = sol.regime;
  Sinks sinks(o.out);
  {
    io::TableWriter w(*sinks.data, "mean", {"t", "x", "normalizer", "ratio"});
    for (double t : ts) {
      const double x = mean_eval(sol, t);
      const double n = normalizer_or_nan(reg, p, t);
      double ratio = std::nan("");
      if (std::isfinite(n)) ratio = normalized_mean(sol, t);
      w.row() << t << x << n << ratio;
    }
  }
  io::Document doc{"mean", {}};
  describe(doc, p);
  auto& c = doc.section("coefficients");
  c.set("cA", sol.cA.value()).set("cB", sol.cB.value());
  c.set("x0", mean_eval(sol, 0.0)).set("x_prime0", mean_derivative(sol, 0.0));
  if (sol.basis && sol.basis->near_degenerate) c.set("near_degenerate_branch", true);
  if (is_growth(reg.label) || reg.label == RegimeLabel::RecurrentShifted) {
    const LimitStats ls = limit_stats(p, std::min(o.tol, 1e-9));
    auto& l = doc.section("limit");
    l.set("variable", reg.label == RegimeLabel::RecurrentShifted ? "L" : "C");
    l.set("mean", ls.mean_C).set("variance", ls.var_C);
    l.set("truncation_T", ls.truncation_T).set("tail_fraction", ls.tail_fraction);
  }
  io::write_document(*sinks.summary, doc);
  return ok;
}

int cmd_acf(const RunOpts& o) {
  const Params p = resolve(o.model);
  const Regime reg = classify(p);
  if (!(p.a < 0.0) || p.a + p.b > tolerance::boundary)
    fail(ErrorKind::unsupported, std::string("acf needs a recurrent regime (a < 0, a + b <= 0); (a, b) is ") +
                                     std::string(to_string(reg.label)) + ": " + behaviour(reg.label));
  if (!(o.t >= 0.0)) throw UsageError("--t must be nonnegative");
  const auto deltas = io::parse_grid(o.delta);
  for (double d : deltas)
    if (!(d >= 0.0)) throw UsageError("--delta grid must be nonnegative");
  const Autocovariance acv(p, o.tol);
  const double expo = 1.0 + p.b / p.a;
  Sinks sinks(o.out);
  {
    io::TableWriter w(*sinks.data, "acf", {"delta", "cov", "scaled_cov", "limiting_acf"});
    for (double d : deltas) {
      const double c = acv.covariance(o.t, d);
      w.row() << d << c << c * std::pow(d, expo) << limiting_acf(p, d);
    }
  }
  io::Document doc{"acf", {}};
  describe(doc, p);
  auto& s = doc.section("acf");
  s.set("t", o.t).set("quad_tol", o.tol).set("decay_exponent", -expo);
  const double lo = deltas.front(), hi = deltas.back();
  auto& f = doc.section("decay_fit");
  if (is_zero(p.b)) {
    f.set("status", "skipped: b = 0 gives exponential decay");
  } else if (deltas.size() < 8 || !(lo > 0.0) || hi < 10.0 * lo) {
    f.set("status", "skipped: needs at least 8 lags spanning a decade");
  } else {
    try {
      const DecayFit fit = decay_fit(p, o.t, lo, hi, static_cast<int>(deltas.size()), o.tol);
      f.set("status", "ok");
      f.set("delta_min", lo).set("delta_max", hi);
      f.set("fitted_exponent", fit.fitted_exponent).set("theoretical_exponent", fit.theoretical_exponent);
      f.set("fitted_constant", fit.fitted_constant).set("c_t", fit.c_t_quadrature);
      f.set("residual_rms", fit.residual_rms).set("poor_linear_fit", fit.poor_linear_fit);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::sign_change) throw;
      f.set("status", e.what());
    }
  }
  io::write_document(*sinks.summary, doc);
  return ok;
}

void put_stats(io::Section& s, const std::string& prefix, const SampleStats& st) {
  s.set(prefix + "n", st.n);
  s.set(prefix + "mean", st.mean).set(prefix + "variance", st.variance).set(prefix + "std_error", st.std_error);
  s.set(prefix + "skewness", st.skewness).set(prefix + "excess_kurtosis", st.excess_kurtosis);
}

// Horizon used when --t-max is not given.
double default_t_max(RegimeLabel l) {
  switch (l) {
    case RegimeLabel::ExponentialGrowth:
    case RegimeLabel::DegenerateExp: return 30.0;
    case RegimeLabel::PolynomialGrowth: return 50.0;
    case RegimeLabel::SubexponentialGrowth: return 40.0;
    case RegimeLabel::DegenerateOU: return 100.0;
    default: return 1000.0;
  }
}

int cmd_simulate(const RunOpts& o) {
  const Params p = resolve(o.model);
  const Regime reg = classify(p);
  const double t_max = o.t_max.value_or(default_t_max(reg.label));
  if (!(t_max > 0.0) || !(o.dt > 0.0)) throw UsageError("--t-max and --dt must be positive");
  if (o.n_paths == 0) throw UsageError("--n-paths must be positive");
  if (o.scheme != "euler" && o.scheme != "exact") throw UsageError("--scheme is 'euler' or 'exact'");
  const std::size_t steps = em_steps(t_max, o.dt);
  const std::size_t stride = o.stride ? o.stride : std::max<std::size_t>(1, steps / 500);

  std::vector<Path> paths(o.n_paths);
  if (o.scheme == "euler") {
    parallel_for(o.n_paths, [&](std::size_t i) { paths[i] = simulate_em(p, t_max, o.dt, o.seed, i, {stride, false, false}); });
  } else {
    std::vector<double> times;
    for (std::size_t k = 0; k * stride < steps; ++k) times.push_back(double(k * stride) * o.dt);
    times.push_back(t_max);
    const ExactScheme ex(p, times);
    parallel_for(o.n_paths, [&](std::size_t i) { paths[i] = ex.sample(o.seed, i); });
  }

  Sinks sinks(o.out);
  {
    io::TableWriter w(*sinks.data, "simulate", {"path", "t", "x"});
    for (std::size_t i = 0; i < paths.size(); ++i)
      for (std::size_t k = 0; k < paths[i].times.size(); ++k) w.row() << i << paths[i].times[k] << paths[i].values[k];
  }

  io::Document doc{"simulate", {}};
  describe(doc, p);
  auto& run = doc.section("run");
  run.set("scheme", o.scheme).set("t_max", t_max).set("dt", o.dt).set("seed", std::to_string(o.seed));
  run.set("n_paths", o.n_paths).set("record_stride", stride);
  std::vector<double> fin;
  for (const auto& path : paths) fin.push_back(path.values.back());
  auto& e = doc.section("ensemble.final");
  put_stats(e, "", sample_stats(fin));
  e.set("expected_mean", mean_eval(mean_solution(p), t_max));

  if (is_growth(reg.label)) {
    const double n = growth_normalizer(reg, p.a, p.b, t_max);
    std::vector<double> ratio;
    for (double v : fin) ratio.push_back(v / n);
    auto& g = doc.section("ensemble.growth_ratio");
    put_stats(g, "", sample_stats(ratio));
    const LimitStats ls = limit_stats(p);
    g.set("expected_C", ls.mean_C).set("var_C", ls.var_C);
  }
  if (t_max >= 1e3 && (is_recurrent(reg.label) || reg.label == RegimeLabel::BrownianLike ||
                       reg.label == RegimeLabel::DegenerateBM)) {
    const LilMode mode = is_recurrent(reg.label) ? LilMode::recurrent : LilMode::brownian_like;
    double sup = -INFINITY, inf = INFINITY;
    for (const auto& path : paths) {
      const LilStat s = lil_statistic(path, mode);
      sup = std::max(sup, s.sup_stat);
      inf = std::min(inf, s.inf_stat);
    }
    auto& l = doc.section("ensemble.lil");
    l.set("mode", mode == LilMode::recurrent ? "recurrent" : "brownian_like");
    l.set("max_sup_stat", sup).set("min_inf_stat", inf);
    if (o.stride != 1) l.set("grid", "recorded points only; pass --stride 1 for every step");
  }
  io::write_document(*sinks.summary, doc);
  return ok;
}

int cmd_sweep(const RunOpts& o) {
  const auto as = io::parse_grid(o.a_range), bs = io::parse_grid(o.b_range);
  std::map<std::string, std::size_t> counts;
  std::size_t degenerate = 0;
  Sinks sinks(o.out);
  {
    io::TableWriter w(*sinks.data, "sweep", {"a", "b", "alpha", "beta", "regime", "degenerate_integer"});
    for (double a : as)
      for (double b : bs) {
        // Grid arithmetic leaves residue like 1e-17 on points meant to be 0.
        if (std::abs(a) < 1e-12) a = 0.0;
        if (std::abs(b) < 1e-12) b = 0.0;
        const Regime r = classify(a, b);
        const auto [alpha, beta] = ab_to_market(a, b);
        w.row() << a << b << alpha << beta << to_string(r.label) << (r.degenerate_integer ? "true" : "false");
        ++counts[std::string(to_string(r.label))];
        degenerate += r.degenerate_integer;
      }
  }
  io::Document doc{"sweep", {}};
  auto& g = doc.section("grid");
  g.set("a_range", o.a_range).set("b_range", o.b_range).set("a_points", as.size()).set("b_points", bs.size());
  auto& c = doc.section("counts");
  for (const auto& [k, v] : counts) c.set(k, v);
  c.set("degenerate_integer", degenerate);
  io::write_document(*sinks.summary, doc);
  return ok;
}

int cmd_verify(const RunOpts& o) {
  const auto ids = verify::suite(o.suite);
  verify::Options vo;
  vo.seed = o.verify_seed;
  vo.dt = o.dt;
  io::Document doc{"verify", {}};
  doc.section("suite").set("name", o.suite).set("seed", std::to_string(o.verify_seed)).set("dt", o.dt);
  int passed = 0;
  std::ostream& lines = o.out.empty() ? std::cerr : std::cout;
  for (int id : ids) {
    const verify::Result r = verify::run(id, vo);
    passed += r.passed;
    auto& s = doc.section("criterion." + std::to_string(id));
    s.set("title", r.title).set("passed", r.passed).set("seconds", r.seconds);
    if (!r.note.empty()) s.set("note", r.note);
    for (const auto& [k, v] : r.values) s.set(k, v);
    lines << (r.passed ? "PASS " : "FAIL ") << id << "  " << r.title << (r.note.empty() ? "" : "  (" + r.note + ")")
          << std::endl;
  }
  auto& sum = doc.section("summary");
  sum.set("total", ids.size()).set("passed", passed).set("failed", static_cast<int>(ids.size()) - passed);
  Sinks sinks(o.out);
  io::write_document(*sinks.data, doc);
  return passed == static_cast<int>(ids.size()) ? ok : verification_failed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Averaged-feedback stochastic functional differential equation toolkit"};
  app.set_config("--config", "", "configuration file: key = value lines, one [section] per subcommand");
  app.config_formatter(std::make_shared<CLI::ConfigINI>());
  app.require_subcommand(1, 1);

  RunOpts o;
  auto* classify_cmd = app.add_subcommand("classify", "regime, degeneracy and growth normalizer for (a, b)");
  auto* mean_cmd = app.add_subcommand("mean", "mean path x(t) with its growth normalizer (CSV)");
  auto* acf_cmd = app.add_subcommand("acf", "autocovariance over a lag grid at fixed t (CSV)");
  auto* sim_cmd = app.add_subcommand("simulate", "sample paths and ensemble statistics (CSV)");
  auto* sweep_cmd = app.add_subcommand("sweep", "regime labels over an (a, b) grid (CSV)");
  auto* verify_cmd = app.add_subcommand("verify", "run acceptance suites; exits 1 if any check fails");

  for (auto* s : {classify_cmd, mean_cmd, acf_cmd, sim_cmd}) add_model(s, o.model);
  for (auto* s : {mean_cmd, acf_cmd, sim_cmd}) add_history(s, o.model);
  for (auto* s : app.get_subcommands([](CLI::App*) { return true; })) {
    s->add_option("--out", o.out, "output file (default: stdout)");
    s->configurable();
  }
  mean_cmd->add_option("--t", o.t_grid, "time grid: value, lo:hi:step, lo:hi:logN or lo:hi:linN")->capture_default_str();
  mean_cmd->add_option("--tol", o.tol, "quadrature tolerance for limit constants")->capture_default_str();
  acf_cmd->add_option("--t", o.t, "start time t")->capture_default_str();
  acf_cmd->add_option("--delta", o.delta, "lag grid, e.g. 50:500:log16")->capture_default_str();
  acf_cmd->add_option("--tol", o.tol, "quadrature tolerance")->capture_default_str();
  sim_cmd->add_option("--t-max", o.t_max,
                     "horizon (default by regime: 30 exponential, 50 polynomial, 40 subexponential, 100 b = 0 with "
                     "a < 0, 1000 otherwise)");
  sim_cmd->add_option("--dt", o.dt, "Euler step; also the exact-scheme grid unit")->capture_default_str();
  sim_cmd->add_option("--n-paths", o.n_paths, "number of paths")->capture_default_str();
  sim_cmd->add_option("--seed", o.seed, "master seed")->capture_default_str();
  sim_cmd->add_option("--scheme", o.scheme, "euler or exact")->capture_default_str();
  sim_cmd->add_option("--stride", o.stride, "record every k-th step (default: about 500 points)");
  sweep_cmd->add_option("--a-range", o.a_range, "a grid")->capture_default_str();
  sweep_cmd->add_option("--b-range", o.b_range, "b grid")->capture_default_str();
  verify_cmd->add_option("--suite", o.suite, "specfun, resolvent, autocov, meanpath, montecarlo or all")
      ->capture_default_str();
  verify_cmd->add_option("--seed", o.verify_seed, "master seed for the Monte Carlo criteria")->capture_default_str();
  verify_cmd->add_option("--dt", o.dt, "Euler step for the Monte Carlo criteria")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return usage;
  }

  try {
    if (*classify_cmd) return cmd_classify(o);
    if (*mean_cmd) return cmd_mean(o);
    if (*acf_cmd) return cmd_acf(o);
    if (*sim_cmd) return cmd_simulate(o);
    if (*sweep_cmd) return cmd_sweep(o);
    if (*verify_cmd) return cmd_verify(o);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return usage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.kind() == ErrorKind::invalid_argument || e.kind() == ErrorKind::domain ? usage : numeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return numeric;
  }
  return usage;
}
