#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <numbers>
#include <optional>
#include <span>
#include <thread>
#include <vector>

#include "avgsfde/core.hpp"
#include "avgsfde/error.hpp"
#include "avgsfde/meanpath.hpp"
#include "avgsfde/quadrature.hpp"
#include "avgsfde/random.hpp"
#include "avgsfde/resolvent.hpp"

namespace avgsfde {

enum class Scheme { euler, exact };

inline const char* to_string(Scheme s) { return s == Scheme::euler ? "euler" : "exact"; }

struct Path {
  std::vector<double> times;
  std::vector<double> values;
  Scheme scheme = Scheme::euler;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  double dt = 0.0;  // Euler step; 0 for the exact scheme
  Params params;
};

struct Series {
  std::vector<double> times;
  std::vector<double> values;
};

struct Ensemble {
  Params params;
  std::vector<Path> paths;
};

// ---------------------------------------------------------------------------
// Reductions

// Pairwise (cascade) summation.
inline double pairwise_sum(std::span<const double> x) {
  if (x.size() <= 16) {
    double s = 0.0;
    for (double v : x) s += v;
    return s;
  }
  const std::size_t h = x.size() / 2;
  return pairwise_sum(x.first(h)) + pairwise_sum(x.subspan(h));
}

struct SampleStats {
  std::size_t n = 0;
  double mean = 0.0;
  double variance = 0.0;  // unbiased
  double std_error = 0.0;
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
};

inline SampleStats sample_stats(std::span<const double> x) {
  SampleStats s;
  s.n = x.size();
  if (s.n == 0) return s;
  s.mean = pairwise_sum(x) / s.n;
  std::vector<double> d2(s.n), d3(s.n), d4(s.n);
  for (std::size_t i = 0; i < s.n; ++i) {
    const double d = x[i] - s.mean;
    d2[i] = d * d;
    d3[i] = d2[i] * d;
    d4[i] = d2[i] * d2[i];
  }
  const double m2 = pairwise_sum(d2) / s.n;
  if (s.n > 1) s.variance = m2 * s.n / (s.n - 1.0);
  s.std_error = std::sqrt(s.variance / s.n);
  if (m2 > 0.0) {
    s.skewness = pairwise_sum(d3) / s.n / std::pow(m2, 1.5);
    s.excess_kurtosis = pairwise_sum(d4) / s.n / (m2 * m2) - 3.0;
  }
  return s;
}

// Worker count: AVGSFDE_THREADS if set, else the hardware concurrency.
inline unsigned default_threads() {
  if (const char* env = std::getenv("AVGSFDE_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

// Runs body(i) for i in [0, n) on `threads` workers with a static partition.
template <class Body>
void parallel_for(std::size_t n, Body&& body, unsigned threads = default_threads()) {
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(n, 1)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  std::exception_ptr error;
  std::mutex error_mutex;
  for (unsigned w = 0; w < threads; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < n; i += threads) body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

// ---------------------------------------------------------------------------
// Euler-Maruyama

struct EmOptions {
  std::size_t record_stride = 1;  // keep every k-th grid point (the last one is always kept)
  bool drift_only = false;        // sigma treated as 0
  bool negate_noise = false;      // use -Z for every increment
};

inline std::size_t em_steps(double t_max, double dt) {
  if (!(t_max > 0.0) || !(dt > 0.0)) fail(ErrorKind::invalid_argument, "simulate_em: t_max and dt must be positive");
  if (dt > t_max / 10.0 * (1.0 + 1e-12)) fail(ErrorKind::invalid_argument, "simulate_em: need dt <= t_max / 10");
  return static_cast<std::size_t>(std::llround(t_max / dt));
}

// Drives the scheme
//   X_{k+1} = X_k + (a X_k + b A_k / (1 + t_k)) dt + sigma sqrt(dt) Z_k,
//   A_{k+1} = A_k + dt (X_k + X_{k+1}) / 2,   A_0 = psi_int,
// calling observe(k, t_k, X_k, Z_{k-1}) at every grid point.
template <class Observe>
void run_em(const Params& p, double t_max, double dt, std::uint64_t seed, std::uint64_t stream, const EmOptions& opt,
            Observe&& observe) {
  p.validate();
  const std::size_t n = em_steps(t_max, dt);
  rng::NormalStream z(seed, stream);
  const double noise = opt.drift_only ? 0.0 : p.sigma * std::sqrt(dt) * (opt.negate_noise ? -1.0 : 1.0);
  double x = p.psi0, area = p.psi_int;
  observe(std::size_t{0}, 0.0, x, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = k * dt;
    const double zk = opt.drift_only ? 0.0 : z.next();
    const double x_new = x + (p.a * x + p.b * area / (1.0 + t)) * dt + noise * zk;
    area += 0.5 * dt * (x + x_new);
    x = x_new;
    observe(k + 1, (k + 1) * dt, x, opt.negate_noise ? -zk : zk);
  }
}

inline Path simulate_em(const Params& p, double t_max, double dt, std::uint64_t seed, std::uint64_t stream = 0,
                        const EmOptions& opt = {}) {
  Path path;
  path.scheme = Scheme::euler;
  path.seed = seed;
  path.stream = stream;
  path.dt = dt;
  path.params = p;
  const std::size_t n = em_steps(t_max, dt);
  const std::size_t stride = std::max<std::size_t>(1, opt.record_stride);
  path.times.reserve(n / stride + 2);
  path.values.reserve(n / stride + 2);
  run_em(p, t_max, dt, seed, stream, opt, [&](std::size_t k, double t, double x, double) {
    if (k % stride == 0 || k == n) {
      path.times.push_back(t);
      path.values.push_back(x);
    }
  });
  return path;
}

inline Ensemble simulate_ensemble(const Params& p, double t_max, double dt, std::uint64_t seed, std::size_t n_paths,
                                  const EmOptions& opt = {}) {
  Ensemble e;
  e.params = p;
  e.paths.resize(n_paths);
  parallel_for(n_paths, [&](std::size_t i) { e.paths[i] = simulate_em(p, t_max, dt, seed, i, opt); });
  return e;
}

// X(t_max) of every path without storing trajectories.
inline std::vector<double> ensemble_final_values(const Params& p, double t_max, double dt, std::uint64_t seed,
                                                 std::size_t n_paths, const EmOptions& opt = {}) {
  std::vector<double> out(n_paths);
  parallel_for(n_paths, [&](std::size_t i) {
    double last = 0.0;
    run_em(p, t_max, dt, seed, i, opt, [&](std::size_t, double, double x, double) { last = x; });
    out[i] = last;
  });
  return out;
}

// ---------------------------------------------------------------------------
// Exact-in-distribution sampling through X(t) = x(t) + sigma int_0^t r(t,s) dB(s)

class ExactScheme {
 public:
  ExactScheme(const Params& p, std::vector<double> times, double variance_tol = 5e-3, int max_depth = 12)
      : p_(p), times_(std::move(times)), mean_(mean_solution(p)), r_(p.a, p.b) {
    p.validate();
    if (times_.empty()) fail(ErrorKind::invalid_argument, "simulate_exact: empty time grid");
    if (!(times_.front() >= 0.0)) fail(ErrorKind::domain, "simulate_exact: times must be nonnegative");
    for (std::size_t i = 1; i < times_.size(); ++i)
      if (!(times_[i] > times_[i - 1])) fail(ErrorKind::invalid_argument, "simulate_exact: times must increase");
    for (double t : times_) means_.push_back(mean_eval(mean_, t));
    std::vector<double> target;
    for (double t : times_) target.push_back(t > 0.0 ? variance_quadrature(t) : 0.0);
    for (depth_ = 0; depth_ <= max_depth; ++depth_) {
      build(depth_);
      bool ok = true;
      for (std::size_t k = 0; k < times_.size() && ok; ++k) {
        if (target[k] == 0.0) continue;
        double v = 0.0;
        for (std::size_t j = 0; j < weights_[k].size(); ++j) v += weights_[k][j] * weights_[k][j] * ds_[j];
        v *= p_.sigma * p_.sigma;
        if (std::abs(v / target[k] - 1.0) > variance_tol) ok = false;
      }
      if (ok) return;
    }
    fail(ErrorKind::discretization, "simulate_exact: variance match not reached at maximal subdivision depth");
  }

  std::size_t increments() const { return ds_.size(); }
  int depth() const { return depth_; }
  const std::vector<double>& times() const { return times_; }

  // Brownian increments dB_j ~ N(0, ds_j) for one draw.
  std::vector<double> draw_increments(std::uint64_t seed, std::uint64_t stream) const {
    rng::NormalStream z(seed, stream);
    std::vector<double> db(ds_.size());
    for (std::size_t j = 0; j < db.size(); ++j) db[j] = std::sqrt(ds_[j]) * z.next();
    return db;
  }

  std::vector<double> values_from(const std::vector<double>& db) const {
    std::vector<double> x(times_.size());
    for (std::size_t k = 0; k < times_.size(); ++k) {
      double acc = 0.0;
      for (std::size_t j = 0; j < weights_[k].size(); ++j) acc += weights_[k][j] * db[j];
      x[k] = means_[k] + p_.sigma * acc;
    }
    return x;
  }

  Path sample(std::uint64_t seed, std::uint64_t stream = 0) const {
    Path path;
    path.scheme = Scheme::exact;
    path.seed = seed;
    path.stream = stream;
    path.params = p_;
    path.times = times_;
    path.values = values_from(draw_increments(seed, stream));
    return path;
  }

 private:
  double variance_quadrature(double t) const {
    const auto pt = r_.point(t);
    auto f = [&](double s) {
      const double v = Resolvent::combine_at(r_.slice(s), pt.A, pt.B).value();
      return v * v;
    };
    std::vector<double> extra;
    if (!r_.closed_form() && r_.basis().anchor > 0.0) extra.push_back(r_.basis().anchor);
    const double w = p_.a < 0.0 ? std::min(1.0, -1.0 / p_.a) : 1.0;
    return p_.sigma * p_.sigma * quad::integrate_split(f, quad::graded_cuts(0.0, t, w, extra), 1e-10).value;
  }

  void build(int depth) {
    mid_.clear();
    ds_.clear();
    const std::size_t m = std::size_t{1} << depth;
    double lo = 0.0;
    std::vector<std::size_t> end_index;
    for (double t : times_) {
      if (t > lo) {
        const double h = (t - lo) / m;
        for (std::size_t i = 0; i < m; ++i) {
          mid_.push_back(lo + (i + 0.5) * h);
          ds_.push_back(h);
        }
      }
      end_index.push_back(mid_.size());
      lo = t;
    }
    std::vector<ResolventSlice> slices;
    slices.reserve(mid_.size());
    for (double s : mid_) slices.push_back(r_.slice(s));
    weights_.assign(times_.size(), {});
    for (std::size_t k = 0; k < times_.size(); ++k) {
      const auto pt = r_.point(times_[k]);
      weights_[k].resize(end_index[k]);
      for (std::size_t j = 0; j < end_index[k]; ++j)
        weights_[k][j] = Resolvent::combine_at(slices[j], pt.A, pt.B).value();
    }
  }

  Params p_;
  std::vector<double> times_;
  MeanSolution mean_;
  Resolvent r_;
  std::vector<double> means_;
  std::vector<double> mid_, ds_;
  std::vector<std::vector<double>> weights_;
  int depth_ = 0;
};

inline Path simulate_exact(const Params& p, const std::vector<double>& times, std::uint64_t seed) {
  return ExactScheme(p, times).sample(seed);
}

// ---------------------------------------------------------------------------
// Path statistics

inline Series growth_ratio(const Path& path, const Regime& regime) {
  if (!is_growth(regime.label))
    fail(ErrorKind::unsupported, std::string("growth_ratio: not a growth regime (") +
                                     std::string(to_string(regime.label)) + ")");
  Series s;
  for (std::size_t i = 0; i < path.times.size(); ++i) {
    const double t = path.times[i];
    if (!(t > 0.0)) continue;
    const double ln = log_growth_normalizer(regime, path.params.a, path.params.b, t);
    s.times.push_back(t);
    s.values.push_back(path.values[i] * std::exp(-ln));
  }
  return s;
}

enum class LilMode { brownian_like, recurrent };

struct LilStat {
  double sup_stat = -std::numeric_limits<double>::infinity();
  double inf_stat = std::numeric_limits<double>::infinity();
};

inline double lil_start() { return 10.0 * std::exp(std::numbers::e); }

inline double lil_normalizer(LilMode mode, double t) {
  return mode == LilMode::brownian_like ? std::sqrt(2.0 * t * std::log(std::log(t))) : std::sqrt(2.0 * std::log(t));
}

// Running sup/inf of the normalized path, updated point by point.
struct LilAccumulator {
  LilMode mode;
  LilStat stat{};

  void add(double t, double x) {
    if (t < lil_start()) return;
    const double v = x / lil_normalizer(mode, t);
    stat.sup_stat = std::max(stat.sup_stat, v);
    stat.inf_stat = std::min(stat.inf_stat, v);
  }
};

inline LilStat lil_statistic(const Path& path, LilMode mode) {
  LilAccumulator acc{mode};
  for (std::size_t i = 0; i < path.times.size(); ++i) acc.add(path.times[i], path.values[i]);
  return acc.stat;
}

// LIL statistic of one Euler path without storing it.
inline LilStat lil_statistic_em(const Params& p, double t_max, double dt, std::uint64_t seed, std::uint64_t stream,
                                LilMode mode, const EmOptions& opt = {}) {
  LilAccumulator acc{mode};
  run_em(p, t_max, dt, seed, stream, opt, [&](std::size_t, double t, double x, double) { acc.add(t, x); });
  return acc.stat;
}

// (1+t)^{-1} (psi_int + int_0^t X), trapezoidal.
inline Series running_average(const Path& path) {
  Series s;
  double area = path.params.psi_int;
  for (std::size_t i = 0; i < path.times.size(); ++i) {
    if (i > 0) area += 0.5 * (path.times[i] - path.times[i - 1]) * (path.values[i] + path.values[i - 1]);
    s.times.push_back(path.times[i]);
    s.values.push_back(area / (1.0 + path.times[i]));
  }
  return s;
}

// X - U with U the Ornstein-Uhlenbeck process dU = aU dt + sigma dB, U(0) = 0, driven by the
// same increments; both advanced by Euler-Maruyama.
inline Series xu_difference(const Params& p, double t_max, double dt, std::uint64_t seed, std::uint64_t stream = 0,
                            std::size_t record_stride = 1, const EmOptions& base = {}) {
  if (!(p.a < 0.0) || p.a + p.b > tolerance::boundary)
    fail(ErrorKind::unsupported, "xu_difference: needs a < 0 and a + b <= 0");
  Series s;
  const std::size_t n = em_steps(t_max, dt);
  const double noise = base.drift_only ? 0.0 : p.sigma * std::sqrt(dt);
  const std::size_t stride = std::max<std::size_t>(1, record_stride);
  double u = 0.0;
  EmOptions opt = base;
  run_em(p, t_max, dt, seed, stream, opt, [&](std::size_t k, double t, double x, double z) {
    if (k > 0) u += p.a * u * dt + noise * z;
    if (k % stride == 0 || k == n) {
      s.times.push_back(t);
      s.values.push_back(x - u);
    }
  });
  return s;
}

// Final X(t_max) - U(t_max) of every path.
inline std::vector<double> ensemble_xu_final(const Params& p, double t_max, double dt, std::uint64_t seed,
                                             std::size_t n_paths) {
  if (!(p.a < 0.0) || p.a + p.b > tolerance::boundary)
    fail(ErrorKind::unsupported, "xu_difference: needs a < 0 and a + b <= 0");
  std::vector<double> out(n_paths);
  const double noise = p.sigma * std::sqrt(dt);
  parallel_for(n_paths, [&](std::size_t i) {
    double u = 0.0, last = 0.0;
    run_em(p, t_max, dt, seed, i, {}, [&](std::size_t k, double, double x, double z) {
      if (k > 0) u += p.a * u * dt + noise * z;
      last = x - u;
    });
    out[i] = last;
  });
  return out;
}

}  // namespace avgsfde
