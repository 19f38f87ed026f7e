#include "coupledpf/rhee_glynn.hpp"

#include <cmath>
#include <limits>

#include "coupledpf/stats.hpp"

namespace coupledpf {

TestFunction parse_test_function(std::string_view id) {
  if (id == "mean-per-time") return TestFunction::mean_per_time;
  if (id == "second-moment-per-time") return TestFunction::second_moment_per_time;
  throw InvalidArgument("unknown test function '" + std::string(id) + "'");
}

std::string test_function_name(TestFunction h) {
  return h == TestFunction::mean_per_time ? "mean-per-time" : "second-moment-per-time";
}

namespace {

double apply(TestFunction h, double x) { return h == TestFunction::mean_per_time ? x : x * x; }

}  // namespace

std::vector<double> evaluate(TestFunction h, const Trajectory& path) {
  std::vector<double> out(static_cast<std::size_t>(path.path.size()));
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = apply(h, path.path.data()[i]);
  return out;
}

std::vector<double> rao_blackwell_average(TestFunction h, const FilterTrace& trace) {
  const std::size_t horizon = trace.horizon();
  const std::size_t n = trace.particles();
  detail::require(trace.ancestors.size() == horizon && !trace.degenerate,
                  "rao_blackwell_average: trace is incomplete");
  const auto d = static_cast<std::size_t>(trace.states.front().cols());
  std::vector<double> out((horizon + 1) * d, 0.0);
  std::vector<double> mass = trace.weights(horizon);
  std::vector<double> parent(n);
  for (std::size_t t = horizon + 1; t-- > 0;) {
    const Matrix& x = trace.states[t];
    for (std::size_t k = 0; k < n; ++k) {
      if (mass[k] == 0.0) continue;
      for (std::size_t j = 0; j < d; ++j) {
        out[t * d + j] += mass[k] * apply(h, x(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)));
      }
    }
    if (t == 0) break;
    std::fill(parent.begin(), parent.end(), 0.0);
    for (std::size_t k = 0; k < n; ++k) parent[trace.ancestors[t - 1][k]] += mass[k];
    mass.swap(parent);
  }
  return out;
}

double truncated_weight(const TruncationPolicy& policy, std::size_t n) {
  if (policy.kind != TruncationPolicy::Kind::geometric) return 1.0;
  detail::require(policy.p >= 0.0 && policy.p < 1.0, "geometric truncation: p must lie in [0, 1)");
  return std::pow(1.0 - policy.p, -static_cast<double>(n));
}

namespace {

constexpr std::uint64_t kTildeSweep = std::uint64_t{1} << 48;

void add_scaled(std::vector<double>& acc, const std::vector<double>& v, double c) {
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += c * v[i];
}

std::vector<double> difference(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

std::size_t draw_truncation(double p, const SeedKey& key) {
  if (p <= 0.0) return std::numeric_limits<std::size_t>::max();
  const double u = 1.0 - Stream(key.with_role(Role::truncation)).uniform();  // (0, 1]
  const double g = std::floor(std::log(u) / std::log1p(-p));
  return g >= 1e15 ? std::numeric_limits<std::size_t>::max() : static_cast<std::size_t>(g);
}

}  // namespace

RgEstimate rg_estimate(const Model& model, const Parameter& theta, const Observations& y,
                       const RgOptions& options, const SeedKey& key) {
  const std::size_t n_part = options.particles;
  detail::require(n_part >= 2, "rg_estimate: need at least two particles");
  detail::require(options.max_iterations >= 1, "rg_estimate: max_iterations must be >= 1");
  const auto kind = options.scheme.kind;
  if (kind == SchemeKind::transport || kind == SchemeKind::transport_symmetrized) {
    throw InvalidArgument("rg_estimate: transport couplings do not guarantee diagonal dominance; "
                          "use index-coupled");
  }
  const auto& policy = options.policy;
  if (policy.kind == TruncationPolicy::Kind::geometric) {
    detail::require(policy.p >= 0.0 && policy.p < 1.0, "geometric truncation: p must lie in [0, 1)");
  }
  const std::size_t m = policy.kind == TruncationPolicy::Kind::fixed_m ? policy.m : 0;
  const std::size_t horizon = y.horizon();

  RgEstimate est;
  std::size_t g_limit = std::numeric_limits<std::size_t>::max();
  if (policy.kind == TruncationPolicy::Kind::geometric) {
    g_limit = draw_truncation(policy.p, key);
    est.truncation = g_limit;
  }

  auto summarize = [&](const Trajectory& path, const FilterTrace& trace) {
    return options.rao_blackwell ? rao_blackwell_average(options.h, trace) : evaluate(options.h, path);
  };

  const SeedKey key0 = key.with_sweep(0);
  const SeedKey key0_tilde = key.with_sweep(kTildeSweep);
  const FilterTrace pf0 = bootstrap_pf(model, theta, y, n_part, key0);
  const FilterTrace pf0_tilde = bootstrap_pf(model, theta, y, n_part, key0_tilde);
  if (pf0.degenerate || pf0_tilde.degenerate) {
    throw NumericalError("rg_estimate: initial particle filter degenerated");
  }
  Trajectory x_prev = sample_trajectory(pf0, key0);
  Trajectory xt_prev = sample_trajectory(pf0_tilde, key0_tilde);
  std::vector<double> h_tilde_prev = summarize(xt_prev, pf0_tilde);

  const std::vector<double> h0 = summarize(x_prev, pf0);
  std::vector<double> acc(h0.size(), 0.0);
  std::vector<double> h_at_m = h0;
  if (policy.kind != TruncationPolicy::Kind::fixed_m) add_scaled(acc, h0, 1.0);

  bool met = false;
  for (std::size_t n = 1;; ++n) {
    const bool needed = (!met && n <= g_limit) || n <= m;
    if (!needed) break;
    if (n > options.max_iterations) {
      est.complete = false;
      est.h = {};
      est.cost_units = static_cast<std::uint64_t>(est.iterations_run) * n_part * horizon;
      return est;
    }
    const SeedKey kn = key.with_sweep(n);
    std::vector<double> delta;
    Trajectory x_new;
    if (met) {
      auto r = cpf(model, theta, y, n_part, x_prev, options.ancestor_sampling, kn);
      if (n == m) h_at_m = summarize(r.path, r.trace);
      x_new = std::move(r.path);
    } else if (n == 1) {
      auto r = cpf(model, theta, y, n_part, x_prev, options.ancestor_sampling, kn);
      const auto hx = summarize(r.path, r.trace);
      delta = difference(hx, h_tilde_prev);
      if (n == m) h_at_m = hx;
      x_new = std::move(r.path);
    } else {
      auto r = coupled_cpf(model, theta, y, n_part, x_prev, xt_prev, options.scheme,
                           options.ancestor_sampling, kn);
      const auto hx = summarize(r.first.path, r.first.trace);
      const auto hxt = summarize(r.second.path, r.second.trace);
      delta = difference(hx, hxt);
      if (n == m) h_at_m = hx;
      if (r.first.path == r.second.path) {
        met = true;
        est.tau = n;
      }
      xt_prev = std::move(r.second.path);
      x_new = std::move(r.first.path);
    }
    est.iterations_run = n;
    if (!delta.empty()) {
      if (policy.kind == TruncationPolicy::Kind::fixed_m) {
        if (n > m) add_scaled(acc, delta, 1.0);
      } else {
        add_scaled(acc, delta, truncated_weight(policy, n));
      }
    }
    x_prev = std::move(x_new);
  }
  if (policy.kind == TruncationPolicy::Kind::fixed_m) add_scaled(acc, h_at_m, 1.0);
  est.h = std::move(acc);
  est.complete = true;
  est.cost_units = static_cast<std::uint64_t>(est.iterations_run) * n_part * horizon;
  return est;
}

RgEstimate m_truncated_estimate(const Model& model, const Parameter& theta, const Observations& y,
                                RgOptions options, std::size_t m, const SeedKey& key) {
  options.policy = TruncationPolicy::fixed(m);
  return rg_estimate(model, theta, y, options, key);
}

RgSummary aggregate(const std::vector<RgEstimate>& estimates) {
  RgSummary s;
  std::vector<const RgEstimate*> done;
  for (const auto& e : estimates) {
    if (e.complete) {
      done.push_back(&e);
    } else {
      ++s.incomplete;
    }
  }
  s.complete = done.size();
  detail::require(done.size() >= 2, "aggregate: need at least two complete estimates");
  const std::size_t dim = done.front()->h.size();
  const double r = static_cast<double>(done.size());
  s.mean.assign(dim, 0.0);
  s.sd.assign(dim, 0.0);
  for (const auto* e : done) {
    detail::require_dims(e->h.size() == dim, "aggregate: estimates differ in length");
    for (std::size_t i = 0; i < dim; ++i) s.mean[i] += e->h[i];
  }
  for (auto& v : s.mean) v /= r;
  for (const auto* e : done) {
    for (std::size_t i = 0; i < dim; ++i) s.sd[i] += (e->h[i] - s.mean[i]) * (e->h[i] - s.mean[i]);
  }
  s.se.resize(dim);
  s.ci_low.resize(dim);
  s.ci_high.resize(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    s.sd[i] = std::sqrt(s.sd[i] / (r - 1.0));
    s.se[i] = s.sd[i] / std::sqrt(r);
    s.ci_low[i] = s.mean[i] - 2.0 * s.se[i];
    s.ci_high[i] = s.mean[i] + 2.0 * s.se[i];
  }
  std::vector<double> taus;
  for (const auto* e : done) {
    if (e->tau) {
      taus.push_back(static_cast<double>(*e->tau));
      s.tau_max = std::max(s.tau_max, *e->tau);
    }
  }
  if (!taus.empty()) s.tau_mean = stats::mean(taus);
  if (taus.size() >= 2) s.tau_sd = stats::sd(taus);
  return s;
}

}  // namespace coupledpf
