#include "coupledpf/harness.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <optional>
#include <random>
#include <sstream>

#include <json.hpp>

#include "coupledpf/inference.hpp"
#include "coupledpf/io.hpp"
#include "coupledpf/oracle.hpp"
#include "coupledpf/rhee_glynn.hpp"
#include "coupledpf/stats.hpp"

namespace coupledpf::harness {

using nlohmann::json;

namespace {

std::string join(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + io::format_double(v[i]);
  return out;
}

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + v[i];
  return out;
}

std::uint64_t parse_uint(std::string_view key, std::string_view value) {
  const std::string v(value);
  std::size_t used = 0;
  unsigned long long out = 0;
  try {
    out = std::stoull(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (v.empty() || used != v.size() || v[0] == '-') {
    throw InvalidArgument("config field '" + std::string(key) + "': expected a non-negative integer, got '" + v + "'");
  }
  return out;
}

double parse_real(std::string_view key, std::string_view value) {
  try {
    const auto v = io::parse_doubles(value);
    if (v.size() == 1) return v[0];
  } catch (const InvalidArgument&) {
  }
  throw InvalidArgument("config field '" + std::string(key) + "': expected a number, got '" + std::string(value) + "'");
}

std::vector<double> parse_reals(std::string_view key, std::string_view value) {
  try {
    return io::parse_doubles(value);
  } catch (const InvalidArgument& e) {
    throw InvalidArgument("config field '" + std::string(key) + "': " + e.what());
  }
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "1" || value == "true" || value == "yes" || value == "on") return true;
  if (value == "0" || value == "false" || value == "no" || value == "off") return false;
  throw InvalidArgument("config field '" + std::string(key) + "': expected a boolean, got '" + std::string(value) + "'");
}

std::vector<std::string> split_names(std::string_view value) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : value) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (c != ' ' && c != '\t') {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::string with_provenance(const ExperimentConfig& c, const std::string& body) {
  return io::provenance_line(c.hash(), c.seed) + "\n" + body;
}

std::string hash_hex(const ExperimentConfig& c) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(c.hash()));
  return buf;
}

SeedKey replicate_key(const ExperimentConfig& c, std::size_t r) {
  return SeedKey{.seed = c.seed, .replicate = r};
}

std::optional<LinearGaussianSpec> linear_gaussian(const ExperimentConfig& c, const Parameter& theta) {
  if (c.model == "hidden-ar") return hidden_ar_spec(theta[0], c.dim);
  if (c.model == "unlikely-obs") return unlikely_observation_spec(c.horizon);
  return std::nullopt;
}

}  // namespace

std::string ExperimentConfig::canonical() const {
  std::ostringstream os;
  os << "model=" << model << "\n"
     << "dim=" << dim << "\n"
     << "theta=" << join(theta) << "\n"
     << "theta_grid=" << join(theta_grid) << "\n"
     << "horizon=" << horizon << "\n"
     << "particles=" << particles << "\n"
     << "replicates=" << replicates << "\n"
     << "scheme=" << scheme << "\n"
     << "schemes=" << join(schemes) << "\n"
     << "epsilon_frac=" << io::format_double(epsilon_frac) << "\n"
     << "alpha_target=" << io::format_double(alpha_target) << "\n"
     << "rho=" << io::format_double(rho) << "\n"
     << "h=" << join(h) << "\n"
     << "m=" << m << "\n"
     << "p=" << io::format_double(p) << "\n"
     << "iterations=" << iterations << "\n"
     << "max_iterations=" << max_iterations << "\n"
     << "proposal_sd=" << join(proposal_sd) << "\n"
     << "prior_lower=" << join(prior_lower) << "\n"
     << "prior_upper=" << join(prior_upper) << "\n"
     << "test_function=" << test_function << "\n"
     << "rao_blackwell=" << rao_blackwell << "\n"
     << "ancestor_sampling=" << ancestor_sampling << "\n"
     << "data=" << data << "\n"
     << "seed=" << seed << "\n";
  return os.str();
}

std::uint64_t ExperimentConfig::hash() const { return io::fnv1a(canonical()); }

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& field, const std::string& why) {
    throw InvalidArgument("config field '" + field + "': " + why);
  };
  if (model != "hidden-ar" && model != "unlikely-obs" && model != "growth" && model != "plankton") {
    fail("model", "unknown model id '" + model + "'");
  }
  if (dim < 1) fail("dim", "must be >= 1");
  if (horizon < 1) fail("horizon", "must be >= 1");
  if (particles < 1) fail("particles", "must be >= 1");
  if (replicates < 1) fail("replicates", "must be >= 1");
  try {
    parse_scheme(scheme);
    for (const auto& s : schemes) parse_scheme(s);
  } catch (const InvalidArgument& e) {
    fail("scheme", e.what());
  }
  if (!(epsilon_frac > 0.0)) fail("epsilon_frac", "must be positive");
  if (!(alpha_target > 0.0 && alpha_target < 1.0)) fail("alpha_target", "must lie in (0, 1)");
  if (!(rho >= 0.0 && rho <= 1.0)) fail("rho", "must lie in [0, 1]");
  for (double v : h) {
    if (!(v > 0.0)) fail("h", "perturbations must be positive");
  }
  if (!(p >= 0.0 && p < 1.0)) fail("p", "must lie in [0, 1)");
  if (iterations < 1) fail("iterations", "must be >= 1");
  if (max_iterations < 1) fail("max_iterations", "must be >= 1");
  for (double v : proposal_sd) {
    if (!(v > 0.0)) fail("proposal_sd", "entries must be positive");
  }
  try {
    parse_test_function(test_function);
  } catch (const InvalidArgument& e) {
    fail("test_function", e.what());
  }
  if (workers < 1) fail("workers", "must be >= 1");
}

void apply_setting(ExperimentConfig& c, std::string_view raw_key, std::string_view value) {
  std::string key(raw_key);
  if (const auto dot = key.rfind('.'); dot != std::string::npos) key = key.substr(dot + 1);
  std::replace(key.begin(), key.end(), '-', '_');
  if (key == "model") c.model = value;
  else if (key == "dim") c.dim = parse_uint(key, value);
  else if (key == "theta") c.theta = parse_reals(key, value);
  else if (key == "theta_grid") c.theta_grid = parse_reals(key, value);
  else if (key == "T" || key == "horizon") c.horizon = parse_uint(key, value);
  else if (key == "N" || key == "particles") c.particles = parse_uint(key, value);
  else if (key == "R" || key == "replicates") c.replicates = parse_uint(key, value);
  else if (key == "scheme") c.scheme = value;
  else if (key == "schemes") c.schemes = split_names(value);
  else if (key == "epsilon_frac") c.epsilon_frac = parse_real(key, value);
  else if (key == "alpha_target") c.alpha_target = parse_real(key, value);
  else if (key == "rho") c.rho = parse_real(key, value);
  else if (key == "h") c.h = parse_reals(key, value);
  else if (key == "m") c.m = parse_uint(key, value);
  else if (key == "p") c.p = parse_real(key, value);
  else if (key == "iterations" || key == "M") c.iterations = parse_uint(key, value);
  else if (key == "max_iterations") c.max_iterations = parse_uint(key, value);
  else if (key == "proposal_sd") c.proposal_sd = parse_reals(key, value);
  else if (key == "prior_lower") c.prior_lower = parse_reals(key, value);
  else if (key == "prior_upper") c.prior_upper = parse_reals(key, value);
  else if (key == "test_function") c.test_function = value;
  else if (key == "rao_blackwell") c.rao_blackwell = parse_bool(key, value);
  else if (key == "ancestor_sampling") c.ancestor_sampling = parse_bool(key, value);
  else if (key == "data") c.data = value;
  else if (key == "seed") c.seed = parse_uint(key, value);
  else if (key == "workers") c.workers = parse_uint(key, value);
  else if (key == "out") c.out = value;
  else if (key == "allow_incomplete") c.allow_incomplete = parse_bool(key, value);
  else throw InvalidArgument("unknown config field '" + std::string(raw_key) + "'");
}

ExperimentConfig load_config(std::istream& in) {
  ExperimentConfig c;
  for (const auto& [k, v] : io::parse_ini(in)) apply_setting(c, k, v);
  return c;
}

ModelPtr build_model(const ExperimentConfig& c) {
  return make_model(c.model, ModelOptions{.dim = c.dim, .horizon = c.horizon});
}

Parameter build_theta(const ExperimentConfig& c, const Model& model) {
  Parameter theta = c.theta.empty() ? model.default_theta() : Parameter(c.theta);
  try {
    model.check_parameter(theta);
  } catch (const Error& e) {
    throw InvalidArgument(std::string("config field 'theta': ") + e.what());
  }
  return theta;
}

Scheme build_scheme(const ExperimentConfig& c, std::string_view name) {
  Scheme s;
  s.kind = parse_scheme(name);
  s.transport.epsilon_frac = c.epsilon_frac;
  s.transport.alpha_target = c.alpha_target;
  return s;
}

Observations load_or_simulate(const ExperimentConfig& c, const Model& model, const Parameter& theta) {
  if (!c.data.empty()) {
    std::ifstream in(c.data);
    if (!in) throw InvalidArgument("config field 'data': cannot open '" + c.data + "'");
    auto y = io::read_observations_csv(in);
    detail::require_dims(y.dim() == model.spec().dim_obs, "data file does not match the model's observation dimension");
    return y;
  }
  const SeedKey data_key{.seed = c.seed, .replicate = std::numeric_limits<std::uint64_t>::max()};
  return simulate(model, theta, c.horizon, data_key).observations;
}

RunOutput run_simulate(const ExperimentConfig& c) {
  c.validate();
  const auto model = build_model(c);
  const auto theta = build_theta(c, *model);
  const SeedKey data_key{.seed = c.seed, .replicate = std::numeric_limits<std::uint64_t>::max()};
  const auto sim = simulate(*model, theta, c.horizon, data_key);
  std::ostringstream os;
  io::write_observations_csv(os, sim.observations);
  RunOutput out;
  out.csv = with_provenance(c, os.str());
  json j{{"experiment", "simulate"}, {"model", c.model}, {"T", c.horizon},
         {"d_y", sim.observations.dim()}, {"config_hash", hash_hex(c)}, {"seed", c.seed}};
  out.summary_json = j.dump(2);
  return out;
}

RunOutput run_profile(const ExperimentConfig& c) {
  c.validate();
  if (c.theta_grid.empty()) throw InvalidArgument("config field 'theta_grid': profile-likelihood needs a grid");
  const auto model = build_model(c);
  const auto theta = build_theta(c, *model);
  if (theta.size() < 1) throw InvalidArgument("config field 'model': profile needs a model with parameters");
  const auto y = load_or_simulate(c, *model, theta);
  const auto scheme = build_scheme(c, c.scheme);
  if (scheme.kind == SchemeKind::naive_systematic) {
    throw InvalidArgument("config field 'scheme': naive-systematic is only available for rg-smooth");
  }
  const auto resampler = scheme.kind == SchemeKind::sorted ? MarginalResampler::sorted_systematic
                                                           : MarginalResampler::multinomial;
  const std::size_t grid = c.theta_grid.size();
  std::vector<Parameter> points;
  for (double g : c.theta_grid) points.push_back(theta.shifted(0, g - theta[0]));

  std::vector<double> exact(grid, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t l = 0; l < grid; ++l) {
    if (auto lg = linear_gaussian(c, points[l])) exact[l] = kalman_filter(*lg, y).loglik;
  }
  struct Rows {
    std::vector<double> coupled, independent;
  };
  const auto rows = run_replicates<Rows>(c.replicates, c.workers, [&](std::size_t r) {
    const SeedKey key = replicate_key(c, r);
    Rows out;
    FilterTrace prev = bootstrap_pf(*model, points[0], y, c.particles, key.with_sweep(0), resampler);
    out.coupled.push_back(prev.loglik);
    for (std::size_t l = 1; l < grid; ++l) {
      if (prev.degenerate) {
        out.coupled.push_back(-std::numeric_limits<double>::infinity());
        continue;
      }
      FilterTrace next = conditional_rerun(prev, *model, points[l], y, prev.noise, scheme, key.with_sweep(l));
      out.coupled.push_back(next.loglik);
      prev = std::move(next);
    }
    for (std::size_t l = 0; l < grid; ++l) {
      out.independent.push_back(
          bootstrap_pf(*model, points[l], y, c.particles, key.with_sweep(grid + l)).loglik);
    }
    return out;
  });

  std::ostringstream os;
  os << "theta,replicate,loglik,loglik_independent,loglik_kalman\n";
  std::size_t agree_coupled = 0, agree_independent = 0;
  const bool has_exact = !std::isnan(exact[0]);
  const auto argmax = [](const std::vector<double>& v) {
    return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
  };
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t l = 0; l < grid; ++l) {
      os << io::format_double(c.theta_grid[l]) << "," << r << "," << io::format_double(rows[r].coupled[l])
         << "," << io::format_double(rows[r].independent[l]) << ","
         << (has_exact ? io::format_double(exact[l]) : "NA") << "\n";
    }
    if (has_exact) {
      agree_coupled += argmax(rows[r].coupled) == argmax(exact);
      agree_independent += argmax(rows[r].independent) == argmax(exact);
    }
  }
  RunOutput out;
  out.csv = with_provenance(c, os.str());
  json j{{"experiment", "profile-likelihood"}, {"scheme", c.scheme}, {"replicates", c.replicates},
         {"config_hash", hash_hex(c)}, {"seed", c.seed}};
  if (has_exact) {
    j["argmax_agreement_coupled"] = static_cast<double>(agree_coupled) / static_cast<double>(rows.size());
    j["argmax_agreement_independent"] = static_cast<double>(agree_independent) / static_cast<double>(rows.size());
  }
  out.summary_json = j.dump(2);
  return out;
}

RunOutput run_fd_study(const ExperimentConfig& c) {
  c.validate();
  const auto model = build_model(c);
  const auto theta = build_theta(c, *model);
  if (theta.size() < 1) throw InvalidArgument("config field 'model': fd-score needs a model with parameters");
  const auto y = load_or_simulate(c, *model, theta);
  const auto names = c.schemes.empty() ? std::vector<std::string>{c.scheme} : c.schemes;
  if (c.replicates < 3) throw InvalidArgument("config field 'replicates': fd-score needs at least 3");

  std::ostringstream os;
  os << "h,scheme,correlation,gain\n";
  json study = json::array();
  for (double h : c.h) {
    for (const auto& name : names) {
      const auto scheme = build_scheme(c, name);
      const auto res = run_replicates<FdResult>(c.replicates, c.workers, [&](std::size_t r) {
        return fd_score(*model, theta, 0, h, y, c.particles, scheme, replicate_key(c, r));
      });
      std::vector<double> minus, plus, est;
      for (const auto& f : res) {
        minus.push_back(f.loglik_minus);
        plus.push_back(f.loglik_plus);
        est.push_back(f.estimate);
      }
      const auto cg = correlation_gain(minus, plus);
      os << io::format_double(h) << "," << name << "," << io::format_double(cg.rho) << ","
         << io::format_double(cg.gain) << "\n";
      study.push_back({{"h", h}, {"scheme", name}, {"correlation", cg.rho}, {"gain", cg.gain},
                       {"fd_mean", stats::mean(est)}, {"fd_variance", stats::variance(est)}});
    }
  }
  RunOutput out;
  out.csv = with_provenance(c, os.str());
  out.summary_json = json{{"experiment", "fd-score"}, {"rows", study}, {"config_hash", hash_hex(c)},
                          {"seed", c.seed}}.dump(2);
  return out;
}

RunOutput run_pmmh(const ExperimentConfig& c) {
  c.validate();
  const auto model = build_model(c);
  const auto theta = build_theta(c, *model);
  const std::size_t d = theta.size();
  if (d < 1) throw InvalidArgument("config field 'model': pmmh needs a model with parameters");
  const auto y = load_or_simulate(c, *model, theta);

  std::vector<double> lower = c.prior_lower, upper = c.prior_upper;
  if (c.model == "hidden-ar") {
    if (lower.empty()) lower = {-1.0};
    if (upper.empty()) upper = {1.0};
  }
  if ((!lower.empty() && lower.size() != d) || (!upper.empty() && upper.size() != d)) {
    throw InvalidArgument("config field 'prior_lower'/'prior_upper': length must match theta");
  }
  const LogDensity prior = [lower, upper](const Parameter& th) {
    for (std::size_t i = 0; i < th.size(); ++i) {
      if ((!lower.empty() && th[i] <= lower[i]) || (!upper.empty() && th[i] >= upper[i])) {
        return -std::numeric_limits<double>::infinity();
      }
    }
    return 0.0;
  };
  PmmhOptions opt;
  opt.proposal_sd = c.proposal_sd.empty() ? std::vector<double>(d, 0.1) : c.proposal_sd;
  opt.rho = c.rho;
  opt.particles = c.particles;
  opt.iterations = c.iterations;
  opt.scheme = build_scheme(c, c.scheme);
  const auto chain = correlated_pmmh(*model, prior, y, theta, opt, replicate_key(c, 0));

  std::ostringstream os;
  os << "iteration";
  for (std::size_t j = 0; j < d; ++j) os << ",theta_" << (j + 1);
  os << ",loglik,accepted\n";
  for (std::size_t i = 0; i < c.iterations; ++i) {
    os << i;
    for (std::size_t j = 0; j < d; ++j) {
      os << "," << io::format_double(chain.theta(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
    }
    os << "," << io::format_double(chain.loglik[i]) << "," << (chain.accepted[i] ? 1 : 0) << "\n";
  }
  json comps = json::array();
  for (std::size_t j = 0; j < d; ++j) {
    std::vector<double> col(c.iterations);
    for (std::size_t i = 0; i < c.iterations; ++i) {
      col[i] = chain.theta(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
    json cj{{"mean", stats::mean(col)}};
    if (c.iterations >= 100) {
      const auto s = summarize_chain(col);
      cj["sd"] = s.sd;
      cj["ess"] = s.ess;
      cj["mcse_mean"] = s.mcse_mean;
    }
    comps.push_back(cj);
  }
  RunOutput out;
  out.csv = with_provenance(c, os.str());
  out.summary_json = json{{"experiment", "pmmh"}, {"scheme", c.scheme}, {"rho", c.rho},
                          {"acceptance_rate", chain.acceptance_rate()}, {"theta", comps},
                          {"ess_estimator", "Geyer initial positive sequence, capped at M log10 M"},
                          {"config_hash", hash_hex(c)}, {"seed", c.seed}}.dump(2);
  return out;
}

RunOutput run_rg(const ExperimentConfig& c) {
  c.validate();
  const auto model = build_model(c);
  const auto theta = build_theta(c, *model);
  const auto y = load_or_simulate(c, *model, theta);
  RgOptions opt;
  opt.particles = c.particles;
  opt.h = parse_test_function(c.test_function);
  opt.rao_blackwell = c.rao_blackwell;
  opt.ancestor_sampling = c.ancestor_sampling;
  opt.max_iterations = c.max_iterations;
  opt.scheme = build_scheme(c, c.scheme);
  if (c.m > 0) {
    opt.policy = TruncationPolicy::fixed(c.m);
  } else if (c.p > 0.0) {
    opt.policy = TruncationPolicy::geometric(c.p);
  }
  const auto est = run_replicates<RgEstimate>(c.replicates, c.workers, [&](std::size_t r) {
    return rg_estimate(*model, theta, y, opt, replicate_key(c, r));
  });

  const std::size_t dim = model->spec().dim_state;
  const std::size_t comps = (y.horizon() + 1) * dim;
  std::ostringstream os;
  os << "replicate,tau,cost,iterations,complete";
  for (std::size_t i = 0; i < comps; ++i) os << ",H_" << i;
  os << "\n";
  for (std::size_t r = 0; r < est.size(); ++r) {
    const auto& e = est[r];
    os << r << "," << (e.tau ? std::to_string(*e.tau) : "NA") << "," << e.cost_units << ","
       << e.iterations_run << "," << (e.complete ? 1 : 0);
    for (std::size_t i = 0; i < comps; ++i) os << "," << (e.complete ? io::format_double(e.h[i]) : "NA");
    os << "\n";
  }
  RunOutput out;
  out.csv = with_provenance(c, os.str());

  std::size_t incomplete = 0;
  for (const auto& e : est) incomplete += e.complete ? 0 : 1;
  json j{{"experiment", "rg-smooth"}, {"scheme", c.scheme}, {"replicates", c.replicates},
         {"incomplete", incomplete}, {"config_hash", hash_hex(c)}, {"seed", c.seed}};
  if (est.size() - incomplete >= 2) {
    const auto s = aggregate(est);
    std::optional<SmootherResult> truth;
    if (auto lg = linear_gaussian(c, theta)) truth = kalman_smoother(*lg, y);
    std::ostringstream agg;
    agg << "component,time,coordinate,mean,sd,se,ci_low,ci_high,truth\n";
    for (std::size_t i = 0; i < comps; ++i) {
      const std::size_t t = i / dim, k = i % dim;
      std::string tv = "NA";
      if (truth && opt.h == TestFunction::mean_per_time) {
        tv = io::format_double(truth->means[t](static_cast<Eigen::Index>(k)));
      }
      agg << i << "," << t << "," << k << "," << io::format_double(s.mean[i]) << ","
          << io::format_double(s.sd[i]) << "," << io::format_double(s.se[i]) << ","
          << io::format_double(s.ci_low[i]) << "," << io::format_double(s.ci_high[i]) << "," << tv << "\n";
    }
    out.aggregate_csv = with_provenance(c, agg.str());
    double cost = 0.0;
    for (const auto& e : est) cost += static_cast<double>(e.cost_units);
    j["tau_mean"] = s.tau_mean;
    j["tau_sd"] = s.tau_sd;
    j["tau_max"] = s.tau_max;
    j["cost_mean"] = cost / static_cast<double>(est.size());
  }
  if (incomplete > 0 && !c.allow_incomplete) {
    j["error"] = std::to_string(incomplete) + " replicate(s) hit max_iterations without meeting";
    out.exit_code = 3;
  }
  out.summary_json = j.dump(2);
  return out;
}

RunOutput run_validate(const ExperimentConfig& c) {
  std::ostringstream os;
  bool all = true;
  auto check = [&](const std::string& name, bool ok, double value) {
    os << (ok ? "PASS " : "FAIL ") << name << " " << io::format_double(value) << "\n";
    all = all && ok;
  };
  std::mt19937_64 gen(c.seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif(0.05, 1.0);

  {
    const auto spec = hidden_ar_spec(0.6, 2);
    Matrix ym(6, 2);
    for (Eigen::Index i = 0; i < ym.size(); ++i) ym.data()[i] = normal(gen);
    const Observations y(ym);
    const double diff = std::abs(kalman_filter(spec, y).loglik - dense_gaussian_loglik(spec, y));
    check("kalman-loglik-vs-joint-gaussian", diff < 1e-8, diff);
    const auto rts = kalman_smoother(spec, y);
    const auto dense = dense_gaussian_smoothing_means(spec, y);
    double worst = 0.0;
    for (std::size_t t = 0; t < dense.size(); ++t) worst = std::max(worst, (rts.means[t] - dense[t]).cwiseAbs().maxCoeff());
    check("rts-means-vs-conditioning", worst < 1e-8, worst);
  }
  {
    const std::vector<double> w{0.7, 0.3}, wt{0.4, 0.6};
    const Matrix p = index_coupled_build(w, wt).dense();
    Matrix expect(2, 2);
    expect << 0.4, 0.3, 0.0, 0.3;
    const double err = (p - expect).cwiseAbs().maxCoeff();
    check("index-coupled-closed-form", err < 1e-12, err);
  }
  {
    double worst = 0.0;
    for (int rep = 0; rep < 20; ++rep) {
      const std::size_t n = 16;
      std::vector<double> w(n), wt(n);
      Matrix x(static_cast<Eigen::Index>(n), 1), xt(static_cast<Eigen::Index>(n), 1);
      double s1 = 0, s2 = 0;
      for (std::size_t i = 0; i < n; ++i) {
        w[i] = unif(gen);
        wt[i] = unif(gen);
        s1 += w[i];
        s2 += wt[i];
        x(static_cast<Eigen::Index>(i), 0) = normal(gen);
        xt(static_cast<Eigen::Index>(i), 0) = normal(gen);
      }
      for (auto& v : w) v /= s1;
      for (auto& v : wt) v /= s2;
      const auto cm = transport_coupling(w, x, wt, xt);
      const Vector rows = cm.p.rowwise().sum();
      const Vector cols = cm.p.colwise().sum().transpose();
      for (std::size_t i = 0; i < n; ++i) {
        worst = std::max({worst, std::abs(rows(static_cast<Eigen::Index>(i)) - w[i]),
                          std::abs(cols(static_cast<Eigen::Index>(i)) - wt[i])});
      }
    }
    check("transport-marginals-exact", worst < 1e-9, worst);
  }
  {
    Matrix d(2, 2);
    d << 0, 1, 1, 0;
    const std::vector<double> w{0.5, 0.5};
    const auto res = sinkhorn(d, w, w, 1.0, 0.95, 100);
    Matrix expect(2, 2);
    expect << 1, std::exp(-1.0), std::exp(-1.0), 1;
    expect /= 2.0 * (1.0 + std::exp(-1.0));
    const double err = (res.plan - expect).cwiseAbs().maxCoeff();
    check("sinkhorn-symmetric-fixed-point", err < 1e-10, err);
  }
  RunOutput out;
  out.csv = os.str();
  out.summary_json = json{{"experiment", "validate"}, {"all_passed", all}}.dump(2);
  out.exit_code = all ? 0 : 1;
  return out;
}

}  // namespace coupledpf::harness
