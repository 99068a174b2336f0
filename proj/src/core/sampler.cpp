#include "sampler.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "dists.hpp"
#include "format.hpp"

namespace bbr {

double PosteriorDraws::unconstrained_value(std::size_t chain, std::size_t iteration,
                                           std::size_t param) const {
  const double v = value(chain, iteration, param);
  if (param == sigma_zeta_index() || param == omega_index()) return std::log(v);
  return v;
}

std::vector<double> PosteriorDraws::pooled(std::size_t param) const {
  std::vector<double> out;
  out.reserve(n_chains * retained);
  for (std::size_t c = 0; c < n_chains; ++c)
    for (std::size_t it = 0; it < retained; ++it) out.push_back(value(c, it, param));
  return out;
}

std::size_t PosteriorDraws::param_index(const std::string& name) const {
  for (std::size_t p = 0; p < parameter_names.size(); ++p)
    if (parameter_names[p] == name) return p;
  throw Error(ErrorCode::InvalidArgument, "unknown parameter: " + name);
}

AdaptiveStep::AdaptiveStep(double initial_step, double target, double min_step,
                           double max_step)
    : step_(initial_step),
      log_step_(std::log(initial_step)),
      target_(target),
      log_min_(std::log(min_step)),
      log_max_(std::log(max_step)) {}

void AdaptiveStep::update(double accept_prob, bool adapting) {
  if (!adapting) return;
  ++count_;
  const double gamma = std::pow(static_cast<double>(count_), -0.6);
  log_step_ += gamma * (accept_prob - target_);
  log_step_ = std::clamp(log_step_, log_min_, log_max_);
  step_ = std::exp(log_step_);
}

namespace {

struct ChainOutput {
  std::vector<double> draws;  // retained x P, constrained
  std::uint64_t theta_accepted = 0, theta_proposed = 0;
  std::uint64_t zeta_accepted = 0, zeta_proposed = 0;
  std::uint64_t hyper_accepted = 0, hyper_proposed = 0;
};

std::mutex progress_mutex;

void report_progress(int chain, int done, int total) {
  std::lock_guard<std::mutex> lock(progress_mutex);
  std::fprintf(stderr, "fit: chain %d: %3d%% (%d/%d iterations)\n", chain,
               static_cast<int>(100.0 * done / total), done, total);
}

double bernoulli_loglik(std::uint8_t x, double eta) {
  return x ? -softplus(-eta) : -softplus(eta);
}

ChainOutput run_chain(const ModelData& data, const ModelConfig& mc,
                      const SamplerConfig& sc, int chain_index) {
  Rng rng = Rng(sc.seed).split(static_cast<std::uint64_t>(chain_index));
  const std::size_t n_e = data.n_examiners();
  const std::size_t n_i = data.n_items();
  const std::size_t n_params = n_e + n_i + 3;
  const double scale = mc.hyperprior_scale;

  // Over-dispersed initialization: tendencies from N(0, 2), hypers from
  // their priors restricted to [0.1, 10].
  std::vector<double> theta(n_e), zeta(n_i);
  for (auto& t : theta) t = rng.normal(0.0, 2.0);
  for (auto& z : zeta) z = rng.normal(0.0, 2.0);
  auto truncated_draw = [&](bool half) {
    for (;;) {
      double x = rng.student_t3(scale);
      if (half) x = std::fabs(x);
      if (x >= 0.1 && x <= 10.0) return x;
    }
  };
  double log_sigma = std::log(truncated_draw(true));
  double log_omega = std::log(truncated_draw(true));
  double alpha = truncated_draw(false);

  std::vector<AdaptiveStep> theta_steps(n_e, {0.5, sc.target_accept, sc.min_step, sc.max_step});
  std::vector<AdaptiveStep> zeta_steps(n_i, {0.5, sc.target_accept, sc.min_step, sc.max_step});
  AdaptiveStep sigma_step{0.5, sc.target_accept, sc.min_step, sc.max_step};
  AdaptiveStep omega_step{0.5, sc.target_accept, sc.min_step, sc.max_step};
  AdaptiveStep alpha_step{0.5, sc.target_accept, sc.min_step, sc.max_step};

  double sum_zeta_sq = 0.0;
  for (double z : zeta) sum_zeta_sq += z * z;

  auto theta_slice = [&](std::size_t i, double t) {
    double s = 0.0;
    for (auto k : data.by_examiner[i])
      s += bernoulli_loglik(data.conclusive[k], t + zeta[data.resp_item[k]]);
    return s;
  };
  auto zeta_slice = [&](std::size_t j, double z) {
    double s = 0.0;
    for (auto k : data.by_item[j])
      s += bernoulli_loglik(data.conclusive[k], theta[data.resp_examiner[k]] + z);
    return s;
  };
  // zeta-block prior as a function of log sigma, using the cached sum of squares
  auto zeta_block_logp = [&](double ls) {
    const double inv_var = std::exp(-2.0 * ls);
    return -static_cast<double>(n_i) * (0.9189385332046727 + ls) -
           0.5 * sum_zeta_sq * inv_var;
  };
  auto theta_block_logp = [&](double lo, double a) {
    const double om = std::exp(lo);
    double s = 0.0;
    for (double t : theta) s += skew_normal_logpdf(t, om, a);
    return s;
  };

  ChainOutput out;
  const int retained = sc.iterations - sc.warmup;
  out.draws.reserve(static_cast<std::size_t>(retained) * n_params);

  const int tick = std::max(1, sc.iterations / 10);

  for (int iter = 0; iter < sc.iterations; ++iter) {
    const bool adapting = iter < sc.warmup;
    const bool counting = iter >= sc.warmup;
    const double omega = std::exp(log_omega);

    // theta sweep
    for (std::size_t i = 0; i < n_e; ++i) {
      const double cur = theta[i];
      const double prop = cur + theta_steps[i].step() * rng.normal();
      const double delta = theta_slice(i, prop) - theta_slice(i, cur) +
                           skew_normal_logpdf(prop, omega, alpha) -
                           skew_normal_logpdf(cur, omega, alpha);
      const double accept_prob = std::min(1.0, std::exp(std::min(delta, 0.0)));
      if (mh_accept(rng, delta)) theta[i] = prop;
      theta_steps[i].update(accept_prob, adapting);
      if (counting) {
        ++out.theta_proposed;
        if (theta[i] == prop) ++out.theta_accepted;
      }
    }

    // zeta sweep
    const double sigma = std::exp(log_sigma);
    for (std::size_t j = 0; j < n_i; ++j) {
      const double cur = zeta[j];
      const double prop = cur + zeta_steps[j].step() * rng.normal();
      const double delta = zeta_slice(j, prop) - zeta_slice(j, cur) +
                           normal_logpdf(prop, 0.0, sigma) -
                           normal_logpdf(cur, 0.0, sigma);
      const double accept_prob = std::min(1.0, std::exp(std::min(delta, 0.0)));
      if (mh_accept(rng, delta)) {
        sum_zeta_sq += prop * prop - cur * cur;
        zeta[j] = prop;
      }
      zeta_steps[j].update(accept_prob, adapting);
      if (counting) {
        ++out.zeta_proposed;
        if (zeta[j] == prop) ++out.zeta_accepted;
      }
    }

    // hyperparameters, several cheap updates per sweep; sampled on the log
    // scale with the +u Jacobian term
    for (int rep = 0; rep < sc.hyper_updates_per_sweep; ++rep) {
      {
        const double cur = log_sigma;
        const double prop = cur + sigma_step.step() * rng.normal();
        const double delta = zeta_block_logp(prop) + half_t3_logpdf(std::exp(prop), scale) +
                             prop -
                             (zeta_block_logp(cur) + half_t3_logpdf(std::exp(cur), scale) +
                              cur);
        const double accept_prob = std::min(1.0, std::exp(std::min(delta, 0.0)));
        if (mh_accept(rng, delta)) log_sigma = prop;
        sigma_step.update(accept_prob, adapting);
        if (counting) {
          ++out.hyper_proposed;
          if (log_sigma == prop) ++out.hyper_accepted;
        }
      }
      {
        const double cur = log_omega;
        const double prop = cur + omega_step.step() * rng.normal();
        const double delta = theta_block_logp(prop, alpha) +
                             half_t3_logpdf(std::exp(prop), scale) + prop -
                             (theta_block_logp(cur, alpha) +
                              half_t3_logpdf(std::exp(cur), scale) + cur);
        const double accept_prob = std::min(1.0, std::exp(std::min(delta, 0.0)));
        if (mh_accept(rng, delta)) log_omega = prop;
        omega_step.update(accept_prob, adapting);
        if (counting) {
          ++out.hyper_proposed;
          if (log_omega == prop) ++out.hyper_accepted;
        }
      }
      {
        const double cur = alpha;
        const double prop = cur + alpha_step.step() * rng.normal();
        const double delta = theta_block_logp(log_omega, prop) +
                             student_t3_logpdf(prop, scale) -
                             (theta_block_logp(log_omega, cur) +
                              student_t3_logpdf(cur, scale));
        const double accept_prob = std::min(1.0, std::exp(std::min(delta, 0.0)));
        if (mh_accept(rng, delta)) alpha = prop;
        alpha_step.update(accept_prob, adapting);
        if (counting) {
          ++out.hyper_proposed;
          if (alpha == prop) ++out.hyper_accepted;
        }
      }
    }

    if (iter >= sc.warmup) {
      for (double t : theta) out.draws.push_back(t);
      for (double z : zeta) out.draws.push_back(z);
      out.draws.push_back(std::exp(log_sigma));
      out.draws.push_back(std::exp(log_omega));
      out.draws.push_back(alpha);
    }

    if (sc.progress && (iter + 1) % tick == 0)
      report_progress(chain_index, iter + 1, sc.iterations);
  }

  return out;
}

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("BBR_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

}  // namespace

PosteriorDraws fit(const StudyDataset& dataset, const ModelConfig& model_config,
                   const SamplerConfig& sampler_config, ValidationLog* log) {
  if (dataset.examiners.size() < 2 || dataset.items.size() < 2)
    throw Error(ErrorCode::InvalidArgument, "fit requires at least 2 examiners and 2 items");
  if (sampler_config.chains < 1)
    throw Error(ErrorCode::InvalidArgument, "fit requires at least 1 chain");
  if (sampler_config.warmup < 0 || sampler_config.warmup >= sampler_config.iterations)
    throw Error(ErrorCode::InvalidArgument, "fit requires warmup < iterations");
  for (const auto& r : dataset.responses)
    if (r.canonical == Conclusion::Unsuitable)
      throw Error(ErrorCode::InvalidArgument,
                  "fit requires a policy-applied dataset; found an Unsuitable response");

  const ModelData data = ModelData::from_dataset(dataset);

  if (log) {
    // all-identical response vectors are fine (the priors regularize) but
    // worth flagging
    for (std::size_t i = 0; i < data.n_examiners(); ++i) {
      bool all_same = true;
      for (auto k : data.by_examiner[i])
        if (data.conclusive[k] != data.conclusive[data.by_examiner[i][0]]) {
          all_same = false;
          break;
        }
      if (all_same)
        log->note("examiner " + data.examiner_ids[i] +
                  " has all-identical responses (degenerate but allowed)");
    }
    for (std::size_t j = 0; j < data.n_items(); ++j) {
      bool all_same = true;
      for (auto k : data.by_item[j])
        if (data.conclusive[k] != data.conclusive[data.by_item[j][0]]) {
          all_same = false;
          break;
        }
      if (all_same)
        log->note("item " + data.item_ids[j] +
                  " has all-identical responses (degenerate but allowed)");
    }
  }

  PosteriorDraws draws;
  draws.examiner_ids = data.examiner_ids;
  draws.item_ids = data.item_ids;
  for (const auto& e : data.examiner_ids) draws.parameter_names.push_back("theta[" + e + "]");
  for (const auto& i : data.item_ids) draws.parameter_names.push_back("zeta[" + i + "]");
  draws.parameter_names.push_back("sigma_zeta");
  draws.parameter_names.push_back("omega");
  draws.parameter_names.push_back("alpha");
  draws.n_chains = static_cast<std::size_t>(sampler_config.chains);
  draws.retained = static_cast<std::size_t>(sampler_config.iterations - sampler_config.warmup);
  draws.sampler_config = sampler_config;
  draws.model_config = model_config;

  std::vector<ChainOutput> outputs(draws.n_chains);
  const int n_threads =
      std::min<int>(resolve_threads(sampler_config.threads), sampler_config.chains);
  if (n_threads <= 1) {
    for (std::size_t c = 0; c < draws.n_chains; ++c)
      outputs[c] = run_chain(data, model_config, sampler_config, static_cast<int>(c));
  } else {
    std::vector<std::thread> workers;
    std::size_t next_chain = 0;
    std::mutex m;
    for (int w = 0; w < n_threads; ++w) {
      workers.emplace_back([&] {
        for (;;) {
          std::size_t c;
          {
            std::lock_guard<std::mutex> lock(m);
            if (next_chain >= draws.n_chains) return;
            c = next_chain++;
          }
          outputs[c] = run_chain(data, model_config, sampler_config, static_cast<int>(c));
        }
      });
    }
    for (auto& t : workers) t.join();
  }

  const std::size_t chain_len = draws.retained * draws.n_parameters();
  draws.data.resize(draws.n_chains * chain_len);
  std::uint64_t ta = 0, tp = 0, za = 0, zp = 0, ha = 0, hp = 0;
  for (std::size_t c = 0; c < draws.n_chains; ++c) {
    std::copy(outputs[c].draws.begin(), outputs[c].draws.end(),
              draws.data.begin() + static_cast<std::ptrdiff_t>(c * chain_len));
    ta += outputs[c].theta_accepted;
    tp += outputs[c].theta_proposed;
    za += outputs[c].zeta_accepted;
    zp += outputs[c].zeta_proposed;
    ha += outputs[c].hyper_accepted;
    hp += outputs[c].hyper_proposed;
  }
  draws.accept_theta = tp ? static_cast<double>(ta) / tp : 0.0;
  draws.accept_zeta = zp ? static_cast<double>(za) / zp : 0.0;
  draws.accept_hyper = hp ? static_cast<double>(ha) / hp : 0.0;

  if (draws.retained >= 4) {
    draws.diagnostics = diagnostics(draws);
    double max_rhat = 0.0;
    std::string worst;
    for (const auto& d : draws.diagnostics) {
      if (d.split_rhat > max_rhat) {
        max_rhat = d.split_rhat;
        worst = d.name;
      }
    }
    if (max_rhat > 1.05) {
      draws.warnings.push_back("NonConvergence: split R-hat " + format_sig(max_rhat, 4) +
                               " for " + worst + " exceeds 1.05");
      if (log) log->note(draws.warnings.back());
    }
  } else {
    draws.warnings.push_back("too few retained iterations for convergence diagnostics");
  }
  return draws;
}

namespace {

// split every chain into halves; odd middles are dropped
std::vector<std::vector<double>> split_halves(const std::vector<std::vector<double>>& chains) {
  std::vector<std::vector<double>> out;
  for (const auto& c : chains) {
    const std::size_t half = c.size() / 2;
    if (half == 0) continue;
    out.emplace_back(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(half));
    out.emplace_back(c.end() - static_cast<std::ptrdiff_t>(half), c.end());
  }
  return out;
}

struct ChainStats {
  std::vector<double> means;
  std::vector<double> vars;  // n-1 denominator
  double w = 0.0;            // mean within-chain variance
  double var_plus = 0.0;
  std::size_t n = 0;
};

ChainStats chain_stats(const std::vector<std::vector<double>>& seqs) {
  ChainStats s;
  s.n = seqs.front().size();
  for (const auto& seq : seqs) {
    double mean = 0.0;
    for (double x : seq) mean += x;
    mean /= static_cast<double>(seq.size());
    double ss = 0.0;
    for (double x : seq) ss += (x - mean) * (x - mean);
    s.means.push_back(mean);
    s.vars.push_back(seq.size() > 1 ? ss / static_cast<double>(seq.size() - 1) : 0.0);
  }
  for (double v : s.vars) s.w += v;
  s.w /= static_cast<double>(s.vars.size());

  double grand = 0.0;
  for (double m : s.means) grand += m;
  grand /= static_cast<double>(s.means.size());
  double between = 0.0;
  for (double m : s.means) between += (m - grand) * (m - grand);
  const double b = s.means.size() > 1
                       ? static_cast<double>(s.n) * between /
                             static_cast<double>(s.means.size() - 1)
                       : 0.0;
  s.var_plus = (static_cast<double>(s.n - 1) / static_cast<double>(s.n)) * s.w +
               b / static_cast<double>(s.n);
  return s;
}

}  // namespace

double split_rhat_of(const std::vector<std::vector<double>>& chains) {
  const auto seqs = split_halves(chains);
  if (seqs.size() < 2 || seqs.front().size() < 2)
    throw Error(ErrorCode::InvalidArgument, "split R-hat needs at least 2 split halves");
  const ChainStats s = chain_stats(seqs);
  if (s.w <= 0.0) {
    bool distinct = false;
    for (double m : s.means)
      if (m != s.means.front()) distinct = true;
    return distinct ? std::numeric_limits<double>::infinity() : 1.0;
  }
  return std::sqrt(s.var_plus / s.w);
}

double ess_bulk_of(const std::vector<std::vector<double>>& chains) {
  const auto seqs = split_halves(chains);
  if (seqs.empty() || seqs.front().size() < 4)
    return std::numeric_limits<double>::quiet_NaN();
  const ChainStats s = chain_stats(seqs);
  if (s.w <= 0.0 || s.var_plus <= 0.0) return std::numeric_limits<double>::quiet_NaN();

  const std::size_t m = seqs.size();
  const std::size_t n = s.n;
  const auto acov = [&](std::size_t chain, std::size_t t) {
    const auto& x = seqs[chain];
    const double mean = s.means[chain];
    double acc = 0.0;
    for (std::size_t i = 0; i + t < n; ++i) acc += (x[i] - mean) * (x[i + t] - mean);
    return acc / static_cast<double>(n);
  };

  const std::size_t max_lag = std::min<std::size_t>(n - 1, 2000);
  double rho_sum = 0.0;
  // Geyer-style pairs (rho_t + rho_{t+1}); stop at the first negative pair
  for (std::size_t t = 1; t + 1 <= max_lag; t += 2) {
    double c_t = 0.0, c_t1 = 0.0;
    for (std::size_t chain = 0; chain < m; ++chain) {
      c_t += acov(chain, t);
      c_t1 += acov(chain, t + 1);
    }
    c_t /= static_cast<double>(m);
    c_t1 /= static_cast<double>(m);
    const double rho_t = 1.0 - (s.w - c_t) / s.var_plus;
    const double rho_t1 = 1.0 - (s.w - c_t1) / s.var_plus;
    if (rho_t + rho_t1 < 0.0) break;
    rho_sum += rho_t + rho_t1;
  }
  const double tau = 1.0 + 2.0 * rho_sum;
  const double total = static_cast<double>(m * n);
  return std::min(total, total / tau);
}

std::vector<Diagnostic> diagnostics(const PosteriorDraws& draws) {
  if (draws.retained < 4)
    throw Error(ErrorCode::InvalidArgument,
                "diagnostics need at least 4 retained iterations per chain");
  std::vector<Diagnostic> out;
  out.reserve(draws.n_parameters());
  for (std::size_t p = 0; p < draws.n_parameters(); ++p) {
    std::vector<std::vector<double>> chains(draws.n_chains);
    for (std::size_t c = 0; c < draws.n_chains; ++c) {
      chains[c].reserve(draws.retained);
      for (std::size_t it = 0; it < draws.retained; ++it)
        chains[c].push_back(draws.value(c, it, p));
    }
    Diagnostic d;
    d.name = draws.parameter_names[p];
    d.split_rhat = split_rhat_of(chains);
    d.ess_bulk = ess_bulk_of(chains);
    out.push_back(std::move(d));
  }
  return out;
}

double quantile_type7(std::vector<double> xs, double p) {
  if (xs.empty()) throw Error(ErrorCode::InvalidArgument, "quantile of empty sample");
  std::sort(xs.begin(), xs.end());
  const double h = (static_cast<double>(xs.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= xs.size()) return xs.back();
  const double frac = h - std::floor(h);
  return xs[lo] + frac * (xs[lo + 1] - xs[lo]);
}

std::vector<ParameterSummary> summarize(const PosteriorDraws& draws, double level) {
  if (!(level > 0.0 && level < 1.0))
    throw Error(ErrorCode::InvalidArgument, "summary level must be in (0, 1)");
  const std::size_t n_params = draws.n_parameters();
  const std::size_t total = draws.n_chains * draws.retained;
  const std::size_t zeta_begin = draws.zeta_offset();
  const std::size_t zeta_end = zeta_begin + draws.item_ids.size();

  // per-draw zeta mean, for the item-centered reporting view
  std::vector<double> zbar(total, 0.0);
  const bool center = draws.model_config.center_items && !draws.item_ids.empty();
  if (center) {
    std::size_t idx = 0;
    for (std::size_t c = 0; c < draws.n_chains; ++c)
      for (std::size_t it = 0; it < draws.retained; ++it, ++idx) {
        double s = 0.0;
        for (std::size_t p = zeta_begin; p < zeta_end; ++p) s += draws.value(c, it, p);
        zbar[idx] = s / static_cast<double>(draws.item_ids.size());
      }
  }

  std::vector<ParameterSummary> out;
  out.reserve(n_params);
  const double lo_p = (1.0 - level) / 2.0;
  const double hi_p = 1.0 - lo_p;
  for (std::size_t p = 0; p < n_params; ++p) {
    std::vector<double> xs = draws.pooled(p);
    if (center) {
      if (p < zeta_begin) {
        for (std::size_t k = 0; k < total; ++k) xs[k] += zbar[k];
      } else if (p < zeta_end) {
        for (std::size_t k = 0; k < total; ++k) xs[k] -= zbar[k];
      }
    }
    ParameterSummary s;
    s.name = draws.parameter_names[p];
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    s.mean = mean;
    s.sd = xs.size() > 1 ? std::sqrt(ss / static_cast<double>(xs.size() - 1)) : 0.0;
    s.lower = quantile_type7(xs, lo_p);
    s.upper = quantile_type7(xs, hi_p);
    out.push_back(std::move(s));
  }
  return out;
}

void save_draws_csv(const PosteriorDraws& draws, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
  out << "chain,iteration,parameter,value\n";
  for (std::size_t c = 0; c < draws.n_chains; ++c)
    for (std::size_t it = 0; it < draws.retained; ++it)
      for (std::size_t p = 0; p < draws.n_parameters(); ++p)
        out << c << ',' << it << ',' << csv_escape(draws.parameter_names[p]) << ','
            << format_double_roundtrip(draws.value(c, it, p)) << '\n';
  if (!out) throw Error(ErrorCode::Io, "failed writing " + path);
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        field += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(field);
      field.clear();
    } else if (ch != '\r') {
      field += ch;
    }
  }
  fields.push_back(field);
  return fields;
}

void derive_rosters_from_names(PosteriorDraws& draws) {
  for (const auto& name : draws.parameter_names) {
    if (name.rfind("theta[", 0) == 0 && name.back() == ']')
      draws.examiner_ids.push_back(name.substr(6, name.size() - 7));
    else if (name.rfind("zeta[", 0) == 0 && name.back() == ']')
      draws.item_ids.push_back(name.substr(5, name.size() - 6));
  }
}

}  // namespace

PosteriorDraws load_draws_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || split_csv_line(line) !=
                                     std::vector<std::string>{"chain", "iteration",
                                                              "parameter", "value"})
    throw Error(ErrorCode::InvalidArgument, path + ": not a draws CSV");

  PosteriorDraws draws;
  std::vector<double> values;
  std::size_t row = 1;
  std::size_t n_params = 0;
  std::size_t max_chain = 0, max_iter = 0;
  std::size_t within = 0;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 4)
      throw Error(ErrorCode::InvalidArgument,
                  path + ":" + std::to_string(row) + ": expected 4 fields");
    const std::size_t chain = std::stoull(fields[0]);
    const std::size_t iter = std::stoull(fields[1]);
    max_chain = std::max(max_chain, chain);
    max_iter = std::max(max_iter, iter);
    if (chain == 0 && iter == 0) {
      draws.parameter_names.push_back(fields[2]);
    } else {
      if (n_params == 0) n_params = draws.parameter_names.size();
      if (fields[2] != draws.parameter_names[within % n_params])
        throw Error(ErrorCode::InvalidArgument,
                    path + ":" + std::to_string(row) + ": parameter order mismatch");
      ++within;
    }
    values.push_back(std::stod(fields[3]));
  }
  if (n_params == 0) n_params = draws.parameter_names.size();
  if (n_params == 0 || values.empty())
    throw Error(ErrorCode::InvalidArgument, path + ": no draws");
  draws.n_chains = max_chain + 1;
  draws.retained = max_iter + 1;
  if (values.size() != draws.n_chains * draws.retained * n_params)
    throw Error(ErrorCode::InvalidArgument, path + ": draw grid is ragged");
  draws.data = std::move(values);
  derive_rosters_from_names(draws);
  return draws;
}

namespace {
constexpr char kCacheMagic[8] = {'B', 'B', 'R', 'D', 'R', 'A', 'W', '1'};

void write_u64(std::ostream& out, std::uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}
std::uint64_t read_u64(std::istream& in) {
  std::uint64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  return v;
}
void write_string(std::ostream& out, const std::string& s) {
  write_u64(out, s.size());
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}
std::string read_string(std::istream& in) {
  const std::uint64_t len = read_u64(in);
  std::string s(len, '\0');
  in.read(s.data(), static_cast<std::streamsize>(len));
  return s;
}
}  // namespace

void save_draws_cache(const PosteriorDraws& draws, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
  out.write(kCacheMagic, sizeof kCacheMagic);
  write_u64(out, 1);  // format version
  write_u64(out, draws.n_chains);
  write_u64(out, draws.retained);
  write_u64(out, draws.n_parameters());
  write_u64(out, draws.examiner_ids.size());
  write_u64(out, draws.item_ids.size());
  write_u64(out, draws.model_config.center_items ? 1 : 0);
  out.write(reinterpret_cast<const char*>(&draws.model_config.hyperprior_scale),
            sizeof(double));
  for (const auto& n : draws.parameter_names) write_string(out, n);
  for (const auto& e : draws.examiner_ids) write_string(out, e);
  for (const auto& i : draws.item_ids) write_string(out, i);
  out.write(reinterpret_cast<const char*>(draws.data.data()),
            static_cast<std::streamsize>(draws.data.size() * sizeof(double)));
  if (!out) throw Error(ErrorCode::Io, "failed writing " + path);
}

PosteriorDraws load_draws_cache(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kCacheMagic, sizeof magic) != 0)
    throw Error(ErrorCode::InvalidArgument, path + ": not a draws cache");
  if (read_u64(in) != 1)
    throw Error(ErrorCode::InvalidArgument, path + ": unsupported cache version");
  PosteriorDraws draws;
  draws.n_chains = read_u64(in);
  draws.retained = read_u64(in);
  const std::uint64_t n_params = read_u64(in);
  const std::uint64_t n_e = read_u64(in);
  const std::uint64_t n_i = read_u64(in);
  draws.model_config.center_items = read_u64(in) != 0;
  in.read(reinterpret_cast<char*>(&draws.model_config.hyperprior_scale), sizeof(double));
  for (std::uint64_t k = 0; k < n_params; ++k)
    draws.parameter_names.push_back(read_string(in));
  for (std::uint64_t k = 0; k < n_e; ++k) draws.examiner_ids.push_back(read_string(in));
  for (std::uint64_t k = 0; k < n_i; ++k) draws.item_ids.push_back(read_string(in));
  draws.data.resize(draws.n_chains * draws.retained * n_params);
  in.read(reinterpret_cast<char*>(draws.data.data()),
          static_cast<std::streamsize>(draws.data.size() * sizeof(double)));
  if (!in) throw Error(ErrorCode::InvalidArgument, path + ": truncated draws cache");
  return draws;
}

}  // namespace bbr
