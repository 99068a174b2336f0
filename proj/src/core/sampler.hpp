#ifndef BBR_SAMPLER_HPP
#define BBR_SAMPLER_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "latent_model.hpp"
#include "rng.hpp"
#include "study_data.hpp"

namespace bbr {

struct SamplerConfig {
  int chains = 4;
  int iterations = 5000;  // per chain, including warmup
  int warmup = 2500;      // discarded
  std::uint64_t seed = 0;
  double target_accept = 0.44;  // per-coordinate random walk optimum
  double min_step = 1e-3;       // adaptation bounds on proposal scales
  double max_step = 50.0;
  int hyper_updates_per_sweep = 5;
  int threads = 0;  // 0 = defer to caller's resolution (BBR_THREADS / hw)
  bool progress = false;
};

struct ParameterSummary {
  std::string name;
  double mean = 0.0;
  double sd = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

struct Diagnostic {
  std::string name;
  double split_rhat = 0.0;  // +inf sentinel when within-chain variance is zero
  double ess_bulk = 0.0;
};

/// Retained posterior draws in constrained space, chain-major. Parameter
/// order: theta[...], zeta[...], sigma_zeta, omega, alpha. The unconstrained
/// view of the two scale parameters is their log.
class PosteriorDraws {
 public:
  std::vector<std::string> parameter_names;
  std::vector<std::string> examiner_ids;
  std::vector<std::string> item_ids;
  std::size_t n_chains = 0;
  std::size_t retained = 0;  // per chain
  std::vector<double> data;  // [chain][iteration][parameter]
  std::vector<Diagnostic> diagnostics;
  std::vector<std::string> warnings;
  double accept_theta = 0.0;
  double accept_zeta = 0.0;
  double accept_hyper = 0.0;
  SamplerConfig sampler_config;
  ModelConfig model_config;

  std::size_t n_parameters() const { return parameter_names.size(); }

  double value(std::size_t chain, std::size_t iteration, std::size_t param) const {
    return data[(chain * retained + iteration) * n_parameters() + param];
  }

  /// log of the value for positivity-constrained parameters, identity
  /// otherwise.
  double unconstrained_value(std::size_t chain, std::size_t iteration,
                             std::size_t param) const;

  /// All retained draws of one parameter, chains concatenated in order.
  std::vector<double> pooled(std::size_t param) const;

  std::size_t param_index(const std::string& name) const;
  std::size_t theta_offset() const { return 0; }
  std::size_t zeta_offset() const { return examiner_ids.size(); }
  std::size_t sigma_zeta_index() const { return examiner_ids.size() + item_ids.size(); }
  std::size_t omega_index() const { return sigma_zeta_index() + 1; }
  std::size_t alpha_index() const { return sigma_zeta_index() + 2; }
};

/// Robbins-Monro step-size adaptation toward a target acceptance rate.
/// Adapted only while `adapting`; the step freezes afterwards.
class AdaptiveStep {
 public:
  AdaptiveStep(double initial_step, double target, double min_step, double max_step);

  double step() const { return step_; }

  /// Record one proposal with acceptance probability `accept_prob`.
  void update(double accept_prob, bool adapting);

 private:
  double step_;
  double log_step_;
  double target_;
  double log_min_;
  double log_max_;
  std::uint64_t count_ = 0;
};

/// Metropolis accept/reject for a symmetric proposal.
inline bool mh_accept(Rng& rng, double log_ratio) {
  if (log_ratio >= 0.0) return true;
  return std::log(rng.uniform01()) < log_ratio;
}

/// Fit the latent model by adaptive Metropolis-within-Gibbs. Deterministic
/// given the seed; chains run independently (optionally in parallel) on
/// streams split from the seed. The dataset must be deduplicated and
/// policy-applied, with at least 2 examiners and 2 items.
PosteriorDraws fit(const StudyDataset& dataset, const ModelConfig& model_config,
                   const SamplerConfig& sampler_config, ValidationLog* log = nullptr);

/// Split R-hat (classic between/within formula on split halves) and bulk
/// effective sample size (autocorrelation sums truncated at the first
/// negative pair) for every parameter.
std::vector<Diagnostic> diagnostics(const PosteriorDraws& draws);

/// Pooled posterior mean, sd, and equal-tailed interval at `level` for every
/// parameter. When the model was configured with center_items, zeta draws
/// are re-centered per draw (their mean moves into the theta summaries).
std::vector<ParameterSummary> summarize(const PosteriorDraws& draws, double level = 0.95);

/// Columnar CSV persistence: chain,iteration,parameter,value with
/// round-trippable formatting.
void save_draws_csv(const PosteriorDraws& draws, const std::string& path);
PosteriorDraws load_draws_csv(const std::string& path);

/// Compact binary cache with a version header; bit-exact round trip.
void save_draws_cache(const PosteriorDraws& draws, const std::string& path);
PosteriorDraws load_draws_cache(const std::string& path);

// shared by diagnostics and summaries
double quantile_type7(std::vector<double> sorted_or_not, double p);
double split_rhat_of(const std::vector<std::vector<double>>& chains);
double ess_bulk_of(const std::vector<std::vector<double>>& chains);

}  // namespace bbr

#endif  // BBR_SAMPLER_HPP
