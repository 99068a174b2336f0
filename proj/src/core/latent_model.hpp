#ifndef BBR_LATENT_MODEL_HPP
#define BBR_LATENT_MODEL_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "rng.hpp"
#include "study_data.hpp"

namespace bbr {

struct ModelConfig {
  double hyperprior_scale = 1.0;  // scale of the half-t3 / t3 hyperpriors
  std::uint64_t seed = 0;
  bool center_items = true;
};

/// Latent tendencies and hyperparameters. theta and zeta are log-odds
/// contributions per examiner / item; sigma_zeta and omega must be positive.
struct Parameters {
  std::vector<double> theta;
  std::vector<double> zeta;
  double sigma_zeta = 1.0;
  double omega = 1.0;
  double alpha = 0.0;
};

/// Index-compressed view of a study used by the likelihood and the sampler.
/// Response k was made by examiner resp_examiner[k] on item resp_item[k];
/// conclusive[k] is the X indicator (1 = Identification or Exclusion).
struct ModelData {
  std::vector<std::string> examiner_ids;
  std::vector<std::string> item_ids;
  std::vector<GroundTruth> item_truth;
  std::vector<std::int32_t> resp_examiner;
  std::vector<std::int32_t> resp_item;
  std::vector<std::uint8_t> conclusive;
  std::vector<std::vector<std::int32_t>> by_examiner;  // response indices
  std::vector<std::vector<std::int32_t>> by_item;

  static ModelData from_dataset(const StudyDataset& dataset);

  std::size_t n_examiners() const { return examiner_ids.size(); }
  std::size_t n_items() const { return item_ids.size(); }
  std::size_t n_responses() const { return conclusive.size(); }
};

/// P(conclusive) = 1/(1 + exp(-(theta + zeta))).
double prob_conclusive(double theta_i, double zeta_j);

/// Sum of prior log densities: skew-normal theta block, normal zeta block,
/// half-t3 on sigma_zeta and omega, t3 on alpha. -inf outside the support.
double log_prior(const Parameters& params, const ModelConfig& config);

/// Bernoulli log likelihood over all responses, evaluated in log space.
double log_likelihood(const Parameters& params, const ModelData& data);

/// Gradient of log_prior + log_likelihood with respect to the constrained
/// parameters, laid out to mirror Parameters.
struct Gradient {
  std::vector<double> theta;
  std::vector<double> zeta;
  double sigma_zeta = 0.0;
  double omega = 0.0;
  double alpha = 0.0;
};

Gradient log_posterior_gradient(const Parameters& params, const ModelData& data,
                                const ModelConfig& config);

/// Draw X ~ Bernoulli(prob_conclusive) for every assigned pair. Consumes one
/// uniform per pair in (examiner, assignment) order.
std::vector<std::uint8_t> simulate_conclusive(const Parameters& params,
                                              const std::vector<std::int32_t>& resp_examiner,
                                              const std::vector<std::int32_t>& resp_item,
                                              Rng& rng);

/// Specification of a synthetic study: who answers what, with which latent
/// tendencies. Round-trips through a documented JSON layout.
struct SimulationSpec {
  std::vector<std::string> examiner_ids;
  std::vector<double> theta;
  std::vector<std::string> item_ids;
  std::vector<GroundTruth> item_truth;
  std::vector<double> zeta;
  double sigma_zeta = 1.0;
  double omega = 1.0;
  double alpha = 0.0;
  // empty = fully crossed
  std::map<std::string, std::vector<std::string>> assignment;

  static SimulationSpec from_json_text(const std::string& text);
  std::string to_json_text() const;
};

/// Simulate a full study. Conclusive responses are labeled with the
/// ground-truth-correct conclusive category (Identification on SS items,
/// Exclusion on DS items); the model does not simulate false conclusives.
StudyDataset simulate_responses(const SimulationSpec& spec, std::uint64_t seed);

}  // namespace bbr

#endif  // BBR_LATENT_MODEL_HPP
