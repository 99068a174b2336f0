#include "latent_model.hpp"

#include <cmath>
#include <limits>
#include <unordered_map>

#include <json.hpp>

#include "dists.hpp"

namespace bbr {

ModelData ModelData::from_dataset(const StudyDataset& dataset) {
  ModelData d;
  d.examiner_ids = dataset.examiners;
  d.item_ids = dataset.items;
  d.item_truth.reserve(dataset.items.size());
  for (const auto& item : dataset.items) d.item_truth.push_back(dataset.truth_of(item));

  std::unordered_map<std::string, std::int32_t> e_index, i_index;
  for (std::size_t i = 0; i < d.examiner_ids.size(); ++i)
    e_index.emplace(d.examiner_ids[i], static_cast<std::int32_t>(i));
  for (std::size_t j = 0; j < d.item_ids.size(); ++j)
    i_index.emplace(d.item_ids[j], static_cast<std::int32_t>(j));

  d.by_examiner.resize(d.examiner_ids.size());
  d.by_item.resize(d.item_ids.size());
  for (const auto& r : dataset.responses) {
    const auto k = static_cast<std::int32_t>(d.resp_examiner.size());
    const auto ei = e_index.at(r.examiner_id);
    const auto ij = i_index.at(r.item_id);
    d.resp_examiner.push_back(ei);
    d.resp_item.push_back(ij);
    d.conclusive.push_back(r.conclusive() ? 1 : 0);
    d.by_examiner[ei].push_back(k);
    d.by_item[ij].push_back(k);
  }
  return d;
}

double prob_conclusive(double theta_i, double zeta_j) {
  return logistic(theta_i + zeta_j);
}

double log_prior(const Parameters& params, const ModelConfig& config) {
  if (!(params.sigma_zeta > 0.0) || !(params.omega > 0.0))
    return -std::numeric_limits<double>::infinity();
  const double scale = config.hyperprior_scale;
  double lp = half_t3_logpdf(params.sigma_zeta, scale) +
              half_t3_logpdf(params.omega, scale) +
              student_t3_logpdf(params.alpha, scale);
  for (double t : params.theta) lp += skew_normal_logpdf(t, params.omega, params.alpha);
  for (double z : params.zeta) lp += normal_logpdf(z, 0.0, params.sigma_zeta);
  return lp;
}

double log_likelihood(const Parameters& params, const ModelData& data) {
  double ll = 0.0;
  for (std::size_t k = 0; k < data.n_responses(); ++k) {
    const double eta = params.theta[data.resp_examiner[k]] + params.zeta[data.resp_item[k]];
    // log pi = -softplus(-eta), log(1-pi) = -softplus(eta)
    ll -= data.conclusive[k] ? softplus(-eta) : softplus(eta);
  }
  return ll;
}

Gradient log_posterior_gradient(const Parameters& params, const ModelData& data,
                                const ModelConfig& config) {
  const std::size_t n_e = params.theta.size();
  const std::size_t n_i = params.zeta.size();
  const double scale = config.hyperprior_scale;
  const double omega = params.omega;
  const double alpha = params.alpha;
  const double sz = params.sigma_zeta;

  Gradient g;
  g.theta.assign(n_e, 0.0);
  g.zeta.assign(n_i, 0.0);

  // likelihood: d/d eta = x - pi, routed to both endpoints of the response
  for (std::size_t k = 0; k < data.n_responses(); ++k) {
    const double eta = params.theta[data.resp_examiner[k]] + params.zeta[data.resp_item[k]];
    const double resid = static_cast<double>(data.conclusive[k]) - logistic(eta);
    g.theta[data.resp_examiner[k]] += resid;
    g.zeta[data.resp_item[k]] += resid;
  }

  // theta prior: skew normal in x, omega, alpha
  double d_omega = 0.0;
  double d_alpha = 0.0;
  for (std::size_t i = 0; i < n_e; ++i) {
    const double t = params.theta[i];
    const double mills = inv_mills(alpha * t / omega);
    g.theta[i] += -t / (omega * omega) + (alpha / omega) * mills;
    d_omega += -1.0 / omega + t * t / (omega * omega * omega) -
               mills * alpha * t / (omega * omega);
    d_alpha += mills * t / omega;
  }

  // zeta prior in x and sigma_zeta
  double d_sigma = 0.0;
  for (std::size_t j = 0; j < n_i; ++j) {
    const double z = params.zeta[j];
    g.zeta[j] += -z / (sz * sz);
    d_sigma += -1.0 / sz + z * z / (sz * sz * sz);
  }

  const double s2 = 3.0 * scale * scale;
  d_sigma += -4.0 * sz / (s2 + sz * sz);      // half-t3 on sigma_zeta
  d_omega += -4.0 * omega / (s2 + omega * omega);  // half-t3 on omega
  d_alpha += -4.0 * alpha / (s2 + alpha * alpha);  // t3 on alpha

  g.sigma_zeta = d_sigma;
  g.omega = d_omega;
  g.alpha = d_alpha;
  return g;
}

std::vector<std::uint8_t> simulate_conclusive(const Parameters& params,
                                              const std::vector<std::int32_t>& resp_examiner,
                                              const std::vector<std::int32_t>& resp_item,
                                              Rng& rng) {
  std::vector<std::uint8_t> x(resp_examiner.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double p = prob_conclusive(params.theta[resp_examiner[k]],
                                     params.zeta[resp_item[k]]);
    x[k] = rng.bernoulli(p) ? 1 : 0;
  }
  return x;
}

SimulationSpec SimulationSpec::from_json_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("parameter JSON: ") + e.what());
  }
  SimulationSpec spec;
  try {
    spec.examiner_ids = j.at("examiner_ids").get<std::vector<std::string>>();
    spec.theta = j.at("theta").get<std::vector<double>>();
    spec.item_ids = j.at("item_ids").get<std::vector<std::string>>();
    spec.zeta = j.at("zeta").get<std::vector<double>>();
    for (const auto& gt : j.at("item_ground_truth").get<std::vector<std::string>>()) {
      if (gt == "SS") spec.item_truth.push_back(GroundTruth::SameSource);
      else if (gt == "DS") spec.item_truth.push_back(GroundTruth::DifferentSource);
      else throw Error(ErrorCode::InvalidArgument, "item_ground_truth must be SS or DS");
    }
    spec.sigma_zeta = j.value("sigma_zeta", 1.0);
    spec.omega = j.value("omega", 1.0);
    spec.alpha = j.value("alpha", 0.0);
    if (j.contains("assignment"))
      spec.assignment =
          j.at("assignment").get<std::map<std::string, std::vector<std::string>>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("parameter JSON: ") + e.what());
  }
  if (spec.theta.size() != spec.examiner_ids.size() ||
      spec.zeta.size() != spec.item_ids.size() ||
      spec.item_truth.size() != spec.item_ids.size())
    throw Error(ErrorCode::InvalidArgument,
                "parameter JSON: theta/zeta/ground truth lengths must match the id lists");
  return spec;
}

std::string SimulationSpec::to_json_text() const {
  nlohmann::json j;
  j["examiner_ids"] = examiner_ids;
  j["theta"] = theta;
  j["item_ids"] = item_ids;
  std::vector<std::string> gts;
  for (auto gt : item_truth) gts.emplace_back(to_string(gt));
  j["item_ground_truth"] = gts;
  j["zeta"] = zeta;
  j["sigma_zeta"] = sigma_zeta;
  j["omega"] = omega;
  j["alpha"] = alpha;
  if (!assignment.empty()) j["assignment"] = assignment;
  return j.dump(2);
}

StudyDataset simulate_responses(const SimulationSpec& spec, std::uint64_t seed) {
  std::unordered_map<std::string, std::size_t> i_index;
  for (std::size_t j = 0; j < spec.item_ids.size(); ++j) i_index.emplace(spec.item_ids[j], j);

  Rng rng(seed);
  StudyDataset ds;
  std::uint64_t seq = 0;
  for (std::size_t i = 0; i < spec.examiner_ids.size(); ++i) {
    const std::vector<std::string>* items = &spec.item_ids;
    std::vector<std::string> assigned;
    if (!spec.assignment.empty()) {
      auto it = spec.assignment.find(spec.examiner_ids[i]);
      if (it == spec.assignment.end()) continue;
      assigned = it->second;
      items = &assigned;
    }
    for (const auto& item : *items) {
      auto jt = i_index.find(item);
      if (jt == i_index.end())
        throw Error(ErrorCode::InvalidArgument, "assignment references unknown item " + item);
      const std::size_t j = jt->second;
      const double p = prob_conclusive(spec.theta[i], spec.zeta[j]);
      Response r;
      r.examiner_id = spec.examiner_ids[i];
      r.item_id = item;
      r.ground_truth = spec.item_truth[j];
      r.sequence = seq++;
      if (rng.bernoulli(p)) {
        r.canonical = r.ground_truth == GroundTruth::SameSource
                          ? Conclusion::Identification
                          : Conclusion::Exclusion;
      } else {
        r.canonical = Conclusion::Inconclusive;
      }
      r.raw_conclusion = to_string(r.canonical);
      ds.responses.push_back(std::move(r));
    }
  }
  if (ds.responses.empty())
    throw Error(ErrorCode::InvalidArgument, "simulation produced no responses");

  // rosters in response order
  std::unordered_map<std::string, bool> seen_e, seen_i;
  for (const auto& r : ds.responses) {
    if (!seen_e.count(r.examiner_id)) {
      seen_e.emplace(r.examiner_id, true);
      ds.examiners.push_back(r.examiner_id);
    }
    if (!seen_i.count(r.item_id)) {
      seen_i.emplace(r.item_id, true);
      ds.items.push_back(r.item_id);
      ds.item_truth.emplace(r.item_id, r.ground_truth);
    }
  }
  return ds;
}

}  // namespace bbr
