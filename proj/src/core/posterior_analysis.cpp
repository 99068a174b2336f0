#include "posterior_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <mutex>
#include <thread>
#include <unordered_map>

#include "dists.hpp"

namespace bbr {

const char* to_string(RatioBasis b) {
  return b == RatioBasis::ScaleParams ? "scale" : "variance";
}

RatioEstimate model_ratio(const PosteriorDraws& draws, RatioBasis basis) {
  const std::size_t sz = draws.sigma_zeta_index();
  const std::size_t om = draws.omega_index();
  const std::size_t al = draws.alpha_index();

  std::vector<double> ratios;
  ratios.reserve(draws.n_chains * draws.retained);
  double sum_v_theta = 0.0, sum_v_zeta = 0.0;
  for (std::size_t c = 0; c < draws.n_chains; ++c) {
    for (std::size_t it = 0; it < draws.retained; ++it) {
      const double sigma_zeta = draws.value(c, it, sz);
      const double omega = draws.value(c, it, om);
      const double alpha = draws.value(c, it, al);
      const double sigma_theta = std::sqrt(skew_normal_moments(omega, alpha).variance);
      double v_theta = sigma_theta, v_zeta = sigma_zeta;
      if (basis == RatioBasis::VarianceParams) {
        v_theta *= v_theta;
        v_zeta *= v_zeta;
      }
      ratios.push_back(v_theta / (v_theta + v_zeta));
      sum_v_theta += v_theta;
      sum_v_zeta += v_zeta;
    }
  }

  RatioEstimate est;
  est.basis = basis;
  double mean = 0.0;
  for (double r : ratios) mean += r;
  est.point = mean / static_cast<double>(ratios.size());
  est.lower = quantile_type7(ratios, 0.025);
  est.upper = quantile_type7(ratios, 0.975);
  est.point_of_means = sum_v_theta / (sum_v_theta + sum_v_zeta);
  return est;
}

PredictiveInterval predictive_ratio_interval(const PosteriorDraws& draws,
                                             const StudyDataset& dataset, int n_sims,
                                             std::uint64_t seed, int threads) {
  if (n_sims < 1) throw Error(ErrorCode::InvalidArgument, "n_sims must be >= 1");

  // map the dataset's responses onto the draws' parameter indices
  std::unordered_map<std::string, std::int32_t> e_index, i_index;
  for (std::size_t i = 0; i < draws.examiner_ids.size(); ++i)
    e_index.emplace(draws.examiner_ids[i], static_cast<std::int32_t>(i));
  for (std::size_t j = 0; j < draws.item_ids.size(); ++j)
    i_index.emplace(draws.item_ids[j], static_cast<std::int32_t>(j));
  std::vector<std::int32_t> resp_examiner, resp_item;
  resp_examiner.reserve(dataset.responses.size());
  resp_item.reserve(dataset.responses.size());
  for (const auto& r : dataset.responses) {
    auto ei = e_index.find(r.examiner_id);
    auto ij = i_index.find(r.item_id);
    if (ei == e_index.end() || ij == i_index.end())
      throw Error(ErrorCode::InvalidArgument,
                  "dataset does not match the fitted rosters (found " + r.examiner_id +
                      " x " + r.item_id + ")");
    resp_examiner.push_back(ei->second);
    resp_item.push_back(ij->second);
  }

  const auto observed = decompose(dataset);
  if (!observed.ratio)
    throw Error(ErrorCode::UndefinedRatio,
                "observed dataset has an undefined variance ratio");

  const std::size_t total = draws.n_chains * draws.retained;
  const std::size_t sims = std::min<std::size_t>(static_cast<std::size_t>(n_sims), total);
  const std::size_t n_e = draws.examiner_ids.size();
  const std::size_t n_i = draws.item_ids.size();

  // one slot per simulation; NaN marks an undefined simulated ratio
  std::vector<double> simulated(sims, std::numeric_limits<double>::quiet_NaN());
  auto run_sim = [&](std::size_t t) {
    const std::size_t pooled_index = t * total / sims;  // even striding
    const std::size_t chain = pooled_index / draws.retained;
    const std::size_t iter = pooled_index % draws.retained;
    Parameters params;
    params.theta.resize(n_e);
    params.zeta.resize(n_i);
    for (std::size_t i = 0; i < n_e; ++i) params.theta[i] = draws.value(chain, iter, i);
    for (std::size_t j = 0; j < n_i; ++j)
      params.zeta[j] = draws.value(chain, iter, draws.zeta_offset() + j);

    Rng rng = Rng(seed).split(t);
    const auto x = simulate_conclusive(params, resp_examiner, resp_item, rng);
    std::vector<std::uint8_t> inconclusive(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) inconclusive[k] = x[k] ? 0 : 1;
    const auto dec =
        detail::decompose_indexed(n_e, n_i, resp_examiner, resp_item, inconclusive);
    if (dec.ratio) simulated[t] = *dec.ratio;
  };

  int n_threads = threads;
  if (n_threads <= 0) {
    if (const char* env = std::getenv("BBR_THREADS")) n_threads = std::atoi(env);
    if (n_threads <= 0) {
      const unsigned hw = std::thread::hardware_concurrency();
      n_threads = hw > 0 ? static_cast<int>(hw) : 1;
    }
  }
  n_threads = std::min<int>(n_threads, static_cast<int>(sims));
  if (n_threads <= 1) {
    for (std::size_t t = 0; t < sims; ++t) run_sim(t);
  } else {
    std::vector<std::thread> workers;
    std::mutex m;
    std::size_t next = 0;
    for (int w = 0; w < n_threads; ++w) {
      workers.emplace_back([&] {
        for (;;) {
          std::size_t t;
          {
            std::lock_guard<std::mutex> lock(m);
            if (next >= sims) return;
            t = next++;
          }
          run_sim(t);
        }
      });
    }
    for (auto& t : workers) t.join();
  }

  std::vector<double> kept;
  kept.reserve(sims);
  for (double r : simulated)
    if (!std::isnan(r)) kept.push_back(r);

  PredictiveInterval out;
  out.observed = *observed.ratio;
  out.n_used = kept.size();
  out.n_dropped = sims - kept.size();
  if (kept.empty()) {
    out.predicted = out.lower = out.upper = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  double mean = 0.0;
  for (double r : kept) mean += r;
  out.predicted = mean / static_cast<double>(kept.size());
  out.lower = quantile_type7(kept, 0.025);
  out.upper = quantile_type7(kept, 0.975);
  return out;
}

FailureRateRow adjusted_failure_row(GroundTruth gt, const std::string& group,
                                    const ContingencyTable& table,
                                    std::optional<double> obs_ratio,
                                    const RatioEstimate& model) {
  const RateSet correct = rates(table, RateOption::Correct);
  const RateSet incorrect = rates(table, RateOption::Incorrect);
  const bool ss = gt == GroundTruth::SameSource;
  const auto& lo = ss ? correct.fnr : correct.fpr;
  const auto& hi = ss ? incorrect.fnr : incorrect.fpr;

  FailureRateRow row;
  row.ground_truth = to_string(gt);
  row.group = group;
  row.obs_ratio = obs_ratio;
  row.model = model;
  if (lo) row.inc_correct = lo->value();
  if (hi) row.inc_incorrect = hi->value();
  if (lo && hi) {
    row.model_failure = failure_rate(lo->value(), hi->value(), model.point);
    if (obs_ratio) row.obs_failure = failure_rate(lo->value(), hi->value(), *obs_ratio);
  }
  return row;
}

}  // namespace bbr
