#ifndef BBR_VARIANCE_DECOMP_HPP
#define BBR_VARIANCE_DECOMP_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "study_data.hpp"

namespace bbr {

/// Per-examiner and per-item inconclusive proportions plus the variance
/// ratio r = var_examiner / (var_examiner + var_item). Variances use the
/// n-1 sample denominator; the n-denominator variant is carried alongside
/// so reports can show the sensitivity to that convention.
struct DecompositionResult {
  std::map<std::string, double> examiner_props;
  std::map<std::string, double> item_props;
  double examiner_var = 0.0;
  double item_var = 0.0;
  std::optional<double> ratio;
  double examiner_var_n = 0.0;
  double item_var_n = 0.0;
  std::optional<double> ratio_n;
};

/// Ratio of examiner variance to total variance; absent when both are zero.
std::optional<double> variance_ratio(double examiner_var, double item_var);

/// Decompose inconclusive variability into examiner and item components.
/// Callers normally filter to a single ground-truth class first; any
/// non-conclusive response (Inconclusive or Unsuitable) counts as
/// inconclusive here.
DecompositionResult decompose(const StudyDataset& dataset);

/// decompose() applied to each examiner subgroup separately; item
/// proportions are recomputed within the subgroup's responses.
std::map<std::string, DecompositionResult> decompose_by_group(
    const StudyDataset& dataset, const std::map<std::string, std::string>& examiner_group);

namespace detail {

/// Index-based core shared with the posterior-predictive simulator:
/// proportions and variances from (examiner index, item index, indicator)
/// triples. Indicator is 1 for an inconclusive response.
struct IndexedDecomp {
  std::vector<double> examiner_props;
  std::vector<double> item_props;
  double examiner_var = 0.0;
  double item_var = 0.0;
  std::optional<double> ratio;
  double examiner_var_n = 0.0;
  double item_var_n = 0.0;
  std::optional<double> ratio_n;
};

IndexedDecomp decompose_indexed(std::size_t n_examiners, std::size_t n_items,
                                const std::vector<std::int32_t>& resp_examiner,
                                const std::vector<std::int32_t>& resp_item,
                                const std::vector<std::uint8_t>& inconclusive);

}  // namespace detail

}  // namespace bbr

#endif  // BBR_VARIANCE_DECOMP_HPP
