#include "variance_decomp.hpp"

#include <unordered_map>

namespace bbr {

std::optional<double> variance_ratio(double examiner_var, double item_var) {
  const double total = examiner_var + item_var;
  if (total <= 0.0) return std::nullopt;
  return examiner_var / total;
}

namespace detail {

namespace {

// mean + variance with both the n-1 and n denominators; a singleton (or
// empty) sample has zero variance under both.
struct Var {
  double sample = 0.0;
  double population = 0.0;
};

Var variances(const std::vector<double>& xs) {
  Var v;
  const std::size_t n = xs.size();
  if (n < 2) return v;
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  v.sample = ss / static_cast<double>(n - 1);
  v.population = ss / static_cast<double>(n);
  return v;
}

}  // namespace

IndexedDecomp decompose_indexed(std::size_t n_examiners, std::size_t n_items,
                                const std::vector<std::int32_t>& resp_examiner,
                                const std::vector<std::int32_t>& resp_item,
                                const std::vector<std::uint8_t>& inconclusive) {
  std::vector<double> e_count(n_examiners, 0.0), e_inc(n_examiners, 0.0);
  std::vector<double> i_count(n_items, 0.0), i_inc(n_items, 0.0);
  for (std::size_t k = 0; k < resp_examiner.size(); ++k) {
    e_count[resp_examiner[k]] += 1.0;
    i_count[resp_item[k]] += 1.0;
    if (inconclusive[k]) {
      e_inc[resp_examiner[k]] += 1.0;
      i_inc[resp_item[k]] += 1.0;
    }
  }

  IndexedDecomp out;
  out.examiner_props.resize(n_examiners);
  out.item_props.resize(n_items);
  for (std::size_t i = 0; i < n_examiners; ++i) {
    if (e_count[i] <= 0.0)
      throw Error(ErrorCode::InvalidArgument, "examiner with no responses in decomposition");
    out.examiner_props[i] = e_inc[i] / e_count[i];
  }
  for (std::size_t j = 0; j < n_items; ++j) {
    if (i_count[j] <= 0.0)
      throw Error(ErrorCode::InvalidArgument, "item with no responses in decomposition");
    out.item_props[j] = i_inc[j] / i_count[j];
  }

  const Var ev = variances(out.examiner_props);
  const Var iv = variances(out.item_props);
  out.examiner_var = ev.sample;
  out.item_var = iv.sample;
  out.ratio = variance_ratio(ev.sample, iv.sample);
  out.examiner_var_n = ev.population;
  out.item_var_n = iv.population;
  out.ratio_n = variance_ratio(ev.population, iv.population);
  return out;
}

}  // namespace detail

DecompositionResult decompose(const StudyDataset& dataset) {
  std::unordered_map<std::string, std::int32_t> e_index, i_index;
  for (std::size_t i = 0; i < dataset.examiners.size(); ++i)
    e_index.emplace(dataset.examiners[i], static_cast<std::int32_t>(i));
  for (std::size_t j = 0; j < dataset.items.size(); ++j)
    i_index.emplace(dataset.items[j], static_cast<std::int32_t>(j));

  std::vector<std::int32_t> re, ri;
  std::vector<std::uint8_t> inc;
  re.reserve(dataset.responses.size());
  ri.reserve(dataset.responses.size());
  inc.reserve(dataset.responses.size());
  for (const auto& r : dataset.responses) {
    re.push_back(e_index.at(r.examiner_id));
    ri.push_back(i_index.at(r.item_id));
    inc.push_back(r.conclusive() ? 0 : 1);
  }

  const auto idx = detail::decompose_indexed(dataset.examiners.size(),
                                             dataset.items.size(), re, ri, inc);
  DecompositionResult out;
  for (std::size_t i = 0; i < dataset.examiners.size(); ++i)
    out.examiner_props[dataset.examiners[i]] = idx.examiner_props[i];
  for (std::size_t j = 0; j < dataset.items.size(); ++j)
    out.item_props[dataset.items[j]] = idx.item_props[j];
  out.examiner_var = idx.examiner_var;
  out.item_var = idx.item_var;
  out.ratio = idx.ratio;
  out.examiner_var_n = idx.examiner_var_n;
  out.item_var_n = idx.item_var_n;
  out.ratio_n = idx.ratio_n;
  return out;
}

std::map<std::string, DecompositionResult> decompose_by_group(
    const StudyDataset& dataset, const std::map<std::string, std::string>& examiner_group) {
  std::map<std::string, std::vector<std::string>> members;
  for (const auto& e : dataset.examiners) {
    auto it = examiner_group.find(e);
    if (it == examiner_group.end())
      throw Error(ErrorCode::InvalidArgument, "examiner " + e + " has no group assignment");
    members[it->second].push_back(e);
  }

  std::map<std::string, DecompositionResult> out;
  for (const auto& [group, keep] : members)
    out.emplace(group, decompose(filter_to_examiners(dataset, keep)));
  return out;
}

}  // namespace bbr
