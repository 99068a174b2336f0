#include "bbr.h"

#include <cstdlib>
#include <cstring>
#include <iostream>
#include <memory>
#include <string>

#include <json.hpp>

#include "../core/error_rates.hpp"
#include "../core/latent_model.hpp"
#include "../core/posterior_analysis.hpp"
#include "../core/report.hpp"
#include "../core/sampler.hpp"
#include "../core/study_data.hpp"
#include "../core/variance_decomp.hpp"

struct bbr_mapping {
  bbr::ConclusionMapping mapping;
};

struct bbr_dataset {
  bbr::StudyDataset dataset;
  bbr::ValidationLog log;
};

struct bbr_draws {
  bbr::PosteriorDraws draws;
};

namespace {

thread_local std::string t_last_error;

bbr_status status_of(bbr::ErrorCode code) {
  using bbr::ErrorCode;
  switch (code) {
    case ErrorCode::Io: return BBR_ERR_IO;
    case ErrorCode::MissingColumn: return BBR_ERR_MISSING_COLUMN;
    case ErrorCode::UnmappedLabel: return BBR_ERR_UNMAPPED_LABEL;
    case ErrorCode::InconsistentGroundTruth: return BBR_ERR_INCONSISTENT_GROUND_TRUTH;
    case ErrorCode::EmptyDataset: return BBR_ERR_EMPTY_DATASET;
    case ErrorCode::AllResponsesRemoved: return BBR_ERR_ALL_RESPONSES_REMOVED;
    case ErrorCode::MissingBasis: return BBR_ERR_MISSING_BASIS;
    case ErrorCode::UndefinedRatio: return BBR_ERR_UNDEFINED_RATIO;
    case ErrorCode::Domain: return BBR_ERR_DOMAIN;
    case ErrorCode::InvalidArgument: return BBR_ERR_INVALID_ARGUMENT;
    case ErrorCode::MissingPrerequisite: return BBR_ERR_MISSING_PREREQUISITE;
    case ErrorCode::Numeric: return BBR_ERR_NUMERIC;
    case ErrorCode::Internal: return BBR_ERR_INTERNAL;
  }
  return BBR_ERR_INTERNAL;
}

template <typename Fn>
bbr_status guarded(Fn&& fn) {
  try {
    fn();
    t_last_error.clear();
    return BBR_OK;
  } catch (const bbr::Error& e) {
    t_last_error = e.what();
    return status_of(e.code());
  } catch (const std::exception& e) {
    t_last_error = e.what();
    return BBR_ERR_INTERNAL;
  } catch (...) {
    t_last_error = "unknown error";
    return BBR_ERR_INTERNAL;
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void require(bool ok, const char* what) {
  if (!ok) throw bbr::Error(bbr::ErrorCode::InvalidArgument, what);
}

bbr::SamplerConfig sampler_config_from_json(const std::string& text,
                                            bbr::ModelConfig& model_config) {
  bbr::SamplerConfig sc;
  if (text.empty()) return sc;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw bbr::Error(bbr::ErrorCode::InvalidArgument,
                     std::string("fit config JSON: ") + e.what());
  }
  sc.chains = j.value("chains", sc.chains);
  sc.iterations = j.value("iterations", sc.iterations);
  sc.warmup = j.value("warmup", sc.warmup);
  sc.seed = j.value("seed", sc.seed);
  sc.target_accept = j.value("target_accept", sc.target_accept);
  sc.threads = j.value("threads", sc.threads);
  sc.progress = j.value("progress", sc.progress);
  sc.hyper_updates_per_sweep = j.value("hyper_updates_per_sweep", sc.hyper_updates_per_sweep);
  model_config.hyperprior_scale = j.value("hyperprior_scale", model_config.hyperprior_scale);
  model_config.center_items = j.value("center_items", model_config.center_items);
  model_config.seed = sc.seed;
  return sc;
}

}  // namespace

extern "C" {

const char* bbr_version(void) { return "0.1.0"; }

const char* bbr_last_error(void) { return t_last_error.c_str(); }

void bbr_string_free(char* s) { std::free(s); }

bbr_status bbr_mapping_builtin(const char* name, bbr_mapping** out) {
  return guarded([&] {
    require(name && out, "mapping_builtin: null argument");
    *out = new bbr_mapping{bbr::ConclusionMapping::builtin(name)};
  });
}

bbr_status bbr_mapping_read(const char* path, bbr_mapping** out) {
  return guarded([&] {
    require(path && out, "mapping_read: null argument");
    *out = new bbr_mapping{bbr::ConclusionMapping::read_file(path)};
  });
}

void bbr_mapping_free(bbr_mapping* mapping) { delete mapping; }

bbr_status bbr_dataset_read_csv(const char* path, const bbr_mapping* mapping,
                                int verbose, bbr_dataset** out) {
  return guarded([&] {
    require(path && mapping && out, "dataset_read_csv: null argument");
    auto holder = std::make_unique<bbr_dataset>();
    holder->dataset = bbr::ingest_csv(path, mapping->mapping, &holder->log);
    if (verbose) holder->log.print(std::cerr);
    *out = holder.release();
  });
}

bbr_status bbr_dataset_deduplicate(const bbr_dataset* dataset, bbr_dataset** out) {
  return guarded([&] {
    require(dataset && out, "dataset_deduplicate: null argument");
    auto holder = std::make_unique<bbr_dataset>();
    holder->log = dataset->log;
    holder->dataset = bbr::deduplicate_first_response(dataset->dataset, &holder->log);
    *out = holder.release();
  });
}

bbr_status bbr_dataset_apply_policy(const bbr_dataset* dataset, int pool_unsuitable,
                                    int ground_truth_filter, bbr_dataset** out) {
  return guarded([&] {
    require(dataset && out, "dataset_apply_policy: null argument");
    bbr::AnalysisPolicy policy;
    policy.unsuitable_handling = pool_unsuitable
                                     ? bbr::AnalysisPolicy::UnsuitableHandling::PoolAsInconclusive
                                     : bbr::AnalysisPolicy::UnsuitableHandling::Exclude;
    if (ground_truth_filter == 0) policy.ground_truth_filter = bbr::GroundTruth::SameSource;
    else if (ground_truth_filter == 1)
      policy.ground_truth_filter = bbr::GroundTruth::DifferentSource;
    else
      require(ground_truth_filter == -1, "ground_truth_filter must be -1, 0, or 1");
    auto holder = std::make_unique<bbr_dataset>();
    holder->log = dataset->log;
    holder->dataset = bbr::apply_policy(dataset->dataset, policy, &holder->log);
    *out = holder.release();
  });
}

bbr_status bbr_dataset_filter_group(const bbr_dataset* dataset, const bbr_dataset* auxiliary,
                                    int group, bbr_dataset** out) {
  return guarded([&] {
    require(dataset && out, "dataset_filter_group: null argument");
    require(group == 0 || group == 1, "group must be 0 or 1");
    const auto groups = bbr::group_examiners(dataset->dataset,
                                             auxiliary ? &auxiliary->dataset : nullptr);
    const auto wanted = group == 0 ? bbr::ExaminerGroup::MadeIndividualElims
                                   : bbr::ExaminerGroup::NoIndividualElims;
    std::vector<std::string> keep;
    for (const auto& [examiner, g] : groups)
      if (g == wanted) keep.push_back(examiner);
    auto holder = std::make_unique<bbr_dataset>();
    holder->log = dataset->log;
    holder->dataset = bbr::filter_to_examiners(dataset->dataset, keep);
    *out = holder.release();
  });
}

bbr_status bbr_dataset_counts(const bbr_dataset* dataset, uint64_t* n_examiners,
                              uint64_t* n_items, uint64_t* n_responses) {
  return guarded([&] {
    require(dataset != nullptr, "dataset_counts: null dataset");
    if (n_examiners) *n_examiners = dataset->dataset.examiners.size();
    if (n_items) *n_items = dataset->dataset.items.size();
    if (n_responses) *n_responses = dataset->dataset.responses.size();
  });
}

bbr_status bbr_dataset_summary_json(const bbr_dataset* dataset, char** out) {
  return guarded([&] {
    require(dataset && out, "dataset_summary_json: null argument");
    nlohmann::json j = bbr::dataset_summary_json(dataset->dataset);
    j["validation"] = bbr::validation_json(dataset->log);
    *out = dup_string(j.dump(2));
  });
}

bbr_status bbr_groups_json(const bbr_dataset* dataset, const bbr_dataset* auxiliary,
                           char** out) {
  return guarded([&] {
    require(dataset && out, "groups_json: null argument");
    const auto groups = bbr::group_examiners(dataset->dataset,
                                             auxiliary ? &auxiliary->dataset : nullptr);
    nlohmann::json j;
    for (const auto& [examiner, g] : groups) j[examiner] = bbr::to_string(g);
    *out = dup_string(j.dump(2));
  });
}

void bbr_dataset_free(bbr_dataset* dataset) { delete dataset; }

bbr_status bbr_contingency(const bbr_dataset* dataset, uint64_t cells[6]) {
  return guarded([&] {
    require(dataset && cells, "contingency: null argument");
    const auto t = bbr::build_contingency(dataset->dataset);
    cells[0] = t.a;
    cells[1] = t.b;
    cells[2] = t.c;
    cells[3] = t.d;
    cells[4] = t.e;
    cells[5] = t.f;
  });
}

bbr_status bbr_rates_csv(const bbr_dataset* dataset, const char* group_label, char** out) {
  return guarded([&] {
    require(dataset && out, "rates_csv: null argument");
    const auto table = bbr::build_contingency(dataset->dataset);
    const auto rows = bbr::make_rates_rows(group_label ? group_label : "all", table);
    *out = dup_string(bbr::rates_csv(rows));
  });
}

bbr_status bbr_rates_json(const bbr_dataset* dataset, const char* group_label, char** out) {
  return guarded([&] {
    require(dataset && out, "rates_json: null argument");
    const auto table = bbr::build_contingency(dataset->dataset);
    const auto rows = bbr::make_rates_rows(group_label ? group_label : "all", table);
    nlohmann::json j;
    j["table"] = bbr::contingency_json(table);
    j["rates"] = bbr::rates_json(rows);
    *out = dup_string(j.dump(2));
  });
}

bbr_status bbr_conclusive_json(const bbr_dataset* dataset, char** out) {
  return guarded([&] {
    require(dataset && out, "conclusive_json: null argument");
    *out = dup_string(bbr::conclusive_json(bbr::summarize_conclusive(dataset->dataset)).dump(2));
  });
}

bbr_status bbr_failure_rate(double inc_correct, double inc_incorrect, double ratio,
                            double* out) {
  return guarded([&] {
    require(out != nullptr, "failure_rate: null out");
    *out = bbr::failure_rate(inc_correct, inc_incorrect, ratio);
  });
}

bbr_status bbr_decompose_json(const bbr_dataset* dataset, const char* ground_truth_label,
                              const char* group_label, char** out) {
  return guarded([&] {
    require(dataset && out, "decompose_json: null argument");
    const auto result = bbr::decompose(dataset->dataset);
    std::vector<bbr::DecompRow> rows{{ground_truth_label ? ground_truth_label : "",
                                      group_label ? group_label : "all", result}};
    nlohmann::json arr = bbr::decomp_json(rows, true);
    *out = dup_string(arr[0].dump(2));
  });
}

namespace {

nlohmann::json parse_rows_json(const char* rows_json) {
  require(rows_json != nullptr, "rows_csv: null rows");
  nlohmann::json rows;
  try {
    rows = nlohmann::json::parse(rows_json);
  } catch (const nlohmann::json::exception& e) {
    throw bbr::Error(bbr::ErrorCode::InvalidArgument, std::string("rows JSON: ") + e.what());
  }
  require(rows.is_array(), "rows_csv: expected a JSON array");
  return rows;
}

}  // namespace

bbr_status bbr_decomp_rows_csv(const char* rows_json, char** out) {
  return guarded([&] {
    require(out != nullptr, "decomp_rows_csv: null out");
    std::vector<bbr::DecompRow> rows;
    for (const auto& j : parse_rows_json(rows_json))
      rows.push_back(bbr::decomp_row_from_json(j));
    *out = dup_string(bbr::decomp_csv(rows));
  });
}

bbr_status bbr_ppc_rows_csv(const char* rows_json, char** out) {
  return guarded([&] {
    require(out != nullptr, "ppc_rows_csv: null out");
    std::vector<bbr::PpcRow> rows;
    for (const auto& j : parse_rows_json(rows_json))
      rows.push_back(bbr::ppc_row_from_json(j));
    *out = dup_string(bbr::ppc_csv(rows));
  });
}

bbr_status bbr_failure_rows_csv(const char* rows_json, char** out) {
  return guarded([&] {
    require(out != nullptr, "failure_rows_csv: null out");
    std::vector<bbr::FailureRateRow> rows;
    for (const auto& j : parse_rows_json(rows_json))
      rows.push_back(bbr::failure_row_from_json(j));
    *out = dup_string(bbr::failure_csv(rows));
  });
}

bbr_status bbr_fit(const bbr_dataset* dataset, const char* config_json, bbr_draws** out) {
  return guarded([&] {
    require(dataset && out, "fit: null argument");
    bbr::ModelConfig mc;
    const auto sc = sampler_config_from_json(config_json ? config_json : "", mc);
    auto holder = std::make_unique<bbr_draws>();
    bbr::ValidationLog log;
    holder->draws = bbr::fit(dataset->dataset, mc, sc, &log);
    if (sc.progress)
      for (const auto& note : log.notes) std::cerr << "fit: " << note << "\n";
    *out = holder.release();
  });
}

bbr_status bbr_draws_summary_json(const bbr_draws* draws, double level, char** out) {
  return guarded([&] {
    require(draws && out, "draws_summary_json: null argument");
    *out = dup_string(
        bbr::summary_json(bbr::summarize(draws->draws, level), level).dump(2));
  });
}

bbr_status bbr_draws_summary_csv(const bbr_draws* draws, double level, char** out) {
  return guarded([&] {
    require(draws && out, "draws_summary_csv: null argument");
    *out = dup_string(bbr::summary_csv(bbr::summarize(draws->draws, level)));
  });
}

bbr_status bbr_draws_diagnostics_json(const bbr_draws* draws, char** out) {
  return guarded([&] {
    require(draws && out, "draws_diagnostics_json: null argument");
    *out = dup_string(bbr::diagnostics_json(draws->draws).dump(2));
  });
}

bbr_status bbr_draws_save_csv(const bbr_draws* draws, const char* path) {
  return guarded([&] {
    require(draws && path, "draws_save_csv: null argument");
    bbr::save_draws_csv(draws->draws, path);
  });
}

bbr_status bbr_draws_load_csv(const char* path, bbr_draws** out) {
  return guarded([&] {
    require(path && out, "draws_load_csv: null argument");
    *out = new bbr_draws{bbr::load_draws_csv(path)};
  });
}

bbr_status bbr_draws_save_cache(const bbr_draws* draws, const char* path) {
  return guarded([&] {
    require(draws && path, "draws_save_cache: null argument");
    bbr::save_draws_cache(draws->draws, path);
  });
}

bbr_status bbr_draws_load_cache(const char* path, bbr_draws** out) {
  return guarded([&] {
    require(path && out, "draws_load_cache: null argument");
    *out = new bbr_draws{bbr::load_draws_cache(path)};
  });
}

void bbr_draws_free(bbr_draws* draws) { delete draws; }

bbr_status bbr_model_ratio_json(const bbr_draws* draws, int basis, char** out) {
  return guarded([&] {
    require(draws && out, "model_ratio_json: null argument");
    require(basis == 0 || basis == 1, "basis must be 0 (scale) or 1 (variance)");
    const auto est = bbr::model_ratio(
        draws->draws, basis == 0 ? bbr::RatioBasis::ScaleParams
                                 : bbr::RatioBasis::VarianceParams);
    *out = dup_string(bbr::ratio_estimate_json(est).dump(2));
  });
}

bbr_status bbr_predictive_ratio_json(const bbr_draws* draws, const bbr_dataset* dataset,
                                     int n_sims, uint64_t seed,
                                     const char* ground_truth_label,
                                     const char* group_label, char** out) {
  return guarded([&] {
    require(draws && dataset && out, "predictive_ratio_json: null argument");
    const auto interval =
        bbr::predictive_ratio_interval(draws->draws, dataset->dataset, n_sims, seed);
    std::vector<bbr::PpcRow> rows{{ground_truth_label ? ground_truth_label : "",
                                   group_label ? group_label : "all", interval}};
    *out = dup_string(bbr::ppc_json(rows)[0].dump(2));
  });
}

bbr_status bbr_failure_row_json(const bbr_dataset* rates_dataset,
                                const bbr_dataset* decomp_dataset, const bbr_draws* draws,
                                int ground_truth, const char* group_label, int basis,
                                char** out) {
  return guarded([&] {
    require(rates_dataset && decomp_dataset && draws && out,
            "failure_row_json: null argument");
    require(ground_truth == 0 || ground_truth == 1, "ground_truth must be 0 or 1");
    require(basis == 0 || basis == 1, "basis must be 0 (scale) or 1 (variance)");
    const auto gt =
        ground_truth == 0 ? bbr::GroundTruth::SameSource : bbr::GroundTruth::DifferentSource;
    const auto table = bbr::build_contingency(rates_dataset->dataset);
    const auto obs = bbr::decompose(decomp_dataset->dataset);
    const auto model = bbr::model_ratio(
        draws->draws, basis == 0 ? bbr::RatioBasis::ScaleParams
                                 : bbr::RatioBasis::VarianceParams);
    const auto row = bbr::adjusted_failure_row(gt, group_label ? group_label : "all",
                                               table, obs.ratio, model);
    *out = dup_string(bbr::failure_json({row})[0].dump(2));
  });
}

bbr_status bbr_simulate_csv(const char* params_json, uint64_t seed, char** out) {
  return guarded([&] {
    require(params_json && out, "simulate_csv: null argument");
    const auto spec = bbr::SimulationSpec::from_json_text(params_json);
    const auto dataset = bbr::simulate_responses(spec, seed);
    *out = dup_string(bbr::dataset_to_csv(dataset));
  });
}

}  // extern "C"
