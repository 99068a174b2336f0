#ifndef BBR_REPORT_HPP
#define BBR_REPORT_HPP

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "error_rates.hpp"
#include "posterior_analysis.hpp"
#include "sampler.hpp"
#include "study_data.hpp"
#include "variance_decomp.hpp"

namespace bbr {

/// One error-rate table cell: SS rows carry the false-negative rate, DS rows
/// the false-positive rate, mirroring how the studies tabulate them.
struct RatesRow {
  std::string ground_truth;
  std::string group;
  RateOption option = RateOption::Correct;
  std::optional<Rational> fpr;
  std::optional<Rational> fnr;
  bool degenerate = false;  // 0/1 rate produced by excluding the inconclusives
};

std::vector<RatesRow> make_rates_rows(const std::string& group,
                                      const ContingencyTable& table);

struct DecompRow {
  std::string ground_truth;
  std::string group;
  DecompositionResult result;
};

struct PpcRow {
  std::string ground_truth;
  std::string group;
  PredictiveInterval interval;
};

std::string rates_csv(const std::vector<RatesRow>& rows);
nlohmann::json rates_json(const std::vector<RatesRow>& rows);

std::string decomp_csv(const std::vector<DecompRow>& rows);
nlohmann::json decomp_json(const std::vector<DecompRow>& rows, bool include_props = true);

std::string ppc_csv(const std::vector<PpcRow>& rows);
nlohmann::json ppc_json(const std::vector<PpcRow>& rows);

std::string failure_csv(const std::vector<FailureRateRow>& rows);
nlohmann::json failure_json(const std::vector<FailureRateRow>& rows);

std::string summary_csv(const std::vector<ParameterSummary>& summaries);
nlohmann::json summary_json(const std::vector<ParameterSummary>& summaries, double level);

std::string diagnostics_csv(const std::vector<Diagnostic>& diags);
nlohmann::json diagnostics_json(const PosteriorDraws& draws);

nlohmann::json contingency_json(const ContingencyTable& table);
nlohmann::json conclusive_json(const ConclusiveSummary& summary);
nlohmann::json validation_json(const ValidationLog& log);
nlohmann::json dataset_summary_json(const StudyDataset& dataset);
nlohmann::json ratio_estimate_json(const RatioEstimate& est);

// inverse parsers, so row sets collected as JSON can be re-serialized as the
// canonical CSV tables
DecompRow decomp_row_from_json(const nlohmann::json& j);
PpcRow ppc_row_from_json(const nlohmann::json& j);
FailureRateRow failure_row_from_json(const nlohmann::json& j);

}  // namespace bbr

#endif  // BBR_REPORT_HPP
