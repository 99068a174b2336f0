#ifndef BBR_ERROR_RATES_HPP
#define BBR_ERROR_RATES_HPP

#include <cstdint>
#include <optional>
#include <string>

#include "rational.hpp"
#include "study_data.hpp"

namespace bbr {

/// The six cells of the summary table: rows SS/DS crossed with columns
/// Identification / Inconclusive / Exclusion.
struct ContingencyTable {
  std::uint64_t a = 0;  // SS x Identification
  std::uint64_t b = 0;  // SS x Inconclusive
  std::uint64_t c = 0;  // SS x Exclusion
  std::uint64_t d = 0;  // DS x Identification
  std::uint64_t e = 0;  // DS x Inconclusive
  std::uint64_t f = 0;  // DS x Exclusion

  std::uint64_t same_source_total() const { return a + b + c; }
  std::uint64_t different_source_total() const { return d + e + f; }
};

enum class RateOption { Ignored, Correct, HalfCredit, Incorrect };

const char* to_string(RateOption o);
RateOption parse_rate_option(const std::string& s);

/// False-positive and false-negative rates under one inconclusive-handling
/// option. A rate is absent exactly when its denominator is zero.
struct RateSet {
  RateOption option = RateOption::Correct;
  std::optional<Rational> fpr;
  std::optional<Rational> fnr;
};

/// 2x2 conclusive-vs-not summary plus P(SameSource | NotConclusive).
struct ConclusiveSummary {
  std::uint64_t ss_conclusive = 0;
  std::uint64_t ss_not_conclusive = 0;
  std::uint64_t ds_conclusive = 0;
  std::uint64_t ds_not_conclusive = 0;
  std::optional<Rational> p_same_source_given_not_conclusive;
};

/// Tally the dataset into the six cells. The dataset must already have had
/// its policy applied; Unsuitable responses are not representable here.
ContingencyTable build_contingency(const StudyDataset& dataset);

/// Conclusive-vs-not 2x2. Expects the pooling policy, so that "not
/// conclusive" covers every non-conclusive determination.
ConclusiveSummary summarize_conclusive(const StudyDataset& dataset);

/// Error rates under the four inconclusive-handling options:
///   Ignored:    fpr d/(d+f),          fnr c/(a+c)
///   Correct:    fpr d/(d+e+f),        fnr c/(a+b+c)
///   HalfCredit: fpr (d+e/2)/(d+e+f),  fnr (c+b/2)/(a+b+c)
///   Incorrect:  fpr (d+e)/(d+e+f),    fnr (c+b)/(a+b+c)
/// Zero denominators yield an absent rate, never NaN.
RateSet rates(const ContingencyTable& table, RateOption option);

/// Failure rate: count a `ratio` share of the inconclusives as erroneous.
/// Interpolates between the Inconclusives-Correct and Inconclusives-Incorrect
/// rates: inc_correct + ratio * (inc_incorrect - inc_correct).
double failure_rate(double inc_correct, double inc_incorrect, double ratio);

/// Count form of the same quantity: (errors + ratio * inconclusives) / total.
double failure_rate_counts(std::uint64_t errors, std::uint64_t inconclusives,
                           std::uint64_t total, double ratio);

}  // namespace bbr

#endif  // BBR_ERROR_RATES_HPP
