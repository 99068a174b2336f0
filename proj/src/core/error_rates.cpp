#include "error_rates.hpp"

namespace bbr {

const char* to_string(RateOption o) {
  switch (o) {
    case RateOption::Ignored: return "Ignored";
    case RateOption::Correct: return "Correct";
    case RateOption::HalfCredit: return "HalfCredit";
    case RateOption::Incorrect: return "Incorrect";
  }
  return "?";
}

RateOption parse_rate_option(const std::string& s) {
  if (s == "Ignored") return RateOption::Ignored;
  if (s == "Correct") return RateOption::Correct;
  if (s == "HalfCredit") return RateOption::HalfCredit;
  if (s == "Incorrect") return RateOption::Incorrect;
  throw Error(ErrorCode::InvalidArgument, "unknown rate option \"" + s + "\"");
}

ContingencyTable build_contingency(const StudyDataset& dataset) {
  ContingencyTable t;
  for (const auto& r : dataset.responses) {
    if (r.canonical == Conclusion::Unsuitable)
      throw Error(ErrorCode::InvalidArgument,
                  "contingency table requires a policy-applied dataset; found an "
                  "Unsuitable response");
    const bool ss = r.ground_truth == GroundTruth::SameSource;
    switch (r.canonical) {
      case Conclusion::Identification: (ss ? t.a : t.d)++; break;
      case Conclusion::Inconclusive: (ss ? t.b : t.e)++; break;
      case Conclusion::Exclusion: (ss ? t.c : t.f)++; break;
      case Conclusion::Unsuitable: break;  // unreachable
    }
  }
  return t;
}

ConclusiveSummary summarize_conclusive(const StudyDataset& dataset) {
  ConclusiveSummary s;
  for (const auto& r : dataset.responses) {
    const bool ss = r.ground_truth == GroundTruth::SameSource;
    if (r.conclusive()) (ss ? s.ss_conclusive : s.ds_conclusive)++;
    else (ss ? s.ss_not_conclusive : s.ds_not_conclusive)++;
  }
  const std::int64_t not_conclusive =
      static_cast<std::int64_t>(s.ss_not_conclusive + s.ds_not_conclusive);
  if (not_conclusive > 0)
    s.p_same_source_given_not_conclusive =
        Rational(static_cast<std::int64_t>(s.ss_not_conclusive), not_conclusive);
  return s;
}

namespace {

std::optional<Rational> ratio_or_absent(std::int64_t num, std::int64_t den) {
  if (den == 0) return std::nullopt;
  return Rational(num, den);
}

}  // namespace

RateSet rates(const ContingencyTable& t, RateOption option) {
  const auto a = static_cast<std::int64_t>(t.a);
  const auto b = static_cast<std::int64_t>(t.b);
  const auto c = static_cast<std::int64_t>(t.c);
  const auto d = static_cast<std::int64_t>(t.d);
  const auto e = static_cast<std::int64_t>(t.e);
  const auto f = static_cast<std::int64_t>(t.f);

  RateSet out;
  out.option = option;
  switch (option) {
    case RateOption::Ignored:
      out.fpr = ratio_or_absent(d, d + f);
      out.fnr = ratio_or_absent(c, a + c);
      break;
    case RateOption::Correct:
      out.fpr = ratio_or_absent(d, d + e + f);
      out.fnr = ratio_or_absent(c, a + b + c);
      break;
    case RateOption::HalfCredit:
      // (d + e/2) / (d+e+f) kept exact by doubling both sides
      out.fpr = ratio_or_absent(2 * d + e, 2 * (d + e + f));
      out.fnr = ratio_or_absent(2 * c + b, 2 * (a + b + c));
      break;
    case RateOption::Incorrect:
      out.fpr = ratio_or_absent(d + e, d + e + f);
      out.fnr = ratio_or_absent(c + b, a + b + c);
      break;
  }
  return out;
}

double failure_rate(double inc_correct, double inc_incorrect, double ratio) {
  if (!(inc_correct >= 0.0) || !(inc_incorrect <= 1.0) || inc_correct > inc_incorrect)
    throw Error(ErrorCode::Domain,
                "failure_rate requires 0 <= inc_correct <= inc_incorrect <= 1");
  if (!(ratio >= 0.0) || !(ratio <= 1.0))
    throw Error(ErrorCode::Domain, "failure_rate requires ratio in [0, 1]");
  return inc_correct + ratio * (inc_incorrect - inc_correct);
}

double failure_rate_counts(std::uint64_t errors, std::uint64_t inconclusives,
                           std::uint64_t total, double ratio) {
  if (total == 0) throw Error(ErrorCode::Domain, "failure_rate_counts with zero total");
  if (errors + inconclusives > total)
    throw Error(ErrorCode::Domain, "failure_rate_counts with errors + inconclusives > total");
  if (!(ratio >= 0.0) || !(ratio <= 1.0))
    throw Error(ErrorCode::Domain, "failure_rate_counts requires ratio in [0, 1]");
  return (static_cast<double>(errors) + ratio * static_cast<double>(inconclusives)) /
         static_cast<double>(total);
}

}  // namespace bbr
