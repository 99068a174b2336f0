#include "report.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "format.hpp"

namespace bbr {

namespace {

std::string rate_field(const std::optional<Rational>& r) {
  return r ? format_fixed(r->value(), 3) : std::string("undefined");
}

nlohmann::json rate_json(const std::optional<Rational>& r) {
  if (!r) return nullptr;
  nlohmann::json j;
  j["value"] = r->value();
  j["exact"] = r->str();
  return j;
}

nlohmann::json opt_json(const std::optional<double>& v) {
  if (!v || std::isnan(*v)) return nullptr;
  return *v;
}

nlohmann::json finite_or_null(double v) {
  if (std::isnan(v)) return nullptr;
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

}  // namespace

std::vector<RatesRow> make_rates_rows(const std::string& group,
                                      const ContingencyTable& table) {
  std::vector<RatesRow> rows;
  for (RateOption option : {RateOption::Ignored, RateOption::Correct,
                            RateOption::HalfCredit, RateOption::Incorrect}) {
    const RateSet rs = rates(table, option);
    RatesRow ss;
    ss.ground_truth = "SS";
    ss.group = group;
    ss.option = option;
    ss.fnr = rs.fnr;
    ss.degenerate = option == RateOption::Ignored && table.b > 0 && rs.fnr &&
                    (rs.fnr->num == 0 || rs.fnr->num == rs.fnr->den);
    rows.push_back(ss);
    RatesRow ds;
    ds.ground_truth = "DS";
    ds.group = group;
    ds.option = option;
    ds.fpr = rs.fpr;
    ds.degenerate = option == RateOption::Ignored && table.e > 0 && rs.fpr &&
                    (rs.fpr->num == 0 || rs.fpr->num == rs.fpr->den);
    rows.push_back(ds);
  }
  return rows;
}

std::string rates_csv(const std::vector<RatesRow>& rows) {
  std::ostringstream out;
  out << "ground_truth,group,option,fpr,fnr\n";
  for (const auto& r : rows)
    out << r.ground_truth << ',' << csv_escape(r.group) << ',' << to_string(r.option)
        << ',' << (r.fpr ? rate_field(r.fpr) : "") << ','
        << (r.fnr ? rate_field(r.fnr) : "") << '\n';
  return out.str();
}

nlohmann::json rates_json(const std::vector<RatesRow>& rows) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json j;
    j["ground_truth"] = r.ground_truth;
    j["group"] = r.group;
    j["option"] = to_string(r.option);
    j["fpr"] = rate_json(r.fpr);
    j["fnr"] = rate_json(r.fnr);
    if (r.degenerate) j["degenerate_denominator"] = true;
    arr.push_back(std::move(j));
  }
  return arr;
}

std::string decomp_csv(const std::vector<DecompRow>& rows) {
  std::ostringstream out;
  out << "ground_truth,group,examiner_var,item_var,ratio\n";
  for (const auto& r : rows)
    out << r.ground_truth << ',' << csv_escape(r.group) << ','
        << format_sig(r.result.examiner_var) << ',' << format_sig(r.result.item_var)
        << ',' << (r.result.ratio ? format_sig(*r.result.ratio) : "undefined") << '\n';
  return out.str();
}

nlohmann::json decomp_json(const std::vector<DecompRow>& rows, bool include_props) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json j;
    j["ground_truth"] = r.ground_truth;
    j["group"] = r.group;
    j["examiner_var"] = r.result.examiner_var;
    j["item_var"] = r.result.item_var;
    j["ratio"] = opt_json(r.result.ratio);
    // n-denominator variant, carried so the variance convention is auditable
    j["examiner_var_n"] = r.result.examiner_var_n;
    j["item_var_n"] = r.result.item_var_n;
    j["ratio_n"] = opt_json(r.result.ratio_n);
    if (include_props) {
      j["examiner_props"] = r.result.examiner_props;
      j["item_props"] = r.result.item_props;
    }
    arr.push_back(std::move(j));
  }
  return arr;
}

std::string ppc_csv(const std::vector<PpcRow>& rows) {
  std::ostringstream out;
  out << "ground_truth,group,predicted,lower,upper,observed\n";
  for (const auto& r : rows) {
    out << r.ground_truth << ',' << csv_escape(r.group) << ',';
    if (r.interval.n_used > 0)
      out << format_sig(r.interval.predicted) << ',' << format_sig(r.interval.lower)
          << ',' << format_sig(r.interval.upper);
    else
      out << "undefined,undefined,undefined";
    out << ',' << format_sig(r.interval.observed) << '\n';
  }
  return out.str();
}

nlohmann::json ppc_json(const std::vector<PpcRow>& rows) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json j;
    j["ground_truth"] = r.ground_truth;
    j["group"] = r.group;
    j["predicted"] = finite_or_null(r.interval.predicted);
    j["lower"] = finite_or_null(r.interval.lower);
    j["upper"] = finite_or_null(r.interval.upper);
    j["observed"] = r.interval.observed;
    j["simulations_used"] = r.interval.n_used;
    j["simulations_dropped"] = r.interval.n_dropped;
    arr.push_back(std::move(j));
  }
  return arr;
}

std::string failure_csv(const std::vector<FailureRateRow>& rows) {
  std::ostringstream out;
  out << "ground_truth,group,obs_ratio,model_ratio,lower,upper,inc_correct,"
         "inc_incorrect,obs_failure,model_failure\n";
  auto field = [](const std::optional<double>& v) {
    return v ? format_fixed(*v, 3) : std::string("undefined");
  };
  for (const auto& r : rows)
    out << r.ground_truth << ',' << csv_escape(r.group) << ',' << field(r.obs_ratio)
        << ',' << format_fixed(r.model.point, 3) << ',' << format_fixed(r.model.lower, 3)
        << ',' << format_fixed(r.model.upper, 3) << ',' << field(r.inc_correct) << ','
        << field(r.inc_incorrect) << ',' << field(r.obs_failure) << ','
        << field(r.model_failure) << '\n';
  return out.str();
}

nlohmann::json failure_json(const std::vector<FailureRateRow>& rows) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json j;
    j["ground_truth"] = r.ground_truth;
    j["group"] = r.group;
    j["obs_ratio"] = opt_json(r.obs_ratio);
    j["model_ratio"] = ratio_estimate_json(r.model);
    j["inc_correct"] = opt_json(r.inc_correct);
    j["inc_incorrect"] = opt_json(r.inc_incorrect);
    j["obs_failure"] = opt_json(r.obs_failure);
    j["model_failure"] = opt_json(r.model_failure);
    arr.push_back(std::move(j));
  }
  return arr;
}

std::string summary_csv(const std::vector<ParameterSummary>& summaries) {
  std::ostringstream out;
  out << "parameter,mean,sd,lower,upper\n";
  for (const auto& s : summaries)
    out << csv_escape(s.name) << ',' << format_sig(s.mean) << ',' << format_sig(s.sd)
        << ',' << format_sig(s.lower) << ',' << format_sig(s.upper) << '\n';
  return out.str();
}

nlohmann::json summary_json(const std::vector<ParameterSummary>& summaries, double level) {
  nlohmann::json j;
  j["level"] = level;
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& s : summaries) {
    nlohmann::json e;
    e["name"] = s.name;
    e["mean"] = s.mean;
    e["sd"] = s.sd;
    e["lower"] = s.lower;
    e["upper"] = s.upper;
    arr.push_back(std::move(e));
  }
  j["parameters"] = std::move(arr);
  return j;
}

std::string diagnostics_csv(const std::vector<Diagnostic>& diags) {
  std::ostringstream out;
  out << "parameter,split_rhat,ess_bulk\n";
  for (const auto& d : diags)
    out << csv_escape(d.name) << ',' << format_sig(d.split_rhat) << ','
        << format_sig(d.ess_bulk) << '\n';
  return out.str();
}

nlohmann::json diagnostics_json(const PosteriorDraws& draws) {
  nlohmann::json j;
  nlohmann::json arr = nlohmann::json::array();
  double max_rhat = 0.0;
  double min_ess = std::numeric_limits<double>::infinity();
  for (const auto& d : draws.diagnostics) {
    nlohmann::json e;
    e["name"] = d.name;
    e["split_rhat"] = finite_or_null(d.split_rhat);
    e["ess_bulk"] = finite_or_null(d.ess_bulk);
    arr.push_back(std::move(e));
    if (d.split_rhat > max_rhat) max_rhat = d.split_rhat;
    if (d.ess_bulk < min_ess) min_ess = d.ess_bulk;
  }
  j["parameters"] = std::move(arr);
  if (!draws.diagnostics.empty()) {
    j["max_split_rhat"] = finite_or_null(max_rhat);
    j["min_ess_bulk"] = finite_or_null(min_ess);
  }
  j["warnings"] = draws.warnings;
  j["accept_theta"] = draws.accept_theta;
  j["accept_zeta"] = draws.accept_zeta;
  j["accept_hyper"] = draws.accept_hyper;
  return j;
}

nlohmann::json contingency_json(const ContingencyTable& t) {
  nlohmann::json j;
  j["a"] = t.a;
  j["b"] = t.b;
  j["c"] = t.c;
  j["d"] = t.d;
  j["e"] = t.e;
  j["f"] = t.f;
  return j;
}

nlohmann::json conclusive_json(const ConclusiveSummary& s) {
  nlohmann::json j;
  j["ss_conclusive"] = s.ss_conclusive;
  j["ss_not_conclusive"] = s.ss_not_conclusive;
  j["ds_conclusive"] = s.ds_conclusive;
  j["ds_not_conclusive"] = s.ds_not_conclusive;
  j["p_same_source_given_not_conclusive"] =
      rate_json(s.p_same_source_given_not_conclusive);
  return j;
}

nlohmann::json validation_json(const ValidationLog& log) {
  nlohmann::json j;
  j["rows_read"] = log.rows_read;
  j["duplicates_removed"] = log.duplicates_removed;
  j["unsuitable_pooled"] = log.unsuitable_pooled;
  j["unsuitable_excluded"] = log.unsuitable_excluded;
  j["responses_filtered"] = log.responses_filtered;
  j["dropped_examiners"] = log.dropped_examiners;
  j["dropped_items"] = log.dropped_items;
  j["notes"] = log.notes;
  return j;
}

nlohmann::json dataset_summary_json(const StudyDataset& dataset) {
  nlohmann::json j;
  j["examiners"] = dataset.examiners.size();
  j["items"] = dataset.items.size();
  j["responses"] = dataset.responses.size();
  std::map<std::string, std::map<std::string, std::size_t>> cells;
  for (const auto& r : dataset.responses)
    cells[to_string(r.ground_truth)][to_string(r.canonical)]++;
  j["responses_by_cell"] = cells;
  return j;
}

nlohmann::json ratio_estimate_json(const RatioEstimate& est) {
  nlohmann::json j;
  j["point"] = est.point;
  j["lower"] = est.lower;
  j["upper"] = est.upper;
  j["basis"] = to_string(est.basis);
  j["point_of_means"] = est.point_of_means;
  if (std::fabs(est.point - est.point_of_means) > 0.01) j["averaging_sensitive"] = true;
  return j;
}

namespace {

std::optional<double> opt_from_json(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

double num_or_nan(const nlohmann::json& v) {
  if (v.is_null() || v.is_string()) return std::numeric_limits<double>::quiet_NaN();
  return v.get<double>();
}

}  // namespace

DecompRow decomp_row_from_json(const nlohmann::json& j) {
  DecompRow row;
  row.ground_truth = j.value("ground_truth", "");
  row.group = j.value("group", "");
  row.result.examiner_var = j.at("examiner_var").get<double>();
  row.result.item_var = j.at("item_var").get<double>();
  row.result.ratio = opt_from_json(j, "ratio");
  row.result.examiner_var_n = j.value("examiner_var_n", 0.0);
  row.result.item_var_n = j.value("item_var_n", 0.0);
  row.result.ratio_n = opt_from_json(j, "ratio_n");
  if (j.contains("examiner_props"))
    row.result.examiner_props = j.at("examiner_props").get<std::map<std::string, double>>();
  if (j.contains("item_props"))
    row.result.item_props = j.at("item_props").get<std::map<std::string, double>>();
  return row;
}

PpcRow ppc_row_from_json(const nlohmann::json& j) {
  PpcRow row;
  row.ground_truth = j.value("ground_truth", "");
  row.group = j.value("group", "");
  row.interval.predicted = num_or_nan(j.at("predicted"));
  row.interval.lower = num_or_nan(j.at("lower"));
  row.interval.upper = num_or_nan(j.at("upper"));
  row.interval.observed = j.at("observed").get<double>();
  row.interval.n_used = j.value("simulations_used", std::size_t{0});
  row.interval.n_dropped = j.value("simulations_dropped", std::size_t{0});
  return row;
}

FailureRateRow failure_row_from_json(const nlohmann::json& j) {
  FailureRateRow row;
  row.ground_truth = j.value("ground_truth", "");
  row.group = j.value("group", "");
  row.obs_ratio = opt_from_json(j, "obs_ratio");
  const auto& m = j.at("model_ratio");
  row.model.point = m.at("point").get<double>();
  row.model.lower = m.at("lower").get<double>();
  row.model.upper = m.at("upper").get<double>();
  row.model.basis = m.value("basis", "scale") == std::string("variance")
                        ? RatioBasis::VarianceParams
                        : RatioBasis::ScaleParams;
  row.model.point_of_means = m.value("point_of_means", row.model.point);
  row.inc_correct = opt_from_json(j, "inc_correct");
  row.inc_incorrect = opt_from_json(j, "inc_incorrect");
  row.obs_failure = opt_from_json(j, "obs_failure");
  row.model_failure = opt_from_json(j, "model_failure");
  return row;
}

}  // namespace bbr
