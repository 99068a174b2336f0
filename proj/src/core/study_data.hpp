#ifndef BBR_STUDY_DATA_HPP
#define BBR_STUDY_DATA_HPP

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "errors.hpp"

namespace bbr {

enum class GroundTruth { SameSource, DifferentSource };
enum class Conclusion { Identification, Exclusion, Inconclusive, Unsuitable };
enum class InconclusiveSubtype { SupportSame, SupportDifferent, SupportNeither };
enum class EliminationBasis { Class, Individual };
enum class ExaminerGroup { MadeIndividualElims, NoIndividualElims };

const char* to_string(GroundTruth gt);
const char* to_string(Conclusion c);
const char* to_string(InconclusiveSubtype s);
const char* to_string(EliminationBasis b);
const char* to_string(ExaminerGroup g);

/// One examiner x item determination, canonicalized under a ConclusionMapping.
struct Response {
  std::string examiner_id;
  std::string item_id;
  GroundTruth ground_truth = GroundTruth::SameSource;
  std::string raw_conclusion;
  Conclusion canonical = Conclusion::Inconclusive;
  std::optional<InconclusiveSubtype> inconclusive_subtype;
  std::optional<EliminationBasis> elimination_basis;
  std::uint64_t sequence = 0;

  bool conclusive() const {
    return canonical == Conclusion::Identification ||
           canonical == Conclusion::Exclusion;
  }
};

/// Raw study label -> canonical category table. Every label appearing in a
/// dataset must be mapped; anything else is a validation error.
struct ConclusionMapping {
  std::string study_name;
  std::map<std::string, Conclusion> entries;
  std::map<std::string, InconclusiveSubtype> subtype_entries;

  /// Built-in tables for the two studies this tool ships support for:
  /// "ulery2011" (latent prints) and "monson2022" (bullets).
  static ConclusionMapping builtin(const std::string& name);

  /// Parse the key-value section format (see data/mappings/*.map).
  static ConclusionMapping read_file(const std::string& path);
  static ConclusionMapping parse(std::istream& in, const std::string& origin);
};

/// Line-oriented record of everything ingestion and filtering decided to
/// drop, relabel, or flag. Printed to stderr by the CLI and embedded in
/// report output as a machine-readable summary.
struct ValidationLog {
  std::size_t rows_read = 0;
  std::size_t duplicates_removed = 0;
  std::size_t unsuitable_pooled = 0;
  std::size_t unsuitable_excluded = 0;
  std::size_t responses_filtered = 0;
  std::vector<std::string> dropped_examiners;
  std::vector<std::string> dropped_items;
  std::vector<std::string> notes;

  void note(std::string line) { notes.push_back(std::move(line)); }
  void print(std::ostream& out) const;
};

struct StudyDataset {
  std::vector<Response> responses;
  std::vector<std::string> examiners;  // first-appearance order
  std::vector<std::string> items;      // first-appearance order
  std::unordered_map<std::string, GroundTruth> item_truth;

  GroundTruth truth_of(const std::string& item_id) const;

  /// examiner -> items actually answered, both in deterministic order.
  std::map<std::string, std::vector<std::string>> assignment() const;

  std::size_t response_count() const { return responses.size(); }
};

struct AnalysisPolicy {
  enum class UnsuitableHandling { PoolAsInconclusive, Exclude };

  UnsuitableHandling unsuitable_handling = UnsuitableHandling::PoolAsInconclusive;
  std::optional<GroundTruth> ground_truth_filter;
  bool group_by_elimination_basis = false;

  /// Default for variance and model analyses: non-conclusive responses pool.
  static AnalysisPolicy for_variance() { return AnalysisPolicy{}; }

  /// Default for error-rate tables: unsuitable determinations drop out.
  static AnalysisPolicy for_rates() {
    AnalysisPolicy p;
    p.unsuitable_handling = UnsuitableHandling::Exclude;
    return p;
  }
};

/// Parse and validate a response CSV. Header must name examiner, item,
/// ground_truth and conclusion columns; subtype, basis and sequence are
/// optional. Duplicate (examiner, item) pairs are preserved here and
/// resolved by deduplicate_first_response.
StudyDataset ingest_csv(const std::string& path, const ConclusionMapping& mapping,
                        ValidationLog* log = nullptr);
StudyDataset ingest_csv_stream(std::istream& in, const ConclusionMapping& mapping,
                               const std::string& origin, ValidationLog* log = nullptr);

/// Keep only the lowest-sequence response per (examiner, item) pair, ties
/// broken by file order. Rosters are unchanged.
StudyDataset deduplicate_first_response(const StudyDataset& dataset,
                                        ValidationLog* log = nullptr);

/// Relabel or drop Unsuitable responses, apply the ground-truth filter, and
/// revalidate. Examiners and items left without responses are dropped from
/// the rosters (and logged).
StudyDataset apply_policy(const StudyDataset& dataset, const AnalysisPolicy& policy,
                          ValidationLog* log = nullptr);

/// Classify every examiner in `dataset` by whether any of their exclusions
/// (in `dataset` or the optional auxiliary dataset) was based on individual
/// characteristics. Exclusions without a recorded basis are an error.
std::map<std::string, ExaminerGroup> group_examiners(
    const StudyDataset& dataset, const StudyDataset* auxiliary = nullptr);

/// Subset to the responses of examiners in one group (rosters rebuilt).
StudyDataset filter_to_examiners(const StudyDataset& dataset,
                                 const std::vector<std::string>& keep);

/// Serialize back to the input CSV format. Subtype and basis columns appear
/// only when some response carries them.
std::string dataset_to_csv(const StudyDataset& dataset);

}  // namespace bbr

#endif  // BBR_STUDY_DATA_HPP
