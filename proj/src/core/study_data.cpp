#include "study_data.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <ostream>
#include <sstream>
#include <unordered_set>

namespace bbr {

const char* to_string(GroundTruth gt) {
  return gt == GroundTruth::SameSource ? "SS" : "DS";
}

const char* to_string(Conclusion c) {
  switch (c) {
    case Conclusion::Identification: return "Identification";
    case Conclusion::Exclusion: return "Exclusion";
    case Conclusion::Inconclusive: return "Inconclusive";
    case Conclusion::Unsuitable: return "Unsuitable";
  }
  return "?";
}

const char* to_string(InconclusiveSubtype s) {
  switch (s) {
    case InconclusiveSubtype::SupportSame: return "SupportSame";
    case InconclusiveSubtype::SupportDifferent: return "SupportDifferent";
    case InconclusiveSubtype::SupportNeither: return "SupportNeither";
  }
  return "?";
}

const char* to_string(EliminationBasis b) {
  return b == EliminationBasis::Class ? "Class" : "Individual";
}

const char* to_string(ExaminerGroup g) {
  return g == ExaminerGroup::MadeIndividualElims ? "MadeIndividualElims"
                                                 : "NoIndividualElims";
}

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

// RFC-4180-ish row reader: quoted fields, doubled-quote escapes, CRLF.
bool read_csv_row(std::istream& in, std::vector<std::string>& fields) {
  fields.clear();
  std::string field;
  bool in_quotes = false;
  bool saw_any = false;
  int ch;
  while ((ch = in.get()) != EOF) {
    saw_any = true;
    char c = static_cast<char>(ch);
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          field.push_back('"');
          in.get();
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      in_quotes = true;
    } else if (c == ',') {
      fields.push_back(field);
      field.clear();
    } else if (c == '\n') {
      break;
    } else if (c != '\r') {
      field.push_back(c);
    }
  }
  if (!saw_any) return false;
  fields.push_back(field);
  return true;
}

Conclusion parse_conclusion_name(const std::string& v, const std::string& origin) {
  if (v == "Identification") return Conclusion::Identification;
  if (v == "Exclusion") return Conclusion::Exclusion;
  if (v == "Inconclusive") return Conclusion::Inconclusive;
  if (v == "Unsuitable") return Conclusion::Unsuitable;
  throw Error(ErrorCode::InvalidArgument,
              origin + ": unknown canonical category \"" + v + "\"");
}

InconclusiveSubtype parse_subtype_name(const std::string& v, const std::string& origin) {
  if (v == "SupportSame") return InconclusiveSubtype::SupportSame;
  if (v == "SupportDifferent") return InconclusiveSubtype::SupportDifferent;
  if (v == "SupportNeither") return InconclusiveSubtype::SupportNeither;
  throw Error(ErrorCode::InvalidArgument,
              origin + ": unknown inconclusive subtype \"" + v + "\"");
}

void rebuild_rosters(StudyDataset& ds) {
  ds.examiners.clear();
  ds.items.clear();
  ds.item_truth.clear();
  std::unordered_set<std::string> seen_e, seen_i;
  for (const auto& r : ds.responses) {
    if (seen_e.insert(r.examiner_id).second) ds.examiners.push_back(r.examiner_id);
    if (seen_i.insert(r.item_id).second) {
      ds.items.push_back(r.item_id);
      ds.item_truth.emplace(r.item_id, r.ground_truth);
    }
  }
}

}  // namespace

void ValidationLog::print(std::ostream& out) const {
  out << "validation: rows_read=" << rows_read
      << " duplicates_removed=" << duplicates_removed
      << " unsuitable_pooled=" << unsuitable_pooled
      << " unsuitable_excluded=" << unsuitable_excluded
      << " responses_filtered=" << responses_filtered << "\n";
  for (const auto& e : dropped_examiners)
    out << "validation: dropped examiner " << e << " (no responses left)\n";
  for (const auto& i : dropped_items)
    out << "validation: dropped item " << i << " (no responses left)\n";
  for (const auto& n : notes) out << "validation: " << n << "\n";
}

ConclusionMapping ConclusionMapping::builtin(const std::string& name) {
  ConclusionMapping m;
  m.study_name = name;
  if (name == "ulery2011") {
    m.entries = {
        {"Individualization", Conclusion::Identification},
        {"Inconclusive", Conclusion::Inconclusive},
        {"Exclusion", Conclusion::Exclusion},
        {"No Value", Conclusion::Unsuitable},
    };
    m.subtype_entries = {
        {"Close", InconclusiveSubtype::SupportSame},
        {"Insufficient", InconclusiveSubtype::SupportNeither},
        {"No Overlap", InconclusiveSubtype::SupportNeither},
    };
  } else if (name == "monson2022") {
    m.entries = {
        {"Identification", Conclusion::Identification},
        {"Inc-A", Conclusion::Inconclusive},
        {"Inc-B", Conclusion::Inconclusive},
        {"Inc-C", Conclusion::Inconclusive},
        {"Elimination", Conclusion::Exclusion},
        {"Unsuitable", Conclusion::Unsuitable},
    };
    m.subtype_entries = {
        {"Inc-A", InconclusiveSubtype::SupportSame},
        {"Inc-B", InconclusiveSubtype::SupportNeither},
        {"Inc-C", InconclusiveSubtype::SupportDifferent},
    };
  } else if (name == "canonical") {
    // identity table for synthetic studies written by the simulator
    m.entries = {
        {"Identification", Conclusion::Identification},
        {"Inconclusive", Conclusion::Inconclusive},
        {"Exclusion", Conclusion::Exclusion},
        {"Unsuitable", Conclusion::Unsuitable},
    };
    m.subtype_entries = {
        {"SupportSame", InconclusiveSubtype::SupportSame},
        {"SupportDifferent", InconclusiveSubtype::SupportDifferent},
        {"SupportNeither", InconclusiveSubtype::SupportNeither},
    };
  } else {
    throw Error(ErrorCode::InvalidArgument,
                "unknown builtin mapping \"" + name +
                    "\" (expected ulery2011, monson2022, or canonical)");
  }
  return m;
}

ConclusionMapping ConclusionMapping::read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open mapping file: " + path);
  return parse(in, path);
}

ConclusionMapping ConclusionMapping::parse(std::istream& in, const std::string& origin) {
  ConclusionMapping m;
  std::string line, section;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (t.front() == '[' && t.back() == ']') {
      section = lower(trim(t.substr(1, t.size() - 2)));
      continue;
    }
    auto eq = t.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::InvalidArgument,
                  origin + ":" + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    if (section == "study") {
      if (lower(key) == "name") m.study_name = value;
    } else if (section == "conclusions") {
      m.entries[key] = parse_conclusion_name(value, origin);
    } else if (section == "subtypes") {
      m.subtype_entries[key] = parse_subtype_name(value, origin);
    } else {
      throw Error(ErrorCode::InvalidArgument,
                  origin + ":" + std::to_string(lineno) + ": unknown section [" +
                      section + "]");
    }
  }
  if (m.entries.empty())
    throw Error(ErrorCode::InvalidArgument, origin + ": mapping has no [conclusions] entries");
  return m;
}

GroundTruth StudyDataset::truth_of(const std::string& item_id) const {
  auto it = item_truth.find(item_id);
  if (it == item_truth.end())
    throw Error(ErrorCode::InvalidArgument, "unknown item: " + item_id);
  return it->second;
}

std::map<std::string, std::vector<std::string>> StudyDataset::assignment() const {
  std::map<std::string, std::vector<std::string>> out;
  for (const auto& r : responses) out[r.examiner_id].push_back(r.item_id);
  return out;
}

StudyDataset ingest_csv(const std::string& path, const ConclusionMapping& mapping,
                        ValidationLog* log) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open input file: " + path);
  return ingest_csv_stream(in, mapping, path, log);
}

StudyDataset ingest_csv_stream(std::istream& in, const ConclusionMapping& mapping,
                               const std::string& origin, ValidationLog* log) {
  std::vector<std::string> header;
  if (!read_csv_row(in, header))
    throw Error(ErrorCode::EmptyDataset, origin + ": file is empty");

  int col_examiner = -1, col_item = -1, col_truth = -1, col_conclusion = -1;
  int col_subtype = -1, col_basis = -1, col_sequence = -1;
  for (std::size_t i = 0; i < header.size(); ++i) {
    std::string name = lower(trim(header[i]));
    int idx = static_cast<int>(i);
    if (name == "examiner") col_examiner = idx;
    else if (name == "item") col_item = idx;
    else if (name == "ground_truth") col_truth = idx;
    else if (name == "conclusion") col_conclusion = idx;
    else if (name == "subtype") col_subtype = idx;
    else if (name == "basis") col_basis = idx;
    else if (name == "sequence") col_sequence = idx;
  }
  for (auto [col, name] : {std::pair{col_examiner, "examiner"},
                           {col_item, "item"},
                           {col_truth, "ground_truth"},
                           {col_conclusion, "conclusion"}}) {
    if (col < 0)
      throw Error(ErrorCode::MissingColumn,
                  origin + ": missing required column \"" + std::string(name) + "\"");
  }

  StudyDataset ds;
  std::unordered_map<std::string, GroundTruth> truth_seen;
  std::vector<std::string> fields;
  std::size_t row = 1;
  auto cell = [&](int col) -> std::string {
    if (col < 0 || static_cast<std::size_t>(col) >= fields.size()) return {};
    return trim(fields[col]);
  };

  while (read_csv_row(in, fields)) {
    ++row;
    bool blank = true;
    for (const auto& f : fields)
      if (!trim(f).empty()) { blank = false; break; }
    if (blank) continue;

    Response r;
    r.examiner_id = cell(col_examiner);
    r.item_id = cell(col_item);
    if (r.examiner_id.empty() || r.item_id.empty())
      throw Error(ErrorCode::InvalidArgument,
                  origin + ":" + std::to_string(row) + ": empty examiner or item id");

    std::string gt = lower(cell(col_truth));
    if (gt == "ss") r.ground_truth = GroundTruth::SameSource;
    else if (gt == "ds") r.ground_truth = GroundTruth::DifferentSource;
    else
      throw Error(ErrorCode::InvalidArgument,
                  origin + ":" + std::to_string(row) +
                      ": ground_truth must be SS or DS, got \"" + cell(col_truth) + "\"");

    r.raw_conclusion = cell(col_conclusion);
    auto it = mapping.entries.find(r.raw_conclusion);
    if (it == mapping.entries.end())
      throw Error(ErrorCode::UnmappedLabel, origin + ":" + std::to_string(row) +
                                                ": unmapped conclusion label \"" +
                                                r.raw_conclusion + "\"");
    r.canonical = it->second;

    if (r.canonical == Conclusion::Inconclusive) {
      std::string sub = cell(col_subtype);
      if (!sub.empty()) {
        auto st = mapping.subtype_entries.find(sub);
        if (st != mapping.subtype_entries.end()) {
          r.inconclusive_subtype = st->second;
        } else if (sub == "SupportSame") {
          r.inconclusive_subtype = InconclusiveSubtype::SupportSame;
        } else if (sub == "SupportDifferent") {
          r.inconclusive_subtype = InconclusiveSubtype::SupportDifferent;
        } else if (sub == "SupportNeither") {
          r.inconclusive_subtype = InconclusiveSubtype::SupportNeither;
        } else {
          throw Error(ErrorCode::UnmappedLabel,
                      origin + ":" + std::to_string(row) +
                          ": unmapped inconclusive subtype \"" + sub + "\"");
        }
      } else {
        // Some scales (Inc-A/B/C) imply the subtype in the conclusion label.
        auto st = mapping.subtype_entries.find(r.raw_conclusion);
        if (st != mapping.subtype_entries.end()) r.inconclusive_subtype = st->second;
      }
    } else if (!cell(col_subtype).empty() && log) {
      log->note("row " + std::to_string(row) + ": subtype ignored on " +
                to_string(r.canonical) + " response");
    }

    if (r.canonical == Conclusion::Exclusion) {
      std::string basis = lower(cell(col_basis));
      if (basis == "class") r.elimination_basis = EliminationBasis::Class;
      else if (basis == "individual") r.elimination_basis = EliminationBasis::Individual;
      else if (!basis.empty())
        throw Error(ErrorCode::InvalidArgument,
                    origin + ":" + std::to_string(row) +
                        ": basis must be Class or Individual, got \"" + cell(col_basis) +
                        "\"");
    }

    std::string seq = cell(col_sequence);
    if (seq.empty()) {
      r.sequence = row - 2;  // file order
    } else {
      try {
        r.sequence = std::stoull(seq);
      } catch (const std::exception&) {
        throw Error(ErrorCode::InvalidArgument,
                    origin + ":" + std::to_string(row) +
                        ": sequence must be a non-negative integer, got \"" + seq + "\"");
      }
    }

    // Ground truth must be consistent across every response to an item.
    auto [truth_it, inserted] = truth_seen.emplace(r.item_id, r.ground_truth);
    if (!inserted && truth_it->second != r.ground_truth)
      throw Error(ErrorCode::InconsistentGroundTruth,
                  origin + ": item " + r.item_id + " has conflicting ground truth");

    ds.responses.push_back(std::move(r));
  }

  if (ds.responses.empty())
    throw Error(ErrorCode::EmptyDataset, origin + ": no data rows");

  rebuild_rosters(ds);
  if (log) log->rows_read += ds.responses.size();
  return ds;
}

StudyDataset deduplicate_first_response(const StudyDataset& dataset, ValidationLog* log) {
  // best response per pair: minimal (sequence, file index)
  std::map<std::pair<std::string, std::string>, std::size_t> best;
  for (std::size_t i = 0; i < dataset.responses.size(); ++i) {
    const auto& r = dataset.responses[i];
    auto key = std::make_pair(r.examiner_id, r.item_id);
    auto [it, inserted] = best.emplace(key, i);
    if (!inserted && r.sequence < dataset.responses[it->second].sequence) it->second = i;
  }

  StudyDataset out;
  out.examiners = dataset.examiners;
  out.items = dataset.items;
  out.item_truth = dataset.item_truth;
  std::unordered_set<std::size_t> keep;
  for (const auto& [key, idx] : best) keep.insert(idx);
  for (std::size_t i = 0; i < dataset.responses.size(); ++i) {
    if (keep.count(i)) out.responses.push_back(dataset.responses[i]);
  }
  std::size_t removed = dataset.responses.size() - out.responses.size();
  if (log && removed > 0) {
    log->duplicates_removed += removed;
    log->note(std::to_string(removed) + " repeated (examiner, item) responses dropped; "
                                        "first presentation kept");
  }
  return out;
}

StudyDataset apply_policy(const StudyDataset& dataset, const AnalysisPolicy& policy,
                          ValidationLog* log) {
  StudyDataset out;
  for (const auto& r : dataset.responses) {
    Response kept = r;
    if (kept.canonical == Conclusion::Unsuitable) {
      if (policy.unsuitable_handling == AnalysisPolicy::UnsuitableHandling::Exclude) {
        if (log) ++log->unsuitable_excluded;
        continue;
      }
      kept.canonical = Conclusion::Inconclusive;
      if (log) ++log->unsuitable_pooled;
    }
    if (policy.ground_truth_filter && kept.ground_truth != *policy.ground_truth_filter) {
      if (log) ++log->responses_filtered;
      continue;
    }
    out.responses.push_back(std::move(kept));
  }

  if (out.responses.empty())
    throw Error(ErrorCode::AllResponsesRemoved,
                "policy removed every response from the dataset");

  rebuild_rosters(out);
  if (log) {
    for (const auto& e : dataset.examiners)
      if (std::find(out.examiners.begin(), out.examiners.end(), e) == out.examiners.end())
        log->dropped_examiners.push_back(e);
    for (const auto& i : dataset.items)
      if (std::find(out.items.begin(), out.items.end(), i) == out.items.end())
        log->dropped_items.push_back(i);
  }
  return out;
}

std::map<std::string, ExaminerGroup> group_examiners(const StudyDataset& dataset,
                                                     const StudyDataset* auxiliary) {
  std::unordered_set<std::string> made_individual;
  auto scan = [&](const StudyDataset& ds) {
    for (const auto& r : ds.responses) {
      if (r.canonical != Conclusion::Exclusion) continue;
      if (!r.elimination_basis)
        throw Error(ErrorCode::MissingBasis,
                    "examiner " + r.examiner_id + " has an exclusion on item " +
                        r.item_id + " without an elimination basis");
      if (*r.elimination_basis == EliminationBasis::Individual)
        made_individual.insert(r.examiner_id);
    }
  };
  scan(dataset);
  if (auxiliary) scan(*auxiliary);

  std::map<std::string, ExaminerGroup> out;
  for (const auto& e : dataset.examiners)
    out[e] = made_individual.count(e) ? ExaminerGroup::MadeIndividualElims
                                      : ExaminerGroup::NoIndividualElims;
  return out;
}

StudyDataset filter_to_examiners(const StudyDataset& dataset,
                                 const std::vector<std::string>& keep) {
  std::unordered_set<std::string> wanted(keep.begin(), keep.end());
  StudyDataset out;
  for (const auto& r : dataset.responses)
    if (wanted.count(r.examiner_id)) out.responses.push_back(r);
  if (out.responses.empty())
    throw Error(ErrorCode::AllResponsesRemoved, "examiner filter removed every response");
  rebuild_rosters(out);
  return out;
}

namespace {

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += '"';
  return out;
}

}  // namespace

std::string dataset_to_csv(const StudyDataset& dataset) {
  bool any_subtype = false, any_basis = false;
  for (const auto& r : dataset.responses) {
    if (r.inconclusive_subtype) any_subtype = true;
    if (r.elimination_basis) any_basis = true;
  }

  std::ostringstream out;
  out << "examiner,item,ground_truth,conclusion";
  if (any_subtype) out << ",subtype";
  if (any_basis) out << ",basis";
  out << ",sequence\n";
  for (const auto& r : dataset.responses) {
    out << csv_quote(r.examiner_id) << ',' << csv_quote(r.item_id) << ','
        << to_string(r.ground_truth) << ',' << csv_quote(r.raw_conclusion);
    if (any_subtype)
      out << ',' << (r.inconclusive_subtype ? to_string(*r.inconclusive_subtype) : "");
    if (any_basis)
      out << ',' << (r.elimination_basis ? to_string(*r.elimination_basis) : "");
    out << ',' << r.sequence << '\n';
  }
  return out.str();
}

}  // namespace bbr
