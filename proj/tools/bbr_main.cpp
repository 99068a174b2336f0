// bbr — command-line front end. Orchestrates the pipeline through the C API
// of the shared library and writes CSV/JSON/SVG artifacts plus a run
// manifest per output directory.

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "bbr.h"
#include "svg.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int exit_code_for(bbr_status s) {
  switch (s) {
    case BBR_OK: return 0;
    case BBR_ERR_MISSING_PREREQUISITE: return 3;
    case BBR_ERR_NUMERIC: return 4;
    default: return 2;
  }
}

[[noreturn]] void die(bbr_status s) {
  std::fprintf(stderr, "error: %s\n", bbr_last_error());
  std::exit(exit_code_for(s));
}

[[noreturn]] void die_message(int code, const std::string& message) {
  std::fprintf(stderr, "error: %s\n", message.c_str());
  std::exit(code);
}

void check(bbr_status s) {
  if (s != BBR_OK) die(s);
}

std::string take(char* s) {
  std::string out = s ? s : "";
  bbr_string_free(s);
  return out;
}

using MappingPtr = std::shared_ptr<bbr_mapping>;
using DatasetPtr = std::shared_ptr<bbr_dataset>;
using DrawsPtr = std::shared_ptr<bbr_draws>;

MappingPtr wrap(bbr_mapping* p) { return {p, bbr_mapping_free}; }
DatasetPtr wrap(bbr_dataset* p) { return {p, bbr_dataset_free}; }
DrawsPtr wrap(bbr_draws* p) { return {p, bbr_draws_free}; }

struct Opts {
  std::string input;
  std::string aux_input;
  std::string mapping;
  std::string policy = "default";
  std::string ground_truth = "both";
  bool group_by_elims = false;
  int chains = 4;
  int iters = 5000;
  int warmup = 2500;
  int n_sims = 1000;
  std::uint64_t seed = 1;
  double hyperprior_scale = 1.0;
  double level = 0.95;
  std::string ratio_basis = "scale";
  std::string out;
  std::string params;
};

bool is_builtin_mapping(const std::string& name) {
  return name == "ulery2011" || name == "monson2022" || name == "canonical";
}

MappingPtr load_mapping(const Opts& opts) {
  bbr_mapping* m = nullptr;
  if (is_builtin_mapping(opts.mapping))
    check(bbr_mapping_builtin(opts.mapping.c_str(), &m));
  else
    check(bbr_mapping_read(opts.mapping.c_str(), &m));
  return wrap(m);
}

// pooled policy? true for variance/model analyses, false for rate tables
bool resolve_pool(const Opts& opts, bool default_pool) {
  if (opts.policy == "default") return default_pool;
  if (opts.policy == "pool") return true;
  if (opts.policy == "exclude") return false;
  die_message(2, "unknown --policy \"" + opts.policy + "\" (expected pool or exclude)");
}

std::string resolved_policy(const Opts& opts, bool default_pool) {
  return resolve_pool(opts, default_pool) ? "pool" : "exclude";
}

// ingest + first-response deduplication; every analysis command runs on the
// deduplicated view
DatasetPtr load_base(const Opts& opts, const MappingPtr& mapping, int verbose) {
  bbr_dataset* raw = nullptr;
  check(bbr_dataset_read_csv(opts.input.c_str(), mapping.get(), verbose, &raw));
  DatasetPtr raw_ptr = wrap(raw);
  bbr_dataset* dedup = nullptr;
  check(bbr_dataset_deduplicate(raw_ptr.get(), &dedup));
  return wrap(dedup);
}

DatasetPtr load_aux(const Opts& opts, const MappingPtr& mapping) {
  if (opts.aux_input.empty()) return nullptr;
  bbr_dataset* raw = nullptr;
  check(bbr_dataset_read_csv(opts.aux_input.c_str(), mapping.get(), 0, &raw));
  return wrap(raw);
}

struct Subset {
  std::string label;        // e.g. "ss", "ds_no_elims"
  std::string gt_label;     // "SS" | "DS"
  int gt_code;              // 0 | 1
  std::string group_label;  // "all" | "MadeIndividualElims" | "NoIndividualElims"
  int group_code;           // -1 | 0 | 1
};

std::vector<Subset> plan_subsets(const Opts& opts) {
  std::vector<std::pair<std::string, int>> gts;
  if (opts.ground_truth == "ss" || opts.ground_truth == "both") gts.emplace_back("SS", 0);
  if (opts.ground_truth == "ds" || opts.ground_truth == "both") gts.emplace_back("DS", 1);
  if (gts.empty())
    die_message(2, "unknown --ground-truth \"" + opts.ground_truth +
                       "\" (expected ss, ds, or both)");

  std::vector<std::tuple<std::string, std::string, int>> groups;
  if (opts.group_by_elims) {
    groups.emplace_back("made_elims", "MadeIndividualElims", 0);
    groups.emplace_back("no_elims", "NoIndividualElims", 1);
  } else {
    groups.emplace_back("", "all", -1);
  }

  std::vector<Subset> subsets;
  for (const auto& [gt_label, gt_code] : gts) {
    for (const auto& [suffix, group_label, group_code] : groups) {
      Subset s;
      s.gt_label = gt_label;
      s.gt_code = gt_code;
      s.group_label = group_label;
      s.group_code = group_code;
      s.label = gt_label == "SS" ? "ss" : "ds";
      if (!suffix.empty()) s.label += "_" + suffix;
      subsets.push_back(std::move(s));
    }
  }
  return subsets;
}

// group filter (on the full dataset, so cross-ground-truth exclusions count)
// then policy + ground-truth filter; null when the subset has no responses
DatasetPtr make_subset(const DatasetPtr& base, const DatasetPtr& aux, const Subset& subset,
                       bool pool, int gt_filter) {
  DatasetPtr grouped = base;
  if (subset.group_code >= 0) {
    bbr_dataset* g = nullptr;
    const bbr_status s =
        bbr_dataset_filter_group(base.get(), aux.get(), subset.group_code, &g);
    if (s == BBR_ERR_ALL_RESPONSES_REMOVED) {
      std::fprintf(stderr, "warning: group %s is empty; skipping\n",
                   subset.group_label.c_str());
      return nullptr;
    }
    check(s);
    grouped = wrap(g);
  }
  bbr_dataset* out = nullptr;
  const bbr_status s = bbr_dataset_apply_policy(grouped.get(), pool ? 1 : 0, gt_filter, &out);
  if (s == BBR_ERR_ALL_RESPONSES_REMOVED) {
    std::fprintf(stderr, "warning: subset %s has no responses; skipping\n",
                 subset.label.c_str());
    return nullptr;
  }
  check(s);
  return wrap(out);
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) die_message(2, "cannot write " + path.string());
  out << content;
  if (!out) die_message(2, "failed writing " + path.string());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) die_message(2, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path prepare_out_dir(const Opts& opts) {
  if (opts.out.empty()) die_message(2, "--out DIR is required for this command");
  fs::path dir(opts.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) die_message(2, "cannot create output directory " + dir.string());
  return dir;
}

json manifest_base(const std::string& command, const Opts& opts) {
  json m;
  m["command"] = command;
  m["tool_version"] = bbr_version();
  m["manifest_version"] = 1;
  m["input"] = opts.input;
  m["aux_input"] = opts.aux_input;
  m["mapping"] = opts.mapping;
  m["ground_truth"] = opts.ground_truth;
  m["group_by_elims"] = opts.group_by_elims;
  m["seed"] = opts.seed;
  m["out"] = opts.out;
  return m;
}

void write_manifest(const fs::path& dir, const json& manifest) {
  write_file(dir / ("manifest_" + manifest.at("command").get<std::string>() + ".json"),
             manifest.dump(2) + "\n");
}

// group rows for the rate tables: label + code (-1 = everyone)
std::vector<std::pair<std::string, int>> plan_groups(const Opts& opts) {
  if (opts.group_by_elims)
    return {{"MadeIndividualElims", 0}, {"NoIndividualElims", 1}};
  return {{"all", -1}};
}

DatasetPtr make_group_table_dataset(const DatasetPtr& base, const DatasetPtr& aux,
                                    int group_code, const std::string& group_label,
                                    bool pool, int gt_filter) {
  DatasetPtr grouped = base;
  if (group_code >= 0) {
    bbr_dataset* g = nullptr;
    const bbr_status s = bbr_dataset_filter_group(base.get(), aux.get(), group_code, &g);
    if (s == BBR_ERR_ALL_RESPONSES_REMOVED) {
      std::fprintf(stderr, "warning: group %s is empty; skipping\n", group_label.c_str());
      return nullptr;
    }
    check(s);
    grouped = wrap(g);
  }
  bbr_dataset* out = nullptr;
  check(bbr_dataset_apply_policy(grouped.get(), pool ? 1 : 0, gt_filter, &out));
  return wrap(out);
}

// strip the header line of every CSV after the first so tables concatenate
std::string merge_csv(const std::vector<std::string>& tables) {
  std::string out;
  for (std::size_t i = 0; i < tables.size(); ++i) {
    if (i == 0) {
      out += tables[i];
    } else {
      const auto nl = tables[i].find('\n');
      out += tables[i].substr(nl + 1);
    }
  }
  return out;
}

std::vector<double> props_from_json(const json& object) {
  std::vector<double> out;
  for (const auto& [key, value] : object.items()) out.push_back(value.get<double>());
  return out;
}

int gt_filter_code(const Opts& opts) {
  if (opts.ground_truth == "ss") return 0;
  if (opts.ground_truth == "ds") return 1;
  if (opts.ground_truth == "both") return -1;
  die_message(2, "unknown --ground-truth \"" + opts.ground_truth + "\"");
}

// ---- commands ------------------------------------------------------------

int run_validate(const Opts& opts) {
  const auto mapping = load_mapping(opts);
  const auto dataset = load_base(opts, mapping, /*verbose=*/1);

  const auto summary = json::parse(take([&] {
    char* s = nullptr;
    check(bbr_dataset_summary_json(dataset.get(), &s));
    return s;
  }()));

  std::printf("examiners: %llu\n",
              static_cast<unsigned long long>(summary.at("examiners").get<std::uint64_t>()));
  std::printf("items: %llu\n",
              static_cast<unsigned long long>(summary.at("items").get<std::uint64_t>()));
  std::printf("responses: %llu\n",
              static_cast<unsigned long long>(summary.at("responses").get<std::uint64_t>()));
  for (const auto& [gt, cells] : summary.at("responses_by_cell").items())
    for (const auto& [category, count] : cells.items())
      std::printf("%s x %s: %llu\n", gt.c_str(), category.c_str(),
                  static_cast<unsigned long long>(count.get<std::uint64_t>()));
  std::printf("duplicates_removed: %llu\n",
              static_cast<unsigned long long>(
                  summary.at("validation").at("duplicates_removed").get<std::uint64_t>()));

  if (!opts.out.empty()) {
    const fs::path dir = prepare_out_dir(opts);
    write_file(dir / "validation.json", summary.dump(2) + "\n");
    write_manifest(dir, manifest_base("validate", opts));
  }
  return 0;
}

int run_rates(const Opts& opts) {
  const fs::path dir = prepare_out_dir(opts);
  const auto mapping = load_mapping(opts);
  const auto base = load_base(opts, mapping, 0);
  const auto aux = load_aux(opts, mapping);
  const bool pool = resolve_pool(opts, /*default_pool=*/false);
  const int gt_filter = gt_filter_code(opts);

  std::vector<std::string> csvs;
  json rows = json::array();
  json tables = json::object();
  for (const auto& [group_label, group_code] : plan_groups(opts)) {
    const auto ds =
        make_group_table_dataset(base, aux, group_code, group_label, pool, gt_filter);
    if (!ds) continue;
    char* csv = nullptr;
    check(bbr_rates_csv(ds.get(), group_label.c_str(), &csv));
    csvs.push_back(take(csv));
    char* js = nullptr;
    check(bbr_rates_json(ds.get(), group_label.c_str(), &js));
    auto parsed = json::parse(take(js));
    tables[group_label] = parsed.at("table");
    for (auto& row : parsed.at("rates")) rows.push_back(row);
  }

  // the conclusive-vs-not summary always pools non-conclusive responses
  bbr_dataset* pooled_raw = nullptr;
  check(bbr_dataset_apply_policy(base.get(), 1, -1, &pooled_raw));
  const auto pooled = wrap(pooled_raw);
  char* conclusive = nullptr;
  check(bbr_conclusive_json(pooled.get(), &conclusive));

  write_file(dir / "rates.csv", merge_csv(csvs));
  json out;
  out["tables"] = tables;
  out["rates"] = rows;
  write_file(dir / "rates.json", out.dump(2) + "\n");
  write_file(dir / "conclusive.json", take(conclusive) + "\n");

  json manifest = manifest_base("rates", opts);
  manifest["policy"] = resolved_policy(opts, false);
  write_manifest(dir, manifest);
  return 0;
}

struct DecompArtifacts {
  json rows = json::array();
  std::string csv;
};

DecompArtifacts collect_decomposition(const Opts& opts, const DatasetPtr& base,
                                      const DatasetPtr& aux, bool pool,
                                      const fs::path* svg_dir) {
  DecompArtifacts artifacts;
  for (const auto& subset : plan_subsets(opts)) {
    const auto ds = make_subset(base, aux, subset, pool, subset.gt_code);
    if (!ds) continue;
    char* js = nullptr;
    check(bbr_decompose_json(ds.get(), subset.gt_label.c_str(), subset.group_label.c_str(),
                             &js));
    auto row = json::parse(take(js));
    if (svg_dir) {
      write_file(*svg_dir / ("hist_examiner_" + subset.label + ".svg"),
                 bbrcli::histogram_svg(props_from_json(row.at("examiner_props")),
                                       "Examiner inconclusive rates (" + subset.label + ")"));
      write_file(*svg_dir / ("hist_item_" + subset.label + ".svg"),
                 bbrcli::histogram_svg(props_from_json(row.at("item_props")),
                                       "Item inconclusive rates (" + subset.label + ")"));
    }
    artifacts.rows.push_back(std::move(row));
  }
  char* csv = nullptr;
  check(bbr_decomp_rows_csv(artifacts.rows.dump().c_str(), &csv));
  artifacts.csv = take(csv);
  return artifacts;
}

int run_decompose(const Opts& opts) {
  const fs::path dir = prepare_out_dir(opts);
  const auto mapping = load_mapping(opts);
  const auto base = load_base(opts, mapping, 0);
  const auto aux = load_aux(opts, mapping);
  const bool pool = resolve_pool(opts, /*default_pool=*/true);

  const auto artifacts = collect_decomposition(opts, base, aux, pool, &dir);
  write_file(dir / "decomposition.csv", artifacts.csv);
  write_file(dir / "decomposition.json", artifacts.rows.dump(2) + "\n");

  json manifest = manifest_base("decompose", opts);
  manifest["policy"] = resolved_policy(opts, true);
  write_manifest(dir, manifest);
  return 0;
}

std::string fit_config_json(const Opts& opts, bool progress) {
  json config;
  config["chains"] = opts.chains;
  config["iterations"] = opts.iters;
  config["warmup"] = opts.warmup;
  config["seed"] = opts.seed;
  config["hyperprior_scale"] = opts.hyperprior_scale;
  config["progress"] = progress;
  return config.dump();
}

int run_fit(const Opts& opts) {
  const fs::path dir = prepare_out_dir(opts);
  const auto mapping = load_mapping(opts);
  const auto base = load_base(opts, mapping, 0);
  const auto aux = load_aux(opts, mapping);
  const bool pool = resolve_pool(opts, /*default_pool=*/true);

  for (const auto& subset : plan_subsets(opts)) {
    const auto ds = make_subset(base, aux, subset, pool, subset.gt_code);
    if (!ds) continue;
    std::fprintf(stderr, "fit: subset %s\n", subset.label.c_str());
    bbr_draws* raw = nullptr;
    check(bbr_fit(ds.get(), fit_config_json(opts, true).c_str(), &raw));
    const auto draws = wrap(raw);

    const fs::path fit_dir = dir / ("fit_" + subset.label);
    std::error_code ec;
    fs::create_directories(fit_dir, ec);
    if (ec) die_message(2, "cannot create " + fit_dir.string());

    check(bbr_draws_save_csv(draws.get(), (fit_dir / "draws.csv").string().c_str()));
    check(bbr_draws_save_cache(draws.get(), (fit_dir / "draws.bin").string().c_str()));
    char* summary_csv = nullptr;
    check(bbr_draws_summary_csv(draws.get(), opts.level, &summary_csv));
    write_file(fit_dir / "summary.csv", take(summary_csv));
    char* summary_json = nullptr;
    check(bbr_draws_summary_json(draws.get(), opts.level, &summary_json));
    write_file(fit_dir / "summary.json", take(summary_json) + "\n");
    char* diag = nullptr;
    check(bbr_draws_diagnostics_json(draws.get(), &diag));
    const std::string diag_text = take(diag);
    write_file(fit_dir / "diagnostics.json", diag_text + "\n");
    const auto diag_json = json::parse(diag_text);
    for (const auto& warning : diag_json.at("warnings"))
      std::fprintf(stderr, "warning: %s: %s\n", subset.label.c_str(),
                   warning.get<std::string>().c_str());
  }

  json manifest = manifest_base("fit", opts);
  manifest["policy"] = resolved_policy(opts, true);
  manifest["chains"] = opts.chains;
  manifest["iterations"] = opts.iters;
  manifest["warmup"] = opts.warmup;
  manifest["hyperprior_scale"] = opts.hyperprior_scale;
  manifest["level"] = opts.level;
  write_manifest(dir, manifest);
  return 0;
}

fs::path subset_cache_path(const fs::path& dir, const Subset& subset) {
  return dir / ("fit_" + subset.label) / "draws.bin";
}

DrawsPtr load_subset_draws(const fs::path& dir, const Subset& subset) {
  const fs::path cache = subset_cache_path(dir, subset);
  if (!fs::exists(cache))
    die_message(3, "run fit first (missing " + cache.string() + ")");
  bbr_draws* raw = nullptr;
  check(bbr_draws_load_cache(cache.string().c_str(), &raw));
  return wrap(raw);
}

int run_ppc(const Opts& opts) {
  const fs::path dir = prepare_out_dir(opts);
  const auto mapping = load_mapping(opts);
  const auto base = load_base(opts, mapping, 0);
  const auto aux = load_aux(opts, mapping);
  const bool pool = resolve_pool(opts, /*default_pool=*/true);

  json rows = json::array();
  for (const auto& subset : plan_subsets(opts)) {
    const auto ds = make_subset(base, aux, subset, pool, subset.gt_code);
    if (!ds) continue;
    const auto draws = load_subset_draws(dir, subset);
    char* js = nullptr;
    check(bbr_predictive_ratio_json(draws.get(), ds.get(), opts.n_sims, opts.seed,
                                    subset.gt_label.c_str(), subset.group_label.c_str(),
                                    &js));
    rows.push_back(json::parse(take(js)));
  }

  char* csv = nullptr;
  check(bbr_ppc_rows_csv(rows.dump().c_str(), &csv));
  write_file(dir / "ppc.csv", take(csv));
  write_file(dir / "ppc.json", rows.dump(2) + "\n");

  json manifest = manifest_base("ppc", opts);
  manifest["policy"] = resolved_policy(opts, true);
  manifest["n_sims"] = opts.n_sims;
  write_manifest(dir, manifest);
  return 0;
}

int run_simulate(const Opts& opts) {
  const fs::path dir = prepare_out_dir(opts);
  if (opts.params.empty()) die_message(2, "--params FILE is required for simulate");
  const std::string params_text = read_file(opts.params);
  char* csv = nullptr;
  check(bbr_simulate_csv(params_text.c_str(), opts.seed, &csv));
  write_file(dir / "simulated.csv", take(csv));

  json manifest = manifest_base("simulate", opts);
  manifest["params"] = opts.params;
  write_manifest(dir, manifest);
  return 0;
}

int basis_code(const Opts& opts) {
  if (opts.ratio_basis == "scale") return 0;
  if (opts.ratio_basis == "variance") return 1;
  die_message(2, "unknown --ratio-basis \"" + opts.ratio_basis +
                     "\" (expected scale or variance)");
}

int run_report(const Opts& opts) {
  const fs::path dir = prepare_out_dir(opts);
  const auto mapping = load_mapping(opts);
  const auto base = load_base(opts, mapping, 0);
  const auto aux = load_aux(opts, mapping);
  const int basis = basis_code(opts);
  if (opts.policy != "default")
    std::fprintf(stderr,
                 "warning: report ignores --policy; rate tables exclude unsuitable "
                 "responses and variance/model sections pool them\n");

  // resolve the model subsets and their fit artifacts before writing anything
  std::vector<std::pair<Subset, DatasetPtr>> model_subsets;
  for (const auto& subset : plan_subsets(opts)) {
    auto ds = make_subset(base, aux, subset, /*pool=*/true, subset.gt_code);
    if (!ds) continue;
    const fs::path cache = subset_cache_path(dir, subset);
    if (!fs::exists(cache))
      die_message(3, "run fit first (missing " + cache.string() + ")");
    model_subsets.emplace_back(subset, std::move(ds));
  }

  json report;
  report["tool_version"] = bbr_version();

  {
    char* summary = nullptr;
    check(bbr_dataset_summary_json(base.get(), &summary));
    report["dataset"] = json::parse(take(summary));
  }
  {
    bbr_dataset* pooled_raw = nullptr;
    check(bbr_dataset_apply_policy(base.get(), 1, -1, &pooled_raw));
    const auto pooled = wrap(pooled_raw);
    char* conclusive = nullptr;
    check(bbr_conclusive_json(pooled.get(), &conclusive));
    report["conclusive"] = json::parse(take(conclusive));
  }

  // error-rate tables per group (unsuitable responses excluded)
  std::vector<std::string> rates_csvs;
  json rates_rows = json::array();
  std::vector<std::pair<std::string, DatasetPtr>> rates_tables;
  for (const auto& [group_label, group_code] : plan_groups(opts)) {
    const auto ds = make_group_table_dataset(base, aux, group_code, group_label,
                                             /*pool=*/false, /*gt_filter=*/-1);
    if (!ds) continue;
    char* csv = nullptr;
    check(bbr_rates_csv(ds.get(), group_label.c_str(), &csv));
    rates_csvs.push_back(take(csv));
    char* js = nullptr;
    check(bbr_rates_json(ds.get(), group_label.c_str(), &js));
    const auto parsed = json::parse(take(js));
    for (const auto& row : parsed.at("rates")) rates_rows.push_back(row);
    rates_tables.emplace_back(group_label, ds);
  }
  report["rates"] = rates_rows;

  // pooled decomposition per subset + histograms
  const auto decomp = collect_decomposition(opts, base, aux, /*pool=*/true, &dir);
  report["decomposition"] = decomp.rows;

  // model-based quantities per subset; the fit artifacts are prerequisites
  json model_section = json::object();
  json ppc_rows = json::array();
  json failure_rows = json::array();
  for (const auto& [subset, ds] : model_subsets) {
    const auto draws = load_subset_draws(dir, subset);

    json entry;
    for (const auto& [name, code] : {std::pair<const char*, int>{"scale", 0},
                                     {"variance", 1}}) {
      char* ratio = nullptr;
      check(bbr_model_ratio_json(draws.get(), code, &ratio));
      entry[std::string("ratio_") + name] = json::parse(take(ratio));
    }
    char* diag = nullptr;
    check(bbr_draws_diagnostics_json(draws.get(), &diag));
    auto diag_json = json::parse(take(diag));
    diag_json.erase("parameters");  // per-parameter detail lives in fit_*/
    entry["diagnostics"] = diag_json;

    char* ppc = nullptr;
    check(bbr_predictive_ratio_json(draws.get(), ds.get(), opts.n_sims, opts.seed,
                                    subset.gt_label.c_str(), subset.group_label.c_str(),
                                    &ppc));
    ppc_rows.push_back(json::parse(take(ppc)));

    // rates table of the subset's group feeds the failure rate
    DatasetPtr rates_ds;
    for (const auto& [group_label, table_ds] : rates_tables)
      if (group_label == subset.group_label) rates_ds = table_ds;
    if (rates_ds) {
      char* row = nullptr;
      check(bbr_failure_row_json(rates_ds.get(), ds.get(), draws.get(), subset.gt_code,
                                 subset.group_label.c_str(), basis, &row));
      failure_rows.push_back(json::parse(take(row)));
    }
    model_section[subset.label] = std::move(entry);
  }
  report["model"] = model_section;
  report["ppc"] = ppc_rows;
  report["failure_rates"] = failure_rows;

  write_file(dir / "rates.csv", merge_csv(rates_csvs));
  write_file(dir / "decomposition.csv", decomp.csv);
  {
    char* csv = nullptr;
    check(bbr_ppc_rows_csv(ppc_rows.dump().c_str(), &csv));
    write_file(dir / "ppc.csv", take(csv));
  }
  {
    char* csv = nullptr;
    check(bbr_failure_rows_csv(failure_rows.dump().c_str(), &csv));
    write_file(dir / "failure_rates.csv", take(csv));
  }
  write_file(dir / "report.json", report.dump(2) + "\n");

  // human-readable summary
  std::ostringstream text;
  text << "black box study report\n";
  text << "======================\n\n";
  text << "input: " << opts.input << " (mapping " << opts.mapping << ")\n";
  text << "examiners: " << report["dataset"]["examiners"] << ", items: "
       << report["dataset"]["items"] << ", responses: " << report["dataset"]["responses"]
       << "\n\n";
  text << "error rates (fpr/fnr by option)\n";
  for (const auto& row : rates_rows) {
    text << "  " << row["ground_truth"].get<std::string>() << " "
         << row["group"].get<std::string>() << " " << row["option"].get<std::string>()
         << ": ";
    const auto& rate = row["ground_truth"] == "SS" ? row["fnr"] : row["fpr"];
    if (rate.is_null()) text << "undefined";
    else text << rate["value"].get<double>();
    text << "\n";
  }
  text << "\nvariance decomposition (examiner var / item var / ratio)\n";
  for (const auto& row : decomp.rows) {
    text << "  " << row["ground_truth"].get<std::string>() << " "
         << row["group"].get<std::string>() << ": " << row["examiner_var"].get<double>()
         << " / " << row["item_var"].get<double>() << " / ";
    if (row["ratio"].is_null()) text << "undefined";
    else text << row["ratio"].get<double>();
    text << "\n";
  }
  text << "\nmodel ratios and failure rates\n";
  for (const auto& row : failure_rows) {
    text << "  " << row["ground_truth"].get<std::string>() << " "
         << row["group"].get<std::string>() << ": model ratio "
         << row["model_ratio"]["point"].get<double>() << " ["
         << row["model_ratio"]["lower"].get<double>() << ", "
         << row["model_ratio"]["upper"].get<double>() << "], failure rate ";
    if (row["model_failure"].is_null()) text << "undefined";
    else text << row["model_failure"].get<double>();
    text << "\n";
  }
  text << "\nposterior predictive ratio checks\n";
  for (const auto& row : ppc_rows) {
    text << "  " << row["ground_truth"].get<std::string>() << " "
         << row["group"].get<std::string>() << ": predicted ";
    if (row["predicted"].is_null()) text << "undefined";
    else
      text << row["predicted"].get<double>() << " [" << row["lower"].get<double>() << ", "
           << row["upper"].get<double>() << "]";
    text << ", observed " << row["observed"].get<double>() << "\n";
  }
  write_file(dir / "report.txt", text.str());

  json manifest = manifest_base("report", opts);
  manifest["policy"] = "pool+exclude";
  manifest["n_sims"] = opts.n_sims;
  manifest["ratio_basis"] = opts.ratio_basis;
  manifest["level"] = opts.level;
  write_manifest(dir, manifest);
  return 0;
}

void add_common_inputs(CLI::App* cmd, Opts& opts, bool mapping_required = true) {
  cmd->add_option("--input", opts.input, "response CSV")->required();
  auto* m = cmd->add_option("--mapping", opts.mapping,
                            "ulery2011 | monson2022 | canonical | path to mapping file");
  if (mapping_required) m->required();
  cmd->add_option("--aux-input", opts.aux_input,
                  "auxiliary response CSV merged for examiner grouping");
  cmd->add_option("--policy", opts.policy, "pool | exclude (default per command)");
  cmd->add_option("--ground-truth", opts.ground_truth, "ss | ds | both");
  cmd->add_flag("--group-by-elims", opts.group_by_elims,
                "split examiners by individual-characteristic eliminations");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"inconclusive-aware analysis of forensic black box studies"};
  app.require_subcommand(1);
  Opts opts;

  auto* validate = app.add_subcommand("validate", "ingest and validate a response CSV");
  add_common_inputs(validate, opts);
  validate->add_option("--out", opts.out, "output directory (optional)");

  auto* rates = app.add_subcommand("rates", "error-rate tables under the four options");
  add_common_inputs(rates, opts);
  rates->add_option("--out", opts.out)->required();

  auto* decompose = app.add_subcommand("decompose", "empirical variance decomposition");
  add_common_inputs(decompose, opts);
  decompose->add_option("--out", opts.out)->required();

  auto* fit = app.add_subcommand("fit", "fit the latent conclusive-tendency model");
  add_common_inputs(fit, opts);
  fit->add_option("--chains", opts.chains);
  fit->add_option("--iters", opts.iters);
  fit->add_option("--warmup", opts.warmup);
  fit->add_option("--seed", opts.seed);
  fit->add_option("--hyperprior-scale", opts.hyperprior_scale);
  fit->add_option("--level", opts.level);
  fit->add_option("--out", opts.out)->required();

  auto* ppc = app.add_subcommand("ppc", "posterior predictive check of the ratio");
  add_common_inputs(ppc, opts);
  ppc->add_option("--n-sims", opts.n_sims);
  ppc->add_option("--seed", opts.seed);
  ppc->add_option("--out", opts.out)->required();

  auto* simulate = app.add_subcommand("simulate", "write a synthetic study CSV");
  simulate->add_option("--params", opts.params, "parameter JSON file")->required();
  simulate->add_option("--seed", opts.seed);
  simulate->add_option("--out", opts.out)->required();

  auto* report = app.add_subcommand("report", "aggregate report (requires fit artifacts)");
  add_common_inputs(report, opts);
  report->add_option("--n-sims", opts.n_sims);
  report->add_option("--seed", opts.seed);
  report->add_option("--ratio-basis", opts.ratio_basis, "scale | variance");
  report->add_option("--out", opts.out)->required();

  CLI11_PARSE(app, argc, argv);

  if (validate->parsed()) return run_validate(opts);
  if (rates->parsed()) return run_rates(opts);
  if (decompose->parsed()) return run_decompose(opts);
  if (fit->parsed()) return run_fit(opts);
  if (ppc->parsed()) return run_ppc(opts);
  if (simulate->parsed()) return run_simulate(opts);
  if (report->parsed()) return run_report(opts);
  return 0;
}
