#include "pdvoice/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "pdvoice/csv.hpp"
#include "pdvoice/errors.hpp"
#include "pdvoice/eval.hpp"
#include "pdvoice/parallel.hpp"
#include "pdvoice/rng.hpp"
#include "pdvoice/version.hpp"

namespace fs = std::filesystem;

namespace pdvoice::cli {

using nlohmann::json;

namespace {

std::string metadata_line(const std::string& hash) {
  return "# " + std::string(kToolName) + " " + kVersion + " config=" + hash +
         "\n";
}

std::string full_precision(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

int parse_label(const std::string& s) {
  if (s == "PD" || s == "pd" || s == "1") return feat::kLabelPd;
  if (s == "HC" || s == "hc" || s == "0") return feat::kLabelHc;
  throw DataError("manifest: label must be PD or HC, got '" + s + "'");
}

const char* label_name(int label) {
  return label == feat::kLabelPd ? "PD" : "HC";
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open file for writing: " + path);
  out << content;
  if (!out) throw DataError("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

std::vector<ManifestEntry> read_manifest(const std::string& path) {
  csv::Table table = csv::read_file(path);
  int path_col = table.column("path");
  int label_col = table.column("label");
  int subject_col = table.column("subject_id");
  if (path_col < 0 || label_col < 0 || subject_col < 0)
    throw DataError(path + ": manifest needs columns path,label,subject_id");
  int source_col = table.column("source_path");
  int seg_col = table.column("segment_index");

  fs::path base = fs::path(path).parent_path();
  std::vector<ManifestEntry> entries;
  entries.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    ManifestEntry e;
    fs::path p(row[static_cast<std::size_t>(path_col)]);
    e.path = p.is_absolute() ? p.string() : (base / p).string();
    e.label = parse_label(row[static_cast<std::size_t>(label_col)]);
    e.subject_id = row[static_cast<std::size_t>(subject_col)];
    e.source_path = source_col >= 0 ? row[static_cast<std::size_t>(source_col)]
                                    : row[static_cast<std::size_t>(path_col)];
    e.segment_index =
        seg_col >= 0 ? std::stoi(row[static_cast<std::size_t>(seg_col)]) : 0;
    entries.push_back(std::move(e));
  }
  return entries;
}

SegmentOutcome run_segment(const std::string& manifest_path,
                           const std::string& out_dir,
                           const ExperimentConfig& cfg) {
  validate_config(cfg);
  auto entries = read_manifest(manifest_path);
  fs::create_directories(out_dir);

  struct RecordingResult {
    std::vector<std::string> manifest_rows;
    std::size_t segments = 0;
  };
  std::vector<RecordingResult> results(entries.size());

  parallel_for(entries.size(), cfg.jobs, [&](std::size_t i) {
    const ManifestEntry& e = entries[i];
    audio::AudioClip clip = audio::load_wav(e.path);
    auto segments = audio::segment_by_silence(clip, cfg.segmentation);
    std::string stem = fs::path(e.path).stem().string();
    for (std::size_t s = 0; s < segments.size(); ++s) {
      char name[512];
      std::snprintf(name, sizeof name, "%s_seg%03zu.wav", stem.c_str(), s);
      audio::AudioClip seg = audio::slice(clip, segments[s]);
      audio::write_wav16(seg, (fs::path(out_dir) / name).string());
      results[i].manifest_rows.push_back(csv::format_row(
          {name, label_name(e.label), e.subject_id, e.path,
           std::to_string(s)}));
    }
    results[i].segments = segments.size();
  });

  std::ostringstream manifest;
  manifest << metadata_line(config_hash(cfg));
  manifest << csv::format_row(
      {"path", "label", "subject_id", "source_path", "segment_index"});
  SegmentOutcome outcome;
  outcome.recordings = entries.size();
  for (const auto& r : results) {
    outcome.segments += r.segments;
    for (const auto& row : r.manifest_rows) manifest << row;
  }
  outcome.manifest_path = (fs::path(out_dir) / "segments.csv").string();
  write_text_file(outcome.manifest_path, manifest.str());
  return outcome;
}

ExtractOutcome run_extract(const std::string& manifest_path,
                           const std::string& out_csv,
                           const ExperimentConfig& cfg) {
  validate_config(cfg);
  auto entries = read_manifest(manifest_path);

  feat::ExtractionConfig ex;
  ex.pitch = cfg.pitch;
  ex.mfcc = cfg.mfcc;
  ex.min_cycles = cfg.min_cycles;

  struct RowResult {
    feat::ExtractionResult extraction;
  };
  std::vector<RowResult> results(entries.size());

  parallel_for(entries.size(), cfg.jobs, [&](std::size_t i) {
    audio::AudioClip clip = audio::load_wav(entries[i].path);
    results[i].extraction = feat::assemble_feature_vector(clip, ex);
  });

  feat::FeatureMatrix m;
  m.feature_names.assign(feat::kFeatureNames.begin(), feat::kFeatureNames.end());
  ExtractOutcome outcome;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& extraction = results[i].extraction;
    if (!extraction.ok()) {
      std::cerr << "warning: skipping " << entries[i].path << ": "
                << extraction.skip_reason << '\n';
      ++outcome.skipped;
      continue;
    }
    m.rows.emplace_back(extraction.values->begin(), extraction.values->end());
    m.labels.push_back(entries[i].label);
    m.subject_ids.push_back(entries[i].subject_id);
    m.source_paths.push_back(entries[i].source_path);
    m.segment_indices.push_back(entries[i].segment_index);
  }
  outcome.rows = m.row_count();
  outcome.csv_path = out_csv;
  write_feature_csv(m, out_csv, config_hash(cfg));
  return outcome;
}

void write_feature_csv(const feat::FeatureMatrix& m, const std::string& path,
                       const std::string& config_hash_hex) {
  std::ostringstream out;
  out << metadata_line(config_hash_hex);
  std::vector<std::string> header = m.feature_names;
  header.insert(header.end(),
                {"label", "subject_id", "source_path", "segment_index"});
  out << csv::format_row(header);
  for (std::size_t r = 0; r < m.row_count(); ++r) {
    std::vector<std::string> fields;
    fields.reserve(header.size());
    for (double v : m.rows[r]) fields.push_back(full_precision(v));
    fields.push_back(label_name(m.labels[r]));
    fields.push_back(m.subject_ids[r]);
    fields.push_back(m.source_paths[r]);
    fields.push_back(std::to_string(m.segment_indices[r]));
    out << csv::format_row(fields);
  }
  write_text_file(path, out.str());
}

feat::FeatureMatrix load_feature_csv(const std::string& path) {
  csv::Table table = csv::read_file(path);
  feat::FeatureMatrix m;
  std::vector<int> feature_cols;
  for (const char* name : feat::kFeatureNames) {
    int col = table.column(name);
    if (col < 0)
      throw DataError(path + ": missing feature column '" + name +
                      "' (expected the canonical 24-column schema)");
    feature_cols.push_back(col);
    m.feature_names.emplace_back(name);
  }
  int label_col = table.column("label");
  int subject_col = table.column("subject_id");
  if (label_col < 0 || subject_col < 0)
    throw DataError(path + ": missing label/subject_id columns");
  int source_col = table.column("source_path");
  int seg_col = table.column("segment_index");

  for (const auto& row : table.rows) {
    std::vector<double> values;
    values.reserve(feature_cols.size());
    for (int c : feature_cols) {
      double v = 0.0;
      try {
        v = std::stod(row[static_cast<std::size_t>(c)]);
      } catch (const std::exception&) {
        throw DataError(path + ": non-numeric feature value '" +
                        row[static_cast<std::size_t>(c)] + "'");
      }
      if (!std::isfinite(v))
        throw DataError(path + ": non-finite feature value");
      values.push_back(v);
    }
    m.rows.push_back(std::move(values));
    m.labels.push_back(parse_label(row[static_cast<std::size_t>(label_col)]));
    m.subject_ids.push_back(row[static_cast<std::size_t>(subject_col)]);
    m.source_paths.push_back(
        source_col >= 0 ? row[static_cast<std::size_t>(source_col)] : "");
    m.segment_indices.push_back(
        seg_col >= 0 ? std::stoi(row[static_cast<std::size_t>(seg_col)]) : 0);
  }
  return m;
}

namespace {

json metric_summary_json(const eval::MetricSummary& s) {
  return {{"mean", s.mean}, {"stddev", s.stddev}};
}

json params_json(const ml::ParamMap& params) {
  json out = json::object();
  for (const auto& [name, value] : params) {
    if (std::holds_alternative<int>(value))
      out[name] = std::get<int>(value);
    else if (std::holds_alternative<double>(value))
      out[name] = std::get<double>(value);
    else
      out[name] = std::get<std::string>(value);
  }
  return out;
}

// Hyperparameter selection for one (feature set, family): grid search with
// stratified k-fold on the preprocessed 70% training partition.
ml::ModelSpec choose_spec(const feat::FeatureMatrix& subset,
                          ml::ModelFamily family, const ExperimentConfig& cfg,
                          bool per_fold_selection, json* grid_record) {
  std::uint64_t family_seed =
      mix_seed(cfg.seed, 0xfa31ULL + static_cast<std::uint64_t>(family));
  if (!cfg.grid_search || family == ml::ModelFamily::kNaiveBayes)
    return ml::default_spec(family, family_seed);

  auto split = feat::split_train_validation(subset, cfg.train_fraction,
                                            cfg.seed, false);
  eval::PreprocessOptions prep;
  prep.outlier_clip = cfg.outlier_clip;
  prep.min_max = cfg.min_max;
  if (per_fold_selection) prep.select_k = cfg.selection_k;
  auto fitted = eval::fit_fold_preprocessing(subset, split.train, prep);
  ml::Rows train_x = eval::apply_fold_preprocessing(subset, split.train, fitted);
  ml::Labels train_y;
  for (std::size_t i : split.train) train_y.push_back(subset.labels[i]);

  ml::ParamGrid grid;
  auto it = cfg.grid_overrides.find(ml::family_name(family));
  grid = it != cfg.grid_overrides.end() ? it->second : ml::default_grid(family);

  auto result = ml::grid_search(family, grid, train_x, train_y, cfg.grid_folds,
                                family_seed, cfg.jobs);
  if (grid_record) {
    json cells = json::array();
    for (const auto& cell : result.cells)
      cells.push_back({{"params", params_json(cell.params)},
                       {"mean_accuracy", cell.mean_accuracy},
                       {"valid", cell.valid}});
    (*grid_record)["best_params"] = params_json(result.best.params);
    (*grid_record)["cells"] = std::move(cells);
  }
  return result.best;
}

}  // namespace

EvaluateOutcome run_evaluate(const std::string& features_csv,
                             const std::string& out_dir,
                             const ExperimentConfig& cfg) {
  validate_config(cfg);
  feat::FeatureMatrix matrix = load_feature_csv(features_csv);
  if (matrix.row_count() == 0)
    throw DataError(features_csv + ": no feature rows");

  const std::string cfg_hash = config_hash(cfg);
  const std::string data_hash =
      to_hex(fnv1a64(read_text_file(features_csv)));
  const std::string run_id = to_hex(fnv1a64(cfg_hash + ":" + data_hash));

  eval::CvReport report;
  json grid_records = json::object();
  json results = json::array();

  for (const auto& fs_name : cfg.feature_sets) {
    auto columns = feature_set_columns(fs_name);
    feat::FeatureMatrix subset = feat::select_columns(matrix, columns);
    bool per_fold_selection = fs_name == "selected_k";

    eval::PreprocessOptions prep;
    prep.outlier_clip = cfg.outlier_clip;
    prep.min_max = cfg.min_max;
    if (per_fold_selection) prep.select_k = cfg.selection_k;

    eval::CvConfig cv;
    cv.folds = cfg.cv_folds;
    cv.repeats = cfg.cv_repeats;
    cv.seed = cfg.seed;
    cv.grouping = cfg.grouping;
    cv.jobs = cfg.jobs;

    for (ml::ModelFamily family : cfg.models) {
      json grid_record = json::object();
      ml::ModelSpec spec =
          choose_spec(subset, family, cfg, per_fold_selection, &grid_record);
      if (!grid_record.empty())
        grid_records[fs_name][ml::family_name(family)] = std::move(grid_record);

      auto cv_result = eval::repeated_kfold(subset, spec, cv, prep);
      report.entries.push_back({fs_name, cv_result});

      json folds = json::array();
      for (const auto& f : cv_result.folds)
        folds.push_back({{"repeat", f.repeat},
                         {"fold", f.fold},
                         {"tp", f.counts.tp},
                         {"fp", f.counts.fp},
                         {"tn", f.counts.tn},
                         {"fn", f.counts.fn},
                         {"accuracy", f.scores.accuracy},
                         {"specificity", f.scores.specificity},
                         {"recall", f.scores.recall},
                         {"precision", f.scores.precision},
                         {"f1", f.scores.f1}});
      results.push_back(
          {{"feature_set", fs_name},
           {"model", ml::family_name(family)},
           {"spec", params_json(spec.params)},
           {"accuracy", metric_summary_json(cv_result.accuracy)},
           {"specificity", metric_summary_json(cv_result.specificity)},
           {"recall", metric_summary_json(cv_result.recall)},
           {"precision", metric_summary_json(cv_result.precision)},
           {"f1", metric_summary_json(cv_result.f1)},
           {"folds", std::move(folds)}});
    }
  }

  json record;
  record["format_version"] = 1;
  record["tool"] = std::string(kToolName) + " " + kVersion;
  record["run_id"] = run_id;
  record["config_hash"] = cfg_hash;
  record["config"] = json::parse(config_to_json(cfg));
  record["dataset"] = {{"path", features_csv},
                       {"content_hash", data_hash},
                       {"rows", matrix.row_count()},
                       {"pd_rows", matrix.count_label(feat::kLabelPd)},
                       {"hc_rows", matrix.count_label(feat::kLabelHc)}};
  record["grid_search"] = std::move(grid_records);
  record["results"] = std::move(results);

  fs::create_directories(out_dir);
  EvaluateOutcome outcome;
  outcome.run_id = run_id;
  outcome.report_csv = (fs::path(out_dir) / "report.csv").string();
  outcome.report_txt = (fs::path(out_dir) / "report.txt").string();
  outcome.run_record = (fs::path(out_dir) / "run_record.json").string();

  std::string header = metadata_line(cfg_hash);
  write_text_file(outcome.report_csv, header + eval::render_report_csv(report));
  write_text_file(outcome.report_txt, header + eval::render_report_text(report));
  write_text_file(outcome.run_record, record.dump(2) + "\n");
  return outcome;
}

ReportOutcome run_report(const std::vector<std::string>& record_paths,
                         const std::string& out_path) {
  if (record_paths.empty())
    throw PreconditionError("report: at least one run record is required");

  struct Record {
    std::string run_id;
    std::string dataset;
    json body;
  };
  std::vector<Record> records;
  std::set<std::string> seen;
  for (const auto& path : record_paths) {
    json j;
    try {
      j = json::parse(read_text_file(path));
    } catch (const json::exception& e) {
      throw DataError("run record " + path + ": " + e.what());
    }
    Record r;
    r.run_id = j.at("run_id").get<std::string>();
    r.dataset = j.at("dataset").at("path").get<std::string>();
    r.body = std::move(j);
    if (!seen.insert(r.run_id).second)
      throw DataError("duplicate run id " + r.run_id + " (from " + path + ")");
    records.push_back(std::move(r));
  }

  static constexpr const char* kMetrics[] = {"accuracy", "specificity",
                                             "recall", "precision", "f1"};
  std::ostringstream text, table;
  std::string run_list;
  for (const auto& r : records) {
    if (!run_list.empty()) run_list += '+';
    run_list += r.run_id;
  }
  std::string header =
      "# " + std::string(kToolName) + " " + kVersion + " runs=" + run_list + "\n";
  text << header;
  table << header;
  table << csv::format_row(
      {"run_id", "dataset", "feature_set", "model", "metric", "mean", "stddev"});
  for (const auto& r : records) {
    text << "run " << r.run_id << "  dataset " << r.dataset << '\n';
    text << std::string(72, '-') << '\n';
    eval::CvReport view;
    for (const auto& entry : r.body.at("results")) {
      eval::ModelCvResult result;
      result.family = ml::parse_family(entry.at("model").get<std::string>());
      auto load = [&](const char* name, eval::MetricSummary* out) {
        out->mean = entry.at(name).at("mean").get<double>();
        out->stddev = entry.at(name).at("stddev").get<double>();
      };
      load("accuracy", &result.accuracy);
      load("specificity", &result.specificity);
      load("recall", &result.recall);
      load("precision", &result.precision);
      load("f1", &result.f1);
      std::string fs_name = entry.at("feature_set").get<std::string>();
      view.entries.push_back({fs_name, result});
      for (const char* metric : kMetrics)
        table << csv::format_row(
            {r.run_id, r.dataset, fs_name, entry.at("model").get<std::string>(),
             metric, full_precision(entry.at(metric).at("mean").get<double>()),
             full_precision(entry.at(metric).at("stddev").get<double>())});
    }
    text << eval::render_report_text(view) << '\n';
  }

  ReportOutcome outcome;
  outcome.records = records.size();
  outcome.text_path = out_path;
  fs::path csv_path(out_path);
  csv_path.replace_extension(".csv");
  outcome.csv_path = csv_path.string();
  write_text_file(outcome.text_path, text.str());
  write_text_file(outcome.csv_path, table.str());
  return outcome;
}

}  // namespace pdvoice::cli
