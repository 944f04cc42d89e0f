#pragma once

// Pipeline subcommands behind the CLI: segment, extract, evaluate, report.
// Each returns a small outcome struct so tests can drive them directly.

#include <string>
#include <vector>

#include "pdvoice/config.hpp"
#include "pdvoice/features.hpp"

namespace pdvoice::cli {

// Manifest CSV columns: path, label (PD|HC), subject_id. Paths are resolved
// relative to the manifest's directory.
struct ManifestEntry {
  std::string path;          // resolved
  int label = 0;
  std::string subject_id;
  std::string source_path;   // original recording (segment manifests)
  int segment_index = 0;
};

std::vector<ManifestEntry> read_manifest(const std::string& path);

struct SegmentOutcome {
  std::size_t recordings = 0;
  std::size_t segments = 0;
  std::string manifest_path;  // the manifest written into out_dir
};

// Splits every manifest recording at silent gaps, writes per-segment WAVs
// named <stem>_segNNN.wav plus a new manifest preserving label/subject_id.
SegmentOutcome run_segment(const std::string& manifest_path,
                           const std::string& out_dir,
                           const ExperimentConfig& cfg);

struct ExtractOutcome {
  std::size_t rows = 0;
  std::size_t skipped = 0;
  std::string csv_path;
};

// Extracts the 24-feature vector per manifest entry into a feature CSV.
// Unvoiced or too-short segments are skipped with a warning on stderr.
ExtractOutcome run_extract(const std::string& manifest_path,
                           const std::string& out_csv,
                           const ExperimentConfig& cfg);

// Feature CSV <-> FeatureMatrix. The loader requires the canonical 24
// feature columns plus label and subject_id.
feat::FeatureMatrix load_feature_csv(const std::string& path);
void write_feature_csv(const feat::FeatureMatrix& m, const std::string& path,
                       const std::string& config_hash_hex);

struct EvaluateOutcome {
  std::string report_csv;
  std::string report_txt;
  std::string run_record;
  std::string run_id;
};

// Runs the configured feature sets x model families: hyperparameters chosen
// by grid search on a stratified 70/30 training partition, then repeated
// stratified k-fold with per-fold preprocessing. Writes the report grid as
// CSV and aligned text plus a machine-readable run record.
EvaluateOutcome run_evaluate(const std::string& features_csv,
                             const std::string& out_dir,
                             const ExperimentConfig& cfg);

struct ReportOutcome {
  std::string text_path;
  std::string csv_path;
  std::size_t records = 0;
};

// Merges several run records into one comparison table (one block per
// record). Duplicate run ids are an error.
ReportOutcome run_report(const std::vector<std::string>& record_paths,
                         const std::string& out_path);

}  // namespace pdvoice::cli
