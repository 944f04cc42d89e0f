#pragma once

// Experiment configuration: one structured file drives segmentation,
// extraction and evaluation. Every random seed is explicit.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "pdvoice/audio.hpp"
#include "pdvoice/classifiers.hpp"
#include "pdvoice/eval.hpp"
#include "pdvoice/features.hpp"

namespace pdvoice::cli {

struct ExperimentConfig {
  std::uint64_t seed = 42;

  // evaluation
  std::vector<std::string> feature_sets = {"acoustic_11", "all_24",
                                           "selected_k"};
  std::size_t selection_k = 10;
  std::vector<ml::ModelFamily> models = ml::all_families();
  std::size_t cv_folds = 6;
  std::size_t cv_repeats = 10;
  eval::Grouping grouping = eval::Grouping::kSegment;
  bool outlier_clip = true;
  bool min_max = true;

  // hyperparameter search
  bool grid_search = true;
  std::size_t grid_folds = 6;
  double train_fraction = 0.7;
  std::map<std::string, ml::ParamGrid> grid_overrides;  // keyed by family name

  // extraction
  audio::SilenceConfig segmentation;
  pitch::PitchConfig pitch;
  mfcc::MfccConfig mfcc;
  std::size_t min_cycles = 5;

  std::size_t jobs = 1;
};

ExperimentConfig default_config();

// Parses a JSON config file; unknown keys are rejected. "seed" is required.
ExperimentConfig load_config(const std::string& path);

// Canonical JSON echo of a config (sorted keys, stable formatting).
std::string config_to_json(const ExperimentConfig& cfg);

// FNV-1a 64 hash (hex) of the canonical JSON; embedded in every output file.
std::string config_hash(const ExperimentConfig& cfg);

// Validates cross-field constraints (known feature sets, k range, folds...).
void validate_config(const ExperimentConfig& cfg);

// Column indices of a named feature set; selected_k resolves to all columns
// (selection happens per fold during evaluation).
std::vector<std::size_t> feature_set_columns(const std::string& name);

std::uint64_t fnv1a64(const std::string& bytes);
std::string to_hex(std::uint64_t v);

}  // namespace pdvoice::cli
