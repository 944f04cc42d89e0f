#include "pdvoice/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>

#include "json.hpp"
#include "pdvoice/errors.hpp"

namespace pdvoice::cli {

using nlohmann::json;

namespace {

void reject_unknown_keys(const json& j, const std::set<std::string>& known,
                         const std::string& where) {
  for (const auto& [key, value] : j.items())
    if (!known.count(key))
      throw ConfigError("config: unknown key '" + key + "' in " + where);
}

ml::ParamGrid grid_from_json(const json& j, const std::string& family) {
  ml::ParamGrid grid;
  for (const auto& [name, values] : j.items()) {
    if (!values.is_array())
      throw ConfigError("config: grid axis '" + name + "' for " + family +
                        " must be an array");
    std::vector<ml::ParamValue> axis;
    for (const auto& v : values) {
      if (v.is_number_integer())
        axis.emplace_back(v.get<int>());
      else if (v.is_number_float())
        axis.emplace_back(v.get<double>());
      else if (v.is_string())
        axis.emplace_back(v.get<std::string>());
      else
        throw ConfigError("config: grid axis '" + name + "' has a non-scalar value");
    }
    grid.axes.emplace_back(name, std::move(axis));
  }
  return grid;
}

json grid_to_json(const ml::ParamGrid& grid) {
  json out = json::object();
  for (const auto& [name, values] : grid.axes) {
    json axis = json::array();
    for (const auto& v : values) {
      if (std::holds_alternative<int>(v))
        axis.push_back(std::get<int>(v));
      else if (std::holds_alternative<double>(v))
        axis.push_back(std::get<double>(v));
      else
        axis.push_back(std::get<std::string>(v));
    }
    out[name] = std::move(axis);
  }
  return out;
}

}  // namespace

ExperimentConfig default_config() { return {}; }

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config file " + path + ": " + e.what());
  }

  reject_unknown_keys(
      j,
      {"seed", "feature_sets", "selection_k", "models", "cv", "preprocess",
       "grid_search", "grids", "segmentation", "pitch", "mfcc", "min_cycles",
       "jobs"},
      "top level");

  ExperimentConfig cfg;
  if (!j.contains("seed"))
    throw ConfigError("config: 'seed' is required (all seeds are explicit)");
  cfg.seed = j.at("seed").get<std::uint64_t>();

  if (j.contains("feature_sets"))
    cfg.feature_sets = j.at("feature_sets").get<std::vector<std::string>>();
  if (j.contains("selection_k"))
    cfg.selection_k = j.at("selection_k").get<std::size_t>();
  if (j.contains("models")) {
    cfg.models.clear();
    for (const auto& name : j.at("models"))
      cfg.models.push_back(ml::parse_family(name.get<std::string>()));
  }
  if (j.contains("cv")) {
    const json& cv = j.at("cv");
    reject_unknown_keys(cv, {"folds", "repeats", "grouping"}, "cv");
    if (cv.contains("folds")) cfg.cv_folds = cv.at("folds").get<std::size_t>();
    if (cv.contains("repeats"))
      cfg.cv_repeats = cv.at("repeats").get<std::size_t>();
    if (cv.contains("grouping"))
      cfg.grouping = eval::parse_grouping(cv.at("grouping").get<std::string>());
  }
  if (j.contains("preprocess")) {
    const json& p = j.at("preprocess");
    reject_unknown_keys(p, {"outlier_clip", "min_max"}, "preprocess");
    if (p.contains("outlier_clip"))
      cfg.outlier_clip = p.at("outlier_clip").get<bool>();
    if (p.contains("min_max")) cfg.min_max = p.at("min_max").get<bool>();
  }
  if (j.contains("grid_search")) {
    const json& g = j.at("grid_search");
    reject_unknown_keys(g, {"enabled", "folds", "train_fraction"}, "grid_search");
    if (g.contains("enabled")) cfg.grid_search = g.at("enabled").get<bool>();
    if (g.contains("folds")) cfg.grid_folds = g.at("folds").get<std::size_t>();
    if (g.contains("train_fraction"))
      cfg.train_fraction = g.at("train_fraction").get<double>();
  }
  if (j.contains("grids")) {
    for (const auto& [family, axes] : j.at("grids").items()) {
      ml::parse_family(family);  // validates the name
      cfg.grid_overrides[family] = grid_from_json(axes, family);
    }
  }
  if (j.contains("segmentation")) {
    const json& s = j.at("segmentation");
    reject_unknown_keys(
        s, {"rms_threshold", "min_silence_s", "min_segment_s", "frame_s", "hop_s"},
        "segmentation");
    if (s.contains("rms_threshold"))
      cfg.segmentation.rms_threshold = s.at("rms_threshold").get<double>();
    if (s.contains("min_silence_s"))
      cfg.segmentation.min_silence_s = s.at("min_silence_s").get<double>();
    if (s.contains("min_segment_s"))
      cfg.segmentation.min_segment_s = s.at("min_segment_s").get<double>();
    if (s.contains("frame_s")) cfg.segmentation.frame_s = s.at("frame_s").get<double>();
    if (s.contains("hop_s")) cfg.segmentation.hop_s = s.at("hop_s").get<double>();
  }
  if (j.contains("pitch")) {
    const json& p = j.at("pitch");
    reject_unknown_keys(
        p, {"f_min", "f_max", "voicing_threshold", "hop_s", "frame_periods",
            "hnr_floor_db"},
        "pitch");
    if (p.contains("f_min")) cfg.pitch.f_min = p.at("f_min").get<double>();
    if (p.contains("f_max")) cfg.pitch.f_max = p.at("f_max").get<double>();
    if (p.contains("voicing_threshold"))
      cfg.pitch.voicing_threshold = p.at("voicing_threshold").get<double>();
    if (p.contains("hop_s")) cfg.pitch.hop_s = p.at("hop_s").get<double>();
    if (p.contains("frame_periods"))
      cfg.pitch.frame_periods = p.at("frame_periods").get<double>();
    if (p.contains("hnr_floor_db"))
      cfg.pitch.hnr_floor_db = p.at("hnr_floor_db").get<double>();
  }
  if (j.contains("mfcc")) {
    const json& m = j.at("mfcc");
    reject_unknown_keys(m,
                        {"frame_s", "hop_s", "pre_emphasis_alpha", "num_filters",
                         "num_ceps", "fft_size", "f_min", "f_max"},
                        "mfcc");
    if (m.contains("frame_s")) cfg.mfcc.frame_s = m.at("frame_s").get<double>();
    if (m.contains("hop_s")) cfg.mfcc.hop_s = m.at("hop_s").get<double>();
    if (m.contains("pre_emphasis_alpha"))
      cfg.mfcc.pre_emphasis_alpha = m.at("pre_emphasis_alpha").get<double>();
    if (m.contains("num_filters"))
      cfg.mfcc.num_filters = m.at("num_filters").get<std::size_t>();
    if (m.contains("num_ceps"))
      cfg.mfcc.num_ceps = m.at("num_ceps").get<std::size_t>();
    if (m.contains("fft_size"))
      cfg.mfcc.fft_size = m.at("fft_size").get<std::size_t>();
    if (m.contains("f_min")) cfg.mfcc.f_min = m.at("f_min").get<double>();
    if (m.contains("f_max")) cfg.mfcc.f_max = m.at("f_max").get<double>();
  }
  if (j.contains("min_cycles"))
    cfg.min_cycles = j.at("min_cycles").get<std::size_t>();
  if (j.contains("jobs")) cfg.jobs = j.at("jobs").get<std::size_t>();

  validate_config(cfg);
  return cfg;
}

std::string config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["seed"] = cfg.seed;
  j["feature_sets"] = cfg.feature_sets;
  j["selection_k"] = cfg.selection_k;
  json models = json::array();
  for (ml::ModelFamily f : cfg.models) models.push_back(ml::family_name(f));
  j["models"] = std::move(models);
  j["cv"] = {{"folds", cfg.cv_folds},
             {"repeats", cfg.cv_repeats},
             {"grouping", eval::grouping_name(cfg.grouping)}};
  j["preprocess"] = {{"outlier_clip", cfg.outlier_clip},
                     {"min_max", cfg.min_max}};
  j["grid_search"] = {{"enabled", cfg.grid_search},
                      {"folds", cfg.grid_folds},
                      {"train_fraction", cfg.train_fraction}};
  json grids = json::object();
  for (const auto& [family, grid] : cfg.grid_overrides)
    grids[family] = grid_to_json(grid);
  j["grids"] = std::move(grids);
  j["segmentation"] = {{"rms_threshold", cfg.segmentation.rms_threshold},
                       {"min_silence_s", cfg.segmentation.min_silence_s},
                       {"min_segment_s", cfg.segmentation.min_segment_s},
                       {"frame_s", cfg.segmentation.frame_s},
                       {"hop_s", cfg.segmentation.hop_s}};
  j["pitch"] = {{"f_min", cfg.pitch.f_min},
                {"f_max", cfg.pitch.f_max},
                {"voicing_threshold", cfg.pitch.voicing_threshold},
                {"hop_s", cfg.pitch.hop_s},
                {"frame_periods", cfg.pitch.frame_periods},
                {"hnr_floor_db", cfg.pitch.hnr_floor_db}};
  j["mfcc"] = {{"frame_s", cfg.mfcc.frame_s},
               {"hop_s", cfg.mfcc.hop_s},
               {"pre_emphasis_alpha", cfg.mfcc.pre_emphasis_alpha},
               {"num_filters", cfg.mfcc.num_filters},
               {"num_ceps", cfg.mfcc.num_ceps},
               {"fft_size", cfg.mfcc.fft_size},
               {"f_min", cfg.mfcc.f_min},
               {"f_max", cfg.mfcc.f_max}};
  j["min_cycles"] = cfg.min_cycles;
  // jobs is a runtime knob: it must not change the experiment identity
  return j.dump(2);
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string to_hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string config_hash(const ExperimentConfig& cfg) {
  return to_hex(fnv1a64(config_to_json(cfg)));
}

void validate_config(const ExperimentConfig& cfg) {
  if (cfg.feature_sets.empty())
    throw ConfigError("config: feature_sets must not be empty");
  std::set<std::string> seen_sets;
  for (const auto& fs : cfg.feature_sets) {
    feature_set_columns(fs);  // throws on unknown names
    if (!seen_sets.insert(fs).second)
      throw ConfigError("config: duplicate feature set '" + fs + "'");
  }
  if (cfg.selection_k < 1 || cfg.selection_k > feat::kNumFeatures)
    throw ConfigError("config: selection_k must be in [1, " +
                      std::to_string(feat::kNumFeatures) + "]");
  if (cfg.models.empty()) throw ConfigError("config: models must not be empty");
  std::set<ml::ModelFamily> seen_models;
  for (ml::ModelFamily f : cfg.models)
    if (!seen_models.insert(f).second)
      throw ConfigError(std::string("config: duplicate model '") +
                        ml::family_name(f) + "'");
  if (cfg.cv_folds < 2) throw ConfigError("config: cv.folds must be >= 2");
  if (cfg.cv_repeats < 1) throw ConfigError("config: cv.repeats must be >= 1");
  if (cfg.grid_folds < 2) throw ConfigError("config: grid_search.folds must be >= 2");
  if (cfg.train_fraction <= 0.0 || cfg.train_fraction >= 1.0)
    throw ConfigError("config: grid_search.train_fraction must be in (0, 1)");
  if (cfg.jobs < 1) throw ConfigError("config: jobs must be >= 1");
}

std::vector<std::size_t> feature_set_columns(const std::string& name) {
  std::vector<std::size_t> cols;
  if (name == "acoustic_11") {
    for (std::size_t i = 0; i < feat::kNumAcoustic; ++i) cols.push_back(i);
  } else if (name == "all_24" || name == "selected_k") {
    for (std::size_t i = 0; i < feat::kNumFeatures; ++i) cols.push_back(i);
  } else {
    throw ConfigError("config: unknown feature set '" + name +
                      "' (expected acoustic_11, all_24 or selected_k)");
  }
  return cols;
}

}  // namespace pdvoice::cli
