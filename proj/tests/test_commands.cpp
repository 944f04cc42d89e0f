#include "pdvoice/commands.hpp"

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "pdvoice/audio.hpp"
#include "pdvoice/errors.hpp"
#include "test_support.hpp"

using namespace pdvoice;
using testsup::TempDir;

namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

// Small two-class voice corpus: low perturbation = HC, high = PD.
void build_corpus(const TempDir& dir, int files_per_class, double dur_s) {
  std::ostringstream manifest;
  manifest << "path,label,subject_id\n";
  for (int i = 0; i < files_per_class; ++i) {
    for (int label = 0; label <= 1; ++label) {
      double jitter = label ? 0.06 : 0.004;
      double shimmer = label ? 0.25 : 0.02;
      double f0 = 110.0 + 15.0 * (i % 4);
      auto clip = testsup::make_voice(f0, dur_s, 16000, jitter, shimmer,
                                      1000 + static_cast<std::uint64_t>(i * 2 + label));
      std::string name = (label ? "pd_" : "hc_") + std::to_string(i) + ".wav";
      audio::write_wav16(clip, dir.file(name));
      manifest << name << "," << (label ? "PD" : "HC") << ","
               << (label ? "P" : "H") << i << "\n";
    }
  }
  write_file(dir.file("manifest.csv"), manifest.str());
}

cli::ExperimentConfig fast_config() {
  auto cfg = cli::default_config();
  cfg.seed = 7;
  cfg.cv_repeats = 2;
  cfg.grid_search = false;
  cfg.models = {ml::ModelFamily::kKnn, ml::ModelFamily::kNaiveBayes};
  cfg.feature_sets = {"acoustic_11"};
  return cfg;
}

}  // namespace

TEST_CASE("segment command: long recording splits, subject ids propagate") {
  TempDir dir("seg");
  const int sr = 16000;
  auto rec = testsup::concat({testsup::make_voice(120.0, 1.2, sr, 0.01, 0.05, 1),
                              testsup::make_silence(0.7, sr),
                              testsup::make_voice(120.0, 1.0, sr, 0.01, 0.05, 2),
                              testsup::make_silence(0.8, sr),
                              testsup::make_voice(120.0, 1.1, sr, 0.01, 0.05, 3)});
  audio::write_wav16(rec, dir.file("long.wav"));
  auto vowel = testsup::make_voice(140.0, 1.0, sr, 0.01, 0.05, 4);
  audio::write_wav16(vowel, dir.file("vowel.wav"));
  write_file(dir.file("m.csv"),
             "path,label,subject_id\nlong.wav,PD,S01\nvowel.wav,HC,S02\n");

  auto out_dir = dir.file("segments");
  auto outcome = cli::run_segment(dir.file("m.csv"), out_dir, fast_config());
  CHECK(outcome.recordings == 2);
  CHECK(outcome.segments == 4);  // 3 from the long file + 1 vowel

  auto entries = cli::read_manifest(outcome.manifest_path);
  REQUIRE(entries.size() == 4);
  std::size_t long_rows = 0;
  for (const auto& e : entries) {
    CHECK(fs::exists(e.path));
    if (e.source_path.find("long.wav") != std::string::npos) {
      ++long_rows;
      CHECK(e.label == feat::kLabelPd);
      CHECK(e.subject_id == "S01");
    } else {
      CHECK(e.label == feat::kLabelHc);
      CHECK(e.subject_id == "S02");
      CHECK(e.segment_index == 0);
    }
  }
  CHECK(long_rows == 3);

  // file names follow <stem>_segNNN.wav
  CHECK(fs::exists(fs::path(out_dir) / "long_seg000.wav"));
  CHECK(fs::exists(fs::path(out_dir) / "long_seg002.wav"));
  CHECK(fs::exists(fs::path(out_dir) / "vowel_seg000.wav"));
}

TEST_CASE("segment command: empty manifest yields an empty manifest") {
  TempDir dir("segempty");
  write_file(dir.file("m.csv"), "path,label,subject_id\n");
  auto outcome =
      cli::run_segment(dir.file("m.csv"), dir.file("out"), fast_config());
  CHECK(outcome.recordings == 0);
  CHECK(outcome.segments == 0);
  CHECK(cli::read_manifest(outcome.manifest_path).empty());
}

TEST_CASE("extract command: 24 columns, skips unvoiced, byte-identical reruns") {
  TempDir dir("extract");
  build_corpus(dir, 3, 1.0);
  // add an unvoiced file that must be skipped with a warning
  audio::write_wav16(testsup::make_white_noise(1.0, 16000, 0.4, 5),
                     dir.file("noise.wav"));
  {
    std::ofstream app(dir.file("manifest.csv"), std::ios::app);
    app << "noise.wav,HC,H99\n";
  }

  auto cfg = fast_config();
  auto outcome =
      cli::run_extract(dir.file("manifest.csv"), dir.file("features.csv"), cfg);
  CHECK(outcome.rows == 6);
  CHECK(outcome.skipped == 1);

  auto m = cli::load_feature_csv(dir.file("features.csv"));
  CHECK(m.col_count() == 24);
  CHECK(m.row_count() == 6);
  CHECK(m.count_label(feat::kLabelPd) == 3);
  // header must carry the canonical 24 names, in canonical order
  std::string expected_header;
  for (const char* name : feat::kFeatureNames) {
    expected_header += name;
    expected_header += ',';
  }
  expected_header += "label,subject_id,source_path,segment_index\n";
  CHECK(slurp(dir.file("features.csv")).find(expected_header) !=
        std::string::npos);
  for (std::size_t c = 0; c < feat::kNumFeatures; ++c)
    CHECK(m.feature_names[c] == feat::kFeatureNames[c]);

  cli::run_extract(dir.file("manifest.csv"), dir.file("features2.csv"), cfg);
  CHECK(slurp(dir.file("features.csv")) == slurp(dir.file("features2.csv")));

  // jitter separates the constructed classes
  for (std::size_t r = 0; r < m.row_count(); ++r) {
    double jitter_rel = m.rows[r][1];
    if (m.labels[r] == feat::kLabelPd)
      CHECK(jitter_rel > 1.0);
    else
      CHECK(jitter_rel < 1.0);
  }
}

TEST_CASE("extract parallel jobs produce the sequential bytes") {
  TempDir dir("extractjobs");
  build_corpus(dir, 4, 0.8);
  auto cfg = fast_config();
  cfg.jobs = 1;
  cli::run_extract(dir.file("manifest.csv"), dir.file("seq.csv"), cfg);
  cfg.jobs = 4;
  cli::run_extract(dir.file("manifest.csv"), dir.file("par.csv"), cfg);
  CHECK(slurp(dir.file("seq.csv")) == slurp(dir.file("par.csv")));
}

TEST_CASE("evaluate command writes report grid, text table and run record") {
  TempDir dir("eval");
  build_corpus(dir, 8, 0.8);  // 16 rows, enough for 6 folds
  auto cfg = fast_config();
  cli::run_extract(dir.file("manifest.csv"), dir.file("features.csv"), cfg);

  auto outcome =
      cli::run_evaluate(dir.file("features.csv"), dir.file("run1"), cfg);
  CHECK(fs::exists(outcome.report_csv));
  CHECK(fs::exists(outcome.report_txt));
  CHECK(fs::exists(outcome.run_record));
  CHECK(!outcome.run_id.empty());

  auto report = slurp(outcome.report_csv);
  CHECK(report.find("# pdvoice") == 0);  // version + config hash line
  CHECK(report.find("config=") != std::string::npos);
  CHECK(report.find("feature_set,metric,KNN,NB") != std::string::npos);
  CHECK(report.find("acoustic_11,Accuracy,") != std::string::npos);

  auto record = slurp(outcome.run_record);
  CHECK(record.find("\"run_id\"") != std::string::npos);
  CHECK(record.find("\"folds\"") != std::string::npos);
  CHECK(record.find("\"config\"") != std::string::npos);
}

TEST_CASE("evaluate on a separable feature table reaches 0.9 for all families") {
  TempDir dir("evalblob");
  // 4-sigma class separation carried by two informative acoustic columns
  std::vector<std::vector<double>> x;
  std::vector<int> y;
  testsup::make_blobs(60, feat::kNumFeatures, 4.0, 515, &x, &y,
                      /*informative=*/2);
  feat::FeatureMatrix m;
  m.feature_names.assign(feat::kFeatureNames.begin(), feat::kFeatureNames.end());
  m.rows = std::move(x);
  m.labels = std::move(y);
  for (std::size_t i = 0; i < m.rows.size(); ++i) {
    m.subject_ids.push_back("s" + std::to_string(i));
    m.source_paths.push_back("blob");
    m.segment_indices.push_back(0);
  }
  cli::write_feature_csv(m, dir.file("features.csv"), "0");

  auto cfg = cli::default_config();
  cfg.seed = 99;
  cfg.cv_repeats = 2;
  cfg.grid_search = false;
  cfg.feature_sets = {"acoustic_11"};
  auto outcome =
      cli::run_evaluate(dir.file("features.csv"), dir.file("out"), cfg);

  auto record = slurp(outcome.run_record);
  auto json_doc = nlohmann::json::parse(record);
  for (const auto& result : json_doc.at("results")) {
    double acc = result.at("accuracy").at("mean").get<double>();
    INFO("model ", result.at("model").get<std::string>());
    CHECK(acc >= 0.9);
  }
}

TEST_CASE("selected_k with k = 24 matches all_24 under the same seed") {
  TempDir dir("evalsel");
  std::vector<std::vector<double>> x;
  std::vector<int> y;
  testsup::make_blobs(20, feat::kNumFeatures, 5.0, 21, &x, &y);
  feat::FeatureMatrix m;
  m.feature_names.assign(feat::kFeatureNames.begin(), feat::kFeatureNames.end());
  m.rows = std::move(x);
  m.labels = std::move(y);
  for (std::size_t i = 0; i < m.rows.size(); ++i) {
    m.subject_ids.push_back("s" + std::to_string(i));
    m.source_paths.push_back("blob");
    m.segment_indices.push_back(0);
  }
  cli::write_feature_csv(m, dir.file("features.csv"), "0");

  auto cfg = fast_config();
  cfg.feature_sets = {"all_24", "selected_k"};
  cfg.selection_k = 24;
  auto outcome =
      cli::run_evaluate(dir.file("features.csv"), dir.file("out"), cfg);
  auto json_doc = nlohmann::json::parse(slurp(outcome.run_record));

  std::map<std::string, double> all24, selected;
  for (const auto& result : json_doc.at("results")) {
    auto& dst = result.at("feature_set") == "all_24" ? all24 : selected;
    dst[result.at("model").get<std::string>()] =
        result.at("accuracy").at("mean").get<double>();
  }
  REQUIRE(all24.size() == 2);
  for (const auto& [model, acc] : all24) CHECK(selected.at(model) == acc);
}

TEST_CASE("invalid config fails before any output is written") {
  TempDir dir("evalbad");
  build_corpus(dir, 3, 0.6);
  auto cfg = fast_config();
  cli::run_extract(dir.file("manifest.csv"), dir.file("features.csv"), cfg);

  cfg.feature_sets = {"bogus_set"};
  CHECK_THROWS_AS(
      cli::run_evaluate(dir.file("features.csv"), dir.file("bad"), cfg),
      ConfigError);
  CHECK_FALSE(fs::exists(dir.file("bad")));
}

TEST_CASE("feature CSV round-trips quoted subject ids and paths") {
  TempDir dir("csvquote");
  feat::FeatureMatrix m;
  m.feature_names.assign(feat::kFeatureNames.begin(), feat::kFeatureNames.end());
  m.rows.push_back(std::vector<double>(24, 1.5));
  m.labels.push_back(feat::kLabelPd);
  m.subject_ids.push_back("subject, with \"quotes\"");
  m.source_paths.push_back("dir with,comma/rec.wav");
  m.segment_indices.push_back(3);
  cli::write_feature_csv(m, dir.file("f.csv"), "0");

  auto back = cli::load_feature_csv(dir.file("f.csv"));
  REQUIRE(back.row_count() == 1);
  CHECK(back.subject_ids[0] == "subject, with \"quotes\"");
  CHECK(back.source_paths[0] == "dir with,comma/rec.wav");
  CHECK(back.segment_indices[0] == 3);
  CHECK(back.rows[0][5] == 1.5);
}

TEST_CASE("duplicate feature sets or models are config errors") {
  auto cfg = cli::default_config();
  cfg.feature_sets = {"all_24", "all_24"};
  CHECK_THROWS_AS(cli::validate_config(cfg), ConfigError);

  cfg = cli::default_config();
  cfg.models = {ml::ModelFamily::kKnn, ml::ModelFamily::kKnn};
  CHECK_THROWS_AS(cli::validate_config(cfg), ConfigError);
}

TEST_CASE("feature CSV with missing canonical columns is rejected") {
  TempDir dir("badcsv");
  write_file(dir.file("f.csv"), "jitter_absolute,label,subject_id\n1.0,PD,s\n");
  CHECK_THROWS_AS(cli::load_feature_csv(dir.file("f.csv")), DataError);
}

TEST_CASE("CLI exit codes: 0 success, 1 config, 2 data") {
  const char* cli = std::getenv("PDVOICE_CLI");
  if (!cli) return;  // only meaningful under ctest, which sets the path

  TempDir dir("exitcodes");
  build_corpus(dir, 2, 0.8);
  auto q = [](const std::string& s) { return "'" + s + "'"; };
  auto run = [&](const std::string& args) {
    int status = std::system(
        (q(cli) + " " + args + " >/dev/null 2>&1").c_str());
    return WEXITSTATUS(status);
  };

  CHECK(run("segment --manifest " + q(dir.file("manifest.csv")) + " --out " +
            q(dir.file("segs"))) == 0);

  // unreadable manifest -> data error
  CHECK(run("extract --manifest " + q(dir.file("missing.csv")) + " --out " +
            q(dir.file("f.csv"))) == 2);

  // malformed config -> usage/config error
  write_file(dir.file("bad.json"), "{\"selection_k\": 99}\n");
  CHECK(run("extract --manifest " + q(dir.file("manifest.csv")) + " --config " +
            q(dir.file("bad.json")) + " --out " + q(dir.file("f.csv"))) == 1);

  // unknown flag -> usage error
  CHECK(run("evaluate --bogus") == 1);
}

TEST_CASE("report command merges records and rejects duplicates") {
  TempDir dir("report");
  build_corpus(dir, 8, 0.8);
  auto cfg = fast_config();
  cli::run_extract(dir.file("manifest.csv"), dir.file("features.csv"), cfg);
  auto run1 = cli::run_evaluate(dir.file("features.csv"), dir.file("r1"), cfg);

  // second record: different seed gives a different run id
  auto cfg2 = cfg;
  cfg2.seed = 8;
  auto run2 = cli::run_evaluate(dir.file("features.csv"), dir.file("r2"), cfg2);
  CHECK(run1.run_id != run2.run_id);

  auto merged = cli::run_report({run1.run_record, run2.run_record},
                                dir.file("comparison.txt"));
  CHECK(merged.records == 2);
  auto text = slurp(merged.text_path);
  CHECK(text.find(run1.run_id) != std::string::npos);
  CHECK(text.find(run2.run_id) != std::string::npos);
  CHECK(fs::exists(merged.csv_path));

  CHECK_THROWS_AS(
      cli::run_report({run1.run_record, run1.run_record}, dir.file("dup.txt")),
      DataError);

  // a single record reproduces its own table block
  auto single =
      cli::run_report({run1.run_record}, dir.file("single.txt"));
  auto single_text = slurp(single.text_path);
  CHECK(single_text.find("acoustic_11") != std::string::npos);
  CHECK(single_text.find("KNN") != std::string::npos);
}
