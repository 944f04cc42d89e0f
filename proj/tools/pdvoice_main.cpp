// pdvoice: voice-based Parkinson's detection pipeline.
//
// Subcommands: segment (split recordings at silent gaps), extract (24
// acoustic+MFCC features per segment), evaluate (grid search + repeated
// stratified k-fold over seven classifiers), report (merge run records).
//
// Exit codes: 0 success, 1 usage/config error, 2 data error, 3 internal.

#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pdvoice/commands.hpp"
#include "pdvoice/errors.hpp"
#include "pdvoice/version.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitInternal = 3;

struct CommonOpts {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> jobs;
  std::optional<std::string> grouping;
};

pdvoice::cli::ExperimentConfig resolve_config(const CommonOpts& opts) {
  auto cfg = opts.config_path.empty()
                 ? pdvoice::cli::default_config()
                 : pdvoice::cli::load_config(opts.config_path);
  if (opts.seed) cfg.seed = *opts.seed;
  if (opts.jobs) cfg.jobs = *opts.jobs;
  if (opts.grouping) cfg.grouping = pdvoice::eval::parse_grouping(*opts.grouping);
  pdvoice::cli::validate_config(cfg);
  return cfg;
}

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path, "JSON config file");
  cmd->add_option("--seed", opts.seed, "Override the config seed");
  cmd->add_option("--jobs", opts.jobs, "Worker threads for per-file stages");
  cmd->add_option("--grouping", opts.grouping,
                  "Cross-validation grouping: segment|subject");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{std::string(pdvoice::kToolName) + " " + pdvoice::kVersion +
               " - speech-based Parkinson's detection pipeline"};
  app.require_subcommand(1);

  CommonOpts seg_opts, ext_opts, eval_opts;
  std::string manifest, out_dir, out_csv, features_csv, out_path;
  std::vector<std::string> record_paths;

  CLI::App* seg = app.add_subcommand(
      "segment", "Split recordings at silent gaps into per-segment WAVs");
  seg->add_option("--manifest", manifest, "CSV: path,label,subject_id")
      ->required();
  seg->add_option("--out", out_dir, "Output directory")->required();
  add_common(seg, seg_opts);

  CLI::App* ext = app.add_subcommand(
      "extract", "Extract the 24-feature vector per manifest entry");
  ext->add_option("--manifest", manifest, "CSV: path,label,subject_id")
      ->required();
  ext->add_option("--out", out_csv, "Output feature CSV")->required();
  add_common(ext, ext_opts);

  CLI::App* eva = app.add_subcommand(
      "evaluate", "Grid search + repeated k-fold over the configured models");
  eva->add_option("--features", features_csv, "Feature CSV from extract")
      ->required();
  eva->add_option("--out", out_dir, "Output directory for report files")
      ->required();
  add_common(eva, eval_opts);

  CLI::App* rep = app.add_subcommand(
      "report", "Merge run records into one comparison table");
  rep->add_option("--records", record_paths, "Run record JSON files")
      ->required()
      ->expected(-1);
  rep->add_option("--out", out_path, "Output text file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (seg->parsed()) {
      auto cfg = resolve_config(seg_opts);
      auto outcome = pdvoice::cli::run_segment(manifest, out_dir, cfg);
      std::cout << "segmented " << outcome.recordings << " recordings into "
                << outcome.segments << " segments\n"
                << "manifest: " << outcome.manifest_path << '\n';
    } else if (ext->parsed()) {
      auto cfg = resolve_config(ext_opts);
      auto outcome = pdvoice::cli::run_extract(manifest, out_csv, cfg);
      std::cout << "extracted " << outcome.rows << " feature rows ("
                << outcome.skipped << " skipped)\n"
                << "features: " << outcome.csv_path << '\n';
    } else if (eva->parsed()) {
      auto cfg = resolve_config(eval_opts);
      auto outcome = pdvoice::cli::run_evaluate(features_csv, out_dir, cfg);
      std::cout << "run " << outcome.run_id << '\n'
                << "report: " << outcome.report_txt << '\n'
                << "record: " << outcome.run_record << '\n';
    } else if (rep->parsed()) {
      auto outcome = pdvoice::cli::run_report(record_paths, out_path);
      std::cout << "merged " << outcome.records << " run records into "
                << outcome.text_path << '\n';
    }
  } catch (const pdvoice::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const pdvoice::PreconditionError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const pdvoice::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const pdvoice::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitOk;
}
