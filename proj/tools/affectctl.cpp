// affectctl: command-line front end for dataset analysis, synthetic data,
// training and evaluation.
//
//   affectctl analyze <manifest> [--space S] [--format json|csv] [--out-dir D]
//   affectctl gen-synthetic <spec.json> [--seed N] [--out-dir D]
//   affectctl train <config.json> [--seed N] [--out-dir D]
//   affectctl evaluate <checkpoint> <manifest> [--space S] [--format json|csv] [--out-dir D]
//   affectctl cross-validate <checkpoint> <manifest> --space S [--format json|csv] [--out-dir D]
//
// Failures print {"error": {"kind": ..., "message": ...}} on stdout and exit
// nonzero (1 for library errors, 2 for usage errors).

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "affect/analysis.hpp"
#include "affect/data.hpp"
#include "affect/error.hpp"
#include "affect/evaluation.hpp"
#include "affect/harness.hpp"
#include "affect/model.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Options {
  std::string format = "json";
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::string space;
};

void print_error(const std::string& kind, const std::string& message) {
  std::cout << json{{"error", {{"kind", kind}, {"message", message}}}}.dump() << "\n";
}

fs::path out_path(const Options& o, const std::string& name) {
  return o.out_dir.empty() ? fs::path(name) : fs::path(o.out_dir) / name;
}

void ensure_out_dir(const Options& o) {
  if (o.out_dir.empty()) return;
  std::error_code ec;
  fs::create_directories(o.out_dir, ec);
  if (ec) affect::fail(affect::ErrorKind::Io, "cannot create " + o.out_dir + ": " + ec.message());
}

json read_json(const fs::path& p, affect::ErrorKind kind) {
  try {
    return json::parse(affect::read_text_file(p));
  } catch (const json::exception& e) {
    affect::fail(kind, p.string() + ": " + e.what());
  }
}

int run_analyze(const Options& o, const std::string& manifest_path) {
  const affect::LabelSpace space = affect::space_by_name(o.space.empty() ? "affectnet8" : o.space);
  const affect::Manifest m = affect::load_manifest(manifest_path, space);
  const auto report = affect::analysis::analyze(m);
  const json j = affect::analysis::to_json(report, space);
  if (o.format == "csv") {
    const std::string categories = affect::analysis::category_csv(report.categories, space);
    std::cout << categories;
    if (!o.out_dir.empty()) {
      ensure_out_dir(o);
      affect::write_text_file(out_path(o, "categories.csv"), categories);
      for (const auto& h : report.histograms) {
        affect::write_text_file(out_path(o, "histogram_" + std::string(affect::dim_name(h.dim)) + ".csv"),
                                affect::analysis::histogram_csv(h));
      }
      if (space.has_dim(affect::Dim::Valence) && space.has_dim(affect::Dim::Arousal)) {
        const auto pts = affect::analysis::scatter_points(m.records, space, m.records.size());
        affect::write_text_file(out_path(o, "scatter.csv"), affect::analysis::scatter_csv(pts, space));
      }
    }
  } else {
    std::cout << j.dump(2) << "\n";
    if (!o.out_dir.empty()) {
      ensure_out_dir(o);
      affect::write_text_file(out_path(o, "report.json"), j.dump(2) + "\n");
    }
  }
  return 0;
}

int run_gen_synthetic(const Options& o, const std::string& spec_path) {
  affect::SyntheticSpec spec = affect::synthetic_spec_from_json(read_json(spec_path, affect::ErrorKind::Spec));
  if (o.seed) spec.seed = *o.seed;
  ensure_out_dir(o);
  json files = json::array();
  for (const auto& [name, count] : spec.splits) {
    const affect::Manifest m = affect::gen_synthetic(spec, affect::parse_split(name), count);
    const fs::path p = out_path(o, name + ".csv");
    affect::save_manifest(m, p);
    files.push_back({{"split", name}, {"path", p.string()}, {"samples", count}});
  }
  std::cout << json{{"space", spec.space}, {"seed", spec.seed}, {"files", files}}.dump(2) << "\n";
  return 0;
}

int run_train(const Options& o, const std::string& config_path) {
  affect::TrainJob job = affect::train_job_from_json(read_json(config_path, affect::ErrorKind::Config),
                                                     fs::path(config_path).parent_path());
  if (o.seed) job.config.seed = *o.seed;
  if (!o.out_dir.empty()) job.config.out_dir = o.out_dir;
  if (!job.config.out_dir) job.config.out_dir = fs::path(".");
  Options eff = o;
  eff.out_dir = job.config.out_dir->string();
  ensure_out_dir(eff);

  const affect::LabelSpace space = affect::space_by_name(job.space);
  const affect::Manifest train_set = affect::load_manifest(job.train_manifest, space);
  std::optional<affect::Manifest> validation;
  if (job.validation_manifest) validation = affect::load_manifest(*job.validation_manifest, space);
  const affect::TrainResult result = affect::train(job.config, train_set, validation ? &*validation : nullptr);
  const json log = affect::to_json(result.log);
  affect::write_text_file(out_path(eff, "runlog.json"), log.dump(2) + "\n");
  json summary = {{"checkpoint", result.log.checkpoint_path},
                  {"runlog", out_path(eff, "runlog.json").string()},
                  {"best_epoch", result.log.best_epoch},
                  {"total_steps", result.log.total_steps}};
  if (!result.log.epochs.empty()) summary["final_loss"] = result.log.epochs.back().loss;
  std::cout << summary.dump(2) << "\n";
  return 0;
}

void emit_report(const Options& o, const affect::EvalReport& rep, const affect::LabelSpace& space) {
  const json j = affect::to_json(rep, space);
  if (o.format == "csv") {
    if (rep.classification && rep.classification->confusion) {
      std::cout << affect::confusion_csv(*rep.classification->confusion, space);
    }
    if (rep.regression) std::cout << affect::cdf_csv(*rep.regression);
  } else {
    std::cout << j.dump(2) << "\n";
  }
  if (o.out_dir.empty()) return;
  ensure_out_dir(o);
  affect::write_text_file(out_path(o, "report.json"), j.dump(2) + "\n");
  if (rep.classification && rep.classification->confusion) {
    affect::write_text_file(out_path(o, "confusion.csv"), affect::confusion_csv(*rep.classification->confusion, space));
  }
  if (rep.regression) affect::write_text_file(out_path(o, "cdf.csv"), affect::cdf_csv(*rep.regression));
}

int run_evaluate(const Options& o, const std::string& ckpt_path, const std::string& manifest_path) {
  const affect::ModelCheckpoint ck = affect::load_checkpoint(ckpt_path);
  const std::string space_name = !o.space.empty() ? o.space : (ck.metadata.space.empty() ? "affectnet8" : ck.metadata.space);
  const affect::LabelSpace space = affect::space_by_name(space_name);
  const affect::Manifest m = affect::load_manifest(manifest_path, space);
  emit_report(o, affect::evaluate(ck, m), space);
  return 0;
}

int run_cross_validate(const Options& o, const std::string& ckpt_path, const std::string& manifest_path) {
  const affect::ModelCheckpoint ck = affect::load_checkpoint(ckpt_path);
  if (o.space.empty()) affect::fail(affect::ErrorKind::Argument, "cross-validate needs --space for the target manifest");
  const affect::LabelSpace space = affect::space_by_name(o.space);
  const affect::Manifest m = affect::load_manifest(manifest_path, space);
  emit_report(o, affect::cross_validate(ck, m), space);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-task affect inference toolkit"};
  app.require_subcommand(1);
  Options o;
  std::uint64_t seed = 0;

  auto add_common = [&](CLI::App* sub, bool with_seed, bool with_space, bool with_format) {
    sub->add_option("--out-dir", o.out_dir, "Directory for output files");
    if (with_seed) sub->add_option("--seed", seed, "Override the seed");
    if (with_space) sub->add_option("--space", o.space, "Label space (affectnet8, affectnet7, emotic26)");
    if (with_format) sub->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
  };

  std::string a, b;
  auto* analyze = app.add_subcommand("analyze", "Distribution statistics for a manifest");
  analyze->add_option("manifest", a)->required();
  add_common(analyze, false, true, true);

  auto* gen = app.add_subcommand("gen-synthetic", "Generate synthetic manifests from a spec");
  gen->add_option("spec", a)->required();
  add_common(gen, true, false, false);

  auto* train = app.add_subcommand("train", "Train a model from a JSON config");
  train->add_option("config", a)->required();
  add_common(train, true, false, false);

  auto* eval = app.add_subcommand("evaluate", "Evaluate a checkpoint on a manifest");
  eval->add_option("checkpoint", a)->required();
  eval->add_option("manifest", b)->required();
  add_common(eval, false, true, true);

  auto* cross = app.add_subcommand("cross-validate", "Evaluate a checkpoint on another dataset's manifest");
  cross->add_option("checkpoint", a)->required();
  cross->add_option("manifest", b)->required();
  add_common(cross, false, true, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("usage", e.what());
    return 2;
  }
  for (auto* sub : {gen, train}) {
    if (sub->parsed() && sub->count("--seed") > 0) o.seed = seed;
  }

  try {
    if (analyze->parsed()) return run_analyze(o, a);
    if (gen->parsed()) return run_gen_synthetic(o, a);
    if (train->parsed()) return run_train(o, a);
    if (eval->parsed()) return run_evaluate(o, a, b);
    if (cross->parsed()) return run_cross_validate(o, a, b);
  } catch (const affect::AffectError& e) {
    print_error(std::string(affect::kind_name(e.kind())), e.what());
    return 1;
  } catch (const std::exception& e) {
    print_error("internal", e.what());
    return 1;
  }
  return 0;
}
