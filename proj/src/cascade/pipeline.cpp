#include "fallcascade/cascade/pipeline.hpp"

#include <fstream>
#include <ostream>
#include <utility>

#include "fallcascade/data/keypoint_csv.hpp"
#include "fallcascade/error.hpp"

namespace fallcascade::cascade {

namespace {

template <typename F>
auto stage(const char* name, std::ostream* log, F&& fn) -> decltype(fn()) {
  if (log) *log << "[" << name << "]\n";
  try {
    return fn();
  } catch (Error& e) {
    if (e.stage().empty()) e.set_stage(name);
    throw;
  } catch (const std::filesystem::filesystem_error& e) {
    DataError err(e.what());
    err.set_stage(name);
    throw err;
  }
}

std::vector<std::string> activity_names(const data::ActivityCatalog& catalog) {
  std::vector<std::string> names;
  for (const auto& e : catalog.entries()) names.push_back(e.name);
  return names;
}

}  // namespace

data::Dataset preprocess_frames(const std::vector<data::SkeletonFrame>& frames, const data::BlankFrameRule& rule,
                                const data::ActivityCatalog& catalog) {
  const auto kept = data::select_primary_subject(data::remove_blank_frames(frames, rule), rule);
  return data::normalize_all(kept, catalog, rule);
}

data::Dataset load_samples(const std::filesystem::path& path, const data::BlankFrameRule& rule,
                           const data::ActivityCatalog& catalog) {
  if (!std::filesystem::exists(path)) throw DataError("input file '" + path.string() + "' does not exist");
  if (data::is_dataset_csv(path)) return data::read_dataset_csv(path, catalog);
  return preprocess_frames(data::parse_keypoint_csv(path), rule, catalog);
}

data::Dataset load_pipeline_data(const PipelineConfig& cfg) {
  if (!cfg.inputs.empty()) {
    std::vector<data::SkeletonFrame> frames;
    for (const auto& p : cfg.inputs) {
      if (!std::filesystem::exists(p)) throw DataError("input file '" + p + "' does not exist");
      auto more = data::parse_keypoint_csv(std::filesystem::path(p));
      frames.insert(frames.end(), more.begin(), more.end());
    }
    return preprocess_frames(frames, cfg.blank_frames, cfg.activities);
  }
  if (!cfg.dataset.empty()) return load_samples(cfg.dataset, cfg.blank_frames, cfg.activities);
  return data::synthesize_dataset(cfg.synth, cfg.activities);
}

PipelineResult run_full_pipeline(const PipelineConfig& cfg, const PipelineOptions& options) {
  std::ostream* log = options.log;
  stage("config", log, [&] { cfg.validate(); });
  const auto& out = options.out_dir;
  if (!out.empty()) {
    stage("output", log, [&] {
      std::filesystem::create_directories(out);
      std::ofstream f(out / "config.json", std::ios::binary);
      if (!f) throw DataError("cannot write '" + (out / "config.json").string() + "'");
      f << to_json(cfg).dump(2) << '\n';
    });
  }

  PipelineResult result;
  data::Dataset samples = stage("load", log, [&] { return load_pipeline_data(cfg); });
  result.samples = samples.size();
  if (log) *log << "  " << samples.size() << " samples\n";

  if (cfg.cleaning.enabled) {
    samples = stage("clean", log, [&] {
      cleaning::CleaningOptions copts{cfg.cleaning.folds, cfg.cleaning.trainer.seed, cfg.cleaning.trainer};
      const auto report = cleaning::confident_learning(samples, cfg.activities, copts);
      if (!out.empty()) {
        cleaning::write_cleaning_report(report, activity_names(cfg.activities), out / "cleaning_report.csv",
                                        out / "cleaning_report.json");
      }
      result.flagged = report.flagged_count();
      std::vector<std::string> warnings;
      auto kept = cleaning::clean(samples, report, &warnings);
      if (log) {
        for (const auto& w : warnings) *log << "  warning: " << w << '\n';
        *log << "  flagged " << result.flagged << " samples\n";
      }
      return kept;
    });
  }

  auto [train, test] = stage("split", log, [&] { return data::split(samples, cfg.split); });
  result.train_size = train.size();
  result.test_size = test.size();
  if (log) *log << "  train " << train.size() << ", test " << test.size() << '\n';

  auto bfc = stage("train_bfc", log, [&] { return train_bfc(train, cfg.train); });
  result.qbin = stage("binary_map", log, [&] { return build_binary_map(bfc.net, train, cfg.train.m, cfg.train.n); });
  const auto multi = stage("derive_multiclass", log, [&] { return derive_multiclass_set(train, result.qbin); });
  result.multiclass_size = multi.samples.size();
  if (log) *log << "  " << multi.samples.size() << " fall samples for the multi-class stage\n";
  auto mfec = stage("train_mfec", log, [&] { return train_mfec(multi.samples, cfg.train); });

  result.model.bfc = std::move(bfc.net);
  result.model.mfec = std::move(mfec.net);
  result.model.config = cfg.train;
  result.evaluation = stage("evaluate", log, [&] { return evaluate(result.model, test); });

  if (!out.empty()) {
    stage("output", log, [&] {
      save_cascade(result.model, out);
      write_binary_map(out / "qbin.csv", result.qbin);
      write_training_log(out / "bfc_log.csv", bfc.log, "fall_recall");
      write_training_log(out / "mfec_log.csv", mfec.log, "macro_f1");
      write_evaluation(result.evaluation, out);
    });
  }
  result.test = std::move(test);
  return result;
}

}  // namespace fallcascade::cascade
