#include "fallcascade/cli/app.hpp"

#include <fstream>
#include <iostream>

#include "CLI11.hpp"

#include "fallcascade/cascade/cascade.hpp"
#include "fallcascade/cascade/pipeline.hpp"
#include "fallcascade/data/keypoint_csv.hpp"
#include "fallcascade/error.hpp"
#include "fallcascade/metrics/classification_report.hpp"
#include "fallcascade/net/model_io.hpp"

namespace fallcascade::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json parse_value(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception&) {
    return text;
  }
}

void apply_set(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("--set expects key=value, got '" + assignment + "'");
  const std::string key = assignment.substr(0, eq);
  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ConfigError("--set key '" + key + "' has an empty component");
    if (node->is_null()) *node = json::object();
    if (!node->is_object()) throw ConfigError("--set key '" + key + "' descends into a non-object");
    node = &(*node)[part];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  *node = parse_value(assignment.substr(eq + 1));
}

json read_json_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config file '" + path.string() + "' is not valid JSON: " + e.what());
  }
}

void write_json(const fs::path& path, const json& doc) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << doc.dump(2) << '\n';
}

template <typename F>
auto tagged(const char* stage, F&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (Error& e) {
    if (e.stage().empty()) e.set_stage(stage);
    throw;
  } catch (const fs::filesystem_error& e) {
    DataError err(e.what());
    err.set_stage(stage);
    throw err;
  }
}

std::vector<std::string> activity_names(const data::ActivityCatalog& catalog) {
  std::vector<std::string> names;
  for (const auto& e : catalog.entries()) names.push_back(e.name);
  return names;
}

data::Dataset load_inputs(const std::vector<std::string>& inputs, const cascade::PipelineConfig& cfg) {
  data::Dataset all;
  for (const auto& p : inputs) {
    auto more = cascade::load_samples(p, cfg.blank_frames, cfg.activities);
    all.insert(all.end(), more.begin(), more.end());
  }
  return all;
}

// One feature vector per input row, without frame filtering.
data::Dataset load_rows(const fs::path& path, const cascade::PipelineConfig& cfg) {
  if (!fs::exists(path)) throw DataError("input file '" + path.string() + "' does not exist");
  if (data::is_dataset_csv(path)) return data::read_dataset_csv(path, cfg.activities);
  return data::normalize_all(data::parse_keypoint_csv(path), cfg.activities, cfg.blank_frames);
}

struct Args {
  std::string config;
  std::string out;
  std::vector<std::string> inputs;
  std::string model;
  Overrides overrides;
  std::uint64_t seed = 0;
};

void prepare_out(const Args& a, const cascade::PipelineConfig& cfg) {
  fs::create_directories(a.out);
  write_json(fs::path(a.out) / "config.json", cascade::to_json(cfg));
}

int run_command(const std::string& name, const Args& a, std::ostream& out, std::ostream& err) {
  const std::optional<fs::path> config_path = a.config.empty() ? std::nullopt : std::optional<fs::path>(a.config);
  const auto cfg = tagged("config", [&] { return resolve_config(config_path, a.overrides); });

  if (name == "pipeline") {
    err << "config: " << cascade::to_json(cfg).dump() << '\n';
    const auto r = cascade::run_full_pipeline(cfg, {a.out, &err});
    out << metrics::format_report(r.evaluation.binary) << '\n' << metrics::format_report(r.evaluation.falls);
    return 0;
  }
  if (name == "synth") {
    return tagged("synth", [&] {
      prepare_out(a, cfg);
      const auto samples = data::synthesize_dataset(cfg.synth, cfg.activities);
      data::write_dataset_csv(fs::path(a.out) / "dataset.csv", samples);
      std::ofstream kp(fs::path(a.out) / "keypoints.csv", std::ios::binary);
      data::RenderOptions ro;
      ro.seed = cfg.synth.seed;
      data::write_keypoint_csv(kp, data::render_frames(samples, ro));
      out << samples.size() << " samples written to " << a.out << '\n';
      return 0;
    });
  }
  if (name == "prep") {
    return tagged("prep", [&] {
      prepare_out(a, cfg);
      const auto samples = load_inputs(a.inputs, cfg);
      data::write_dataset_csv(fs::path(a.out) / "dataset.csv", samples);
      out << samples.size() << " samples written to " << a.out << '\n';
      return 0;
    });
  }
  if (name == "clean-labels") {
    return tagged("clean", [&] {
      prepare_out(a, cfg);
      const auto samples = load_inputs(a.inputs, cfg);
      const auto report = cleaning::confident_learning(
          samples, cfg.activities, {cfg.cleaning.folds, cfg.cleaning.trainer.seed, cfg.cleaning.trainer});
      const fs::path dir(a.out);
      cleaning::write_cleaning_report(report, activity_names(cfg.activities), dir / "cleaning_report.csv",
                                      dir / "cleaning_report.json");
      std::vector<std::string> warnings;
      const auto kept = cleaning::clean(samples, report, &warnings);
      for (const auto& w : warnings) err << "warning: " << w << '\n';
      data::write_dataset_csv(dir / "dataset.csv", kept);
      out << report.flagged_count() << " of " << samples.size() << " samples flagged\n";
      return 0;
    });
  }
  if (name == "train-bfc") {
    const auto samples = tagged("load", [&] { return load_inputs(a.inputs, cfg); });
    return tagged("train_bfc", [&] {
      prepare_out(a, cfg);
      const auto r = cascade::train_bfc(samples, cfg.train);
      const fs::path dir(a.out);
      net::save_model(r.net, dir / "bfc.json");
      cascade::write_training_log(dir / "bfc_log.csv", r.log, "fall_recall");
      cascade::write_binary_map(dir / "qbin.csv", cascade::build_binary_map(r.net, samples, cfg.train.m, cfg.train.n));
      out << "final loss " << r.log.back().loss << '\n';
      return 0;
    });
  }
  if (name == "train-mfec") {
    const auto samples = tagged("load", [&] { return load_inputs(a.inputs, cfg); });
    return tagged("train_mfec", [&] {
      prepare_out(a, cfg);
      const fs::path dir(a.out);
      std::optional<net::Network> bfc;
      cascade::MulticlassSet multi;
      if (!a.model.empty()) {
        bfc = net::load_model(fs::path(a.model) / "bfc.json");
        multi = cascade::derive_multiclass_set(samples, cascade::build_binary_map(*bfc, samples, cfg.train.m, cfg.train.n));
      } else {
        for (const auto& s : samples) {
          if (s.multi_label) multi.samples.push_back(s);
        }
      }
      const auto r = cascade::train_mfec(multi.samples, cfg.train);
      net::save_model(r.net, dir / "mfec.json");
      cascade::write_training_log(dir / "mfec_log.csv", r.log, "macro_f1");
      if (bfc) cascade::save_cascade({*bfc, r.net, cfg.train, data::fall_class_labels()}, dir);
      out << multi.samples.size() << " fall samples, final loss " << r.log.back().loss << '\n';
      return 0;
    });
  }
  if (name == "eval") {
    const auto model = tagged("load_model", [&] { return cascade::load_cascade(a.model); });
    const auto samples = tagged("load", [&] { return load_inputs(a.inputs, cfg); });
    return tagged("evaluate", [&] {
      const auto e = cascade::evaluate(model, samples);
      if (!a.out.empty()) {
        prepare_out(a, cfg);
        cascade::write_evaluation(e, a.out);
      }
      out << metrics::format_report(e.binary) << '\n' << metrics::format_report(e.falls);
      return 0;
    });
  }
  if (name == "predict") {
    const auto model = tagged("load_model", [&] { return cascade::load_cascade(a.model); });
    data::Dataset rows;
    for (const auto& p : a.inputs) {
      auto more = tagged("load", [&] { return load_rows(p, cfg); });
      rows.insert(rows.end(), more.begin(), more.end());
    }
    return tagged("predict", [&] {
      if (rows.empty()) return 0;
      for (const auto& p : model.predict_batch(data::feature_matrix(rows))) out << model.label_of(p) << '\n';
      return 0;
    });
  }
  throw InternalError("unhandled command '" + name + "'");
}

}  // namespace

json resolve_config_json(const std::optional<fs::path>& path, const Overrides& overrides) {
  json doc = json::object();
  if (path) {
    doc = read_json_file(*path);
    if (!doc.is_object()) throw ConfigError("config file '" + path->string() + "' must hold a JSON object");
  }
  if (overrides.fast) {
    doc["epochs_bfc"] = cascade::kFastEpochsBfc;
    doc["epochs_mfec"] = cascade::kFastEpochsMfec;
    doc["learning_rate"] = cascade::kFastLearningRate;
  }
  if (overrides.seed) {
    doc["seed"] = *overrides.seed;
    for (const char* section : {"synth", "split", "cleaning"}) {
      if (doc.contains(section) && doc[section].is_object() && doc[section].contains("seed")) {
        doc[section]["seed"] = *overrides.seed;
      }
    }
  }
  for (const auto& s : overrides.sets) apply_set(doc, s);
  return cascade::to_json(cascade::pipeline_config_from_json(doc));
}

cascade::PipelineConfig resolve_config(const std::optional<fs::path>& path, const Overrides& overrides) {
  return cascade::pipeline_config_from_json(resolve_config_json(path, overrides));
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Two-stage fall detection: binary fall filter followed by a fall-type classifier", "fallcascade"};
  app.require_subcommand(1, 1);
  Args a;
  std::vector<std::string> with_seed;

  const auto common = [&a](CLI::App* cmd) {
    cmd->add_option("--config", a.config, "JSON config file")->check(CLI::ExistingFile);
    cmd->add_flag("--fast", a.overrides.fast, "short training profile (30/60 epochs, learning rate 1e-3)");
    cmd->add_option("--seed", a.seed, "random seed for every stage");
    cmd->add_option("--set", a.overrides.sets, "dotted config override key=value")->take_all()->allow_extra_args(false);
  };

  auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
  common(synth);
  synth->add_option("--out", a.out, "output directory")->required();

  auto* prep = app.add_subcommand("prep", "preprocess keypoint CSVs into a dataset");
  common(prep);
  prep->add_option("--input", a.inputs, "keypoint CSV")->required();
  prep->add_option("--out", a.out, "output directory")->required();

  auto* clean = app.add_subcommand("clean-labels", "flag and drop likely mislabelled samples");
  common(clean);
  clean->add_option("--input", a.inputs, "dataset or keypoint CSV")->required();
  clean->add_option("--out", a.out, "output directory")->required();

  auto* bfc = app.add_subcommand("train-bfc", "train the binary fall classifier");
  common(bfc);
  bfc->add_option("--input", a.inputs, "dataset or keypoint CSV")->required();
  bfc->add_option("--out", a.out, "output directory")->required();

  auto* mfec = app.add_subcommand("train-mfec", "train the fall-type classifier");
  common(mfec);
  mfec->add_option("--input", a.inputs, "dataset or keypoint CSV")->required();
  mfec->add_option("--out", a.out, "output directory")->required();
  mfec->add_option("--model", a.model, "directory holding bfc.json used to select the training falls");

  auto* pipeline = app.add_subcommand("pipeline", "run every stage end to end");
  common(pipeline);
  pipeline->get_option("--config")->required();
  pipeline->add_option("--out", a.out, "output directory")->required();

  auto* eval = app.add_subcommand("eval", "evaluate a trained cascade");
  common(eval);
  eval->add_option("--model", a.model, "model directory")->required();
  eval->add_option("--input", a.inputs, "dataset or keypoint CSV")->required();
  eval->add_option("--out", a.out, "write reports here");

  auto* predict = app.add_subcommand("predict", "print one class name per input row");
  common(predict);
  predict->add_option("--model", a.model, "model directory")->required();
  predict->add_option("--input", a.inputs, "dataset or keypoint CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return 0;
    }
    err << "error: " << e.what() << "\n\n";
    const auto subs = app.get_subcommands();
    err << (subs.empty() ? app.help() : subs.front()->help());
    return 1;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  if (app.get_subcommands().front()->count("--seed")) a.overrides.seed = a.seed;
  try {
    return run_command(name, a, out, err);
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << '\n';
    return 1;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return 2;
  } catch (const TrainingError& e) {
    err << "training error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return 4;
  }
}

}  // namespace fallcascade::cli
