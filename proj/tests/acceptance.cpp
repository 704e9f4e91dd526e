// Acceptance run: one PASS/FAIL line per criterion, non-zero exit on failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <tuple>

#include "oracles.hpp"

#include "fallcascade/cascade/cascade.hpp"
#include "fallcascade/cascade/pipeline.hpp"
#include "fallcascade/cleaning/confident_learning.hpp"
#include "fallcascade/data/preprocess.hpp"
#include "fallcascade/data/split.hpp"
#include "fallcascade/data/synth.hpp"
#include "fallcascade/metrics/classification_report.hpp"
#include "fallcascade/net/loss.hpp"

using namespace fallcascade;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// The fast profile as resolved by the command line front end.
cascade::PipelineConfig fast_config(std::uint64_t seed) {
  cascade::PipelineConfig cfg;
  cfg.train.epochs_bfc = cascade::kFastEpochsBfc;
  cfg.train.epochs_mfec = cascade::kFastEpochsMfec;
  cfg.train.learning_rate = cascade::kFastLearningRate;
  cfg.train.seed = seed;
  cfg.synth.seed = seed;
  cfg.split.seed = seed;
  cfg.cleaning.trainer.seed = seed;
  return cfg;
}

struct SharedRun {
  cascade::PipelineResult result;
  double seconds = 0.0;
  fs::path dir;
};

SharedRun& default_run() {
  static SharedRun run = [] {
    SharedRun r;
    r.dir = fs::temp_directory_path() / "fallcascade_acceptance_a";
    fs::remove_all(r.dir);
    const auto t0 = Clock::now();
    r.result = cascade::run_full_pipeline(fast_config(7), {r.dir, nullptr});
    r.seconds = seconds_since(t0);
    return r;
  }();
  return run;
}

Outcome gradient_oracle() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2024);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const bool binary = trial % 2 == 0;
    const int classes = binary ? 1 : 5;
    const auto arch = oracle::random_small_architecture(rng, classes, true);
    auto net = net::build_network(6, classes, arch, rng());
    oracle::jitter_parameters(net, rng, 0.1);
    const int rows = 4;
    const auto x = oracle::random_matrix(rng, rows, 6);
    std::vector<int> y(static_cast<std::size_t>(rows));
    for (auto& v : y) v = static_cast<int>(rng() % (binary ? 2 : classes));
    const auto kind = binary ? net::LossKind::binary : net::LossKind::sparse_categorical;
    const net::Gradients grads = net.backward(net.forward(x), y, kind, net::kDefaultHeadWeights);
    const auto analytic = grads.tensors();
    const auto numeric = oracle::finite_difference_gradients(net, x, y, kind, net::kDefaultHeadWeights, 1e-4);
    for (std::size_t t = 0; t < analytic.size(); ++t) {
      for (std::size_t k = 0; k < analytic[t].size(); ++k) {
        worst = std::max(worst, oracle::relative_error(analytic[t][k], numeric[t][k]));
      }
    }
  }
  const double secs = seconds_since(t0);
  std::ostringstream d;
  d << "20 networks, worst relative error " << worst << ", " << secs << " s";
  return {worst < 1e-4 && secs < 30.0, d.str()};
}

Outcome loss_identities() {
  net::HeadOutputs half, uniform;
  for (auto& h : half) h = net::Matrix::Constant(4, 1, 0.5);
  for (auto& h : uniform) h = net::Matrix::Constant(4, 5, 0.2);
  const std::vector<int> yb{0, 1, 1, 0}, ym{0, 4, 2, 3};
  const double lb = net::loss_bfc(half, yb, net::kDefaultHeadWeights);
  const double lm = net::loss_mfec(uniform, ym, net::kDefaultHeadWeights);
  std::mt19937_64 rng(5);
  double worst_decomp = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const int classes = trial % 2 ? 5 : 1;
    const auto kind = classes == 1 ? net::LossKind::binary : net::LossKind::sparse_categorical;
    std::uniform_real_distribution<double> u(0.01, 0.99), w(0.1, 3.0);
    net::HeadOutputs heads;
    std::vector<int> y(6);
    for (auto& v : y) v = static_cast<int>(rng() % (classes == 1 ? 2 : 5));
    for (auto& h : heads) {
      h = net::Matrix(6, classes);
      for (Eigen::Index r = 0; r < h.rows(); ++r) {
        for (Eigen::Index c = 0; c < h.cols(); ++c) h(r, c) = u(rng);
        if (classes > 1) h.row(r) /= h.row(r).sum();
      }
    }
    const net::HeadWeights omega{w(rng), w(rng), w(rng)};
    double by_hand = 0.0;
    for (int i = 0; i < net::kHeadCount; ++i) by_hand += omega[static_cast<std::size_t>(i)] * net::head_loss(kind, heads[static_cast<std::size_t>(i)], y);
    worst_decomp = std::max(worst_decomp, std::abs(net::weighted_loss(kind, heads, y, omega) - by_hand));
  }
  std::ostringstream d;
  d << "binary " << lb << " vs ln2 (diff " << std::abs(lb - std::log(2.0)) << "), 5-class " << lm << " vs ln5 (diff "
    << std::abs(lm - std::log(5.0)) << "), decomposition diff " << worst_decomp;
  return {std::abs(lb - std::log(2.0)) <= 1e-9 && std::abs(lm - std::log(5.0)) <= 1e-9 && worst_decomp <= 1e-12, d.str()};
}

Outcome separable_bfc() {
  auto& run = default_run();
  const auto& test = run.result.test;
  const auto p = cascade::fall_probabilities(run.result.model.bfc, data::feature_matrix(test));
  std::int64_t tp = 0, fn = 0, correct = 0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    const int pred = p[i] >= 0.5 ? 1 : 0;
    correct += pred == test[i].binary_label;
    if (test[i].binary_label == 1) (pred ? tp : fn) += 1;
  }
  const double recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  const double accuracy = static_cast<double>(correct) / static_cast<double>(test.size());
  std::ostringstream d;
  d << "held-out fall recall " << recall << " (" << tp << "/" << tp + fn << "), accuracy " << accuracy << ", "
    << test.size() << " test samples, pipeline " << run.seconds << " s";
  return {recall >= 0.99 && accuracy >= 0.99 && run.seconds < 300.0, d.str()};
}

Outcome separable_cascade() {
  const auto& falls = default_run().result.evaluation.falls;
  std::ostringstream d;
  d << "5-class macro-F1 " << falls.macro_f1 << " over " << falls.matrix.total() << " held-out falls";
  return {falls.macro_f1 >= 0.95, d.str()};
}

double worst_fall_f1(const metrics::ClassificationReport& r) {
  double worst = 1.0;
  for (int c = 0; c < data::kFallClassCount; ++c) worst = std::min(worst, r.classes[static_cast<std::size_t>(c)].f1);
  return worst;
}

Outcome threshold_direction() {
  int wins = 0;
  std::ostringstream d;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto synth = data::SynthConfig::with_fall_fraction(2000, 0.1);
    synth.seed = seed;
    synth.boundary_separation = 1.5;
    const auto samples = data::synthesize_dataset(synth);
    const auto [train, test] = data::split(samples, {0.7, data::SplitStrategy::random_stratified, seed});
    auto cfg = fast_config(seed).train;
    const auto bfc = cascade::train_bfc(train, cfg);
    double f1[2];
    for (int k = 0; k < 2; ++k) {
      auto c = cfg;
      if (k == 1) c.m = c.n = 0.0;
      const auto multi = cascade::derive_multiclass_set(train, cascade::build_binary_map(bfc.net, train, c.m, c.n));
      const auto mfec = cascade::train_mfec(multi.samples, c);
      const cascade::CascadeModel model{bfc.net, mfec.net, c, data::fall_class_labels()};
      f1[k] = worst_fall_f1(cascade::evaluate(model, test).falls);
    }
    wins += f1[0] >= f1[1];
    d << (seed > 1 ? "; " : "") << f1[0] << (f1[0] >= f1[1] ? ">=" : "<") << f1[1];
  }
  return {wins >= 8, std::to_string(wins) + "/10 seeds with banded worst F1 >= zero-band worst F1 (" + d.str() + ")"};
}

Outcome filtering_property() {
  const auto& model = default_run().result.model;
  data::SynthConfig synth = data::SynthConfig::with_fall_fraction(5000, 0.3);
  synth.seed = 99;
  auto samples = data::synthesize_dataset(synth);
  std::mt19937_64 rng(17);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int i = 0; i < 5000; ++i) {
    data::FeatureVector s;
    for (auto& v : s.values) v = g(rng);
    samples.push_back(s);
  }
  const auto x = data::feature_matrix(samples);
  cascade::InferenceCounters batch;
  const auto preds = model.predict_batch(x, &batch);
  std::int64_t no_fall = 0, leaked = 0, routed = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (preds[i].decision != cascade::Decision::no_fall) {
      ++routed;
      continue;
    }
    ++no_fall;
    cascade::InferenceCounters single;
    const auto p = model.predict(samples[i], &single);
    leaked += single.mfec_rows.load() + single.mfec_calls.load() + (p.is_fall() ? 1 : 0);
  }
  std::ostringstream d;
  d << samples.size() << " samples, " << no_fall << " decided no_fall with " << leaked << " MFEC invocations; batch routed "
    << batch.mfec_rows.load() << " rows for " << routed << " fall/uncertain decisions";
  return {samples.size() == 10000 && no_fall > 0 && routed > 0 && leaked == 0 && batch.mfec_rows.load() == routed, d.str()};
}

Outcome cleaning_oracle() {
  const auto catalog = data::ActivityCatalog::up_fall();
  const auto attempt = [&catalog](double rate, std::uint64_t seed) {
    data::SynthConfig cfg;
    cfg.seed = seed;
    cfg.per_class_counts.fill(120);
    auto samples = data::synthesize_dataset(cfg);
    std::set<std::size_t> corrupted;
    std::mt19937_64 rng(seed + 1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<int> shift(1, data::kActivityCount - 1);
    for (std::size_t i = 0; i < samples.size(); ++i) {
      if (u(rng) >= rate) continue;
      samples[i].activity_code = (samples[i].activity_code - 1 + shift(rng)) % data::kActivityCount + 1;
      corrupted.insert(i);
    }
    const auto report = cleaning::confident_learning(samples, catalog, {});
    std::size_t caught = 0, false_flags = 0;
    for (auto i : report.flagged_indices()) (corrupted.count(i) ? caught : false_flags) += 1;
    return std::tuple{caught, corrupted.size(), false_flags, samples.size() - corrupted.size()};
  };
  const auto [caught, noisy, false_flags, clean] = attempt(0.10, 31);
  const auto [caught0, noisy0, flagged0, total0] = attempt(0.0, 32);
  const double hit = static_cast<double>(caught) / static_cast<double>(noisy);
  const double false_rate = static_cast<double>(false_flags) / static_cast<double>(clean);
  const double zero_rate = static_cast<double>(flagged0) / static_cast<double>(total0);
  std::ostringstream d;
  d << "10% noise: flagged " << caught << "/" << noisy << " corrupted (" << hit << "), " << false_flags << "/" << clean
    << " clean (" << false_rate << "); 0% noise: flagged " << flagged0 << "/" << total0 << " (" << zero_rate << ")";
  (void)caught0;
  (void)noisy0;
  return {hit >= 0.8 && false_rate <= 0.05 && zero_rate <= 0.02, d.str()};
}

Outcome preprocessing_properties() {
  const auto catalog = data::ActivityCatalog::up_fall();
  data::SynthConfig cfg;
  cfg.per_class_counts.fill(50);
  const auto samples = data::synthesize_dataset(cfg);
  data::RenderOptions ro;
  ro.reflection_fraction = 0.5;
  const auto frames = data::render_frames(samples, ro);
  const auto kept = data::select_primary_subject(frames);
  std::set<std::tuple<int, int, int, long long>> keys;
  bool unique = true;
  for (const auto& f : kept) unique &= keys.insert({f.subject_id, f.trial_id, f.camera_id, f.frame_id}).second;
  std::set<std::tuple<int, int, int, long long>> input_keys;
  for (const auto& f : frames) input_keys.insert({f.subject_id, f.trial_id, f.camera_id, f.frame_id});
  unique &= keys == input_keys;

  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> coord(20.0, 600.0), conf(0.0, 1.0), shift(-1000.0, 1000.0), scale(0.2, 8.0);
  double worst = 0.0;
  for (int trial = 0; trial < 500; ++trial) {
    data::SkeletonFrame f;
    f.activity_code = 1 + trial % 11;
    for (auto& kp : f.keypoints) kp = {coord(rng), coord(rng), conf(rng)};
    f.keypoints[data::kLeftHip].confidence = 0.9;
    f.keypoints[3].confidence = 0.9;
    const auto base = data::normalize(f, catalog);
    auto moved = f, scaled = f;
    const double dx = shift(rng), dy = shift(rng), s = scale(rng);
    for (std::size_t k = 0; k < data::kKeypointCount; ++k) {
      moved.keypoints[k].x += dx;
      moved.keypoints[k].y += dy;
      scaled.keypoints[k].x *= s;
      scaled.keypoints[k].y *= s;
    }
    const auto a = data::normalize(moved, catalog);
    const auto b = data::normalize(scaled, catalog);
    for (std::size_t i = 0; i < data::kFeatureWidth; ++i) {
      worst = std::max({worst, std::abs(a.values[i] - base.values[i]), std::abs(b.values[i] - base.values[i])});
    }
  }

  const data::BlankFrameRule rule;
  data::SkeletonFrame boundary;
  for (std::size_t k = 0; k < data::kKeypointCount; ++k) {
    boundary.keypoints[k] = {10.0 * static_cast<double>(k), 5.0 * static_cast<double>(k),
                             k < static_cast<std::size_t>(rule.min_keypoints) ? 0.5 : rule.min_confidence};
  }
  auto below = boundary;
  below.keypoints[0].confidence = 0.0;
  const bool boundary_kept = data::remove_blank_frames({boundary}, rule).size() == 1;
  const bool below_dropped = data::remove_blank_frames({below}, rule).empty();

  std::ostringstream d;
  d << kept.size() << " frames from " << frames.size() << " detections, unique " << (unique ? "yes" : "no")
    << "; invariance max diff " << worst << "; K_min boundary kept " << (boundary_kept ? "yes" : "no")
    << ", one below dropped " << (below_dropped ? "yes" : "no");
  return {unique && worst <= 1e-12 && boundary_kept && below_dropped, d.str()};
}

Outcome determinism() {
  const auto& first = default_run();
  const auto dir = fs::temp_directory_path() / "fallcascade_acceptance_b";
  fs::remove_all(dir);
  cascade::run_full_pipeline(fast_config(7), {dir, nullptr});
  std::vector<std::string> differing;
  const std::vector<std::string> files{"bfc.json", "mfec.json", "cascade.json", "report_binary.csv", "report_falls.csv"};
  for (const auto& f : files) {
    if (slurp(first.dir / f).empty() || slurp(first.dir / f) != slurp(dir / f)) differing.push_back(f);
  }
  fs::remove_all(dir);
  std::string detail = differing.empty() ? "model JSON and report CSV files byte-identical across two seed-7 runs"
                                         : "differing files:";
  for (const auto& f : differing) detail += " " + f;
  return {differing.empty(), detail};
}

Outcome metrics_oracle() {
  std::mt19937_64 rng(77);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t c = 2 + rng() % 6;
    metrics::ConfusionMatrix m(c);
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < c; ++i) {
      labels.push_back("c" + std::to_string(i));
      for (std::size_t j = 0; j < c; ++j) m.at(i, j) = static_cast<std::int64_t>(rng() % (i == j ? 60 : 15));
    }
    const auto r = metrics::report(m, labels);
    double f1_sum = 0.0;
    int with_support = 0;
    for (std::size_t k = 0; k < c; ++k) {
      double tp = 0, row = 0, col = 0;
      for (std::size_t j = 0; j < c; ++j) {
        row += static_cast<double>(m.at(k, j));
        col += static_cast<double>(m.at(j, k));
      }
      tp = static_cast<double>(m.at(k, k));
      const double p = col > 0 ? tp / col : 0.0;
      const double rec = row > 0 ? tp / row : 0.0;
      const double f1 = p + rec > 0 ? 2 * p * rec / (p + rec) : 0.0;
      if (row > 0) {
        f1_sum += f1;
        ++with_support;
      }
      worst = std::max({worst, std::abs(p - r.classes[k].precision), std::abs(rec - r.classes[k].recall),
                        std::abs(f1 - r.classes[k].f1)});
    }
    worst = std::max(worst, std::abs(f1_sum / with_support - r.macro_f1));
  }
  metrics::ConfusionMatrix table(2);
  table.at(1, 1) = 1788;
  table.at(1, 0) = 1803 - 1788;
  table.at(0, 0) = 10;
  const double recall = metrics::report(table, {"no_fall", "fall"})["fall"].recall;
  std::ostringstream d;
  d << "50 matrices, max deviation " << worst << "; fixture recall " << recall << " (1788/1803)";
  return {worst <= 1e-12 && recall == 1788.0 / 1803.0 && std::abs(recall - 0.9917) < 5e-5, d.str()};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"gradient oracle", gradient_oracle},
      {"loss identities", loss_identities},
      {"separable-synth BFC", separable_bfc},
      {"separable-synth cascade", separable_cascade},
      {"threshold directional check", threshold_direction},
      {"cascade filtering", filtering_property},
      {"label-cleaning oracle", cleaning_oracle},
      {"preprocessing properties", preprocessing_properties},
      {"determinism", determinism},
      {"metrics oracle", metrics_oracle},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::cout << "criterion " << i + 1 << " [" << criteria[i].first << "]: " << (o.pass ? "PASS" : "FAIL") << " - "
              << o.detail << std::endl;
  }
  fs::remove_all(fs::temp_directory_path() / "fallcascade_acceptance_a");
  return failures == 0 ? 0 : 1;
}
