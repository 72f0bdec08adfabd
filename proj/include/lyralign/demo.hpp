// include/lyralign/demo.hpp

// Copyright 2026  lyralign authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>
#include <vector>

#include "lyralign/align.hpp"
#include "lyralign/metrics.hpp"
#include "lyralign/model.hpp"

namespace lyralign {

inline constexpr double kDemoMinHeldoutAccuracy = 0.95;
inline constexpr double kDemoMaxMedianBoundaryHops = 1.0;

struct DemoConfig {
  SynthSpec spec;
  std::size_t train_count = 200;
  std::size_t heldout_count = 50;
  std::size_t hidden = 16;
  std::size_t context = 1;
  TrainConfig train;
  std::uint64_t init_seed = 7;
};

struct DemoReport {
  std::vector<double> epoch_loss;
  double initial_loss = 0.0;  // mean loss before the first update
  double train_accuracy = 0.0;
  double heldout_accuracy = 0.0;
  double heldout_accuracy_with_blank = 0.0;  // argmax over every class
  double median_boundary_error = 0.0;  // seconds, held-out onsets+offsets
  double heldout_mae = 0.0;            // seconds
  double frame_hop = 0.0;
  double seconds = 0.0;
  ToyModel model;

  bool accuracy_ok() const { return heldout_accuracy >= kDemoMinHeldoutAccuracy; }
  bool boundary_ok() const {
    return median_boundary_error <= kDemoMaxMedianBoundaryHops * frame_hop + 1e-12;
  }
  bool losses_finite() const {
    return std::all_of(epoch_loss.begin(), epoch_loss.end(),
                       [](double v) { return std::isfinite(v); });
  }
  bool passed() const { return accuracy_ok() && boundary_ok() && losses_finite(); }
};

/// Derives a config whose seeds all follow from one user seed.
inline DemoConfig DemoConfigForSeed(std::uint64_t seed) {
  DemoConfig cfg;
  cfg.spec.seed = seed;
  cfg.train.shuffle_seed = seed ^ 0x5DEECE66DULL;
  cfg.init_seed = seed * 0x9E3779B97F4A7C15ULL + 1;
  return cfg;
}

/// Synthesize, train, predict, align, and score against ground truth.
inline DemoReport RunDemo(const DemoConfig &cfg) {
  const auto start = std::chrono::steady_clock::now();
  const std::vector<SynthItem> train = SynthDataset(cfg.spec, cfg.train_count);
  SynthSpec heldout_spec = cfg.spec;
  heldout_spec.seed = cfg.spec.seed ^ 0xA5A5A5A5A5A5A5A5ULL;
  const std::vector<SynthItem> heldout = SynthDataset(heldout_spec, cfg.heldout_count);
  const Lexicon lex = SynthLexicon(cfg.spec.syllable_classes);

  ToyModel model(cfg.spec.feature_dim, cfg.context, cfg.hidden, lex.class_count());
  model.RandomInit(cfg.init_seed);

  DemoReport report;
  report.frame_hop = cfg.spec.frame_hop;
  double initial = 0.0;
  for (const auto &item : train)
    initial += ItemLossAndGradient(model, item, lex.blank_id(), nullptr);
  report.initial_loss = initial / static_cast<double>(train.size());
  report.epoch_loss = Train(model, train, cfg.train).epoch_loss;
  report.train_accuracy = FramewiseAccuracy(model, train);
  report.heldout_accuracy = FramewiseAccuracy(model, heldout);
  report.heldout_accuracy_with_blank = FramewiseAccuracy(model, heldout, false);

  std::vector<double> errors;
  double mae_sum = 0.0;
  for (const auto &item : heldout) {
    Posteriogram post = PredictPosteriogram(model, item.features);
    AlignOutput out = ViterbiAlign(post, BuildGraph(item.lyrics, lex));
    for (std::size_t k = 0; k < item.reference.segments.size(); ++k) {
      errors.push_back(std::abs(out.result.segments[k].onset -
                                item.reference.segments[k].onset));
      errors.push_back(std::abs(out.result.segments[k].offset -
                                item.reference.segments[k].offset));
    }
    mae_sum += Mae(out.result, item.reference);
  }
  std::sort(errors.begin(), errors.end());
  const std::size_t n = errors.size();
  report.median_boundary_error =
      n % 2 == 1 ? errors[n / 2] : 0.5 * (errors[n / 2 - 1] + errors[n / 2]);
  report.heldout_mae = mae_sum / static_cast<double>(heldout.size());
  report.model = std::move(model);
  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                       .count();
  return report;
}

}  // namespace lyralign
