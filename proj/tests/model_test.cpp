// tests/model_test.cpp

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

#include <cmath>
#include <filesystem>
#include <random>

#include <gtest/gtest.h>

#include "lyralign/model.hpp"
#include "oracles.hpp"

namespace lyralign {
namespace {

FeatureSequence RandomFeatures(std::mt19937_64 &rng, std::size_t T, std::size_t F) {
  std::normal_distribution<float> n(0.0f, 1.0f);
  FeatureSequence x{T, F, 0.02, std::vector<float>(T * F)};
  for (float &v : x.values) v = n(rng);
  return x;
}

TEST(ForwardTest, ZeroWeightsGiveUniformPosteriogram) {
  ToyModel m(3, 1, 5, 4);
  std::mt19937_64 rng(31);
  FeatureSequence x = RandomFeatures(rng, 7, 3);
  Matrix logits = Forward(m, x);
  for (double v : logits.data) EXPECT_EQ(v, 0.0);
  Posteriogram p = PredictPosteriogram(m, x);
  for (float v : p.data()) EXPECT_EQ(v, 0.25f);
  EXPECT_EQ(p.frame_hop(), x.frame_hop);
}

TEST(ForwardTest, ShapesAndDimensionMismatch) {
  ToyModel m(4, 2, 3, 5);
  m.RandomInit(1);
  std::mt19937_64 rng(32);
  Matrix one = Forward(m, RandomFeatures(rng, 1, 4));
  EXPECT_EQ(one.rows, 1u);
  EXPECT_EQ(one.cols, 5u);
  try {
    Forward(m, RandomFeatures(rng, 3, 5));
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.kind(), ErrorKind::kValidation);
  }
}

TEST(ForwardTest, IdenticalFramesWithoutContextGiveIdenticalRows) {
  ToyModel m(3, 0, 4, 3);
  m.RandomInit(2);
  FeatureSequence x{5, 3, 0.01, {}};
  for (int t = 0; t < 5; ++t) x.values.insert(x.values.end(), {0.3f, -1.0f, 2.0f});
  Matrix logits = Forward(m, x);
  for (std::size_t t = 1; t < 5; ++t)
    for (std::size_t c = 0; c < 3; ++c) EXPECT_EQ(logits(t, c), logits(0, c));
}

TEST(ForwardTest, ContextWindowSeesNeighbours) {
  ToyModel m(2, 1, 4, 3);
  m.RandomInit(3);
  std::mt19937_64 rng(33);
  FeatureSequence x = RandomFeatures(rng, 6, 2);
  Matrix before = Forward(m, x);
  x.values[3 * 2] += 1.0f;  // frame 3
  Matrix after = Forward(m, x);
  for (std::size_t t = 0; t < 6; ++t) {
    bool touched = t >= 2 && t <= 4;
    EXPECT_EQ(before(t, 0) != after(t, 0), touched) << "frame " << t;
  }
}

TEST(PredictTest, AlwaysAValidPosteriogram) {
  std::mt19937_64 rng(34);
  for (int trial = 0; trial < 20; ++trial) {
    ToyModel m(4, trial % 3, 6, 5);
    m.RandomInit(trial);
    std::vector<double> p = m.Parameters();
    for (double &v : p) v *= 1.0 + 10.0 * (trial % 4);  // push toward saturation
    m.SetParameters(p);
    Posteriogram post = PredictPosteriogram(m, RandomFeatures(rng, 1 + rng() % 30, 4));
    for (std::size_t t = 0; t < post.frame_count(); ++t) {
      double s = 0.0;
      for (std::size_t c = 0; c < 5; ++c) s += post(t, c);
      EXPECT_NEAR(s, 1.0, 1e-6);
    }
  }
}

// Backprop through the hidden layer against central differences, for a
// random linear functional of the logits and for the training loss.
TEST(BackwardTest, MatchesFiniteDifferences) {
  std::mt19937_64 rng(35);
  for (int trial = 0; trial < 20; ++trial) {
    ToyModel m(2, trial % 2, 3, 3);
    m.RandomInit(100 + trial);
    FeatureSequence x = RandomFeatures(rng, 4, 2);
    Matrix g = oracle::RandomLogits(rng, 4, 3, 1.0);
    auto f = [&](const std::vector<double> &params) {
      ToyModel copy = m;
      copy.SetParameters(params);
      Matrix logits = Forward(copy, x);
      double s = 0.0;
      for (std::size_t i = 0; i < logits.data.size(); ++i) s += g.data[i] * logits.data[i];
      return s;
    };
    ForwardCache cache;
    Forward(m, x, &cache);
    std::vector<double> analytic = Backward(m, cache, g);
    auto fd = oracle::CentralDifferences(f, m.Parameters(), 1e-4);
    EXPECT_LT(oracle::MaxRelativeError(analytic, fd), 1e-3);
  }
}

TEST(BackwardTest, TrainingLossGradientMatchesFiniteDifferences) {
  SynthItem item;
  item.features = FeatureSequence{4, 2, 0.02, {0.5f, -0.2f, 1.0f, 0.3f, -0.7f, 0.9f, 0.1f, 0.0f}};
  item.syllables = {0};
  item.frame_labels.labels = {1, 0, 0, 1};  // 0 = syllable, 1 = silence, 2 = blank
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    ToyModel m(2, 1, 3, 3);
    m.RandomInit(seed);
    std::vector<double> analytic;
    ItemLossAndGradient(m, item, 2, &analytic);
    auto f = [&](const std::vector<double> &params) {
      ToyModel copy = m;
      copy.SetParameters(params);
      return ItemLossAndGradient(copy, item, 2, nullptr);
    };
    auto fd = oracle::CentralDifferences(f, m.Parameters(), 1e-4);
    EXPECT_LT(oracle::MaxRelativeError(analytic, fd), 1e-3);
  }
}

TEST(SynthTest, DeterministicPerSeed) {
  SynthSpec spec;
  spec.seed = 99;
  auto a = SynthDataset(spec, 5), b = SynthDataset(spec, 5);
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_EQ(a[i].features, b[i].features);
    EXPECT_EQ(a[i].syllables, b[i].syllables);
    EXPECT_EQ(a[i].reference.segments, b[i].reference.segments);
  }
  spec.seed = 100;
  EXPECT_NE(SynthDataset(spec, 1)[0].features, a[0].features);
}

TEST(SynthTest, NoiseFreeFeaturesEqualClassMeans) {
  SynthSpec spec;
  spec.noise_std = 0.0;
  for (const auto &item : SynthDataset(spec, 10))
    for (std::size_t t = 0; t < item.features.frames; ++t)
      for (std::size_t f = 0; f < item.features.dim; ++f)
        EXPECT_EQ(item.features(t, f),
                  f == item.frame_labels.labels[t] ? spec.separation : 0.0);
}

TEST(SynthTest, TwoHundredItemsWithSmallIds) {
  auto data = SynthDataset(SynthSpec{}, 200);
  ASSERT_EQ(data.size(), 200u);
  Lexicon lex = SynthLexicon(3);
  for (const auto &item : data) {
    for (auto s : item.syllables) EXPECT_LT(s, 3u);
    for (std::size_t k = 1; k < item.syllables.size(); ++k)
      EXPECT_NE(item.syllables[k], item.syllables[k - 1]);
    ASSERT_EQ(item.reference.segments.size(), item.syllables.size());
    EXPECT_EQ(item.frame_labels.labels.size(), item.features.frames);
    EXPECT_EQ(FramewiseTargetsFromAlignment(item.reference, item.features.frames,
                                            item.features.frame_hop, lex),
              item.frame_labels);
  }
}

TEST(SynthTest, RejectsDegenerateSpecs) {
  SynthSpec spec;
  spec.separation = 0.0;
  EXPECT_THROW(SynthDataset(spec, 1), Error);
  spec = SynthSpec{};
  spec.feature_dim = 3;
  EXPECT_THROW(SynthDataset(spec, 1), Error);
  EXPECT_THROW(SynthDataset(SynthSpec{}, 0), Error);
}

TEST(TrainTest, ZeroLearningRateLeavesModelAndCurveFlat) {
  SynthSpec spec;
  auto data = SynthDataset(spec, 8);
  ToyModel m(spec.feature_dim, 1, 4, 5);
  m.RandomInit(5);
  const std::vector<double> before = m.Parameters();
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.learning_rate = 0.0;
  TrainReport r = Train(m, data, cfg);
  EXPECT_EQ(m.Parameters(), before);
  ASSERT_EQ(r.epoch_loss.size(), 3u);
  EXPECT_EQ(r.epoch_loss[0], r.epoch_loss[1]);
  EXPECT_EQ(r.epoch_loss[1], r.epoch_loss[2]);
}

TEST(TrainTest, NonFiniteLossAborts) {
  SynthSpec spec;
  auto data = SynthDataset(spec, 2);
  ToyModel m(spec.feature_dim, 0, 2, 5);
  std::vector<double> p(m.parameter_count(), NAN);
  m.SetParameters(p);
  EXPECT_THROW(Train(m, data, TrainConfig{}), Error);
}

TEST(TrainTest, NoiseFreeDataIsLearnedAlmostPerfectly) {
  SynthSpec spec;
  spec.noise_std = 0.0;
  auto data = SynthDataset(spec, 40);
  ToyModel m(spec.feature_dim, 1, 8, 5);
  m.RandomInit(11);
  TrainConfig cfg;
  cfg.epochs = 40;
  cfg.batch_size = 8;
  TrainReport r = Train(m, data, cfg);
  for (double l : r.epoch_loss) EXPECT_TRUE(std::isfinite(l));
  EXPECT_LT(r.epoch_loss.back(), r.epoch_loss.front());
  EXPECT_GE(FramewiseAccuracy(m, data), 0.99);

  // Same check through the posteriogram argmax on one fresh item.
  spec.seed = 1234;
  SynthItem item = SynthDataset(spec, 1)[0];
  Posteriogram post = PredictPosteriogram(m, item.features);
  std::size_t correct = 0;
  for (std::size_t t = 0; t < post.frame_count(); ++t) {
    std::size_t arg = 0;
    for (std::size_t c = 1; c < 4; ++c)
      if (post(t, c) > post(t, arg)) arg = c;
    correct += arg == item.frame_labels.labels[t];
  }
  EXPECT_GE(static_cast<double>(correct), 0.99 * static_cast<double>(post.frame_count()));
}

TEST(TrainTest, DeterministicGivenSeeds) {
  SynthSpec spec;
  auto data = SynthDataset(spec, 16);
  auto run = [&] {
    ToyModel m(spec.feature_dim, 1, 4, 5);
    m.RandomInit(3);
    TrainConfig cfg;
    cfg.epochs = 2;
    cfg.shuffle_seed = 8;
    Train(m, data, cfg);
    return m;
  };
  EXPECT_EQ(run(), run());
}

TEST(FeatureFileTest, RoundTripBitExact) {
  std::mt19937_64 rng(36);
  FeatureSequence x = RandomFeatures(rng, 13, 6);
  std::string bytes = EncodeFeatures(x);
  EXPECT_EQ(bytes.size(), 4 + 4 + 2 + 8 + 13 * 6 * 4u);
  EXPECT_EQ(DecodeFeatures(bytes), x);
  EXPECT_EQ(EncodeFeatures(DecodeFeatures(bytes)), bytes);
  bytes.pop_back();
  EXPECT_THROW(DecodeFeatures(bytes), Error);
}

TEST(ModelFileTest, RoundTripBitExact) {
  ToyModel m(8, 1, 16, 5);
  m.RandomInit(77);
  const std::string bytes = EncodeModel(m);
  ToyModel back = DecodeModel(bytes);
  EXPECT_EQ(EncodeModel(back), bytes);
  EXPECT_EQ(back.feature_dim(), 8u);
  EXPECT_EQ(back.context(), 1u);
  EXPECT_EQ(back.hidden(), 16u);
  EXPECT_EQ(back.class_count(), 5u);
  // Parameters are stored in single precision.
  std::vector<double> p = m.Parameters(), q = back.Parameters();
  for (std::size_t i = 0; i < p.size(); ++i)
    EXPECT_EQ(q[i], static_cast<double>(static_cast<float>(p[i])));

  auto path = std::filesystem::temp_directory_path() / "lyralign_model_test.toym";
  WriteModel(back, path);
  EXPECT_EQ(ReadModel(path), back);
  std::filesystem::remove(path);

  std::string bad = bytes;
  bad[0] = 'X';
  EXPECT_THROW(DecodeModel(bad), Error);
  EXPECT_THROW(DecodeModel(bytes.substr(0, bytes.size() - 1)), Error);
  EXPECT_THROW(DecodeModel(bytes + "x"), Error);
}

}  // namespace
}  // namespace lyralign
