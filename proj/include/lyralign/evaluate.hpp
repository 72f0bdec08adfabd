// include/lyralign/evaluate.hpp

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

#include <optional>
#include <string>
#include <vector>

#include "lyralign/alignment.hpp"
#include "lyralign/codec.hpp"
#include "lyralign/metrics.hpp"

namespace lyralign {

struct MetricSelection {
  bool mae = true;
  bool cer = true;
  bool per = true;
  bool pcas = true;
};

/// Metrics for one prediction/reference pair. Absent values were not
/// requested or not applicable (see `notes`).
struct PairEvaluation {
  std::string name;
  double duration = 0.0;
  std::optional<double> mae;
  std::optional<ErrorCounts> cer;
  std::optional<ErrorCounts> per;
  std::optional<double> pcas_exact;
  std::optional<double> pcas_pronoun;
  std::vector<std::string> notes;

  bool any() const { return mae || cer || per || pcas_exact || pcas_pronoun; }

  EvalReport Report() const {
    EvalReport r;
    if (mae) r["mae"] = *mae;
    if (cer) r["cer"] = cer->rate();
    if (per) r["per"] = per->rate();
    if (pcas_exact) r["pcas_exact"] = *pcas_exact;
    if (pcas_pronoun) r["pcas_pronoun"] = *pcas_pronoun;
    return r;
  }
};

/// Audio duration used for PCAS and weighting: the reference's recorded
/// duration, else the prediction's, else the largest offset of either.
inline double EvaluationDuration(const AlignmentResult &pred, const AlignmentResult &ref) {
  double floor = std::max(pred.MaxOffset(), ref.MaxOffset());
  if (ref.duration && *ref.duration >= floor) return *ref.duration;
  if (pred.duration && *pred.duration >= floor) return *pred.duration;
  return floor;
}

inline PairEvaluation EvaluatePair(const std::string &name, const AlignmentResult &pred,
                                   const AlignmentResult &ref, const Lexicon *lex,
                                   const MetricSelection &which) {
  PairEvaluation ev;
  ev.name = name;
  ev.duration = EvaluationDuration(pred, ref);
  auto attempt = [&](const char *metric, auto &&fn) {
    try {
      fn();
    } catch (const Error &e) {
      ev.notes.push_back(std::string(metric) + ": " + e.what());
    }
  };
  const LyricsSequence pc = pred.Characters(), rc = ref.Characters();
  if (which.mae) attempt("mae", [&] { ev.mae = Mae(pred, ref); });
  if (which.cer) attempt("cer", [&] { ev.cer = CharacterErrors(pc, rc); });
  if (which.per) {
    attempt("per", [&] {
      if (!lex) Fail(ErrorKind::kValidation, "needs a lexicon");
      ev.per = PhonemeErrors(pc, rc, *lex);
    });
  }
  if (which.pcas) {
    attempt("pcas_exact", [&] {
      ev.pcas_exact = Pcas(pred, ref, ev.duration, PcasMode::kExact);
    });
    attempt("pcas_pronoun", [&] {
      if (!lex) Fail(ErrorKind::kValidation, "needs a lexicon");
      ev.pcas_pronoun = Pcas(pred, ref, ev.duration, PcasMode::kPronoun, lex);
    });
  }
  return ev;
}

/// Corpus pooling: CER/PER as total edits over total reference length;
/// MAE and PCAS as duration-weighted means over the files that have them.
class CorpusAggregate {
 public:
  void Add(const PairEvaluation &ev) {
    if (ev.cer) cer_ += *ev.cer;
    if (ev.per) per_ += *ev.per;
    if (ev.mae) mae_.Add(*ev.mae, ev.duration);
    if (ev.pcas_exact) pcas_exact_.Add(*ev.pcas_exact, ev.duration);
    if (ev.pcas_pronoun) pcas_pronoun_.Add(*ev.pcas_pronoun, ev.duration);
  }

  EvalReport Report() const {
    EvalReport r;
    if (cer_.reference_length > 0) r["cer"] = cer_.rate();
    if (per_.reference_length > 0) r["per"] = per_.rate();
    if (mae_.weight > 0) r["mae"] = mae_.mean();
    if (pcas_exact_.weight > 0) r["pcas_exact"] = pcas_exact_.mean();
    if (pcas_pronoun_.weight > 0) r["pcas_pronoun"] = pcas_pronoun_.mean();
    return r;
  }

 private:
  struct Weighted {
    double sum = 0.0, weight = 0.0;
    void Add(double v, double w) {
      sum += v * w;
      weight += w;
    }
    double mean() const { return sum / weight; }
  };
  ErrorCounts cer_, per_;
  Weighted mae_, pcas_exact_, pcas_pronoun_;
};

}  // namespace lyralign
