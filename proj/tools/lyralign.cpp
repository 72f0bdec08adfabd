// tools/lyralign.cpp

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

// Command-line front end: forced alignment, timed transcription, metric
// evaluation, SNR mixing/augmentation, synthetic data and the toy-model demo.
//
// Exit codes: 0 success, 1 validation failure, 2 I/O failure,
// 3 acceptance-threshold failure.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "lyralign/lyralign.hpp"

namespace fs = std::filesystem;
using namespace lyralign;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitIo = 2;
constexpr int kExitThreshold = 3;

int ExitCodeFor(const Error &e) {
  return e.kind() == ErrorKind::kIo ? kExitIo : kExitValidation;
}

void WriteOrPrint(const std::optional<fs::path> &out, const std::string &body) {
  if (out) WriteFileAtomic(*out, body);
  else std::cout << body;
}

// ---------------------------------------------------------------------------
// align / timed-transcribe

struct AlignArgs {
  fs::path posteriogram;
  fs::path text;
  fs::path lexicon;
  std::optional<fs::path> out;
};

int RunAlign(const AlignArgs &args, bool predicted) {
  const Lexicon lex = LoadLexicon(args.lexicon);
  const Posteriogram post = ReadPosteriogram(args.posteriogram);
  const LyricsSequence lyrics = LyricsSequence::FromText(ReadTextFile(args.text));
  if (lyrics.empty())
    Fail(ErrorKind::kValidation, args.text.string() + ": no characters to align");
  AlignOutput out = AlignLyrics(post, lyrics, lex);
  if (predicted) out.result.source = "predicted";
  WriteOrPrint(args.out, AlignmentToJson(out.result));
  std::cerr << "aligned " << lyrics.size() << " characters over "
            << post.frame_count() << " frames, log score " << out.path_log_score
            << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// eval

struct EvalArgs {
  fs::path pred;
  fs::path ref;
  std::optional<fs::path> lexicon;
  std::string metrics = "mae,cer,per,pcas";
  std::optional<fs::path> out;
  bool json = false;
};

MetricSelection ParseMetrics(const std::string &spec) {
  MetricSelection sel{false, false, false, false};
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item == "mae") sel.mae = true;
    else if (item == "cer") sel.cer = true;
    else if (item == "per") sel.per = true;
    else if (item == "pcas") sel.pcas = true;
    else if (!item.empty())
      Fail(ErrorKind::kValidation, "unknown metric '" + item + "'");
  }
  return sel;
}

std::map<std::string, fs::path> JsonFilesByStem(const fs::path &dir) {
  std::map<std::string, fs::path> out;
  for (const auto &e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".json")
      out[e.path().stem().string()] = e.path();
  return out;
}

std::string FormatCell(const EvalReport &r, const std::string &key) {
  auto it = r.find(key);
  if (it == r.end()) return "-";
  char buf[32];
  if (key == "mae") std::snprintf(buf, sizeof(buf), "%.4f s", it->second);
  else std::snprintf(buf, sizeof(buf), "%.2f%%", 100.0 * it->second);
  return buf;
}

void PrintTable(const std::vector<std::pair<std::string, EvalReport>> &rows) {
  static const char *kCols[] = {"mae", "cer", "per", "pcas_exact", "pcas_pronoun"};
  std::size_t name_w = 4;
  for (const auto &[name, _] : rows) name_w = std::max(name_w, name.size());
  std::printf("%-*s", static_cast<int>(name_w), "file");
  for (const char *c : kCols) std::printf("  %12s", c);
  std::printf("\n");
  for (const auto &[name, report] : rows) {
    std::printf("%-*s", static_cast<int>(name_w), name.c_str());
    for (const char *c : kCols) std::printf("  %12s", FormatCell(report, c).c_str());
    std::printf("\n");
  }
}

int RunEval(const EvalArgs &args) {
  const MetricSelection which = ParseMetrics(args.metrics);
  std::optional<Lexicon> lex;
  if (args.lexicon) lex = LoadLexicon(*args.lexicon);
  if ((which.per || which.pcas) && !lex)
    std::cerr << "warning: no --lexicon given; PER and PCAS-pronoun are skipped\n";

  std::vector<std::pair<std::string, std::pair<fs::path, fs::path>>> pairs;
  nlohmann::json skipped = nlohmann::json::array();
  if (fs::is_directory(args.pred) != fs::is_directory(args.ref))
    Fail(ErrorKind::kValidation, "--pred and --ref must both be files or both directories");
  if (fs::is_directory(args.pred)) {
    auto preds = JsonFilesByStem(args.pred), refs = JsonFilesByStem(args.ref);
    for (const auto &[stem, path] : preds) {
      auto it = refs.find(stem);
      if (it == refs.end()) {
        std::cerr << "warning: no reference for " << path.string() << ", skipped\n";
        skipped.push_back(path.filename().string());
      } else {
        pairs.push_back({stem, {path, it->second}});
      }
    }
    for (const auto &[stem, path] : refs)
      if (!preds.count(stem)) {
        std::cerr << "warning: no prediction for " << path.string() << ", skipped\n";
        skipped.push_back(path.filename().string());
      }
  } else {
    pairs.push_back({args.pred.stem().string(), {args.pred, args.ref}});
  }

  nlohmann::json files = nlohmann::json::object(), notes = nlohmann::json::object();
  std::vector<std::pair<std::string, EvalReport>> rows;
  CorpusAggregate corpus;
  std::size_t evaluated = 0;
  for (const auto &[stem, paths] : pairs) {
    try {
      AlignmentResult pred = ReadAlignment(paths.first);
      AlignmentResult ref = ReadAlignment(paths.second);
      MetricSelection sel = which;
      if (!lex) sel.per = false;
      PairEvaluation ev = EvaluatePair(stem, pred, ref, lex ? &*lex : nullptr, sel);
      if (!lex && which.pcas) {
        ev.pcas_pronoun.reset();
        std::erase_if(ev.notes, [](auto &n) { return n.rfind("pcas_pronoun", 0) == 0; });
      }
      for (const auto &n : ev.notes) {
        std::cerr << "note: " << stem << ": " << n << "\n";
        notes[stem].push_back(n);
      }
      if (!ev.any()) Fail(ErrorKind::kValidation, "no metric could be computed");
      corpus.Add(ev);
      files[stem] = ev.Report();
      rows.push_back({stem, ev.Report()});
      ++evaluated;
    } catch (const Error &e) {
      std::cerr << "error: " << stem << ": " << e.what() << "\n";
      notes[stem].push_back(std::string("failed: ") + e.what());
    }
  }
  EvalReport total = corpus.Report();
  rows.push_back({"CORPUS", total});
  nlohmann::json report = {{"files", files},       {"corpus", total},
                           {"skipped", skipped},   {"notes", notes},
                           {"evaluated", evaluated}};
  if (args.out) WriteFileAtomic(*args.out, report.dump(2) + "\n");
  if (args.json) std::cout << report.dump(2) << "\n";
  else PrintTable(rows);
  return evaluated == 0 ? kExitValidation : kExitOk;
}

// ---------------------------------------------------------------------------
// mix / augment

ClipPolicy ParseClip(const std::string &s) {
  if (s == "normalize") return ClipPolicy::kNormalize;
  if (s == "hard_clip") return ClipPolicy::kHardClip;
  Fail(ErrorKind::kValidation, "unknown clip policy '" + s + "'");
}

struct MixArgs {
  fs::path vocal, accomp, out;
  double snr = 0.0;
  std::uint64_t seed = 0;
  std::string clip = "normalize";
  bool json = false;
};

int RunMix(const MixArgs &args) {
  AudioClip vocal = ReadWav(args.vocal), accomp = ReadWav(args.accomp);
  MixResult r = MixAtSnr(vocal, accomp, {args.snr, args.seed, ParseClip(args.clip)});
  WriteWav(r.mixture, args.out);
  nlohmann::json info = {{"output", args.out.string()},
                         {"snr_db", args.snr},
                         {"measured_snr_db", SnrDb(vocal, r.scaled_accompaniment)},
                         {"gain", r.gain},
                         {"offset_samples", r.offset_samples},
                         {"output_scale", r.output_scale}};
  if (args.json) std::cout << info.dump(2) << "\n";
  else
    std::printf("wrote %s (snr %.2f dB, gain %.5f, offset %zu)\n", args.out.c_str(),
                args.snr, r.gain, r.offset_samples);
  return kExitOk;
}

struct AugmentArgs {
  fs::path vocals, accomps, out;
  std::vector<double> snrs{0.0, -5.0, -10.0};
  std::uint64_t seed = 0;
  std::string clip = "normalize";
};

int RunAugment(const AugmentArgs &args) {
  AugmentConfig cfg{args.snrs, args.seed, ParseClip(args.clip)};
  Manifest m = AugmentDataset(args.vocals, args.accomps, args.out, cfg);
  for (const auto &row : m.rows)
    if (!row.ok) std::cerr << "error: " << row.vocal << " @ " << row.snr_db << " dB: "
                           << row.output << "\n";
  std::printf("wrote %zu mixes, %zu failures, manifest %s\n",
              m.rows.size() - m.failures(), m.failures(),
              (args.out / "manifest.csv").c_str());
  return m.failures() == 0 ? kExitOk : kExitValidation;
}

// ---------------------------------------------------------------------------
// synth / train-demo

struct SynthArgs {
  fs::path out;
  std::uint64_t seed = 1;
  std::size_t count = 10;
};

// One-hot posteriogram of the ground-truth frame labels.
Posteriogram OraclePosteriogram(const SynthItem &item, const Lexicon &lex) {
  const std::size_t T = item.features.frames, C = lex.class_count();
  std::vector<float> probs(T * C, 0.0f);
  for (std::size_t t = 0; t < T; ++t) probs[t * C + item.frame_labels.labels[t]] = 1.0f;
  return Posteriogram(T, C, item.features.frame_hop, std::move(probs));
}

int RunSynth(const SynthArgs &args) {
  SynthSpec spec;
  spec.seed = args.seed;
  auto items = SynthDataset(spec, args.count);
  Lexicon lex = SynthLexicon(spec.syllable_classes);
  std::error_code ec;
  fs::create_directories(args.out, ec);
  if (ec) Fail(ErrorKind::kIo, "cannot create " + args.out.string());
  WriteFileAtomic(args.out / "lexicon.tsv", lex.ToTsv());
  for (std::size_t i = 0; i < items.size(); ++i) {
    char stem[32];
    std::snprintf(stem, sizeof(stem), "item_%03zu", i);
    const fs::path base = args.out / stem;
    WriteFeatures(items[i].features, fs::path(base).replace_extension(".feat"));
    WriteAlignment(items[i].reference, fs::path(base).replace_extension(".json"));
    WritePosteriogram(OraclePosteriogram(items[i], lex),
                      fs::path(base).replace_extension(".pstg"));
    std::string text;
    for (const auto &c : items[i].lyrics.chars) text += c;
    WriteFileAtomic(fs::path(base).replace_extension(".txt"), text + "\n");
  }
  std::printf("wrote %zu synthetic items to %s\n", items.size(), args.out.c_str());
  return kExitOk;
}

struct DemoArgs {
  std::uint64_t seed = 1;
  std::optional<std::size_t> epochs;
  std::optional<double> lr;
  std::optional<fs::path> out;
  bool json = false;
};

int RunTrainDemo(const DemoArgs &args) {
  DemoConfig cfg = DemoConfigForSeed(args.seed);
  if (args.epochs) cfg.train.epochs = *args.epochs;
  if (args.lr) cfg.train.learning_rate = *args.lr;
  DemoReport r = RunDemo(cfg);
  if (args.out) WriteModel(r.model, *args.out);

  std::vector<std::string> failed;
  if (!r.losses_finite()) failed.push_back("finite loss curve");
  if (!r.accuracy_ok()) failed.push_back("held-out framewise accuracy >= 95%");
  if (!r.boundary_ok()) failed.push_back("median boundary error <= 1 frame hop");

  if (args.json) {
    nlohmann::json j = {{"epoch_loss", r.epoch_loss},
                        {"initial_loss", r.initial_loss},
                        {"train_accuracy", r.train_accuracy},
                        {"heldout_accuracy", r.heldout_accuracy},
                        {"heldout_accuracy_with_blank", r.heldout_accuracy_with_blank},
                        {"median_boundary_error", r.median_boundary_error},
                        {"heldout_mae", r.heldout_mae},
                        {"frame_hop", r.frame_hop},
                        {"seconds", r.seconds},
                        {"failed", failed}};
    std::cout << j.dump(2) << "\n";
  } else {
    std::printf("initial loss %.4f\n", r.initial_loss);
    for (std::size_t e = 0; e < r.epoch_loss.size(); ++e)
      std::printf("epoch %3zu  loss %.4f\n", e + 1, r.epoch_loss[e]);
    std::printf("train framewise accuracy    %.2f%%\n", 100.0 * r.train_accuracy);
    std::printf("held-out framewise accuracy %.2f%%\n", 100.0 * r.heldout_accuracy);
    std::printf("median boundary error       %.4f s (%.2f frames)\n",
                r.median_boundary_error, r.median_boundary_error / r.frame_hop);
    std::printf("held-out MAE                %.4f s\n", r.heldout_mae);
    std::printf("elapsed                     %.1f s\n", r.seconds);
  }
  for (const auto &f : failed) std::cerr << "FAILED: " << f << "\n";
  return failed.empty() ? kExitOk : kExitThreshold;
}

std::vector<double> ParseSnrList(const std::string &s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception &) {
      Fail(ErrorKind::kValidation, "bad SNR value '" + item + "'");
    }
  }
  if (out.empty()) Fail(ErrorKind::kValidation, "empty SNR list");
  return out;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"lyralign: posteriogram forced alignment and lyrics evaluation toolkit"};
  app.require_subcommand(1);

  AlignArgs align_args, tt_args;
  auto add_align_opts = [](CLI::App *cmd, AlignArgs &a, const char *text_flag,
                           const char *text_desc) {
    cmd->add_option("--posteriogram", a.posteriogram, "PSTG posteriogram file")
        ->required()->check(CLI::ExistingFile);
    cmd->add_option(text_flag, a.text, text_desc)->required()->check(CLI::ExistingFile);
    cmd->add_option("--lexicon", a.lexicon, "character<TAB>syllable lexicon")
        ->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", a.out, "output alignment JSON (default: stdout)");
  };
  auto *align_cmd = app.add_subcommand("align", "Force-align lyrics to a posteriogram");
  add_align_opts(align_cmd, align_args, "--lyrics", "UTF-8 lyrics text");
  auto *tt_cmd = app.add_subcommand(
      "timed-transcribe", "Align an externally produced transcript (marked predicted)");
  add_align_opts(tt_cmd, tt_args, "--transcript", "UTF-8 transcript text");

  EvalArgs eval_args;
  auto *eval_cmd = app.add_subcommand("eval", "Score predicted alignments against references");
  eval_cmd->add_option("--pred", eval_args.pred, "prediction JSON file or directory")
      ->required()->check(CLI::ExistingPath);
  eval_cmd->add_option("--ref", eval_args.ref, "reference JSON file or directory")
      ->required()->check(CLI::ExistingPath);
  eval_cmd->add_option("--lexicon", eval_args.lexicon, "lexicon for PER and PCAS-pronoun")
      ->check(CLI::ExistingFile);
  eval_cmd->add_option("--metrics", eval_args.metrics, "comma list of mae,cer,per,pcas")
      ->capture_default_str();
  eval_cmd->add_option("--out", eval_args.out, "write the JSON report here");
  eval_cmd->add_flag("--json", eval_args.json, "print the JSON report instead of a table");

  MixArgs mix_args;
  auto *mix_cmd = app.add_subcommand("mix", "Mix a vocal and an accompaniment at a target SNR");
  mix_cmd->add_option("--vocal", mix_args.vocal)->required()->check(CLI::ExistingFile);
  mix_cmd->add_option("--accomp", mix_args.accomp)->required()->check(CLI::ExistingFile);
  mix_cmd->add_option("--snr", mix_args.snr, "SNR in dB")->required();
  mix_cmd->add_option("--seed", mix_args.seed)->capture_default_str();
  mix_cmd->add_option("--clip", mix_args.clip, "normalize | hard_clip")->capture_default_str();
  mix_cmd->add_option("--out", mix_args.out)->required();
  mix_cmd->add_flag("--json", mix_args.json);

  AugmentArgs aug_args;
  std::string snr_list = "0,-5,-10";
  auto *aug_cmd = app.add_subcommand("augment", "Mix every vocal at every SNR");
  aug_cmd->add_option("--vocals", aug_args.vocals)->required()->check(CLI::ExistingDirectory);
  aug_cmd->add_option("--accomps", aug_args.accomps)->required()->check(CLI::ExistingDirectory);
  aug_cmd->add_option("--snrs", snr_list, "comma-separated SNRs in dB")->capture_default_str();
  aug_cmd->add_option("--seed", aug_args.seed)->capture_default_str();
  aug_cmd->add_option("--clip", aug_args.clip, "normalize | hard_clip")->capture_default_str();
  aug_cmd->add_option("--out", aug_args.out, "output directory")->required();

  SynthArgs synth_args;
  auto *synth_cmd = app.add_subcommand("synth", "Write a synthetic dataset");
  synth_cmd->add_option("--seed", synth_args.seed)->capture_default_str();
  synth_cmd->add_option("--count", synth_args.count)->capture_default_str();
  synth_cmd->add_option("--out", synth_args.out, "output directory")->required();

  DemoArgs demo_args;
  auto *demo_cmd = app.add_subcommand(
      "train-demo", "Train the toy model on synthetic data, align, and check thresholds");
  demo_cmd->add_option("--seed", demo_args.seed)->capture_default_str();
  demo_cmd->add_option("--epochs", demo_args.epochs);
  demo_cmd->add_option("--lr", demo_args.lr);
  demo_cmd->add_option("--out", demo_args.out, "write the trained TOYM checkpoint");
  demo_cmd->add_flag("--json", demo_args.json);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    if (align_cmd->parsed()) return RunAlign(align_args, false);
    if (tt_cmd->parsed()) return RunAlign(tt_args, true);
    if (eval_cmd->parsed()) return RunEval(eval_args);
    if (mix_cmd->parsed()) return RunMix(mix_args);
    if (aug_cmd->parsed()) {
      aug_args.snrs = ParseSnrList(snr_list);
      return RunAugment(aug_args);
    }
    if (synth_cmd->parsed()) return RunSynth(synth_args);
    if (demo_cmd->parsed()) return RunTrainDemo(demo_args);
  } catch (const Error &e) {
    std::cerr << "error: " << e.what() << "\n";
    return ExitCodeFor(e);
  } catch (const std::filesystem::filesystem_error &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitValidation;
}
