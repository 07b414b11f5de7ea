#pragma once

#include <optional>
#include <string>

#include "ubad/ablation.hpp"
#include "ubad/parse.hpp"
#include "ubad/synthgen.hpp"

namespace ubad {

inline constexpr const char* kToolVersion = "ubad 1.0.0";

// One declarative config drives every stage; see configs/ for examples and
// README for the key schema. All stage outputs land under workdir.
struct RunConfig {
  std::string workdir = "run";
  std::uint64_t seed = 1;

  std::string events_path;  // default: <workdir>/data/events.jsonl
  StreamFormat events_format = StreamFormat::Jsonl;
  std::string labels_path;  // default: <workdir>/data/labels.json
  std::string groups_path;  // default: <workdir>/data/org.json

  std::optional<OrgSpec> org;
  std::optional<ScenarioSpec> scenario;

  std::string feature_preset = "cert";
  FrameConfig frames = FrameConfig::working_off();
  DeviationParams deviation;
  TrainConfig train;
  std::vector<int> hidden;
  int train_stride = 1;
  std::optional<Date> test_start;  // default: last quarter of the scoreable span
  int critic_n = 3;
  Variant variant = Variant::Compound;
  TieMode tie_mode = TieMode::Pessimistic;

  void validate() const;
  std::string to_json() const;  // full echo, embedded in the manifest
  static RunConfig from_json(const std::string& text);
  static RunConfig load(const std::string& path);

  std::string data_dir() const { return workdir + "/data"; }
  std::string extract_dir() const { return workdir + "/extract"; }
  std::string models_dir() const { return workdir + "/models"; }
  std::string scores_dir() const { return workdir + "/scores"; }
  std::string ranks_dir() const { return workdir + "/ranks"; }
  std::string eval_dir() const { return workdir + "/eval"; }
  std::string resolved_events_path() const;
  std::string resolved_labels_path() const;
  std::string resolved_groups_path() const;
};

// Each stage is idempotent for identical inputs and seeds, records itself in
// <workdir>/manifest.json (config echo, input and output content hashes,
// tool version) and throws StageError when an upstream artifact is missing.
void stage_gen(const RunConfig& config);
void stage_extract(const RunConfig& config);
void stage_train(const RunConfig& config);
void stage_score(const RunConfig& config);
void stage_rank(const RunConfig& config);
void stage_eval(const RunConfig& config);
void stage_repro(const RunConfig& config);

std::string hash_file_hex(const std::string& path);  // fnv1a-64 of the bytes

}  // namespace ubad
