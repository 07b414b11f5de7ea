#pragma once

#include <map>
#include <string>
#include <vector>

#include "ubad/deviation.hpp"
#include "ubad/metrics.hpp"
#include "ubad/scoring.hpp"
#include "ubad/store.hpp"
#include "ubad/synthgen.hpp"

namespace ubad {

// Model configurations compared in the evaluation harness:
//   compound   - deviation matrices over D days, user + group blocks, weighted
//   one_day    - same features, single-day max-normalized measurements
//   no_group   - deviation matrices without the group block (half the input)
//   all_in_one - every aspect concatenated into a single autoencoder
//   baseline   - coarse per-action counts, 24 hourly frames, single day,
//                no weights, no group
//   base_ff    - baseline with the fine-grained feature sets
enum class Variant { Compound, OneDay, NoGroup, AllInOne, Baseline, BaseFf };

const char* variant_name(Variant v);
Variant variant_from_name(const std::string& name);

struct VariantConfig {
  Variant variant = Variant::Compound;
  std::string feature_preset = "cert";
  FrameConfig frames = FrameConfig::working_off();  // baseline variants switch to hourly
  DeviationParams deviation;
  TrainConfig train;
  std::vector<int> hidden;  // empty: width preset from the input dimension
  int critic_n = 3;
  Date test_start = 0;   // first scored end day
  int train_stride = 1;  // keep every n-th training end day
  std::uint64_t seed = 1;
};

// Builds model inputs for one variant from per-aspect measurement stores.
// Single-day variants scale each (feature, frame) cell by its maximum over
// the training span; deviation variants go through the matrix pipeline.
class VariantSampler {
 public:
  // Holds references; stores and groups must outlive the sampler.
  VariantSampler(Variant variant, const std::map<std::string, MeasurementStore>& stores,
                 const GroupMap& groups, const DeviationParams& deviation, Date test_start,
                 int train_stride);
  VariantSampler(Variant, std::map<std::string, MeasurementStore>&&, const GroupMap&,
                 const DeviationParams&, Date, int) = delete;
  VariantSampler(Variant, const std::map<std::string, MeasurementStore>&, GroupMap&&,
                 const DeviationParams&, Date, int) = delete;

  // Model keys: aspect names, or just "all" for the all-in-one variant.
  std::vector<std::string> model_keys() const;
  int input_dim(const std::string& key) const;
  std::vector<Date> train_days() const;
  std::vector<Date> test_days() const;
  Date first_scoreable_day() const { return first_scoreable_; }

  std::vector<FlatVector> train_samples(const std::string& key) const;
  FlatVector sample(const std::string& key, const std::string& user, Date day) const;

  bool uses_group() const;
  bool single_day() const;

 private:
  FlatVector aspect_sample(const std::string& aspect, const std::string& user, Date day) const;

  Variant variant_;
  const std::map<std::string, MeasurementStore>& stores_;
  const GroupMap& groups_;
  DeviationParams deviation_;
  Date test_start_;
  int train_stride_;
  Date first_scoreable_;
  Date last_day_;
  std::map<std::string, MatrixBuilder> builders_;
  // per aspect: per (f, t) cell max over the training span, user and group.
  std::map<std::string, std::vector<double>> user_max_, group_max_;
};

struct DailyList {
  Date day = 0;
  InvestigationList list;
};

struct VariantResult {
  Variant variant = Variant::Compound;
  std::map<std::string, int> input_dims;
  std::vector<DailyList> daily;
  // aspect -> day -> user -> reconstruction error
  std::map<std::string, std::map<Date, std::map<std::string, double>>> scores;
  // evaluation against labels (present when the label set is non-trivial)
  std::vector<Date> days;
  std::map<Date, double> day_auc;           // ROC AUC of that day's list
  std::map<std::string, int> best_position; // victim -> best list position on post-attack days
  Date best_day = 0;                        // post-attack day with the highest AUC
  double best_roc_auc = 0.0;
  double best_pr_auc = 0.0;
  double mean_roc_auc = 0.0;                // mean over post-attack days
  std::vector<long> fps_before_tp;          // on the best day
};

// Full in-memory run of one variant: extract, train, score every test day,
// rank, prioritize and evaluate against the labels.
VariantResult run_variant(const std::map<std::string, std::vector<AuditEvent>>& by_user,
                          const LabelSet& labels, const GroupMap& groups,
                          const VariantConfig& config);

// Runs several variants on the same dataset.
std::map<Variant, VariantResult> run_ablation(
    const std::vector<AuditEvent>& events, const LabelSet& labels, const GroupMap& groups,
    const VariantConfig& base, const std::vector<Variant>& variants);

// Per-aspect feature sets for a variant (coarse for baseline, preset
// otherwise) and its frame config (hourly for the baseline pair).
std::vector<FeatureSet> variant_feature_sets(const VariantConfig& config);
FrameConfig variant_frames(const VariantConfig& config);

}  // namespace ubad
