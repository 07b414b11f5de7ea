#pragma once

#include <functional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "ubad/events.hpp"

namespace ubad {

enum class FeatureKind { Count, UniqueCount, NoveltyCount };

// Derives the (family, object) pair a qualifying event contributes to the
// per-user novelty state. Families namespace the pairs, e.g. a file "new-op"
// records (action/direction, file-id) while HTTP domain novelty records
// ("domain", domain).
struct NoveltyRule {
  std::string id;
  std::function<bool(const AuditEvent&)> observes;
  std::function<std::string(const AuditEvent&)> family;
};

struct FeatureDef {
  std::string name;
  FeatureKind kind = FeatureKind::Count;
  std::function<bool(const AuditEvent&)> match;
  std::string novelty_rule;  // required when kind == NoveltyCount
};

struct FeatureSet {
  Aspect aspect = Aspect::Device;
  std::vector<FeatureDef> features;
  std::vector<NoveltyRule> novelty_rules;

  void validate() const;  // unique names, resolvable rules
  const NoveltyRule& rule(const std::string& id) const;
  std::vector<std::string> feature_names() const;
};

// Pairs observed strictly before the current day. A pair first seen on day d
// does not affect day d's novelty counts, only later days'.
class NoveltyState {
 public:
  bool contains(const std::string& key) const { return seen_.count(key) != 0; }
  std::size_t size() const { return seen_.size(); }

  // Folds in the pairs observed on `day`. Days must advance monotonically.
  void advance(const FeatureSet& set, std::span<const AuditEvent> day_events, Date day);

  static std::string pair_key(const NoveltyRule& rule, const AuditEvent& event);

 private:
  std::set<std::string> seen_;
  bool advanced_ = false;
  Date last_day_ = 0;
};

struct FeatureMeasurement {
  std::string user_id;
  Date day = 0;
  int frame = 0;
  std::string feature;
  double value = 0.0;
};

// Per-feature values for one (user, day, frame) bucket, aligned with
// set.features. Count: matching events. UniqueCount: distinct
// (action, object) among matches. NoveltyCount: matching events whose
// novelty pair is unseen. Unmatched features report 0.
std::vector<double> extract_features(std::span<const AuditEvent> bucket,
                                     const FeatureSet& set, const NoveltyState& novelty);

std::vector<FeatureMeasurement> extract_measurements(std::span<const AuditEvent> bucket,
                                                     const FeatureSet& set,
                                                     const NoveltyState& novelty,
                                                     const std::string& user_id, Date day,
                                                     int frame);

// Named presets. "cert" covers device (2 features), file (7) and http (7);
// "case" covers file, command (3 each: events / unique / new) and http (4:
// success / failure split with domain novelty).
std::vector<FeatureSet> feature_preset(const std::string& name);
std::vector<std::string> feature_preset_names();

// One Count feature per action in the aspect's vocabulary; used by the
// coarse-grained baseline evaluation variant.
FeatureSet coarse_feature_set(Aspect aspect);

}  // namespace ubad
