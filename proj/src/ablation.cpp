#include "ubad/ablation.hpp"

#include <algorithm>

#include "ubad/errors.hpp"
#include "ubad/rng.hpp"

namespace ubad {

const char* variant_name(Variant v) {
  switch (v) {
    case Variant::Compound: return "compound";
    case Variant::OneDay: return "one_day";
    case Variant::NoGroup: return "no_group";
    case Variant::AllInOne: return "all_in_one";
    case Variant::Baseline: return "baseline";
    case Variant::BaseFf: return "base_ff";
  }
  return "?";
}

Variant variant_from_name(const std::string& name) {
  for (Variant v : {Variant::Compound, Variant::OneDay, Variant::NoGroup, Variant::AllInOne,
                    Variant::Baseline, Variant::BaseFf}) {
    if (name == variant_name(v)) return v;
  }
  throw ConfigError("unknown variant: '" + name + "'");
}

std::vector<FeatureSet> variant_feature_sets(const VariantConfig& config) {
  const auto fine = feature_preset(config.feature_preset);
  if (config.variant != Variant::Baseline) return fine;
  std::vector<FeatureSet> coarse;
  coarse.reserve(fine.size());
  for (const auto& set : fine) coarse.push_back(coarse_feature_set(set.aspect));
  return coarse;
}

FrameConfig variant_frames(const VariantConfig& config) {
  if (config.variant == Variant::Baseline || config.variant == Variant::BaseFf) {
    return FrameConfig::hourly();
  }
  return config.frames;
}

namespace {

bool variant_single_day(Variant v) {
  return v == Variant::OneDay || v == Variant::Baseline || v == Variant::BaseFf;
}

bool variant_uses_group(Variant v) {
  return v == Variant::Compound || v == Variant::AllInOne || v == Variant::OneDay;
}

}  // namespace

bool VariantSampler::uses_group() const { return variant_uses_group(variant_); }
bool VariantSampler::single_day() const { return variant_single_day(variant_); }

VariantSampler::VariantSampler(Variant variant,
                               const std::map<std::string, MeasurementStore>& stores,
                               const GroupMap& groups, const DeviationParams& deviation,
                               Date test_start, int train_stride)
    : variant_(variant),
      stores_(stores),
      groups_(groups),
      deviation_(deviation),
      test_start_(test_start),
      train_stride_(std::max(1, train_stride)) {
  if (stores_.empty()) throw ConfigError("no measurement stores");
  deviation_.validate();

  Date first = 0, last = 0;
  bool have_span = false;
  for (const auto& [aspect, store] : stores_) {
    if (!have_span) {
      first = store.first_day();
      last = store.last_day();
      have_span = true;
    } else if (store.first_day() != first || store.last_day() != last) {
      throw ConfigError("aspect stores cover different day spans");
    }
  }
  last_day_ = last;

  if (variant_single_day(variant_)) {
    // Counts need no sliding history; start after the same burn-in so the
    // novelty features are warmed comparably to the deviation variants.
    first_scoreable_ = first + (deviation_.omega - 1);
  } else {
    for (const auto& [aspect, store] : stores_) {
      builders_.emplace(aspect, MatrixBuilder(store, groups_, deviation_));
    }
    first_scoreable_ = builders_.begin()->second.min_end_day();
  }
  if (test_start_ <= first_scoreable_ || test_start_ > last_day_) {
    throw ConfigError("test_start " + format_date(test_start_) +
                      " leaves no training or no test days (scoreable range [" +
                      format_date(first_scoreable_) + ", " + format_date(last_day_) + "])");
  }

  if (variant_single_day(variant_)) {
    // Per (feature, frame) maxima over the training span, for scaling.
    for (const auto& [aspect, store] : stores_) {
      const int cells = store.feature_count() * store.frames();
      std::vector<double> umax(cells, 0.0), gmax(cells, 0.0);
      const auto users = store.user_ids();
      for (int f = 0; f < store.feature_count(); ++f) {
        for (int t = 0; t < store.frames(); ++t) {
          const int c = f * store.frames() + t;
          for (const auto& user : users) {
            const auto series = store.day_series(user, f, t);
            for (Date d = first_scoreable_; d < test_start_; ++d) {
              umax[c] = std::max(umax[c], series[d - store.first_day()]);
            }
          }
          if (variant_uses_group(variant_)) {
            for (const auto& [gid, members] : groups_.groups) {
              const auto series = store.group_day_series(members, f, t);
              for (Date d = first_scoreable_; d < test_start_; ++d) {
                gmax[c] = std::max(gmax[c], series[d - store.first_day()]);
              }
            }
          }
        }
      }
      user_max_[aspect] = std::move(umax);
      group_max_[aspect] = std::move(gmax);
    }
  }
}

std::vector<std::string> VariantSampler::model_keys() const {
  if (variant_ == Variant::AllInOne) return {"all"};
  std::vector<std::string> keys;
  for (const auto& [aspect, _] : stores_) keys.push_back(aspect);
  return keys;
}

int VariantSampler::input_dim(const std::string& key) const {
  const auto aspect_dim = [&](const std::string& aspect) {
    const auto& store = stores_.at(aspect);
    const int per_block = store.feature_count() * store.frames() *
                          (variant_single_day(variant_) ? 1 : deviation_.days());
    return variant_uses_group(variant_) ? 2 * per_block : per_block;
  };
  if (variant_ == Variant::AllInOne && key == "all") {
    int dim = 0;
    for (const auto& [aspect, _] : stores_) dim += aspect_dim(aspect);
    return dim;
  }
  return aspect_dim(key);
}

std::vector<Date> VariantSampler::train_days() const {
  std::vector<Date> days;
  for (Date d = first_scoreable_; d < test_start_; d += train_stride_) days.push_back(d);
  return days;
}

std::vector<Date> VariantSampler::test_days() const {
  std::vector<Date> days;
  for (Date d = test_start_; d <= last_day_; ++d) days.push_back(d);
  return days;
}

FlatVector VariantSampler::aspect_sample(const std::string& aspect, const std::string& user,
                                         Date day) const {
  const auto& store = stores_.at(aspect);
  if (!variant_single_day(variant_)) {
    const CompoundMatrix matrix = builders_.at(aspect).matrix(user, day);
    FlatVector flat = flatten_normalize(matrix, deviation_);
    if (!variant_uses_group(variant_)) {
      flat.values.resize(matrix.cells());  // user block only
    }
    return flat;
  }

  // Single-day variants: per-cell max scaling into [0, 1].
  const auto& umax = user_max_.at(aspect);
  FlatVector flat;
  const int cells = store.feature_count() * store.frames();
  flat.values.reserve(variant_uses_group(variant_) ? 2 * cells : cells);
  for (int f = 0; f < store.feature_count(); ++f) {
    for (int t = 0; t < store.frames(); ++t) {
      const int c = f * store.frames() + t;
      const double v = store.at(user, f, t, day);
      flat.values.push_back(umax[c] > 0.0 ? std::min(1.0, v / umax[c]) : 0.0);
    }
  }
  if (variant_uses_group(variant_)) {
    const auto& gmax = group_max_.at(aspect);
    const auto& members = groups_.members_of(user);
    for (int f = 0; f < store.feature_count(); ++f) {
      for (int t = 0; t < store.frames(); ++t) {
        const int c = f * store.frames() + t;
        const auto series = store.group_day_series(members, f, t);
        const double v = series[day - store.first_day()];
        flat.values.push_back(gmax[c] > 0.0 ? std::min(1.0, v / gmax[c]) : 0.0);
      }
    }
  }
  return flat;
}

FlatVector VariantSampler::sample(const std::string& key, const std::string& user,
                                  Date day) const {
  if (variant_ != Variant::AllInOne) return aspect_sample(key, user, day);
  FlatVector flat;
  for (const auto& [aspect, _] : stores_) {
    const FlatVector part = aspect_sample(aspect, user, day);
    flat.values.insert(flat.values.end(), part.values.begin(), part.values.end());
  }
  return flat;
}

std::vector<FlatVector> VariantSampler::train_samples(const std::string& key) const {
  std::vector<FlatVector> samples;
  const auto days = train_days();
  const auto users = groups_.all_users();
  samples.reserve(days.size() * users.size());
  for (const auto& user : users) {
    for (Date day : days) samples.push_back(sample(key, user, day));
  }
  return samples;
}

VariantResult run_variant(const std::map<std::string, std::vector<AuditEvent>>& by_user,
                          const LabelSet& labels, const GroupMap& groups,
                          const VariantConfig& config) {
  const auto sets = variant_feature_sets(config);
  const FrameConfig frames = variant_frames(config);

  ExtractOptions options;
  options.roster = groups.all_users();
  std::map<std::string, MeasurementStore> stores;
  for (const auto& set : sets) {
    stores.emplace(aspect_name(set.aspect), extract_store(by_user, set, frames, options));
  }

  VariantSampler sampler(config.variant, stores, groups, config.deviation, config.test_start,
                         config.train_stride);

  std::map<std::string, std::vector<FlatVector>> train_sets;
  for (const auto& key : sampler.model_keys()) train_sets[key] = sampler.train_samples(key);
  auto trained = train_ensemble(train_sets, config.train, config.seed, config.hidden);

  VariantResult result;
  result.variant = config.variant;
  for (const auto& key : sampler.model_keys()) result.input_dims[key] = sampler.input_dim(key);

  LabelMap label_map;
  for (const auto& [user, span] : labels.abnormal) label_map[user] = true;
  const bool labeled = !labels.abnormal.empty();
  if (!labeled) {
    throw DataError("curve undefined: the dataset has no abnormal users to evaluate against");
  }
  const auto users = groups.all_users();
  const int aspect_count = static_cast<int>(sampler.model_keys().size());
  const int n = std::min(config.critic_n, aspect_count);

  for (Date day : sampler.test_days()) {
    std::map<std::string, std::vector<int>> user_ranks;
    std::vector<std::string> aspect_order;
    for (const auto& key : sampler.model_keys()) {
      AspectScores scores;
      scores.aspect = key;
      scores.end_day = day;
      const auto& model = trained.at(key).model;
      for (const auto& user : users) {
        scores.scores[user] = model.score(sampler.sample(key, user, day));
      }
      result.scores[key][day] = scores.scores;
      const RankTable table = rank_users(
          scores, labeled ? TieRule::PessimisticByLabel : TieRule::UserId, &label_map);
      for (const auto& [user, rank] : table.ranks) user_ranks[user].push_back(rank);
      aspect_order.push_back(key);
    }
    InvestigationList list =
        prioritize(user_ranks, n, day, aspect_order,
                   labeled ? TieRule::PessimisticByLabel : TieRule::UserId, &label_map);
    result.daily.push_back({day, std::move(list)});
    result.days.push_back(day);
  }

  if (labeled) {
    Date attack_start = sampler.test_days().back();
    for (const auto& [user, span] : labels.abnormal) {
      attack_start = std::min(attack_start, span.from);
    }
    double best_auc = -1.0;
    double auc_sum = 0.0;
    int post_attack_days = 0;
    for (const auto& [day, list] : result.daily) {
      std::vector<LabeledOutcome> outcomes;
      outcomes.reserve(list.rows.size());
      for (const auto& row : list.rows) {
        outcomes.push_back({row.user_id, labels.is_abnormal(row.user_id), row.priority});
      }
      const Curve roc = curves_and_auc(outcomes, CurveKind::Roc, TieMode::Pessimistic);
      result.day_auc[day] = roc.auc;
      if (day >= attack_start) {
        auc_sum += roc.auc;
        ++post_attack_days;
      }

      int position = 1;
      for (const auto& row : list.rows) {
        if (labels.is_abnormal(row.user_id) && day >= attack_start) {
          auto it = result.best_position.find(row.user_id);
          if (it == result.best_position.end() || position < it->second) {
            result.best_position[row.user_id] = position;
          }
        }
        ++position;
      }

      if (day >= attack_start && roc.auc > best_auc) {
        best_auc = roc.auc;
        result.best_day = day;
        result.best_roc_auc = roc.auc;
        result.fps_before_tp = roc.fps_before_tp;
        result.best_pr_auc = curves_and_auc(outcomes, CurveKind::Pr, TieMode::Pessimistic).auc;
      }
    }
    if (post_attack_days > 0) result.mean_roc_auc = auc_sum / post_attack_days;
  }
  return result;
}

std::map<Variant, VariantResult> run_ablation(
    const std::vector<AuditEvent>& events, const LabelSet& labels, const GroupMap& groups,
    const VariantConfig& base, const std::vector<Variant>& variants) {
  if (variants.empty()) throw ConfigError("no variants requested");
  const auto by_user = partition_by_user(events);
  std::map<Variant, VariantResult> results;
  for (Variant v : variants) {
    VariantConfig config = base;
    config.variant = v;
    results.emplace(v, run_variant(by_user, labels, groups, config));
  }
  return results;
}

}  // namespace ubad
