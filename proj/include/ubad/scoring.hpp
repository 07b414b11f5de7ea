#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ubad/autoencoder.hpp"
#include "ubad/deviation.hpp"

namespace ubad {

struct AspectScores {
  std::string aspect;
  Date end_day = 0;
  std::map<std::string, double> scores;  // user -> mean-squared reconstruction error
};

// Rank ties are rare but must be deterministic. UserId keeps runs
// reproducible; the label-aware rules order tied users worst-case
// (normal first, so a false positive is investigated before the true
// positive) or best-case for evaluation sweeps.
enum class TieRule { UserId, PessimisticByLabel, OptimisticByLabel };

using LabelMap = std::map<std::string, bool>;  // user -> abnormal?

struct RankTable {
  std::string aspect;
  Date end_day = 0;
  std::map<std::string, int> ranks;  // 1 = most anomalous
};

RankTable rank_users(const AspectScores& scores, TieRule tie_rule = TieRule::UserId,
                     const LabelMap* labels = nullptr);

struct InvestigationRow {
  std::string user_id;
  int priority = 0;
  std::vector<int> aspect_ranks;  // in list.aspects order
};

struct InvestigationList {
  Date end_day = 0;
  int n_used = 0;
  std::vector<std::string> aspects;
  std::vector<InvestigationRow> rows;  // ascending priority
};

// The N-th-highest-rank critic: a user's priority is the N-th best of their
// per-aspect ranks (sorted ascending, index N-1); the list is sorted by
// priority ascending.
InvestigationList prioritize(const std::map<std::string, std::vector<int>>& ranks_by_user,
                             int n, Date end_day, const std::vector<std::string>& aspects,
                             TieRule tie_rule = TieRule::UserId,
                             const LabelMap* labels = nullptr);

std::string investigation_list_to_csv(const InvestigationList& list);
std::string investigation_list_to_json(const InvestigationList& list);

struct TrainedAspect {
  Autoencoder model;
  std::vector<double> loss_trace;
};

// One independently trained model per aspect. Per-aspect seeds derive from
// the base seed and the aspect name, so aspects never share state; models
// train concurrently.
std::map<std::string, TrainedAspect> train_ensemble(
    const std::map<std::string, std::vector<FlatVector>>& matrices_by_aspect,
    const TrainConfig& config, std::uint64_t seed,
    const std::vector<int>& hidden_widths = {});

struct TrendPoint {
  Date day = 0;
  std::optional<double> score;  // empty marks a burn-in day
};

// Daily anomaly scores for one user; days before the first computable matrix
// are included as burn-in markers.
std::vector<TrendPoint> score_trend(const Autoencoder& model, const MatrixBuilder& builder,
                                    const std::string& user, Date from, Date to);

}  // namespace ubad
