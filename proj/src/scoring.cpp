#include "ubad/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <sstream>

#include "json.hpp"
#include "ubad/errors.hpp"
#include "ubad/rng.hpp"

namespace ubad {

namespace {

bool label_of(const LabelMap* labels, const std::string& user) {
  if (!labels) return false;
  auto it = labels->find(user);
  return it != labels->end() && it->second;
}

// Comparator for tied keys. Pessimistic lists normal users first so the
// resulting investigation order is worst-case for the detector.
bool tie_less(TieRule rule, const LabelMap* labels, const std::string& a,
              const std::string& b) {
  if (rule != TieRule::UserId) {
    const bool aa = label_of(labels, a);
    const bool ab = label_of(labels, b);
    if (aa != ab) {
      const bool normal_first = rule == TieRule::PessimisticByLabel;
      return normal_first ? !aa : aa;
    }
  }
  return a < b;
}

}  // namespace

RankTable rank_users(const AspectScores& scores, TieRule tie_rule, const LabelMap* labels) {
  if (scores.scores.empty()) throw UsageError("rank_users over an empty score map");
  std::vector<std::pair<std::string, double>> order(scores.scores.begin(), scores.scores.end());
  for (const auto& [user, score] : order) {
    if (std::isnan(score)) throw DataError("NaN score for user '" + user + "'");
  }
  std::sort(order.begin(), order.end(), [&](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return tie_less(tie_rule, labels, a.first, b.first);
  });
  RankTable table;
  table.aspect = scores.aspect;
  table.end_day = scores.end_day;
  int rank = 1;
  for (const auto& [user, _] : order) table.ranks[user] = rank++;
  return table;
}

InvestigationList prioritize(const std::map<std::string, std::vector<int>>& ranks_by_user,
                             int n, Date end_day, const std::vector<std::string>& aspects,
                             TieRule tie_rule, const LabelMap* labels) {
  if (ranks_by_user.empty()) throw UsageError("prioritize over an empty user set");
  const int aspect_count = static_cast<int>(aspects.size());
  if (n < 1 || n > aspect_count) {
    throw ConfigError("critic N=" + std::to_string(n) + " out of range [1, " +
                      std::to_string(aspect_count) + "]");
  }

  InvestigationList list;
  list.end_day = end_day;
  list.n_used = n;
  list.aspects = aspects;
  for (const auto& [user, ranks] : ranks_by_user) {
    if (static_cast<int>(ranks.size()) != aspect_count) {
      throw UsageError("user '" + user + "' has " + std::to_string(ranks.size()) +
                       " ranks for " + std::to_string(aspect_count) + " aspects");
    }
    std::vector<int> sorted = ranks;
    std::sort(sorted.begin(), sorted.end());
    list.rows.push_back({user, sorted[n - 1], ranks});
  }
  std::sort(list.rows.begin(), list.rows.end(), [&](const auto& a, const auto& b) {
    if (a.priority != b.priority) return a.priority < b.priority;
    return tie_less(tie_rule, labels, a.user_id, b.user_id);
  });
  return list;
}

std::string investigation_list_to_csv(const InvestigationList& list) {
  std::ostringstream out;
  out << "rank,user,priority";
  for (const auto& aspect : list.aspects) out << ",rank_" << aspect;
  out << '\n';
  int position = 1;
  for (const auto& row : list.rows) {
    out << position++ << ',' << row.user_id << ',' << row.priority;
    for (int r : row.aspect_ranks) out << ',' << r;
    out << '\n';
  }
  return out.str();
}

std::string investigation_list_to_json(const InvestigationList& list) {
  nlohmann::ordered_json j;
  j["end_day"] = format_date(list.end_day);
  j["n"] = list.n_used;
  j["aspects"] = list.aspects;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& row : list.rows) {
    nlohmann::ordered_json r;
    r["user"] = row.user_id;
    r["priority"] = row.priority;
    r["ranks"] = row.aspect_ranks;
    rows.push_back(std::move(r));
  }
  j["list"] = std::move(rows);
  return j.dump();
}

std::map<std::string, TrainedAspect> train_ensemble(
    const std::map<std::string, std::vector<FlatVector>>& matrices_by_aspect,
    const TrainConfig& config, std::uint64_t seed, const std::vector<int>& hidden_widths) {
  if (matrices_by_aspect.empty()) throw ConfigError("no aspects to train on");
  for (const auto& [aspect, samples] : matrices_by_aspect) {
    if (samples.empty()) throw ConfigError("aspect '" + aspect + "' has no training samples");
    const std::size_t dim = samples.front().dim();
    for (const auto& s : samples) {
      if (s.dim() != dim) {
        throw ConfigError("aspect '" + aspect + "' has inconsistent matrix dimensions");
      }
    }
  }

  std::map<std::string, std::future<TrainedAspect>> jobs;
  for (const auto& [aspect, samples] : matrices_by_aspect) {
    const std::uint64_t aspect_seed = Rng::derive(seed, aspect);
    const auto* data = &samples;
    jobs[aspect] = std::async(std::launch::async, [data, aspect_seed, &config,
                                                   &hidden_widths] {
      const int dim = static_cast<int>(data->front().dim());
      TrainedAspect trained;
      trained.model = Autoencoder::init(dim, hidden_widths, aspect_seed);
      TrainConfig aspect_config = config;
      aspect_config.shuffle_seed = Rng::derive(aspect_seed, "shuffle");
      trained.loss_trace = trained.model.train(*data, aspect_config);
      return trained;
    });
  }
  std::map<std::string, TrainedAspect> models;
  for (auto& [aspect, job] : jobs) models.emplace(aspect, job.get());
  return models;
}

std::vector<TrendPoint> score_trend(const Autoencoder& model, const MatrixBuilder& builder,
                                    const std::string& user, Date from, Date to) {
  if (from > to) throw UsageError("empty trend day range");
  std::vector<TrendPoint> trend;
  for (Date day = from; day <= to; ++day) {
    if (day < builder.min_end_day()) {
      trend.push_back({day, std::nullopt});  // burn-in
    } else {
      trend.push_back({day, model.score(builder.flat(user, day))});
    }
  }
  return trend;
}

}  // namespace ubad
