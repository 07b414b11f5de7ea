#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "ubad/errors.hpp"
#include "ubad/rng.hpp"
#include "ubad/scoring.hpp"

using namespace ubad;

namespace {

// Independent O(n^2) ranking: 1 + users with a higher score + tied users
// with a smaller id.
std::map<std::string, int> brute_force_ranks(const std::map<std::string, double>& scores) {
  std::map<std::string, int> ranks;
  for (const auto& [user, score] : scores) {
    int rank = 1;
    for (const auto& [other, other_score] : scores) {
      if (other == user) continue;
      if (other_score > score || (other_score == score && other < user)) ++rank;
    }
    ranks[user] = rank;
  }
  return ranks;
}

// Literal re-implementation of the critic: sort each user's ranks, take the
// (N-1)-indexed element, sort tuples by priority (user id on ties).
std::vector<std::pair<std::string, int>> brute_force_critic(
    const std::map<std::string, std::vector<int>>& ranks_by_user, int n) {
  std::vector<std::pair<std::string, int>> tuples;
  for (const auto& [user, ranks] : ranks_by_user) {
    std::vector<int> sorted = ranks;
    std::sort(sorted.begin(), sorted.end());
    tuples.emplace_back(user, sorted[n - 1]);
  }
  std::sort(tuples.begin(), tuples.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second < b.second;
    return a.first < b.first;
  });
  return tuples;
}

}  // namespace

TEST_CASE("rank_users sorts by descending score") {
  AspectScores scores;
  scores.aspect = "http";
  scores.scores = {{"a", 0.9}, {"b", 0.1}, {"c", 0.5}};
  const RankTable table = rank_users(scores);
  CHECK(table.ranks.at("a") == 1);
  CHECK(table.ranks.at("c") == 2);
  CHECK(table.ranks.at("b") == 3);
}

TEST_CASE("equal scores rank in user id order") {
  AspectScores scores;
  scores.scores = {{"c", 0.5}, {"a", 0.5}, {"b", 0.5}};
  const RankTable table = rank_users(scores);
  CHECK(table.ranks.at("a") == 1);
  CHECK(table.ranks.at("b") == 2);
  CHECK(table.ranks.at("c") == 3);
}

TEST_CASE("pessimistic ties put the normal user ahead of the abnormal one") {
  AspectScores scores;
  scores.scores = {{"evil", 0.5}, {"good", 0.5}};
  LabelMap labels{{"evil", true}};
  const RankTable pess = rank_users(scores, TieRule::PessimisticByLabel, &labels);
  CHECK(pess.ranks.at("good") == 1);
  CHECK(pess.ranks.at("evil") == 2);
  const RankTable opt = rank_users(scores, TieRule::OptimisticByLabel, &labels);
  CHECK(opt.ranks.at("evil") == 1);
}

TEST_CASE("100 random score tables match the brute-force ranking") {
  Rng rng(61);
  for (int trial = 0; trial < 100; ++trial) {
    AspectScores scores;
    const int n = 2 + static_cast<int>(rng.uniform_int(30));
    for (int i = 0; i < n; ++i) {
      // a few deliberate ties via rounding
      scores.scores["u" + std::to_string(i)] = std::floor(rng.uniform(0.0, 20.0)) / 10.0;
    }
    const RankTable table = rank_users(scores);
    CHECK(table.ranks == brute_force_ranks(scores.scores));
  }
}

TEST_CASE("ranks are a permutation and scale-invariant") {
  Rng rng(62);
  AspectScores scores;
  for (int i = 0; i < 40; ++i) scores.scores["u" + std::to_string(i)] = rng.uniform();
  const RankTable base = rank_users(scores);
  std::vector<int> seen(41, 0);
  for (const auto& [user, rank] : base.ranks) {
    CHECK(rank >= 1);
    CHECK(rank <= 40);
    seen[rank]++;
  }
  for (int r = 1; r <= 40; ++r) CHECK(seen[r] == 1);

  AspectScores scaled = scores;
  for (auto& [user, score] : scaled.scores) score *= 17.5;
  CHECK(rank_users(scaled).ranks == base.ranks);
}

TEST_CASE("NaN scores are data errors") {
  AspectScores scores;
  scores.scores = {{"a", std::nan("")}};
  CHECK_THROWS_AS(rank_users(scores), DataError);
}

TEST_CASE("the critic reproduces the worked example") {
  std::map<std::string, std::vector<int>> ranks{{"u", {3, 5, 4}}};
  const auto aspects = std::vector<std::string>{"a1", "a2", "a3"};
  CHECK(prioritize(ranks, 2, 0, aspects).rows[0].priority == 4);
  CHECK(prioritize(ranks, 1, 0, aspects).rows[0].priority == 3);
  CHECK(prioritize(ranks, 3, 0, aspects).rows[0].priority == 5);
  CHECK_THROWS_AS(prioritize(ranks, 0, 0, aspects), ConfigError);
  CHECK_THROWS_AS(prioritize(ranks, 4, 0, aspects), ConfigError);
}

TEST_CASE("200 randomized critic instances match the line-by-line oracle") {
  Rng rng(63);
  const std::vector<std::string> aspects{"device", "file", "http"};
  for (int trial = 0; trial < 200; ++trial) {
    const int users = 2 + static_cast<int>(rng.uniform_int(50));
    std::map<std::string, std::vector<int>> ranks;
    // per-aspect rank permutations
    for (int a = 0; a < 3; ++a) {
      std::vector<int> perm(users);
      for (int i = 0; i < users; ++i) perm[i] = i + 1;
      rng.shuffle(perm);
      for (int i = 0; i < users; ++i) {
        char buf[8];
        std::snprintf(buf, sizeof(buf), "u%02d", i);
        ranks[buf].push_back(perm[i]);
      }
    }
    const int n = 1 + static_cast<int>(rng.uniform_int(3));
    const InvestigationList list = prioritize(ranks, n, 0, aspects);
    const auto oracle = brute_force_critic(ranks, n);
    REQUIRE(list.rows.size() == oracle.size());
    for (std::size_t i = 0; i < oracle.size(); ++i) {
      CHECK(list.rows[i].user_id == oracle[i].first);
      CHECK(list.rows[i].priority == oracle[i].second);
    }
  }
}

TEST_CASE("critic list is a total order with N edge semantics") {
  Rng rng(64);
  const std::vector<std::string> aspects{"a", "b", "c", "d"};
  std::map<std::string, std::vector<int>> ranks;
  const int users = 25;
  for (int a = 0; a < 4; ++a) {
    std::vector<int> perm(users);
    for (int i = 0; i < users; ++i) perm[i] = i + 1;
    rng.shuffle(perm);
    for (int i = 0; i < users; ++i) {
      ranks["u" + std::to_string(i)].push_back(perm[i]);
    }
  }
  const InvestigationList list = prioritize(ranks, 2, 0, aspects);
  CHECK(list.rows.size() == users);
  std::set<std::string> unique;
  int prev = 0;
  for (const auto& row : list.rows) {
    unique.insert(row.user_id);
    CHECK(row.priority >= prev);
    prev = row.priority;
  }
  CHECK(unique.size() == users);

  // N=1 is the best rank, N=#aspects the worst
  const auto best = prioritize(ranks, 1, 0, aspects);
  const auto worst = prioritize(ranks, 4, 0, aspects);
  for (const auto& row : best.rows) {
    CHECK(row.priority == *std::min_element(row.aspect_ranks.begin(), row.aspect_ranks.end()));
  }
  for (const auto& row : worst.rows) {
    CHECK(row.priority == *std::max_element(row.aspect_ranks.begin(), row.aspect_ranks.end()));
  }
}

TEST_CASE("a user ranked first in at least N aspects tops the list") {
  std::map<std::string, std::vector<int>> ranks{
      {"star", {1, 1, 7}}, {"mid", {2, 3, 1}}, {"rest", {3, 2, 2}}};
  const InvestigationList list = prioritize(ranks, 2, 0, {"a", "b", "c"});
  CHECK(list.rows[0].user_id == "star");
  CHECK(list.rows[0].priority == 1);
}

TEST_CASE("ensemble training yields one independent model per aspect") {
  Rng rng(65);
  std::map<std::string, std::vector<FlatVector>> data;
  for (const char* aspect : {"device", "file", "http"}) {
    std::vector<FlatVector> samples;
    for (int i = 0; i < 12; ++i) {
      FlatVector v;
      for (int j = 0; j < 10; ++j) v.values.push_back(rng.uniform());
      samples.push_back(std::move(v));
    }
    data[aspect] = std::move(samples);
  }
  TrainConfig config;
  config.epochs = 5;
  config.batch_size = 6;

  auto models = train_ensemble(data, config, 42);
  CHECK(models.size() == 3);
  for (const char* aspect : {"device", "file", "http"}) CHECK(models.count(aspect) == 1);

  // identical seeds give byte-identical checkpoints
  auto again = train_ensemble(data, config, 42);
  for (const auto& [aspect, trained] : models) {
    CHECK(trained.model.to_json() == again.at(aspect).model.to_json());
    CHECK(trained.loss_trace == again.at(aspect).loss_trace);
  }

  // retraining aspect A never changes aspect B: models from a run with a
  // different device payload leave file/http untouched
  auto altered = data;
  for (auto& v : altered["device"]) {
    for (auto& x : v.values) x = std::min(1.0, x + 0.1);
  }
  auto third = train_ensemble(altered, config, 42);
  CHECK(third.at("file").model.to_json() == models.at("file").model.to_json());
  CHECK(third.at("http").model.to_json() == models.at("http").model.to_json());
  CHECK(third.at("device").model.to_json() != models.at("device").model.to_json());
}

TEST_CASE("ensemble rejects empty input and inconsistent dimensions") {
  TrainConfig config;
  CHECK_THROWS_AS(train_ensemble({}, config, 1), ConfigError);

  std::map<std::string, std::vector<FlatVector>> data;
  FlatVector a, b;
  a.values = {0.1, 0.2};
  b.values = {0.1, 0.2, 0.3};
  data["broken"] = {a, b};
  try {
    train_ensemble(data, config, 1);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("broken") != std::string::npos);
  }
}

TEST_CASE("score trends mark burn-in days and peak after an injected spike") {
  const Date d0 = parse_date("2025-01-01");
  MeasurementStore store(Aspect::Device, {"f"}, 1, d0, d0 + 29);
  store.add_user("u");
  for (int i = 0; i < 30; ++i) store.set("u", 0, 0, d0 + i, 4.0);
  store.set("u", 0, 0, d0 + 20, 40.0);  // anomaly at day 20

  GroupMap groups;
  groups.groups["g"] = {"u"};
  DeviationParams params;
  params.omega = 5;
  params.matrix_days = 3;
  const MatrixBuilder builder(store, groups, params);

  // zero model: score is the mean square of the flat vector, monotone in
  // deviation magnitude
  Autoencoder model = Autoencoder::init(2 * 1 * 1 * 3, {3}, 1);
  for (auto& layer : model.layers()) {
    layer.w.setZero();
    layer.b.setZero();
    if (layer.batch_norm) {
      layer.gamma.setOnes();
      layer.beta.setZero();
      layer.run_mean.setZero();
      layer.run_var.setOnes();
    }
  }

  const auto trend = score_trend(model, builder, "u", d0, d0 + 29);
  REQUIRE(trend.size() == 30);
  // burn-in: no matrix before min_end_day
  for (int i = 0; i < 6; ++i) CHECK(!trend[i].score.has_value());
  CHECK(trend[6].score.has_value());

  int best_index = -1;
  double best = -1.0;
  for (int i = 0; i < 30; ++i) {
    if (trend[i].score && *trend[i].score > best) {
      best = *trend[i].score;
      best_index = i;
    }
  }
  CHECK(best_index >= 20);

  // single-day trend equals a direct score call
  const auto single = score_trend(model, builder, "u", d0 + 10, d0 + 10);
  REQUIRE(single.size() == 1);
  CHECK(*single[0].score == model.score(builder.flat("u", d0 + 10)));
}

TEST_CASE("investigation list export formats") {
  std::map<std::string, std::vector<int>> ranks{{"a", {1, 2}}, {"b", {2, 1}}};
  const InvestigationList list = prioritize(ranks, 2, parse_date("2025-02-01"), {"x", "y"});
  const std::string csv = investigation_list_to_csv(list);
  CHECK(csv.find("rank,user,priority,rank_x,rank_y") == 0);
  CHECK(csv.find("1,a,2,1,2") != std::string::npos);
  const std::string json_text = investigation_list_to_json(list);
  CHECK(json_text.find("\"end_day\":\"2025-02-01\"") != std::string::npos);
}
