// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails. Criteria with stated runtime budgets are timed.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "ubad/ablation.hpp"
#include "ubad/autoencoder.hpp"
#include "ubad/deviation.hpp"
#include "ubad/metrics.hpp"
#include "ubad/pipeline.hpp"
#include "ubad/rng.hpp"
#include "ubad/scoring.hpp"
#include "ubad/synthgen.hpp"

using namespace ubad;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

class Criterion {
 public:
  Criterion(int number, std::string name, double budget_seconds)
      : number_(number), name_(std::move(name)), budget_(budget_seconds) {
    start_ = std::chrono::steady_clock::now();
  }

  void check(bool ok, const std::string& detail) {
    if (!ok) {
      failed_ = true;
      details_.push_back(detail);
    }
  }

  void finish() {
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    if (budget_ > 0.0 && elapsed > budget_) {
      failed_ = true;
      details_.push_back("runtime " + std::to_string(elapsed) + "s exceeds " +
                         std::to_string(budget_) + "s");
    }
    std::printf("%s criterion %d: %s [%.2fs]\n", failed_ ? "FAIL" : "PASS", number_,
                name_.c_str(), elapsed);
    for (const auto& d : details_) std::printf("      %s\n", d.c_str());
    std::fflush(stdout);
    if (failed_) ++g_failures;
  }

 private:
  int number_;
  std::string name_;
  double budget_;
  bool failed_ = false;
  std::vector<std::string> details_;
  std::chrono::steady_clock::time_point start_;
};

// ---------------------------------------------------------------- criterion 1

double oracle_sigma(double m, const std::vector<double>& h, double eps, double delta) {
  double mean = 0.0;
  for (double v : h) mean += v;
  mean /= static_cast<double>(h.size());
  double var = 0.0;
  for (double v : h) var += (v - mean) * (v - mean);
  var /= static_cast<double>(h.size());
  double sd = std::sqrt(var);
  if (sd < eps) sd = eps;
  const double d = (m - mean) / sd;
  if (d > delta) return delta;
  if (d < -delta) return -delta;
  return d;
}

double oracle_weight(const std::vector<double>& h) {
  double mean = 0.0;
  for (double v : h) mean += v;
  mean /= static_cast<double>(h.size());
  double var = 0.0;
  for (double v : h) var += (v - mean) * (v - mean);
  var /= static_cast<double>(h.size());
  double sd = std::sqrt(var);
  if (sd < 2.0) sd = 2.0;
  return 1.0 / std::log2(sd);
}

void criterion_deviation_oracle() {
  Criterion c(1, "deviation oracle equivalence (1000 randomized cases, 1e-9)", 1.0);
  Rng rng(90001);
  for (int i = 0; i < 1000; ++i) {
    const int omega = 2 + static_cast<int>(rng.uniform_int(39));
    std::vector<double> h(omega - 1);
    const bool constant = rng.uniform() < 0.15;
    const double base = rng.uniform(0.0, 40.0);
    for (auto& v : h) v = constant ? base : rng.uniform(0.0, 40.0);
    const double m = rng.uniform(-20.0, 80.0);

    DeviationParams p;
    p.omega = omega;
    const double sigma = compute_sigma(m, h, p);
    const double expected = oracle_sigma(m, h, p.eps, p.delta_cap);
    c.check(std::abs(sigma - expected) <=
                1e-9 * std::max({1.0, std::abs(sigma), std::abs(expected)}),
            "sigma mismatch at case " + std::to_string(i));
    c.check(std::abs(sigma) <= p.delta_cap, "clamp bound violated at case " + std::to_string(i));

    const double w = compute_weight(h);
    const double w_ref = oracle_weight(h);
    c.check(std::abs(w - w_ref) <= 1e-9 * std::max(1.0, std::abs(w_ref)),
            "weight mismatch at case " + std::to_string(i));
  }
  c.finish();
}

// ---------------------------------------------------------------- criterion 2

void criterion_weight_exactness() {
  Criterion c(2, "weight formula exactness (std <=2 ->1, 8 -> 1/3, 1024 -> 0.1)", 0.0);
  // population std of {0, 2x} is exactly x
  c.check(compute_weight(std::vector<double>{0.0, 2.6}) == 1.0, "std 1.3 must give weight 1");
  c.check(compute_weight(std::vector<double>{0.0, 4.0}) == 1.0, "std 2 must give weight 1");
  c.check(compute_weight(std::vector<double>{0.0, 16.0}) == 1.0 / 3.0,
          "std 8 must give weight 1/3");
  c.check(compute_weight(std::vector<double>{0.0, 2048.0}) == 0.1,
          "std 1024 must give weight 0.1");
  c.finish();
}

// ---------------------------------------------------------------- criterion 3

void criterion_critic_fidelity() {
  Criterion c(3, "critic fidelity (worked example + 200 randomized instances)", 1.0);
  const std::vector<std::string> aspects{"a1", "a2", "a3"};
  std::map<std::string, std::vector<int>> worked{{"u", {3, 5, 4}}};
  c.check(prioritize(worked, 2, 0, aspects).rows[0].priority == 4,
          "ranks (3,5,4) with N=2 must yield priority 4");

  Rng rng(90003);
  for (int trial = 0; trial < 200; ++trial) {
    const int users = 2 + static_cast<int>(rng.uniform_int(60));
    std::map<std::string, std::vector<int>> ranks;
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

    // line-by-line oracle
    std::vector<std::pair<std::string, int>> tuples;
    for (const auto& [user, r] : ranks) {
      std::vector<int> sorted = r;
      std::sort(sorted.begin(), sorted.end());
      tuples.emplace_back(user, sorted[n - 1]);
    }
    std::sort(tuples.begin(), tuples.end(), [](const auto& a, const auto& b) {
      if (a.second != b.second) return a.second < b.second;
      return a.first < b.first;
    });
    bool same = list.rows.size() == tuples.size();
    for (std::size_t i = 0; same && i < tuples.size(); ++i) {
      same = list.rows[i].user_id == tuples[i].first &&
             list.rows[i].priority == tuples[i].second;
    }
    c.check(same, "critic mismatch in trial " + std::to_string(trial));
  }
  c.finish();
}

// ---------------------------------------------------------------- criterion 4

void criterion_gradients() {
  Criterion c(4, "gradient correctness vs central finite differences (<1e-4)", 30.0);
  struct Case {
    int dim;
    std::vector<int> hidden;
    int batch;
    std::uint64_t seed;
  };
  const std::vector<Case> cases = {
      {6, {4, 2}, 4, 1234}, {5, {3}, 3, 77}, {9, {6, 3}, 6, 40812}};
  const double h = 1e-4;

  for (const auto& tc : cases) {
    Autoencoder model = Autoencoder::init(tc.dim, tc.hidden, tc.seed);
    Rng rng(tc.seed ^ 0x5555);
    Eigen::MatrixXd batch(tc.batch, tc.dim);
    for (int i = 0; i < tc.batch; ++i) {
      for (int j = 0; j < tc.dim; ++j) batch(i, j) = rng.uniform();
    }
    const auto grads = model.gradients(batch);
    const auto loss = [&] {
      return (model.forward_batchstats(batch) - batch).array().square().mean();
    };

    double max_rel = 0.0;
    const auto probe = [&](double& ref, double analytic) {
      const double saved = ref;
      ref = saved + h;
      const double up = loss();
      ref = saved - h;
      const double down = loss();
      ref = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double rel = std::abs(analytic - numeric) /
                         std::max({std::abs(analytic), std::abs(numeric), 1e-4});
      max_rel = std::max(max_rel, rel);
    };
    auto& layers = model.layers();
    for (std::size_t l = 0; l < layers.size(); ++l) {
      for (Eigen::Index i = 0; i < layers[l].w.rows(); ++i) {
        for (Eigen::Index j = 0; j < layers[l].w.cols(); ++j) {
          probe(layers[l].w(i, j), grads[l].w(i, j));
        }
      }
      for (Eigen::Index j = 0; j < layers[l].b.size(); ++j) {
        probe(layers[l].b(j), grads[l].b(j));
      }
      if (layers[l].batch_norm) {
        for (Eigen::Index j = 0; j < layers[l].gamma.size(); ++j) {
          probe(layers[l].gamma(j), grads[l].gamma(j));
          probe(layers[l].beta(j), grads[l].beta(j));
        }
      }
    }
    c.check(max_rel < 1e-4, "max relative gradient error " + std::to_string(max_rel) +
                                " on net dim " + std::to_string(tc.dim));
  }
  c.finish();
}

// ---------------------------------------------------------------- criterion 5

void criterion_separation() {
  Criterion c(5, "zero-positive separation (clamped matrix above p95 in >=95% of 20 trials)",
              300.0);
  // 150 normal matrices out of a small synthetic org
  OrgSpec org;
  org.user_count = 25;
  org.group_count = 2;
  org.first_day = parse_date("2025-01-06");
  org.days = 40;
  org.seed = 515;
  const auto by_user = partition_by_user(generate(org));
  const FeatureSet file_set = feature_preset("case")[0];
  ExtractOptions options;
  options.roster = org.user_ids();
  options.first_day = org.first_day;
  options.last_day = org.first_day + org.days - 1;
  const auto store = extract_store(by_user, file_set, FrameConfig::working_off(), options);
  const GroupMap groups = org.group_map();

  DeviationParams params;
  params.omega = 10;
  params.matrix_days = 6;
  const MatrixBuilder builder(store, groups, params);

  std::vector<CompoundMatrix> matrices;
  std::vector<FlatVector> flats;
  for (Date end = builder.min_end_day(); end <= store.last_day() && matrices.size() < 150;
       ++end) {
    for (const auto& user : org.user_ids()) {
      if (matrices.size() >= 150) break;
      matrices.push_back(builder.matrix(user, end));
      flats.push_back(flatten_normalize(matrices.back(), params));
    }
  }

  int successes = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const std::uint64_t seed = 7000 + trial;
    Autoencoder model =
        Autoencoder::init(static_cast<int>(flats.front().dim()), {}, seed);
    TrainConfig config;
    config.epochs = 150;
    config.batch_size = 32;
    config.shuffle_seed = seed;
    model.train(flats, config);

    std::vector<double> scores;
    for (const auto& v : flats) scores.push_back(model.score(v));
    std::sort(scores.begin(), scores.end());
    const double p95 = scores[static_cast<std::size_t>(0.95 * (scores.size() - 1))];

    Rng rng(seed * 13 + 1);
    CompoundMatrix outlier = matrices[rng.uniform_int(matrices.size())];
    const int clamp_cells = 5 + static_cast<int>(rng.uniform_int(4));
    std::set<std::size_t> picked;
    while (picked.size() < static_cast<std::size_t>(clamp_cells)) {
      const std::size_t i = rng.uniform_int(outlier.cells());
      if (!picked.insert(i).second) continue;
      outlier.user_sigma[i] = rng.uniform() < 0.5 ? params.delta_cap : -params.delta_cap;
      outlier.user_weight[i] = 1.0;
    }
    if (model.score(flatten_normalize(outlier, params)) > p95) ++successes;
  }
  c.check(successes >= 19, "only " + std::to_string(successes) + "/20 trials separated");
  c.finish();
}

// ------------------------------------------------------------- criteria 6 & 7

struct ScenarioRun {
  VariantResult result;
  LabelSet labels;
  std::string victim;
};

ScenarioRun run_scenario(Scenario kind, const std::string& preset, int users, int days,
                         int omega, int epochs, std::uint64_t seed,
                         std::vector<EnvChange> env_changes = {},
                         Variant variant = Variant::Compound) {
  OrgSpec org;
  org.user_count = users;
  org.group_count = 4;
  org.first_day = parse_date("2025-01-06");
  org.days = days;
  org.seed = seed;
  org.activity_scale = 0.75;
  org.env_changes = std::move(env_changes);

  // burn-in: omega-1 history days plus D-1 matrix days
  const Date first_scoreable = org.first_day + 2 * (omega - 1);
  const Date test_start = org.first_day + (days * 3) / 4;
  ScenarioSpec scenario;
  scenario.kind = kind;
  scenario.victim = "u" + std::string(users > 100 ? "017" : "011");
  scenario.start_day = test_start + 4;

  auto [events, labels] = inject(generate(org), org, scenario);
  auto by_user = partition_by_user(std::move(events));

  VariantConfig config;
  config.variant = variant;
  config.feature_preset = preset;
  config.deviation.omega = omega;
  config.deviation.matrix_days = omega;
  config.train.epochs = epochs;
  config.train.batch_size = 32;
  config.train_stride = 2;
  // half-of-aspects voting: the desk presets have 3 aspects where the paper
  // ran N=3 over six
  config.critic_n = 2;
  config.test_start = std::max(test_start, first_scoreable + 1);
  config.seed = seed;

  ScenarioRun run;
  run.result = run_variant(by_user, labels, org.group_map(), config);
  run.labels = labels;
  run.victim = scenario.victim;
  return run;
}

void criterion_end_to_end() {
  Criterion c(6, "end-to-end detection on the default org (4 scenarios)", 4 * 600.0);
  const struct {
    Scenario kind;
    const char* preset;
  } cases[] = {
      {Scenario::AfterHoursExfil, "cert"},
      {Scenario::JobSearchThumbDrive, "cert"},
      {Scenario::RansomwareLike, "case"},
      {Scenario::BotnetLike, "case"},
  };
  for (const auto& tc : cases) {
    const auto t0 = std::chrono::steady_clock::now();
    const ScenarioRun run =
        run_scenario(tc.kind, tc.preset, 200, 100, 14, 40, 606 + static_cast<int>(tc.kind));
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const int position = run.result.best_position.count(run.victim)
                             ? run.result.best_position.at(run.victim)
                             : 9999;
    c.check(position <= 3, std::string(scenario_name(tc.kind)) + ": victim best rank " +
                               std::to_string(position) + " (want <= 3)");
    c.check(run.result.best_roc_auc >= 0.95,
            std::string(scenario_name(tc.kind)) + ": best-day ROC AUC " +
                std::to_string(run.result.best_roc_auc) + " (want >= 0.95)");
    c.check(elapsed < 600.0, std::string(scenario_name(tc.kind)) + ": runtime " +
                                 std::to_string(elapsed) + "s exceeds 600s");
    std::printf("      %s: victim rank %d, best-day AUC %.4f [%.1fs]\n",
                scenario_name(tc.kind), position, run.result.best_roc_auc, elapsed);
    std::fflush(stdout);
  }
  c.finish();
}

void criterion_ablation_ordering() {
  Criterion c(7, "ablation ordering (compound > one_day on botnet; fewer env-change alerts "
                 "than no_group)",
              0.0);
  for (int s = 0; s < 5; ++s) {
    const std::uint64_t seed = 7100 + s;

    // (a) multi-day low-signal botnet: compound must strictly beat one_day on
    // the ROC AUC over the post-attack days (sustained detection, not one
    // lucky list)
    const ScenarioRun compound =
        run_scenario(Scenario::BotnetLike, "case", 60, 90, 10, 30, seed);
    const ScenarioRun one_day = run_scenario(Scenario::BotnetLike, "case", 60, 90, 10, 30,
                                             seed, {}, Variant::OneDay);
    c.check(compound.result.mean_roc_auc > one_day.result.mean_roc_auc,
            "seed " + std::to_string(seed) + ": compound AUC " +
                std::to_string(compound.result.mean_roc_auc) + " !> one_day AUC " +
                std::to_string(one_day.result.mean_roc_auc));
    std::printf("      seed %llu: post-attack mean AUC compound %.4f vs one_day %.4f "
                "(best-day %.4f vs %.4f)\n",
                static_cast<unsigned long long>(seed), compound.result.mean_roc_auc,
                one_day.result.mean_roc_auc, compound.result.best_roc_auc,
                one_day.result.best_roc_auc);
    std::fflush(stdout);

    // (b) an environmental change with no attack on that day: count users whose
    // http score exceeds the threshold that flags the victim (the victim's
    // post-attack peak under the same variant)
    OrgSpec org;
    org.user_count = 60;
    org.group_count = 4;
    org.first_day = parse_date("2025-01-06");
    org.days = 90;
    org.seed = seed;
    org.activity_scale = 0.75;
    const Date test_start = org.first_day + (90 * 3) / 4;  // a Friday
    const Date env_day = test_start + 3;                   // a Monday
    // outages also happen during training, so both variants have seen the
    // pattern; the test-window change is the probe
    for (const Date day :
         {org.first_day + 21, org.first_day + 35, org.first_day + 49, org.first_day + 56}) {
      EnvChange change;
      change.day = day;
      change.duration_days = 1 + (day % 2 == 0 ? 1 : 0);
      change.aspect = Aspect::Http;
      change.rate_factor = 1.4;
      change.failure_factor = 5.0;
      change.novelty_factor = 2.5;
      org.env_changes.push_back(change);
    }
    EnvChange probe;
    probe.day = env_day;
    probe.duration_days = 2;
    probe.aspect = Aspect::Http;
    probe.rate_factor = 1.5;
    probe.failure_factor = 6.0;
    probe.novelty_factor = 3.0;
    org.env_changes.push_back(probe);

    ScenarioSpec scenario;
    scenario.kind = Scenario::BotnetLike;
    scenario.victim = "u011";
    scenario.start_day = env_day + 7;  // attack strictly after the env-change days

    auto [events, labels] = inject(generate(org), org, scenario);
    auto by_user = partition_by_user(std::move(events));

    const auto alert_count = [&](Variant variant) {
      VariantConfig config;
      config.variant = variant;
      config.feature_preset = "case";
      config.deviation.omega = 10;
      config.deviation.matrix_days = 10;
      config.train.epochs = 60;
      config.train.batch_size = 32;
      config.train_stride = 1;
      config.critic_n = 2;
      config.test_start = test_start;
      config.seed = seed;
      const VariantResult result = run_variant(by_user, labels, org.group_map(), config);

      const LabelSpan span = labels.abnormal.at(scenario.victim);
      double threshold = 0.0;
      for (const auto& [day, per_user] : result.scores.at("http")) {
        if (day < span.from || day > span.to) continue;
        threshold = std::max(threshold, per_user.at(scenario.victim));
      }
      std::set<std::string> alerted;  // each user counts once
      for (Date day = env_day; day < env_day + probe.duration_days; ++day) {
        for (const auto& [user, score] : result.scores.at("http").at(day)) {
          if (user != scenario.victim && score > threshold) alerted.insert(user);
        }
      }
      return static_cast<int>(alerted.size());
    };

    const int compound_alerts = alert_count(Variant::Compound);
    const int no_group_alerts = alert_count(Variant::NoGroup);
    c.check(compound_alerts < no_group_alerts,
            "seed " + std::to_string(seed) + ": compound alerts " +
                std::to_string(compound_alerts) + " !< no_group alerts " +
                std::to_string(no_group_alerts));
    std::printf("      seed %llu: env-change alerts compound %d vs no_group %d\n",
                static_cast<unsigned long long>(seed), compound_alerts, no_group_alerts);
    std::fflush(stdout);
  }
  c.finish();
}

// ---------------------------------------------------------------- criterion 8

void criterion_auc_exactness() {
  Criterion c(8, "trapezoid AUC equals the pairwise oracle; pessimistic <= optimistic", 0.0);
  Rng rng(90008);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 8 + static_cast<int>(rng.uniform_int(20));
    std::vector<int> priorities(n);
    for (int i = 0; i < n; ++i) priorities[i] = i + 1;
    rng.shuffle(priorities);
    std::vector<LabeledOutcome> outcomes;
    long long positives = 0;
    for (int i = 0; i < n; ++i) {
      const bool label = i < std::max(1, n / 4);
      positives += label;
      outcomes.push_back({"u" + std::to_string(i), label, priorities[i]});
    }
    const Curve curve = curves_and_auc(outcomes, CurveKind::Roc, TieMode::Pessimistic);
    long long wins = 0, pairs = 0;
    for (const auto& a : outcomes) {
      if (!a.abnormal) continue;
      for (const auto& b : outcomes) {
        if (b.abnormal) continue;
        ++pairs;
        if (a.priority < b.priority) ++wins;
      }
    }
    const double oracle = static_cast<double>(wins) / static_cast<double>(pairs);
    c.check(curve.auc == oracle, "AUC differs from the pairwise oracle in trial " +
                                     std::to_string(trial));
  }
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<LabeledOutcome> outcomes;
    bool pos = false, neg = false;
    const int n = 10 + static_cast<int>(rng.uniform_int(10));
    for (int i = 0; i < n; ++i) {
      const bool label = rng.uniform() < 0.4;
      pos |= label;
      neg |= !label;
      outcomes.push_back(
          {"u" + std::to_string(i), label, static_cast<int>(rng.uniform_int(4))});
    }
    if (!pos || !neg) continue;
    const double pess = curves_and_auc(outcomes, CurveKind::Roc, TieMode::Pessimistic).auc;
    const double opt = curves_and_auc(outcomes, CurveKind::Roc, TieMode::Optimistic).auc;
    c.check(pess <= opt, "pessimistic AUC above optimistic in trial " + std::to_string(trial));
  }
  c.finish();
}

// ---------------------------------------------------------------- criterion 9

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) return "<missing:" + path + ">";
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void criterion_determinism() {
  Criterion c(9, "two cmd_repro runs produce byte-identical lists and checkpoints", 0.0);
  const char* cli = std::getenv("UBAD_CLI");
  if (!cli || !*cli) {
    c.check(false, "UBAD_CLI is not set; cannot exercise the binary");
    c.finish();
    return;
  }
  const fs::path base = fs::temp_directory_path() / "ubad_acceptance_repro";
  fs::remove_all(base);
  fs::create_directories(base);

  nlohmann::json j;
  j["seed"] = 4242;
  j["org"] = {{"users", 12}, {"groups", 2}, {"first_day", "2025-01-06"}, {"days", 50}};
  j["scenario"] = {{"kind", "ransomware_like"}, {"victim", "u007"}, {"start_day", "2025-02-18"}};
  j["features"] = {{"preset", "case"}};
  j["deviation"] = {{"omega", 6}, {"days", 6}};
  j["train"] = {{"epochs", 8}, {"stride", 2}};
  j["split"] = {{"test_start", "2025-02-15"}};
  const std::string config_path = (base / "config.json").string();
  {
    std::ofstream out(config_path);
    out << j.dump(2);
  }

  for (const char* run : {"a", "b"}) {
    const std::string cmd = std::string(cli) + " repro --config " + config_path +
                            " --workdir " + (base / run).string() + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    c.check(status != -1 && WEXITSTATUS(status) == 0,
            std::string("repro run ") + run + " exited nonzero");
  }

  for (const std::string rel :
       {std::string("ranks/lists.json"), std::string("ranks/lists.csv"),
        std::string("models/model_file.json"), std::string("models/model_command.json"),
        std::string("models/model_http.json"), std::string("scores/scores.json")}) {
    const std::string a = slurp((base / "a" / rel).string());
    const std::string b = slurp((base / "b" / rel).string());
    c.check(!a.empty() && a == b, rel + " differs between runs");
  }
  fs::remove_all(base);
  c.finish();
}

}  // namespace

int main(int argc, char** argv) {
  std::printf("acceptance suite (%s)\n", kToolVersion);
  std::set<int> wanted;  // optional criterion numbers on the command line
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));
  const auto enabled = [&](int n) { return wanted.empty() || wanted.count(n); };

  if (enabled(1)) criterion_deviation_oracle();
  if (enabled(2)) criterion_weight_exactness();
  if (enabled(3)) criterion_critic_fidelity();
  if (enabled(4)) criterion_gradients();
  if (enabled(5)) criterion_separation();
  if (enabled(6)) criterion_end_to_end();
  if (enabled(7)) criterion_ablation_ordering();
  if (enabled(8)) criterion_auc_exactness();
  if (enabled(9)) criterion_determinism();
  if (g_failures == 0) {
    std::printf("all criteria passed\n");
  } else {
    std::printf("%d criterion(s) failed\n", g_failures);
  }
  return g_failures == 0 ? 0 : 1;
}
