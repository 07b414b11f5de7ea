#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "ubad/deviation.hpp"
#include "ubad/errors.hpp"
#include "ubad/rng.hpp"

using namespace ubad;

namespace {

// Literal transcription of the deviation equations, kept independent of the
// library path on purpose.
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

DeviationParams params_with(int omega, double delta = 3.0, double eps = 0.01, int days = 0) {
  DeviationParams p;
  p.omega = omega;
  p.delta_cap = delta;
  p.eps = eps;
  p.matrix_days = days;
  return p;
}

MeasurementStore single_feature_store(const std::map<std::string, std::vector<double>>& series,
                                      Date first_day) {
  Date last = first_day;
  for (const auto& [user, values] : series) {
    last = first_day + static_cast<Date>(values.size()) - 1;
  }
  MeasurementStore store(Aspect::Device, {"f"}, 1, first_day, last);
  for (const auto& [user, values] : series) {
    for (std::size_t i = 0; i < values.size(); ++i) {
      store.set(user, 0, 0, first_day + static_cast<Date>(i), values[i]);
    }
  }
  return store;
}

}  // namespace

TEST_CASE("sigma equals zero when the measurement matches the mean") {
  const std::vector<double> h{5, 5, 5, 5};
  CHECK(compute_sigma(5.0, h, params_with(5)) == 0.0);
}

TEST_CASE("sigma clamps when the floored std explodes the z-score") {
  const std::vector<double> h{5, 5, 5, 5};
  // std floored to eps=0.01, delta = 1500, clamped to 3
  CHECK(compute_sigma(20.0, h, params_with(5)) == 3.0);
  CHECK(compute_sigma(-20.0, h, params_with(5)) == -3.0);
}

TEST_CASE("sigma on 1..5 history matches 3/sqrt(2)") {
  const std::vector<double> h{1, 2, 3, 4, 5};
  const double expected = 3.0 / std::sqrt(2.0);  // population std of h is sqrt(2)
  CHECK(compute_sigma(6.0, h, params_with(6)) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("unwarmed history is a usage error") {
  const std::vector<double> h{1, 2, 3};
  CHECK_THROWS_AS(compute_sigma(1.0, h, params_with(6)), UsageError);
}

TEST_CASE("weight floors the std at two and is exact on the worked values") {
  // pop-std of {0, 2x} is x
  CHECK(compute_weight(std::vector<double>{0.0, 2.6}) == 1.0);     // std 1.3 -> 1
  CHECK(compute_weight(std::vector<double>{0.0, 16.0}) == 1.0 / 3.0);   // std 8
  CHECK(compute_weight(std::vector<double>{0.0, 2048.0}) == 0.1);  // std 1024
}

TEST_CASE("weight bounds and monotonicity") {
  Rng rng(11);
  double prev = 1.0;
  for (double sd = 0.5; sd < 5000.0; sd *= 1.7) {
    const double w = compute_weight(std::vector<double>{0.0, 2.0 * sd});
    CHECK(w > 0.0);
    CHECK(w <= 1.0);
    CHECK(w <= prev + 1e-15);  // non-increasing in std
    if (sd <= 2.0) CHECK(w == 1.0);
    prev = w;
  }
}

TEST_CASE("1000 randomized sigma/weight cases match the independent oracle") {
  Rng rng(2024);
  for (int i = 0; i < 1000; ++i) {
    const int omega = 2 + static_cast<int>(rng.uniform_int(39));
    std::vector<double> h(omega - 1);
    const bool constant = rng.uniform() < 0.1;
    const double base = rng.uniform(0.0, 50.0);
    for (auto& v : h) v = constant ? base : rng.uniform(0.0, 50.0);
    const double m = rng.uniform(-10.0, 60.0);

    const DeviationParams p = params_with(omega);
    const double sigma = compute_sigma(m, h, p);
    const double expected = oracle_sigma(m, h, p.eps, p.delta_cap);
    CHECK(std::abs(sigma - expected) <=
          1e-9 * std::max({1.0, std::abs(sigma), std::abs(expected)}));
    CHECK(std::abs(sigma) <= p.delta_cap);

    const double w = compute_weight(h);
    const double w_expected = oracle_weight(h);
    CHECK(std::abs(w - w_expected) <= 1e-9 * std::max(1.0, std::abs(w_expected)));
  }
}

TEST_CASE("std floor engages exactly below eps") {
  // Histories with tiny but nonzero spread still hit the floor.
  const std::vector<double> h{1.0, 1.0, 1.0, 1.000001};
  const DeviationParams p = params_with(5);
  const double sigma = compute_sigma(2.0, h, p);
  // no-floor oracle divides by eps directly since pop std << eps
  const double mean = (3.0 + 1.000001) / 4.0;
  const double expected = std::min(3.0, (2.0 - mean) / p.eps);
  CHECK(sigma == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("group measurement is the arithmetic mean") {
  CHECK(group_measurement(std::vector<double>{4.0}) == 4.0);
  CHECK(group_measurement(std::vector<double>{0.0, 10.0}) == 5.0);
  CHECK_THROWS_AS(group_measurement(std::vector<double>{}), ConfigError);

  Rng rng(5);
  std::vector<double> values(114);
  double sum = 0.0;
  for (auto& v : values) {
    v = rng.uniform(-100.0, 100.0);
    sum += v;
  }
  CHECK(group_measurement(values) ==
        doctest::Approx(sum / static_cast<double>(values.size())).epsilon(1e-12));
}

TEST_CASE("constant measurements build an all-zero user block") {
  const Date d0 = parse_date("2025-01-01");
  const MeasurementStore store =
      single_feature_store({{"u", {7, 7, 7, 7, 7, 7, 7, 7}}}, d0);
  const std::vector<std::string> group{"u"};
  const auto matrix = build_matrix("u", d0 + 7, store, group, params_with(3, 3.0, 0.01, 2));
  for (double v : matrix.user_sigma) CHECK(v == 0.0);
}

TEST_CASE("a singleton group's block equals the user block") {
  const Date d0 = parse_date("2025-01-01");
  const MeasurementStore store =
      single_feature_store({{"u", {1, 5, 2, 8, 3, 9, 4, 11}}}, d0);
  const std::vector<std::string> group{"u"};
  const auto matrix = build_matrix("u", d0 + 7, store, group, params_with(3, 3.0, 0.01, 3));
  CHECK(matrix.user_sigma == matrix.group_sigma);
  CHECK(matrix.user_weight == matrix.group_weight);
}

TEST_CASE("hand-built two-user fixture matches the brute-force recomputation") {
  const Date d0 = parse_date("2025-01-01");
  const std::vector<double> a{1, 2, 4, 8, 16};
  const std::vector<double> b{2, 0, 6, 2, 4};
  const MeasurementStore store = single_feature_store({{"a", a}, {"b", b}}, d0);
  const std::vector<std::string> group{"a", "b"};
  const DeviationParams p = params_with(3, 3.0, 0.01, 2);

  const auto matrix = build_matrix("a", d0 + 4, store, group, p);
  REQUIRE(matrix.days == 2);
  REQUIRE(matrix.cells() == 2);

  // Spreadsheet-style recomputation from the raw series.
  std::vector<double> mean(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) mean[i] = (a[i] + b[i]) / 2.0;
  for (int k = 0; k < 2; ++k) {
    const std::size_t day = 3 + k;
    const std::vector<double> ha{a[day - 2], a[day - 1]};
    const std::vector<double> hg{mean[day - 2], mean[day - 1]};
    CHECK(matrix.user_sigma[k] ==
          doctest::Approx(oracle_sigma(a[day], ha, p.eps, p.delta_cap)).epsilon(1e-12));
    CHECK(matrix.user_weight[k] == doctest::Approx(oracle_weight(ha)).epsilon(1e-12));
    CHECK(matrix.group_sigma[k] ==
          doctest::Approx(oracle_sigma(mean[day], hg, p.eps, p.delta_cap)).epsilon(1e-12));
    CHECK(matrix.group_weight[k] == doctest::Approx(oracle_weight(hg)).epsilon(1e-12));
  }

  // Spot-check the clamp and the epsilon-floored group cell by hand:
  // user day 3: history [2,4] -> mean 3, std 1, delta 5 -> clamped to 3.
  CHECK(matrix.user_sigma[0] == 3.0);
  // group day 4: history [5,5] -> std 0 -> eps floor, delta 500 -> clamped.
  CHECK(matrix.group_sigma[1] == 3.0);
}

TEST_CASE("window reaching outside the store span is an error") {
  const Date d0 = parse_date("2025-01-01");
  const MeasurementStore store = single_feature_store({{"u", {1, 2, 3, 4, 5}}}, d0);
  const std::vector<std::string> group{"u"};
  CHECK_THROWS_AS(build_matrix("u", d0 + 2, store, group, params_with(3, 3.0, 0.01, 2)),
                  UsageError);
  CHECK_THROWS_AS(build_matrix("u", d0 + 9, store, group, params_with(3, 3.0, 0.01, 2)),
                  UsageError);
}

TEST_CASE("group order does not change the group block") {
  const Date d0 = parse_date("2025-01-01");
  Rng rng(3);
  std::map<std::string, std::vector<double>> series;
  for (const char* u : {"a", "b", "c", "d"}) {
    std::vector<double> values(10);
    for (auto& v : values) v = rng.uniform(0.0, 20.0);
    series[u] = values;
  }
  const MeasurementStore store = single_feature_store(series, d0);
  const DeviationParams p = params_with(4, 3.0, 0.01, 3);
  std::vector<std::string> group{"a", "b", "c", "d"};
  const auto base = build_matrix("a", d0 + 9, store, group, p);
  std::vector<std::string> permuted{"d", "b", "a", "c"};
  const auto again = build_matrix("a", d0 + 9, store, permuted, p);
  CHECK(base.group_sigma == again.group_sigma);
  CHECK(base.group_weight == again.group_weight);
}

TEST_CASE("a one-day spike decays out of matrices after omega plus D days") {
  const Date d0 = parse_date("2025-01-01");
  const int total = 30, spike_index = 10, omega = 4, days = 3;
  std::vector<double> flat(total, 5.0), spiked(total, 5.0);
  spiked[spike_index] = 50.0;
  const MeasurementStore store_flat = single_feature_store({{"u", flat}}, d0);
  const MeasurementStore store_spiked = single_feature_store({{"u", spiked}}, d0);
  const DeviationParams p = params_with(omega, 3.0, 0.01, days);
  const std::vector<std::string> group{"u"};

  const Date first_end = min_end_day(store_flat, p);
  const Date cutoff = d0 + spike_index + omega + days - 1;
  bool saw_difference = false;
  for (Date end = first_end; end < d0 + total; ++end) {
    const auto m1 = build_matrix("u", end, store_flat, group, p);
    const auto m2 = build_matrix("u", end, store_spiked, group, p);
    if (end >= cutoff) {
      CHECK(m1.user_sigma == m2.user_sigma);
      CHECK(m1.user_weight == m2.user_weight);
    } else if (m1.user_sigma != m2.user_sigma) {
      saw_difference = true;
    }
  }
  CHECK(saw_difference);

  // cell-level: sigma for days spike+omega or later is untouched
  const auto late = build_matrix("u", d0 + spike_index + omega + days - 1, store_spiked, group, p);
  for (double v : late.user_sigma) CHECK(v == 0.0);
}

TEST_CASE("MatrixBuilder matches build_matrix cell for cell") {
  const Date d0 = parse_date("2025-01-01");
  Rng rng(17);
  std::map<std::string, std::vector<double>> series;
  for (const char* u : {"a", "b", "c"}) {
    std::vector<double> values(14);
    for (auto& v : values) v = std::floor(rng.uniform(0.0, 12.0));
    series[u] = values;
  }
  MeasurementStore store(Aspect::Http, {"f1", "f2"}, 2, d0, d0 + 6);
  // reuse the series to fill 2 features x 2 frames
  for (const auto& [user, values] : series) {
    for (int f = 0; f < 2; ++f) {
      for (int t = 0; t < 2; ++t) {
        for (int d = 0; d < 7; ++d) {
          store.set(user, f, t, d0 + d, values[(f * 2 + t + d) % values.size()]);
        }
      }
    }
  }
  GroupMap groups;
  groups.groups["g"] = {"a", "b", "c"};
  const DeviationParams p = params_with(3, 3.0, 0.01, 2);
  const MatrixBuilder builder(store, groups, p);
  for (Date end = builder.min_end_day(); end <= store.last_day(); ++end) {
    for (const char* u : {"a", "b", "c"}) {
      const auto direct = build_matrix(u, end, store, groups.groups["g"], p);
      const auto bulk = builder.matrix(u, end);
      CHECK(direct.user_sigma == bulk.user_sigma);
      CHECK(direct.user_weight == bulk.user_weight);
      CHECK(direct.group_sigma == bulk.group_sigma);
      CHECK(direct.group_weight == bulk.group_weight);
    }
  }
}

TEST_CASE("flatten maps the clamp interval onto the unit interval") {
  CompoundMatrix m;
  m.features = 1;
  m.frames = 1;
  m.days = 3;
  m.feature_names = {"f"};
  m.user_sigma = {-3.0, 0.0, 3.0};
  m.user_weight = {1.0, 1.0, 1.0};
  m.group_sigma = {1.5, -1.5, 0.0};
  m.group_weight = {1.0, 1.0, 0.5};
  DeviationParams p = params_with(5);

  const FlatVector flat = flatten_normalize(m, p);
  REQUIRE(flat.dim() == 6);
  CHECK(flat.values[0] == 0.0);
  CHECK(flat.values[1] == 0.5);
  CHECK(flat.values[2] == 1.0);
  CHECK(flat.values[3] == doctest::Approx(0.75));
  CHECK(flat.values[4] == doctest::Approx(0.25));
  CHECK(flat.values[5] == 0.5);

  const auto back = unflatten(flat, p);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(back[i] == doctest::Approx(m.weighted_user(i)).epsilon(1e-12));
    CHECK(back[3 + i] == doctest::Approx(m.weighted_group(i)).epsilon(1e-12));
  }
}

TEST_CASE("random matrices flatten into [0,1] with dimension 2FTD") {
  Rng rng(23);
  CompoundMatrix m;
  m.features = 3;
  m.frames = 2;
  m.days = 4;
  m.feature_names = {"a", "b", "c"};
  const std::size_t cells = m.cells();
  for (std::size_t i = 0; i < cells; ++i) {
    m.user_sigma.push_back(rng.uniform(-3.0, 3.0));
    m.user_weight.push_back(rng.uniform(0.1, 1.0));
    m.group_sigma.push_back(rng.uniform(-3.0, 3.0));
    m.group_weight.push_back(rng.uniform(0.1, 1.0));
  }
  const FlatVector flat = flatten_normalize(m, params_with(5));
  CHECK(flat.dim() == 2 * 3 * 2 * 4);
  for (double v : flat.values) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("matrix csv export carries one row per cell and block") {
  const Date d0 = parse_date("2025-01-01");
  const MeasurementStore store = single_feature_store({{"u", {1, 2, 3, 4, 5, 6}}}, d0);
  const auto matrix =
      build_matrix("u", d0 + 5, store, std::vector<std::string>{"u"}, params_with(3, 3, 0.01, 2));
  const std::string csv = matrix_to_csv(matrix, FrameConfig{{0}, {"day"}});
  // header + 2 cells x 2 blocks
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
  CHECK(csv.find("user,day,frame,feature,block,sigma,weight") == 0);
  CHECK(csv.find(",group,") != std::string::npos);
}
