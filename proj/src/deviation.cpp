#include "ubad/deviation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "ubad/errors.hpp"

namespace ubad {

void DeviationParams::validate() const {
  if (omega < 2) throw ConfigError("omega must be >= 2");
  if (delta_cap <= 0) throw ConfigError("delta_cap must be > 0");
  if (eps <= 0) throw ConfigError("eps must be > 0");
  if (matrix_days < 0) throw ConfigError("matrix_days must be >= 0");
}

double mean_of(std::span<const double> values) {
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

double population_std(std::span<const double> values) {
  const double mu = mean_of(values);
  double acc = 0.0;
  for (double v : values) acc += (v - mu) * (v - mu);
  return std::sqrt(acc / static_cast<double>(values.size()));
}

double compute_sigma(double measurement, std::span<const double> history,
                     const DeviationParams& params) {
  params.validate();
  if (history.size() != static_cast<std::size_t>(params.omega - 1)) {
    throw UsageError("history is not warmed: expected " + std::to_string(params.omega - 1) +
                     " values, got " + std::to_string(history.size()));
  }
  const double floored_std = std::max(population_std(history), params.eps);
  const double delta = (measurement - mean_of(history)) / floored_std;
  return std::clamp(delta, -params.delta_cap, params.delta_cap);
}

double compute_weight(std::span<const double> history) {
  if (history.empty()) throw UsageError("weight over empty history");
  return 1.0 / std::log2(std::max(population_std(history), 2.0));
}

double group_measurement(std::span<const double> member_values) {
  if (member_values.empty()) throw ConfigError("group measurement over an empty group");
  return mean_of(member_values);
}

std::size_t CompoundMatrix::cell_index(int feature, int frame, int day_offset) const {
  return (static_cast<std::size_t>(feature) * frames + frame) * days + day_offset;
}

namespace {

// Fills sigma/weight for the D days ending at end_day from one day series
// covering the store span starting at series_first.
void fill_block(std::span<const double> series, Date series_first, Date end_day,
                const DeviationParams& params, int feature, int frame,
                CompoundMatrix& matrix, std::vector<double>& sigma_out,
                std::vector<double>& weight_out) {
  const int D = params.days();
  for (int k = 0; k < D; ++k) {
    const Date day = end_day - D + 1 + k;
    const std::size_t offset = static_cast<std::size_t>(day - series_first);
    const auto history = series.subspan(offset - (params.omega - 1),
                                        static_cast<std::size_t>(params.omega - 1));
    const std::size_t i = matrix.cell_index(feature, frame, k);
    sigma_out[i] = compute_sigma(series[offset], history, params);
    weight_out[i] = params.weighting ? compute_weight(history) : 1.0;
  }
}

}  // namespace

Date min_end_day(const MeasurementStore& store, const DeviationParams& params) {
  params.validate();
  return store.first_day() + (params.omega - 1) + (params.days() - 1);
}

CompoundMatrix build_matrix(const std::string& user_id, Date end_day,
                            const MeasurementStore& store,
                            std::span<const std::string> group_members,
                            const DeviationParams& params) {
  params.validate();
  if (group_members.empty()) throw ConfigError("matrix for user in an empty group");
  const int D = params.days();
  const Date earliest_needed = end_day - D + 1 - (params.omega - 1);
  if (earliest_needed < store.first_day() || end_day > store.last_day()) {
    throw UsageError("window ending " + format_date(end_day) + " needs days back to " +
                     format_date(earliest_needed) + " but the store covers [" +
                     format_date(store.first_day()) + ", " + format_date(store.last_day()) +
                     "]; fill or trim the span first");
  }

  CompoundMatrix matrix;
  matrix.user_id = user_id;
  matrix.end_day = end_day;
  matrix.features = store.feature_count();
  matrix.frames = store.frames();
  matrix.days = D;
  matrix.feature_names = store.features();
  matrix.user_sigma.assign(matrix.cells(), 0.0);
  matrix.user_weight.assign(matrix.cells(), 0.0);
  matrix.group_sigma.assign(matrix.cells(), 0.0);
  matrix.group_weight.assign(matrix.cells(), 0.0);

  for (int f = 0; f < matrix.features; ++f) {
    for (int t = 0; t < matrix.frames; ++t) {
      fill_block(store.day_series(user_id, f, t), store.first_day(), end_day, params, f, t,
                 matrix, matrix.user_sigma, matrix.user_weight);
      const auto group = store.group_day_series(group_members, f, t);
      fill_block(group, store.first_day(), end_day, params, f, t, matrix, matrix.group_sigma,
                 matrix.group_weight);
    }
  }
  return matrix;
}

FlatVector flatten_normalize(const CompoundMatrix& matrix, const DeviationParams& params) {
  const double delta = params.delta_cap;
  FlatVector flat;
  flat.values.reserve(matrix.cells() * 2);
  for (std::size_t i = 0; i < matrix.cells(); ++i) {
    flat.values.push_back((matrix.weighted_user(i) + delta) / (2.0 * delta));
  }
  for (std::size_t i = 0; i < matrix.cells(); ++i) {
    flat.values.push_back((matrix.weighted_group(i) + delta) / (2.0 * delta));
  }
  return flat;
}

std::vector<double> unflatten(const FlatVector& flat, const DeviationParams& params) {
  const double delta = params.delta_cap;
  std::vector<double> out;
  out.reserve(flat.values.size());
  for (double v : flat.values) out.push_back(v * 2.0 * delta - delta);
  return out;
}

MatrixBuilder::MatrixBuilder(const MeasurementStore& store, const GroupMap& groups,
                             const DeviationParams& params)
    : store_(store), groups_(groups), params_(params) {
  params_.validate();
  groups_.validate();
  warm_day_ = store_.first_day() + (params_.omega - 1);
}

Date MatrixBuilder::min_end_day() const { return warm_day_ + (params_.days() - 1); }

MatrixBuilder::Series MatrixBuilder::build_series(
    const std::vector<std::span<const double>>& day_series) const {
  const int valid = static_cast<int>(store_.day_count()) - (params_.omega - 1);
  if (valid < 1) {
    throw UsageError("store spans fewer days than the history window omega");
  }
  Series series;
  series.sigma.assign(day_series.size() * static_cast<std::size_t>(valid), 0.0);
  series.weight.assign(series.sigma.size(), 0.0);
  const std::size_t hist = static_cast<std::size_t>(params_.omega - 1);
  for (std::size_t ft = 0; ft < day_series.size(); ++ft) {
    const auto& days = day_series[ft];
    for (int i = 0; i < valid; ++i) {
      const auto history = days.subspan(static_cast<std::size_t>(i), hist);
      const std::size_t out = ft * static_cast<std::size_t>(valid) + i;
      series.sigma[out] = compute_sigma(days[i + hist], history, params_);
      series.weight[out] = params_.weighting ? compute_weight(history) : 1.0;
    }
  }
  return series;
}

const MatrixBuilder::Series& MatrixBuilder::user_series(const std::string& user) const {
  auto it = user_cache_.find(user);
  if (it != user_cache_.end()) return it->second;
  std::vector<std::span<const double>> day_series;
  for (int f = 0; f < store_.feature_count(); ++f) {
    for (int t = 0; t < store_.frames(); ++t) day_series.push_back(store_.day_series(user, f, t));
  }
  return user_cache_.emplace(user, build_series(day_series)).first->second;
}

const MatrixBuilder::Series& MatrixBuilder::group_series(const std::string& user) const {
  const std::string& group = groups_.group_of(user);
  auto it = group_cache_.find(group);
  if (it != group_cache_.end()) return it->second;

  const auto& members = groups_.groups.at(group);
  auto& mean_storage = group_mean_cache_[group];
  const std::size_t per_ft = static_cast<std::size_t>(store_.day_count());
  mean_storage.clear();
  std::vector<std::span<const double>> day_series;
  mean_storage.reserve(per_ft * store_.feature_count() * store_.frames());
  for (int f = 0; f < store_.feature_count(); ++f) {
    for (int t = 0; t < store_.frames(); ++t) {
      const auto mean = store_.group_day_series(members, f, t);
      mean_storage.insert(mean_storage.end(), mean.begin(), mean.end());
    }
  }
  for (std::size_t ft = 0; ft < static_cast<std::size_t>(store_.feature_count()) * store_.frames();
       ++ft) {
    day_series.emplace_back(mean_storage.data() + ft * per_ft, per_ft);
  }
  return group_cache_.emplace(group, build_series(day_series)).first->second;
}

CompoundMatrix MatrixBuilder::matrix(const std::string& user, Date end_day) const {
  if (end_day < min_end_day() || end_day > store_.last_day()) {
    throw UsageError("matrix end day " + format_date(end_day) + " outside computable range [" +
                     format_date(min_end_day()) + ", " + format_date(store_.last_day()) + "]");
  }
  const Series& mine = user_series(user);
  const Series& group = group_series(user);

  CompoundMatrix matrix;
  matrix.user_id = user;
  matrix.end_day = end_day;
  matrix.features = store_.feature_count();
  matrix.frames = store_.frames();
  matrix.days = params_.days();
  matrix.feature_names = store_.features();
  matrix.user_sigma.assign(matrix.cells(), 0.0);
  matrix.user_weight.assign(matrix.cells(), 0.0);
  matrix.group_sigma.assign(matrix.cells(), 0.0);
  matrix.group_weight.assign(matrix.cells(), 0.0);

  const int valid = static_cast<int>(store_.day_count()) - (params_.omega - 1);
  const int D = params_.days();
  for (int f = 0; f < matrix.features; ++f) {
    for (int t = 0; t < matrix.frames; ++t) {
      const std::size_t ft = static_cast<std::size_t>(f) * matrix.frames + t;
      for (int k = 0; k < D; ++k) {
        const Date day = end_day - D + 1 + k;
        const std::size_t src = ft * static_cast<std::size_t>(valid) + (day - warm_day_);
        const std::size_t dst = matrix.cell_index(f, t, k);
        matrix.user_sigma[dst] = mine.sigma[src];
        matrix.user_weight[dst] = mine.weight[src];
        matrix.group_sigma[dst] = group.sigma[src];
        matrix.group_weight[dst] = group.weight[src];
      }
    }
  }
  return matrix;
}

FlatVector MatrixBuilder::flat(const std::string& user, Date end_day) const {
  return flatten_normalize(matrix(user, end_day), params_);
}

std::string matrix_to_csv(const CompoundMatrix& matrix, const FrameConfig& frames) {
  std::ostringstream out;
  out << "user,day,frame,feature,block,sigma,weight\n";
  const auto emit = [&](const char* block, const std::vector<double>& sigma,
                        const std::vector<double>& weight) {
    for (int f = 0; f < matrix.features; ++f) {
      for (int t = 0; t < matrix.frames; ++t) {
        for (int k = 0; k < matrix.days; ++k) {
          const std::size_t i = matrix.cell_index(f, t, k);
          out << matrix.user_id << ',' << format_date(matrix.end_day - matrix.days + 1 + k)
              << ',' << frames.labels[t] << ',' << matrix.feature_names[f] << ',' << block
              << ',' << sigma[i] << ',' << weight[i] << '\n';
        }
      }
    }
  };
  emit("user", matrix.user_sigma, matrix.user_weight);
  emit("group", matrix.group_sigma, matrix.group_weight);
  return out.str();
}

void write_matrix_csv(const std::string& path, const CompoundMatrix& matrix,
                      const FrameConfig& frames) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open for writing: " + path);
  out << matrix_to_csv(matrix, frames);
}

}  // namespace ubad
