#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "ubad/store.hpp"

namespace ubad {

struct DeviationParams {
  int omega = 30;          // history window size in days; each history holds omega-1 values
  double delta_cap = 3.0;  // clamp bound for sigma
  double eps = 0.01;       // std floor
  bool weighting = true;
  int matrix_days = 0;     // D, the day span of one matrix; 0 means "same as omega"

  int days() const { return matrix_days > 0 ? matrix_days : omega; }
  void validate() const;
};

double population_std(std::span<const double> values);
double mean_of(std::span<const double> values);

// sigma = clamp((m - mean(history)) / max(std(history), eps), -delta, +delta).
// The history must hold exactly omega-1 values (callers respect burn-in).
double compute_sigma(double measurement, std::span<const double> history,
                     const DeviationParams& params);

// weight = 1 / log2(max(std(history), 2)); 1 for calm features, smaller for
// chaotic ones, always in (0, 1].
double compute_weight(std::span<const double> history);

// Arithmetic mean over the group members' measurements for one cell.
double group_measurement(std::span<const double> member_values);

// Per-user deviation matrix over D days: an individual block and a group
// block, each F x T x D. Entries are stored as raw sigma plus weight; the
// value fed to the model is weight * sigma.
struct CompoundMatrix {
  std::string user_id;
  Date end_day = 0;
  int features = 0;
  int frames = 0;
  int days = 0;
  std::vector<std::string> feature_names;
  std::vector<double> user_sigma, user_weight;    // index: (f * T + t) * D + k
  std::vector<double> group_sigma, group_weight;  // k = 0 oldest ... D-1 = end_day

  std::size_t cells() const {
    return static_cast<std::size_t>(features) * frames * days;
  }
  std::size_t cell_index(int feature, int frame, int day_offset) const;
  double weighted_user(std::size_t i) const { return user_sigma[i] * user_weight[i]; }
  double weighted_group(std::size_t i) const { return group_sigma[i] * group_weight[i]; }
};

// Builds one user's matrix for the window ending at end_day. The group block
// deviates the day-by-day group-mean series against its own sliding history.
// Throws UsageError when the window (including histories) reaches outside the
// store's day span.
CompoundMatrix build_matrix(const std::string& user_id, Date end_day,
                            const MeasurementStore& store,
                            std::span<const std::string> group_members,
                            const DeviationParams& params);

struct FlatVector {
  std::vector<double> values;  // each in [0, 1]
  std::size_t dim() const { return values.size(); }
};

// Affine map of the weighted entries from [-delta, delta] to [0, 1], user
// block first, feature-major then frame then day within each block.
FlatVector flatten_normalize(const CompoundMatrix& matrix, const DeviationParams& params);

// Inverse of flatten_normalize at the weighted-value level: user block then
// group block, same ordering.
std::vector<double> unflatten(const FlatVector& flat, const DeviationParams& params);

// First end day for which a full matrix (all histories warmed) exists.
Date min_end_day(const MeasurementStore& store, const DeviationParams& params);

// Bulk construction: sigma/weight series are computed once per (user, group)
// and sliced per end day, which matches build_matrix cell for cell. Holds
// references; the store and group map must outlive the builder.
class MatrixBuilder {
 public:
  MatrixBuilder(const MeasurementStore& store, const GroupMap& groups,
                const DeviationParams& params);
  MatrixBuilder(MeasurementStore&&, const GroupMap&, const DeviationParams&) = delete;
  MatrixBuilder(const MeasurementStore&, GroupMap&&, const DeviationParams&) = delete;
  MatrixBuilder(MeasurementStore&&, GroupMap&&, const DeviationParams&) = delete;

  CompoundMatrix matrix(const std::string& user, Date end_day) const;
  FlatVector flat(const std::string& user, Date end_day) const;
  Date min_end_day() const;
  const DeviationParams& params() const { return params_; }

 private:
  struct Series {
    std::vector<double> sigma, weight;  // (f * T + t) * valid_days + i
  };
  const Series& user_series(const std::string& user) const;
  const Series& group_series(const std::string& user) const;
  Series build_series(const std::vector<std::span<const double>>& day_series) const;

  const MeasurementStore& store_;
  const GroupMap& groups_;
  DeviationParams params_;
  Date warm_day_;  // first day with a computable sigma
  mutable std::map<std::string, Series> user_cache_;
  mutable std::map<std::string, Series> group_cache_;
  mutable std::map<std::string, std::vector<double>> group_mean_cache_;
};

// One row per cell: user, day, frame, feature, block, sigma, weight.
std::string matrix_to_csv(const CompoundMatrix& matrix, const FrameConfig& frames);
void write_matrix_csv(const std::string& path, const CompoundMatrix& matrix,
                      const FrameConfig& frames);

}  // namespace ubad
