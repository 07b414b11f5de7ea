#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ubad/calendar.hpp"
#include "ubad/events.hpp"
#include "ubad/features.hpp"

namespace ubad {

// Group membership. Every profiled user belongs to exactly one group; the
// group mean includes the profiled user.
struct GroupMap {
  std::map<std::string, std::vector<std::string>> groups;  // group id -> sorted members

  static GroupMap single_group(const std::vector<std::string>& users);
  void validate() const;
  const std::string& group_of(const std::string& user) const;
  const std::vector<std::string>& members_of(const std::string& user) const;
  std::vector<std::string> all_users() const;  // sorted union

  std::string to_json() const;
  static GroupMap from_json(const std::string& text);
};

// Dense per-aspect measurements m[f, t, d] for every user over a contiguous
// day span. Absent (user, day, frame) buckets hold 0: a day without events is
// a zero-activity day, not a gap.
class MeasurementStore {
 public:
  MeasurementStore() = default;
  MeasurementStore(Aspect aspect, std::vector<std::string> features, int frames,
                   Date first_day, Date last_day);

  Aspect aspect() const { return aspect_; }
  const std::vector<std::string>& features() const { return features_; }
  int feature_count() const { return static_cast<int>(features_.size()); }
  int frames() const { return frames_; }
  Date first_day() const { return first_day_; }
  Date last_day() const { return last_day_; }
  int day_count() const { return static_cast<int>(last_day_ - first_day_ + 1); }

  bool has_user(const std::string& user) const { return users_.count(user) != 0; }
  std::vector<std::string> user_ids() const;
  void add_user(const std::string& user);  // zero-filled

  double at(const std::string& user, int feature, int frame, Date day) const;
  void set(const std::string& user, int feature, int frame, Date day, double value);
  std::vector<double>& mutable_series(const std::string& user);

  // Contiguous day series for one (user, feature, frame), oldest first.
  std::span<const double> day_series(const std::string& user, int feature, int frame) const;

  // Day-by-day mean of the members' series (group behavior series).
  std::vector<double> group_day_series(std::span<const std::string> members, int feature,
                                       int frame) const;

  void save(const std::string& path) const;
  static MeasurementStore load(const std::string& path);

 private:
  std::size_t index(int feature, int frame, Date day) const;
  const std::vector<double>& series_of(const std::string& user) const;

  Aspect aspect_ = Aspect::Device;
  std::vector<std::string> features_;
  int frames_ = 0;
  Date first_day_ = 0;
  Date last_day_ = -1;
  std::map<std::string, std::vector<double>> users_;  // fixed layout, see index()
};

struct ExtractOptions {
  std::optional<Date> first_day;  // default: span observed in the events
  std::optional<Date> last_day;
  std::vector<std::string> roster;  // users to include even with zero events
  unsigned threads = 0;             // 0: hardware concurrency
};

// Runs the per-user day pipeline: bucket by (day, frame), extract features
// per frame, then advance novelty once per day. Users are independent and
// processed concurrently; days within one user stay sequential.
MeasurementStore extract_store(const std::map<std::string, std::vector<AuditEvent>>& by_user,
                               const FeatureSet& set, const FrameConfig& frames,
                               const ExtractOptions& options = {});

}  // namespace ubad
