#include "ubad/store.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <limits>
#include <thread>

#include "json.hpp"
#include "ubad/errors.hpp"

namespace ubad {

using nlohmann::json;

GroupMap GroupMap::single_group(const std::vector<std::string>& users) {
  GroupMap map;
  auto sorted = users;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  map.groups["all"] = std::move(sorted);
  return map;
}

void GroupMap::validate() const {
  if (groups.empty()) throw ConfigError("group map has no groups");
  std::set<std::string> seen;
  for (const auto& [id, members] : groups) {
    if (members.empty()) throw ConfigError("group '" + id + "' is empty");
    for (const auto& u : members) {
      if (!seen.insert(u).second) {
        throw ConfigError("user '" + u + "' appears in more than one group");
      }
    }
    if (!std::is_sorted(members.begin(), members.end())) {
      throw ConfigError("group '" + id + "' members are not sorted");
    }
  }
}

const std::string& GroupMap::group_of(const std::string& user) const {
  for (const auto& [id, members] : groups) {
    if (std::binary_search(members.begin(), members.end(), user)) return id;
  }
  throw ConfigError("user '" + user + "' is not in any group");
}

const std::vector<std::string>& GroupMap::members_of(const std::string& user) const {
  return groups.at(group_of(user));
}

std::vector<std::string> GroupMap::all_users() const {
  std::vector<std::string> out;
  for (const auto& [id, members] : groups) out.insert(out.end(), members.begin(), members.end());
  std::sort(out.begin(), out.end());
  return out;
}

std::string GroupMap::to_json() const {
  json j;
  j["kind"] = "ubad-groups";
  json g = json::object();
  for (const auto& [id, members] : groups) g[id] = members;
  j["groups"] = std::move(g);
  return j.dump(2);
}

GroupMap GroupMap::from_json(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded() || j.value("kind", "") != "ubad-groups") {
    throw FormatError("not a group map");
  }
  GroupMap map;
  for (const auto& [id, members] : j.at("groups").items()) {
    auto list = members.get<std::vector<std::string>>();
    std::sort(list.begin(), list.end());
    map.groups[id] = std::move(list);
  }
  map.validate();
  return map;
}

MeasurementStore::MeasurementStore(Aspect aspect, std::vector<std::string> features, int frames,
                                   Date first_day, Date last_day)
    : aspect_(aspect),
      features_(std::move(features)),
      frames_(frames),
      first_day_(first_day),
      last_day_(last_day) {
  if (frames_ < 1) throw ConfigError("measurement store needs at least one frame");
  if (last_day_ < first_day_) throw ConfigError("measurement store day span is empty");
  if (features_.empty()) throw ConfigError("measurement store needs at least one feature");
}

std::vector<std::string> MeasurementStore::user_ids() const {
  std::vector<std::string> out;
  out.reserve(users_.size());
  for (const auto& [user, _] : users_) out.push_back(user);
  return out;
}

void MeasurementStore::add_user(const std::string& user) {
  users_.try_emplace(user,
                     std::vector<double>(features_.size() * frames_ * day_count(), 0.0));
}

std::size_t MeasurementStore::index(int feature, int frame, Date day) const {
  if (feature < 0 || feature >= feature_count() || frame < 0 || frame >= frames_) {
    throw UsageError("measurement index out of range");
  }
  if (day < first_day_ || day > last_day_) {
    throw UsageError("day " + format_date(day) + " outside store span [" +
                     format_date(first_day_) + ", " + format_date(last_day_) + "]");
  }
  const std::size_t days = static_cast<std::size_t>(day_count());
  return (static_cast<std::size_t>(feature) * frames_ + frame) * days +
         static_cast<std::size_t>(day - first_day_);
}

const std::vector<double>& MeasurementStore::series_of(const std::string& user) const {
  auto it = users_.find(user);
  if (it == users_.end()) throw UsageError("unknown user: '" + user + "'");
  return it->second;
}

double MeasurementStore::at(const std::string& user, int feature, int frame, Date day) const {
  return series_of(user)[index(feature, frame, day)];
}

void MeasurementStore::set(const std::string& user, int feature, int frame, Date day,
                           double value) {
  add_user(user);
  users_[user][index(feature, frame, day)] = value;
}

std::vector<double>& MeasurementStore::mutable_series(const std::string& user) {
  auto it = users_.find(user);
  if (it == users_.end()) throw UsageError("unknown user: '" + user + "'");
  return it->second;
}

std::span<const double> MeasurementStore::day_series(const std::string& user, int feature,
                                                     int frame) const {
  const auto& values = series_of(user);
  const std::size_t start = index(feature, frame, first_day_);
  return {values.data() + start, static_cast<std::size_t>(day_count())};
}

std::vector<double> MeasurementStore::group_day_series(std::span<const std::string> members,
                                                       int feature, int frame) const {
  if (members.empty()) throw ConfigError("group mean over an empty group");
  // Accumulate in sorted member order so the mean does not depend on how the
  // caller happens to order the group.
  std::vector<std::string> sorted(members.begin(), members.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> mean(static_cast<std::size_t>(day_count()), 0.0);
  for (const auto& member : sorted) {
    const auto series = day_series(member, feature, frame);
    for (std::size_t d = 0; d < mean.size(); ++d) mean[d] += series[d];
  }
  for (double& v : mean) v /= static_cast<double>(sorted.size());
  return mean;
}

void MeasurementStore::save(const std::string& path) const {
  json j;
  j["kind"] = "ubad-measurements";
  j["version"] = 1;
  j["aspect"] = aspect_name(aspect_);
  j["features"] = features_;
  j["frames"] = frames_;
  j["first_day"] = format_date(first_day_);
  j["last_day"] = format_date(last_day_);
  json users = json::object();
  for (const auto& [user, values] : users_) users[user] = values;
  j["users"] = std::move(users);
  std::ofstream out(path);
  if (!out) throw DataError("cannot open for writing: " + path);
  out << j.dump() << '\n';
  if (!out) throw DataError("I/O error while writing: " + path);
}

MeasurementStore MeasurementStore::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open measurement store: " + path);
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded() || j.value("kind", "") != "ubad-measurements") {
    throw FormatError("not a measurement store: " + path);
  }
  if (j.value("version", 0) != 1) throw FormatError("unsupported store version in " + path);
  MeasurementStore store(aspect_from_name(j.at("aspect").get<std::string>()),
                         j.at("features").get<std::vector<std::string>>(),
                         j.at("frames").get<int>(), parse_date(j.at("first_day")),
                         parse_date(j.at("last_day")));
  const std::size_t expected =
      store.features_.size() * store.frames_ * static_cast<std::size_t>(store.day_count());
  for (const auto& [user, values] : j.at("users").items()) {
    auto series = values.get<std::vector<double>>();
    if (series.size() != expected) throw FormatError("bad series length for user " + user);
    store.users_[user] = std::move(series);
  }
  return store;
}

namespace {

// Buckets one user's events and extracts every (day, frame) in order.
void extract_user(const std::string& user, const std::vector<AuditEvent>& events,
                  const FeatureSet& set, const FrameConfig& frames, Date first_day,
                  Date last_day, std::vector<double>& out) {
  std::map<Date, std::vector<AuditEvent>> by_day;
  std::map<Date, std::map<int, std::vector<AuditEvent>>> by_day_frame;
  for (const auto& e : events) {
    if (e.aspect != set.aspect) continue;  // one store per aspect
    const DayFrame df = assign_timeframe(e.timestamp, frames);
    by_day[df.day].push_back(e);
    by_day_frame[df.day][df.frame].push_back(e);
  }
  const int T = frames.frames();
  const int F = static_cast<int>(set.features.size());
  const std::size_t days = static_cast<std::size_t>(last_day - first_day + 1);
  NoveltyState novelty;
  static const std::vector<AuditEvent> kEmpty;
  for (Date day = first_day; day <= last_day; ++day) {
    const auto day_frames = by_day_frame.find(day);
    for (int t = 0; t < T; ++t) {
      const std::vector<AuditEvent>* bucket = &kEmpty;
      if (day_frames != by_day_frame.end()) {
        auto it = day_frames->second.find(t);
        if (it != day_frames->second.end()) bucket = &it->second;
      }
      const auto values = extract_features(*bucket, set, novelty);
      for (int f = 0; f < F; ++f) {
        out[(static_cast<std::size_t>(f) * T + t) * days + (day - first_day)] = values[f];
      }
    }
    const auto day_events = by_day.find(day);
    novelty.advance(set, day_events == by_day.end() ? kEmpty : day_events->second, day);
  }
}

}  // namespace

MeasurementStore extract_store(const std::map<std::string, std::vector<AuditEvent>>& by_user,
                               const FeatureSet& set, const FrameConfig& frames,
                               const ExtractOptions& options) {
  set.validate();
  frames.validate();

  Date first = std::numeric_limits<Date>::max();
  Date last = std::numeric_limits<Date>::min();
  for (const auto& [user, events] : by_user) {
    for (const auto& e : events) {
      const DayFrame df = assign_timeframe(e.timestamp, frames);
      first = std::min(first, df.day);
      last = std::max(last, df.day);
    }
  }
  if (options.first_day) first = *options.first_day;
  if (options.last_day) last = *options.last_day;
  if (first > last) throw DataError("no events and no explicit day span to extract over");

  std::vector<std::string> users;
  for (const auto& [user, _] : by_user) users.push_back(user);
  users.insert(users.end(), options.roster.begin(), options.roster.end());
  std::sort(users.begin(), users.end());
  users.erase(std::unique(users.begin(), users.end()), users.end());

  MeasurementStore store(set.aspect, set.feature_names(), frames.frames(), first, last);
  for (const auto& user : users) store.add_user(user);

  static const std::vector<AuditEvent> kNoEvents;
  auto run_user = [&](const std::string& user) {
    auto it = by_user.find(user);
    extract_user(user, it == by_user.end() ? kNoEvents : it->second, set, frames, first, last,
                 store.mutable_series(user));
  };

  unsigned threads = options.threads ? options.threads : std::thread::hardware_concurrency();
  if (threads <= 1 || users.size() <= 1) {
    for (const auto& user : users) run_user(user);
  } else {
    threads = std::min<unsigned>(threads, users.size());
    std::vector<std::thread> pool;
    std::atomic<std::size_t> next{0};
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < users.size(); i = next++) run_user(users[i]);
      });
    }
    for (auto& th : pool) th.join();
  }
  return store;
}

}  // namespace ubad
