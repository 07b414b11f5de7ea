#include "ubad/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "ubad/errors.hpp"
#include "ubad/rng.hpp"

namespace ubad {

using nlohmann::ordered_json;

void OrgSpec::validate() const {
  if (user_count < 1) throw ConfigError("org needs at least one user");
  if (group_count < 1 || group_count > user_count) {
    throw ConfigError("group count must be in [1, user_count]");
  }
  if (days < 1) throw ConfigError("calendar span must be at least one day");
  if (jitter < 0.0 || jitter >= 1.0) throw ConfigError("jitter must be in [0, 1)");
  if (weekend_factor < 0.0) throw ConfigError("weekend factor must be >= 0");
  if (activity_scale < 0.0) throw ConfigError("activity scale must be >= 0");
  for (const auto& [aspect, scale] : aspect_scale) {
    if (scale < 0.0) throw ConfigError("aspect scale must be >= 0");
  }
  for (const auto& change : env_changes) {
    if (change.day < first_day || change.day >= first_day + days) {
      throw ConfigError("environmental change outside the calendar");
    }
  }
}

std::vector<std::string> OrgSpec::user_ids() const {
  std::vector<std::string> users;
  users.reserve(user_count);
  for (int i = 0; i < user_count; ++i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "u%03d", i);
    users.emplace_back(buf);
  }
  return users;
}

GroupMap OrgSpec::group_map() const {
  GroupMap map;
  const auto users = user_ids();
  const int base = user_count / group_count;
  const int extra = user_count % group_count;
  int cursor = 0;
  for (int g = 0; g < group_count; ++g) {
    char buf[8];
    std::snprintf(buf, sizeof(buf), "g%d", g);
    const int size = base + (g < extra ? 1 : 0);
    std::vector<std::string> members(users.begin() + cursor, users.begin() + cursor + size);
    map.groups[buf] = std::move(members);
    cursor += size;
  }
  return map;
}

const char* scenario_name(Scenario s) {
  switch (s) {
    case Scenario::AfterHoursExfil: return "after_hours_exfil";
    case Scenario::JobSearchThumbDrive: return "job_search_thumb_drive";
    case Scenario::RansomwareLike: return "ransomware_like";
    case Scenario::BotnetLike: return "botnet_like";
  }
  return "?";
}

Scenario scenario_from_name(const std::string& name) {
  for (Scenario s : {Scenario::AfterHoursExfil, Scenario::JobSearchThumbDrive,
                     Scenario::RansomwareLike, Scenario::BotnetLike}) {
    if (name == scenario_name(s)) return s;
  }
  throw ConfigError("unknown scenario: '" + name + "'");
}

int ScenarioSpec::resolved_duration() const {
  if (duration_days > 0) return duration_days;
  switch (kind) {
    case Scenario::AfterHoursExfil: return 3;
    case Scenario::JobSearchThumbDrive: return 5;
    case Scenario::RansomwareLike: return 1;
    case Scenario::BotnetLike: return 2;  // dropper phase; C&C traffic follows
  }
  return 1;
}

int ScenarioSpec::labeled_days() const {
  const int dur = resolved_duration();
  return kind == Scenario::BotnetLike ? dur + 6 : dur;
}

namespace {

constexpr Timestamp kWorkStart = 6 * 3600;
constexpr Timestamp kWorkEnd = 18 * 3600;

struct AspectHabit {
  double working_rate = 0.0;  // expected events per working frame on a weekday
  double off_share = 0.0;     // off-frame rate as a share of the working rate
  double novelty_prob = 0.0;  // chance an event touches a never-seen object
};

// A user's habitual profile, drawn once from the master seed.
struct UserProfile {
  std::map<Aspect, AspectHabit> habits;
  std::vector<std::string> hosts, files, domains, programs, keys;
  std::map<Aspect, std::uint64_t> novel_counter;
};

std::vector<std::string> make_pool(const std::string& prefix, const std::string& user, int n) {
  std::vector<std::string> pool;
  pool.reserve(n);
  for (int i = 0; i < n; ++i) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%s-%s-%03d", prefix.c_str(), user.c_str(), i);
    pool.emplace_back(buf);
  }
  return pool;
}

UserProfile make_profile(const std::string& user, Rng& rng) {
  UserProfile p;
  p.habits[Aspect::Device] = {rng.uniform(0.5, 3.0), 0.08, 0.015};
  p.habits[Aspect::File] = {rng.uniform(15.0, 45.0), 0.06, 0.06};
  p.habits[Aspect::Http] = {rng.uniform(25.0, 70.0), 0.12, 0.05};
  p.habits[Aspect::Command] = {rng.uniform(2.0, 9.0), 0.06, 0.02};
  p.habits[Aspect::Config] = {rng.uniform(0.2, 1.2), 0.2, 0.1};
  p.hosts = make_pool("host", user, 2);
  p.files = make_pool("file", user, 40);
  p.domains = make_pool("site", user, 15);
  p.programs = make_pool("prog", user, 8);
  p.keys = make_pool("key", user, 5);
  return p;
}

std::string novel_object(UserProfile& p, Aspect aspect, const std::string& user,
                         const char* prefix) {
  char buf[80];
  std::snprintf(buf, sizeof(buf), "%s-%s-new%05llu", prefix, user.c_str(),
                static_cast<unsigned long long>(p.novel_counter[aspect]++));
  return buf;
}

// Picks from the pool or mints a new object; new objects join the pool so
// they can recur on later days.
std::string pick_object(UserProfile& p, std::vector<std::string>& pool, Aspect aspect,
                        const std::string& user, const char* prefix, double novelty_prob,
                        Rng& rng) {
  if (rng.uniform() < novelty_prob || pool.empty()) {
    pool.push_back(novel_object(p, aspect, user, prefix));
    return pool.back();
  }
  return pool[rng.uniform_int(pool.size())];
}

Timestamp frame_timestamp(Date day, bool working, Rng& rng) {
  if (working) {
    return day * kSecondsPerDay + kWorkStart +
           static_cast<Timestamp>(rng.uniform_int(kWorkEnd - kWorkStart));
  }
  // Off frame: 18:00 today through 06:00 tomorrow.
  const Timestamp span = kSecondsPerDay - (kWorkEnd - kWorkStart);
  return day * kSecondsPerDay + kWorkEnd + static_cast<Timestamp>(rng.uniform_int(span));
}

struct DayModifiers {
  double rate = 1.0;
  double novelty = 1.0;
  double failure = 1.0;
};

DayModifiers modifiers_for(const OrgSpec& org, Aspect aspect, Date day) {
  DayModifiers mods;
  for (const auto& change : org.env_changes) {
    if (change.aspect != aspect) continue;
    if (day >= change.day && day < change.day + change.duration_days) {
      mods.rate *= change.rate_factor;
      mods.novelty *= change.novelty_factor;
      mods.failure *= change.failure_factor;
    }
  }
  return mods;
}

double org_rate_scale(const OrgSpec& org, Aspect aspect) {
  double scale = org.activity_scale;
  auto it = org.aspect_scale.find(aspect);
  if (it != org.aspect_scale.end()) scale *= it->second;
  return scale;
}

void emit_aspect_events(const OrgSpec& org, const std::string& user, UserProfile& profile,
                        Aspect aspect, Date day, Rng& rng, std::vector<AuditEvent>& out) {
  const AspectHabit& habit = profile.habits.at(aspect);
  const DayModifiers mods = modifiers_for(org, aspect, day);
  const bool rest_day = is_weekend(day) || std::find(org.holidays.begin(), org.holidays.end(),
                                                     day) != org.holidays.end();
  const double jitter = rng.uniform(1.0 - org.jitter, 1.0 + org.jitter);
  const double novelty_prob = std::min(1.0, habit.novelty_prob * mods.novelty);

  for (const bool working : {true, false}) {
    double rate = habit.working_rate * org_rate_scale(org, aspect) *
                  (working ? 1.0 : habit.off_share);
    if (rest_day && working) rate *= org.weekend_factor;
    rate *= mods.rate * jitter;
    const std::uint64_t count = rng.poisson(rate);
    for (std::uint64_t i = 0; i < count; ++i) {
      AuditEvent e;
      e.user_id = user;
      e.aspect = aspect;
      e.timestamp = frame_timestamp(day, working, rng);
      switch (aspect) {
        case Aspect::Device: {
          e.action = rng.uniform() < 0.55 ? "connect" : "disconnect";
          e.object = pick_object(profile, profile.hosts, aspect, user, "host",
                                 e.action == "connect" ? novelty_prob : 0.0, rng);
          break;
        }
        case Aspect::File: {
          const double roll = rng.uniform();
          if (roll < 0.55) {
            e.action = "open";
            e.attrs["direction"] = rng.uniform() < 0.7 ? "local" : "remote";
          } else if (roll < 0.80) {
            e.action = "write";
            e.attrs["direction"] = rng.uniform() < 0.8 ? "local" : "remote";
          } else if (roll < 0.92) {
            e.action = "copy";
            e.attrs["direction"] =
                rng.uniform() < 0.5 ? "local-to-remote" : "remote-to-local";
          } else {
            e.action = "delete";
            e.attrs["direction"] = "local";
          }
          e.object = pick_object(profile, profile.files, aspect, user, "file", novelty_prob,
                                 rng);
          break;
        }
        case Aspect::Http: {
          const double roll = rng.uniform();
          if (roll < 0.70) {
            e.action = "visit";
          } else if (roll < 0.85) {
            e.action = "download";
          } else {
            e.action = "upload";
          }
          if (e.action != "visit") {
            static const char* kTypes[] = {"doc", "pdf", "txt", "jpg", "zip", "exe"};
            static const double kCdf[] = {0.45, 0.65, 0.77, 0.87, 0.95, 1.0};
            const double t = rng.uniform();
            for (int k = 0; k < 6; ++k) {
              if (t <= kCdf[k]) {
                e.attrs["filetype"] = kTypes[k];
                break;
              }
            }
          }
          const double failure_prob = std::min(0.9, 0.07 * mods.failure);
          e.attrs["result"] = rng.uniform() < failure_prob ? "failure" : "success";
          e.object = pick_object(profile, profile.domains, aspect, user, "site",
                                 novelty_prob, rng);
          break;
        }
        case Aspect::Command: {
          e.action = rng.uniform() < 0.85 ? "exec" : "powershell";
          e.object = pick_object(profile, profile.programs, aspect, user, "prog",
                                 novelty_prob, rng);
          break;
        }
        case Aspect::Config: {
          e.action = "modify";
          e.object = pick_object(profile, profile.keys, aspect, user, "key", novelty_prob,
                                 rng);
          break;
        }
        case Aspect::Logon:
          break;
      }
      out.push_back(std::move(e));
    }
  }
}

void sort_stream(std::vector<AuditEvent>& events) {
  std::stable_sort(events.begin(), events.end(),
                   [](const AuditEvent& a, const AuditEvent& b) {
                     return a.timestamp < b.timestamp;
                   });
}

}  // namespace

std::map<Aspect, double> habitual_working_rates(const OrgSpec& org, const std::string& user) {
  Rng rng(Rng::derive(org.seed, "user/" + user));
  const UserProfile profile = make_profile(user, rng);
  std::map<Aspect, double> rates;
  for (const auto& [aspect, habit] : profile.habits) {
    rates[aspect] = habit.working_rate * org_rate_scale(org, aspect);
  }
  return rates;
}

std::vector<AuditEvent> generate(const OrgSpec& org) {
  org.validate();
  std::vector<AuditEvent> events;
  const auto users = org.user_ids();
  for (std::size_t u = 0; u < users.size(); ++u) {
    Rng rng(Rng::derive(org.seed, "user/" + users[u]));
    UserProfile profile = make_profile(users[u], rng);
    for (Date day = org.first_day; day < org.first_day + org.days; ++day) {
      for (Aspect aspect : {Aspect::Device, Aspect::File, Aspect::Http, Aspect::Command,
                            Aspect::Config}) {
        emit_aspect_events(org, users[u], profile, aspect, day, rng, events);
      }
    }
  }
  sort_stream(events);
  return events;
}

namespace {

struct Injector {
  const ScenarioSpec& spec;
  Rng rng;
  std::uint64_t counter = 0;
  std::vector<AuditEvent> added;

  std::string fresh(const char* prefix) {
    char buf[80];
    std::snprintf(buf, sizeof(buf), "%s-%s-%05llu", prefix, spec.victim.c_str(),
                  static_cast<unsigned long long>(counter++));
    return buf;
  }

  void emit(Date day, bool working, Aspect aspect, std::string action, std::string object,
            std::map<std::string, std::string> attrs = {}) {
    AuditEvent e;
    e.user_id = spec.victim;
    e.timestamp = frame_timestamp(day, working, rng);
    e.aspect = aspect;
    e.action = std::move(action);
    e.object = std::move(object);
    e.attrs = std::move(attrs);
    added.push_back(std::move(e));
  }

  int scaled(double base) const {
    return std::max(1, static_cast<int>(std::lround(base * spec.intensity)));
  }
};

void inject_after_hours_exfil(Injector& inj) {
  const Date s = inj.spec.start_day;
  const std::string host = inj.fresh("exfil-host");
  const std::string leak = inj.fresh("leak-site");
  for (int d = 0; d < inj.spec.resolved_duration(); ++d) {
    for (int i = inj.scaled(5); i > 0; --i) {
      inj.emit(s + d, false, Aspect::Device, "connect", host);
    }
    for (int i = inj.scaled(9); i > 0; --i) {
      inj.emit(s + d, false, Aspect::File, "copy", inj.fresh("exfil-file"),
               {{"direction", "local-to-remote"}});
    }
    for (int i = inj.scaled(7); i > 0; --i) {
      inj.emit(s + d, false, Aspect::Http, "upload", leak,
               {{"filetype", "doc"}, {"result", "success"}});
    }
  }
}

void inject_job_search(Injector& inj) {
  const Date s = inj.spec.start_day;
  const int dur = inj.spec.resolved_duration();
  std::vector<std::string> job_sites;
  for (int i = 0; i < 4; ++i) job_sites.push_back(inj.fresh("jobs-site"));
  for (int d = 0; d < dur; ++d) {
    for (int i = inj.scaled(6); i > 0; --i) {
      inj.emit(s + d, true, Aspect::Http, "upload",
               job_sites[inj.rng.uniform_int(job_sites.size())],
               {{"filetype", "doc"}, {"result", "success"}});
    }
  }
  // Thumb-drive phase at markedly higher rates over the last two days.
  const std::string drive_host = inj.fresh("drive-host");
  for (int d = std::max(0, dur - 2); d < dur; ++d) {
    for (int i = inj.scaled(12); i > 0; --i) {
      inj.emit(s + d, true, Aspect::Device, "connect", drive_host);
    }
    for (int i = inj.scaled(18); i > 0; --i) {
      inj.emit(s + d, true, Aspect::File, "copy", inj.fresh("steal-file"),
               {{"direction", "local-to-remote"}});
    }
  }
}

void inject_ransomware(Injector& inj) {
  const Date s = inj.spec.start_day;
  // Encryption grinds past working hours, so the burst spans both frames.
  for (int d = 0; d < inj.spec.resolved_duration(); ++d) {
    for (int i = inj.scaled(25); i > 0; --i) {
      inj.emit(s + d, i % 3 != 0, Aspect::Command, "exec", inj.fresh("malware-bin"));
    }
    for (int i = inj.scaled(8); i > 0; --i) {
      inj.emit(s + d, i % 2 == 0, Aspect::Config, "modify", inj.fresh("reg-key"));
    }
    for (int i = inj.scaled(120); i > 0; --i) {
      inj.emit(s + d, i % 5 < 3, Aspect::File, "write", inj.fresh("enc-file"),
               {{"direction", "local"}});
    }
    for (int i = inj.scaled(80); i > 0; --i) {
      inj.emit(s + d, i % 5 < 3, Aspect::File, "delete", inj.fresh("del-file"),
               {{"direction", "local"}});
    }
  }
}

void inject_botnet(Injector& inj) {
  const Date s = inj.spec.start_day;
  // Dropper phase: a couple of new executions and registry edits — low signal.
  for (int d = 0; d < inj.spec.resolved_duration(); ++d) {
    for (int i = inj.scaled(3); i > 0; --i) {
      inj.emit(s + d, true, Aspect::Command, "exec", inj.fresh("dropper"));
    }
    for (int i = inj.scaled(2); i > 0; --i) {
      inj.emit(s + d, true, Aspect::Config, "modify", inj.fresh("run-key"));
    }
  }
  // Delayed C&C phase: a drip of failed queries to generated domains plus a
  // few successful C&C contacts, spread across both frames for several days.
  // Kept inside one day's normal noise; the signal is its persistence.
  const std::string c2 = inj.fresh("c2-site");
  const Date cc_start = s + inj.spec.resolved_duration();
  for (int d = 0; d < 6; ++d) {
    for (int i = inj.scaled(2); i > 0; --i) {
      inj.emit(cc_start + d, true, Aspect::Http, "visit", inj.fresh("dga"),
               {{"result", "failure"}});
    }
    for (int i = inj.scaled(2); i > 0; --i) {
      inj.emit(cc_start + d, false, Aspect::Http, "visit", inj.fresh("dga"),
               {{"result", "failure"}});
    }
    for (int i = inj.scaled(1); i > 0; --i) {
      inj.emit(cc_start + d, false, Aspect::Http, "visit", c2, {{"result", "success"}});
    }
  }
}

}  // namespace

std::pair<std::vector<AuditEvent>, LabelSet> inject(std::vector<AuditEvent> events,
                                                    const OrgSpec& org,
                                                    const ScenarioSpec& scenario) {
  org.validate();
  const auto users = org.user_ids();
  if (std::find(users.begin(), users.end(), scenario.victim) == users.end()) {
    throw ConfigError("victim '" + scenario.victim + "' is not in the organization");
  }
  const Date last = org.first_day + org.days - 1;
  if (scenario.start_day < org.first_day ||
      scenario.start_day + scenario.labeled_days() - 1 > last) {
    throw ConfigError("scenario window falls outside the calendar");
  }

  Injector inj{scenario, Rng(Rng::derive(org.seed, std::string("inject/") +
                                                       scenario_name(scenario.kind) + "/" +
                                                       scenario.victim))};
  switch (scenario.kind) {
    case Scenario::AfterHoursExfil: inject_after_hours_exfil(inj); break;
    case Scenario::JobSearchThumbDrive: inject_job_search(inj); break;
    case Scenario::RansomwareLike: inject_ransomware(inj); break;
    case Scenario::BotnetLike: inject_botnet(inj); break;
  }

  events.insert(events.end(), inj.added.begin(), inj.added.end());
  sort_stream(events);

  LabelSet labels;
  labels.abnormal[scenario.victim] = {scenario.start_day,
                                      scenario.start_day + scenario.labeled_days() - 1};
  return {std::move(events), std::move(labels)};
}

std::string LabelSet::to_json() const {
  ordered_json j;
  j["kind"] = "ubad-labels";
  j["default"] = "normal";
  ordered_json ab = ordered_json::object();
  for (const auto& [user, span] : abnormal) {
    ab[user] = {{"from", format_date(span.from)}, {"to", format_date(span.to)}};
  }
  j["abnormal"] = std::move(ab);
  return j.dump(2);
}

LabelSet LabelSet::from_json(const std::string& text) {
  ordered_json j = ordered_json::parse(text, nullptr, false);
  if (j.is_discarded() || j.value("kind", "") != "ubad-labels") {
    throw FormatError("not a label set");
  }
  LabelSet labels;
  for (const auto& [user, span] : j.at("abnormal").items()) {
    labels.abnormal[user] = {parse_date(span.at("from").get<std::string>()),
                             parse_date(span.at("to").get<std::string>())};
  }
  return labels;
}

void LabelSet::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open for writing: " + path);
  out << to_json() << '\n';
}

LabelSet LabelSet::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw StageError("missing labels file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json(buf.str());
}

std::string org_spec_to_json(const OrgSpec& org) {
  ordered_json j;
  j["kind"] = "ubad-org";
  j["users"] = org.user_count;
  j["groups"] = org.group_count;
  j["first_day"] = format_date(org.first_day);
  j["days"] = org.days;
  j["weekend_factor"] = org.weekend_factor;
  j["jitter"] = org.jitter;
  j["activity_scale"] = org.activity_scale;
  ordered_json scales = ordered_json::object();
  for (const auto& [aspect, scale] : org.aspect_scale) scales[aspect_name(aspect)] = scale;
  j["aspect_scale"] = std::move(scales);
  ordered_json holidays = ordered_json::array();
  for (Date d : org.holidays) holidays.push_back(format_date(d));
  j["holidays"] = std::move(holidays);
  ordered_json changes = ordered_json::array();
  for (const auto& c : org.env_changes) {
    changes.push_back({{"day", format_date(c.day)},
                       {"duration_days", c.duration_days},
                       {"aspect", aspect_name(c.aspect)},
                       {"rate_factor", c.rate_factor},
                       {"novelty_factor", c.novelty_factor},
                       {"failure_factor", c.failure_factor}});
  }
  j["env_changes"] = std::move(changes);
  j["seed"] = org.seed;
  ordered_json groups = ordered_json::object();
  for (const auto& [id, members] : org.group_map().groups) groups[id] = members;
  j["group_members"] = std::move(groups);
  return j.dump(2);
}

OrgSpec org_spec_from_json(const std::string& text) {
  ordered_json j = ordered_json::parse(text, nullptr, false);
  if (j.is_discarded() || j.value("kind", "") != "ubad-org") {
    throw FormatError("not an org spec");
  }
  OrgSpec org;
  org.user_count = j.at("users").get<int>();
  org.group_count = j.at("groups").get<int>();
  org.first_day = parse_date(j.at("first_day").get<std::string>());
  org.days = j.at("days").get<int>();
  org.weekend_factor = j.value("weekend_factor", 0.15);
  org.jitter = j.value("jitter", 0.25);
  org.activity_scale = j.value("activity_scale", 1.0);
  if (j.contains("aspect_scale")) {
    for (const auto& [name, scale] : j.at("aspect_scale").items()) {
      org.aspect_scale[aspect_from_name(name)] = scale.get<double>();
    }
  }
  for (const auto& d : j.value("holidays", ordered_json::array())) {
    org.holidays.push_back(parse_date(d.get<std::string>()));
  }
  for (const auto& c : j.value("env_changes", ordered_json::array())) {
    EnvChange change;
    change.day = parse_date(c.at("day").get<std::string>());
    change.duration_days = c.value("duration_days", 1);
    change.aspect = aspect_from_name(c.at("aspect").get<std::string>());
    change.rate_factor = c.value("rate_factor", 1.0);
    change.novelty_factor = c.value("novelty_factor", 1.0);
    change.failure_factor = c.value("failure_factor", 1.0);
    org.env_changes.push_back(change);
  }
  org.seed = j.value("seed", 1ull);
  org.validate();
  return org;
}

}  // namespace ubad
