#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ubad/events.hpp"
#include "ubad/store.hpp"

namespace ubad {

// Group-wide shift (service outage, software rollout): multiplies the event
// rate, failure probability and new-object probability of one aspect for
// every user on the affected days.
struct EnvChange {
  Date day = 0;
  int duration_days = 1;
  Aspect aspect = Aspect::Http;
  double rate_factor = 1.0;
  double novelty_factor = 1.0;
  double failure_factor = 1.0;  // HTTP only
};

struct OrgSpec {
  int user_count = 200;
  int group_count = 4;
  Date first_day = 0;
  int days = 120;
  double weekend_factor = 0.15;  // scales working-hours activity on weekends
  double jitter = 0.25;          // daily multiplicative rate jitter, [1-j, 1+j]
  double activity_scale = 1.0;   // global multiplier on habitual rates
  std::map<Aspect, double> aspect_scale;  // per-aspect multiplier on top
  std::vector<Date> holidays;
  std::vector<EnvChange> env_changes;
  std::uint64_t seed = 1;

  void validate() const;
  std::vector<std::string> user_ids() const;
  GroupMap group_map() const;  // contiguous blocks u000.., g0..
};

// The habitual weekday working-frame rate each aspect was drawn with for one
// user (the generator's own profile, re-derived; scales applied).
std::map<Aspect, double> habitual_working_rates(const OrgSpec& org, const std::string& user);

enum class Scenario { AfterHoursExfil, JobSearchThumbDrive, RansomwareLike, BotnetLike };

const char* scenario_name(Scenario s);
Scenario scenario_from_name(const std::string& name);

struct ScenarioSpec {
  Scenario kind = Scenario::AfterHoursExfil;
  std::string victim;
  Date start_day = 0;
  int duration_days = 0;  // 0: scenario default
  double intensity = 1.0;

  int resolved_duration() const;
  // Total labeled span; the botnet keeps acting days after its dropper ran.
  int labeled_days() const;
};

struct LabelSpan {
  Date from = 0;
  Date to = 0;  // inclusive
};

struct LabelSet {
  std::map<std::string, LabelSpan> abnormal;  // absent users are normal

  bool is_abnormal(const std::string& user) const { return abnormal.count(user) != 0; }
  std::string to_json() const;
  static LabelSet from_json(const std::string& text);
  void save(const std::string& path) const;
  static LabelSet load(const std::string& path);
};

// Habitual traffic for the whole organization, sorted by timestamp (ties keep
// generation order), fully determined by the spec's seed.
std::vector<AuditEvent> generate(const OrgSpec& org);

// Adds the scenario's events to the victim's stream; every other user's
// events are untouched. Returns the modified stream plus ground truth.
std::pair<std::vector<AuditEvent>, LabelSet> inject(std::vector<AuditEvent> events,
                                                    const OrgSpec& org,
                                                    const ScenarioSpec& scenario);

std::string org_spec_to_json(const OrgSpec& org);
OrgSpec org_spec_from_json(const std::string& text);

}  // namespace ubad
