#include "ubad/features.hpp"

#include <algorithm>

#include "ubad/errors.hpp"

namespace ubad {

namespace {

std::string attr_or(const AuditEvent& e, const std::string& key, const std::string& fallback) {
  auto it = e.attrs.find(key);
  return it == e.attrs.end() ? fallback : it->second;
}

bool is_action(const AuditEvent& e, const char* action) { return e.action == action; }

}  // namespace

void FeatureSet::validate() const {
  std::set<std::string> names;
  for (const auto& f : features) {
    if (f.name.empty()) throw ConfigError("feature with empty name");
    if (!names.insert(f.name).second) {
      throw ConfigError("duplicate feature name: " + f.name);
    }
    if (!f.match) throw ConfigError("feature without match predicate: " + f.name);
    if (f.kind == FeatureKind::NoveltyCount) {
      rule(f.novelty_rule);  // throws if unknown
    }
  }
}

const NoveltyRule& FeatureSet::rule(const std::string& id) const {
  for (const auto& r : novelty_rules) {
    if (r.id == id) return r;
  }
  throw ConfigError("unknown novelty rule '" + id + "' for aspect " + aspect_name(aspect));
}

std::vector<std::string> FeatureSet::feature_names() const {
  std::vector<std::string> names;
  names.reserve(features.size());
  for (const auto& f : features) names.push_back(f.name);
  return names;
}

std::string NoveltyState::pair_key(const NoveltyRule& rule, const AuditEvent& event) {
  return rule.id + '\x1f' + rule.family(event) + '\x1f' + event.object;
}

void NoveltyState::advance(const FeatureSet& set, std::span<const AuditEvent> day_events,
                           Date day) {
  if (advanced_ && day <= last_day_) {
    throw UsageError("novelty advanced out of order: " + format_date(day) +
                     " after " + format_date(last_day_));
  }
  for (const auto& event : day_events) {
    if (event.aspect != set.aspect) continue;
    for (const auto& rule : set.novelty_rules) {
      if (rule.observes(event)) seen_.insert(pair_key(rule, event));
    }
  }
  advanced_ = true;
  last_day_ = day;
}

std::vector<double> extract_features(std::span<const AuditEvent> bucket,
                                     const FeatureSet& set, const NoveltyState& novelty) {
  for (const auto& event : bucket) {
    if (event.aspect != set.aspect) {
      throw UsageError(std::string("event aspect ") + aspect_name(event.aspect) +
                       " does not match feature set aspect " + aspect_name(set.aspect));
    }
  }
  std::vector<double> values(set.features.size(), 0.0);
  for (std::size_t i = 0; i < set.features.size(); ++i) {
    const auto& def = set.features[i];
    switch (def.kind) {
      case FeatureKind::Count: {
        std::size_t n = 0;
        for (const auto& e : bucket) n += def.match(e) ? 1 : 0;
        values[i] = static_cast<double>(n);
        break;
      }
      case FeatureKind::UniqueCount: {
        std::set<std::pair<std::string, std::string>> distinct;
        for (const auto& e : bucket) {
          if (def.match(e)) distinct.emplace(e.action, e.object);
        }
        values[i] = static_cast<double>(distinct.size());
        break;
      }
      case FeatureKind::NoveltyCount: {
        const NoveltyRule& rule = set.rule(def.novelty_rule);
        std::size_t n = 0;
        for (const auto& e : bucket) {
          if (def.match(e) && !novelty.contains(NoveltyState::pair_key(rule, e))) ++n;
        }
        values[i] = static_cast<double>(n);
        break;
      }
    }
  }
  return values;
}

std::vector<FeatureMeasurement> extract_measurements(std::span<const AuditEvent> bucket,
                                                     const FeatureSet& set,
                                                     const NoveltyState& novelty,
                                                     const std::string& user_id, Date day,
                                                     int frame) {
  const auto values = extract_features(bucket, set, novelty);
  std::vector<FeatureMeasurement> out;
  out.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    out.push_back({user_id, day, frame, set.features[i].name, values[i]});
  }
  return out;
}

namespace {

FeatureSet cert_device() {
  FeatureSet set;
  set.aspect = Aspect::Device;
  auto connect = [](const AuditEvent& e) { return is_action(e, "connect"); };
  set.novelty_rules.push_back(
      {"connect", connect, [](const AuditEvent&) { return std::string("connect"); }});
  set.features.push_back({"connection", FeatureKind::Count, connect, {}});
  set.features.push_back({"new-host-connection", FeatureKind::NoveltyCount, connect, "connect"});
  return set;
}

FeatureSet cert_file() {
  FeatureSet set;
  set.aspect = Aspect::File;
  auto dir = [](const AuditEvent& e) { return attr_or(e, "direction", ""); };
  auto op = [dir](const AuditEvent& e) {
    const std::string d = dir(e);
    if (e.action == "open" || e.action == "write") return d == "local" || d == "remote";
    if (e.action == "copy") return d == "local-to-remote" || d == "remote-to-local";
    return false;
  };
  set.novelty_rules.push_back(
      {"op", op, [dir](const AuditEvent& e) { return e.action + "/" + dir(e); }});
  auto add = [&](const char* name, const char* action, const char* d) {
    set.features.push_back({name, FeatureKind::Count,
                            [action, d, dir](const AuditEvent& e) {
                              return e.action == action && dir(e) == d;
                            },
                            {}});
  };
  add("open-from-local", "open", "local");
  add("open-from-remote", "open", "remote");
  add("write-to-local", "write", "local");
  add("write-to-remote", "write", "remote");
  add("copy-from-local-to-remote", "copy", "local-to-remote");
  add("copy-from-remote-to-local", "copy", "remote-to-local");
  set.features.push_back({"new-op", FeatureKind::NoveltyCount, op, "op"});
  return set;
}

FeatureSet cert_http() {
  FeatureSet set;
  set.aspect = Aspect::Http;
  auto filetype = [](const AuditEvent& e) { return attr_or(e, "filetype", ""); };
  const std::vector<std::string> types = {"doc", "exe", "jpg", "pdf", "txt", "zip"};
  auto upload = [filetype, types](const AuditEvent& e) {
    return e.action == "upload" &&
           std::find(types.begin(), types.end(), filetype(e)) != types.end();
  };
  set.novelty_rules.push_back(
      {"upload", upload,
       [filetype](const AuditEvent& e) { return "upload/" + filetype(e); }});
  for (const auto& t : types) {
    set.features.push_back({"upload-" + t, FeatureKind::Count,
                            [t, filetype](const AuditEvent& e) {
                              return e.action == "upload" && filetype(e) == t;
                            },
                            {}});
  }
  set.features.push_back({"http-new-op", FeatureKind::NoveltyCount, upload, "upload"});
  return set;
}

// events / unique events / new events trio used by the case-study presets.
FeatureSet event_trio(Aspect aspect) {
  FeatureSet set;
  set.aspect = aspect;
  auto any = [](const AuditEvent&) { return true; };
  set.novelty_rules.push_back({"event", any, [](const AuditEvent& e) {
                                 const std::string d = attr_or(e, "direction", "");
                                 return d.empty() ? e.action : e.action + "/" + d;
                               }});
  set.features.push_back({"events", FeatureKind::Count, any, {}});
  set.features.push_back({"unique-events", FeatureKind::UniqueCount, any, {}});
  set.features.push_back({"new-events", FeatureKind::NoveltyCount, any, "event"});
  return set;
}

FeatureSet case_http() {
  FeatureSet set;
  set.aspect = Aspect::Http;
  auto result = [](const AuditEvent& e) { return attr_or(e, "result", "success"); };
  auto ok = [result](const AuditEvent& e) { return result(e) == "success"; };
  auto fail = [result](const AuditEvent& e) { return result(e) == "failure"; };
  // Any HTTP contact marks the domain as seen, successful or not.
  set.novelty_rules.push_back({"domain", [](const AuditEvent&) { return true; },
                               [](const AuditEvent&) { return std::string("domain"); }});
  set.features.push_back({"success", FeatureKind::Count, ok, {}});
  set.features.push_back({"success-new-domain", FeatureKind::NoveltyCount, ok, "domain"});
  set.features.push_back({"failure", FeatureKind::Count, fail, {}});
  set.features.push_back({"failure-new-domain", FeatureKind::NoveltyCount, fail, "domain"});
  return set;
}

}  // namespace

std::vector<FeatureSet> feature_preset(const std::string& name) {
  std::vector<FeatureSet> sets;
  if (name == "cert") {
    sets = {cert_device(), cert_file(), cert_http()};
  } else if (name == "case") {
    sets = {event_trio(Aspect::File), event_trio(Aspect::Command), case_http(),
            event_trio(Aspect::Config)};
  } else {
    throw ConfigError("unknown feature preset: '" + name + "'");
  }
  for (const auto& s : sets) s.validate();
  return sets;
}

std::vector<std::string> feature_preset_names() { return {"cert", "case"}; }

FeatureSet coarse_feature_set(Aspect aspect) {
  static const std::map<Aspect, std::vector<std::string>> kActions = {
      {Aspect::Device, {"connect", "disconnect"}},
      {Aspect::File, {"open", "write", "copy", "delete"}},
      {Aspect::Http, {"visit", "download", "upload"}},
      {Aspect::Command, {"exec", "powershell"}},
      {Aspect::Config, {"modify"}},
      {Aspect::Logon, {"logon", "logoff"}},
  };
  FeatureSet set;
  set.aspect = aspect;
  for (const auto& action : kActions.at(aspect)) {
    set.features.push_back({action, FeatureKind::Count,
                            [action](const AuditEvent& e) { return e.action == action; },
                            {}});
  }
  set.validate();
  return set;
}

}  // namespace ubad
