#include "ubad/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "ubad/errors.hpp"
#include "ubad/rng.hpp"
#include "ubad/svg.hpp"

namespace ubad {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::string read_file(const std::string& path, const char* what) {
  std::ifstream in(path);
  if (!in) throw StageError(std::string("missing ") + what + ": " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void ensure_dir(const std::string& path) { fs::create_directories(path); }

OrgSpec org_from_config(const json& j, std::uint64_t seed) {
  OrgSpec org;
  org.user_count = j.value("users", 200);
  org.group_count = j.value("groups", 4);
  org.first_day = parse_date(j.value("first_day", std::string("2025-01-05")));
  org.days = j.value("days", 120);
  org.weekend_factor = j.value("weekend_factor", 0.15);
  org.jitter = j.value("jitter", 0.25);
  org.activity_scale = j.value("activity_scale", 1.0);
  if (j.contains("aspect_scale")) {
    for (const auto& [name, scale] : j.at("aspect_scale").items()) {
      org.aspect_scale[aspect_from_name(name)] = scale.get<double>();
    }
  }
  for (const auto& d : j.value("holidays", json::array())) {
    org.holidays.push_back(parse_date(d.get<std::string>()));
  }
  for (const auto& c : j.value("env_changes", json::array())) {
    EnvChange change;
    change.day = parse_date(c.at("day").get<std::string>());
    change.duration_days = c.value("duration_days", 1);
    change.aspect = aspect_from_name(c.at("aspect").get<std::string>());
    change.rate_factor = c.value("rate_factor", 1.0);
    change.novelty_factor = c.value("novelty_factor", 1.0);
    change.failure_factor = c.value("failure_factor", 1.0);
    org.env_changes.push_back(change);
  }
  org.seed = seed;
  return org;
}

json org_to_config(const OrgSpec& org) {
  json j;
  j["users"] = org.user_count;
  j["groups"] = org.group_count;
  j["first_day"] = format_date(org.first_day);
  j["days"] = org.days;
  j["weekend_factor"] = org.weekend_factor;
  j["jitter"] = org.jitter;
  j["activity_scale"] = org.activity_scale;
  json scales = json::object();
  for (const auto& [aspect, scale] : org.aspect_scale) scales[aspect_name(aspect)] = scale;
  j["aspect_scale"] = std::move(scales);
  json holidays = json::array();
  for (Date d : org.holidays) holidays.push_back(format_date(d));
  j["holidays"] = std::move(holidays);
  json changes = json::array();
  for (const auto& c : org.env_changes) {
    changes.push_back({{"day", format_date(c.day)},
                       {"duration_days", c.duration_days},
                       {"aspect", aspect_name(c.aspect)},
                       {"rate_factor", c.rate_factor},
                       {"novelty_factor", c.novelty_factor},
                       {"failure_factor", c.failure_factor}});
  }
  j["env_changes"] = std::move(changes);
  return j;
}

}  // namespace

std::string hash_file_hex(const std::string& path) {
  const std::string bytes = read_file(path, "file to hash");
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(bytes)));
  return buf;
}

void RunConfig::validate() const {
  if (workdir.empty()) throw ConfigError("workdir must not be empty");
  deviation.validate();
  train.validate(true);
  frames.validate();
  feature_preset_names();  // presence check below
  const auto names = feature_preset_names();
  if (std::find(names.begin(), names.end(), feature_preset) == names.end()) {
    throw ConfigError("unknown feature preset: '" + feature_preset + "'");
  }
  if (critic_n < 1) throw ConfigError("critic N must be >= 1");
  if (train_stride < 1) throw ConfigError("train stride must be >= 1");
  if (org) org->validate();
  if (scenario && !org) throw ConfigError("a scenario needs an org section");
}

std::string RunConfig::resolved_events_path() const {
  return events_path.empty() ? data_dir() + "/events.jsonl" : events_path;
}
std::string RunConfig::resolved_labels_path() const {
  return labels_path.empty() ? data_dir() + "/labels.json" : labels_path;
}
std::string RunConfig::resolved_groups_path() const {
  return groups_path.empty() ? data_dir() + "/org.json" : groups_path;
}

RunConfig RunConfig::from_json(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw ConfigError("config is not a JSON object");

  RunConfig cfg;
  cfg.workdir = j.value("workdir", cfg.workdir);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.events_path = j.value("events", std::string{});
  cfg.events_format = stream_format_from_name(j.value("events_format", std::string("jsonl")));
  cfg.labels_path = j.value("labels", std::string{});
  cfg.groups_path = j.value("groups", std::string{});

  if (j.contains("org")) cfg.org = org_from_config(j.at("org"), cfg.seed);
  if (j.contains("scenario")) {
    const auto& s = j.at("scenario");
    ScenarioSpec spec;
    spec.kind = scenario_from_name(s.at("kind").get<std::string>());
    spec.victim = s.value("victim", std::string("u001"));
    spec.start_day = parse_date(s.at("start_day").get<std::string>());
    spec.duration_days = s.value("duration_days", 0);
    spec.intensity = s.value("intensity", 1.0);
    cfg.scenario = spec;
  }

  if (j.contains("features")) cfg.feature_preset = j.at("features").value("preset", "cert");
  if (j.contains("frames")) {
    const auto& f = j.at("frames");
    const std::string preset = f.value("preset", std::string{});
    if (preset == "working_off" || preset.empty()) {
      cfg.frames = FrameConfig::working_off();
    } else if (preset == "hourly") {
      cfg.frames = FrameConfig::hourly();
    } else {
      throw ConfigError("unknown frame preset: '" + preset + "'");
    }
    if (f.contains("boundaries_minutes")) {
      cfg.frames.boundary_minutes = f.at("boundaries_minutes").get<std::vector<int>>();
      cfg.frames.labels = f.at("labels").get<std::vector<std::string>>();
    }
  }
  if (j.contains("deviation")) {
    const auto& d = j.at("deviation");
    cfg.deviation.omega = d.value("omega", cfg.deviation.omega);
    cfg.deviation.delta_cap = d.value("delta", cfg.deviation.delta_cap);
    cfg.deviation.eps = d.value("eps", cfg.deviation.eps);
    cfg.deviation.weighting = d.value("weighting", cfg.deviation.weighting);
    cfg.deviation.matrix_days = d.value("days", cfg.deviation.matrix_days);
  }
  if (j.contains("train")) {
    const auto& t = j.at("train");
    cfg.train.epochs = t.value("epochs", cfg.train.epochs);
    cfg.train.batch_size = t.value("batch_size", cfg.train.batch_size);
    cfg.train.adadelta.rho = t.value("rho", cfg.train.adadelta.rho);
    cfg.train.adadelta.eps_opt = t.value("eps_opt", cfg.train.adadelta.eps_opt);
    cfg.train.bn.momentum = t.value("bn_momentum", cfg.train.bn.momentum);
    cfg.train.bn.eps = t.value("bn_eps", cfg.train.bn.eps);
    cfg.train.patience = t.value("patience", cfg.train.patience);
    cfg.hidden = t.value("hidden", cfg.hidden);
    cfg.train_stride = t.value("stride", cfg.train_stride);
  }
  if (j.contains("split") && j.at("split").contains("test_start")) {
    cfg.test_start = parse_date(j.at("split").at("test_start").get<std::string>());
  }
  if (j.contains("critic")) cfg.critic_n = j.at("critic").value("n", cfg.critic_n);
  if (j.contains("eval")) {
    const auto& e = j.at("eval");
    cfg.variant = variant_from_name(e.value("variant", std::string("compound")));
    const std::string tie = e.value("tie_mode", std::string("pessimistic"));
    if (tie == "pessimistic") {
      cfg.tie_mode = TieMode::Pessimistic;
    } else if (tie == "optimistic") {
      cfg.tie_mode = TieMode::Optimistic;
    } else {
      throw ConfigError("unknown tie_mode: '" + tie + "'");
    }
  }
  cfg.validate();
  return cfg;
}

std::string RunConfig::to_json() const {
  ordered_json j;
  j["workdir"] = workdir;
  j["seed"] = seed;
  if (!events_path.empty()) j["events"] = events_path;
  j["events_format"] = events_format == StreamFormat::Jsonl ? "jsonl" : "csv";
  if (!labels_path.empty()) j["labels"] = labels_path;
  if (!groups_path.empty()) j["groups"] = groups_path;
  if (org) j["org"] = org_to_config(*org);
  if (scenario) {
    j["scenario"] = {{"kind", scenario_name(scenario->kind)},
                     {"victim", scenario->victim},
                     {"start_day", format_date(scenario->start_day)},
                     {"duration_days", scenario->duration_days},
                     {"intensity", scenario->intensity}};
  }
  j["features"] = {{"preset", feature_preset}};
  j["frames"] = {{"boundaries_minutes", frames.boundary_minutes}, {"labels", frames.labels}};
  j["deviation"] = {{"omega", deviation.omega},
                    {"delta", deviation.delta_cap},
                    {"eps", deviation.eps},
                    {"weighting", deviation.weighting},
                    {"days", deviation.matrix_days}};
  j["train"] = {{"epochs", train.epochs},
                {"batch_size", train.batch_size},
                {"rho", train.adadelta.rho},
                {"eps_opt", train.adadelta.eps_opt},
                {"bn_momentum", train.bn.momentum},
                {"bn_eps", train.bn.eps},
                {"patience", train.patience},
                {"hidden", hidden},
                {"stride", train_stride}};
  if (test_start) j["split"] = {{"test_start", format_date(*test_start)}};
  j["critic"] = {{"n", critic_n}};
  j["eval"] = {{"variant", variant_name(variant)},
               {"tie_mode", tie_mode == TieMode::Pessimistic ? "pessimistic" : "optimistic"}};
  return j.dump(2);
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json(buf.str());
}

namespace {

// Adds one stage record (inputs and outputs with content hashes) to the
// run manifest. Paths under the workdir are stored relative to it and
// nothing time-dependent goes in, so identical runs produce identical
// manifests.
void record_stage(const RunConfig& config, const std::string& stage,
                  const std::vector<std::string>& inputs,
                  const std::vector<std::string>& outputs) {
  const std::string path = config.workdir + "/manifest.json";
  json manifest;
  if (fs::exists(path)) {
    manifest = json::parse(read_file(path, "manifest"), nullptr, false);
    if (manifest.is_discarded()) manifest = json::object();
  }
  manifest["tool"] = kToolVersion;
  manifest["config"] = json::parse(config.to_json());
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(config.to_json())));
  manifest["config_hash"] = buf;
  const auto relative = [&](const std::string& p) {
    const std::string prefix = config.workdir + "/";
    return p.rfind(prefix, 0) == 0 ? p.substr(prefix.size()) : p;
  };
  json in = json::object(), out = json::object();
  for (const auto& p : inputs) in[relative(p)] = hash_file_hex(p);
  for (const auto& p : outputs) out[relative(p)] = hash_file_hex(p);
  manifest["stages"][stage] = {{"inputs", std::move(in)}, {"outputs", std::move(out)}};
  write_text_file(path, manifest.dump(2) + "\n");
}

GroupMap load_groups(const RunConfig& config,
                     const std::map<std::string, std::vector<AuditEvent>>& by_user) {
  const std::string path = config.resolved_groups_path();
  if (fs::exists(path)) {
    const std::string text = read_file(path, "group map");
    json j = json::parse(text, nullptr, false);
    const std::string kind = j.is_discarded() ? "" : j.value("kind", "");
    GroupMap groups;
    if (kind == "ubad-org") {
      groups = org_spec_from_json(text).group_map();
    } else if (kind == "ubad-groups") {
      groups = GroupMap::from_json(text);
    } else {
      throw FormatError("unrecognized group file: " + path);
    }
    for (const auto& [user, _] : by_user) {
      groups.group_of(user);  // throws ConfigError when uncovered
    }
    return groups;
  }
  std::vector<std::string> users;
  for (const auto& [user, _] : by_user) users.push_back(user);
  return GroupMap::single_group(users);
}

VariantConfig variant_config_of(const RunConfig& config) {
  VariantConfig vc;
  vc.variant = config.variant;
  vc.feature_preset = config.feature_preset;
  vc.frames = config.frames;
  vc.deviation = config.deviation;
  vc.train = config.train;
  vc.hidden = config.hidden;
  vc.critic_n = config.critic_n;
  vc.train_stride = config.train_stride;
  vc.seed = config.seed;
  return vc;
}

std::map<std::string, MeasurementStore> load_stores(const RunConfig& config,
                                                    std::vector<std::string>* paths) {
  std::map<std::string, MeasurementStore> stores;
  const auto sets = variant_feature_sets(variant_config_of(config));
  for (const auto& set : sets) {
    const std::string path =
        config.extract_dir() + "/measurements_" + aspect_name(set.aspect) + ".json";
    if (!fs::exists(path)) throw StageError("missing measurement store: " + path);
    stores.emplace(aspect_name(set.aspect), MeasurementStore::load(path));
    if (paths) paths->push_back(path);
  }
  return stores;
}

Date resolve_test_start(const RunConfig& config, Date first_scoreable, Date last_day) {
  if (config.test_start) return *config.test_start;
  // Default: score the last quarter of the scoreable span.
  const Date span = last_day - first_scoreable + 1;
  return first_scoreable + (span * 3) / 4;
}

Date sampler_first_scoreable(const RunConfig& config, const MeasurementStore& any_store) {
  const bool single_day = config.variant == Variant::OneDay ||
                          config.variant == Variant::Baseline ||
                          config.variant == Variant::BaseFf;
  if (single_day) return any_store.first_day() + (config.deviation.omega - 1);
  return any_store.first_day() + (config.deviation.omega - 1) + (config.deviation.days() - 1);
}

}  // namespace

void stage_gen(const RunConfig& config) {
  if (!config.org) throw ConfigError("gen requires an org section in the config");
  ensure_dir(config.data_dir());

  auto events = generate(*config.org);
  LabelSet labels;
  if (config.scenario) {
    auto [injected, label_set] = inject(std::move(events), *config.org, *config.scenario);
    events = std::move(injected);
    labels = std::move(label_set);
  }

  const std::string events_path = config.data_dir() + "/events.jsonl";
  write_event_file(events_path, events, StreamFormat::Jsonl);
  const std::string labels_path = config.data_dir() + "/labels.json";
  labels.save(labels_path);
  const std::string org_path = config.data_dir() + "/org.json";
  write_text_file(org_path, org_spec_to_json(*config.org) + "\n");

  record_stage(config, "gen", {}, {events_path, labels_path, org_path});
}

void stage_extract(const RunConfig& config) {
  const std::string events_path = config.resolved_events_path();
  if (!fs::exists(events_path)) throw StageError("missing event stream: " + events_path);
  ensure_dir(config.extract_dir());

  const ParseResult parsed = parse_event_file(events_path, config.events_format);
  const auto by_user = partition_by_user(parsed.events);
  const GroupMap groups = load_groups(config, by_user);

  const VariantConfig vc = variant_config_of(config);
  const auto sets = variant_feature_sets(vc);
  const FrameConfig frames = variant_frames(vc);

  ExtractOptions options;
  options.roster = groups.all_users();

  std::vector<std::string> outputs;
  ordered_json meta;
  meta["malformed_records"] = parsed.malformed;
  meta["events"] = parsed.events.size();
  meta["users"] = options.roster.size();
  ordered_json aspects = ordered_json::array();
  for (const auto& set : sets) {
    const MeasurementStore store = extract_store(by_user, set, frames, options);
    const std::string path =
        config.extract_dir() + "/measurements_" + aspect_name(set.aspect) + ".json";
    store.save(path);
    outputs.push_back(path);
    aspects.push_back({{"aspect", aspect_name(set.aspect)},
                       {"features", store.features()},
                       {"first_day", format_date(store.first_day())},
                       {"last_day", format_date(store.last_day())}});
  }
  meta["aspects"] = std::move(aspects);
  const std::string groups_out = config.extract_dir() + "/groups.json";
  write_text_file(groups_out, groups.to_json() + "\n");
  outputs.push_back(groups_out);
  const std::string meta_path = config.extract_dir() + "/meta.json";
  write_text_file(meta_path, meta.dump(2) + "\n");
  outputs.push_back(meta_path);

  record_stage(config, "extract", {events_path}, outputs);
}

void stage_train(const RunConfig& config) {
  std::vector<std::string> inputs;
  const auto stores = load_stores(config, &inputs);
  const std::string groups_path = config.extract_dir() + "/groups.json";
  const GroupMap groups = GroupMap::from_json(read_file(groups_path, "group map"));
  inputs.push_back(groups_path);
  ensure_dir(config.models_dir());

  const auto& any = stores.begin()->second;
  const Date test_start =
      resolve_test_start(config, sampler_first_scoreable(config, any), any.last_day());
  VariantSampler sampler(config.variant, stores, groups, config.deviation, test_start,
                         config.train_stride);

  std::map<std::string, std::vector<FlatVector>> train_sets;
  for (const auto& key : sampler.model_keys()) train_sets[key] = sampler.train_samples(key);
  auto trained = train_ensemble(train_sets, config.train, config.seed, config.hidden);

  std::vector<std::string> outputs;
  ordered_json meta;
  meta["variant"] = variant_name(config.variant);
  meta["test_start"] = format_date(test_start);
  ordered_json models = ordered_json::array();
  for (auto& [key, result] : trained) {
    const std::string model_path = config.models_dir() + "/model_" + key + ".json";
    result.model.save(model_path);
    outputs.push_back(model_path);
    ordered_json loss;
    loss["aspect"] = key;
    loss["epochs"] = result.loss_trace.size();
    loss["trace"] = result.loss_trace;
    const std::string loss_path = config.models_dir() + "/loss_" + key + ".json";
    write_text_file(loss_path, loss.dump() + "\n");
    outputs.push_back(loss_path);
    models.push_back({{"aspect", key},
                      {"input_dim", sampler.input_dim(key)},
                      {"train_samples", train_sets.at(key).size()}});
  }
  meta["models"] = std::move(models);
  const std::string meta_path = config.models_dir() + "/meta.json";
  write_text_file(meta_path, meta.dump(2) + "\n");
  outputs.push_back(meta_path);

  record_stage(config, "train", inputs, outputs);
}

void stage_score(const RunConfig& config) {
  std::vector<std::string> inputs;
  const auto stores = load_stores(config, &inputs);
  const std::string groups_path = config.extract_dir() + "/groups.json";
  const GroupMap groups = GroupMap::from_json(read_file(groups_path, "group map"));
  inputs.push_back(groups_path);

  const auto& any = stores.begin()->second;
  const Date test_start =
      resolve_test_start(config, sampler_first_scoreable(config, any), any.last_day());
  VariantSampler sampler(config.variant, stores, groups, config.deviation, test_start,
                         config.train_stride);

  std::map<std::string, Autoencoder> models;
  for (const auto& key : sampler.model_keys()) {
    const std::string path = config.models_dir() + "/model_" + key + ".json";
    models.emplace(key, Autoencoder::load(path));  // throws StageError when missing
    inputs.push_back(path);
  }

  ensure_dir(config.scores_dir());
  const auto users = groups.all_users();
  ordered_json scores_json;
  std::ostringstream csv;
  csv << "aspect,day,user,score\n";
  for (const auto& key : sampler.model_keys()) {
    const auto& model = models.at(key);
    if (model.input_dim() != sampler.input_dim(key)) {
      throw StageError("checkpoint for '" + key + "' expects input_dim " +
                       std::to_string(model.input_dim()) + " but the data yields " +
                       std::to_string(sampler.input_dim(key)) +
                       "; retrain with the current config");
    }
    ordered_json per_day;
    for (Date day : sampler.test_days()) {
      ordered_json per_user;
      for (const auto& user : users) {
        const double s = model.score(sampler.sample(key, user, day));
        per_user[user] = s;
        csv << key << ',' << format_date(day) << ',' << user << ',' << s << '\n';
      }
      per_day[format_date(day)] = std::move(per_user);
    }
    scores_json[key] = std::move(per_day);
  }

  const std::string scores_path = config.scores_dir() + "/scores.json";
  write_text_file(scores_path, scores_json.dump() + "\n");
  const std::string csv_path = config.scores_dir() + "/scores.csv";
  write_text_file(csv_path, csv.str());

  record_stage(config, "score", inputs, {scores_path, csv_path});
}

void stage_rank(const RunConfig& config) {
  const std::string scores_path = config.scores_dir() + "/scores.json";
  if (!fs::exists(scores_path)) throw StageError("missing scores: " + scores_path);
  const json scores = json::parse(read_file(scores_path, "scores"));
  ensure_dir(config.ranks_dir());

  std::vector<std::string> aspects;
  std::set<std::string> day_set;
  for (const auto& [aspect, per_day] : scores.items()) {
    aspects.push_back(aspect);
    for (const auto& [day, _] : per_day.items()) day_set.insert(day);
  }
  if (aspects.empty()) throw StageError("scores file has no aspects");
  const int n = std::min<int>(config.critic_n, static_cast<int>(aspects.size()));

  ordered_json lists = ordered_json::array();
  std::ostringstream csv;
  csv << "day,position,user,priority";
  for (const auto& a : aspects) csv << ",rank_" << a;
  csv << '\n';

  for (const auto& day_str : day_set) {
    const Date day = parse_date(day_str);
    std::map<std::string, std::vector<int>> user_ranks;
    for (const auto& aspect : aspects) {
      AspectScores as;
      as.aspect = aspect;
      as.end_day = day;
      for (const auto& [user, score] : scores.at(aspect).at(day_str).items()) {
        as.scores[user] = score.get<double>();
      }
      const RankTable table = rank_users(as, TieRule::UserId);
      for (const auto& [user, rank] : table.ranks) user_ranks[user].push_back(rank);
    }
    const InvestigationList list = prioritize(user_ranks, n, day, aspects, TieRule::UserId);
    lists.push_back(ordered_json::parse(investigation_list_to_json(list)));
    int position = 1;
    for (const auto& row : list.rows) {
      csv << day_str << ',' << position++ << ',' << row.user_id << ',' << row.priority;
      for (int r : row.aspect_ranks) csv << ',' << r;
      csv << '\n';
    }
  }

  const std::string lists_path = config.ranks_dir() + "/lists.json";
  write_text_file(lists_path, lists.dump() + "\n");
  const std::string csv_path = config.ranks_dir() + "/lists.csv";
  write_text_file(csv_path, csv.str());
  record_stage(config, "rank", {scores_path}, {lists_path, csv_path});
}

void stage_eval(const RunConfig& config) {
  const std::string lists_path = config.ranks_dir() + "/lists.json";
  if (!fs::exists(lists_path)) throw StageError("missing investigation lists: " + lists_path);
  const std::string scores_path = config.scores_dir() + "/scores.json";
  if (!fs::exists(scores_path)) throw StageError("missing scores: " + scores_path);
  const std::string labels_path = config.resolved_labels_path();
  if (!fs::exists(labels_path)) throw StageError("missing labels: " + labels_path);

  const json lists = json::parse(read_file(lists_path, "lists"));
  const json scores = json::parse(read_file(scores_path, "scores"));
  const LabelSet labels = LabelSet::load(labels_path);
  ensure_dir(config.eval_dir());

  Date attack_start = 0;
  bool labeled = !labels.abnormal.empty();
  if (labeled) {
    attack_start = labels.abnormal.begin()->second.from;
    for (const auto& [user, span] : labels.abnormal) {
      attack_start = std::min(attack_start, span.from);
    }
  }

  ordered_json report;
  report["tool"] = kToolVersion;
  report["variant"] = variant_name(config.variant);
  report["n"] = config.critic_n;
  report["tie_mode"] = config.tie_mode == TieMode::Pessimistic ? "pessimistic" : "optimistic";
  report["labeled"] = labeled;

  double best_auc = -1.0;
  json best_outcomes;
  std::string best_day;
  std::map<std::string, int> best_position;
  ordered_json per_day = ordered_json::array();

  for (const auto& list : lists) {
    const std::string day_str = list.at("end_day").get<std::string>();
    const Date day = parse_date(day_str);
    ordered_json entry;
    entry["day"] = day_str;

    if (labeled) {
      std::vector<LabeledOutcome> outcomes;
      int position = 1;
      ordered_json victim_positions = ordered_json::object();
      for (const auto& row : list.at("list")) {
        const std::string user = row.at("user").get<std::string>();
        const int priority = row.at("priority").get<int>();
        outcomes.push_back({user, labels.is_abnormal(user), priority});
        if (labels.is_abnormal(user)) {
          victim_positions[user] = {{"position", position}, {"priority", priority}};
          if (day >= attack_start) {
            auto it = best_position.find(user);
            if (it == best_position.end() || position < it->second) {
              best_position[user] = position;
            }
          }
        }
        ++position;
      }
      const Curve roc = curves_and_auc(outcomes, CurveKind::Roc, config.tie_mode);
      entry["roc_auc"] = roc.auc;
      entry["victims"] = victim_positions;
      if (day >= attack_start && roc.auc > best_auc) {
        best_auc = roc.auc;
        best_day = day_str;
        json out = json::array();
        for (const auto& o : outcomes) {
          out.push_back({{"user", o.user_id}, {"abnormal", o.abnormal}, {"priority", o.priority}});
        }
        best_outcomes = std::move(out);
      }
    }
    per_day.push_back(std::move(entry));
  }
  report["per_day"] = std::move(per_day);

  if (labeled && best_auc >= 0.0) {
    std::vector<LabeledOutcome> outcomes;
    for (const auto& o : best_outcomes) {
      outcomes.push_back({o.at("user").get<std::string>(), o.at("abnormal").get<bool>(),
                          o.at("priority").get<int>()});
    }
    const Curve roc = curves_and_auc(outcomes, CurveKind::Roc, config.tie_mode);
    const Curve pr = curves_and_auc(outcomes, CurveKind::Pr, config.tie_mode);
    ordered_json best;
    best["day"] = best_day;
    best["roc_auc"] = roc.auc;
    best["pr_auc"] = pr.auc;
    best["fps_before_tp"] = roc.fps_before_tp;
    ordered_json positions = ordered_json::object();
    for (const auto& [user, pos] : best_position) positions[user] = pos;
    best["best_victim_position"] = std::move(positions);
    best["post_attack_from"] = format_date(attack_start);
    report["best"] = std::move(best);

    // ROC / PR charts for the best day.
    SvgSeries roc_series{"", "#cc0000", 1.5, {}};
    for (const auto& p : roc.points) {
      roc_series.points.emplace_back(p.rates.fp_rate, p.rates.tp_rate);
    }
    SvgSeries diag{"", "#bbbbbb", 1.0, {{0, 0}, {1, 1}}};
    write_text_file(config.eval_dir() + "/roc.svg",
                    svg_line_chart("ROC, " + best_day, "FP rate", "TP rate",
                                   {diag, roc_series}));
    SvgSeries pr_series{"", "#0044cc", 1.5, {}};
    for (const auto& p : pr.points) {
      pr_series.points.emplace_back(p.rates.recall, p.rates.precision);
    }
    write_text_file(config.eval_dir() + "/pr.svg",
                    svg_line_chart("Precision-Recall, " + best_day, "recall", "precision",
                                   {pr_series}));
  }

  // Score trend charts per aspect: victims black, a sample of normals grey.
  for (const auto& [aspect, per_day_scores] : scores.items()) {
    std::map<std::string, SvgSeries> by_user;
    int day_index = 0;
    for (const auto& [day, per_user] : per_day_scores.items()) {
      for (const auto& [user, score] : per_user.items()) {
        auto [it, inserted] = by_user.try_emplace(user);
        if (inserted) {
          const bool victim = labels.is_abnormal(user);
          it->second.label = victim ? user : "";
          it->second.color = victim ? "#000000" : "#c8c8c8";
          it->second.stroke_width = victim ? 1.8 : 0.7;
        }
        it->second.points.emplace_back(day_index, score.get<double>());
      }
      ++day_index;
    }
    std::vector<SvgSeries> series;
    int normals = 0;
    for (auto& [user, s] : by_user) {
      if (!labels.is_abnormal(user)) {
        if (++normals > 59) continue;
        series.push_back(std::move(s));
      }
    }
    for (auto& [user, s] : by_user) {  // victims last, drawn on top
      if (labels.is_abnormal(user)) series.push_back(std::move(s));
    }
    write_text_file(config.eval_dir() + "/trends_" + aspect + ".svg",
                    svg_line_chart("anomaly score trends (" + aspect + ")", "test day index",
                                   "reconstruction error", series));
  }

  const std::string report_path = config.eval_dir() + "/report.json";
  write_text_file(report_path, report.dump(2) + "\n");
  const std::string csv_path = config.eval_dir() + "/report.csv";
  {
    std::ostringstream day_csv;
    day_csv << "day,roc_auc\n";
    for (const auto& entry : report.at("per_day")) {
      day_csv << entry.at("day").get<std::string>() << ',';
      if (entry.contains("roc_auc")) day_csv << entry.at("roc_auc").get<double>();
      day_csv << '\n';
    }
    write_text_file(csv_path, day_csv.str());
  }

  record_stage(config, "eval", {lists_path, scores_path, labels_path},
               {report_path, csv_path});
}

void stage_repro(const RunConfig& config) {
  stage_gen(config);
  stage_extract(config);
  stage_train(config);
  stage_score(config);
  stage_rank(config);
  stage_eval(config);
}

}  // namespace ubad
