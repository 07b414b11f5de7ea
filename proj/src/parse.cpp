#include "ubad/parse.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "ubad/errors.hpp"

namespace ubad {

namespace {

using nlohmann::json;

bool parse_jsonl_record(const std::string& line, AuditEvent& out) {
  json j = json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) return false;
  if (!j.contains("user") || !j.contains("ts") || !j.contains("aspect") ||
      !j.contains("action")) {
    return false;
  }
  try {
    out.user_id = j.at("user").get<std::string>();
    const auto& ts = j.at("ts");
    if (ts.is_number_integer()) {
      out.timestamp = ts.get<std::int64_t>();
    } else if (ts.is_string()) {
      out.timestamp = parse_timestamp(ts.get<std::string>());
    } else {
      return false;
    }
    out.aspect = aspect_from_name(j.at("aspect").get<std::string>());
    out.action = j.at("action").get<std::string>();
    out.object = j.value("object", std::string{});
    out.attrs.clear();
    if (j.contains("attrs")) {
      const auto& attrs = j.at("attrs");
      if (!attrs.is_object()) return false;
      for (auto it = attrs.begin(); it != attrs.end(); ++it) {
        if (!it.value().is_string()) return false;
        out.attrs[it.key()] = it.value().get<std::string>();
      }
    }
  } catch (const std::exception&) {
    return false;
  }
  if (out.user_id.empty() || out.timestamp < 0) return false;
  return true;
}

// Splits one CSV record; supports RFC-4180 style double-quoted fields so the
// attrs_json column can carry commas and quotes.
bool split_csv(const std::string& line, std::vector<std::string>& fields) {
  fields.clear();
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"' && cur.empty()) {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (quoted) return false;  // unterminated quote
  fields.push_back(std::move(cur));
  return true;
}

bool parse_csv_record(const std::string& line, AuditEvent& out) {
  std::vector<std::string> fields;
  if (!split_csv(line, fields) || fields.size() != 6) return false;
  try {
    out.user_id = fields[0];
    out.timestamp = parse_timestamp(fields[1]);
    out.aspect = aspect_from_name(fields[2]);
    out.action = fields[3];
    out.object = fields[4];
    out.attrs.clear();
    if (!fields[5].empty()) {
      json attrs = json::parse(fields[5], nullptr, false);
      if (attrs.is_discarded() || !attrs.is_object()) return false;
      for (auto it = attrs.begin(); it != attrs.end(); ++it) {
        if (!it.value().is_string()) return false;
        out.attrs[it.key()] = it.value().get<std::string>();
      }
    }
  } catch (const std::exception&) {
    return false;
  }
  if (out.user_id.empty() || out.timestamp < 0) return false;
  return true;
}

std::string csv_quote(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out += '"';
  return out;
}

}  // namespace

StreamFormat stream_format_from_name(const std::string& name) {
  if (name == "jsonl") return StreamFormat::Jsonl;
  if (name == "csv") return StreamFormat::Csv;
  throw ConfigError("unknown event format: '" + name + "' (expected jsonl or csv)");
}

ParseResult parse_event_stream(std::istream& source, StreamFormat format) {
  if (!source.good()) throw DataError("event stream is not readable");
  ParseResult result;
  std::string line;
  std::size_t records = 0;
  bool header_pending = format == StreamFormat::Csv;
  while (std::getline(source, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (header_pending) {
      header_pending = false;
      if (line.rfind("user,", 0) == 0) continue;  // header row
    }
    ++records;
    AuditEvent event;
    const bool ok = format == StreamFormat::Jsonl ? parse_jsonl_record(line, event)
                                                  : parse_csv_record(line, event);
    if (ok) {
      result.events.push_back(std::move(event));
    } else {
      ++result.malformed;
    }
  }
  if (source.bad()) throw DataError("I/O error while reading event stream");
  // A lone bad record is a skip; repeated failures past half the stream mean
  // the format flag is wrong.
  if (result.malformed >= 2 && result.malformed * 2 > records) {
    throw FormatError("more than half of the records are malformed; wrong --format?");
  }
  return result;
}

ParseResult parse_event_file(const std::string& path, StreamFormat format) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open event file: " + path);
  return parse_event_stream(in, format);
}

std::string event_to_jsonl(const AuditEvent& event) {
  json j;
  j["user"] = event.user_id;
  j["ts"] = event.timestamp;
  j["aspect"] = aspect_name(event.aspect);
  j["action"] = event.action;
  j["object"] = event.object;
  if (!event.attrs.empty()) {
    json attrs = json::object();
    for (const auto& [k, v] : event.attrs) attrs[k] = v;
    j["attrs"] = attrs;
  }
  return j.dump();
}

void write_event_stream(std::ostream& out, const std::vector<AuditEvent>& events,
                        StreamFormat format) {
  if (format == StreamFormat::Jsonl) {
    for (const auto& e : events) out << event_to_jsonl(e) << '\n';
    return;
  }
  out << "user,ts,aspect,action,object,attrs_json\n";
  for (const auto& e : events) {
    json attrs = json::object();
    for (const auto& [k, v] : e.attrs) attrs[k] = v;
    out << csv_quote(e.user_id) << ',' << e.timestamp << ',' << aspect_name(e.aspect) << ','
        << csv_quote(e.action) << ',' << csv_quote(e.object) << ','
        << (e.attrs.empty() ? std::string{} : csv_quote(attrs.dump())) << '\n';
  }
}

void write_event_file(const std::string& path, const std::vector<AuditEvent>& events,
                      StreamFormat format) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open for writing: " + path);
  write_event_stream(out, events, format);
  out.flush();
  if (!out) throw DataError("I/O error while writing: " + path);
}

}  // namespace ubad
