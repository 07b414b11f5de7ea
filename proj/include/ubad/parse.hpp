#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "ubad/events.hpp"

namespace ubad {

enum class StreamFormat { Jsonl, Csv };

StreamFormat stream_format_from_name(const std::string& name);

struct ParseResult {
  std::vector<AuditEvent> events;
  std::size_t malformed = 0;  // skipped records
};

// Reads an event stream. Malformed records are counted and skipped; if more
// than half of the non-empty records are malformed the whole parse fails with
// FormatError (the format flag is almost certainly wrong).
//
// JSONL: one object per line with keys `user`, `ts` (ISO-8601 or epoch
// seconds), `aspect`, `action`, `object`, optional `attrs` object.
// CSV: header `user,ts,aspect,action,object,attrs_json`.
ParseResult parse_event_stream(std::istream& source, StreamFormat format);
ParseResult parse_event_file(const std::string& path, StreamFormat format);

// Writers for the same two formats (round-trip with the parser).
void write_event_stream(std::ostream& out, const std::vector<AuditEvent>& events,
                        StreamFormat format);
void write_event_file(const std::string& path, const std::vector<AuditEvent>& events,
                      StreamFormat format);

std::string event_to_jsonl(const AuditEvent& event);

}  // namespace ubad
