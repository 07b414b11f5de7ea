#pragma once

#include <map>
#include <string>
#include <vector>

#include "ubad/calendar.hpp"

namespace ubad {

enum class Aspect { Device, File, Http, Command, Config, Logon };

const char* aspect_name(Aspect aspect);
Aspect aspect_from_name(const std::string& name);  // throws FormatError

// One normalized audit log record.
struct AuditEvent {
  std::string user_id;
  Timestamp timestamp = 0;
  Aspect aspect = Aspect::Device;
  std::string action;  // "connect", "open", "upload", ...
  std::string object;  // host id, file id, domain, program
  std::map<std::string, std::string> attrs;
};

// Splits a stream into per-user subsequences, each preserving input order.
std::map<std::string, std::vector<AuditEvent>> partition_by_user(
    const std::vector<AuditEvent>& events);
// Moving overload for large streams.
std::map<std::string, std::vector<AuditEvent>> partition_by_user(
    std::vector<AuditEvent>&& events);

}  // namespace ubad
