#include "ubad/events.hpp"

#include <array>

#include "ubad/errors.hpp"

namespace ubad {

namespace {
constexpr std::array<const char*, 6> kAspectNames = {"device", "file",   "http",
                                                     "command", "config", "logon"};
}

const char* aspect_name(Aspect aspect) {
  return kAspectNames[static_cast<int>(aspect)];
}

Aspect aspect_from_name(const std::string& name) {
  for (std::size_t i = 0; i < kAspectNames.size(); ++i) {
    if (name == kAspectNames[i]) return static_cast<Aspect>(i);
  }
  throw FormatError("unknown aspect: '" + name + "'");
}

std::map<std::string, std::vector<AuditEvent>> partition_by_user(
    const std::vector<AuditEvent>& events) {
  std::map<std::string, std::vector<AuditEvent>> out;
  for (const auto& e : events) out[e.user_id].push_back(e);
  return out;
}

std::map<std::string, std::vector<AuditEvent>> partition_by_user(
    std::vector<AuditEvent>&& events) {
  std::map<std::string, std::vector<AuditEvent>> out;
  for (auto& e : events) {
    auto& bucket = out[e.user_id];
    bucket.push_back(std::move(e));
  }
  events.clear();
  events.shrink_to_fit();
  return out;
}

}  // namespace ubad
