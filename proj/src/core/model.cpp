#include "iotbed/core/model.hpp"

#include <array>

#include "iotbed/common/error.hpp"
#include "iotbed/common/text.hpp"

namespace iotbed::core {

namespace {
constexpr std::array<std::pair<Command, std::string_view>, 12> kCommandNames{{
    {Command::START, "START"},
    {Command::STOP, "STOP"},
    {Command::CREATE, "CREATE"},
    {Command::DELETE, "DELETE"},
    {Command::MODIFY, "MODIFY"},
    {Command::SET, "SET"},
    {Command::TEST, "TEST"},
    {Command::NOTIFY, "NOTIFY"},
    {Command::SELECT, "SELECT"},
    {Command::REMOVE, "REMOVE"},
    {Command::LOGIN, "LOGIN"},
    {Command::TEST_CONNECTION, "TEST_CONNECTION"},
}};

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  out += '"';
  return out;
}
}  // namespace

std::string_view to_string(Command c) {
  for (const auto& [cmd, name] : kCommandNames) {
    if (cmd == c) return name;
  }
  return "?";
}

std::optional<Command> command_from_string(std::string_view s) {
  for (const auto& [cmd, name] : kCommandNames) {
    if (name == s) return cmd;
  }
  return std::nullopt;
}

const std::vector<Command>& all_commands() {
  static const std::vector<Command> cmds = [] {
    std::vector<Command> v;
    for (const auto& kv : kCommandNames) v.push_back(kv.first);
    return v;
  }();
  return cmds;
}

std::string_view to_string(Phase p) {
  return p == Phase::standard ? "standard" : "context";
}

std::optional<Phase> phase_from_string(std::string_view s) {
  if (s == "standard") return Phase::standard;
  if (s == "context") return Phase::context;
  return std::nullopt;
}

std::optional<std::string> param_string(const Params& p, const std::string& key) {
  auto it = p.find(key);
  if (it == p.end()) return std::nullopt;
  if (auto* s = std::get_if<std::string>(&it->second)) return *s;
  if (auto* f = std::get_if<FileRef>(&it->second)) return f->path;
  return text::format_double(std::get<double>(it->second));
}

std::optional<double> param_number(const Params& p, const std::string& key) {
  auto it = p.find(key);
  if (it == p.end()) return std::nullopt;
  if (auto* d = std::get_if<double>(&it->second)) return *d;
  if (auto* s = std::get_if<std::string>(&it->second)) {
    if (auto v = text::to_double(*s)) return v;
  }
  fail(ErrorCode::validation, "parameter '" + key + "' must be a number");
}

std::string format_params(const Params& p) {
  std::string out = "{";
  bool first = true;
  for (const auto& [k, v] : p) {
    if (!first) out += ", ";
    first = false;
    out += k;
    out += '=';
    if (auto* s = std::get_if<std::string>(&v)) {
      out += quote(*s);
    } else if (auto* d = std::get_if<double>(&v)) {
      out += text::format_double(*d);
    } else {
      out += '@';
      out += std::get<FileRef>(v).path;
    }
  }
  out += '}';
  return out;
}

std::string format_action(const Action& a) {
  return a.initiator + ", " + a.element + ", " + std::string(to_string(a.command)) + ", " +
         format_params(a.params);
}

}  // namespace iotbed::core
