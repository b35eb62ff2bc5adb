#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace iotbed::core {

enum class Command {
  START,
  STOP,
  CREATE,
  DELETE,
  MODIFY,
  SET,
  TEST,
  NOTIFY,
  SELECT,
  REMOVE,
  LOGIN,
  TEST_CONNECTION,
};

std::string_view to_string(Command c);
std::optional<Command> command_from_string(std::string_view s);
const std::vector<Command>& all_commands();

// Reference to a file, kept distinct from plain strings so drivers can
// resolve it relative to the scenario directory.
struct FileRef {
  std::string path;
  bool operator==(const FileRef&) const = default;
};

using ParamValue = std::variant<std::string, double, FileRef>;
using Params = std::map<std::string, ParamValue>;

inline constexpr std::string_view kUserInitiator = "USER";

struct Action {
  std::string initiator;
  std::string element;
  Command command = Command::START;
  Params params;

  bool operator==(const Action&) const = default;
};

struct Test {
  std::string name;
  std::vector<Action> actions;

  bool operator==(const Test&) const = default;
};

enum class Phase { standard, context };

std::string_view to_string(Phase p);
std::optional<Phase> phase_from_string(std::string_view s);

struct Scenario {
  std::string name;
  std::vector<Test> tests;
  std::vector<Phase> phase_tags;  // parallel to `tests`

  bool operator==(const Scenario&) const = default;
};

// Param accessors used by drivers. They throw Error(validation) on type
// mismatch and return nullopt when the key is absent.
std::optional<std::string> param_string(const Params& p, const std::string& key);
std::optional<double> param_number(const Params& p, const std::string& key);

std::string format_params(const Params& p);
std::string format_action(const Action& a);

}  // namespace iotbed::core
