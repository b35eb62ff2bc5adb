#pragma once

#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "iotbed/core/model.hpp"

namespace iotbed::core {

enum class ElementKind {
  device_under_test,
  simulator,
  measurement_tool,
  analysis_tool,
  security_test,
};

std::string_view to_string(ElementKind k);
std::optional<ElementKind> element_kind_from_string(std::string_view s);

enum class ParamType { string, number, file };

struct ParamSpec {
  ParamType type = ParamType::string;
  bool required = false;
};

struct CommandSchema {
  std::map<std::string, ParamSpec> params;
};

// What an element's driver accepts.
struct DriverManifest {
  std::string driver;
  std::map<Command, CommandSchema> commands;
};

struct ElementDescriptor {
  std::string id;
  ElementKind kind = ElementKind::simulator;
  DriverManifest manifest;
  // Free-form driver configuration from the element file (e.g. `spec`).
  std::map<std::string, std::string> config;
  // Directory relative paths in `config` resolve against.
  std::string base_dir;
};

class Registry {
 public:
  Registry() = default;
  Registry(const Registry& other);
  Registry& operator=(const Registry& other);

  std::string register_element(ElementDescriptor desc);
  void remove_element(const std::string& id);
  ElementDescriptor resolve(const std::string& id) const;
  bool contains(const std::string& id) const;
  // Sorted by id.
  std::vector<ElementDescriptor> list_elements() const;
  std::size_t size() const;

 private:
  mutable std::shared_mutex mutex_;
  std::map<std::string, ElementDescriptor> elements_;
};

enum class ValidationIssue { none, unknown_element, unsupported_command, schema_mismatch };

struct ValidationResult {
  ValidationIssue issue = ValidationIssue::none;
  std::string message;

  bool ok() const { return issue == ValidationIssue::none; }
  explicit operator bool() const { return ok(); }
};

ValidationResult validate_action(const Action& a, const Registry& registry);

}  // namespace iotbed::core
