#include "iotbed/core/registry.hpp"

#include <mutex>
#include <variant>

#include "iotbed/common/error.hpp"

namespace iotbed::core {

namespace {
constexpr std::pair<ElementKind, std::string_view> kKindNames[] = {
    {ElementKind::device_under_test, "device_under_test"},
    {ElementKind::simulator, "simulator"},
    {ElementKind::measurement_tool, "measurement_tool"},
    {ElementKind::analysis_tool, "analysis_tool"},
    {ElementKind::security_test, "security_test"},
};

bool matches(ParamType type, const ParamValue& v) {
  switch (type) {
    case ParamType::number:
      return std::holds_alternative<double>(v);
    case ParamType::file:
      return !std::holds_alternative<double>(v);
    case ParamType::string:
      return true;
  }
  return false;
}

std::string_view type_name(ParamType t) {
  switch (t) {
    case ParamType::number: return "number";
    case ParamType::file: return "file";
    case ParamType::string: return "string";
  }
  return "?";
}
}  // namespace

std::string_view to_string(ElementKind k) {
  for (const auto& [kind, name] : kKindNames) {
    if (kind == k) return name;
  }
  return "?";
}

std::optional<ElementKind> element_kind_from_string(std::string_view s) {
  for (const auto& [kind, name] : kKindNames) {
    if (name == s) return kind;
  }
  return std::nullopt;
}

Registry::Registry(const Registry& other) {
  std::shared_lock lock(other.mutex_);
  elements_ = other.elements_;
}

Registry& Registry::operator=(const Registry& other) {
  if (this == &other) return *this;
  std::map<std::string, ElementDescriptor> copy;
  {
    std::shared_lock lock(other.mutex_);
    copy = other.elements_;
  }
  std::unique_lock lock(mutex_);
  elements_ = std::move(copy);
  return *this;
}

std::string Registry::register_element(ElementDescriptor desc) {
  if (desc.id.empty()) fail(ErrorCode::invalid_argument, "element id is empty");
  std::unique_lock lock(mutex_);
  if (elements_.count(desc.id)) {
    fail(ErrorCode::duplicate, "duplicate element id '" + desc.id + "'");
  }
  std::string id = desc.id;
  elements_.emplace(id, std::move(desc));
  return id;
}

void Registry::remove_element(const std::string& id) {
  std::unique_lock lock(mutex_);
  if (elements_.erase(id) == 0) fail(ErrorCode::not_found, "unknown element '" + id + "'");
}

ElementDescriptor Registry::resolve(const std::string& id) const {
  std::shared_lock lock(mutex_);
  auto it = elements_.find(id);
  if (it == elements_.end()) fail(ErrorCode::not_found, "unknown element '" + id + "'");
  return it->second;
}

bool Registry::contains(const std::string& id) const {
  std::shared_lock lock(mutex_);
  return elements_.count(id) > 0;
}

std::vector<ElementDescriptor> Registry::list_elements() const {
  std::shared_lock lock(mutex_);
  std::vector<ElementDescriptor> out;
  out.reserve(elements_.size());
  for (const auto& [id, d] : elements_) out.push_back(d);
  return out;
}

std::size_t Registry::size() const {
  std::shared_lock lock(mutex_);
  return elements_.size();
}

ValidationResult validate_action(const Action& a, const Registry& registry) {
  if (!registry.contains(a.element)) {
    return {ValidationIssue::unknown_element, "unknown element '" + a.element + "'"};
  }
  ElementDescriptor desc = registry.resolve(a.element);
  auto cmd = desc.manifest.commands.find(a.command);
  if (cmd == desc.manifest.commands.end()) {
    return {ValidationIssue::unsupported_command,
            "element '" + a.element + "' does not support " + std::string(to_string(a.command))};
  }
  const auto& schema = cmd->second.params;
  for (const auto& [name, spec] : schema) {
    auto it = a.params.find(name);
    if (it == a.params.end()) {
      if (spec.required) {
        return {ValidationIssue::schema_mismatch,
                std::string(to_string(a.command)) + " on '" + a.element +
                    "' is missing required parameter '" + name + "'"};
      }
      continue;
    }
    if (!matches(spec.type, it->second)) {
      return {ValidationIssue::schema_mismatch,
              "parameter '" + name + "' must be a " + std::string(type_name(spec.type))};
    }
  }
  for (const auto& [name, value] : a.params) {
    if (!schema.count(name)) {
      return {ValidationIssue::schema_mismatch,
              "unexpected parameter '" + name + "' for " + std::string(to_string(a.command)) +
                  " on '" + a.element + "'"};
    }
  }
  return {};
}

}  // namespace iotbed::core
