#pragma once

#include <optional>
#include <string>
#include <vector>

#include "iotbed/core/registry.hpp"

namespace iotbed::orchestrator {

// Built-in drivers and what they accept. Security-test drivers are named
// after their test kind (port_scan, tamper, ...).
std::optional<core::DriverManifest> builtin_manifest(const std::string& driver);
std::vector<std::string> builtin_drivers();
// Kind a driver is normally registered as.
core::ElementKind default_kind(const std::string& driver);

// Element file: `key = value` lines with `id`, `driver`, optional `kind`
// and driver configuration (a device needs `spec = <device json>`).
core::ElementDescriptor parse_element(const std::string& content, const std::string& base_dir);
// Every *.elem file in `dir`, in name order. A missing directory yields an
// empty registry.
core::Registry load_registry(const std::string& dir);

}  // namespace iotbed::orchestrator
