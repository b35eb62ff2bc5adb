#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>

#include "iotbed/simnet/device_spec.hpp"

namespace iotbed::simnet {

// Shannon entropy of the byte histogram, in bits per byte (0..8).
double byte_entropy(std::span<const std::uint8_t> bytes);
double byte_entropy(std::string_view bytes);

// Synthesizes a payload of `size` bytes. Encrypted payloads are uniform
// pseudorandom bytes; plaintext payloads are a token stream that embeds
// `marker` near the front when it is non-empty.
std::string synthesize_payload(std::mt19937_64& rng, int size, PayloadClass cls,
                               const std::string& marker = {});

}  // namespace iotbed::simnet
