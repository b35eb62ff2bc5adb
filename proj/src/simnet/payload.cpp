#include "iotbed/simnet/payload.hpp"

#include <array>
#include <cmath>

namespace iotbed::simnet {

double byte_entropy(std::span<const std::uint8_t> bytes) {
  if (bytes.empty()) return 0.0;
  std::array<std::size_t, 256> counts{};
  for (auto b : bytes) ++counts[b];
  double n = static_cast<double>(bytes.size());
  double h = 0.0;
  for (auto c : counts) {
    if (c == 0) continue;
    double p = static_cast<double>(c) / n;
    h -= p * std::log2(p);
  }
  return h;
}

double byte_entropy(std::string_view bytes) {
  return byte_entropy(std::span<const std::uint8_t>(
      reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size()));
}

namespace {
constexpr std::array<std::string_view, 24> kTokens{
    "GET",    "POST",  "/api/v1/status", "HTTP/1.1", "host:", "device", "sensor", "value",
    "temp=",  "ok",    "state",          "on",       "off",   "id=",    "42",     "17",
    "report", "sync",  "time=",          "battery",  "level", "json",   "event",  "ack"};
}

std::string synthesize_payload(std::mt19937_64& rng, int size, PayloadClass cls,
                               const std::string& marker) {
  std::string out;
  if (size <= 0) return out;
  out.reserve(static_cast<std::size_t>(size));
  if (cls == PayloadClass::encrypted) {
    while (static_cast<int>(out.size()) < size) {
      std::uint64_t r = rng();
      for (int i = 0; i < 8 && static_cast<int>(out.size()) < size; ++i) {
        out.push_back(static_cast<char>((r >> (8 * i)) & 0xff));
      }
    }
    return out;
  }
  if (!marker.empty()) out = marker + " ";
  std::uniform_int_distribution<std::size_t> pick(0, kTokens.size() - 1);
  while (static_cast<int>(out.size()) < size) {
    out += kTokens[pick(rng)];
    out += ' ';
  }
  out.resize(static_cast<std::size_t>(size));
  return out;
}

}  // namespace iotbed::simnet
