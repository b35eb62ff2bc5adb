#pragma once

#include <cstdint>
#include <cstdio>
#include <mutex>
#include <string>
#include <vector>

#include "iotbed/core/model.hpp"

namespace iotbed::core {

struct Outcome {
  bool ok = true;
  std::string message;  // set when !ok

  static Outcome success() { return {}; }
  static Outcome error(std::string msg) { return {false, std::move(msg)}; }
  bool operator==(const Outcome&) const = default;
};

struct TraceEntry {
  std::uint64_t seq = 0;
  std::int64_t timestamp_us = 0;  // virtual clock
  std::string test;
  Phase phase = Phase::standard;
  Action action;
  Outcome outcome;
  std::vector<std::string> artifacts;

  bool operator==(const TraceEntry&) const = default;
};

// Append-only per-run trace file. Every append is flushed and synced before
// returning; seq numbers are assigned here.
class TraceLog {
 public:
  explicit TraceLog(std::string path);
  ~TraceLog();
  TraceLog(const TraceLog&) = delete;
  TraceLog& operator=(const TraceLog&) = delete;

  std::uint64_t append(TraceEntry entry);
  void close();
  bool is_open() const;
  const std::string& path() const { return path_; }
  std::uint64_t last_seq() const;

 private:
  mutable std::mutex mutex_;
  std::string path_;
  std::FILE* file_ = nullptr;
  std::uint64_t last_seq_ = 0;
  std::int64_t last_ts_ = 0;
};

std::string encode_trace_entry(const TraceEntry& e);
TraceEntry decode_trace_entry(const std::string& line);
std::vector<TraceEntry> read_trace(const std::string& path);

}  // namespace iotbed::core
