#include "iotbed/core/trace.hpp"

#include <unistd.h>

#include "iotbed/common/error.hpp"
#include "iotbed/common/text.hpp"
#include "iotbed/core/scenario_parser.hpp"

namespace iotbed::core {

TraceLog::TraceLog(std::string path) : path_(std::move(path)) {
  file_ = std::fopen(path_.c_str(), "w");
  if (!file_) fail(ErrorCode::storage, "cannot open trace file " + path_);
}

TraceLog::~TraceLog() { close(); }

bool TraceLog::is_open() const {
  std::lock_guard lock(mutex_);
  return file_ != nullptr;
}

std::uint64_t TraceLog::last_seq() const {
  std::lock_guard lock(mutex_);
  return last_seq_;
}

void TraceLog::close() {
  std::lock_guard lock(mutex_);
  if (file_) {
    std::fclose(file_);
    file_ = nullptr;
  }
}

std::uint64_t TraceLog::append(TraceEntry entry) {
  std::lock_guard lock(mutex_);
  if (!file_) fail(ErrorCode::storage, "trace log is closed");
  if (entry.timestamp_us < last_ts_) {
    fail(ErrorCode::invalid_argument, "trace timestamps must be non-decreasing");
  }
  entry.seq = last_seq_ + 1;
  std::string line = encode_trace_entry(entry) + "\n";
  if (std::fwrite(line.data(), 1, line.size(), file_) != line.size() || std::fflush(file_) != 0) {
    fail(ErrorCode::storage, "trace write failed for " + path_);
  }
  ::fsync(::fileno(file_));
  last_seq_ = entry.seq;
  last_ts_ = entry.timestamp_us;
  return entry.seq;
}

std::string encode_trace_entry(const TraceEntry& e) {
  text::Record rec{
      {"seq", std::to_string(e.seq)},
      {"ts", std::to_string(e.timestamp_us)},
      {"test", e.test},
      {"phase", std::string(to_string(e.phase))},
      {"initiator", e.action.initiator},
      {"element", e.action.element},
      {"command", std::string(to_string(e.action.command))},
      {"params", format_params(e.action.params)},
      {"outcome", e.outcome.ok ? "ok" : "error: " + e.outcome.message},
      {"artifacts", e.artifacts.empty() ? "-" : text::join(e.artifacts, ",")},
  };
  return text::encode_record(rec);
}

TraceEntry decode_trace_entry(const std::string& line) {
  auto rec = text::decode_record(line);
  TraceEntry e;
  auto seq = text::to_int(text::field(rec, "seq"));
  auto ts = text::to_int(text::field(rec, "ts"));
  if (!seq || !ts) fail(ErrorCode::parse, "bad trace seq/ts");
  e.seq = static_cast<std::uint64_t>(*seq);
  e.timestamp_us = *ts;
  e.test = text::field(rec, "test");
  auto phase = phase_from_string(text::field(rec, "phase"));
  if (!phase) fail(ErrorCode::parse, "bad trace phase");
  e.phase = *phase;
  e.action.initiator = text::field(rec, "initiator");
  e.action.element = text::field(rec, "element");
  auto cmd = command_from_string(text::field(rec, "command"));
  if (!cmd) fail(ErrorCode::parse, "bad trace command");
  e.action.command = *cmd;
  e.action.params = parse_params(text::field(rec, "params"));
  const auto& outcome = text::field(rec, "outcome");
  if (outcome == "ok") {
    e.outcome = Outcome::success();
  } else if (text::starts_with(outcome, "error: ")) {
    e.outcome = Outcome::error(outcome.substr(7));
  } else {
    fail(ErrorCode::parse, "bad trace outcome");
  }
  const auto& arts = text::field(rec, "artifacts");
  if (arts != "-") e.artifacts = text::split(arts, ',');
  return e;
}

std::vector<TraceEntry> read_trace(const std::string& path) {
  std::vector<TraceEntry> out;
  for (auto& line : text::split(text::read_file(path), '\n')) {
    if (text::trim(line).empty()) continue;
    out.push_back(decode_trace_entry(line));
  }
  return out;
}

}  // namespace iotbed::core
