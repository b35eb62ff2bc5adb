#pragma once

#include <string>
#include <vector>

#include "iotbed/simnet/types.hpp"

namespace iotbed::simnet {

// Capture export: one tab-separated `field=value` record per line using the
// CaptureRecord field names.
std::string encode_capture_record(const CaptureRecord& r);
CaptureRecord decode_capture_record(const std::string& line);
std::string format_capture(const std::vector<CaptureRecord>& records);
std::vector<CaptureRecord> parse_capture(const std::string& content);
void write_capture(const std::string& path, const std::vector<CaptureRecord>& records);
std::vector<CaptureRecord> read_capture(const std::string& path);

std::string format_status(const std::string& device, const std::vector<InternalStatusSample>& samples);

// Context script: CSV lines `time_s,lat,lon[,day]`; '#' comments. Times are
// offsets from when the script starts playing.
std::vector<ContextEvent> parse_context_script(const std::string& content);
std::vector<ContextEvent> load_context_script(const std::string& path);
std::string format_context_log(const std::vector<ContextEvent>& events);

}  // namespace iotbed::simnet
