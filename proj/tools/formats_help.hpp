#pragma once

// Appended to `iotbed --help`.
inline constexpr const char* kFormatsHelp = R"(File formats:
  scenario (.scn)    scenario: <name>
                     [context_repeat: all|none]
                     test <name>
                       phase: standard|context
                       action: <initiator>, <element>, <COMMAND>, {k=v, ...}
                       use: <template>
                     Values: number, "string", word, or @file (relative to
                     the scenario). `template <name>` blocks define reusable
                     action lists.
  element (.elem)    key = value lines: id, driver, optional kind, plus
                     driver config (device elements need spec = <json>).
  device spec        JSON object; see docs/formats.md for every field.
  context script     CSV  time_s,lat,lon[,day]  in non-decreasing time.
  score list         CSV  port,description,score
  vuln db            CSV  device_type,version_range,vuln_id,severity,description
  attack db          CSV  probe_id,severity,service_match,payload_hex,
                          expected_safe_signature
  labels             CSV  capture_path,device_type  (relative to --captures,
                          else to the labels file)
  capture (.rec)     one tab-separated key=value record per packet.
  report (.rec)      key=value lines; `report <run_id>` renders it.
  config             key = value: registry_dir, runs_dir, score_list,
                     vuln_db, attack_db, k, window_s, backend.
                     Found via --config, $IOTBED_CONFIG, ./iotbed.conf.

Exit codes: 0 all passed, 1 a test failed or risk above MINOR,
2 usage, parse, validation or runtime error (including a scenario
test whose action errored).
)";
