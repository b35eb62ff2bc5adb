#include "iotbed/core/scenario_parser.hpp"

#include <cctype>
#include <filesystem>
#include <set>

#include "iotbed/common/error.hpp"
#include "iotbed/common/text.hpp"

namespace iotbed::core {

namespace {

constexpr int kMaxTemplateDepth = 16;

struct Line {
  int number;
  std::string text;  // trimmed
  int indent;        // column of first non-space character (1-based)
};

std::vector<Line> logical_lines(std::string_view content) {
  std::vector<Line> out;
  int n = 0;
  for (auto& raw : text::split(content, '\n')) {
    ++n;
    std::string t = text::trim(raw);
    if (t.empty() || t[0] == '#') continue;
    int indent = 1;
    while (indent - 1 < static_cast<int>(raw.size()) &&
           std::isspace(static_cast<unsigned char>(raw[indent - 1]))) {
      ++indent;
    }
    out.push_back({n, t, indent});
  }
  return out;
}

// Splits "key: value"; returns false when the line has no ':' keyword.
bool split_keyword(const std::string& line, std::string& key, std::string& value) {
  auto colon = line.find(':');
  if (colon == std::string::npos) return false;
  key = text::trim(line.substr(0, colon));
  for (char c : key) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
  }
  value = text::trim(line.substr(colon + 1));
  return !key.empty();
}

bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-' && c != '.' &&
        c != '@') {
      return false;
    }
  }
  return true;
}

ParamValue parse_value(const std::string& raw, int line, int column) {
  if (raw.empty()) throw ParseError(line, column, "empty parameter value");
  if (raw.front() == '"') {
    if (raw.size() < 2 || raw.back() != '"') {
      throw ParseError(line, column, "unterminated string");
    }
    std::string out;
    for (std::size_t i = 1; i + 1 < raw.size(); ++i) {
      if (raw[i] == '\\' && i + 2 < raw.size()) ++i;
      out += raw[i];
    }
    return out;
  }
  if (raw.front() == '@') {
    if (raw.size() == 1) throw ParseError(line, column, "empty file reference");
    return FileRef{raw.substr(1)};
  }
  if (auto d = text::to_double(raw)) return *d;
  return raw;
}

// Splits on commas outside double quotes, tracking each piece's offset.
std::vector<std::pair<std::string, int>> split_top(std::string_view s, int base_col) {
  std::vector<std::pair<std::string, int>> out;
  bool in_quotes = false;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i < s.size() && s[i] == '\\' && in_quotes) {
      ++i;
      continue;
    }
    if (i < s.size() && s[i] == '"') in_quotes = !in_quotes;
    if (i == s.size() || (s[i] == ',' && !in_quotes)) {
      out.emplace_back(std::string(s.substr(start, i - start)),
                       base_col + static_cast<int>(start));
      start = i + 1;
    }
  }
  return out;
}

}  // namespace

Params parse_params(std::string_view raw_text, int line, int column) {
  std::string t = text::trim(raw_text);
  if (t.size() < 2 || t.front() != '{' || t.back() != '}') {
    throw ParseError(line, column, "parameters must be enclosed in '{' and '}'");
  }
  Params params;
  std::string inner = t.substr(1, t.size() - 2);
  if (text::trim(inner).empty()) return params;
  bool have_positional = false;
  for (auto& [piece, col] : split_top(inner, column + 1)) {
    std::string entry = text::trim(piece);
    if (entry.empty()) throw ParseError(line, col, "empty parameter entry");
    auto eq = entry.find('=');
    bool quoted = entry.front() == '"';
    if (eq == std::string::npos || quoted) {
      // A lone value is the action's file argument.
      if (have_positional) throw ParseError(line, col, "more than one positional parameter");
      have_positional = true;
      ParamValue v = parse_value(entry, line, col);
      if (auto* s = std::get_if<std::string>(&v)) v = FileRef{*s};
      if (params.count("file")) throw ParseError(line, col, "duplicate parameter 'file'");
      params.emplace("file", std::move(v));
      continue;
    }
    std::string key = text::trim(entry.substr(0, eq));
    if (!is_identifier(key)) throw ParseError(line, col, "invalid parameter name '" + key + "'");
    if (params.count(key)) throw ParseError(line, col, "duplicate parameter '" + key + "'");
    params.emplace(key, parse_value(text::trim(entry.substr(eq + 1)), line, col));
  }
  return params;
}

Action parse_action(std::string_view raw, int line, int column) {
  std::string t(raw);
  auto brace = t.find('{');
  std::string head = brace == std::string::npos ? t : t.substr(0, brace);
  auto parts = text::split(head, ',');
  // With params present the head ends in a trailing comma.
  if (brace != std::string::npos) {
    if (parts.size() != 4 || !text::trim(parts[3]).empty()) {
      throw ParseError(line, column, "action must have the form 'initiator, element, command, {params}'");
    }
    parts.pop_back();
  } else if (parts.size() != 3) {
    throw ParseError(line, column, "action must have the form 'initiator, element, command, {params}'");
  }
  Action a;
  a.initiator = text::trim(parts[0]);
  a.element = text::trim(parts[1]);
  std::string cmd = text::trim(parts[2]);
  if (!is_identifier(a.initiator)) throw ParseError(line, column, "invalid initiator");
  if (!is_identifier(a.element)) throw ParseError(line, column, "invalid element");
  auto c = command_from_string(cmd);
  if (!c) fail(ErrorCode::validation, "line " + std::to_string(line) + ": unknown command '" + cmd + "'");
  a.command = *c;
  if (brace != std::string::npos) {
    a.params = parse_params(t.substr(brace), line, column + static_cast<int>(brace));
  }
  return a;
}

class ScenarioReader {
 public:
  explicit ScenarioReader(const TemplateLibrary* lib) : lib_(lib) {}

  Scenario read(std::string_view content, int depth) {
    if (depth > kMaxTemplateDepth) fail(ErrorCode::validation, "template nesting too deep");
    auto lines = logical_lines(content);
    Scenario s;
    bool have_name = false;
    bool repeat_context = false;
    std::map<std::string, std::vector<Line>> local_templates;

    enum class Block { none, test, tmpl } block = Block::none;
    Test* current = nullptr;
    bool current_phase_set = false;
    std::vector<Line>* current_template = nullptr;

    auto finish_test = [&] {
      if (current && current->actions.empty()) {
        fail(ErrorCode::validation, "empty test '" + current->name + "'");
      }
    };

    for (const auto& ln : lines) {
      const std::string& t = ln.text;
      if (text::starts_with(t, "test ") || text::starts_with(t, "template ")) {
        finish_test();
        bool is_test = text::starts_with(t, "test ");
        std::string name = text::trim(t.substr(is_test ? 5 : 9));
        if (!is_identifier(name)) throw ParseError(ln.number, ln.indent, "invalid block name '" + name + "'");
        if (is_test) {
          for (const auto& existing : s.tests) {
            if (existing.name == name) {
              throw ParseError(ln.number, ln.indent, "duplicate test '" + name + "'");
            }
          }
          s.tests.push_back(Test{name, {}});
          s.phase_tags.push_back(Phase::standard);
          current = &s.tests.back();
          current_phase_set = false;
          current_template = nullptr;
          block = Block::test;
        } else {
          current = nullptr;
          current_template = &local_templates[name];
          block = Block::tmpl;
        }
        continue;
      }
      std::string key, value;
      if (!split_keyword(t, key, value)) {
        throw ParseError(ln.number, ln.indent, "expected 'keyword: value', 'test <name>' or 'template <name>'");
      }
      if (block == Block::none) {
        if (key == "scenario") {
          if (have_name) throw ParseError(ln.number, ln.indent, "duplicate scenario header");
          if (value.empty()) throw ParseError(ln.number, ln.indent, "scenario name is empty");
          s.name = value;
          have_name = true;
        } else if (key == "context_repeat") {
          if (value == "all") {
            repeat_context = true;
          } else if (value != "none") {
            throw ParseError(ln.number, ln.indent, "context_repeat must be 'all' or 'none'");
          }
        } else if (key == "include") {
          Scenario inc = include_scenario(value, ln, depth);
          for (std::size_t i = 0; i < inc.tests.size(); ++i) {
            s.tests.push_back(inc.tests[i]);
            s.phase_tags.push_back(inc.phase_tags[i]);
          }
        } else {
          throw ParseError(ln.number, ln.indent, "unknown scenario keyword '" + key + "'");
        }
        continue;
      }
      if (block == Block::tmpl) {
        if (key != "action" && key != "use") {
          throw ParseError(ln.number, ln.indent, "templates may only contain 'action' and 'use' lines");
        }
        current_template->push_back(ln);
        continue;
      }
      // Inside a test block.
      if (key == "phase") {
        auto p = phase_from_string(value);
        if (!p) throw ParseError(ln.number, ln.indent + 7, "phase must be 'standard' or 'context'");
        if (current_phase_set) throw ParseError(ln.number, ln.indent, "duplicate phase tag");
        s.phase_tags.back() = *p;
        current_phase_set = true;
      } else if (key == "action") {
        current->actions.push_back(
            parse_action(value, ln.number, ln.indent + static_cast<int>(t.find(value))));
      } else if (key == "use") {
        expand_template(value, ln, local_templates, current->actions, depth);
      } else {
        throw ParseError(ln.number, ln.indent, "unknown test keyword '" + key + "'");
      }
    }
    finish_test();
    if (!have_name) fail(ErrorCode::validation, "missing 'scenario:' header");
    if (s.tests.empty()) fail(ErrorCode::validation, "empty scenario");

    if (repeat_context) {
      std::size_t n = s.tests.size();
      for (std::size_t i = 0; i < n; ++i) {
        if (s.phase_tags[i] != Phase::standard) continue;
        Test copy = s.tests[i];
        copy.name += "@context";
        s.tests.push_back(std::move(copy));
        s.phase_tags.push_back(Phase::context);
      }
    }
    return s;
  }

 private:
  void expand_template(const std::string& name, const Line& at,
                       const std::map<std::string, std::vector<Line>>& local,
                       std::vector<Action>& out, int depth) {
    if (depth > kMaxTemplateDepth || active_.count(name)) {
      fail(ErrorCode::validation, "line " + std::to_string(at.number) + ": recursive template '" + name + "'");
    }
    std::vector<Line> body;
    if (auto it = local.find(name); it != local.end()) {
      body = it->second;
    } else if (lib_ && lib_->tests_.count(name)) {
      int n = 0;
      for (const auto& raw : lib_->tests_.at(name)) body.push_back({++n, raw, 1});
    } else {
      fail(ErrorCode::validation,
           "line " + std::to_string(at.number) + ": unresolved template '" + name + "'");
    }
    active_.insert(name);
    for (const auto& ln : body) {
      std::string key, value;
      split_keyword(ln.text, key, value);
      if (key == "action") {
        out.push_back(parse_action(value, ln.number, ln.indent));
      } else {
        expand_template(value, ln, local, out, depth + 1);
      }
    }
    active_.erase(name);
  }

  Scenario include_scenario(const std::string& name, const Line& at, int depth) {
    if (!lib_ || !lib_->scenarios_.count(name)) {
      fail(ErrorCode::validation,
           "line " + std::to_string(at.number) + ": unresolved template '" + name + "'");
    }
    if (active_.count("scenario:" + name)) fail(ErrorCode::validation, "recursive template '" + name + "'");
    active_.insert("scenario:" + name);
    Scenario inc = read(lib_->scenarios_.at(name), depth + 1);
    active_.erase("scenario:" + name);
    return inc;
  }

  const TemplateLibrary* lib_;
  std::set<std::string> active_;
};

void TemplateLibrary::add_text(std::string_view content) {
  std::string current;
  bool in_template = false;
  bool has_header = false;
  std::string scenario_name;
  for (const auto& ln : logical_lines(content)) {
    if (text::starts_with(ln.text, "template ")) {
      current = text::trim(ln.text.substr(9));
      tests_[current].clear();
      in_template = true;
      continue;
    }
    if (text::starts_with(ln.text, "test ")) {
      in_template = false;
      continue;
    }
    std::string key, value;
    if (!in_template && split_keyword(ln.text, key, value) && key == "scenario") {
      has_header = true;
      scenario_name = value;
    }
    if (in_template) tests_[current].push_back(ln.text);
  }
  if (has_header) scenarios_[scenario_name] = std::string(content);
}

void TemplateLibrary::add_file(const std::string& path) { add_text(text::read_file(path)); }

void TemplateLibrary::add_directory(const std::string& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) return;
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    auto ext = e.path().extension();
    if (ext == ".tpl" || ext == ".scn") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) add_file(f.string());
}

Scenario parse_scenario(std::string_view config_text, const TemplateLibrary* library) {
  ScenarioReader reader(library);
  return reader.read(config_text, 0);
}

std::string serialize_scenario(const Scenario& s) {
  std::string out = "scenario: " + s.name + "\n";
  for (std::size_t i = 0; i < s.tests.size(); ++i) {
    out += "\ntest " + s.tests[i].name + "\n";
    out += "  phase: " + std::string(to_string(s.phase_tags[i])) + "\n";
    for (const auto& a : s.tests[i].actions) out += "  action: " + format_action(a) + "\n";
  }
  return out;
}

}  // namespace iotbed::core
