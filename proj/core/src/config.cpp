#include "prflow/config.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace prflow::config {

namespace {

[[noreturn]] void fail(const std::string& origin, std::size_t line, const std::string& msg) {
  throw ConfigError(origin + ":" + std::to_string(line) + ": " + msg);
}

// Strips a trailing comment that is not inside a quoted string.
std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

std::string trim(const std::string& s) {
  std::size_t a = 0;
  std::size_t b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

int bracket_balance(const std::string& s) {
  int depth = 0;
  bool quoted = false;
  for (char ch : s) {
    if (ch == '"') quoted = !quoted;
    if (quoted) continue;
    if (ch == '[') ++depth;
    if (ch == ']') --depth;
  }
  return depth;
}

class ValueParser {
 public:
  ValueParser(const std::string& text, const std::string& origin, std::size_t line)
      : s_(text), origin_(origin), line_(line) {}

  Value parse() {
    const Value v = parse_value();
    skip_ws();
    if (pos_ != s_.size()) fail(origin_, line_, "trailing characters after value: '" + s_.substr(pos_) + "'");
    return v;
  }

 private:
  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  Value parse_value() {
    skip_ws();
    if (pos_ >= s_.size()) fail(origin_, line_, "missing value");
    const char c = s_[pos_];
    if (c == '"') return parse_quoted();
    if (c == '[') return parse_array();
    return parse_scalar();
  }

  Value parse_quoted() {
    ++pos_;  // opening quote
    std::string out;
    while (pos_ < s_.size() && s_[pos_] != '"') out.push_back(s_[pos_++]);
    if (pos_ >= s_.size()) fail(origin_, line_, "unterminated string");
    ++pos_;  // closing quote
    return Value(std::move(out));
  }

  Value parse_array() {
    ++pos_;  // '['
    Value::Array items;
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == ']') {
      ++pos_;
      return Value(std::move(items));
    }
    while (true) {
      items.push_back(parse_value());
      skip_ws();
      if (pos_ >= s_.size()) fail(origin_, line_, "unterminated array");
      if (s_[pos_] == ',') {
        ++pos_;
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == ']') {  // trailing comma
          ++pos_;
          break;
        }
        continue;
      }
      if (s_[pos_] == ']') {
        ++pos_;
        break;
      }
      fail(origin_, line_, "expected ',' or ']' in array");
    }
    return Value(std::move(items));
  }

  Value parse_scalar() {
    std::size_t end = pos_;
    while (end < s_.size() && s_[end] != ',' && s_[end] != ']' &&
           !std::isspace(static_cast<unsigned char>(s_[end]))) {
      ++end;
    }
    const std::string tok = s_.substr(pos_, end - pos_);
    pos_ = end;
    if (tok == "true") return Value(true);
    if (tok == "false") return Value(false);
    char* parse_end = nullptr;
    const double d = std::strtod(tok.c_str(), &parse_end);
    if (parse_end == tok.c_str() || *parse_end != '\0') {
      fail(origin_, line_, "cannot parse value '" + tok + "'");
    }
    return Value(d);
  }

  const std::string& s_;
  const std::string& origin_;
  std::size_t line_;
  std::size_t pos_ = 0;
};

}  // namespace

double Value::as_double(const std::string& key) const {
  if (const double* d = std::get_if<double>(&v_)) return *d;
  throw ConfigError("'" + key + "' must be a number");
}

long Value::as_int(const std::string& key) const {
  const double d = as_double(key);
  const long l = static_cast<long>(d);
  if (static_cast<double>(l) != d) throw ConfigError("'" + key + "' must be an integer");
  return l;
}

bool Value::as_bool(const std::string& key) const {
  if (const bool* b = std::get_if<bool>(&v_)) return *b;
  throw ConfigError("'" + key + "' must be a boolean");
}

const std::string& Value::as_string(const std::string& key) const {
  if (const std::string* s = std::get_if<std::string>(&v_)) return *s;
  throw ConfigError("'" + key + "' must be a string");
}

std::vector<double> Value::as_double_array(const std::string& key) const {
  const Array* a = std::get_if<Array>(&v_);
  if (!a) throw ConfigError("'" + key + "' must be an array of numbers");
  std::vector<double> out;
  out.reserve(a->size());
  for (const Value& v : *a) out.push_back(v.as_double(key));
  return out;
}

std::vector<std::string> Value::as_string_array(const std::string& key) const {
  const Array* a = std::get_if<Array>(&v_);
  if (!a) throw ConfigError("'" + key + "' must be an array of strings");
  std::vector<std::string> out;
  out.reserve(a->size());
  for (const Value& v : *a) out.push_back(v.as_string(key));
  return out;
}

std::vector<std::vector<double>> Value::as_double_matrix(const std::string& key) const {
  const Array* a = std::get_if<Array>(&v_);
  if (!a) throw ConfigError("'" + key + "' must be an array of arrays");
  std::vector<std::vector<double>> out;
  out.reserve(a->size());
  for (const Value& v : *a) out.push_back(v.as_double_array(key));
  return out;
}

const Value& Table::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("missing required key '" + key + "'");
  return it->second;
}

double Table::get_double(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

long Table::get_int(const std::string& key, long fallback) const {
  return has(key) ? get_int(key) : fallback;
}

std::string Table::get_string(const std::string& key, const std::string& fallback) const {
  return has(key) ? get_string(key) : fallback;
}

Table parse_string(const std::string& text, const std::string& origin) {
  Table table;
  std::istringstream in(text);
  std::string line;
  std::string section;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string body = trim(strip_comment(line));
    if (body.empty()) continue;
    if (body.front() == '[') {
      if (body.back() != ']') fail(origin, line_no, "malformed section header");
      section = trim(body.substr(1, body.size() - 2));
      if (section.empty()) fail(origin, line_no, "empty section name");
      continue;
    }
    const std::size_t eq = body.find('=');
    if (eq == std::string::npos) fail(origin, line_no, "expected 'key = value'");
    const std::string key = trim(body.substr(0, eq));
    if (key.empty()) fail(origin, line_no, "empty key");
    std::string value_text = trim(body.substr(eq + 1));
    // multi-line arrays: keep reading until brackets balance
    const std::size_t start_line = line_no;
    while (bracket_balance(value_text) > 0 && std::getline(in, line)) {
      ++line_no;
      value_text += ' ';
      value_text += trim(strip_comment(line));
    }
    if (bracket_balance(value_text) != 0) fail(origin, start_line, "unbalanced brackets");
    const std::string full_key = section.empty() ? key : section + "." + key;
    table.set(full_key, ValueParser(value_text, origin, start_line).parse());
  }
  return table;
}

Table parse_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_string(ss.str(), path.string());
}

}  // namespace prflow::config
