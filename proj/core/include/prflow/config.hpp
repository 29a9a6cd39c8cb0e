#ifndef PRFLOW_CONFIG_HPP
#define PRFLOW_CONFIG_HPP

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace prflow::config {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One parsed configuration value: string, number, boolean or (nested) array.
class Value {
 public:
  using Array = std::vector<Value>;

  Value() : v_(0.0) {}
  explicit Value(std::string s) : v_(std::move(s)) {}
  explicit Value(double d) : v_(d) {}
  explicit Value(bool b) : v_(b) {}
  explicit Value(Array a) : v_(std::move(a)) {}

  bool is_array() const { return std::holds_alternative<Array>(v_); }

  double as_double(const std::string& key) const;
  long as_int(const std::string& key) const;
  bool as_bool(const std::string& key) const;
  const std::string& as_string(const std::string& key) const;
  std::vector<double> as_double_array(const std::string& key) const;
  std::vector<std::string> as_string_array(const std::string& key) const;
  std::vector<std::vector<double>> as_double_matrix(const std::string& key) const;

 private:
  std::variant<std::string, double, bool, Array> v_;
};

/// Flat view of a parsed file: keys are "section.name".
class Table {
 public:
  bool has(const std::string& key) const { return values_.count(key) > 0; }
  const Value& get(const std::string& key) const;

  double get_double(const std::string& key) const { return get(key).as_double(key); }
  double get_double(const std::string& key, double fallback) const;
  long get_int(const std::string& key) const { return get(key).as_int(key); }
  long get_int(const std::string& key, long fallback) const;
  std::string get_string(const std::string& key) const { return get(key).as_string(key); }
  std::string get_string(const std::string& key, const std::string& fallback) const;

  void set(const std::string& key, Value v) { values_[key] = std::move(v); }
  const std::map<std::string, Value>& entries() const { return values_; }

 private:
  std::map<std::string, Value> values_;
};

/// Parses the supported TOML-compatible grammar: [section] headers,
/// key = value pairs, '#' comments, quoted strings, booleans, numbers and
/// (nested) arrays. Arrays may span lines until their brackets balance.
Table parse_string(const std::string& text, const std::string& origin = "<string>");
Table parse_file(const std::filesystem::path& path);

}  // namespace prflow::config

#endif  // PRFLOW_CONFIG_HPP
