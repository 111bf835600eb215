#pragma once

#include <map>
#include <string>
#include <vector>

#include "bifurc/errors.hpp"

namespace bifurc {

/// Minimal TOML subset for experiment files: [sections], key = value with
/// strings, numbers, booleans and flat arrays, # comments.
struct TomlValue {
  enum class Kind { String, Number, Boolean, Array };
  Kind kind = Kind::Number;
  std::string str;
  double num = 0.0;
  bool boolean = false;
  std::vector<TomlValue> array;

  double as_number() const;
  long long as_int() const;
  const std::string& as_string() const;
  bool as_bool() const;
};

using TomlTable = std::map<std::string, TomlValue>;

struct TomlDoc {
  std::map<std::string, TomlTable> sections;

  const TomlValue* find(const std::string& section, const std::string& key) const;
  double number_or(const std::string& section, const std::string& key, double fallback) const;
  long long int_or(const std::string& section, const std::string& key, long long fallback) const;
  std::string string_or(const std::string& section, const std::string& key,
                        const std::string& fallback) const;
  bool bool_or(const std::string& section, const std::string& key, bool fallback) const;
};

TomlDoc parse_toml(const std::string& text);

}  // namespace bifurc
