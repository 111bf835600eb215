#include "bifurc/toml.hpp"

#include <cctype>
#include <sstream>

#include "bifurc/format.hpp"

namespace bifurc {

double TomlValue::as_number() const {
  if (kind != Kind::Number) throw DataError("toml: value is not a number");
  return num;
}

long long TomlValue::as_int() const {
  const double v = as_number();
  const long long i = static_cast<long long>(v);
  if (static_cast<double>(i) != v) throw DataError("toml: value is not an integer");
  return i;
}

const std::string& TomlValue::as_string() const {
  if (kind != Kind::String) throw DataError("toml: value is not a string");
  return str;
}

bool TomlValue::as_bool() const {
  if (kind != Kind::Boolean) throw DataError("toml: value is not a boolean");
  return boolean;
}

const TomlValue* TomlDoc::find(const std::string& section, const std::string& key) const {
  const auto s = sections.find(section);
  if (s == sections.end()) return nullptr;
  const auto k = s->second.find(key);
  return k == s->second.end() ? nullptr : &k->second;
}

double TomlDoc::number_or(const std::string& section, const std::string& key,
                          double fallback) const {
  const TomlValue* v = find(section, key);
  return v ? v->as_number() : fallback;
}

long long TomlDoc::int_or(const std::string& section, const std::string& key,
                          long long fallback) const {
  const TomlValue* v = find(section, key);
  return v ? v->as_int() : fallback;
}

std::string TomlDoc::string_or(const std::string& section, const std::string& key,
                               const std::string& fallback) const {
  const TomlValue* v = find(section, key);
  return v ? v->as_string() : fallback;
}

bool TomlDoc::bool_or(const std::string& section, const std::string& key, bool fallback) const {
  const TomlValue* v = find(section, key);
  return v ? v->as_bool() : fallback;
}

namespace {

std::string strip(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::string strip_comment(const std::string& line) {
  bool in_string = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') in_string = !in_string;
    if (line[i] == '#' && !in_string) return line.substr(0, i);
  }
  return line;
}

TomlValue parse_scalar(const std::string& raw, std::size_t lineno) {
  TomlValue v;
  if (raw.size() >= 2 && raw.front() == '"' && raw.back() == '"') {
    v.kind = TomlValue::Kind::String;
    v.str = raw.substr(1, raw.size() - 2);
    return v;
  }
  if (raw == "true" || raw == "false") {
    v.kind = TomlValue::Kind::Boolean;
    v.boolean = raw == "true";
    return v;
  }
  if (const auto num = parse_double(raw)) {
    v.kind = TomlValue::Kind::Number;
    v.num = *num;
    return v;
  }
  throw DataError("toml: line " + std::to_string(lineno) + ": cannot parse value '" + raw + "'");
}

TomlValue parse_value(const std::string& raw, std::size_t lineno) {
  if (!raw.empty() && raw.front() == '[') {
    if (raw.back() != ']')
      throw DataError("toml: line " + std::to_string(lineno) + ": unterminated array");
    TomlValue v;
    v.kind = TomlValue::Kind::Array;
    std::stringstream ss(raw.substr(1, raw.size() - 2));
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = strip(item);
      if (!item.empty()) v.array.push_back(parse_scalar(item, lineno));
    }
    return v;
  }
  return parse_scalar(raw, lineno);
}

}  // namespace

TomlDoc parse_toml(const std::string& text) {
  TomlDoc doc;
  std::string section;
  std::stringstream ss(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    line = strip(strip_comment(line));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw DataError("toml: line " + std::to_string(lineno) + ": unterminated section header");
      section = strip(line.substr(1, line.size() - 2));
      if (section.empty())
        throw DataError("toml: line " + std::to_string(lineno) + ": empty section name");
      doc.sections[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw DataError("toml: line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = strip(line.substr(0, eq));
    const std::string raw = strip(line.substr(eq + 1));
    if (key.empty() || raw.empty())
      throw DataError("toml: line " + std::to_string(lineno) + ": empty key or value");
    doc.sections[section][key] = parse_value(raw, lineno);
  }
  return doc;
}

}  // namespace bifurc
