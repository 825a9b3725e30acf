#include "pmthermo/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "pmthermo/error.hpp"

namespace pmthermo {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0;
  std::size_t b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

// Drops a trailing comment that is not inside a string.
std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

bool valid_name(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-' && c != '.') return false;
  }
  return true;
}

class LineError {
 public:
  explicit LineError(std::string m) : message(std::move(m)) {}
  std::string message;
};

double parse_number(const std::string& text) {
  const std::string s = trim(text);
  if (s.empty()) throw LineError("empty value");
  double v = 0.0;
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  if (*begin == '+') ++begin;
  const auto res = std::from_chars(begin, end, v);
  if (res.ec != std::errc() || res.ptr != end) throw LineError("not a number: '" + s + "'");
  if (!std::isfinite(v)) throw LineError("non-finite number: '" + s + "'");
  return v;
}

std::string parse_string(const std::string& text) {
  const std::string s = trim(text);
  if (s.size() < 2 || s.front() != '"' || s.back() != '"') throw LineError("malformed string: " + s);
  const std::string inner = s.substr(1, s.size() - 2);
  if (inner.find('"') != std::string::npos) throw LineError("embedded quote in string: " + s);
  return inner;
}

std::vector<std::string> split_items(const std::string& body) {
  std::vector<std::string> items;
  std::string cur;
  bool quoted = false;
  for (char c : body) {
    if (c == '"') quoted = !quoted;
    if (c == ',' && !quoted) {
      items.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!trim(cur).empty()) items.push_back(trim(cur));
  for (const std::string& it : items) {
    if (it.empty()) throw LineError("empty array element");
  }
  return items;
}

ConfigDocument::Value parse_value(const std::string& text) {
  const std::string s = trim(text);
  if (s.empty()) throw LineError("missing value");
  if (s == "true") return true;
  if (s == "false") return false;
  if (s.front() == '"') return parse_string(s);
  if (s.front() == '[') {
    if (s.back() != ']') throw LineError("unterminated array: " + s);
    const std::vector<std::string> items = split_items(s.substr(1, s.size() - 2));
    if (!items.empty() && items.front().front() == '"') {
      std::vector<std::string> out;
      for (const std::string& it : items) out.push_back(parse_string(it));
      return out;
    }
    std::vector<double> out;
    for (const std::string& it : items) out.push_back(parse_number(it));
    return out;
  }
  return parse_number(s);
}

}  // namespace

ConfigDocument ConfigDocument::parse(const std::string& text, const std::string& source) {
  ConfigDocument doc;
  doc.source_ = source;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    const std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    auto fail = [&](const std::string& msg) {
      std::ostringstream os;
      os << source << ":" << lineno << ": " << msg;
      throw ConfigError(os.str());
    };
    if (line.front() == '[') {
      if (line.back() != ']') fail("malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (!valid_name(section)) fail("invalid section name '" + section + "'");
      if (doc.data_.count(section)) fail("duplicate section [" + section + "]");
      doc.data_[section];
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) fail("expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (!valid_name(key)) fail("invalid key '" + key + "'");
    if (doc.data_[section].count(key)) fail("duplicate key '" + key + "'");
    try {
      doc.data_[section][key] = parse_value(line.substr(eq + 1));
    } catch (const LineError& e) {
      fail(e.message + " (key '" + key + "')");
    }
    doc.lines_[section][key] = lineno;
  }
  return doc;
}

ConfigDocument ConfigDocument::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path);
}

bool ConfigDocument::has(const std::string& section, const std::string& key) const {
  auto s = data_.find(section);
  return s != data_.end() && s->second.count(key) > 0;
}

bool ConfigDocument::has_section(const std::string& section) const {
  seen_sections_.insert(section);
  return data_.count(section) > 0;
}

std::string ConfigDocument::where(const std::string& section, const std::string& key) const {
  return section.empty() ? key : "[" + section + "] " + key;
}

const ConfigDocument::Value& ConfigDocument::get(const std::string& section, const std::string& key) const {
  auto s = data_.find(section);
  if (s == data_.end() || !s->second.count(key)) {
    throw ConfigError(source_ + ": missing required key " + where(section, key));
  }
  used_.insert({section, key});
  seen_sections_.insert(section);
  return s->second.at(key);
}

double ConfigDocument::number(const std::string& section, const std::string& key) const {
  const Value& v = get(section, key);
  if (const double* d = std::get_if<double>(&v)) return *d;
  throw ConfigError(source_ + ": " + where(section, key) + " must be a number");
}

double ConfigDocument::number(const std::string& section, const std::string& key, double fallback) const {
  return has(section, key) ? number(section, key) : fallback;
}

int ConfigDocument::integer(const std::string& section, const std::string& key) const {
  const double d = number(section, key);
  if (d != std::floor(d) || std::abs(d) > 1e9) {
    throw ConfigError(source_ + ": " + where(section, key) + " must be an integer");
  }
  return static_cast<int>(d);
}

int ConfigDocument::integer(const std::string& section, const std::string& key, int fallback) const {
  return has(section, key) ? integer(section, key) : fallback;
}

bool ConfigDocument::boolean(const std::string& section, const std::string& key, bool fallback) const {
  if (!has(section, key)) return fallback;
  const Value& v = get(section, key);
  if (const bool* b = std::get_if<bool>(&v)) return *b;
  throw ConfigError(source_ + ": " + where(section, key) + " must be true or false");
}

std::string ConfigDocument::string(const std::string& section, const std::string& key) const {
  const Value& v = get(section, key);
  if (const std::string* s = std::get_if<std::string>(&v)) return *s;
  throw ConfigError(source_ + ": " + where(section, key) + " must be a quoted string");
}

std::string ConfigDocument::string(const std::string& section, const std::string& key,
                                   const std::string& fallback) const {
  return has(section, key) ? string(section, key) : fallback;
}

std::vector<double> ConfigDocument::numbers(const std::string& section, const std::string& key) const {
  const Value& v = get(section, key);
  if (const auto* a = std::get_if<std::vector<double>>(&v)) return *a;
  if (const double* d = std::get_if<double>(&v)) return {*d};
  throw ConfigError(source_ + ": " + where(section, key) + " must be an array of numbers");
}

std::vector<double> ConfigDocument::numbers(const std::string& section, const std::string& key,
                                            const std::vector<double>& fallback) const {
  return has(section, key) ? numbers(section, key) : fallback;
}

std::vector<int> ConfigDocument::integers(const std::string& section, const std::string& key) const {
  std::vector<int> out;
  for (double d : numbers(section, key)) {
    if (d != std::floor(d) || std::abs(d) > 1e9) {
      throw ConfigError(source_ + ": " + where(section, key) + " must hold integers");
    }
    out.push_back(static_cast<int>(d));
  }
  return out;
}

void ConfigDocument::reject_unused() const {
  for (const auto& [section, keys] : data_) {
    if (keys.empty() && !seen_sections_.count(section)) {
      throw ConfigError(source_ + ": unknown section [" + section + "]");
    }
    for (const auto& [key, value] : keys) {
      if (!used_.count({section, key})) {
        std::ostringstream os;
        os << source_ << ":" << lines_.at(section).at(key) << ": unknown key " << where(section, key);
        throw ConfigError(os.str());
      }
    }
  }
}

}  // namespace pmthermo
