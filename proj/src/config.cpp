#include "dtn/config.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace dtn {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

uint64_t fnv1a(const std::string& s) {
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

Config Config::parse_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_string(ss.str(), path);
}

Config Config::parse_string(const std::string& text, const std::string& origin) {
  Config cfg;
  cfg.origin_ = origin;
  cfg.hash_ = fnv1a(text);
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError(origin + ":" + std::to_string(lineno) +
                          ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty())
        throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty section name");
      cfg.sections_[section];
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(lineno) +
                        ": expected 'key = value', got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
    cfg.sections_[section][key] = val;
    cfg.lines_[section][key] = lineno;
  }
  return cfg;
}

void Config::fail(const std::string& section, const std::string& key,
                  const std::string& what) const {
  std::string loc = origin_;
  auto si = lines_.find(section);
  if (si != lines_.end()) {
    auto ki = si->second.find(key);
    if (ki != si->second.end()) loc += ":" + std::to_string(ki->second);
  }
  throw ConfigError(loc + ": [" + section + "] " + key + ": " + what);
}

bool Config::has(const std::string& section, const std::string& key) const {
  auto si = sections_.find(section);
  return si != sections_.end() && si->second.count(key) > 0;
}

bool Config::has_section(const std::string& section) const {
  return sections_.count(section) > 0;
}

std::string Config::get_string(const std::string& section,
                               const std::string& key) const {
  auto si = sections_.find(section);
  if (si == sections_.end() || !si->second.count(key))
    throw ConfigError(origin_ + ": missing required key [" + section + "] " + key);
  return si->second.at(key);
}

std::string Config::get_string(const std::string& section, const std::string& key,
                               const std::string& fallback) const {
  return has(section, key) ? get_string(section, key) : fallback;
}

double Config::get_double(const std::string& section, const std::string& key) const {
  const std::string v = get_string(section, key);
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    fail(section, key, "expected a number, got '" + v + "'");
  }
}

double Config::get_double(const std::string& section, const std::string& key,
                          double fallback) const {
  return has(section, key) ? get_double(section, key) : fallback;
}

long long Config::get_int(const std::string& section, const std::string& key) const {
  const std::string v = get_string(section, key);
  try {
    std::size_t pos = 0;
    const long long i = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return i;
  } catch (const std::exception&) {
    fail(section, key, "expected an integer, got '" + v + "'");
  }
}

long long Config::get_int(const std::string& section, const std::string& key,
                          long long fallback) const {
  return has(section, key) ? get_int(section, key) : fallback;
}

bool Config::get_bool(const std::string& section, const std::string& key,
                      bool fallback) const {
  if (!has(section, key)) return fallback;
  const std::string v = get_string(section, key);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  fail(section, key, "expected a boolean, got '" + v + "'");
}

std::vector<double> Config::get_doubles(const std::string& section,
                                        const std::string& key) const {
  const std::string v = get_string(section, key);
  std::istringstream in(v);
  std::vector<double> out;
  std::string tok;
  while (in >> tok) {
    try {
      std::size_t pos = 0;
      out.push_back(std::stod(tok, &pos));
      if (pos != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      fail(section, key, "expected numbers, got '" + tok + "'");
    }
  }
  if (out.empty()) fail(section, key, "expected at least one number");
  return out;
}

}  // namespace dtn
