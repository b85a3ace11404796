#include "eskit/config.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "eskit/errors.hpp"

namespace eskit {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

ConfigFile ConfigFile::parse_text(const std::string& text, const std::string& name) {
  ConfigFile cfg;
  cfg.name_ = name;
  std::istringstream in(text);
  std::string line, section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("unterminated section header", name + ":" + std::to_string(line_no));
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("expected 'key = value'", name + ":" + std::to_string(line_no));
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigError("empty key or value", name + ":" + std::to_string(line_no));
    cfg.sections_[section][key] = Entry{value, line_no};
  }
  return cfg;
}

ConfigFile ConfigFile::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open config file", file.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_text(buf.str(), file.string());
}

bool ConfigFile::has(const std::string& section, const std::string& key) const {
  const auto s = sections_.find(section);
  return s != sections_.end() && s->second.count(key) > 0;
}

const ConfigFile::Entry& ConfigFile::entry(const std::string& section,
                                           const std::string& key) const {
  const auto s = sections_.find(section);
  if (s == sections_.end() || !s->second.count(key))
    throw ConfigError("missing key '" + key + "' in section [" + section + "]", name_);
  return s->second.at(key);
}

std::string ConfigFile::get(const std::string& section, const std::string& key) const {
  return entry(section, key).value;
}

std::string ConfigFile::get_or(const std::string& section, const std::string& key,
                               const std::string& fallback) const {
  return has(section, key) ? get(section, key) : fallback;
}

double ConfigFile::parse_number(const Entry& e, const std::string& key) const {
  std::istringstream ss(e.value);
  double v = 0.0;
  if (!(ss >> v))
    throw ConfigError("value of '" + key + "' is not a number: '" + e.value + "'",
                      name_ + ":" + std::to_string(e.line));
  std::string suffix;
  ss >> suffix;
  if (!suffix.empty())
    throw ConfigError("unexpected suffix '" + suffix + "' on '" + key + "'",
                      name_ + ":" + std::to_string(e.line));
  return v;
}

double ConfigFile::number(const std::string& section, const std::string& key) const {
  return parse_number(entry(section, key), key);
}

double ConfigFile::number_or(const std::string& section, const std::string& key,
                             double fallback) const {
  return has(section, key) ? number(section, key) : fallback;
}

double ConfigFile::rate(const std::string& section, const std::string& key) const {
  const Entry& e = entry(section, key);
  std::istringstream ss(e.value);
  double v = 0.0;
  if (!(ss >> v))
    throw ConfigError("value of '" + key + "' is not a number: '" + e.value + "'",
                      name_ + ":" + std::to_string(e.line));
  std::string suffix;
  ss >> suffix;
  if (suffix.empty()) return v;  // rad/s
  if (suffix == "rpm") return v * 2 * std::numbers::pi / 60.0;
  throw ConfigError("unknown rate suffix '" + suffix + "' on '" + key + "'",
                    name_ + ":" + std::to_string(e.line));
}

double ConfigFile::angle(const std::string& section, const std::string& key) const {
  const Entry& e = entry(section, key);
  std::istringstream ss(e.value);
  double v = 0.0;
  if (!(ss >> v))
    throw ConfigError("value of '" + key + "' is not a number: '" + e.value + "'",
                      name_ + ":" + std::to_string(e.line));
  std::string suffix;
  ss >> suffix;
  if (!suffix.empty() && suffix != "deg")
    throw ConfigError("unknown angle suffix '" + suffix + "' on '" + key + "'",
                      name_ + ":" + std::to_string(e.line));
  return v * std::numbers::pi / 180.0;
}

double ConfigFile::angle_or(const std::string& section, const std::string& key,
                            double fallback_rad) const {
  return has(section, key) ? angle(section, key) : fallback_rad;
}

}  // namespace eskit
