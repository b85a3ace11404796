#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>

namespace eskit {

/// Minimal sectioned "key = value" config reader with '#' comments.
/// Values keep their raw text; typed getters parse on demand and report
/// file:line on failure. Angles are written in degrees, rates in rad/s
/// unless the value carries an "rpm" or "deg" suffix.
class ConfigFile {
public:
  static ConfigFile load(const std::filesystem::path& file);
  static ConfigFile parse_text(const std::string& text, const std::string& name);

  bool has(const std::string& section, const std::string& key) const;
  /// Raw string (throws ConfigError when missing).
  std::string get(const std::string& section, const std::string& key) const;
  std::string get_or(const std::string& section, const std::string& key,
                     const std::string& fallback) const;

  double number(const std::string& section, const std::string& key) const;
  double number_or(const std::string& section, const std::string& key, double fallback) const;
  /// Accepts plain rad/s or an "rpm" suffix.
  double rate(const std::string& section, const std::string& key) const;
  /// Value in degrees (optionally suffixed "deg"), returned in radians.
  double angle(const std::string& section, const std::string& key) const;
  double angle_or(const std::string& section, const std::string& key,
                  double fallback_rad) const;

  const std::string& name() const { return name_; }

private:
  struct Entry {
    std::string value;
    int line = 0;
  };
  std::map<std::string, std::map<std::string, Entry>> sections_;
  std::string name_;

  const Entry& entry(const std::string& section, const std::string& key) const;
  double parse_number(const Entry& e, const std::string& key) const;
};

}  // namespace eskit
