#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>

namespace climbsim {

/// Plain key-value configuration with [section] headers. Keys are stored as
/// "section.key". Everything has an embedded default, so an empty config is
/// valid. Lookup precedence (flags > file > defaults) is handled by callers
/// simply set()-ing flag overrides after load().
class Config {
 public:
  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  void set(const std::string& key, double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    values_[key] = os.str();
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  double get_double(const std::string& key, double def) const {
    auto it = values_.find(key);
    return it == values_.end() ? def : std::stod(it->second);
  }

  int get_int(const std::string& key, int def) const {
    auto it = values_.find(key);
    return it == values_.end() ? def : std::stoi(it->second);
  }

  bool get_bool(const std::string& key, bool def) const {
    auto it = values_.find(key);
    if (it == values_.end()) return def;
    const std::string& v = it->second;
    return v == "1" || v == "true" || v == "on" || v == "yes";
  }

  std::string get_string(const std::string& key, const std::string& def) const {
    auto it = values_.find(key);
    return it == values_.end() ? def : it->second;
  }

  void load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open " + path);
    std::string line, section;
    while (std::getline(in, line)) {
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      line = trim(line);
      if (line.empty()) continue;
      if (line.front() == '[' && line.back() == ']') {
        section = trim(line.substr(1, line.size() - 2));
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw std::runtime_error("config: bad line '" + line + "' in " + path);
      std::string key = trim(line.substr(0, eq));
      std::string val = trim(line.substr(eq + 1));
      if (!section.empty()) key = section + "." + key;
      values_[key] = val;
    }
  }

  void save(const std::string& path) const {
    std::ofstream out(path);
    out << serialize();
  }

  /// Canonical text form (sorted keys); the hash is computed over this.
  std::string serialize() const {
    std::ostringstream os;
    for (const auto& [k, v] : values_) os << k << " = " << v << "\n";
    return os.str();
  }

  /// FNV-1a over the canonical serialization.
  uint64_t hash() const {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : serialize()) {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001b3ULL;
    }
    return h;
  }

 private:
  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
  }

  std::map<std::string, std::string> values_;
};

}  // namespace climbsim
