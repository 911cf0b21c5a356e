#include "config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace metastab::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string item; std::getline(in, item, ',');) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <class T>
bool parse_int(const std::string& s, T& out) {
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace

Config::Config(std::vector<Field> fields) : fields_(std::move(fields)) {
  for (auto& f : fields_) f.key = normalize(f.key);
}

std::string Config::normalize(std::string key) {
  std::replace(key.begin(), key.end(), '-', '_');
  return key;
}

const Field* Config::find(const std::string& key) const {
  for (const auto& f : fields_) {
    if (f.key == key) return &f;
  }
  return nullptr;
}

void Config::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  load_text(ss.str(), path);
}

void Config::load_text(const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = origin + ":" + std::to_string(number) + ": ";
    if (eq == std::string::npos) throw ConfigError(where + "expected `key = value`");
    const std::string key = normalize(trim(line.substr(0, eq)));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(where + "missing key before `=`");
    if (find(key) == nullptr) throw ConfigError(where + "unknown field '" + key + "'");
    if (value.empty()) throw ConfigError(where + "field '" + key + "' has no value");
    file_[key] = value;
  }
}

void Config::set_override(const std::string& key, const std::string& value) {
  const std::string k = normalize(key);
  if (find(k) == nullptr) throw ConfigError("unknown field '" + k + "'");
  overrides_[k] = value;
}

std::optional<std::string> Config::maybe(const std::string& key) const {
  if (auto it = overrides_.find(key); it != overrides_.end()) return it->second;
  if (auto it = file_.find(key); it != file_.end()) return it->second;
  const Field* f = find(key);
  if (f == nullptr) throw std::logic_error("field '" + key + "' is not declared");
  if (!f->fallback.empty()) return f->fallback;
  return std::nullopt;
}

bool Config::has(const std::string& key) const { return maybe(key).has_value(); }

std::string Config::text(const std::string& key) const {
  auto v = maybe(key);
  if (!v) throw ConfigError("missing required field '" + key + "'");
  return *v;
}

std::size_t Config::size(const std::string& key) const {
  const std::string v = text(key);
  std::size_t out = 0;
  if (!parse_int(v, out)) throw ConfigError("field '" + key + "': expected a non-negative integer, got '" + v + "'");
  return out;
}

long Config::integer(const std::string& key) const {
  const std::string v = text(key);
  long out = 0;
  if (!parse_int(v, out)) throw ConfigError("field '" + key + "': expected an integer, got '" + v + "'");
  return out;
}

std::uint64_t Config::u64(const std::string& key) const {
  const std::string v = text(key);
  std::uint64_t out = 0;
  if (!parse_int(v, out)) throw ConfigError("field '" + key + "': expected a non-negative integer, got '" + v + "'");
  return out;
}

double Config::real(const std::string& key) const {
  const std::string v = text(key);
  if (v == "inf" || v == "infinity") return INFINITY;
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || std::isnan(out)) {
    throw ConfigError("field '" + key + "': expected a number, got '" + v + "'");
  }
  return out;
}

bool Config::boolean(const std::string& key) const {
  const std::string v = text(key);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("field '" + key + "': expected true or false, got '" + v + "'");
}

std::vector<std::size_t> Config::sizes(const std::string& key) const {
  std::vector<std::size_t> out;
  for (const auto& item : split_list(text(key))) {
    std::size_t v = 0;
    if (!parse_int(item, v)) throw ConfigError("field '" + key + "': invalid list entry '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError("field '" + key + "': list is empty");
  return out;
}

std::vector<double> Config::reals(const std::string& key) const {
  std::vector<double> out;
  for (const auto& item : split_list(text(key))) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc() || ptr != item.data() + item.size()) {
      throw ConfigError("field '" + key + "': invalid list entry '" + item + "'");
    }
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError("field '" + key + "': list is empty");
  return out;
}

std::map<std::string, std::string> Config::echo() const {
  std::map<std::string, std::string> out;
  for (const auto& f : fields_) {
    if (auto v = maybe(f.key)) out[f.key] = *v;
  }
  return out;
}

std::string Config::echo_text() const {
  std::string out;
  for (const auto& [k, v] : echo()) out += k + " = " + v + "\n";
  return out;
}

}  // namespace metastab::cli
