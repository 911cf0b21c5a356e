#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace metastab::cli {

/// Malformed or missing configuration; maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Field {
  std::string key;
  std::string help;
  /// Empty means the field has no default.
  std::string fallback;
  bool flag = false;
};

/// Flat `key = value` settings. Keys use underscores; `--t-max` on the
/// command line and `t_max` in a file name the same field.
class Config {
 public:
  explicit Config(std::vector<Field> fields);

  const std::vector<Field>& fields() const { return fields_; }

  /// Reads `key = value` lines; `#` starts a comment. Unknown keys are errors.
  void load_file(const std::string& path);
  void load_text(const std::string& text, const std::string& origin);
  /// Command-line values win over file values.
  void set_override(const std::string& key, const std::string& value);

  bool has(const std::string& key) const;
  std::string text(const std::string& key) const;
  std::optional<std::string> maybe(const std::string& key) const;
  std::size_t size(const std::string& key) const;
  long integer(const std::string& key) const;
  std::uint64_t u64(const std::string& key) const;
  /// Accepts `inf` for unbounded quantities.
  double real(const std::string& key) const;
  bool boolean(const std::string& key) const;
  std::vector<std::size_t> sizes(const std::string& key) const;
  std::vector<double> reals(const std::string& key) const;

  /// Every field with its resolved value (defaults included), sorted by key.
  std::map<std::string, std::string> echo() const;
  std::string echo_text() const;

  static std::string normalize(std::string key);

 private:
  const Field* find(const std::string& key) const;

  std::vector<Field> fields_;
  std::map<std::string, std::string> file_;
  std::map<std::string, std::string> overrides_;
};

}  // namespace metastab::cli
