#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "expgnn/model.hpp"

namespace expgnn::cli {

/// Bad command line or config file.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Every key a run may set, model keys included.
const std::vector<std::string>& known_keys();

/// Resolved key/value settings. Later sources override earlier ones:
/// config file, then --set pairs, then dedicated flags.
class Settings {
 public:
  /// Lines of "key = value" or "key value"; '#' starts a comment.
  void load_file(const std::filesystem::path& path);
  /// "key=value".
  void set_pair(const std::string& pair);
  void set(const std::string& key, std::string value);

  bool has(const std::string& key) const { return values_.contains(key); }
  std::optional<std::string> get(const std::string& key) const;
  std::string str(const std::string& key, std::string fallback) const;
  std::size_t count(const std::string& key, std::size_t fallback) const;
  std::uint64_t u64(const std::string& key, std::uint64_t fallback) const;
  double real(const std::string& key, double fallback) const;
  bool flag(const std::string& key) const;

  /// Applies the model keys that are present onto `cfg`.
  void apply_model(ModelConfig& cfg) const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace expgnn::cli
