#include "settings.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>

#include "expgnn/errors.hpp"

namespace expgnn::cli {

namespace {

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <class T>
T parse(const std::string& key, const std::string& text) {
  T value{};
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || end != text.data() + text.size())
    throw ConfigError("bad value '" + text + "' for " + key);
  return value;
}

}  // namespace

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k{
        // run
        "task", "seed", "steps", "batch_size", "resamples", "threads", "log_every", "lr", "out", "checkpoint",
        "no_random_init", "no_expanding",
        // task suites
        "train_nodes", "eval_count", "calibration_samples",
        // datasets
        "family", "nodes", "edge_prob", "labeler", "count", "source",
        // calibrate
        "samples", "validation_samples",
        // gradcheck
        "ops", "probes", "tolerance", "h", "negative_control",
        // wlcheck
        "random_pairs",
    };
    for (const auto& [key, value] : config_entries(ModelConfig{})) k.push_back(key);
    return k;
  }();
  return keys;
}

void Settings::load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto split = line.find('=');
    if (split == std::string::npos) split = line.find_first_of(" \t");
    if (split == std::string::npos)
      throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": expected key = value");
    set(trim(line.substr(0, split)), trim(line.substr(split + 1)));
  }
}

void Settings::set_pair(const std::string& pair) {
  const auto eq = pair.find('=');
  if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + pair + "'");
  set(trim(pair.substr(0, eq)), trim(pair.substr(eq + 1)));
}

void Settings::set(const std::string& key, std::string value) {
  const auto& keys = known_keys();
  if (std::find(keys.begin(), keys.end(), key) == keys.end()) throw ConfigError("unknown key '" + key + "'");
  values_[key] = std::move(value);
}

std::optional<std::string> Settings::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::string Settings::str(const std::string& key, std::string fallback) const {
  return get(key).value_or(std::move(fallback));
}

std::size_t Settings::count(const std::string& key, std::size_t fallback) const {
  const auto v = get(key);
  return v ? parse<std::size_t>(key, *v) : fallback;
}

std::uint64_t Settings::u64(const std::string& key, std::uint64_t fallback) const {
  const auto v = get(key);
  return v ? parse<std::uint64_t>(key, *v) : fallback;
}

double Settings::real(const std::string& key, double fallback) const {
  const auto v = get(key);
  return v ? parse<double>(key, *v) : fallback;
}

bool Settings::flag(const std::string& key) const {
  const auto v = get(key);
  if (!v) return false;
  if (*v == "1" || *v == "true" || *v == "yes" || *v == "on") return true;
  if (*v == "0" || *v == "false" || *v == "no" || *v == "off") return false;
  throw ConfigError("bad boolean '" + *v + "' for " + key);
}

void Settings::apply_model(ModelConfig& cfg) const {
  for (const auto& [key, value] : config_entries(ModelConfig{})) {
    if (const auto v = get(key)) {
      try {
        set_config_entry(cfg, key, *v);
      } catch (const ContractError& e) {
        throw ConfigError(e.what());
      }
    }
  }
}

}  // namespace expgnn::cli
