#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

namespace ledgerlab::metrics {

enum class ValueType { boolean, integer, number, text, number_list };

using ConfigValue = std::variant<bool, std::int64_t, double, std::string, std::vector<double>>;

struct KeySpec {
  ValueType type = ValueType::number;
  ConfigValue fallback;
  std::optional<double> min;
  std::optional<double> max;
  std::vector<std::string> choices;
  std::string help;
};

/// Every accepted key with its type, default and bounds.
const std::map<std::string, KeySpec>& config_schema();

/// Flat scenario configuration keyed by dotted names. Every key has a typed
/// default; loading only overrides. All errors are Error(config) with the
/// offending key in the message.
class Config {
 public:
  Config();

  /// A bundled preset name, or a path to a JSON file holding one flat object
  /// (nested objects are flattened into dotted keys). A file may name a
  /// preset under "preset" to inherit from it.
  static Config load(std::string_view preset_or_path);
  static Config from_json(const nlohmann::json& doc, std::string_view origin = "config");

  /// Parses `text` according to the key's declared type (KEY=VALUE overrides).
  void set(std::string_view key, std::string_view text);
  void set(std::string_view key, const char* text) { set(key, std::string_view(text)); }
  void set(std::string_view key, ConfigValue value);

  bool flag(std::string_view key) const;
  std::int64_t integer(std::string_view key) const;
  std::uint64_t count(std::string_view key) const;
  double number(std::string_view key) const;
  const std::string& text(std::string_view key) const;
  const std::vector<double>& list(std::string_view key) const;

  /// Cross-key checks that single-key bounds cannot express.
  void validate() const;

  std::string name() const { return text("scenario.name"); }
  bool is_lattice() const { return text("scenario.paradigm") == "lattice"; }

  /// Variants produced by sweep.key / sweep.values; a config without a sweep
  /// yields itself.
  std::vector<Config> expand_sweep() const;

  nlohmann::json to_json() const;

 private:
  const ConfigValue& get(std::string_view key, ValueType type) const;
  std::map<std::string, ConfigValue, std::less<>> values_;
};

std::vector<std::string> preset_names();
std::optional<nlohmann::json> preset(std::string_view name);

}  // namespace ledgerlab::metrics
