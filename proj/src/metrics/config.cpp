#include "ledgerlab/metrics/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "ledgerlab/errors.hpp"
#include "ledgerlab/lattice/ledger.hpp"
#include "ledgerlab/metrics/netconfig.hpp"

namespace ledgerlab::metrics {

namespace {

using json = nlohmann::json;

KeySpec boolean(bool v, std::string help) { return {ValueType::boolean, v, {}, {}, {}, std::move(help)}; }
KeySpec integer(std::int64_t v, std::optional<double> lo, std::optional<double> hi, std::string help) {
  return {ValueType::integer, v, lo, hi, {}, std::move(help)};
}
KeySpec number(double v, std::optional<double> lo, std::optional<double> hi, std::string help) {
  return {ValueType::number, v, lo, hi, {}, std::move(help)};
}
KeySpec text(std::string v, std::vector<std::string> choices, std::string help) {
  return {ValueType::text, std::move(v), {}, {}, std::move(choices), std::move(help)};
}
KeySpec numbers(std::vector<double> v, std::optional<double> lo, std::string help) {
  return {ValueType::number_list, std::move(v), lo, {}, {}, std::move(help)};
}

std::map<std::string, KeySpec> build_schema() {
  std::map<std::string, KeySpec> s;
  s["scenario.name"] = text("custom", {}, "report label");
  s["scenario.paradigm"] = text("blockchain", {"blockchain", "lattice"}, "ledger paradigm");
  s["scenario.horizon_s"] = number(86'400, 0, {}, "simulated seconds");
  s["scenario.observer"] = integer(-1, -1, {}, "observer node; -1 is the last node");

  s["net.nodes"] = integer(3, 1, 10'000, "node count");
  s["net.base_latency_ms"] = number(100, 0, {}, "one-way base latency");
  s["net.jitter_ms"] = number(0, 0, {}, "uniform jitter half-width");
  s["net.drop_prob"] = number(0, 0, 1, "per-message drop probability");
  s["net.topology"] = text("full_mesh", {"full_mesh", "ring"}, "peer graph");
  s["net.partitions"] = text("", {}, "START-END:a,b|c,d entries separated by ';' (seconds, node ids)");

  s["pow.mode"] = text("lottery", {"lottery", "grind"}, "mining mode");
  s["pow.difficulty_bits"] = integer(12, 0, 24, "initial grind difficulty");
  s["pow.target_interval_s"] = number(600, 1e-9, {}, "target block interval");
  s["pow.retarget_window"] = integer(16, 0, {}, "blocks per retarget; 0 disables");
  s["pow.hash_rates"] = numbers({1, 1}, 0, "hash rate per miner node (node i gets entry i)");

  s["pos.slot_interval_s"] = number(12, 1e-9, {}, "proposal slot length");
  s["pos.stakes"] = numbers({40, 30, 20, 10}, 0, "deposit per validator node");
  s["pos.faulty_validator"] = integer(-1, -1, {}, "validator that proposes invalid blocks; -1 none");
  s["pos.liquid_supply"] = integer(1000, 0, {}, "staking tokens outside deposits");

  s["chain.proof"] = text("pow", {"pow", "pos"}, "leader election");
  s["chain.capacity_units"] = integer(1'000'000, 1, {}, "block capacity in weight units");
  s["chain.block_reward"] = integer(50, 0, {}, "tokens credited to the producer");
  s["chain.confirm_threshold"] = integer(6, 1, {}, "confirmations for the confirmed predicate");
  s["chain.prune_keep_recent"] = integer(0, 0, {}, "prune the observer at the end; 0 keeps everything");
  s["chain.fastsync_pivot_offset"] = integer(1024, 1, {}, "fast-sync pivot distance from head");
  s["chain.accounts"] = integer(1000, 2, {}, "sending accounts");
  s["chain.account_balance"] = integer(1'000'000'000'000, 1, {}, "genesis balance per account");
  s["chain.tx_weight"] = integer(250, 1, {}, "transaction weight");
  s["chain.tx_weight_max"] = integer(0, 0, {}, "upper weight for uniform weights; 0 means fixed");
  s["chain.tx_rate_per_s"] = number(0, 0, {}, "issuance rate; 0 keeps the mempool saturated");
  s["chain.target_blocks"] = integer(0, 0, {}, "stop once the observer's chain is this tall; 0 runs to the horizon");
  s["chain.survival_max_depth"] = integer(8, 1, 64, "deepest confirmation depth tracked");

  s["lattice.accounts"] = integer(20, 1, {}, "user accounts");
  s["lattice.reps"] = integer(4, 1, {}, "representatives (the first nodes)");
  s["lattice.rep_balance"] = integer(1'000'000, 0, {}, "balance of each representative account");
  s["lattice.rep_balances"] = numbers({}, 0, "per-representative balances; overrides rep_balance");
  s["lattice.user_balance"] = integer(1000, 0, {}, "balance of each user account");
  s["lattice.send_rate_per_account"] = number(0.1, 0, {}, "sends per second per online account");
  s["lattice.send_amount"] = integer(1, 1, {}, "tokens per send");
  s["lattice.quorum_fraction"] = number(0.5, 0, 1, "strict quorum over delegated weight");
  s["lattice.cement_delay_s"] = number(-1, {}, {}, "quiet period before cementing; negative disables");
  s["lattice.gap_buffer"] = integer(10'000, 0, {}, "parked blocks per node");
  s["lattice.spam_difficulty_bits"] = integer(0, 0, 24, "anti-spam work per block");
  s["lattice.offline_accounts"] = integer(0, 0, {}, "user accounts that never come online");
  s["lattice.forks"] = integer(0, 0, {}, "double spends to inject");
  s["lattice.fork_start_s"] = number(5, 0, {}, "time of the first double spend");
  s["lattice.fork_interval_s"] = number(5, 0, {}, "spacing between double spends");
  s["lattice.revote_interval_s"] = number(1, 1e-9, {}, "honest representative revote period");
  s["lattice.stubborn_reps"] = integer(0, 0, {}, "representatives (the last ones) that never revote");
  s["lattice.tiers"] = text("", {}, "comma-separated tier per node; empty means all historical");
  s["lattice.receive_delay_s"] = number(0, 0, {}, "owner delay before receiving a pending send");

  s["fault.breach_conservation"] = boolean(false, "test hook: credit tokens outside the rules mid-run");

  s["sweep.key"] = text("", {}, "config key varied across variants");
  s["sweep.values"] = numbers({}, {}, "values for sweep.key");
  return s;
}

std::string type_name(ValueType t) {
  switch (t) {
    case ValueType::boolean: return "boolean";
    case ValueType::integer: return "integer";
    case ValueType::number: return "number";
    case ValueType::text: return "string";
    case ValueType::number_list: return "list of numbers";
  }
  return "value";
}

[[noreturn]] void fail(std::string_view key, const std::string& why) {
  throw Error(ErrorCode::config, "config key '" + std::string(key) + "': " + why);
}

const KeySpec& spec_of(std::string_view key) {
  const auto& schema = config_schema();
  auto it = schema.find(std::string(key));
  if (it == schema.end()) throw Error(ErrorCode::config, "unknown config key '" + std::string(key) + "'");
  return it->second;
}

std::string format_number(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

void check_bounds(std::string_view key, const KeySpec& spec, double v) {
  if (!std::isfinite(v) && !(key == "lattice.cement_delay_s" && v > 0)) fail(key, "must be finite");
  if (spec.min && v < *spec.min) fail(key, "must be >= " + format_number(*spec.min));
  if (spec.max && v > *spec.max) fail(key, "must be <= " + format_number(*spec.max));
}

ConfigValue from_json_value(std::string_view key, const KeySpec& spec, const json& v) {
  switch (spec.type) {
    case ValueType::boolean:
      if (!v.is_boolean()) fail(key, "expected boolean");
      return v.get<bool>();
    case ValueType::integer:
      if (v.is_number_integer()) return v.get<std::int64_t>();
      if (v.is_number_float() && std::floor(v.get<double>()) == v.get<double>())
        return static_cast<std::int64_t>(v.get<double>());
      fail(key, "expected integer");
    case ValueType::number:
      if (!v.is_number()) fail(key, "expected number");
      return v.get<double>();
    case ValueType::text:
      if (!v.is_string()) fail(key, "expected string");
      return v.get<std::string>();
    case ValueType::number_list: {
      if (!v.is_array()) fail(key, "expected list of numbers");
      std::vector<double> out;
      for (const auto& e : v) {
        if (!e.is_number()) fail(key, "expected list of numbers");
        out.push_back(e.get<double>());
      }
      return out;
    }
  }
  fail(key, "unsupported type");
}

void flatten(const json& doc, const std::string& prefix, std::vector<std::pair<std::string, json>>& out) {
  for (const auto& [k, v] : doc.items()) {
    const std::string key = prefix.empty() ? k : prefix + "." + k;
    if (v.is_object())
      flatten(v, key, out);
    else
      out.emplace_back(key, v);
  }
}

double parse_double(std::string_view key, std::string_view text) {
  const std::string s(text);
  if (s == "inf" || s == "infinity") return std::numeric_limits<double>::infinity();
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    fail(key, "expected number, got '" + s + "'");
  }
  if (used != s.size()) fail(key, "expected number, got '" + s + "'");
  return v;
}

const std::map<std::string, json>& presets() {
  static const std::map<std::string, json> table = [] {
    std::map<std::string, json> p;
    p["bitcoin-baseline"] = {
        {"scenario.name", "bitcoin-baseline"},  {"scenario.paradigm", "blockchain"},
        {"scenario.horizon_s", 1e9},            {"net.nodes", 2},
        {"net.base_latency_ms", 2000},          {"net.jitter_ms", 1000},
        {"pow.mode", "lottery"},                {"pow.target_interval_s", 600},
        {"pow.hash_rates", {1, 1}},             {"chain.capacity_units", 1'000'000},
        {"chain.tx_weight", 250},               {"chain.accounts", 200},
        {"chain.target_blocks", 200},           {"chain.prune_keep_recent", 128},
    };
    p["ethereum-baseline"] = {
        {"scenario.name", "ethereum-baseline"},
        {"scenario.paradigm", "blockchain"},
        {"scenario.horizon_s", 1e9},
        {"net.nodes", 5},
        {"net.base_latency_ms", 150},
        {"net.jitter_ms", 50},
        {"pow.mode", "lottery"},
        {"pow.target_interval_s", 15},
        {"pow.hash_rates", {1, 1, 1, 1}},
        {"chain.capacity_units", 6'700'000},
        {"chain.tx_weight", 30'000},
        {"chain.accounts", 300},
        {"chain.confirm_threshold", 11},
        {"chain.target_blocks", 300},
    };
    p["pos-baseline"] = {
        {"scenario.name", "pos-baseline"},
        {"scenario.paradigm", "blockchain"},
        {"scenario.horizon_s", 1e9},
        {"net.nodes", 5},
        {"net.base_latency_ms", 150},
        {"net.jitter_ms", 50},
        {"chain.proof", "pos"},
        {"pos.slot_interval_s", 12},
        {"pos.stakes", {40, 30, 20, 10}},
        {"pos.faulty_validator", 3},
        {"chain.capacity_units", 1'500'000},
        {"chain.tx_weight", 21'000},
        {"chain.accounts", 200},
        {"chain.target_blocks", 200},
    };
    p["nano-baseline"] = {
        {"scenario.name", "nano-baseline"},
        {"scenario.paradigm", "lattice"},
        {"scenario.horizon_s", 120},
        {"net.nodes", 6},
        {"net.base_latency_ms", 100},
        {"net.jitter_ms", 50},
        {"lattice.reps", 4},
        {"lattice.accounts", 40},
        {"lattice.send_rate_per_account", 0.2},
        {"lattice.offline_accounts", 2},
        {"lattice.cement_delay_s", 10},
    };
    p["nano-scaling"] = {
        {"scenario.name", "nano-scaling"},
        {"scenario.paradigm", "lattice"},
        {"scenario.horizon_s", 60},
        {"net.nodes", 4},
        {"net.base_latency_ms", 100},
        {"net.jitter_ms", 50},
        {"lattice.reps", 3},
        {"lattice.send_rate_per_account", 0.5},
        {"lattice.spam_difficulty_bits", 0},
        {"sweep.key", "lattice.accounts"},
        {"sweep.values", {10, 100}},
    };
    p["fork-stress"] = {
        {"scenario.name", "fork-stress"},
        {"scenario.paradigm", "lattice"},
        {"scenario.horizon_s", 90},
        {"net.nodes", 6},
        {"net.base_latency_ms", 100},
        {"net.jitter_ms", 80},
        {"lattice.reps", 5},
        {"lattice.rep_balances", {300'000, 250'000, 200'000, 150'000, 100'000}},
        {"lattice.stubborn_reps", 1},
        {"lattice.accounts", 20},
        {"lattice.send_rate_per_account", 0.2},
        {"lattice.forks", 10},
        {"lattice.fork_start_s", 5},
        {"lattice.fork_interval_s", 5},
        {"lattice.revote_interval_s", 1},
    };
    p["partition-stress"] = {
        {"scenario.name", "partition-stress"},
        {"scenario.paradigm", "blockchain"},
        {"scenario.horizon_s", 12'000},
        {"net.nodes", 5},
        {"net.base_latency_ms", 500},
        {"net.jitter_ms", 200},
        {"net.partitions", "3000-6000:0,1,4|2,3"},
        {"pow.mode", "lottery"},
        {"pow.target_interval_s", 60},
        {"pow.hash_rates", {1, 1, 1, 1}},
        {"chain.capacity_units", 25'000},
        {"chain.tx_weight", 250},
        {"chain.accounts", 100},
    };
    return p;
  }();
  return table;
}

}  // namespace

const std::map<std::string, KeySpec>& config_schema() {
  static const auto schema = build_schema();
  return schema;
}

std::vector<std::string> preset_names() {
  std::vector<std::string> out;
  for (const auto& [name, doc] : presets()) out.push_back(name);
  return out;
}

std::optional<nlohmann::json> preset(std::string_view name) {
  auto it = presets().find(std::string(name));
  if (it == presets().end()) return std::nullopt;
  return it->second;
}

Config::Config() {
  for (const auto& [key, spec] : config_schema()) values_.emplace(key, spec.fallback);
}

Config Config::from_json(const nlohmann::json& doc, std::string_view origin) {
  if (!doc.is_object()) throw Error(ErrorCode::config, std::string(origin) + ": expected a JSON object");
  Config c;
  if (auto base = doc.find("preset"); base != doc.end()) {
    if (!base->is_string()) fail("preset", "expected string");
    auto p = preset(base->get<std::string>());
    if (!p) fail("preset", "unknown preset '" + base->get<std::string>() + "'");
    c = from_json(*p, base->get<std::string>());
  }
  std::vector<std::pair<std::string, json>> flat;
  flatten(doc, "", flat);
  for (const auto& [key, value] : flat) {
    if (key == "preset") continue;
    const auto& spec = spec_of(key);
    c.set(key, from_json_value(key, spec, value));
  }
  return c;
}

Config Config::load(std::string_view preset_or_path) {
  if (auto p = preset(preset_or_path)) return from_json(*p, preset_or_path);
  const std::string path(preset_or_path);
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::config, "config file not found: " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::config, path + ": " + e.what());
  }
  return from_json(doc, path);
}

void Config::set(std::string_view key, ConfigValue value) {
  const auto& spec = spec_of(key);
  // Integers are accepted where numbers are expected.
  if (spec.type == ValueType::number && std::holds_alternative<std::int64_t>(value))
    value = static_cast<double>(std::get<std::int64_t>(value));
  if (value.index() != static_cast<std::size_t>(spec.type)) fail(key, "expected " + type_name(spec.type));
  if (const auto* i = std::get_if<std::int64_t>(&value)) check_bounds(key, spec, static_cast<double>(*i));
  if (const auto* d = std::get_if<double>(&value)) check_bounds(key, spec, *d);
  if (const auto* l = std::get_if<std::vector<double>>(&value))
    for (double v : *l) check_bounds(key, spec, v);
  if (const auto* t = std::get_if<std::string>(&value); t && !spec.choices.empty()) {
    bool ok = false;
    std::string all;
    for (const auto& c : spec.choices) {
      ok = ok || c == *t;
      all += (all.empty() ? "" : ", ") + c;
    }
    if (!ok) fail(key, "'" + *t + "' is not one of " + all);
  }
  values_.insert_or_assign(std::string(key), std::move(value));
}

void Config::set(std::string_view key, std::string_view text) {
  const auto& spec = spec_of(key);
  const std::string s(text);
  switch (spec.type) {
    case ValueType::boolean:
      if (s == "true" || s == "1") return set(key, ConfigValue{true});
      if (s == "false" || s == "0") return set(key, ConfigValue{false});
      fail(key, "expected boolean, got '" + s + "'");
    case ValueType::integer: {
      std::int64_t v = 0;
      auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc{} || ptr != s.data() + s.size()) {
        // Allow 1e6-style integers.
        const double d = parse_double(key, s);
        if (std::floor(d) != d) fail(key, "expected integer, got '" + s + "'");
        v = static_cast<std::int64_t>(d);
      }
      return set(key, ConfigValue{v});
    }
    case ValueType::number:
      return set(key, ConfigValue{parse_double(key, s)});
    case ValueType::text:
      return set(key, ConfigValue{s});
    case ValueType::number_list: {
      std::vector<double> out;
      std::string body = s;
      if (!body.empty() && body.front() == '[') body = body.substr(1);
      if (!body.empty() && body.back() == ']') body.pop_back();
      std::stringstream ss(body);
      std::string item;
      while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(parse_double(key, item));
      return set(key, ConfigValue{std::move(out)});
    }
  }
}

const ConfigValue& Config::get(std::string_view key, ValueType type) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw Error(ErrorCode::config, "unknown config key '" + std::string(key) + "'");
  if (it->second.index() != static_cast<std::size_t>(type)) fail(key, "read as " + type_name(type));
  return it->second;
}

bool Config::flag(std::string_view key) const { return std::get<bool>(get(key, ValueType::boolean)); }
std::int64_t Config::integer(std::string_view key) const {
  return std::get<std::int64_t>(get(key, ValueType::integer));
}
std::uint64_t Config::count(std::string_view key) const {
  const auto v = integer(key);
  if (v < 0) fail(key, "must not be negative here");
  return static_cast<std::uint64_t>(v);
}
double Config::number(std::string_view key) const { return std::get<double>(get(key, ValueType::number)); }
const std::string& Config::text(std::string_view key) const {
  return std::get<std::string>(get(key, ValueType::text));
}
const std::vector<double>& Config::list(std::string_view key) const {
  return std::get<std::vector<double>>(get(key, ValueType::number_list));
}

void Config::validate() const {
  const auto nodes = count("net.nodes");
  const auto observer = integer("scenario.observer");
  if (observer >= static_cast<std::int64_t>(nodes)) fail("scenario.observer", "exceeds net.nodes");
  parse_partitions(text("net.partitions"), nodes);

  const auto& sweep_key = text("sweep.key");
  if (!sweep_key.empty()) {
    const auto& spec = spec_of(sweep_key);
    if (spec.type != ValueType::integer && spec.type != ValueType::number)
      fail("sweep.key", "must name a numeric key");
    if (list("sweep.values").empty()) fail("sweep.values", "must not be empty when sweep.key is set");
  }

  if (is_lattice()) {
    const auto reps = count("lattice.reps");
    if (reps > nodes) fail("lattice.reps", "exceeds net.nodes");
    const auto& balances = list("lattice.rep_balances");
    if (!balances.empty() && balances.size() != reps) fail("lattice.rep_balances", "needs one entry per representative");
    if (count("lattice.stubborn_reps") > reps) fail("lattice.stubborn_reps", "exceeds lattice.reps");
    if (count("lattice.offline_accounts") > count("lattice.accounts"))
      fail("lattice.offline_accounts", "exceeds lattice.accounts");
    if (count("lattice.accounts") < 2 && count("lattice.forks") > 0)
      fail("lattice.accounts", "double spends need at least two recipients");
    const auto& tiers = text("lattice.tiers");
    if (!tiers.empty()) {
      std::stringstream ss(tiers);
      std::string t;
      std::size_t n = 0;
      while (std::getline(ss, t, ',')) {
        try {
          const auto tier = lattice::parse_tier(t);
          if (tier != lattice::NodeTier::historical && count("lattice.forks") > 0)
            fail("lattice.tiers", "fork scenarios roll back blocks and need historical nodes");
        } catch (const Error& e) {
          if (e.code() == ErrorCode::config && std::string_view(e.what()).starts_with("config key")) throw;
          fail("lattice.tiers", "unknown tier '" + t + "'");
        }
        ++n;
      }
      if (n != nodes) fail("lattice.tiers", "needs one tier per node");
    }
  } else {
    const bool pos = text("chain.proof") == "pos";
    if (pos) {
      const auto& stakes = list("pos.stakes");
      if (stakes.empty()) fail("pos.stakes", "needs at least one validator");
      if (stakes.size() > nodes) fail("pos.stakes", "more validators than nodes");
      double total = 0;
      for (double s : stakes) {
        if (std::floor(s) != s) fail("pos.stakes", "stakes are whole tokens");
        total += s;
      }
      if (total <= 0) fail("pos.stakes", "total stake must be positive");
      if (integer("pos.faulty_validator") >= static_cast<std::int64_t>(stakes.size()))
        fail("pos.faulty_validator", "not a validator index");
    } else {
      const auto& rates = list("pow.hash_rates");
      if (rates.empty()) fail("pow.hash_rates", "needs at least one miner");
      if (rates.size() > nodes) fail("pow.hash_rates", "more miners than nodes");
      double total = 0;
      for (double r : rates) total += r;
      if (total <= 0) fail("pow.hash_rates", "total hash rate must be positive");
    }
    const auto weight = count("chain.tx_weight");
    const auto weight_max = count("chain.tx_weight_max");
    if (weight_max != 0 && weight_max < weight) fail("chain.tx_weight_max", "below chain.tx_weight");
    if (std::max(weight, weight_max) > count("chain.capacity_units"))
      fail("chain.tx_weight", "exceeds chain.capacity_units, no transaction would fit");
    const auto keep = count("chain.prune_keep_recent");
    if (keep != 0 && keep < 128) fail("chain.prune_keep_recent", "below the reorg-safety window of 128");
    if (count("chain.target_blocks") == 0 && !std::isfinite(number("scenario.horizon_s")))
      fail("scenario.horizon_s", "must be finite without chain.target_blocks");
  }
}

std::vector<Config> Config::expand_sweep() const {
  const auto& key = text("sweep.key");
  if (key.empty()) return {*this};
  std::vector<Config> out;
  for (double v : list("sweep.values")) {
    Config variant = *this;
    const auto& spec = spec_of(key);
    if (spec.type == ValueType::integer)
      variant.set(key, ConfigValue{static_cast<std::int64_t>(std::llround(v))});
    else
      variant.set(key, ConfigValue{v});
    variant.set("sweep.key", ConfigValue{std::string()});
    variant.set("sweep.values", ConfigValue{std::vector<double>{}});
    std::ostringstream label;
    label << name() << "[" << key << "=" << v << "]";
    variant.set("scenario.name", ConfigValue{label.str()});
    out.push_back(std::move(variant));
  }
  return out;
}

nlohmann::json Config::to_json() const {
  json out = json::object();
  for (const auto& [key, value] : values_)
    std::visit([&](const auto& v) { out[key] = v; }, value);
  return out;
}

}  // namespace ledgerlab::metrics
