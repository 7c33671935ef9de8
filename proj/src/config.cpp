#include "edgeauth/config.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>
#include <vector>

namespace edgeauth {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_words(std::string_view s, char extra_sep = ' ') {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ' ' || c == '\t' || c == extra_sep) {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

struct Entry {
  std::string key;
  std::string value;
  int line = 0;
};

class Parser {
 public:
  explicit Parser(std::string origin) : origin_(std::move(origin)) {}

  [[noreturn]] void fail(int line, const std::string& what) const {
    throw ConfigError(origin_ + ":" + std::to_string(line) + ": " + what);
  }

  [[noreturn]] void fail(const Entry& e, const std::string& what) const { fail(e.line, e.key + ": " + what); }

  std::vector<Entry> tokenize(std::string_view text) const {
    std::vector<Entry> entries;
    std::map<std::string, int> seen;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
      const auto end = std::min(text.find('\n', pos), text.size());
      std::string_view line = text.substr(pos, end - pos);
      pos = end + 1;
      ++line_no;

      const auto hash = line.find('#');
      if (hash != std::string_view::npos) line = line.substr(0, hash);
      line = trim(line);
      if (line.empty()) continue;

      const auto eq = line.find('=');
      if (eq == std::string_view::npos) fail(line_no, "expected `key = value`");
      Entry e;
      e.key = std::string(trim(line.substr(0, eq)));
      std::string_view value = trim(line.substr(eq + 1));
      if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
      e.value = std::string(value);
      e.line = line_no;
      if (e.key.empty()) fail(line_no, "empty key");
      if (auto [it, fresh] = seen.emplace(e.key, line_no); !fresh)
        fail(line_no, "duplicate key " + e.key + " (first set on line " + std::to_string(it->second) + ")");
      entries.push_back(std::move(e));
    }
    return entries;
  }

  double number(const Entry& e) const { return number(e, e.value); }

  double number(const Entry& e, const std::string& text) const {
    if (text == "inf" || text == "+inf") return std::numeric_limits<double>::infinity();
    if (text == "-inf") return -std::numeric_limits<double>::infinity();
    double v = 0.0;
    const auto* first = text.data();
    const auto* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) fail(e, "expected a number, got \"" + text + "\"");
    return v;
  }

  long long integer(const Entry& e, const std::string& text) const {
    long long v = 0;
    const auto* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), last, v);
    if (ec != std::errc() || ptr != last) fail(e, "expected an integer, got \"" + text + "\"");
    return v;
  }

  int int_value(const Entry& e) const {
    const auto v = integer(e, e.value);
    if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) fail(e, "integer out of range");
    return static_cast<int>(v);
  }

  std::uint64_t u64(const Entry& e) const {
    std::uint64_t v = 0;
    const auto* last = e.value.data() + e.value.size();
    auto [ptr, ec] = std::from_chars(e.value.data(), last, v);
    if (ec != std::errc() || ptr != last) fail(e, "expected an unsigned 64-bit integer, got \"" + e.value + "\"");
    return v;
  }

  bool boolean(const Entry& e) const {
    if (e.value == "true" || e.value == "yes" || e.value == "1") return true;
    if (e.value == "false" || e.value == "no" || e.value == "0") return false;
    fail(e, "expected true or false, got \"" + e.value + "\"");
  }

  Vector3 vec3(const Entry& e) const {
    const auto words = split_words(e.value, ',');
    if (words.size() != 2 && words.size() != 3) fail(e, "expected 2 or 3 coordinates, got \"" + e.value + "\"");
    Vector3 v = Vector3::Zero();
    for (std::size_t i = 0; i < words.size(); ++i) v[static_cast<Eigen::Index>(i)] = number(e, words[i]);
    if (!v.allFinite()) fail(e, "coordinates must be finite");
    return v;
  }

  DeviceId id(const Entry& e, const std::string& text) const {
    if (text.empty()) fail(e, "device id must be non-empty");
    return DeviceId(text);
  }

  FeatureKind feature(const Entry& e) const {
    try {
      return feature_from_string(e.value);
    } catch (const ValidationError& err) {
      fail(e, err.what());
    }
  }

  std::set<int> epochs(const Entry& e) const {
    std::set<int> out;
    for (const auto& w : split_words(e.value, ',')) {
      const auto v = integer(e, w);
      if (v < 0 || v > std::numeric_limits<int>::max()) fail(e, "epochs must be non-negative integers");
      out.insert(static_cast<int>(v));
    }
    return out;
  }

 private:
  std::string origin_;
};

struct NodeDraft {
  std::optional<Vector3> pos;
  FeatureKind feature = FeatureKind::RSSI;
  std::set<int> unavailable;
  int line = 0;
};

}  // namespace

ScenarioConfig parse_scenario(std::string_view text, const std::string& origin) {
  Parser p(origin);
  const auto entries = p.tokenize(text);

  ScenarioConfig s;
  bool have_seed = false;
  std::optional<Vector3> user_pos, claimed_pos, attacker_pos;
  bool attacker_unobservable = false;
  std::optional<DeviceId> claimed_id, attacker_id;
  std::optional<std::string> fools;

  std::vector<std::pair<DeviceId, NodeDraft>> peers;  // declaration order
  const auto draft = [&](std::vector<std::pair<DeviceId, NodeDraft>>& list, const DeviceId& id) -> NodeDraft& {
    auto it = std::find_if(list.begin(), list.end(), [&](const auto& kv) { return kv.first == id; });
    if (it != list.end()) return it->second;
    return list.emplace_back(id, NodeDraft{}).second;
  };

  using Setter = std::function<void(const Entry&)>;
  const std::map<std::string, Setter> scalars = {
      {"scenario.seed", [&](const Entry& e) { s.seed = p.u64(e); have_seed = true; }},
      {"scenario.epochs", [&](const Entry& e) { s.epochs = p.int_value(e); }},
      {"scenario.user.pos", [&](const Entry& e) { user_pos = p.vec3(e); }},
      {"scenario.user.claimed_pos", [&](const Entry& e) { claimed_pos = p.vec3(e); }},
      {"scenario.user.velocity", [&](const Entry& e) { s.user_velocity = p.vec3(e); }},
      {"scenario.user.id", [&](const Entry& e) { s.user_true_id = p.id(e, e.value); }},
      {"scenario.user.claimed_id", [&](const Entry& e) { claimed_id = p.id(e, e.value); }},
      {"scenario.attacker.pos",
       [&](const Entry& e) {
         if (e.value == "unobservable")
           attacker_unobservable = true;
         else
           attacker_pos = p.vec3(e);
       }},
      {"scenario.attacker.id", [&](const Entry& e) { attacker_id = p.id(e, e.value); }},
      {"scenario.attacker.fools", [&](const Entry& e) { fools = e.value; }},
      {"auth.nu", [&](const Entry& e) { s.nu = p.number(e); }},
      {"path_loss.A", [&](const Entry& e) { s.path_loss.A = p.number(e); }},
      {"path_loss.B", [&](const Entry& e) { s.path_loss.B = p.number(e); }},
      {"path_loss.C", [&](const Entry& e) { s.path_loss.C = p.number(e); }},
      {"path_loss.carrier_ghz", [&](const Entry& e) { s.path_loss.carrier_ghz = p.number(e); }},
      {"path_loss.tx_power_dbm", [&](const Entry& e) { s.path_loss.tx_power_dbm = p.number(e); }},
      {"noise.snr_db", [&](const Entry& e) { s.noise.snr_db = p.number(e); }},
      {"noise.tra_sigma_m", [&](const Entry& e) { s.noise.tra_sigma_m = p.number(e); }},
      {"admm.rho", [&](const Entry& e) { s.admm.rho = p.number(e); }},
      {"admm.rho_growth", [&](const Entry& e) { s.admm.rho_growth = p.number(e); }},
      {"admm.rho_max", [&](const Entry& e) { s.admm.rho_max = p.number(e); }},
      {"admm.stop_eps", [&](const Entry& e) { s.admm.stop_eps = p.number(e); }},
      {"admm.k_max", [&](const Entry& e) { s.admm.k_max = p.int_value(e); }},
      {"threshold.mu_a", [&](const Entry& e) { s.threshold_params.mu_a = p.number(e); }},
      {"threshold.sigma_a", [&](const Entry& e) { s.threshold_params.sigma_a = p.number(e); }},
      {"threshold.epsilon", [&](const Entry& e) { s.threshold_params.epsilon = p.number(e); }},
      {"threshold.iota0", [&](const Entry& e) { s.threshold_params.iota0 = p.number(e); }},
      {"threshold.iota", [&](const Entry& e) { s.threshold_params.iota = p.number(e); }},
      {"cost.tau", [&](const Entry& e) { s.cost_params.tau = p.number(e); }},
      {"cost.k_ave", [&](const Entry& e) { s.cost_params.k_ave = p.number(e); }},
      {"cost.n_available", [&](const Entry& e) { s.cost_params.n_available = p.int_value(e); }},
      {"cost.tau_schedule",
       [&](const Entry& e) {
         for (const auto& item : split_words(e.value, ',')) {
           const auto colon = item.find(':');
           if (colon == std::string::npos) p.fail(e, "expected epoch:tau pairs, got \"" + item + "\"");
           const auto epoch = p.integer(e, item.substr(0, colon));
           if (epoch < 0 || epoch > std::numeric_limits<int>::max()) p.fail(e, "epoch out of range");
           s.tau_schedule[static_cast<int>(epoch)] = p.number(e, item.substr(colon + 1));
         }
       }},
      {"campaign.dt", [&](const Entry& e) { s.dt = p.number(e); }},
      {"campaign.connectivity_radius", [&](const Entry& e) { s.connectivity_radius = p.number(e); }},
      {"campaign.retarget", [&](const Entry& e) { s.retarget_peers = p.boolean(e); }},
  };

  std::vector<std::pair<DeviceId, NodeDraft>> pool_list;
  for (const auto& e : entries) {
    if (auto it = scalars.find(e.key); it != scalars.end()) {
      it->second(e);
      continue;
    }
    // peers.<id>.<field> and pool.<id>.<field>
    const auto first_dot = e.key.find('.');
    const auto last_dot = e.key.rfind('.');
    const std::string section = e.key.substr(0, first_dot);
    if ((section == "peers" || section == "pool") && first_dot != last_dot) {
      const std::string name = e.key.substr(first_dot + 1, last_dot - first_dot - 1);
      const std::string field = e.key.substr(last_dot + 1);
      NodeDraft& node = draft(section == "peers" ? peers : pool_list, p.id(e, name));
      if (node.line == 0) node.line = e.line;
      if (field == "pos")
        node.pos = p.vec3(e);
      else if (field == "feature")
        node.feature = p.feature(e);
      else if (field == "unavailable")
        node.unavailable = p.epochs(e);
      else
        p.fail(e, "unknown field \"" + field + "\" (expected pos, feature or unavailable)");
      continue;
    }
    p.fail(e, "unknown key");
  }

  if (!have_seed) throw ConfigError(origin + ": seed required (set scenario.seed)");
  if (!user_pos) throw ConfigError(origin + ": scenario.user.pos is required");
  s.user_true_pos = Position(*user_pos);
  s.user_claimed_pos = Position(claimed_pos.value_or(*user_pos));
  s.user_claimed_id = claimed_id.value_or(s.user_true_id);

  const auto to_node = [&](const DeviceId& id, const NodeDraft& d) {
    if (!d.pos) p.fail(d.line, "device " + id.str() + " has no pos");
    EdgeNode n;
    n.pos = Position(*d.pos);
    n.feature = d.feature;
    n.unavailable_epochs = d.unavailable;
    return n;
  };
  for (const auto& [id, d] : peers) s.peers.push_back(PeerSpec{id, to_node(id, d)});
  for (const auto& [id, d] : pool_list) s.edge_pool.nodes.emplace(id, to_node(id, d));

  if (attacker_pos || attacker_unobservable || attacker_id || fools) {
    if (!attacker_pos && !attacker_unobservable) throw ConfigError(origin + ": scenario.attacker.pos is required");
    AttackerSpec a;
    a.pos = attacker_unobservable ? Position::unobservable() : Position(*attacker_pos);
    a.id = attacker_id.value_or(DeviceId("attacker"));
    if (fools && *fools != "all") {
      a.fools_all = false;
      for (const auto& w : split_words(*fools, ','))
        if (w != "none") a.fooled.insert(DeviceId(w));
    }
    s.attacker = std::move(a);
  }

  s.validate();
  return s;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config " + path.string() + ": " + std::generic_category().message(errno));
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), path.string());
}

}  // namespace edgeauth
