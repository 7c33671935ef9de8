#include "edgeauth/scenario.hpp"

#include <functional>
#include <set>
#include <sstream>

namespace edgeauth {

const EdgeNode& EdgePool::at(const DeviceId& id) const {
  auto it = nodes.find(id);
  if (it == nodes.end()) throw ValidationError("device " + id.str() + " is not in the edge pool");
  return it->second;
}

void ScenarioConfig::validate() const {
  std::vector<std::string> problems;
  const auto check = [&](const std::function<void()>& f) {
    try {
      f();
    } catch (const ValidationError& e) {
      problems.emplace_back(e.what());
    }
  };

  if (peers.size() < 3)
    problems.push_back("at least 3 peers are required, got " + std::to_string(peers.size()));
  std::set<DeviceId> ids;
  for (const auto& p : peers)
    if (!ids.insert(p.id).second) problems.push_back("duplicate device id " + p.id.str());
  for (const auto& [id, node] : edge_pool.nodes)
    if (!ids.insert(id).second) problems.push_back("duplicate device id " + id.str());
  for (const auto& p : peers)
    if (!p.node.pos.observable()) problems.push_back("peer " + p.id.str() + " needs a finite position");
  for (const auto& [id, node] : edge_pool.nodes)
    if (!node.pos.observable()) problems.push_back("pool node " + id.str() + " needs a finite position");

  if (!user_true_pos.observable()) problems.push_back("user position must be finite");
  if (!user_claimed_pos.observable()) problems.push_back("user claimed position must be finite");
  if (!user_velocity.allFinite()) problems.push_back("user velocity must be finite");
  if (user_true_id.empty() || user_claimed_id.empty()) problems.push_back("user ids must be non-empty");
  if (attacker && attacker->id.empty()) problems.push_back("attacker id must be non-empty");

  check([&] { path_loss.validate(); });
  check([&] { noise.validate(); });
  check([&] { admm.validate(); });
  check([&] { threshold_params.validate(); });
  check([&] { cost_params.validate(); });
  if (nu && !(*nu > 0.0)) problems.push_back("auth.nu must be > 0");
  if (epochs < 1) problems.push_back("epochs must be >= 1");
  if (!(dt > 0.0)) problems.push_back("campaign.dt must be > 0");
  if (connectivity_radius && !(*connectivity_radius > 0.0))
    problems.push_back("campaign.connectivity_radius must be > 0");
  for (const auto& [epoch, tau] : tau_schedule)
    if (epoch < 0 || !(tau >= 1.0)) problems.push_back("cost.tau_schedule entries need epoch >= 0 and tau >= 1");

  if (!problems.empty()) {
    std::ostringstream msg;
    msg << "invalid scenario:";
    for (const auto& p : problems) msg << "\n  - " << p;
    throw ValidationError(msg.str());
  }
}

double ScenarioConfig::auth_threshold() const { return nu ? *nu : threshold(threshold_params); }

double ScenarioConfig::tau_at(int epoch) const {
  double tau = cost_params.tau;
  for (const auto& [from, value] : tau_schedule)
    if (from <= epoch) tau = value;
  return tau;
}

EdgePool ScenarioConfig::full_pool() const {
  EdgePool pool = edge_pool;
  for (const auto& p : peers) pool.nodes.insert_or_assign(p.id, p.node);
  return pool;
}

ScenarioConfig ScenarioConfig::with_first_peers(std::size_t n) const {
  ScenarioConfig s = *this;
  if (n < s.peers.size()) s.peers.resize(n);
  return s;
}

PeerState make_peer_state(const DeviceId& id, const EdgeNode& node) {
  PeerState p;
  p.peer = id;
  p.b = node.pos;
  p.x = node.pos.vec();
  p.feature = node.feature;
  return p;
}

TrialOutcome simulate_authentication(const ScenarioConfig& scenario, std::span<const PeerState> peers,
                                     Presence presence, const Position& transmitter_pos, double nu, Rng& rng,
                                     MessageBus& bus) {
  TrialOutcome out;
  out.transmitter = transmitter_pos;
  out.observations.reserve(peers.size());
  for (const auto& peer : peers) {
    DeviceId perceived = scenario.user_true_id;
    if (presence == Presence::Attacker) {
      if (!scenario.attacker) throw ValidationError("attacker trial requested but scenario has no attacker");
      perceived = scenario.attacker->fools(peer.peer) ? scenario.user_claimed_id : scenario.attacker->id;
    }
    out.observations.push_back(observe(peer, transmitter_pos, perceived, scenario.path_loss, scenario.noise, rng));
  }

  const bool all_observable = std::all_of(out.observations.begin(), out.observations.end(),
                                          [](const Observation& o) { return o.observable; });
  if (!all_observable) {
    share_features(out.observations, bus);
    ConsensusResult none;
    none.x0 = Position::unobservable();
    out.decision = authenticate(scenario.user_claimed_id, out.observations, none, scenario.user_claimed_pos, nu);
    return out;
  }

  out.consensus = run_consensus(std::vector<PeerState>(peers.begin(), peers.end()), out.observations, scenario.admm,
                                bus);
  out.decision =
      authenticate(scenario.user_claimed_id, out.observations, *out.consensus, scenario.user_claimed_pos, nu);
  return out;
}

Rng trial_stream(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return Rng(seq);
}

}  // namespace edgeauth
