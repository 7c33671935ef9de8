#pragma once

#include "edgeauth/consensus.hpp"
#include "edgeauth/decision.hpp"
#include "edgeauth/measurement.hpp"
#include "edgeauth/types.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <vector>

namespace edgeauth {

/// An edge node that can serve as a cooperative peer.
struct EdgeNode {
  Position pos;
  FeatureKind feature = FeatureKind::RSSI;
  std::set<int> unavailable_epochs;
};

struct EdgePool {
  std::map<DeviceId, EdgeNode> nodes;

  bool contains(const DeviceId& id) const { return nodes.contains(id); }
  const EdgeNode& at(const DeviceId& id) const;
};

struct PeerSpec {
  DeviceId id;
  EdgeNode node;
};

struct AttackerSpec {
  Position pos;  // unobservable for a location spoofer
  DeviceId id;
  bool fools_all = true;
  std::set<DeviceId> fooled;  // used when !fools_all

  /// Whether `peer` reads the forged (claimed) ID instead of `id`.
  bool fools(const DeviceId& peer) const { return fools_all || fooled.contains(peer); }
};

struct ScenarioConfig {
  Position user_true_pos;
  Position user_claimed_pos;
  Vector3 user_velocity = Vector3::Zero();  // m/s
  DeviceId user_true_id{"user"};
  DeviceId user_claimed_id{"user"};
  std::optional<AttackerSpec> attacker;

  std::vector<PeerSpec> peers;  // initial cooperative group, in declaration order
  EdgePool edge_pool;           // further nodes that may join later

  PathLossParams path_loss;
  NoiseModel noise;
  AdmmConfig admm;
  ThresholdParams threshold_params;
  CostParams cost_params;
  std::optional<double> nu;  // fixed threshold; otherwise threshold(threshold_params)

  std::uint64_t seed = 0;
  int epochs = 1;
  double dt = 1.0;                            // seconds per epoch
  std::optional<double> connectivity_radius;  // nodes farther than this from the user are unavailable
  std::map<int, double> tau_schedule;         // epoch -> tau from that epoch on
  bool retarget_peers = false;                // resize the group to peer_count() each epoch

  /// Throws ValidationError listing every violated invariant.
  void validate() const;

  double auth_threshold() const;

  /// Message budget in force at `epoch`.
  double tau_at(int epoch) const;

  /// Initial peers and edge pool merged into one pool.
  EdgePool full_pool() const;

  /// The same scenario restricted to its first `n` peers.
  ScenarioConfig with_first_peers(std::size_t n) const;
};

enum class Presence { Legitimate, Attacker };

struct TrialOutcome {
  std::vector<Observation> observations;
  std::optional<ConsensusResult> consensus;
  AuthDecision decision;
  Position transmitter;
};

PeerState make_peer_state(const DeviceId& id, const EdgeNode& node);

/// One pass of measurement, consensus and decision for whoever is
/// transmitting (`presence`) from `transmitter_pos`. Emits FeatureShare and
/// ParamShare traffic on `bus`.
TrialOutcome simulate_authentication(const ScenarioConfig& scenario, std::span<const PeerState> peers,
                                     Presence presence, const Position& transmitter_pos, double nu, Rng& rng,
                                     MessageBus& bus);

/// Independent stream for trial `index` of a run seeded with `seed`.
Rng trial_stream(std::uint64_t seed, std::uint64_t index);

}  // namespace edgeauth
