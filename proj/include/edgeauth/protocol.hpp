#pragma once

#include "edgeauth/bus.hpp"
#include "edgeauth/scenario.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace edgeauth {

/// The cooperative peers of epoch t, in join order.
struct SecureGroup {
  std::vector<DeviceId> members;
  int epoch = 0;

  bool contains(const DeviceId& id) const;
  void validate() const;
};

/// Raised when a round starts with a member that is no longer available.
class MemberUnavailable : public Error {
 public:
  MemberUnavailable(std::vector<DeviceId> ids);
  const std::vector<DeviceId>& ids() const { return ids_; }

 private:
  std::vector<DeviceId> ids_;
};

using AvailabilityFn = std::function<bool(const DeviceId&)>;

/// A node is available in epoch `epoch` unless its schedule says otherwise or
/// it is farther than the scenario's connectivity radius from `user_pos`.
bool node_available(const EdgeNode& node, int epoch, const Position& user_pos, const ScenarioConfig& scenario);

struct RoundOutcome {
  AuthDecision decision;
  std::optional<ConsensusResult> consensus;
  std::vector<Observation> observations;
  Position transmitter;
  int iterations = 0;              // K, 0 when no consensus ran
  std::size_t peer_messages = 0;   // FeatureShare + ParamShare of this round
};

/// One authentication round: CollabRequest/CollabAck with every member,
/// observation and FeatureShare broadcast, consensus with ParamShare
/// exchange, and one Decision message per member to the provider.
/// Throws ValidationError for fewer than 3 members and MemberUnavailable if
/// `available` rejects a member; in both cases nothing is published.
RoundOutcome orchestrate_round(const DeviceId& provider, const SecureGroup& group, const ScenarioConfig& scenario,
                               const EdgePool& pool, Presence presence, const AvailabilityFn& available, Rng& rng,
                               MessageBus& bus);

struct GroupUpdate {
  SecureGroup group;
  std::optional<DeviceId> joined;  // empty when no replacement was available
  bool below_minimum = false;
};

/// Replaces `departed` with the available non-member closest to `x0_prev`
/// (ties go to the smaller DeviceId) and advances the epoch.
GroupUpdate update_group(const SecureGroup& group, const DeviceId& departed, const EdgePool& pool,
                         const Position& x0_prev, const AvailabilityFn& available);

struct LocalizationResult {
  Position estimate;
  std::optional<double> residual_error;
};

/// The consensus point, if the verdict is IdentitySpoofer and the peers
/// agreed on one.
std::optional<LocalizationResult> localize_attacker(const AuthDecision& decision, const ConsensusResult* result,
                                                    const std::optional<Position>& true_attacker_pos = std::nullopt);

struct EpochRecord {
  int epoch = 0;
  Position user_pos;
  std::vector<DeviceId> members;  // group that ran (or tried to run) the round
  std::vector<DeviceId> departed;
  std::vector<DeviceId> joined;   // replacements, one per departure that had a candidate
  std::vector<DeviceId> added;    // admitted by peer-count retargeting
  std::vector<DeviceId> dropped;  // removed by peer-count retargeting
  int target_peers = 0;
  std::optional<Verdict> verdict;
  Position x0 = Position::unobservable();
  bool converged = false;  // a converged x0 becomes the anchor for later replacements
  std::optional<double> detection_error;
  int iterations = 0;
  std::size_t message_count = 0;
  std::string error;
};

/// Mobility campaign: moves the user by velocity * dt per epoch, replaces
/// departed members, optionally retargets the group size, authenticates the
/// legitimate user and collects availability reports. A group that has
/// fallen below 3 members admits the nearest available nodes again.
std::vector<EpochRecord> run_campaign(const ScenarioConfig& scenario, int epochs, MessageBus& bus,
                                      const DeviceId& provider = DeviceId("provider"));

}  // namespace edgeauth
