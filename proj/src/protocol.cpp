#include "edgeauth/protocol.hpp"

#include <algorithm>
#include <limits>
#include <set>

namespace edgeauth {

bool SecureGroup::contains(const DeviceId& id) const {
  return std::find(members.begin(), members.end(), id) != members.end();
}

void SecureGroup::validate() const {
  std::set<DeviceId> seen(members.begin(), members.end());
  if (seen.size() != members.size()) throw ValidationError("secure group has duplicate members");
  if (epoch < 0) throw ValidationError("secure group epoch must be >= 0");
}

namespace {

std::string join_ids(const std::vector<DeviceId>& ids) {
  std::string s;
  for (const auto& id : ids) s += (s.empty() ? "" : ", ") + id.str();
  return s;
}

}  // namespace

MemberUnavailable::MemberUnavailable(std::vector<DeviceId> ids)
    : Error("members unavailable: " + join_ids(ids)), ids_(std::move(ids)) {}

bool node_available(const EdgeNode& node, int epoch, const Position& user_pos, const ScenarioConfig& scenario) {
  if (node.unavailable_epochs.contains(epoch)) return false;
  if (scenario.connectivity_radius && euclidean_distance(node.pos, user_pos) > *scenario.connectivity_radius)
    return false;
  return true;
}

RoundOutcome orchestrate_round(const DeviceId& provider, const SecureGroup& group, const ScenarioConfig& scenario,
                               const EdgePool& pool, Presence presence, const AvailabilityFn& available, Rng& rng,
                               MessageBus& bus) {
  group.validate();
  if (group.members.size() < 3)
    throw ValidationError("insufficient peers: a round needs at least 3 members, group has " +
                          std::to_string(group.members.size()));
  std::vector<DeviceId> missing;
  for (const auto& id : group.members)
    if (!pool.contains(id) || !available(id)) missing.push_back(id);
  if (!missing.empty()) throw MemberUnavailable(std::move(missing));

  // Step 1: collaboration request and agreement.
  for (const auto& id : group.members) bus.publish(Message{MessageKind::CollabRequest, provider, id, 0, {}});
  for (const auto& id : group.members) bus.publish(Message{MessageKind::CollabAck, id, provider, 0, Payload{true}});

  std::vector<PeerState> peers;
  peers.reserve(group.members.size());
  for (const auto& id : group.members) peers.push_back(make_peer_state(id, pool.at(id)));

  Position transmitter = scenario.user_true_pos;
  if (presence == Presence::Attacker) {
    if (!scenario.attacker) throw ValidationError("attacker round requested but scenario has no attacker");
    transmitter = scenario.attacker->pos;
  }

  // Steps 2-4.
  const std::size_t before = bus.peer_traffic();
  auto trial = simulate_authentication(scenario, peers, presence, transmitter, scenario.auth_threshold(), rng, bus);

  RoundOutcome out;
  out.decision = trial.decision;
  out.observations = std::move(trial.observations);
  out.transmitter = transmitter;
  out.iterations = trial.consensus ? trial.consensus->iterations : 0;
  out.consensus = std::move(trial.consensus);
  out.peer_messages = bus.peer_traffic() - before;

  // Step 5.
  for (const auto& id : group.members)
    bus.publish(Message{MessageKind::Decision, id, provider, out.iterations + 1, Payload{out.decision.verdict}});
  return out;
}

GroupUpdate update_group(const SecureGroup& group, const DeviceId& departed, const EdgePool& pool,
                         const Position& x0_prev, const AvailabilityFn& available) {
  if (!group.contains(departed)) throw ValidationError("update_group: " + departed.str() + " is not a member");

  GroupUpdate out;
  out.group = group;
  auto& members = out.group.members;
  members.erase(std::find(members.begin(), members.end(), departed));

  const DeviceId* best = nullptr;
  double best_distance = std::numeric_limits<double>::infinity();
  // std::map iterates in DeviceId order, so strict < keeps the smaller id on ties.
  for (const auto& [id, node] : pool.nodes) {
    if (id == departed || group.contains(id) || !available(id)) continue;
    const double d = distance_or_infinity(x0_prev, node.pos);
    if (best == nullptr || d < best_distance) {
      best = &id;
      best_distance = d;
    }
  }
  if (best) {
    members.push_back(*best);
    out.joined = *best;
  }
  out.below_minimum = members.size() < static_cast<std::size_t>(CostParams::n_min);
  ++out.group.epoch;
  return out;
}

std::optional<LocalizationResult> localize_attacker(const AuthDecision& decision, const ConsensusResult* result,
                                                    const std::optional<Position>& true_attacker_pos) {
  if (decision.verdict != Verdict::IdentitySpoofer || result == nullptr) return std::nullopt;
  if (!result->converged || decision.diverged || !result->x0.observable()) return std::nullopt;
  LocalizationResult loc;
  loc.estimate = result->x0;
  if (true_attacker_pos && true_attacker_pos->observable())
    loc.residual_error = euclidean_distance(result->x0, *true_attacker_pos);
  return loc;
}

namespace {

// Adds nearest available non-members or drops the members farthest from
// `anchor` until the group has `target` members.
void retarget(SecureGroup& group, int target, const EdgePool& pool, const Position& anchor,
              const AvailabilityFn& available, EpochRecord& rec) {
  while (static_cast<int>(group.members.size()) > target) {
    auto farthest = std::max_element(group.members.begin(), group.members.end(), [&](const auto& a, const auto& b) {
      const double da = distance_or_infinity(anchor, pool.at(a).pos);
      const double db = distance_or_infinity(anchor, pool.at(b).pos);
      return da < db || (da == db && a < b);
    });
    rec.dropped.push_back(*farthest);
    group.members.erase(farthest);
  }
  while (static_cast<int>(group.members.size()) < target) {
    const DeviceId* best = nullptr;
    double best_distance = std::numeric_limits<double>::infinity();
    for (const auto& [id, node] : pool.nodes) {
      if (group.contains(id) || !available(id)) continue;
      const double d = distance_or_infinity(anchor, node.pos);
      if (best == nullptr || d < best_distance) {
        best = &id;
        best_distance = d;
      }
    }
    if (!best) break;
    rec.added.push_back(*best);
    group.members.push_back(*best);
  }
}

}  // namespace

std::vector<EpochRecord> run_campaign(const ScenarioConfig& scenario, int epochs, MessageBus& bus,
                                      const DeviceId& provider) {
  if (epochs < 1) throw ValidationError("run_campaign: epochs must be >= 1");
  scenario.validate();

  const EdgePool pool = scenario.full_pool();
  const Vector3 claim_offset = scenario.user_claimed_pos.vec() - scenario.user_true_pos.vec();
  Rng rng(scenario.seed);

  SecureGroup group;
  for (const auto& p : scenario.peers) group.members.push_back(p.id);
  Position x0_prev = scenario.user_claimed_pos;

  std::vector<EpochRecord> records;
  records.reserve(static_cast<std::size_t>(epochs));
  for (int t = 0; t < epochs; ++t) {
    ScenarioConfig now = scenario;
    now.user_true_pos = Position(scenario.user_true_pos.vec() + scenario.user_velocity * scenario.dt * t);
    now.user_claimed_pos = Position(now.user_true_pos.vec() + claim_offset);
    const AvailabilityFn available = [&](const DeviceId& id) {
      return pool.contains(id) && node_available(pool.at(id), t, now.user_true_pos, now);
    };

    EpochRecord rec;
    rec.epoch = t;
    rec.user_pos = now.user_true_pos;
    group.epoch = t;

    // Departures, one replacement each.
    const auto snapshot = group.members;
    for (const auto& id : snapshot) {
      if (available(id)) continue;
      auto upd = update_group(group, id, pool, x0_prev, available);
      rec.departed.push_back(id);
      if (upd.joined) rec.joined.push_back(*upd.joined);
      group = std::move(upd.group);
      group.epoch = t;
    }

    if (scenario.retarget_peers) {
      CostParams cost = scenario.cost_params;
      cost.tau = scenario.tau_at(t);
      cost.n_available = static_cast<int>(
          std::count_if(pool.nodes.begin(), pool.nodes.end(), [&](const auto& kv) { return available(kv.first); }));
      rec.target_peers = peer_count(cost);
      retarget(group, rec.target_peers, pool, x0_prev, available, rec);
    } else {
      // Without retargeting, only top the group back up to the minimum.
      if (group.members.size() < static_cast<std::size_t>(CostParams::n_min))
        retarget(group, CostParams::n_min, pool, x0_prev, available, rec);
      rec.target_peers = static_cast<int>(group.members.size());
    }
    rec.members = group.members;

    try {
      const auto round = orchestrate_round(provider, group, now, pool, Presence::Legitimate, available, rng, bus);
      rec.verdict = round.decision.verdict;
      rec.iterations = round.iterations;
      rec.message_count = round.peer_messages;
      if (round.consensus) {
        rec.x0 = round.consensus->x0;
        rec.converged = round.consensus->converged;
        if (rec.x0.observable()) rec.detection_error = euclidean_distance(rec.x0, now.user_true_pos);
        if (round.consensus->converged && rec.x0.observable()) x0_prev = rec.x0;
      }
    } catch (const Error& e) {
      rec.error = e.what();
    }

    // Availability reports for the next round.
    for (const auto& id : group.members) {
      if (!pool.contains(id)) continue;
      const bool next = node_available(pool.at(id), t + 1,
                                       Position(now.user_true_pos.vec() + scenario.user_velocity * scenario.dt), now);
      bus.publish(Message{MessageKind::AvailabilityReport, id, provider, rec.iterations + 2, Payload{next}});
    }
    records.push_back(std::move(rec));
  }
  return records;
}

}  // namespace edgeauth
