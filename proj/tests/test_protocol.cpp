#include "edgeauth/protocol.hpp"

#include <doctest.h>

#include <algorithm>
#include <set>
#include <sstream>

using namespace edgeauth;

namespace {

ScenarioConfig indoor() {
  ScenarioConfig s;
  s.user_true_pos = s.user_claimed_pos = Position(6, 6, 0);
  const std::vector<Vector3> at = {{1, 1, 0}, {9, 2, 0}, {2, 9, 0}, {8, 8, 0}, {5, 3, 0}};
  for (std::size_t i = 0; i < at.size(); ++i)
    s.peers.push_back(PeerSpec{DeviceId("dev" + std::to_string(i + 1)),
                               EdgeNode{Position(at[i]), i == 4 ? FeatureKind::TRA : FeatureKind::RSSI, {}}});
  s.noise.tra_sigma_m = 0.0;
  s.seed = 5;
  return s;
}

SecureGroup group_of(const ScenarioConfig& s) {
  SecureGroup g;
  for (const auto& p : s.peers) g.members.push_back(p.id);
  return g;
}

const AvailabilityFn kAll = [](const DeviceId&) { return true; };

EdgePool fig10_pool() {
  EdgePool pool;
  const std::vector<Vector3> at = {{50, 10, 0},  {70, 15, 0},  {90, 5, 0},   {110, -8, 0}, {130, 0, 0},  {150, -12, 0},
                                   {170, -7, 0}, {190, -9, 0}, {210, 10, 0}, {230, 13, 0}, {250, 5, 0}, {270, 6, 0}};
  for (std::size_t i = 0; i < at.size(); ++i) {
    char name[8];
    std::snprintf(name, sizeof name, "e%02zu", i + 1);
    pool.nodes.emplace(DeviceId(name), EdgeNode{Position(at[i]), FeatureKind::RSSI, {}});
  }
  return pool;
}

}  // namespace

TEST_CASE("indoor round: verdict and message accounting") {
  const auto s = indoor();
  MessageBus bus;
  Rng rng(1);
  const auto out = orchestrate_round(DeviceId("provider"), group_of(s), s, s.full_pool(), Presence::Legitimate, kAll,
                                     rng, bus);
  CHECK(out.decision.verdict == Verdict::Legitimate);
  REQUIRE(out.consensus);
  const std::size_t k = static_cast<std::size_t>(out.consensus->iterations);
  CHECK(out.peer_messages == comm_instances(k, 5));
  CHECK(bus.peer_traffic() == (k + 1) * 5 * 4);
  CHECK(bus.count(MessageKind::CollabRequest) == 5);
  CHECK(bus.count(MessageKind::CollabAck) == 5);
  CHECK(bus.count(MessageKind::Decision) == 5);
  CHECK(bus.total() == bus.log().size());

  // Decisions go to the provider after the last consensus round.
  for (const auto& m : bus.log())
    if (m.kind == MessageKind::Decision) {
      CHECK(m.to == DeviceId("provider"));
      CHECK(m.round == out.iterations + 1);
    }
}

TEST_CASE("message log format") {
  std::vector<Message> msgs = {Message{MessageKind::ParamShare, DeviceId("a"), DeviceId("b"), 3, {}},
                               Message{MessageKind::CollabRequest, DeviceId("provider"), DeviceId("a"), 0, {}}};
  std::ostringstream out;
  write_message_log(out, msgs);
  CHECK(out.str() == "ParamShare,a,b,3\nCollabRequest,provider,a,0\n");

  MessageBus bus;
  CHECK_THROWS_AS(bus.publish(Message{MessageKind::ParamShare, DeviceId("a"), DeviceId("a"), 0, {}}),
                  ValidationError);
  CHECK_THROWS_AS(bus.publish(Message{MessageKind::ParamShare, DeviceId("a"), DeviceId("b"), -1, {}}),
                  ValidationError);
  CHECK(bus.total() == 0);
}

TEST_CASE("round preconditions") {
  const auto s = indoor();
  Rng rng(1);

  SecureGroup two;
  two.members = {DeviceId("dev1"), DeviceId("dev2")};
  MessageBus bus;
  CHECK_THROWS_WITH_AS(
      orchestrate_round(DeviceId("provider"), two, s, s.full_pool(), Presence::Legitimate, kAll, rng, bus),
      doctest::Contains("insufficient peers"), ValidationError);
  CHECK(bus.total() == 0);

  const AvailabilityFn without3 = [](const DeviceId& id) { return id != DeviceId("dev3"); };
  try {
    orchestrate_round(DeviceId("provider"), group_of(s), s, s.full_pool(), Presence::Legitimate, without3, rng, bus);
    FAIL("expected MemberUnavailable");
  } catch (const MemberUnavailable& e) {
    REQUIRE(e.ids().size() == 1);
    CHECK(e.ids()[0] == DeviceId("dev3"));
  }
  CHECK(bus.total() == 0);

  SecureGroup dup = group_of(s);
  dup.members.push_back(DeviceId("dev1"));
  CHECK_THROWS_AS(
      orchestrate_round(DeviceId("provider"), dup, s, s.full_pool(), Presence::Legitimate, kAll, rng, bus),
      ValidationError);
}

TEST_CASE("location spoofer round sends features but no parameters") {
  auto s = indoor();
  s.attacker = AttackerSpec{Position::unobservable(), DeviceId("ghost"), true, {}};
  MessageBus bus;
  Rng rng(2);
  const auto out =
      orchestrate_round(DeviceId("provider"), group_of(s), s, s.full_pool(), Presence::Attacker, kAll, rng, bus);
  CHECK(out.decision.verdict == Verdict::LocationSpoofer);
  CHECK_FALSE(out.consensus);
  CHECK(bus.count(MessageKind::ParamShare) == 0);
  CHECK(bus.count(MessageKind::FeatureShare) == comm_instances(0, 5));
}

TEST_CASE("update_group picks the nearest available node") {
  EdgePool pool = fig10_pool();
  SecureGroup g;
  g.members = {DeviceId("a"), DeviceId("b"), DeviceId("c")};
  g.epoch = 4;
  for (const auto& id : g.members) pool.nodes.emplace(id, EdgeNode{Position(0, 0, 0), FeatureKind::RSSI, {}});

  const auto up = update_group(g, DeviceId("b"), pool, Position(45, 0, 0), kAll);
  REQUIRE(up.joined);
  CHECK(*up.joined == DeviceId("e01"));  // [50, 10]
  CHECK(up.group.epoch == 5);
  CHECK(up.group.members == std::vector<DeviceId>{DeviceId("a"), DeviceId("c"), DeviceId("e01")});
  CHECK_FALSE(up.below_minimum);

  // Only one available candidate, however far.
  const AvailabilityFn only_last = [](const DeviceId& id) { return id == DeviceId("e12") || id.str().size() == 1; };
  const auto single = update_group(g, DeviceId("b"), pool, Position(45, 0, 0), only_last);
  REQUIRE(single.joined);
  CHECK(*single.joined == DeviceId("e12"));

  // Equidistant candidates: smaller id wins.
  EdgePool tie;
  tie.nodes.emplace(DeviceId("zeta"), EdgeNode{Position(1, 0, 0), FeatureKind::RSSI, {}});
  tie.nodes.emplace(DeviceId("alpha"), EdgeNode{Position(-1, 0, 0), FeatureKind::RSSI, {}});
  const auto t = update_group(g, DeviceId("a"), tie, Position(0, 0, 0), kAll);
  REQUIRE(t.joined);
  CHECK(*t.joined == DeviceId("alpha"));

  // Nobody left: the group shrinks below the minimum.
  const AvailabilityFn none = [](const DeviceId&) { return false; };
  const auto empty = update_group(g, DeviceId("a"), pool, Position(0, 0, 0), none);
  CHECK_FALSE(empty.joined);
  CHECK(empty.below_minimum);
  CHECK(empty.group.members.size() == 2);

  CHECK_THROWS_AS(update_group(g, DeviceId("e05"), pool, Position(0, 0, 0), kAll), ValidationError);
}

TEST_CASE("localize_attacker") {
  ConsensusResult r;
  r.x0 = Position(0.1, 9.96, 0);
  r.converged = true;
  AuthDecision d;
  d.verdict = Verdict::IdentitySpoofer;
  const auto loc = localize_attacker(d, &r, Position(0, 10, 0));
  REQUIRE(loc);
  CHECK(loc->estimate == r.x0);
  REQUIRE(loc->residual_error);
  CHECK(*loc->residual_error == doctest::Approx(std::hypot(0.1, 0.04)));
  CHECK_FALSE(localize_attacker(d, &r)->residual_error);

  AuthDecision located = d;
  located.verdict = Verdict::LocationSpoofer;
  CHECK_FALSE(localize_attacker(located, &r));
  AuthDecision ok = d;
  ok.verdict = Verdict::Legitimate;
  CHECK_FALSE(localize_attacker(ok, &r));
  AuthDecision diverged = d;
  diverged.diverged = true;
  CHECK_FALSE(localize_attacker(diverged, &r));
  ConsensusResult stuck = r;
  stuck.converged = false;
  CHECK_FALSE(localize_attacker(d, &stuck));
  CHECK_FALSE(localize_attacker(d, nullptr));
}

TEST_CASE("campaign without movement keeps its group") {
  auto s = indoor();
  MessageBus bus(false);
  const auto records = run_campaign(s, 6, bus);
  REQUIRE(records.size() == 6);
  for (const auto& r : records) {
    CHECK(r.members == records[0].members);
    CHECK(r.departed.empty());
    CHECK(r.error.empty());
    CHECK(r.verdict == Verdict::Legitimate);
    CHECK(r.message_count == comm_instances(static_cast<std::uint64_t>(r.iterations), 5));
  }
}

TEST_CASE("scheduled departure swaps exactly one member") {
  auto s = indoor();
  s.peers[1].node.unavailable_epochs = {3};
  s.edge_pool.nodes.emplace(DeviceId("spare"), EdgeNode{Position(6, 1, 0), FeatureKind::RSSI, {}});
  MessageBus bus(false);
  const auto records = run_campaign(s, 5, bus);
  for (int t = 1; t < 5; ++t) {
    std::set<DeviceId> prev(records[t - 1].members.begin(), records[t - 1].members.end());
    std::set<DeviceId> now(records[t].members.begin(), records[t].members.end());
    std::vector<DeviceId> diff;
    std::set_symmetric_difference(prev.begin(), prev.end(), now.begin(), now.end(), std::back_inserter(diff));
    if (t == 3) {
      CHECK(diff.size() == 2);
      CHECK(records[t].departed == std::vector<DeviceId>{DeviceId("dev2")});
      CHECK(records[t].joined == std::vector<DeviceId>{DeviceId("spare")});
    } else {
      CHECK(diff.empty());
    }
  }
  CHECK(bus.count(MessageKind::AvailabilityReport) == 25);
}

TEST_CASE("campaign keeps going after a failed round") {
  auto s = indoor();
  s.peers.resize(3);
  s.peers[0].node.unavailable_epochs = {1};
  MessageBus bus(false);
  const auto records = run_campaign(s, 3, bus);
  CHECK(records[0].error.empty());
  CHECK_FALSE(records[1].error.empty());
  CHECK_FALSE(records[1].verdict);
  // dev1 is back and tops the group up again.
  CHECK(records[2].error.empty());
  CHECK(records[2].added == std::vector<DeviceId>{DeviceId("dev1")});
}
