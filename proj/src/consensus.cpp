#include "edgeauth/consensus.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace edgeauth {

void AdmmConfig::validate() const {
  if (!(rho > 0.0) || !std::isfinite(rho)) throw ValidationError("admm.rho must be > 0");
  if (!(rho_growth >= 1.0) || !std::isfinite(rho_growth)) throw ValidationError("admm.rho_growth must be >= 1");
  if (!(rho_max >= rho) || !std::isfinite(rho_max)) throw ValidationError("admm.rho_max must be >= admm.rho");
  if (!(stop_eps > 0.0)) throw ValidationError("admm.stop_eps must be > 0");
  if (k_max < 1) throw ValidationError("admm.k_max must be >= 1");
}

double local_objective(const Vector3& x, const PeerState& peer, const Observation& obs) {
  return range_residual(x, peer.b.vec(), obs.distance());
}

Vector3 x_update(const PeerState& peer, const Observation& obs, const Vector3& xbar, const AdmmConfig& cfg) {
  const double range = obs.distance();
  return range_prox<double>(peer.b.vec(), range, xbar - peer.y / cfg.rho, cfg.rho);
}

void share_features(std::span<const Observation> observations, MessageBus& bus) {
  std::vector<DeviceId> ids;
  ids.reserve(observations.size());
  for (const auto& o : observations) ids.push_back(o.peer);
  bus.broadcast_all(MessageKind::FeatureShare, ids, 0, [&](std::size_t i) -> Payload {
    if (!observations[i].observable) return Payload{false};
    return Payload{observations[i].distance()};
  });
}

namespace {

void check_inputs(const std::vector<PeerState>& peers, std::span<const Observation> observations) {
  if (peers.size() < 3)
    throw ValidationError("insufficient peers: consensus needs at least 3, got " + std::to_string(peers.size()));
  if (peers.size() != observations.size()) throw ValidationError("peer and observation lists differ in length");
  for (std::size_t n = 0; n < peers.size(); ++n) {
    if (peers[n].peer != observations[n].peer)
      throw ValidationError("peer/observation lists misaligned at index " + std::to_string(n));
    if (!observations[n].observable)
      throw ValidationError("peer " + peers[n].peer.str() + " cannot observe the user");
    observations[n].validate();
    if (!peers[n].b.observable()) throw ValidationError("peer position must be finite");
  }
  std::vector<DeviceId> ids;
  for (const auto& p : peers) ids.push_back(p.peer);
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) throw ValidationError("duplicate peer id");
}

}  // namespace

ConsensusResult run_consensus(std::vector<PeerState> peers, std::span<const Observation> observations,
                              const AdmmConfig& cfg, MessageBus& bus) {
  cfg.validate();
  check_inputs(peers, observations);
  const std::size_t n_peers = peers.size();

  // Reductions always run in DeviceId order, independent of input order.
  std::vector<std::size_t> order(n_peers);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return peers[a].peer < peers[b].peer; });
  const auto mean_x = [&] {
    Vector3 s = Vector3::Zero();
    for (std::size_t n : order) s += peers[n].x;
    return Vector3(s / static_cast<double>(n_peers));
  };

  std::vector<DeviceId> ids;
  for (const auto& p : peers) ids.push_back(p.peer);

  share_features(observations, bus);

  for (auto& p : peers) {
    p.x = p.b.vec();
    p.y.setZero();
  }
  Vector3 xbar = mean_x();

  ConsensusResult result;
  result.residual_trace.reserve(64);
  std::vector<Vector3> next(n_peers);
  bool finite = true;

  AdmmConfig step_cfg = cfg;
  int k = 0;
  while (k < cfg.k_max) {
    ++k;
    double residual = 0.0;
    for (std::size_t n = 0; n < n_peers; ++n) {
      next[n] = x_update(peers[n], observations[n], xbar, step_cfg);
      residual = std::max(residual, (next[n] - peers[n].x).norm());
    }
    for (std::size_t n = 0; n < n_peers; ++n) peers[n].x = next[n];

    bus.broadcast_all(MessageKind::ParamShare, ids, k, [&](std::size_t i) { return Payload{peers[i].x}; });

    xbar = mean_x();
    double gap = 0.0;
    for (auto& p : peers) {
      p.y += step_cfg.rho * (p.x - xbar);
      gap = std::max(gap, (p.x - xbar).norm());
    }
    step_cfg.rho = std::min(cfg.rho_max, step_cfg.rho * cfg.rho_growth);

    result.residual_trace.push_back(residual);
    if (cfg.record_trajectory) result.trajectory.push_back(next);

    if (!std::isfinite(residual) || !xbar.allFinite()) {
      finite = false;
      break;
    }
    if (residual <= cfg.stop_eps && gap <= cfg.stop_eps) {
      result.converged = true;
      break;
    }
  }

  result.iterations = k;
  result.x0 = finite ? Position(xbar) : Position::unobservable();
  result.peers = std::move(peers);
  return result;
}

}  // namespace edgeauth
