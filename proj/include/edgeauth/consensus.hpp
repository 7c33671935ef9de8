#pragma once

#include "edgeauth/bus.hpp"
#include "edgeauth/types.hpp"

#include <Eigen/Core>

#include <cmath>
#include <span>
#include <vector>

namespace edgeauth {

/// Penalty at iteration k is min(rho_max, rho * rho_growth^(k-1)); set
/// rho_growth = 1 for a fixed penalty. The run stops once both the largest
/// local step and the largest distance to the average are <= stop_eps.
struct AdmmConfig {
  double rho = 0.02;  // initial penalty, 1/m
  double rho_growth = 1.01;
  double rho_max = 50.0;
  double stop_eps = 1e-4;
  int k_max = 10000;
  bool record_trajectory = false;

  void validate() const;
};

/// Range residual |‖x − anchor‖ − range|.
template <typename Derived, typename Derived2>
typename Derived::Scalar range_residual(const Eigen::MatrixBase<Derived>& x, const Eigen::MatrixBase<Derived2>& anchor,
                                        typename Derived::Scalar range) {
  using std::abs;
  return abs((x - anchor).norm() - range);
}

/// Exact minimizer of |‖x − anchor‖ − range| + (rho/2)‖x − v‖².
///
/// Any minimizer lies on the ray from `anchor` through `v`, so the problem
/// reduces to g(r) = |r − range| + (rho/2)(r − d)² with d = ‖v − anchor‖.
/// g is strictly convex in r: it moves d by 1/rho towards `range`, stopping
/// on the sphere if the step would cross it. When v == anchor every sphere
/// point is optimal and the +x1 axis point is returned.
template <typename Scalar>
Vec3<Scalar> range_prox(const Vec3<Scalar>& anchor, Scalar range, const Vec3<Scalar>& v, Scalar rho) {
  const Vec3<Scalar> offset = v - anchor;
  const Scalar d = offset.norm();
  const Scalar step = Scalar(1) / rho;
  if (d == Scalar(0)) return anchor + range * Vec3<Scalar>::UnitX();

  Scalar r;
  if (d - step > range)
    r = d - step;
  else if (d + step < range)
    r = d + step;
  else
    r = range;
  return anchor + (r / d) * offset;
}

/// Local objective f_n(x) = |‖x − b_n‖ − H_n|.
double local_objective(const Vector3& x, const PeerState& peer, const Observation& obs);

/// Proximal x-update of one peer against the current average xbar:
/// argmin_x f_n(x) + (rho/2)‖x − (xbar − y_n/rho)‖².
Vector3 x_update(const PeerState& peer, const Observation& obs, const Vector3& xbar, const AdmmConfig& cfg);

/// Step 2 of the protocol: every peer sends its range estimate to every
/// other peer (round 0).
void share_features(std::span<const Observation> observations, MessageBus& bus);

/// Consensus ADMM over the range residuals, x̄-form:
///   x_n ← prox(x̄ − y_n/rho),  x̄ ← mean x_n,  y_n ← y_n + rho (x_n − x̄).
/// Starts from x_n = b_n, y_n = 0. Publishes the FeatureShare broadcast and
/// one ParamShare from every peer to every other peer per iteration.
ConsensusResult run_consensus(std::vector<PeerState> peers, std::span<const Observation> observations,
                              const AdmmConfig& cfg, MessageBus& bus);

}  // namespace edgeauth
