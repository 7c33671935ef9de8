#pragma once

#include "edgeauth/types.hpp"

#include <cstdint>
#include <span>

namespace edgeauth {

struct ScenarioConfig;

/// Log-normal attacker-distance model ln d_a ~ N(mu_a, sigma_a^2), the MD
/// constraint epsilon, and the two error terms of the fallback threshold.
struct ThresholdParams {
  double mu_a = 2.0;
  double sigma_a = 0.5;
  double epsilon = 0.05;
  double iota0 = 1.0;  // positioning-system error (m)
  double iota = 1.0;   // consensus detection error (m)

  void validate() const;
};

struct CostParams {
  double tau = 1000.0;  // message budget per authentication
  double k_ave = 50.0;  // average consensus iterations
  int n_available = 0;
  static constexpr int n_min = 3;

  void validate() const;
};

/// Verdict rules, in priority order: any unobservable observation, any ID
/// mismatch, a consensus that did not converge, then the distance test
/// ‖x0 − claimed_pos‖ ≤ nu. `result` is not consulted for the first two.
AuthDecision authenticate(const DeviceId& claimed_id, std::span<const Observation> observations,
                          const ConsensusResult& result, const Position& claimed_pos, double nu);

/// Probability that a log-normal attacker distance falls within nu.
double md_rate_closed_form(double nu, const ThresholdParams& p);

double lognormal_pdf(double s, const ThresholdParams& p);

/// Inverse of std::erf on (-1, 1).
double erf_inv(double y);

/// The nu_opt term alone: the nu at which md_rate_closed_form equals epsilon.
double optimal_threshold(const ThresholdParams& p);

/// min(nu_opt, iota0 + iota).
double threshold(const ThresholdParams& p);

struct MonteCarloEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  int trials = 0;
};

/// Where the attacker sits in MD trials.
enum class AttackerPlacement {
  Scenario,   // the configured attacker position
  LogNormal,  // claimed position + d_a along a uniform bearing in the x1-x2 plane, ln d_a ~ N(mu_a, sigma_a^2)
};

/// Rejection rate of the legitimate user over `trials` fresh-noise runs.
/// Trial t draws from its own stream seeded by (seed, t), so estimates are
/// reproducible and two calls with the same seed see the same noise.
MonteCarloEstimate fa_rate_monte_carlo(const ScenarioConfig& scenario, double nu, int trials, std::uint64_t seed);

/// Acceptance rate of the configured attacker.
MonteCarloEstimate md_rate_monte_carlo(const ScenarioConfig& scenario, double nu, int trials, std::uint64_t seed,
                                       AttackerPlacement placement = AttackerPlacement::Scenario);

/// Peer-to-peer messages of one authentication: (k + 1) n (n − 1).
std::uint64_t comm_instances(std::uint64_t k, std::uint64_t n);

/// Largest n with (k_ave + 1) n (n − 1) <= tau.
int optimal_peer_count(double tau, double k_ave);

/// max{3, min{N_opt, n_available}}.
int peer_count(const CostParams& c);

}  // namespace edgeauth
