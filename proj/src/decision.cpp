#include "edgeauth/decision.hpp"

#include "edgeauth/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace edgeauth {

void ThresholdParams::validate() const {
  if (!std::isfinite(mu_a)) throw ValidationError("threshold.mu_a must be finite");
  if (!(sigma_a > 0.0) || !std::isfinite(sigma_a)) throw ValidationError("threshold.sigma_a must be > 0");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ValidationError("threshold.epsilon must lie in (0, 1)");
  if (!(iota0 >= 0.0) || !(iota >= 0.0)) throw ValidationError("threshold.iota0 and threshold.iota must be >= 0");
}

void CostParams::validate() const {
  if (!(tau >= 1.0)) throw ValidationError("cost.tau must be >= 1");
  if (!(k_ave >= 1.0)) throw ValidationError("cost.k_ave must be >= 1");
  if (n_available < 0) throw ValidationError("cost.n_available must be >= 0");
}

AuthDecision authenticate(const DeviceId& claimed_id, std::span<const Observation> observations,
                          const ConsensusResult& result, const Position& claimed_pos, double nu) {
  if (observations.empty()) throw ValidationError("authenticate: no observations");
  if (!(nu > 0.0)) throw ValidationError("authenticate: threshold must be > 0");

  AuthDecision d;
  for (const auto& o : observations) d.id_mismatch = d.id_mismatch || o.observed_id != claimed_id;

  const bool all_observable =
      std::all_of(observations.begin(), observations.end(), [](const Observation& o) { return o.observable; });
  if (!all_observable) {
    d.verdict = Verdict::LocationSpoofer;
    return d;
  }
  if (d.id_mismatch) {
    d.verdict = Verdict::IdentitySpoofer;
    return d;
  }
  if (!result.converged || !result.x0.observable()) {
    d.verdict = Verdict::IdentitySpoofer;
    d.diverged = true;
    return d;
  }
  d.distance_to_claim = euclidean_distance(result.x0, claimed_pos);
  d.verdict = *d.distance_to_claim <= nu ? Verdict::Legitimate : Verdict::IdentitySpoofer;
  return d;
}

double md_rate_closed_form(double nu, const ThresholdParams& p) {
  if (!(nu > 0.0)) throw ValidationError("md_rate_closed_form: nu must be > 0");
  if (std::isinf(nu)) return 1.0;
  return 0.5 * std::erfc(-(std::log(nu) - p.mu_a) / (std::numbers::sqrt2 * p.sigma_a));
}

double lognormal_pdf(double s, const ThresholdParams& p) {
  if (!(s > 0.0)) throw ValidationError("lognormal_pdf: argument must be > 0");
  const double z = (std::log(s) - p.mu_a) / p.sigma_a;
  return std::exp(-0.5 * z * z) / (p.sigma_a * s * std::sqrt(2.0 * std::numbers::pi));
}

double erf_inv(double y) {
  if (std::isnan(y) || y < -1.0 || y > 1.0) throw ValidationError("erf_inv: argument outside [-1, 1]");
  if (y == 1.0) return std::numeric_limits<double>::infinity();
  if (y == -1.0) return -std::numeric_limits<double>::infinity();
  if (y == 0.0) return 0.0;

  // Winitzki's closed-form approximation, then Newton on erf (or on erfc in
  // the tails, where erf(x) - y cancels).
  constexpr double a = 0.147;
  const double ln = std::log1p(-y * y);
  const double t = 2.0 / (std::numbers::pi * a) + 0.5 * ln;
  double x = std::copysign(std::sqrt(std::sqrt(t * t - ln / a) - t), y);

  const bool tail = std::abs(y) > 0.5;
  const double q = 1.0 - std::abs(y);  // target of erfc(|x|) in the tail
  for (int i = 0; i < 60; ++i) {
    const double slope = 2.0 / std::sqrt(std::numbers::pi) * std::exp(-x * x);
    double dx;
    if (tail) {
      const double sign = y < 0.0 ? -1.0 : 1.0;
      dx = sign * (q - std::erfc(sign * x)) / slope;
    } else {
      dx = (std::erf(x) - y) / slope;
    }
    x -= dx;
    if (std::abs(dx) <= 1e-17 * std::max(1.0, std::abs(x))) break;
  }
  return x;
}

double optimal_threshold(const ThresholdParams& p) {
  p.validate();
  return std::exp(p.mu_a + std::numbers::sqrt2 * p.sigma_a * erf_inv(2.0 * p.epsilon - 1.0));
}

double threshold(const ThresholdParams& p) { return std::min(optimal_threshold(p), p.iota0 + p.iota); }

namespace {

MonteCarloEstimate summarize(int hits, int trials) {
  MonteCarloEstimate e;
  e.trials = trials;
  e.estimate = static_cast<double>(hits) / trials;
  e.std_error = std::sqrt(e.estimate * (1.0 - e.estimate) / trials);
  return e;
}

std::vector<PeerState> scenario_peers(const ScenarioConfig& scenario) {
  std::vector<PeerState> peers;
  for (const auto& p : scenario.peers) peers.push_back(make_peer_state(p.id, p.node));
  return peers;
}

}  // namespace

MonteCarloEstimate fa_rate_monte_carlo(const ScenarioConfig& scenario, double nu, int trials, std::uint64_t seed) {
  if (trials < 1) throw ValidationError("fa_rate_monte_carlo: trials must be >= 1");
  if (!(nu >= 0.0)) throw ValidationError("fa_rate_monte_carlo: nu must be >= 0");
  // nu = 0 is evaluated as the smallest positive threshold: only an exact hit is accepted.
  const auto peers = scenario_peers(scenario);
  int rejected = 0;
  for (int t = 0; t < trials; ++t) {
    Rng rng = trial_stream(seed, static_cast<std::uint64_t>(t));
    MessageBus bus(false);
    const auto out = simulate_authentication(scenario, peers, Presence::Legitimate, scenario.user_true_pos,
                                             std::max(nu, std::numeric_limits<double>::min()), rng, bus);
    rejected += out.decision.verdict == Verdict::Legitimate ? 0 : 1;
  }
  return summarize(rejected, trials);
}

MonteCarloEstimate md_rate_monte_carlo(const ScenarioConfig& scenario, double nu, int trials, std::uint64_t seed,
                                       AttackerPlacement placement) {
  if (trials < 1) throw ValidationError("md_rate_monte_carlo: trials must be >= 1");
  if (!scenario.attacker) throw ValidationError("md_rate_monte_carlo: scenario has no attacker");
  if (!(nu >= 0.0)) throw ValidationError("md_rate_monte_carlo: nu must be >= 0");
  const auto peers = scenario_peers(scenario);
  int accepted = 0;
  for (int t = 0; t < trials; ++t) {
    Rng rng = trial_stream(seed, static_cast<std::uint64_t>(t));
    Position where = scenario.attacker->pos;
    if (placement == AttackerPlacement::LogNormal) {
      std::lognormal_distribution<double> dist(scenario.threshold_params.mu_a, scenario.threshold_params.sigma_a);
      std::uniform_real_distribution<double> bearing(0.0, 2.0 * std::numbers::pi);
      const double d = dist(rng);
      const double theta = bearing(rng);
      where = Position(scenario.user_claimed_pos.vec() + d * Vector3(std::cos(theta), std::sin(theta), 0.0));
    }
    MessageBus bus(false);
    const auto out = simulate_authentication(scenario, peers, Presence::Attacker, where,
                                             std::max(nu, std::numeric_limits<double>::min()), rng, bus);
    accepted += out.decision.verdict == Verdict::Legitimate ? 1 : 0;
  }
  return summarize(accepted, trials);
}

std::uint64_t comm_instances(std::uint64_t k, std::uint64_t n) {
  if (n < 2) throw ValidationError("comm_instances: need at least 2 peers");
  return (k + 1) * n * (n - 1);
}

int optimal_peer_count(double tau, double k_ave) {
  const double per_pair = k_ave + 1.0;
  auto n = static_cast<long long>(std::floor(std::sqrt(tau / per_pair + 0.25) + 0.5));
  // Guard the floor against rounding at exact budget boundaries.
  const auto cost = [&](long long m) { return per_pair * static_cast<double>(m) * static_cast<double>(m - 1); };
  while (cost(n + 1) <= tau) ++n;
  while (n > 1 && cost(n) > tau) --n;
  return static_cast<int>(std::max(n, 1LL));
}

int peer_count(const CostParams& c) {
  c.validate();
  return std::max(CostParams::n_min, std::min(optimal_peer_count(c.tau, c.k_ave), c.n_available));
}

}  // namespace edgeauth
