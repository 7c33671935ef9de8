#include "edgeauth/decision.hpp"
#include "edgeauth/scenario.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace edgeauth;

namespace {

std::vector<Observation> matching(int n, const DeviceId& id) {
  std::vector<Observation> obs;
  for (int i = 0; i < n; ++i)
    obs.push_back(Observation::ranged(DeviceId("p" + std::to_string(i)), id, FeatureKind::RSSI, 3.0));
  return obs;
}

ConsensusResult converged_at(const Position& x0) {
  ConsensusResult r;
  r.x0 = x0;
  r.converged = true;
  r.iterations = 10;
  return r;
}

ScenarioConfig outdoor(double snr) {
  ScenarioConfig s;
  s.user_true_pos = s.user_claimed_pos = Position(0, 0, 0);
  const std::vector<Vector3> at = {{-16, 12, 0}, {-22, -20, 0}, {28, 16, 0}, {24, -18, 0}, {12, 14, 0}};
  for (std::size_t i = 0; i < at.size(); ++i)
    s.peers.push_back(PeerSpec{DeviceId("p" + std::to_string(i + 1)), EdgeNode{Position(at[i]), FeatureKind::RSSI, {}}});
  s.noise.snr_db = snr;
  s.seed = 77;
  return s;
}

}  // namespace

TEST_CASE("authenticate rules") {
  const DeviceId user("user");
  const auto obs = matching(5, user);
  const Position claim(6, 6, 0);

  const auto legit = authenticate(user, obs, converged_at(Position(6.0002, 5.9997, 0)), claim, 0.5);
  CHECK(legit.verdict == Verdict::Legitimate);
  REQUIRE(legit.distance_to_claim);
  CHECK(*legit.distance_to_claim == doctest::Approx(std::hypot(0.0002, 0.0003)));

  auto forged = obs;
  forged[3].observed_id = DeviceId("mallory");
  const auto spoof = authenticate(user, forged, converged_at(claim), claim, 0.5);
  CHECK(spoof.verdict == Verdict::IdentitySpoofer);
  CHECK(spoof.id_mismatch);
  CHECK_FALSE(spoof.distance_to_claim);

  const auto far = authenticate(user, obs, converged_at(Position(0.1, 9.96, 0)), Position(0, 0, 0),
                                threshold(ThresholdParams{}));
  CHECK(far.verdict == Verdict::IdentitySpoofer);
  CHECK_FALSE(far.diverged);

  auto hidden = obs;
  hidden[0] = Observation::unobserved(hidden[0].peer, user);
  CHECK(authenticate(user, hidden, converged_at(claim), claim, 0.5).verdict == Verdict::LocationSpoofer);

  ConsensusResult stuck = converged_at(claim);
  stuck.converged = false;
  const auto div = authenticate(user, obs, stuck, claim, 0.5);
  CHECK(div.verdict == Verdict::IdentitySpoofer);
  CHECK(div.diverged);

  CHECK_THROWS_AS(authenticate(user, {}, converged_at(claim), claim, 0.5), ValidationError);
  CHECK_THROWS_AS(authenticate(user, obs, converged_at(claim), claim, 0.0), ValidationError);
}

TEST_CASE("short-circuits ignore the consensus point") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1000, 1000);
  const DeviceId user("user");
  for (int i = 0; i < 500; ++i) {
    auto obs = matching(4, user);
    const Position x0(u(rng), u(rng), u(rng));
    const Position claim(u(rng), u(rng), u(rng));
    obs[static_cast<std::size_t>(i % 4)].observed_id = DeviceId("other");
    CHECK(authenticate(user, obs, converged_at(x0), claim, 1.0).verdict == Verdict::IdentitySpoofer);
    obs[static_cast<std::size_t>((i + 1) % 4)] = Observation::unobserved(obs[static_cast<std::size_t>((i + 1) % 4)].peer, user);
    CHECK(authenticate(user, obs, converged_at(x0), claim, 1.0).verdict == Verdict::LocationSpoofer);
  }
}

TEST_CASE("md closed form") {
  ThresholdParams p;
  CHECK(md_rate_closed_form(std::exp(p.mu_a), p) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(md_rate_closed_form(1e-300, p) < 1e-12);
  CHECK(md_rate_closed_form(1e300, p) > 1.0 - 1e-12);
  CHECK_THROWS_AS(md_rate_closed_form(0.0, p), ValidationError);
  CHECK_THROWS_AS(md_rate_closed_form(-1.0, p), ValidationError);

  double prev = 0.0;
  for (double nu = 0.01; nu < 1e4; nu *= 1.1) {
    const double f = md_rate_closed_form(nu, p);
    CHECK(f >= prev);
    prev = f;
  }

  // Monte-Carlo fraction of log-normal draws below 10.
  std::mt19937_64 rng(31);
  std::lognormal_distribution<double> d(p.mu_a, p.sigma_a);
  const int m = 1000000;
  int below = 0;
  for (int i = 0; i < m; ++i) below += d(rng) <= 10.0 ? 1 : 0;
  CHECK(std::abs(md_rate_closed_form(10.0, p) - static_cast<double>(below) / m) <= 0.002);
}

TEST_CASE("log-normal density") {
  ThresholdParams p;
  CHECK(lognormal_pdf(std::exp(p.mu_a), p) ==
        doctest::Approx(1.0 / (p.sigma_a * std::exp(p.mu_a) * std::sqrt(2.0 * std::numbers::pi))).epsilon(1e-14));
  CHECK_THROWS_AS(lognormal_pdf(0.0, p), ValidationError);

  // Trapezoid rule on a log-spaced grid over [1e-6, e^(mu + 10 sigma)].
  const double lo = std::log(1e-6), hi = p.mu_a + 10.0 * p.sigma_a;
  const int n = 200000;
  double integral = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double t = lo + (hi - lo) * i / n;
    const double w = (i == 0 || i == n) ? 0.5 : 1.0;
    integral += w * lognormal_pdf(std::exp(t), p) * std::exp(t);
  }
  integral *= (hi - lo) / n;
  CHECK(std::abs(integral - 1.0) <= 1e-6);

  std::mt19937_64 rng(12);
  std::lognormal_distribution<double> d(p.mu_a, p.sigma_a);
  const int m = 1000000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < m; ++i) {
    const double s = d(rng);
    sum += s;
    sq += s * s;
  }
  const double mean = sum / m;
  const double se = std::sqrt((sq / m - mean * mean) / m);
  CHECK(std::abs(mean - std::exp(p.mu_a + p.sigma_a * p.sigma_a / 2.0)) <= 3.0 * se);
}

TEST_CASE("erf inverse") {
  for (double x = -5.0; x <= 5.0; x += 0.037) {
    const double y = std::erf(x);
    if (std::abs(y) < 1.0) CHECK(std::erf(erf_inv(y)) == doctest::Approx(y).epsilon(1e-14));
  }
  CHECK(erf_inv(0.0) == 0.0);
  CHECK(erf_inv(-0.9) == doctest::Approx(-erf_inv(0.9)).epsilon(1e-15));
  CHECK(erf_inv(-0.9) < 0.0);
  CHECK(std::isinf(erf_inv(1.0)));
  CHECK_THROWS_AS(erf_inv(1.5), ValidationError);
}

TEST_CASE("threshold") {
  ThresholdParams p;
  p.epsilon = 0.5;
  CHECK(optimal_threshold(p) == doctest::Approx(std::exp(p.mu_a)).epsilon(1e-14));

  ThresholdParams zero;
  zero.iota0 = 0.0;
  zero.iota = 0.0;
  CHECK(threshold(zero) == 0.0);

  ThresholdParams q;  // mu 2, sigma 0.5, epsilon 0.05
  const double root = oracle::bisect([&](double nu) { return md_rate_closed_form(nu, q) - q.epsilon; }, 1e-6,
                                     std::exp(q.mu_a + 8 * q.sigma_a));
  CHECK(std::abs(optimal_threshold(q) - root) <= 1e-9 * root);
  CHECK(std::abs(md_rate_closed_form(optimal_threshold(q), q) - q.epsilon) <= 1e-9);
  CHECK(threshold(q) == std::min(optimal_threshold(q), q.iota0 + q.iota));

  ThresholdParams bad;
  bad.epsilon = 1.0;
  CHECK_THROWS_AS(optimal_threshold(bad), ValidationError);
  bad.epsilon = 0.1;
  bad.sigma_a = 0.0;
  CHECK_THROWS_AS(optimal_threshold(bad), ValidationError);
}

TEST_CASE("communication count and peer count") {
  CHECK(comm_instances(0, 2) == 2);
  CHECK(comm_instances(10, 5) == 220);
  CHECK_THROWS_AS(comm_instances(3, 1), ValidationError);

  CostParams c;
  c.k_ave = 50;
  c.tau = 51.0 * 5 * 4;
  c.n_available = 10;
  CHECK(peer_count(c) == 5);
  c.n_available = 2;
  CHECK(peer_count(c) == 3);
  c.tau = 1.0;
  c.n_available = 10;
  CHECK(peer_count(c) == 3);

  for (double tau = 10; tau <= 3000; tau += 1.0)
    for (double k = 1; k <= 20; k += 1.0) {
      const int n = optimal_peer_count(tau, k);
      CHECK((k + 1) * n * (n - 1) <= tau);
      CHECK((k + 1) * (n + 1) * n > tau);
    }
}

TEST_CASE("monte carlo rates") {
  ScenarioConfig quiet = outdoor(std::numeric_limits<double>::infinity());
  CHECK(fa_rate_monte_carlo(quiet, 1e-2, 20, 1).estimate == 0.0);

  ScenarioConfig noisy = outdoor(30.0);
  const auto zero = fa_rate_monte_carlo(noisy, 0.0, 50, 2);
  CHECK(zero.estimate == 1.0);
  CHECK(zero.trials == 50);

  const auto a = fa_rate_monte_carlo(noisy, 1.0, 100, 3);
  const auto b = fa_rate_monte_carlo(noisy, 1.0, 100, 3);
  CHECK(a.estimate == b.estimate);
  CHECK(a.std_error == doctest::Approx(std::sqrt(a.estimate * (1 - a.estimate) / 100)));
  CHECK(fa_rate_monte_carlo(noisy, 3.0, 100, 3).estimate <= a.estimate);

  // Attacker far away and noiseless: never accepted.
  quiet.attacker = AttackerSpec{Position(0, 30, 0), DeviceId("mallory"), true, {}};
  CHECK(md_rate_monte_carlo(quiet, 2.0, 20, 4).estimate == 0.0);
  // Attacker on the claimed position: always accepted.
  quiet.attacker->pos = Position(0, 0, 0);
  CHECK(md_rate_monte_carlo(quiet, 2.0, 20, 5).estimate == 1.0);
  // Attacker that fools nobody is caught by the ID check.
  quiet.attacker->fools_all = false;
  CHECK(md_rate_monte_carlo(quiet, 2.0, 20, 5).estimate == 0.0);

  CHECK_THROWS_AS(fa_rate_monte_carlo(noisy, 1.0, 0, 1), ValidationError);
  CHECK_THROWS_AS(md_rate_monte_carlo(noisy, 1.0, 10, 1), ValidationError);
}

TEST_CASE("md monte carlo with log-normal attackers matches the closed form") {
  ScenarioConfig s = outdoor(std::numeric_limits<double>::infinity());
  s.attacker = AttackerSpec{Position(0, 10, 0), DeviceId("mallory"), true, {}};
  const double nu = 6.0;
  const auto mc = md_rate_monte_carlo(s, nu, 3000, 9, AttackerPlacement::LogNormal);
  const double cf = md_rate_closed_form(nu, s.threshold_params);
  CHECK(std::abs(mc.estimate - cf) <= 3.0 * std::sqrt(cf * (1 - cf) / mc.trials) + 0.01);
}
