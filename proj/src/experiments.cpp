#include "edgeauth/experiments.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <limits>

namespace edgeauth {

RunRecord to_run_record(const EpochRecord& e) {
  RunRecord r;
  r.epoch = e.epoch;
  r.verdict = e.verdict;
  r.x0 = e.x0;
  r.detection_error_m = e.detection_error;
  r.iterations = e.iterations;
  r.message_count = e.message_count;
  r.group_members = e.members;
  r.error = e.error;
  return r;
}

namespace {

SecureGroup initial_group(const ScenarioConfig& scenario) {
  SecureGroup g;
  for (const auto& p : scenario.peers) g.members.push_back(p.id);
  return g;
}

std::vector<PeerState> initial_peers(const ScenarioConfig& scenario) {
  std::vector<PeerState> peers;
  for (const auto& p : scenario.peers) peers.push_back(make_peer_state(p.id, p.node));
  return peers;
}

ScenarioConfig first_peers(const ScenarioConfig& scenario, int n) {
  if (n < 3 || static_cast<std::size_t>(n) > scenario.peers.size())
    throw ValidationError("peer count " + std::to_string(n) + " needs 3.." + std::to_string(scenario.peers.size()) +
                          " configured peers");
  return scenario.with_first_peers(static_cast<std::size_t>(n));
}

ErrorSummary summarize(const std::vector<double>& errors, int not_converged) {
  ErrorSummary s;
  s.samples = static_cast<int>(errors.size());
  s.not_converged = not_converged;
  if (errors.empty()) {
    s.mean = std::numeric_limits<double>::quiet_NaN();
    s.std_error = std::numeric_limits<double>::quiet_NaN();
    return s;
  }
  double sum = 0.0;
  for (double e : errors) sum += e;
  s.mean = sum / s.samples;
  double ss = 0.0;
  for (double e : errors) ss += (e - s.mean) * (e - s.mean);
  s.std_error = s.samples > 1 ? std::sqrt(ss / (s.samples - 1) / s.samples) : 0.0;
  return s;
}

}  // namespace

SingleRun experiment_run(const ScenarioConfig& scenario, Presence presence, std::uint64_t stream) {
  scenario.validate();
  const EdgePool pool = scenario.full_pool();
  const SecureGroup group = initial_group(scenario);
  Rng rng = trial_stream(scenario.seed, stream);
  MessageBus bus(true);

  ScenarioConfig run = scenario;
  run.admm.record_trajectory = true;
  const auto round = orchestrate_round(DeviceId("provider"), group, run, pool, presence,
                                       [](const DeviceId&) { return true; }, rng, bus);

  SingleRun out;
  out.decision = round.decision;
  out.consensus = round.consensus;
  out.record.verdict = round.decision.verdict;
  out.record.iterations = round.iterations;
  out.record.message_count = round.peer_messages;
  out.record.group_members = group.members;
  if (round.consensus) {
    out.record.x0 = round.consensus->x0;
    if (out.record.x0.observable() && round.transmitter.observable())
      out.record.detection_error_m = euclidean_distance(out.record.x0, round.transmitter);
  }
  out.messages = bus.log();
  return out;
}

SingleRun experiment_localization(const ScenarioConfig& scenario, std::uint64_t stream) {
  if (!scenario.attacker) throw ValidationError("localization run needs scenario.attacker");
  SingleRun out = experiment_run(scenario, Presence::Attacker, stream);
  out.localization =
      localize_attacker(out.decision, out.consensus ? &*out.consensus : nullptr, scenario.attacker->pos);
  return out;
}

ErrorSummary detection_error_over_seeds(const ScenarioConfig& scenario, int seeds, Presence presence) {
  if (seeds < 1) throw ValidationError("seeds must be >= 1");
  scenario.validate();
  const auto peers = initial_peers(scenario);
  Position target = scenario.user_true_pos;
  if (presence == Presence::Attacker) {
    if (!scenario.attacker) throw ValidationError("attacker runs need scenario.attacker");
    target = scenario.attacker->pos;
  }

  std::vector<double> errors;
  int not_converged = 0;
  for (int i = 0; i < seeds; ++i) {
    Rng rng = trial_stream(scenario.seed, static_cast<std::uint64_t>(i));
    MessageBus bus(false);
    const auto out = simulate_authentication(scenario, peers, presence, target, scenario.auth_threshold(), rng, bus);
    if (!out.consensus) continue;
    if (!out.consensus->converged) ++not_converged;
    if (out.consensus->x0.observable()) errors.push_back(euclidean_distance(out.consensus->x0, target));
  }
  return summarize(errors, not_converged);
}

std::vector<ErrorBoundRow> sweep_error_bound(const ScenarioConfig& scenario, std::span<const double> bounds,
                                             std::span<const int> peer_counts, int seeds) {
  if (seeds < 1) throw ValidationError("seeds must be >= 1");
  std::vector<ErrorBoundRow> rows;
  for (int n : peer_counts) {
    ScenarioConfig sub = first_peers(scenario, n);
    const auto peers = initial_peers(sub);
    for (double bound : bounds) {
      sub.admm.stop_eps = bound;
      sub.validate();
      double iterations = 0.0, messages = 0.0;
      for (int i = 0; i < seeds; ++i) {
        Rng rng = trial_stream(sub.seed, static_cast<std::uint64_t>(i));
        MessageBus bus(false);
        const auto out = simulate_authentication(sub, peers, Presence::Legitimate, sub.user_true_pos,
                                                 sub.auth_threshold(), rng, bus);
        iterations += out.consensus ? out.consensus->iterations : 0;
        messages += static_cast<double>(bus.peer_traffic());
      }
      rows.push_back(ErrorBoundRow{n, bound, iterations / seeds, messages / seeds, seeds});
    }
  }
  return rows;
}

std::vector<ThresholdRow> sweep_threshold_fa(const ScenarioConfig& scenario, std::span<const double> nus,
                                             std::span<const int> peer_counts, int trials) {
  if (trials < 1) throw ValidationError("trials must be >= 1");
  for (double nu : nus)
    if (!(nu >= 0.0)) throw ValidationError("thresholds must be >= 0");

  std::vector<ThresholdRow> rows;
  for (int n : peer_counts) {
    const ScenarioConfig sub = first_peers(scenario, n);
    sub.validate();
    const auto peers = initial_peers(sub);
    // Distance to the claim for trials that reach the distance test, +inf otherwise.
    std::vector<double> distance(static_cast<std::size_t>(trials));
    for (int t = 0; t < trials; ++t) {
      Rng rng = trial_stream(sub.seed, static_cast<std::uint64_t>(t));
      MessageBus bus(false);
      const auto out = simulate_authentication(sub, peers, Presence::Legitimate, sub.user_true_pos,
                                               std::numeric_limits<double>::min(), rng, bus);
      distance[static_cast<std::size_t>(t)] =
          out.decision.distance_to_claim.value_or(std::numeric_limits<double>::infinity());
    }
    // Same draws as md_rate_monte_carlo(sub, nu, trials, sub.seed, LogNormal).
    std::vector<double> attacker_distance;
    if (sub.attacker) {
      const auto& tp = sub.threshold_params;
      attacker_distance.resize(static_cast<std::size_t>(trials));
      for (int t = 0; t < trials; ++t) {
        Rng rng = trial_stream(sub.seed, static_cast<std::uint64_t>(t));
        std::lognormal_distribution<double> dist(tp.mu_a, tp.sigma_a);
        std::uniform_real_distribution<double> bearing(0.0, 2.0 * std::numbers::pi);
        const double d = dist(rng);
        const double theta = bearing(rng);
        const Position where(sub.user_claimed_pos.vec() + d * Vector3(std::cos(theta), std::sin(theta), 0.0));
        MessageBus bus(false);
        const auto out = simulate_authentication(sub, peers, Presence::Attacker, where,
                                                 std::numeric_limits<double>::min(), rng, bus);
        attacker_distance[static_cast<std::size_t>(t)] =
            out.decision.distance_to_claim.value_or(std::numeric_limits<double>::infinity());
      }
    }
    for (double nu : nus) {
      const double effective = std::max(nu, std::numeric_limits<double>::min());
      const auto rejected = std::count_if(distance.begin(), distance.end(), [&](double d) { return d > effective; });
      ThresholdRow row;
      row.peers = n;
      row.nu = nu;
      row.trials = trials;
      row.fa = static_cast<double>(rejected) / trials;
      row.fa_std_error = std::sqrt(row.fa * (1.0 - row.fa) / trials);
      row.md_closed_form = nu > 0.0 ? md_rate_closed_form(nu, sub.threshold_params) : 0.0;
      if (sub.attacker) {
        const auto accepted = std::count_if(attacker_distance.begin(), attacker_distance.end(),
                                            [&](double d) { return d <= effective; });
        const double md = static_cast<double>(accepted) / trials;
        row.md = md;
        row.md_std_error = std::sqrt(md * (1.0 - md) / trials);
      }
      rows.push_back(row);
    }
  }
  return rows;
}

std::vector<SnrRow> sweep_snr(const ScenarioConfig& scenario, std::span<const double> snrs,
                              std::span<const int> peer_counts, int seeds) {
  std::vector<SnrRow> rows;
  for (int n : peer_counts) {
    ScenarioConfig sub = first_peers(scenario, n);
    for (double snr : snrs) {
      sub.noise.snr_db = snr;
      rows.push_back(SnrRow{n, snr, detection_error_over_seeds(sub, seeds, Presence::Legitimate)});
    }
  }
  return rows;
}

BaselineResult baseline_centralized(const ScenarioConfig& scenario, std::uint64_t stream) {
  scenario.validate();
  const auto peers = initial_peers(scenario);
  const auto n = static_cast<Eigen::Index>(peers.size());
  Rng rng = trial_stream(scenario.seed, stream);

  std::vector<Observation> obs;
  for (const auto& p : peers)
    obs.push_back(observe(p, scenario.user_true_pos, scenario.user_true_id, scenario.path_loss, scenario.noise, rng));

  BaselineResult out;
  out.record.group_members = initial_group(scenario).members;
  out.uploads = static_cast<std::size_t>(n);
  if (!std::all_of(obs.begin(), obs.end(), [](const Observation& o) { return o.observable; })) {
    out.record.verdict = Verdict::LocationSpoofer;
    out.record.message_count = out.uploads;
    return out;
  }

  Eigen::Matrix<double, 3, Eigen::Dynamic> anchors(3, n);
  Eigen::VectorXd range(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    anchors.col(i) = peers[static_cast<std::size_t>(i)].b.vec();
    range[i] = obs[static_cast<std::size_t>(i)].distance();
  }

  const auto residuals = [&](const Vector3& x) {
    return ((anchors.colwise() - x).colwise().norm().transpose() - range).eval();
  };

  Vector3 x = anchors.rowwise().mean();
  double lambda = 1e-3;
  Eigen::VectorXd r = residuals(x);
  double cost = r.squaredNorm();
  int k = 0;
  for (; k < scenario.admm.k_max; ++k) {
    Eigen::Matrix<double, Eigen::Dynamic, 3> J(n, 3);
    for (Eigen::Index i = 0; i < n; ++i) {
      const Vector3 diff = x - anchors.col(i);
      const double d = diff.norm();
      if (d > 0.0)
        J.row(i) = (diff / d).transpose();
      else
        J.row(i).setZero();
    }
    out.uploads += static_cast<std::size_t>(n);
    const Eigen::Matrix3d JtJ = J.transpose() * J;
    const Vector3 g = J.transpose() * r;

    Vector3 step = Vector3::Zero();
    bool improved = false;
    for (int attempt = 0; attempt < 30 && !improved; ++attempt) {
      Eigen::Matrix3d A = JtJ;
      A.diagonal().array() += lambda * (1.0 + JtJ.diagonal().array());
      step = A.ldlt().solve(-g);
      const Eigen::VectorXd r_new = residuals(x + step);
      if (r_new.squaredNorm() < cost) {
        x += step;
        r = r_new;
        cost = r.squaredNorm();
        lambda = std::max(lambda / 3.0, 1e-12);
        improved = true;
      } else {
        lambda *= 4.0;
      }
    }
    if (!improved || step.norm() <= scenario.admm.stop_eps) {
      out.converged = true;
      ++k;
      break;
    }
  }

  out.record.iterations = k;
  out.record.message_count = out.uploads;
  out.record.x0 = x.allFinite() ? Position(x) : Position::unobservable();
  if (!out.converged) {
    out.record.verdict = Verdict::IdentitySpoofer;
    out.record.error = "centralized fit did not converge in " + std::to_string(scenario.admm.k_max) + " iterations";
  } else {
    const double d = euclidean_distance(out.record.x0, scenario.user_claimed_pos);
    out.record.verdict = d <= scenario.auth_threshold() ? Verdict::Legitimate : Verdict::IdentitySpoofer;
  }
  if (out.record.x0.observable())
    out.record.detection_error_m = euclidean_distance(out.record.x0, scenario.user_true_pos);
  return out;
}

}  // namespace edgeauth
