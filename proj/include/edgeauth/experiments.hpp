#pragma once

#include "edgeauth/protocol.hpp"
#include "edgeauth/scenario.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace edgeauth {

struct RunRecord {
  int epoch = 0;
  std::optional<Verdict> verdict;
  Position x0 = Position::unobservable();
  std::optional<double> detection_error_m;  // to the transmitter's true position
  int iterations = 0;
  std::size_t message_count = 0;  // FeatureShare + ParamShare
  std::vector<DeviceId> group_members;
  std::string error;
};

RunRecord to_run_record(const EpochRecord& e);

struct SingleRun {
  RunRecord record;
  AuthDecision decision;
  std::optional<ConsensusResult> consensus;  // with the per-iteration trajectory
  std::optional<LocalizationResult> localization;
  std::vector<Message> messages;
};

/// One authentication round of the scenario's initial group. The legitimate
/// user transmits for Presence::Legitimate, the configured attacker
/// otherwise. Noise comes from trial_stream(scenario.seed, stream).
SingleRun experiment_run(const ScenarioConfig& scenario, Presence presence = Presence::Legitimate,
                         std::uint64_t stream = 0);

/// experiment_run with the attacker transmitting; fills `localization`.
SingleRun experiment_localization(const ScenarioConfig& scenario, std::uint64_t stream = 0);

struct ErrorSummary {
  double mean = 0.0;
  double std_error = 0.0;
  int samples = 0;        // runs with a finite x0
  int not_converged = 0;  // runs that hit k_max or diverged
};

/// Detection error (legitimate) or localization residual (attacker) over
/// streams 0..seeds-1.
ErrorSummary detection_error_over_seeds(const ScenarioConfig& scenario, int seeds,
                                        Presence presence = Presence::Legitimate);

struct ErrorBoundRow {
  int peers = 0;
  double bound = 0.0;
  double mean_iterations = 0.0;
  double mean_messages = 0.0;
  int seeds = 0;
};

/// Mean consensus iterations and peer messages per stopping bound, for the
/// first n peers of the scenario with n in `peer_counts`.
std::vector<ErrorBoundRow> sweep_error_bound(const ScenarioConfig& scenario, std::span<const double> bounds,
                                             std::span<const int> peer_counts, int seeds);

struct ThresholdRow {
  int peers = 0;
  double nu = 0.0;
  double fa = 0.0;
  double fa_std_error = 0.0;
  int trials = 0;
  double md_closed_form = 0.0;
  std::optional<double> md;  // only when the scenario has an attacker
  std::optional<double> md_std_error;
};

/// FA rate per threshold. Each trial's consensus point is computed once and
/// tested against every nu, which gives the same numbers as calling
/// fa_rate_monte_carlo per nu with the scenario seed. With an attacker in the
/// scenario, the MD rate is estimated the same way with log-normal attacker
/// placement (md_rate_monte_carlo with AttackerPlacement::LogNormal).
std::vector<ThresholdRow> sweep_threshold_fa(const ScenarioConfig& scenario, std::span<const double> nus,
                                             std::span<const int> peer_counts, int trials);

struct SnrRow {
  int peers = 0;
  double snr_db = 0.0;
  ErrorSummary error;
};

std::vector<SnrRow> sweep_snr(const ScenarioConfig& scenario, std::span<const double> snrs,
                              std::span<const int> peer_counts, int seeds);

struct BaselineResult {
  RunRecord record;
  bool converged = false;
  std::size_t uploads = 0;  // N per iteration, plus the initial feature upload
};

/// Centralized comparison: every peer uploads its range to one aggregator,
/// which fits the position by Levenberg-Marquardt on the squared range
/// residuals. Uses the same observations as experiment_run(scenario).
BaselineResult baseline_centralized(const ScenarioConfig& scenario, std::uint64_t stream = 0);

}  // namespace edgeauth
