#pragma once

#include "edgeauth/types.hpp"

#include <limits>
#include <random>

namespace edgeauth {

using Rng = std::mt19937_64;

/// Log-distance path loss PL = A log10(D) + B + C log10(fc / 5 GHz).
struct PathLossParams {
  double A = 20.0;             // dB per decade, includes the path-loss exponent
  double B = 46.4;             // dB intercept
  double C = 20.0;             // dB frequency-dependence coefficient
  double carrier_ghz = 5.0;
  double tx_power_dbm = 20.0;

  void validate() const;
};

/// snr_db = +inf disables RSSI noise; tra_sigma_m = 0 disables TRA noise.
struct NoiseModel {
  double snr_db = std::numeric_limits<double>::infinity();
  double tra_sigma_m = 0.5;

  /// Relative std of an RSSI-derived distance, 10^(-snr/20).
  double relative_sigma() const;
  /// dB-domain shadowing std whose first-order effect on the inverted
  /// distance equals relative_sigma().
  double rssi_db_sigma(const PathLossParams& p) const;

  void validate() const;
};

double path_loss(double d, const PathLossParams& params);

double rssi_from_distance(double d, const PathLossParams& params, const NoiseModel& noise, Rng& rng);

double distance_from_rssi(double rssi_dbm, const PathLossParams& params);

/// Simulates what `peer` measures about a transmitter at `user_true_pos`.
/// `perceived_id` is the ID the peer reads off the air; whether a forged ID
/// fools this peer is decided by the caller.
Observation observe(const PeerState& peer, const Position& user_true_pos, const DeviceId& perceived_id,
                    const PathLossParams& params, const NoiseModel& noise, Rng& rng);

}  // namespace edgeauth
