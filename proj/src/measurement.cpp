#include "edgeauth/measurement.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace edgeauth {

void PathLossParams::validate() const {
  if (!(A > 0.0)) throw ValidationError("path_loss.A must be > 0");
  if (!(carrier_ghz > 0.0)) throw ValidationError("path_loss.carrier_ghz must be > 0");
  if (!std::isfinite(B) || !std::isfinite(C) || !std::isfinite(tx_power_dbm))
    throw ValidationError("path_loss parameters must be finite");
}

double NoiseModel::relative_sigma() const {
  if (std::isinf(snr_db) && snr_db > 0) return 0.0;
  return std::pow(10.0, -snr_db / 20.0);
}

double NoiseModel::rssi_db_sigma(const PathLossParams& p) const {
  // h = 10^(w/A) d  =>  dh/h ~ ln(10) w / A
  return relative_sigma() * p.A / std::numbers::ln10;
}

void NoiseModel::validate() const {
  if (std::isnan(snr_db)) throw ValidationError("noise.snr_db must be a number");
  if (!(tra_sigma_m >= 0.0) || !std::isfinite(tra_sigma_m)) throw ValidationError("noise.tra_sigma_m must be >= 0");
}

double path_loss(double d, const PathLossParams& params) {
  if (!(d > 0.0)) throw ValidationError("path_loss: distance must be > 0");
  return params.A * std::log10(d) + params.B + params.C * std::log10(params.carrier_ghz / 5.0);
}

double rssi_from_distance(double d, const PathLossParams& params, const NoiseModel& noise, Rng& rng) {
  const double mean = params.tx_power_dbm - path_loss(d, params);
  const double sigma = noise.rssi_db_sigma(params);
  if (sigma == 0.0) return mean;
  std::normal_distribution<double> w(0.0, sigma);
  return mean - w(rng);
}

double distance_from_rssi(double rssi_dbm, const PathLossParams& params) {
  if (params.A == 0.0) throw ValidationError("distance_from_rssi: A must be nonzero");
  const double exponent =
      (params.tx_power_dbm - rssi_dbm - params.B - params.C * std::log10(params.carrier_ghz / 5.0)) / params.A;
  return std::pow(10.0, exponent);
}

Observation observe(const PeerState& peer, const Position& user_true_pos, const DeviceId& perceived_id,
                    const PathLossParams& params, const NoiseModel& noise, Rng& rng) {
  if (!user_true_pos.observable()) return Observation::unobserved(peer.peer, perceived_id);

  const double d = euclidean_distance(peer.b, user_true_pos);
  double h = 0.0;
  if (peer.feature == FeatureKind::RSSI) {
    // Invert a noiseless RSSI reading, then apply the relative error
    // h = d (1 + eta) in the distance domain.
    const double sigma = noise.relative_sigma();
    h = d > 0.0 ? distance_from_rssi(params.tx_power_dbm - path_loss(d, params), params) : 0.0;
    if (sigma > 0.0) {
      std::normal_distribution<double> eta(0.0, sigma);
      h *= 1.0 + eta(rng);
    }
  } else {
    h = d;
    if (noise.tra_sigma_m > 0.0) {
      std::normal_distribution<double> err(0.0, noise.tra_sigma_m);
      h += err(rng);
    }
  }
  // A range estimate cannot be negative.
  return Observation::ranged(peer.peer, perceived_id, peer.feature, std::max(h, 0.0));
}

}  // namespace edgeauth
