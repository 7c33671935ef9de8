#include "edgeauth/types.hpp"

namespace edgeauth {

std::string to_string(FeatureKind f) { return f == FeatureKind::RSSI ? "RSSI" : "TRA"; }

FeatureKind feature_from_string(const std::string& s) {
  if (s == "RSSI" || s == "rssi") return FeatureKind::RSSI;
  if (s == "TRA" || s == "tra") return FeatureKind::TRA;
  throw ValidationError("unknown feature kind '" + s + "' (expected RSSI or TRA)");
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Legitimate: return "Legitimate";
    case Verdict::IdentitySpoofer: return "IdentitySpoofer";
    case Verdict::LocationSpoofer: return "LocationSpoofer";
  }
  return "?";
}

Observation Observation::ranged(DeviceId peer, DeviceId observed_id, FeatureKind feature, double distance) {
  Observation o;
  o.peer = std::move(peer);
  o.observed_id = std::move(observed_id);
  o.feature = feature;
  (feature == FeatureKind::RSSI ? o.h1 : o.h2) = distance;
  o.validate();
  return o;
}

Observation Observation::unobserved(DeviceId peer, DeviceId observed_id) {
  Observation o;
  o.peer = std::move(peer);
  o.observed_id = std::move(observed_id);
  o.observable = false;
  return o;
}

double Observation::distance() const {
  if (!observable) throw ValidationError("observation of peer " + peer.str() + " is not observable");
  return feature == FeatureKind::RSSI ? h1 : h2;
}

void Observation::validate() const {
  if (peer.empty() || observed_id.empty()) throw ValidationError("observation with empty device id");
  if (!observable) {
    if (h1 != 0.0 || h2 != 0.0) throw ValidationError("unobservable observation must carry h1 = h2 = 0");
    return;
  }
  const double selected = feature == FeatureKind::RSSI ? h1 : h2;
  const double other = feature == FeatureKind::RSSI ? h2 : h1;
  if (!std::isfinite(selected) || selected < 0.0)
    throw ValidationError("distance estimate must be finite and >= 0");
  if (other != 0.0) throw ValidationError("unselected feature slot must be 0");
}

}  // namespace edgeauth
