#pragma once

#include <Eigen/Core>

#include <cmath>
#include <compare>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace edgeauth {

template <typename Scalar>
using Vec3 = Eigen::Matrix<Scalar, 3, 1>;

using Vector3 = Vec3<double>;

// Base of every error raised by the library. Callers that only care about
// "something went wrong" catch this; the CLI maps the two subclasses to
// distinct exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad input: invariants of a config, type or call precondition violated.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A point in 3-D space (meters), or the distinguished "unobservable" state
/// that stands for (+inf, +inf, +inf). The unobservable state is an explicit
/// flag so that arithmetic on finite positions never sees infinities.
template <typename Scalar>
class BasicPosition {
 public:
  using Vector = Vec3<Scalar>;

  BasicPosition() : coords_(Vector::Zero()) {}
  BasicPosition(Scalar x1, Scalar x2, Scalar x3 = Scalar(0)) : coords_(x1, x2, x3) { check_finite(); }

  template <typename Derived>
  explicit BasicPosition(const Eigen::MatrixBase<Derived>& v) : coords_(v) {
    check_finite();
  }

  static BasicPosition unobservable() {
    BasicPosition p;
    p.observable_ = false;
    return p;
  }

  bool observable() const { return observable_; }

  const Vector& vec() const {
    if (!observable_) throw ValidationError("position is unobservable");
    return coords_;
  }

  Scalar operator[](int i) const { return vec()(i); }

  friend bool operator==(const BasicPosition& a, const BasicPosition& b) {
    if (a.observable_ != b.observable_) return false;
    return !a.observable_ || a.coords_ == b.coords_;
  }

 private:
  void check_finite() const {
    if (!coords_.allFinite()) throw ValidationError("position coordinates must be finite");
  }

  Vector coords_;
  bool observable_ = true;
};

using Position = BasicPosition<double>;

/// Euclidean distance between two finite positions.
template <typename Scalar>
Scalar euclidean_distance(const BasicPosition<Scalar>& p, const BasicPosition<Scalar>& q) {
  if (!p.observable() || !q.observable())
    throw ValidationError("euclidean_distance: unobservable position");
  return (p.vec() - q.vec()).norm();
}

/// Like euclidean_distance, but an unobservable operand is infinitely far
/// from every finite position (and from another unobservable one).
template <typename Scalar>
Scalar distance_or_infinity(const BasicPosition<Scalar>& p, const BasicPosition<Scalar>& q) {
  if (!p.observable() || !q.observable()) return std::numeric_limits<Scalar>::infinity();
  return (p.vec() - q.vec()).norm();
}

class DeviceId {
 public:
  DeviceId() = default;
  explicit DeviceId(std::string id) : id_(std::move(id)) {
    if (id_.empty()) throw ValidationError("device id must be non-empty");
  }

  const std::string& str() const { return id_; }
  bool empty() const { return id_.empty(); }

  friend auto operator<=>(const DeviceId&, const DeviceId&) = default;
  friend bool operator==(const DeviceId&, const DeviceId&) = default;

 private:
  std::string id_;
};

enum class FeatureKind { RSSI, TRA };

std::string to_string(FeatureKind f);
FeatureKind feature_from_string(const std::string& s);

/// One peer's view of the user: perceived ID plus a distance estimate from
/// exactly one feature. The unselected feature slot holds 0.
struct Observation {
  DeviceId peer;
  DeviceId observed_id;
  FeatureKind feature = FeatureKind::RSSI;
  double h1 = 0.0;  // RSSI-derived distance (m)
  double h2 = 0.0;  // TRA-derived distance (m)
  bool observable = true;

  static Observation ranged(DeviceId peer, DeviceId observed_id, FeatureKind feature, double distance);
  static Observation unobserved(DeviceId peer, DeviceId observed_id);

  /// Distance estimate of the selected feature.
  double distance() const;

  void validate() const;
};

struct PeerState {
  DeviceId peer;
  Position b;
  Vector3 x = Vector3::Zero();
  Vector3 y = Vector3::Zero();
  FeatureKind feature = FeatureKind::RSSI;
};

struct ConsensusResult {
  Position x0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> residual_trace;
  // Final local variables, in the order the peers were given.
  std::vector<PeerState> peers;
  // Per-iteration local variables x_n^k (only filled when requested).
  std::vector<std::vector<Vector3>> trajectory;
};

enum class Verdict { Legitimate, IdentitySpoofer, LocationSpoofer };

std::string to_string(Verdict v);

struct AuthDecision {
  Verdict verdict = Verdict::Legitimate;
  std::optional<double> distance_to_claim;
  bool id_mismatch = false;
  bool diverged = false;
};

}  // namespace edgeauth

template <>
struct std::hash<edgeauth::DeviceId> {
  std::size_t operator()(const edgeauth::DeviceId& d) const noexcept { return std::hash<std::string>{}(d.str()); }
};
