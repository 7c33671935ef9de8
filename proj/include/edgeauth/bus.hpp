#pragma once

#include "edgeauth/types.hpp"

#include <array>
#include <cstddef>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

namespace edgeauth {

enum class MessageKind { CollabRequest, CollabAck, FeatureShare, ParamShare, Decision, AvailabilityReport };

inline constexpr std::size_t kMessageKindCount = 6;

std::string to_string(MessageKind k);

using Payload = std::variant<std::monostate, double, Vector3, Verdict, bool>;

struct Message {
  MessageKind kind = MessageKind::ParamShare;
  DeviceId from;
  DeviceId to;
  int round = 0;
  Payload payload;
};

/// Synchronous, single-owner message bus. Every published message is counted
/// by kind; the message bodies are retained only when `keep_log` is set, so
/// Monte-Carlo loops can use a counting-only bus.
class MessageBus {
 public:
  explicit MessageBus(bool keep_log = true) : keep_log_(keep_log) {}

  void publish(Message m);

  /// Sends `make(from)` from every id to every other id, in sender order.
  template <typename MakePayload>
  void broadcast_all(MessageKind kind, const std::vector<DeviceId>& ids, int round, MakePayload&& make) {
    for (std::size_t i = 0; i < ids.size(); ++i) {
      for (std::size_t j = 0; j < ids.size(); ++j) {
        if (i == j) continue;
        publish(Message{kind, ids[i], ids[j], round, make(i)});
      }
    }
  }

  std::size_t count(MessageKind k) const { return counts_[static_cast<std::size_t>(k)]; }
  std::size_t total() const;
  /// FeatureShare + ParamShare, the peer-to-peer traffic of one authentication.
  std::size_t peer_traffic() const { return count(MessageKind::FeatureShare) + count(MessageKind::ParamShare); }

  const std::vector<Message>& log() const { return log_; }
  bool keeps_log() const { return keep_log_; }

  void clear();

 private:
  bool keep_log_;
  std::vector<Message> log_;
  std::array<std::size_t, kMessageKindCount> counts_{};
};

/// One line per message: `kind,from,to,round`.
void write_message_log(std::ostream& out, const std::vector<Message>& messages);

}  // namespace edgeauth
