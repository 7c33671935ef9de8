#include "edgeauth/bus.hpp"

#include <numeric>
#include <ostream>

namespace edgeauth {

std::string to_string(MessageKind k) {
  switch (k) {
    case MessageKind::CollabRequest: return "CollabRequest";
    case MessageKind::CollabAck: return "CollabAck";
    case MessageKind::FeatureShare: return "FeatureShare";
    case MessageKind::ParamShare: return "ParamShare";
    case MessageKind::Decision: return "Decision";
    case MessageKind::AvailabilityReport: return "AvailabilityReport";
  }
  return "?";
}

void MessageBus::publish(Message m) {
  if (m.from == m.to) throw ValidationError("message sender and receiver must differ");
  if (m.round < 0) throw ValidationError("message round must be >= 0");
  ++counts_[static_cast<std::size_t>(m.kind)];
  if (keep_log_) log_.push_back(std::move(m));
}

std::size_t MessageBus::total() const { return std::accumulate(counts_.begin(), counts_.end(), std::size_t{0}); }

void MessageBus::clear() {
  log_.clear();
  counts_.fill(0);
}

void write_message_log(std::ostream& out, const std::vector<Message>& messages) {
  for (const auto& m : messages)
    out << to_string(m.kind) << ',' << m.from.str() << ',' << m.to.str() << ',' << m.round << '\n';
}

}  // namespace edgeauth
