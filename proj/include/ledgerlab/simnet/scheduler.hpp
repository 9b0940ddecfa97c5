#pragma once

#include <cstdint>
#include <queue>
#include <string>
#include <vector>

#include "ledgerlab/errors.hpp"

namespace ledgerlab::simnet {

using NodeId = std::uint32_t;

enum class EventKind : std::uint8_t { delivery, timer, command };

template <typename Payload>
struct SimEvent {
  double at = 0.0;
  std::uint64_t sequence = 0;
  EventKind kind = EventKind::command;
  NodeId destination = 0;
  NodeId source = 0;
  Payload payload{};
};

/// Priority queue ordered by (at, sequence); sequence is the insertion
/// counter, so simultaneous events run in the order they were scheduled.
template <typename Payload>
class Scheduler {
 public:
  using Event = SimEvent<Payload>;

  double now() const { return now_; }
  bool empty() const { return queue_.empty(); }
  std::size_t size() const { return queue_.size(); }
  double next_time() const { return queue_.top().at; }

  std::uint64_t schedule(double at, EventKind kind, NodeId destination, Payload payload, NodeId source = 0) {
    if (at < now_)
      throw Error(ErrorCode::scheduling,
                  "event at " + std::to_string(at) + " precedes current time " + std::to_string(now_));
    const std::uint64_t seq = next_sequence_++;
    queue_.push(Event{at, seq, kind, destination, source, std::move(payload)});
    return seq;
  }

  Event pop() {
    Event e = queue_.top();
    queue_.pop();
    now_ = e.at;
    return e;
  }

 private:
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      if (a.at != b.at) return a.at > b.at;
      return a.sequence > b.sequence;
    }
  };

  std::priority_queue<Event, std::vector<Event>, Later> queue_;
  double now_ = 0.0;
  std::uint64_t next_sequence_ = 0;
};

}  // namespace ledgerlab::simnet
