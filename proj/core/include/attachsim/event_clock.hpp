#pragma once

#include <cstdint>
#include <functional>
#include <queue>
#include <unordered_set>
#include <vector>

#include "attachsim/time.hpp"

namespace attachsim {

// Minimal discrete-event core. Events fire in (time, order key, insertion)
// order; the order key lets callers break timestamp ties deterministically.
class EventClock {
public:
  using Handler = std::function<void()>;
  using EventId = std::uint64_t;

  explicit EventClock(SimTime start = {}) : now_(start) {}

  SimTime now() const { return now_; }

  EventId schedule_at(SimTime at, int order_key, Handler fn);
  EventId schedule_in(Duration delay, int order_key, Handler fn) {
    return schedule_at(now_ + delay, order_key, std::move(fn));
  }
  // A cancelled event is dropped without moving the clock.
  void cancel(EventId id);

  // Drain the queue. Returns the number of events fired.
  std::size_t run();
  bool idle() const { return queue_.size() == cancelled_.size(); }

  // Move an idle clock forward, e.g. between consecutive attaches.
  void advance_to(SimTime t);

private:
  struct Event {
    SimTime at;
    int order_key;
    std::uint64_t seq;
    Handler fn;
  };
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      if (a.at != b.at) return a.at > b.at;
      if (a.order_key != b.order_key) return a.order_key > b.order_key;
      return a.seq > b.seq;
    }
  };

  SimTime now_;
  std::uint64_t next_seq_ = 0;
  std::priority_queue<Event, std::vector<Event>, Later> queue_;
  std::unordered_set<EventId> cancelled_;
};

}  // namespace attachsim
