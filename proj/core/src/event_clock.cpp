#include "attachsim/event_clock.hpp"

#include <stdexcept>

namespace attachsim {

EventClock::EventId EventClock::schedule_at(SimTime at, int order_key, Handler fn) {
  if (at < now_) throw std::logic_error("EventClock: cannot schedule in the past");
  const EventId id = next_seq_++;
  queue_.push(Event{at, order_key, id, std::move(fn)});
  return id;
}

void EventClock::cancel(EventId id) {
  if (id < next_seq_) cancelled_.insert(id);
}

std::size_t EventClock::run() {
  std::size_t fired = 0;
  while (!queue_.empty()) {
    // priority_queue::top is const; the handler is moved out via a copy of the node.
    Event ev = queue_.top();
    queue_.pop();
    if (cancelled_.erase(ev.seq) > 0) continue;
    now_ = ev.at;
    ev.fn();
    ++fired;
  }
  return fired;
}

void EventClock::advance_to(SimTime t) {
  if (!idle()) throw std::logic_error("EventClock: advance_to with pending events");
  if (t > now_) now_ = t;
}

}  // namespace attachsim
