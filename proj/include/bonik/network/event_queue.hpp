/**
 * Copyright BONIK authors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "bonik/network/config.hpp"

namespace bonik::network {

struct CompletedEvent {
  Micros at{0};
  std::uint64_t sequence = 0;
  std::string label;
};

/// Discrete-event loop over a virtual clock. Events fire in timestamp order;
/// equal timestamps fire in scheduling order.
class EventQueue {
 public:
  using Handler = std::function<void()>;

  Micros now() const { return now_; }
  bool empty() const { return heap_.empty(); }
  std::size_t pending() const { return heap_.size(); }
  /// Timestamp of the earliest pending event; now() when idle.
  Micros next_time() const { return heap_.empty() ? now_ : heap_.front().at; }

  /// Scheduling in the past clamps to now.
  void schedule(Micros at, std::string label, Handler handler);
  void schedule_after(Micros delay, std::string label, Handler handler) {
    schedule(now_ + delay, std::move(label), std::move(handler));
  }

  /// Runs every event with timestamp <= until, then parks the clock at until.
  std::vector<CompletedEvent> advance_until(Micros until);
  /// Runs the single earliest event. Returns false when idle.
  bool step(CompletedEvent* done = nullptr);

 private:
  struct Item {
    Micros at;
    std::uint64_t sequence;
    std::string label;
    Handler handler;
  };
  struct Later {
    bool operator()(const Item& a, const Item& b) const {
      return a.at != b.at ? a.at > b.at : a.sequence > b.sequence;
    }
  };

  Micros now_{0};
  std::uint64_t next_sequence_ = 0;
  std::vector<Item> heap_;
};

}  // namespace bonik::network
