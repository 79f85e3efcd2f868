/**
 * Copyright BONIK authors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#include "bonik/network/event_queue.hpp"

#include <algorithm>

namespace bonik::network {

void EventQueue::schedule(Micros at, std::string label, Handler handler) {
  heap_.push_back(Item{std::max(at, now_), next_sequence_++, std::move(label), std::move(handler)});
  std::push_heap(heap_.begin(), heap_.end(), Later{});
}

bool EventQueue::step(CompletedEvent* done) {
  if (heap_.empty()) return false;
  std::pop_heap(heap_.begin(), heap_.end(), Later{});
  Item item = std::move(heap_.back());
  heap_.pop_back();
  now_ = item.at;
  item.handler();
  if (done) *done = CompletedEvent{item.at, item.sequence, std::move(item.label)};
  return true;
}

std::vector<CompletedEvent> EventQueue::advance_until(Micros until) {
  std::vector<CompletedEvent> done;
  while (!heap_.empty() && heap_.front().at <= until) {
    CompletedEvent ev;
    step(&ev);
    done.push_back(std::move(ev));
  }
  now_ = std::max(now_, until);
  return done;
}

}  // namespace bonik::network
