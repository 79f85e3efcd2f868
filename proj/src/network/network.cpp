/**
 * Copyright BONIK authors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#include "bonik/network/network.hpp"

#include <algorithm>
#include <istream>
#include <set>

namespace bonik::network {

std::string_view to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::committed: return "committed";
    case Outcome::evaluated: return "evaluated";
    case Outcome::aborted: return "aborted";
  }
  return "aborted";
}

// ---------------------------------------------------------------------------
// Consortium

Consortium::Consortium(NetworkConfig config, std::optional<std::string> seed)
    : config_(std::move(config)), msp_(std::move(seed)) {
  config_.topology.validate();
  config_.latency.validate();
  config_.batch.validate();
  const auto& t = config_.topology;
  for (int org = 1; org <= t.org_count; ++org) {
    const auto prefix = "org" + std::to_string(org);
    for (int p = 0; p < t.peers_per_org; ++p) {
      msp_.register_identity(prefix + "-peer" + std::to_string(p), Role::peer);
    }
    for (int e = 0; e < t.endorsers_per_org; ++e) {
      auto id = msp_.register_identity(prefix + "-endorser" + std::to_string(e), Role::endorser);
      endorser_keys_.emplace(id.name, id.keypair.public_key);
      endorsers_.push_back(std::move(id));
    }
  }
  for (int o = 0; o < t.orderer_count; ++o) {
    msp_.register_identity("orderer" + std::to_string(o), Role::orderer);
  }
  ledger_ = make_ledger();
}

std::unique_ptr<ledger::Ledger> Consortium::make_ledger() {
  return std::make_unique<ledger::Ledger>(
      chaincode::scc_invoke,
      [this](const ledger::LedgerTransaction& tx) { return endorsement_policy_satisfied(tx); });
}

void Consortium::load_ledger(std::istream& in) {
  ledger_ = std::make_unique<ledger::Ledger>(ledger::Ledger::load(
      in, chaincode::scc_invoke,
      [this](const ledger::LedgerTransaction& tx) { return endorsement_policy_satisfied(tx); }));
}

void Consortium::check_submitter(const Identity& identity) const {
  if (!msp_.verify_certificate(identity)) {
    throw AccessDenied("submitter '" + identity.name + "' has no valid certificate");
  }
}

std::optional<std::string> Consortium::endorse(ledger::LedgerTransaction& tx) const {
  if (auto err = chaincode::validation_error(tx.request)) return *err;
  const auto message = tx.tx_id.view();
  tx.endorsements.clear();
  tx.endorsements.reserve(endorsers_.size());
  for (const auto& endorser : endorsers_) {
    tx.endorsements.push_back({endorser.name, crypto::sign(endorser.keypair.private_key, message)});
  }
  return std::nullopt;
}

bool Consortium::endorsement_policy_satisfied(const ledger::LedgerTransaction& tx) const {
  if (tx.endorsements.size() != endorser_keys_.size()) return false;
  std::set<std::string_view> seen;
  for (const auto& e : tx.endorsements) {
    auto it = endorser_keys_.find(e.endorser);
    if (it == endorser_keys_.end() || !seen.insert(it->first).second) return false;
    if (!crypto::verify(it->second, tx.tx_id.view(), e.signature)) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// SimulatedNetwork

SimulatedNetwork::SimulatedNetwork(NetworkConfig config, std::string seed)
    : consortium_(std::move(config), std::move(seed)) {}

Micros SimulatedNetwork::read_latency() const {
  const auto& p = consortium_.config().latency;
  return to_micros(p.read_ms + p.read_contention_ms_per_client * (concurrent_clients_ - 1));
}

SimulatedNetwork::Ticket SimulatedNetwork::submit_transaction(const Identity& submitter,
                                                              chaincode::Request request,
                                                              Completion on_complete) {
  consortium_.check_submitter(submitter);
  const Ticket ticket = next_ticket_++;
  if (on_complete) callbacks_.emplace(ticket, std::move(on_complete));

  const Micros submitted = events_.now();
  auto tx = ledger::LedgerTransaction::make(std::move(request), submitter.name,
                                            submitted.count() / 1000);

  if (tx.request.read_only()) {
    events_.schedule_after(read_latency(), "evaluate", [this, ticket, submitted, tx] {
      TransactionResult r;
      r.outcome = Outcome::evaluated;
      r.tx_id = tx.tx_id;
      r.response = consortium_.ledger().evaluate(tx.request);
      r.submitted_at = submitted;
      r.completed_at = events_.now();
      finish(ticket, std::move(r));
    });
    return ticket;
  }

  const auto endorse_delay = to_micros(consortium_.config().latency.endorse_ms);
  events_.schedule_after(endorse_delay, "endorse",
                         [this, ticket, submitted, tx = std::move(tx)]() mutable {
                           if (auto err = consortium_.endorse(tx)) {
                             TransactionResult r;
                             r.outcome = Outcome::aborted;
                             r.tx_id = tx.tx_id;
                             r.response = chaincode::Response::error("endorsement-failed", *err);
                             r.submitted_at = submitted;
                             r.completed_at = events_.now();
                             finish(ticket, std::move(r));
                             return;
                           }
                           enqueue_for_ordering({std::move(tx), ticket, submitted});
                         });
  return ticket;
}

void SimulatedNetwork::enqueue_for_ordering(Pending pending) {
  const auto& batch = consortium_.config().batch;
  if (pending_.empty()) {
    const auto generation = ++timer_generation_;
    events_.schedule_after(to_micros(batch.batch_timeout_ms), "batch-timeout",
                           [this, generation] {
                             if (generation == timer_generation_ && !pending_.empty()) cut_batch();
                           });
  }
  pending_.push_back(std::move(pending));
  if (static_cast<int>(pending_.size()) >= batch.max_message_count) cut_batch();
}

void SimulatedNetwork::cut_batch() {
  ++timer_generation_;  // disarms the outstanding timeout
  cut_batches_.push_back(std::move(pending_));
  pending_.clear();
  if (!sequencer_busy_) start_service();
}

void SimulatedNetwork::start_service() {
  if (cut_batches_.empty()) {
    sequencer_busy_ = false;
    return;
  }
  sequencer_busy_ = true;
  auto batch = std::move(cut_batches_.front());
  cut_batches_.erase(cut_batches_.begin());

  const auto& cfg = consortium_.config();
  const double service_ms = cfg.latency.order_base_ms +
                            cfg.latency.order_per_tx_ms * static_cast<double>(batch.size()) +
                            cfg.latency.disseminate_per_peer_ms * cfg.topology.total_peers();
  events_.schedule_after(
      to_micros(service_ms), "order", [this, batch = std::move(batch)]() mutable {
        events_.schedule_after(
            to_micros(consortium_.config().latency.commit_ms), "commit",
            [this, batch = std::move(batch)]() mutable {
              std::vector<ledger::LedgerTransaction> txs;
              txs.reserve(batch.size());
              for (auto& p : batch) txs.push_back(std::move(p.tx));
              auto block = consortium_.ledger().append_block(std::move(txs));
              for (std::size_t i = 0; i < batch.size(); ++i) {
                const auto& tx = block.tx_list[i];
                TransactionResult r;
                r.outcome = Outcome::committed;
                r.tx_id = tx.tx_id;
                r.response = tx.response;
                r.block_height = block.height;
                r.submitted_at = batch[i].submitted_at;
                r.completed_at = events_.now();
                finish(batch[i].ticket, std::move(r));
              }
            });
        start_service();
      });
}

void SimulatedNetwork::finish(Ticket ticket, TransactionResult result) {
  if (auto it = callbacks_.find(ticket); it != callbacks_.end()) {
    auto callback = std::move(it->second);
    callbacks_.erase(it);
    callback(result);
    return;
  }
  results_.insert_or_assign(ticket, std::move(result));
}

std::vector<CompletedEvent> SimulatedNetwork::advance_virtual_time(Micros until) {
  return events_.advance_until(until);
}

TransactionResult SimulatedNetwork::run_until_complete(Ticket ticket) {
  while (true) {
    if (auto it = results_.find(ticket); it != results_.end()) {
      auto r = std::move(it->second);
      results_.erase(it);
      return r;
    }
    if (!events_.step()) throw std::logic_error("event queue drained before ticket completed");
  }
}

void SimulatedNetwork::drain() {
  while (events_.step()) {
  }
}

std::optional<TransactionResult> SimulatedNetwork::result(Ticket ticket) const {
  if (auto it = results_.find(ticket); it != results_.end()) return it->second;
  return std::nullopt;
}

TransactionResult SimulatedNetwork::execute(const Identity& submitter,
                                            chaincode::Request request) {
  std::lock_guard lock(execute_mutex_);
  return run_until_complete(submit_transaction(submitter, std::move(request)));
}

// ---------------------------------------------------------------------------
// LiveNetwork

LiveNetwork::LiveNetwork(NetworkConfig config, std::optional<std::string> seed)
    : consortium_(std::move(config), std::move(seed)),
      start_(std::chrono::steady_clock::now()),
      orderer_([this] { orderer_loop(); }) {}

LiveNetwork::~LiveNetwork() {
  {
    std::lock_guard lock(mutex_);
    stopping_ = true;
  }
  cv_.notify_all();
  orderer_.join();
}

Micros LiveNetwork::elapsed() const {
  return std::chrono::duration_cast<Micros>(std::chrono::steady_clock::now() - start_);
}

std::future<TransactionResult> LiveNetwork::submit_transaction(const Identity& submitter,
                                                               chaincode::Request request) {
  consortium_.check_submitter(submitter);
  const auto now_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                          std::chrono::system_clock::now().time_since_epoch())
                          .count();
  auto tx = ledger::LedgerTransaction::make(std::move(request), submitter.name, now_ms);
  const Micros submitted = elapsed();

  std::promise<TransactionResult> promise;
  auto future = promise.get_future();

  if (tx.request.read_only()) {
    TransactionResult r;
    r.outcome = Outcome::evaluated;
    r.tx_id = tx.tx_id;
    r.response = consortium_.ledger().evaluate(tx.request);
    r.submitted_at = submitted;
    r.completed_at = elapsed();
    promise.set_value(std::move(r));
    return future;
  }

  if (auto err = consortium_.endorse(tx)) {
    TransactionResult r;
    r.outcome = Outcome::aborted;
    r.tx_id = tx.tx_id;
    r.response = chaincode::Response::error("endorsement-failed", *err);
    r.submitted_at = submitted;
    r.completed_at = elapsed();
    promise.set_value(std::move(r));
    return future;
  }

  {
    std::lock_guard lock(mutex_);
    if (pending_.empty()) first_pending_at_ = std::chrono::steady_clock::now();
    pending_.push_back({std::move(tx), std::move(promise), submitted});
  }
  cv_.notify_all();
  return future;
}

TransactionResult LiveNetwork::execute(const Identity& submitter, chaincode::Request request) {
  return submit_transaction(submitter, std::move(request)).get();
}

void LiveNetwork::orderer_loop() {
  const auto& batch_cfg = consortium_.config().batch;
  const auto timeout = to_micros(batch_cfg.batch_timeout_ms);
  std::unique_lock lock(mutex_);
  while (true) {
    cv_.wait(lock, [this] { return stopping_ || !pending_.empty(); });
    if (pending_.empty() && stopping_) return;
    const auto deadline = first_pending_at_ + timeout;
    cv_.wait_until(lock, deadline, [&] {
      return stopping_ || static_cast<int>(pending_.size()) >= batch_cfg.max_message_count;
    });

    const auto take = std::min<std::size_t>(pending_.size(), batch_cfg.max_message_count);
    std::vector<Pending> batch(std::make_move_iterator(pending_.begin()),
                               std::make_move_iterator(pending_.begin() + take));
    pending_.erase(pending_.begin(), pending_.begin() + take);
    if (!pending_.empty()) first_pending_at_ = std::chrono::steady_clock::now();
    lock.unlock();

    std::vector<ledger::LedgerTransaction> txs;
    txs.reserve(batch.size());
    for (auto& p : batch) txs.push_back(p.tx);
    auto block = consortium_.ledger().append_block(std::move(txs));
    for (std::size_t i = 0; i < batch.size(); ++i) {
      TransactionResult r;
      r.outcome = Outcome::committed;
      r.tx_id = block.tx_list[i].tx_id;
      r.response = block.tx_list[i].response;
      r.block_height = block.height;
      r.submitted_at = batch[i].submitted_at;
      r.completed_at = elapsed();
      batch[i].promise.set_value(std::move(r));
    }
    lock.lock();
  }
}

}  // namespace bonik::network
