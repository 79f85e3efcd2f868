/**
 * Copyright BONIK authors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <condition_variable>
#include <cstdint>
#include <functional>
#include <future>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "bonik/chaincode/request.hpp"
#include "bonik/ledger/ledger.hpp"
#include "bonik/network/config.hpp"
#include "bonik/network/event_queue.hpp"
#include "bonik/network/msp.hpp"

namespace bonik::network {

/// Submitter failed certificate validation; nothing reached the endorsers.
class AccessDenied : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Outcome {
  committed,  // ordered into a block (the chaincode response may still be a failure)
  evaluated,  // answered by a peer without ordering
  aborted,    // endorsement simulation failed; never ordered
};

std::string_view to_string(Outcome outcome);

struct TransactionResult {
  Outcome outcome = Outcome::aborted;
  crypto::MessageDigest tx_id;
  chaincode::Response response;
  std::optional<std::uint64_t> block_height;
  Micros submitted_at{0};
  Micros completed_at{0};
};

using Completion = std::function<void(const TransactionResult&)>;

/// The entities of one network (MSP, endorsers, peers, orderers) and the
/// shared ledger. Both the virtual-time and the wall-clock pipelines drive
/// transactions through this.
class Consortium {
 public:
  Consortium(NetworkConfig config, std::optional<std::string> seed);

  const NetworkConfig& config() const { return config_; }
  Msp& msp() { return msp_; }
  const Msp& msp() const { return msp_; }
  ledger::Ledger& ledger() { return *ledger_; }
  const ledger::Ledger& ledger() const { return *ledger_; }

  /// Throws AccessDenied unless the identity carries a certificate issued by
  /// this MSP.
  void check_submitter(const Identity& identity) const;

  /// Simulates the proposal at every endorser. Returns the failure reason, or
  /// nullopt after attaching one signature per endorser.
  std::optional<std::string> endorse(ledger::LedgerTransaction& tx) const;

  /// Every endorser of every org signed exactly this tx_id.
  bool endorsement_policy_satisfied(const ledger::LedgerTransaction& tx) const;

  const std::vector<Identity>& endorsers() const { return endorsers_; }

  /// Replaces the ledger with one rebuilt from a ledger file.
  void load_ledger(std::istream& in);

 private:
  std::unique_ptr<ledger::Ledger> make_ledger();

  NetworkConfig config_;
  Msp msp_;
  std::vector<Identity> endorsers_;
  std::map<std::string, crypto::PublicKey, std::less<>> endorser_keys_;
  std::unique_ptr<ledger::Ledger> ledger_;
};

/// What the gateway needs from a network, whichever clock drives it.
class TransactionService {
 public:
  virtual ~TransactionService() = default;
  /// Blocks until the transaction commits, is evaluated or aborts.
  virtual TransactionResult execute(const Identity& submitter, chaincode::Request request) = 0;
  virtual Consortium& consortium() = 0;
};

/// Deterministic discrete-event network. Single-threaded; execute() is the
/// only entry point safe to call from several threads.
class SimulatedNetwork final : public TransactionService {
 public:
  using Ticket = std::uint64_t;

  SimulatedNetwork(NetworkConfig config, std::string seed);

  Consortium& consortium() override { return consortium_; }
  const ledger::Ledger& ledger() const { return consortium_.ledger(); }
  Identity register_identity(const std::string& name, Role role) {
    return consortium_.msp().register_identity(name, role);
  }

  /// Write requests go endorse -> order -> commit; balQuery and login are
  /// evaluated by a peer after the read latency. Without a completion
  /// callback the result is kept for result()/run_until_complete().
  Ticket submit_transaction(const Identity& submitter, chaincode::Request request,
                            Completion on_complete = {});

  std::vector<CompletedEvent> advance_virtual_time(Micros until);
  /// Steps events until the ticket completes. Throws if the queue drains first.
  TransactionResult run_until_complete(Ticket ticket);
  /// Steps until no events remain.
  void drain();
  std::optional<TransactionResult> result(Ticket ticket) const;

  /// Schedules an external event source (e.g. a workload client) on the
  /// virtual clock.
  void schedule_at(Micros at, std::string label, std::function<void()> handler) {
    events_.schedule(at, std::move(label), std::move(handler));
  }

  Micros now() const { return events_.now(); }
  bool idle() const { return events_.empty(); }
  void set_concurrent_clients(int clients) { concurrent_clients_ = clients < 1 ? 1 : clients; }
  Micros read_latency() const;

  TransactionResult execute(const Identity& submitter, chaincode::Request request) override;

 private:
  struct Pending {
    ledger::LedgerTransaction tx;
    Ticket ticket;
    Micros submitted_at;
  };

  void finish(Ticket ticket, TransactionResult result);
  void enqueue_for_ordering(Pending pending);
  void cut_batch();
  void start_service();

  Consortium consortium_;
  EventQueue events_;
  int concurrent_clients_ = 1;
  Ticket next_ticket_ = 1;
  std::map<Ticket, Completion> callbacks_;
  std::map<Ticket, TransactionResult> results_;

  std::vector<Pending> pending_;
  std::uint64_t timer_generation_ = 0;
  std::vector<std::vector<Pending>> cut_batches_;
  bool sequencer_busy_ = false;

  std::mutex execute_mutex_;
};

/// Wall-clock network for interactive use. Endorsement runs on the caller's
/// thread; one orderer thread cuts batches by timeout or size and commits.
class LiveNetwork final : public TransactionService {
 public:
  LiveNetwork(NetworkConfig config, std::optional<std::string> seed = std::nullopt);
  ~LiveNetwork() override;
  LiveNetwork(const LiveNetwork&) = delete;
  LiveNetwork& operator=(const LiveNetwork&) = delete;

  Consortium& consortium() override { return consortium_; }

  std::future<TransactionResult> submit_transaction(const Identity& submitter,
                                                    chaincode::Request request);
  TransactionResult execute(const Identity& submitter, chaincode::Request request) override;

 private:
  struct Pending {
    ledger::LedgerTransaction tx;
    std::promise<TransactionResult> promise;
    Micros submitted_at;
  };

  Micros elapsed() const;
  void orderer_loop();

  Consortium consortium_;
  std::chrono::steady_clock::time_point start_;
  std::mutex mutex_;
  std::condition_variable cv_;
  std::vector<Pending> pending_;
  std::chrono::steady_clock::time_point first_pending_at_;
  bool stopping_ = false;
  std::thread orderer_;
};

}  // namespace bonik::network
