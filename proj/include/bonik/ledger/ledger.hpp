/**
 * Copyright BONIK authors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "bonik/chaincode/chaincode.hpp"
#include "bonik/ledger/block.hpp"

namespace bonik::ledger {

struct HistoryEntry {
  std::uint64_t height = 0;
  std::string value;
  bool operator==(const HistoryEntry&) const = default;
};

/// Key-value map where every entry remembers the block height that last
/// wrote it.
class WorldState {
 public:
  struct Entry {
    std::string value;
    std::uint64_t height = 0;
    bool operator==(const Entry&) const = default;
  };

  /// Throws LedgerError("invalid-key") for an empty key.
  void put_state(const std::string& key, const std::string& value, std::uint64_t height);
  std::optional<std::string> get_state(std::string_view key) const;
  std::optional<Entry> entry(std::string_view key) const;
  const std::map<std::string, Entry, std::less<>>& entries() const { return entries_; }
  bool operator==(const WorldState&) const = default;

 private:
  std::map<std::string, Entry, std::less<>> entries_;
};

using TxExecutor =
    std::function<chaincode::Response(const chaincode::Request&, chaincode::StateStore&)>;
/// Decides whether a transaction's endorsement set satisfies the policy.
using EndorsementCheck = std::function<bool(const LedgerTransaction&)>;
using BlockSink = std::function<void(const Block&)>;

/// Hash-chained block store plus the world state it materializes.
///
/// Single writer: only append_block mutates. Readers take a shared lock and
/// always see a fully committed block.
class Ledger {
 public:
  /// Without an explicit check, a transaction is valid iff it carries at
  /// least one endorsement.
  explicit Ledger(TxExecutor executor = chaincode::scc_invoke, EndorsementCheck check = {});

  /// Rebuilds from ledger-file lines; throws LedgerError unless every line is
  /// canonical and the chain verifies.
  static Ledger load(std::istream& in, TxExecutor executor = chaincode::scc_invoke,
                     EndorsementCheck check = {});

  Ledger(Ledger&& other) noexcept;
  Ledger& operator=(Ledger&&) = delete;
  Ledger(const Ledger&) = delete;

  /// Validates endorsements, executes each valid transaction in order and
  /// links the block to the tip. Invalid transactions stay in the block with
  /// valid=false and no state effect.
  Block append_block(std::vector<LedgerTransaction> tx_list);

  std::optional<std::string> get_state(std::string_view key) const;
  std::vector<HistoryEntry> read_history(std::string_view key) const;

  /// Re-derives every hash and replays every transaction from genesis.
  bool verify_chain() const;

  /// Runs the executor against a read-only view of the current state.
  chaincode::Response evaluate(const chaincode::Request& request) const;

  std::uint64_t tip_height() const;
  MessageDigest tip_hash() const;
  std::optional<Block> block_at(std::uint64_t height) const;
  std::vector<Block> blocks() const;
  WorldState world_state() const;

  void write_to(std::ostream& out) const;
  /// Called with each newly committed block, under the writer lock.
  void set_block_sink(BlockSink sink);

 private:
  struct Replay {
    WorldState state;
    std::map<std::string, std::vector<HistoryEntry>, std::less<>> history;
  };

  static std::optional<Replay> replay(const std::vector<Block>& blocks,
                                      const TxExecutor& executor,
                                      const EndorsementCheck& check);
  static bool endorsements_ok(const LedgerTransaction& tx, const EndorsementCheck& check);
  static void apply(LedgerTransaction& tx, std::uint64_t height, Replay& replay,
                    const TxExecutor& executor);

  TxExecutor executor_;
  EndorsementCheck check_;
  BlockSink sink_;
  std::vector<Block> blocks_;
  Replay current_;
  mutable std::shared_mutex mutex_;
};

Block make_genesis();

}  // namespace bonik::ledger
