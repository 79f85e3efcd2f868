/**
 * Copyright BONIK authors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#include "bonik/ledger/ledger.hpp"

#include <istream>
#include <mutex>
#include <ostream>

namespace bonik::ledger {

namespace {

/// Buffers a transaction's writes so a throwing chaincode leaves no trace.
class CommitView final : public chaincode::StateStore {
 public:
  explicit CommitView(const WorldState& base) : base_(base) {}

  std::optional<std::string> get_state(std::string_view key) const override {
    if (auto it = pending_.find(key); it != pending_.end()) return it->second;
    return base_.get_state(key);
  }

  void put_state(const std::string& key, const std::string& value) override {
    if (key.empty()) throw LedgerError("invalid-key");
    pending_.insert_or_assign(key, value);
  }

  const std::map<std::string, std::string, std::less<>>& pending() const { return pending_; }

 private:
  const WorldState& base_;
  std::map<std::string, std::string, std::less<>> pending_;
};

class ReadOnlyView final : public chaincode::StateStore {
 public:
  explicit ReadOnlyView(const WorldState& base) : base_(base) {}
  std::optional<std::string> get_state(std::string_view key) const override {
    return base_.get_state(key);
  }
  void put_state(const std::string&, const std::string&) override {
    throw LedgerError("put_state outside block commit");
  }

 private:
  const WorldState& base_;
};

}  // namespace

void WorldState::put_state(const std::string& key, const std::string& value,
                           std::uint64_t height) {
  if (key.empty()) throw LedgerError("invalid-key");
  entries_.insert_or_assign(key, Entry{value, height});
}

std::optional<std::string> WorldState::get_state(std::string_view key) const {
  if (auto it = entries_.find(key); it != entries_.end()) return it->second.value;
  return std::nullopt;
}

std::optional<WorldState::Entry> WorldState::entry(std::string_view key) const {
  if (auto it = entries_.find(key); it != entries_.end()) return it->second;
  return std::nullopt;
}

Block make_genesis() {
  Block genesis;
  genesis.block_hash = Block::compute_hash(0, genesis.prev_hash, {});
  return genesis;
}

Ledger::Ledger(TxExecutor executor, EndorsementCheck check)
    : executor_(std::move(executor)), check_(std::move(check)) {
  blocks_.push_back(make_genesis());
}

Ledger::Ledger(Ledger&& other) noexcept
    : executor_(std::move(other.executor_)),
      check_(std::move(other.check_)),
      sink_(std::move(other.sink_)),
      blocks_(std::move(other.blocks_)),
      current_(std::move(other.current_)) {}

bool Ledger::endorsements_ok(const LedgerTransaction& tx, const EndorsementCheck& check) {
  if (tx.endorsements.empty()) return false;
  if (tx.tx_id != LedgerTransaction::compute_id(tx.request, tx.submitter, tx.timestamp_ms)) {
    return false;
  }
  return !check || check(tx);
}

void Ledger::apply(LedgerTransaction& tx, std::uint64_t height, Replay& replay,
                   const TxExecutor& executor) {
  CommitView view(replay.state);
  try {
    tx.response = executor(tx.request, view);
  } catch (const std::exception& e) {
    tx.response = chaincode::Response::error("chaincode-failure", e.what());
    return;
  }
  for (const auto& [key, value] : view.pending()) {
    replay.state.put_state(key, value, height);
    replay.history[key].push_back({height, value});
  }
}

Block Ledger::append_block(std::vector<LedgerTransaction> tx_list) {
  if (tx_list.empty()) throw LedgerError("append_block requires at least one transaction");
  std::unique_lock lock(mutex_);
  Block block;
  block.height = blocks_.back().height + 1;
  block.prev_hash = blocks_.back().block_hash;
  for (auto& tx : tx_list) {
    tx.valid = endorsements_ok(tx, check_);
    if (tx.valid) {
      apply(tx, block.height, current_, executor_);
    } else {
      tx.response = chaincode::Response::error("endorsement-invalid");
    }
  }
  block.tx_list = std::move(tx_list);
  block.block_hash = Block::compute_hash(block.height, block.prev_hash, block.tx_list);
  blocks_.push_back(block);
  if (sink_) sink_(blocks_.back());
  return block;
}

std::optional<Ledger::Replay> Ledger::replay(const std::vector<Block>& blocks,
                                             const TxExecutor& executor,
                                             const EndorsementCheck& check) {
  if (blocks.empty()) return std::nullopt;
  Replay out;
  MessageDigest expected_prev;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const Block& b = blocks[i];
    if (b.height != i || b.prev_hash != expected_prev) return std::nullopt;
    if (i == 0 && !b.tx_list.empty()) return std::nullopt;
    if (i > 0 && b.tx_list.empty()) return std::nullopt;
    for (const auto& tx : b.tx_list) {
      if (tx.tx_id != LedgerTransaction::compute_id(tx.request, tx.submitter, tx.timestamp_ms)) {
        return std::nullopt;
      }
    }
    if (Block::compute_hash(b.height, b.prev_hash, b.tx_list) != b.block_hash) {
      return std::nullopt;
    }
    for (const auto& recorded : b.tx_list) {
      LedgerTransaction tx = recorded;
      tx.valid = endorsements_ok(tx, check);
      if (tx.valid != recorded.valid) return std::nullopt;
      if (tx.valid) {
        apply(tx, b.height, out, executor);
        if (tx.response != recorded.response) return std::nullopt;
      }
    }
    expected_prev = b.block_hash;
  }
  return out;
}

Ledger Ledger::load(std::istream& in, TxExecutor executor, EndorsementCheck check) {
  std::vector<Block> blocks;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    blocks.push_back(parse_block_line(line));
  }
  auto replayed = replay(blocks, executor, check);
  if (!replayed) throw LedgerError("ledger file failed chain verification");
  Ledger ledger(std::move(executor), std::move(check));
  ledger.blocks_ = std::move(blocks);
  ledger.current_ = std::move(*replayed);
  return ledger;
}

bool Ledger::verify_chain() const {
  std::shared_lock lock(mutex_);
  auto replayed = replay(blocks_, executor_, check_);
  return replayed && replayed->state == current_.state;
}

std::optional<std::string> Ledger::get_state(std::string_view key) const {
  std::shared_lock lock(mutex_);
  return current_.state.get_state(key);
}

std::vector<HistoryEntry> Ledger::read_history(std::string_view key) const {
  std::shared_lock lock(mutex_);
  if (auto it = current_.history.find(key); it != current_.history.end()) return it->second;
  return {};
}

chaincode::Response Ledger::evaluate(const chaincode::Request& request) const {
  std::shared_lock lock(mutex_);
  ReadOnlyView view(current_.state);
  try {
    return executor_(request, view);
  } catch (const std::exception& e) {
    return chaincode::Response::error("chaincode-failure", e.what());
  }
}

std::uint64_t Ledger::tip_height() const {
  std::shared_lock lock(mutex_);
  return blocks_.back().height;
}

MessageDigest Ledger::tip_hash() const {
  std::shared_lock lock(mutex_);
  return blocks_.back().block_hash;
}

std::optional<Block> Ledger::block_at(std::uint64_t height) const {
  std::shared_lock lock(mutex_);
  if (height >= blocks_.size()) return std::nullopt;
  return blocks_[height];
}

std::vector<Block> Ledger::blocks() const {
  std::shared_lock lock(mutex_);
  return blocks_;
}

WorldState Ledger::world_state() const {
  std::shared_lock lock(mutex_);
  return current_.state;
}

void Ledger::write_to(std::ostream& out) const {
  std::shared_lock lock(mutex_);
  for (const auto& b : blocks_) out << block_line(b) << '\n';
}

void Ledger::set_block_sink(BlockSink sink) {
  std::unique_lock lock(mutex_);
  sink_ = std::move(sink);
}

}  // namespace bonik::ledger
