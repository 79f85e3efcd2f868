/**
 * Copyright BONIK authors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#include "bonik/gateway/protocol.hpp"

#include <charconv>

#include "bonik/crypto/wire.hpp"

namespace bonik::gateway {

Millis steady_now() {
  return std::chrono::duration_cast<Millis>(std::chrono::steady_clock::now().time_since_epoch());
}

// ---------------------------------------------------------------------------

NonceLedger::NonceLedger(Millis ttl, Clock clock) : ttl_(ttl), clock_(std::move(clock)) {}

bool NonceLedger::accept(const crypto::Nonce& nonce) {
  const auto now = clock_();
  std::lock_guard lock(mutex_);
  if (now - last_sweep_ >= ttl_ / 10) {
    std::erase_if(seen_, [&](const auto& kv) { return now - kv.second >= ttl_; });
    last_sweep_ = now;
  }
  auto [it, inserted] = seen_.try_emplace(nonce, now);
  if (inserted) return true;
  if (now - it->second >= ttl_) {
    it->second = now;
    return true;
  }
  return false;
}

void NonceLedger::sweep() {
  const auto now = clock_();
  std::lock_guard lock(mutex_);
  std::erase_if(seen_, [&](const auto& kv) { return now - kv.second >= ttl_; });
  last_sweep_ = now;
}

std::size_t NonceLedger::size() const {
  std::lock_guard lock(mutex_);
  return seen_.size();
}

// ---------------------------------------------------------------------------

SessionTable::SessionTable(Millis idle, Clock clock) : idle_(idle), clock_(std::move(clock)) {}

Session SessionTable::issue(std::string user_name, std::string account,
                            crypto::PublicKey public_key) {
  Session s;
  s.session_id = crypto::random_token_hex();
  s.user_name = std::move(user_name);
  s.account = std::move(account);
  s.public_key = public_key;
  s.created_at = clock_();
  s.expires_at = s.created_at + idle_;
  s.lock = std::make_shared<std::mutex>();
  std::lock_guard lock(mutex_);
  sessions_.emplace(s.session_id, s);
  return s;
}

std::optional<Session> SessionTable::touch(const std::string& session_id) {
  const auto now = clock_();
  std::lock_guard lock(mutex_);
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) return std::nullopt;
  if (now >= it->second.expires_at) {
    sessions_.erase(it);
    return std::nullopt;
  }
  it->second.expires_at = now + idle_;
  return it->second;
}

void SessionTable::end(const std::string& session_id) {
  std::lock_guard lock(mutex_);
  sessions_.erase(session_id);
}

std::vector<std::string> SessionTable::sweep() {
  const auto now = clock_();
  std::vector<std::string> gone;
  std::lock_guard lock(mutex_);
  for (auto it = sessions_.begin(); it != sessions_.end();) {
    if (now >= it->second.expires_at) {
      gone.push_back(it->first);
      it = sessions_.erase(it);
    } else {
      ++it;
    }
  }
  return gone;
}

std::size_t SessionTable::size() const {
  std::lock_guard lock(mutex_);
  return sessions_.size();
}

// ---------------------------------------------------------------------------

chaincode::Request parsing(const nlu::EntitySet& set, const Session& session) {
  using nlu::EntityKind;
  switch (set.intent) {
    case nlu::Intent::balQuery:
      if (!set.complete) throw ParseError("balance query is incomplete");
      return {chaincode::BalData{session.user_name, session.account}};
    case nlu::Intent::transfer: {
      const auto to = set.value(EntityKind::accountNumber);
      const auto amount_text = set.value(EntityKind::amount);
      if (!set.complete || !to || !amount_text) throw ParseError("transfer is incomplete");
      std::int64_t amount = 0;
      const auto* end = amount_text->data() + amount_text->size();
      auto [ptr, ec] = std::from_chars(amount_text->data(), end, amount);
      if (ec != std::errc{} || ptr != end || amount <= 0) throw ParseError("amount is not a positive integer");
      return {chaincode::TransferData{session.user_name, session.account, *to, amount}};
    }
    case nlu::Intent::smalltalk:
    case nlu::Intent::unknown: break;
  }
  throw ParseError("intent '" + std::string(nlu::to_string(set.intent)) + "' has no request form");
}

// ---------------------------------------------------------------------------

std::string signing_payload(const json& message) {
  auto copy = message;
  copy.erase("signature");
  return crypto::canonical(copy);
}

json signed_message(const crypto::PrivateKey& key, json message) {
  message.erase("signature");
  const auto sig = crypto::sign(key, crypto::canonical(message));
  message["signature"] = crypto::encode(sig);
  return message;
}

bool verify_signed_message(const crypto::PublicKey& key, const json& message) {
  if (!message.is_object() || !message.contains("signature") || !message["signature"].is_string()) {
    return false;
  }
  try {
    const auto sig = crypto::from_base64(message["signature"].get<std::string>());
    return crypto::verify(key, crypto::as_bytes(signing_payload(message)), sig);
  } catch (const crypto::CryptoError&) {
    return false;
  }
}

}  // namespace bonik::gateway
