/**
 * Copyright BONIK authors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "bonik/gateway/protocol.hpp"
#include "bonik/network/network.hpp"
#include "bonik/nlu/service.hpp"

namespace bonik::gateway {

struct GatewayOptions {
  Millis nonce_ttl = kNonceTtl;
  Millis session_idle = kSessionIdle;
  Clock clock = steady_now;
  /// K_d. A fresh keypair when unset.
  std::optional<crypto::KeyPair> key;
};

/// Transport-independent reply: HTTP status plus a JSON body. Every body is
/// signed with K_d^-1 in a "signature" field.
struct Reply {
  int status = 200;
  json body;
};

struct UserRecord {
  network::Identity identity;  // private key never retained
  std::string account;
};

/// The dApp. Bridges clients to the NLU service and the network; owns the
/// nonce ledger, the session table and the registered-user directory.
class Gateway {
 public:
  Gateway(network::TransactionService& network, std::shared_ptr<nlu::NluClient> nlu,
          std::string nlu_secret, GatewayOptions options = {});

  Reply gateway_key() const;
  Reply handle_register(const json& m1);
  Reply handle_login(const json& message);
  Reply handle_chat(const json& message);
  Reply handle_logout(const json& message);
  /// `bearer` is the session id from the Authorization header.
  Reply explorer_history(const std::string& bearer, const std::optional<std::string>& account);
  Reply explorer_block(const std::string& bearer, std::uint64_t height);
  Reply health() const;
  /// A signed error body, for transport-level failures such as unparseable JSON.
  Reply error_reply(int status, const std::string& error, const std::string& detail = {}) const;

  const crypto::PublicKey& public_key() const { return key_.public_key; }
  SessionTable& sessions() { return sessions_; }
  NonceLedger& nonces() { return nonces_; }

  /// Registered users as {users:[{name, public_key, certificate, account}]}.
  json export_users() const;
  /// Re-admits users from export_users(); certificates must verify.
  void import_users(const json& doc);
  /// Called after each successful registration (e.g. to persist the directory).
  void on_user_registered(std::function<void(const Gateway&)> hook);

 private:
  template <typename Fn>
  Reply guarded(Fn&& fn);
  Reply ok(json body) const;

  /// M2/M3: forwards (N2, req) and checks the N2 echoed with the response.
  network::TransactionResult invoke_scc(const network::Identity& submitter,
                                        const chaincode::Request& request);
  chaincode::Request open_request(const json& message, const crypto::Nonce& nonce) const;
  Session require_session(const std::string& session_id);
  void forget_expired_sessions();

  network::TransactionService& network_;
  std::shared_ptr<nlu::NluClient> nlu_;
  std::string nlu_secret_;
  crypto::KeyPair key_;
  network::Identity identity_;
  NonceLedger nonces_;
  SessionTable sessions_;

  mutable std::mutex users_mutex_;
  std::map<std::string, UserRecord, std::less<>> users_;
  std::function<void(const Gateway&)> registered_hook_;
};

}  // namespace bonik::gateway
