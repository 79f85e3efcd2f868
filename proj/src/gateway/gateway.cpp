/**
 * Copyright BONIK authors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#include "bonik/gateway/gateway.hpp"

#include <algorithm>

#include "bonik/chaincode/chaincode.hpp"
#include "bonik/crypto/wire.hpp"

namespace bonik::gateway {

namespace {

constexpr std::size_t kMaxUtterance = 2000;

void require_shape(const json& message, std::string_view kind,
                   std::initializer_list<std::string_view> keys) {
  if (!message.is_object()) throw ProtocolError(400, code::kProtocol, "message must be an object");
  if (message.size() != keys.size()) {
    throw ProtocolError(400, code::kProtocol, "unexpected or missing fields");
  }
  for (auto k : keys) {
    if (!message.contains(k)) throw ProtocolError(400, code::kProtocol, "missing '" + std::string(k) + "'");
  }
  if (!message["kind"].is_string() || message["kind"].get<std::string>() != kind) {
    throw ProtocolError(400, code::kProtocol, "expected kind " + std::string(kind));
  }
}

std::string string_field(const json& message, const char* key) {
  if (!message[key].is_string()) {
    throw ProtocolError(400, code::kProtocol, std::string("'") + key + "' must be a string");
  }
  return message[key].get<std::string>();
}

crypto::Nonce nonce_field(const json& message) {
  try {
    return crypto::Nonce::from_hex(string_field(message, "nonce"));
  } catch (const crypto::CryptoError&) {
    throw ProtocolError(400, code::kProtocol, "nonce must be 32 lowercase hex chars");
  }
}

json balance_entries(const std::vector<ledger::HistoryEntry>& history) {
  json out = json::array();
  for (const auto& h : history) {
    out.push_back({{"height", h.height}, {"balance", std::stoll(h.value)}});
  }
  return out;
}

}  // namespace

Gateway::Gateway(network::TransactionService& network, std::shared_ptr<nlu::NluClient> nlu,
                 std::string nlu_secret, GatewayOptions options)
    : network_(network),
      nlu_(std::move(nlu)),
      nlu_secret_(std::move(nlu_secret)),
      key_(options.key ? *options.key : crypto::generate_keypair()),
      nonces_(options.nonce_ttl, options.clock),
      sessions_(options.session_idle, options.clock) {
  const auto name = "gateway-" + crypto::to_hex(crypto::ByteView(key_.public_key.raw.data(), 4));
  identity_ = network_.consortium().msp().register_with_keypair(name, network::Role::gateway, key_);
}

void Gateway::on_user_registered(std::function<void(const Gateway&)> hook) {
  std::lock_guard lock(users_mutex_);
  registered_hook_ = std::move(hook);
}

Reply Gateway::ok(json body) const { return {200, signed_message(key_.private_key, std::move(body))}; }

Reply Gateway::error_reply(int status, const std::string& error, const std::string& detail) const {
  json body{{"error", error}};
  if (!detail.empty()) body["detail"] = detail;
  return {status, signed_message(key_.private_key, std::move(body))};
}

template <typename Fn>
Reply Gateway::guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const ProtocolError& e) {
    return error_reply(e.status(), e.code(), e.detail());
  } catch (const nlu::NluError& e) {
    // Covers Unauthorized too: a credential mismatch is our fault, not the user's.
    return error_reply(503, code::kNluUnavailable, e.what());
  } catch (const network::AccessDenied& e) {
    return error_reply(403, code::kForbidden, e.what());
  } catch (const json::exception& e) {
    return error_reply(400, code::kProtocol, e.what());
  } catch (const crypto::CryptoError& e) {
    return error_reply(400, code::kProtocol, e.what());
  } catch (const std::exception& e) {
    return error_reply(500, code::kInternal, e.what());
  }
}

network::TransactionResult Gateway::invoke_scc(const network::Identity& submitter,
                                               const chaincode::Request& request) {
  struct Envelope {
    crypto::Nonce n2;
    network::TransactionResult result;
  };
  // M2: (N2, req) goes out; M3: (N2, resp) must come back with the same N2.
  const auto n2 = crypto::fresh_nonce();
  const Envelope m3{n2, network_.execute(submitter, request)};
  if (m3.n2 != n2) throw ProtocolError(500, code::kInternal, "N2 mismatch");
  return m3.result;
}

chaincode::Request Gateway::open_request(const json& message, const crypto::Nonce& nonce) const {
  crypto::SealedEnvelope env;
  try {
    env = crypto::envelope_from_json(message.at("payload"));
  } catch (const crypto::CryptoError& e) {
    throw ProtocolError(400, code::kProtocol, std::string("bad envelope: ") + e.what());
  }
  const auto aad = nonce.to_hex();
  crypto::Bytes plain;
  try {
    plain = crypto::open(key_.private_key, env, crypto::as_bytes(aad));
  } catch (const crypto::CryptoError&) {
    throw ProtocolError(400, code::kProtocol, "envelope does not open under the gateway key");
  }
  try {
    return chaincode::request_from_json(json::parse(plain.begin(), plain.end()));
  } catch (const std::exception& e) {
    throw ProtocolError(400, code::kProtocol, std::string("bad request: ") + e.what());
  }
}

void Gateway::forget_expired_sessions() {
  for (const auto& id : sessions_.sweep()) nlu_->forget(id);
}

Session Gateway::require_session(const std::string& session_id) {
  auto s = sessions_.touch(session_id);
  if (!s) throw ProtocolError(401, code::kSessionExpired, "log in again");
  return *s;
}

// ---------------------------------------------------------------------------

Reply Gateway::gateway_key() const {
  return ok({{"public_key", crypto::encode(key_.public_key)},
             {"scheme", "ed25519+x25519-sealed-box+xchacha20poly1305"}});
}

Reply Gateway::health() const {
  std::size_t users = 0;
  {
    std::lock_guard lock(users_mutex_);
    users = users_.size();
  }
  return ok({{"status", "ok"},
             {"height", network_.consortium().ledger().tip_height()},
             {"users", users},
             {"sessions", sessions_.size()}});
}

Reply Gateway::handle_register(const json& m1) {
  return guarded([&] {
    require_shape(m1, "M1", {"kind", "nonce", "payload"});
    const auto n1 = nonce_field(m1);
    const auto req = open_request(m1, n1);
    if (req.type() != chaincode::RequestType::registration) {
      throw ProtocolError(400, code::kProtocol, "M1 must carry a registration request");
    }
    if (!nonces_.accept(n1)) throw ProtocolError(409, code::kReplay, "N1 already used");

    const auto result = invoke_scc(identity_, req);
    const auto& resp = result.response;
    if (result.outcome == network::Outcome::aborted) {
      throw ProtocolError(400, code::kProtocol, resp.detail);
    }
    if (resp.status == chaincode::Status::Error && resp.code == chaincode::error_code::kRegistrationRejected) {
      throw ProtocolError(409, code::kRegistrationRejected, "user name taken");
    }
    if (resp.status != chaincode::Status::True || !resp.account_num) {
      throw ProtocolError(500, code::kInternal, "registration failed: " + resp.text());
    }

    const auto& name = std::get<chaincode::RegisData>(req.data).userName;
    const auto keypair = crypto::generate_keypair();
    network::Identity identity;
    try {
      identity = network_.consortium().msp().register_with_keypair(name, network::Role::user, keypair);
    } catch (const network::AlreadyRegistered&) {
      throw ProtocolError(409, code::kRegistrationRejected, "user name taken");
    }
    identity.keypair.private_key = {};
    std::function<void(const Gateway&)> hook;
    {
      std::lock_guard lock(users_mutex_);
      users_.insert_or_assign(name, UserRecord{identity, *resp.account_num});
      hook = registered_hook_;
    }
    if (hook) hook(*this);

    json resp_prime{{"resp", chaincode::to_json(resp)},
                    {"public_key", crypto::encode(keypair.public_key)},
                    {"private_key", crypto::encode(keypair.private_key)}};
    const auto digest = crypto::hash_json(resp_prime).to_hex();
    return ok({{"kind", "M4"},
               {"nonce", n1.to_hex()},
               {"resp_prime", std::move(resp_prime)},
               {"digest", digest}});
  });
}

Reply Gateway::handle_login(const json& message) {
  return guarded([&] {
    forget_expired_sessions();
    require_shape(message, "LOGIN", {"kind", "nonce", "payload", "signature"});
    const auto n1 = nonce_field(message);
    const auto req = open_request(message, n1);
    if (req.type() != chaincode::RequestType::login) {
      throw ProtocolError(400, code::kProtocol, "LOGIN must carry a login request");
    }
    const auto& name = std::get<chaincode::LoginData>(req.data).userName;
    std::optional<UserRecord> record;
    {
      std::lock_guard lock(users_mutex_);
      if (auto it = users_.find(name); it != users_.end()) record = it->second;
    }
    if (!record) throw ProtocolError(401, code::kAuthFailed);
    if (!verify_signed_message(record->identity.keypair.public_key, message)) {
      throw ProtocolError(401, code::kBadSignature);
    }
    if (!nonces_.accept(n1)) throw ProtocolError(409, code::kReplay, "nonce already used");

    const auto result = invoke_scc(record->identity, req);
    if (result.response.status != chaincode::Status::True) throw ProtocolError(401, code::kAuthFailed);

    const auto session = sessions_.issue(name, record->account, record->identity.keypair.public_key);
    const std::int64_t idle_s =
        std::chrono::duration_cast<std::chrono::seconds>(session.expires_at - session.created_at).count();
    return ok({{"kind", "LOGIN_OK"},
               {"nonce", n1.to_hex()},
               {"session_id", session.session_id},
               {"userName", name},
               {"accountNum", record->account},
               {"idle_timeout_s", idle_s}});
  });
}

Reply Gateway::handle_chat(const json& message) {
  return guarded([&] {
    forget_expired_sessions();
    require_shape(message, "CHAT", {"kind", "session_id", "nonce", "utterance", "signature"});
    const auto nonce = nonce_field(message);
    const auto utterance = string_field(message, "utterance");
    if (utterance.empty() || utterance.size() > kMaxUtterance) {
      throw ProtocolError(400, code::kProtocol, "utterance must be 1-2000 bytes");
    }
    const auto session = require_session(string_field(message, "session_id"));
    std::lock_guard session_lock(*session.lock);
    if (!verify_signed_message(session.public_key, message)) {
      throw ProtocolError(401, code::kBadSignature);
    }
    if (!nonces_.accept(nonce)) throw ProtocolError(409, code::kReplay, "nonce already used");

    const auto reply = nlu_->query({session.session_id, utterance, nlu_secret_, session.account});
    const auto& set = reply.entity_set;
    auto body = nlu::to_json(set);
    body["kind"] = "CHAT_RESP";
    body["nonce"] = nonce.to_hex();
    body["session_id"] = session.session_id;
    body["bot_text"] = reply.bot_text;
    body["transaction"] = nullptr;

    const bool execute = (set.intent == nlu::Intent::transfer && set.consent == nlu::Consent::affirmed) ||
                         (set.intent == nlu::Intent::balQuery && set.complete);
    if (execute) {
      chaincode::Request req;
      try {
        req = parsing(set, session);
      } catch (const ParseError& e) {
        throw ProtocolError(400, code::kProtocol, e.what());
      }
      network::Identity submitter;
      {
        std::lock_guard lock(users_mutex_);
        auto it = users_.find(session.user_name);
        if (it == users_.end()) throw ProtocolError(401, code::kSessionExpired, "unknown user");
        submitter = it->second.identity;
      }
      const auto result = invoke_scc(submitter, req);
      json tx{{"tx_id", result.tx_id.to_hex()},
              {"outcome", network::to_string(result.outcome)},
              {"block_height", nullptr},
              {"response", chaincode::to_json(result.response)}};
      if (result.block_height) tx["block_height"] = *result.block_height;
      body["transaction"] = std::move(tx);
      body["bot_text"] = result.response.text();
    }
    return ok(std::move(body));
  });
}

Reply Gateway::handle_logout(const json& message) {
  return guarded([&] {
    require_shape(message, "LOGOUT", {"kind", "session_id", "nonce", "signature"});
    const auto nonce = nonce_field(message);
    const auto session = require_session(string_field(message, "session_id"));
    if (!verify_signed_message(session.public_key, message)) {
      throw ProtocolError(401, code::kBadSignature);
    }
    if (!nonces_.accept(nonce)) throw ProtocolError(409, code::kReplay, "nonce already used");
    sessions_.end(session.session_id);
    nlu_->forget(session.session_id);
    return ok({{"kind", "LOGOUT_OK"}, {"nonce", nonce.to_hex()}});
  });
}

Reply Gateway::explorer_history(const std::string& bearer,
                                const std::optional<std::string>& account) {
  return guarded([&] {
    const auto session = require_session(bearer);
    if (account && *account != session.account) {
      throw ProtocolError(403, code::kForbidden, "history is limited to your own account");
    }
    const auto history =
        network_.consortium().ledger().read_history(chaincode::balance_key(session.account));
    return ok({{"account", session.account}, {"entries", balance_entries(history)}});
  });
}

Reply Gateway::explorer_block(const std::string& bearer, std::uint64_t height) {
  return guarded([&] {
    const auto session = require_session(bearer);
    const auto block = network_.consortium().ledger().block_at(height);
    if (!block) throw ProtocolError(404, code::kNotFound, "no block at that height");
    json txs = json::array();
    for (const auto& tx : block->tx_list) {
      if (tx.submitter != session.user_name) continue;
      txs.push_back({{"tx_id", tx.tx_id.to_hex()},
                     {"timestamp", tx.timestamp_ms},
                     {"valid", tx.valid},
                     {"request", chaincode::to_json(tx.request)},
                     {"response", chaincode::to_json(tx.response)}});
    }
    return ok({{"height", block->height},
               {"block_hash", block->block_hash.to_hex()},
               {"prev_hash", block->prev_hash.to_hex()},
               {"tx_count", block->tx_list.size()},
               {"transactions", std::move(txs)}});
  });
}

// ---------------------------------------------------------------------------

json Gateway::export_users() const {
  std::lock_guard lock(users_mutex_);
  json users = json::array();
  for (const auto& [name, rec] : users_) {
    users.push_back({{"name", name},
                     {"public_key", crypto::encode(rec.identity.keypair.public_key)},
                     {"certificate", crypto::encode(rec.identity.certificate)},
                     {"account", rec.account}});
  }
  return {{"users", std::move(users)}};
}

void Gateway::import_users(const json& doc) {
  auto& msp = network_.consortium().msp();
  for (const auto& u : doc.at("users")) {
    const auto name = u.at("name").get<std::string>();
    json record{{"name", name},
                {"role", "user"},
                {"public_key", u.at("public_key")},
                {"certificate", u.at("certificate")}};
    msp.import_identities(json::array({record}));
    auto identity = msp.lookup(name, network::Role::user);
    if (!identity) throw std::runtime_error("identity import failed for " + name);
    const auto account = u.at("account").get<std::string>();
    if (!chaincode::is_account_number(account)) throw std::invalid_argument("bad account for " + name);
    std::lock_guard lock(users_mutex_);
    users_.insert_or_assign(name, UserRecord{*identity, account});
  }
}

}  // namespace bonik::gateway
