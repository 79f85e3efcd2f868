/**
 * Copyright BONIK authors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>

#include "bonik/chaincode/request.hpp"
#include "bonik/crypto/crypto.hpp"
#include "bonik/nlu/nlu.hpp"

namespace bonik::gateway {

using json = nlohmann::json;
using Millis = std::chrono::milliseconds;
/// Monotonic time source; injectable so expiry is testable.
using Clock = std::function<Millis()>;

Millis steady_now();

inline constexpr Millis kNonceTtl = std::chrono::minutes(10);
inline constexpr Millis kSessionIdle = std::chrono::minutes(30);

/// Remembers nonces for a TTL window. A value is accepted at most once while
/// remembered; expired entries are swept as a side effect of accept().
class NonceLedger {
 public:
  explicit NonceLedger(Millis ttl = kNonceTtl, Clock clock = steady_now);

  /// True if the nonce is fresh (and records it), false on a replay.
  bool accept(const crypto::Nonce& nonce);
  void sweep();
  std::size_t size() const;

 private:
  Millis ttl_;
  Clock clock_;
  mutable std::mutex mutex_;
  std::map<crypto::Nonce, Millis> seen_;
  Millis last_sweep_{0};
};

struct Session {
  std::string session_id;  // 64 hex chars
  std::string user_name;
  std::string account;
  crypto::PublicKey public_key;
  Millis created_at{0};
  Millis expires_at{0};
  /// Serializes requests on one session.
  std::shared_ptr<std::mutex> lock;
};

/// Session table with an idle timeout. One user may hold several sessions.
class SessionTable {
 public:
  explicit SessionTable(Millis idle = kSessionIdle, Clock clock = steady_now);

  Session issue(std::string user_name, std::string account, crypto::PublicKey public_key);
  /// Returns the live session and extends its expiry; nullopt if unknown or expired.
  std::optional<Session> touch(const std::string& session_id);
  void end(const std::string& session_id);
  /// Drops expired sessions and returns their ids.
  std::vector<std::string> sweep();
  std::size_t size() const;

 private:
  Millis idle_;
  Clock clock_;
  mutable std::mutex mutex_;
  std::map<std::string, Session, std::less<>> sessions_;
};

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Entity set to chaincode request, always on behalf of the session user and
/// from the session's own account. Throws ParseError when incomplete or when
/// the intent has no request form.
chaincode::Request parsing(const nlu::EntitySet& set, const Session& session);

/// Protocol-level rejections, each carrying the HTTP status it maps to.
class ProtocolError : public std::runtime_error {
 public:
  ProtocolError(int status, std::string code, std::string detail = {})
      : std::runtime_error(code + (detail.empty() ? "" : ": " + detail)),
        status_(status),
        code_(std::move(code)),
        detail_(std::move(detail)) {}
  int status() const { return status_; }
  const std::string& code() const { return code_; }
  const std::string& detail() const { return detail_; }

 private:
  int status_;
  std::string code_;
  std::string detail_;
};

namespace code {
inline constexpr const char* kProtocol = "protocol-error";
inline constexpr const char* kReplay = "replay-rejected";
inline constexpr const char* kRegistrationRejected = "registration-rejected";
inline constexpr const char* kAuthFailed = "authentication-failed";
inline constexpr const char* kBadSignature = "bad-signature";
inline constexpr const char* kSessionExpired = "session-expired";
inline constexpr const char* kForbidden = "forbidden";
inline constexpr const char* kNotFound = "not-found";
inline constexpr const char* kNluUnavailable = "nlu-unavailable";
inline constexpr const char* kInternal = "internal-error";
}  // namespace code

/// Canonical bytes a client signs: the message without its "signature" field.
std::string signing_payload(const json& message);
/// Adds "signature" (base64 Ed25519 over signing_payload).
json signed_message(const crypto::PrivateKey& key, json message);
bool verify_signed_message(const crypto::PublicKey& key, const json& message);

}  // namespace bonik::gateway
