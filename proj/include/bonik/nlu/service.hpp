/**
 * Copyright BONIK authors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <chrono>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "bonik/nlu/nlu.hpp"

namespace bonik::nlu {

/// Request {session_id, utterance, secret_key[, account]}.
struct NluQuery {
  std::string session_id;
  std::string utterance;
  std::string secret_key;
  std::optional<std::string> account;
};

/// Response {intent, entities, complete, bot_text, consent, missing_slot}.
struct NluReply {
  EntitySet entity_set;
  std::string bot_text;
};

json to_json(const NluQuery& query);
NluQuery query_from_json(const json& value);
json to_json(const NluReply& reply);
NluReply reply_from_json(const json& value);

/// What the gateway talks to: the in-process service or a remote one.
class NluClient {
 public:
  virtual ~NluClient() = default;
  /// Throws Unauthorized on a bad secret and NluError when unreachable.
  virtual NluReply query(const NluQuery& query) = 0;
  /// Drops the conversation state of a session.
  virtual void forget(const std::string& session_id) = 0;
};

/// Engine plus per-session conversations. Conversations idle longer than the
/// limit are dropped on the next query.
class NluService final : public NluClient {
 public:
  NluService(std::shared_ptr<const PatternTable> table, std::string secret_key,
             std::chrono::minutes idle_limit = std::chrono::minutes(30));

  NluReply query(const NluQuery& query) override;
  void forget(const std::string& session_id) override;

  const Engine& engine() const { return engine_; }
  std::size_t conversation_count() const;

 private:
  struct Slot {
    std::mutex mutex;
    Conversation conversation;
    std::chrono::steady_clock::time_point last_used;
  };

  Engine engine_;
  std::chrono::minutes idle_limit_;
  mutable std::mutex mutex_;
  std::map<std::string, std::shared_ptr<Slot>> conversations_;
};

/// NLU over local HTTP: POST /nlu/query, POST /nlu/forget.
class HttpNluClient final : public NluClient {
 public:
  HttpNluClient(std::string host, int port, std::string secret_key);
  NluReply query(const NluQuery& query) override;
  void forget(const std::string& session_id) override;

 private:
  std::string host_;
  int port_;
  std::string secret_key_;
};

/// HTTP front for an NluService. 401 on a bad secret, 400 on bad input.
class NluHttpServer {
 public:
  explicit NluHttpServer(NluService& service);
  ~NluHttpServer();
  NluHttpServer(const NluHttpServer&) = delete;
  NluHttpServer& operator=(const NluHttpServer&) = delete;

  /// Binds; port 0 picks a free port. Returns the bound port or -1.
  int bind(const std::string& host, int port);
  /// Serves until stop(). Blocks.
  bool listen_after_bind();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace bonik::nlu
