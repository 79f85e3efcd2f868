/**
 * Copyright BONIK authors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#include "bonik/nlu/service.hpp"

#include <httplib.h>

namespace bonik::nlu {

namespace {

std::string string_field(const json& v, const char* key) {
  if (!v.contains(key) || !v[key].is_string()) {
    throw NluError(std::string("field '") + key + "' must be a string");
  }
  return v[key].get<std::string>();
}

Consent parse_consent(std::string_view name) {
  for (auto c : {Consent::not_required, Consent::awaiting, Consent::affirmed, Consent::declined}) {
    if (to_string(c) == name) return c;
  }
  throw NluError("unknown consent state");
}

}  // namespace

json to_json(const NluQuery& query) {
  json out{{"session_id", query.session_id},
           {"utterance", query.utterance},
           {"secret_key", query.secret_key}};
  if (query.account) out["account"] = *query.account;
  return out;
}

NluQuery query_from_json(const json& value) {
  if (!value.is_object()) throw NluError("query must be an object");
  NluQuery q;
  q.session_id = string_field(value, "session_id");
  q.utterance = string_field(value, "utterance");
  q.secret_key = string_field(value, "secret_key");
  if (value.contains("account") && !value["account"].is_null()) q.account = string_field(value, "account");
  return q;
}

json to_json(const NluReply& reply) {
  auto out = to_json(reply.entity_set);
  out["bot_text"] = reply.bot_text;
  return out;
}

NluReply reply_from_json(const json& value) {
  try {
    NluReply r;
    auto& s = r.entity_set;
    const auto intent = parse_intent(value.at("intent").get<std::string>());
    if (!intent) throw NluError("unknown intent in reply");
    s.intent = *intent;
    s.complete = value.at("complete").get<bool>();
    s.consent = parse_consent(value.at("consent").get<std::string>());
    if (!value.at("missing_slot").is_null()) s.missing_slot = value["missing_slot"].get<std::string>();
    for (const auto& e : value.at("entities")) {
      const auto kind = parse_entity_kind(e.at("kind").get<std::string>());
      if (!kind) throw NluError("unknown entity kind in reply");
      s.entities.push_back({*kind, e.at("value").get<std::string>(),
                            {e.at("span").at(0).get<std::size_t>(), e.at("span").at(1).get<std::size_t>()}});
    }
    r.bot_text = value.at("bot_text").get<std::string>();
    return r;
  } catch (const json::exception& e) {
    throw NluError(std::string("malformed nlu reply: ") + e.what());
  }
}

// ---------------------------------------------------------------------------

NluService::NluService(std::shared_ptr<const PatternTable> table, std::string secret_key,
                       std::chrono::minutes idle_limit)
    : engine_(std::move(table), std::move(secret_key)), idle_limit_(idle_limit) {}

NluReply NluService::query(const NluQuery& query) {
  const NluCredential credential{query.secret_key};
  if (!engine_.authorized(credential)) throw Unauthorized("nlu credential rejected");
  if (query.session_id.empty()) throw NluError("session_id is empty");

  std::shared_ptr<Slot> slot;
  const auto now = std::chrono::steady_clock::now();
  {
    std::lock_guard lock(mutex_);
    std::erase_if(conversations_, [&](const auto& kv) {
      return kv.first != query.session_id && now - kv.second->last_used > idle_limit_;
    });
    auto& entry = conversations_[query.session_id];
    if (!entry) {
      entry = std::make_shared<Slot>();
      entry->conversation.session_id = query.session_id;
    }
    entry->last_used = now;
    slot = entry;
  }

  std::lock_guard lock(slot->mutex);
  auto& conv = slot->conversation;
  if (query.account) conv.account = query.account;
  Utterance u{query.utterance, conv.next_turn_index()};
  auto set = engine_.d_flow_model(conv, u, credential);
  auto bot = engine_.next_bot_response(set, conv);
  return {std::move(set), std::move(bot.text)};
}

void NluService::forget(const std::string& session_id) {
  std::lock_guard lock(mutex_);
  conversations_.erase(session_id);
}

std::size_t NluService::conversation_count() const {
  std::lock_guard lock(mutex_);
  return conversations_.size();
}

// ---------------------------------------------------------------------------

HttpNluClient::HttpNluClient(std::string host, int port, std::string secret_key)
    : host_(std::move(host)), port_(port), secret_key_(std::move(secret_key)) {}

NluReply HttpNluClient::query(const NluQuery& query) {
  httplib::Client client(host_, port_);
  client.set_connection_timeout(5);
  client.set_read_timeout(10);
  auto res = client.Post("/nlu/query", to_json(query).dump(), "application/json");
  if (!res) throw NluError("nlu service unreachable: " + httplib::to_string(res.error()));
  if (res->status == 401) throw Unauthorized("nlu credential rejected");
  if (res->status != 200) throw NluError("nlu service returned " + std::to_string(res->status));
  try {
    return reply_from_json(json::parse(res->body));
  } catch (const json::exception& e) {
    throw NluError(std::string("malformed nlu reply: ") + e.what());
  }
}

void HttpNluClient::forget(const std::string& session_id) {
  httplib::Client client(host_, port_);
  client.set_connection_timeout(5);
  json body{{"session_id", session_id}, {"secret_key", secret_key_}};
  client.Post("/nlu/forget", body.dump(), "application/json");
}

// ---------------------------------------------------------------------------

struct NluHttpServer::Impl {
  explicit Impl(NluService& s) : service(s) {}
  NluService& service;
  httplib::Server server;
};

namespace {

void reply_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

}  // namespace

NluHttpServer::NluHttpServer(NluService& service)
    : impl_(std::make_unique<Impl>(service)) {
  auto& svc = impl_->service;
  impl_->server.Post("/nlu/query", [&svc](const httplib::Request& req, httplib::Response& res) {
    try {
      const auto q = query_from_json(json::parse(req.body));
      reply_json(res, 200, to_json(svc.query(q)));
    } catch (const Unauthorized&) {
      reply_json(res, 401, {{"error", "unauthorized"}});
    } catch (const NluError& e) {
      reply_json(res, 400, {{"error", "bad-request"}, {"detail", e.what()}});
    } catch (const json::exception& e) {
      reply_json(res, 400, {{"error", "bad-request"}, {"detail", e.what()}});
    }
  });
  impl_->server.Post("/nlu/forget", [&svc](const httplib::Request& req, httplib::Response& res) {
    try {
      const auto body = json::parse(req.body);
      if (!svc.engine().authorized({string_field(body, "secret_key")})) {
        reply_json(res, 401, {{"error", "unauthorized"}});
        return;
      }
      svc.forget(string_field(body, "session_id"));
      reply_json(res, 200, {{"ok", true}});
    } catch (const std::exception& e) {
      reply_json(res, 400, {{"error", "bad-request"}, {"detail", e.what()}});
    }
  });
  impl_->server.Get("/nlu/health", [](const httplib::Request&, httplib::Response& res) {
    reply_json(res, 200, {{"status", "ok"}});
  });
}

NluHttpServer::~NluHttpServer() { stop(); }

int NluHttpServer::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool NluHttpServer::listen_after_bind() { return impl_->server.listen_after_bind(); }

void NluHttpServer::stop() { impl_->server.stop(); }

}  // namespace bonik::nlu
