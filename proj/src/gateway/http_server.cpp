/**
 * Copyright BONIK authors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#include "bonik/gateway/http_server.hpp"

#include <charconv>

#include <httplib.h>

namespace bonik::gateway {

std::pair<std::string, int> parse_listen(std::string_view spec) {
  const auto colon = spec.rfind(':');
  if (colon == std::string_view::npos) throw std::invalid_argument("listen address must be host:port");
  std::string host(spec.substr(0, colon));
  if (host.empty()) host = "0.0.0.0";
  const auto port_text = spec.substr(colon + 1);
  int port = -1;
  auto [ptr, ec] = std::from_chars(port_text.data(), port_text.data() + port_text.size(), port);
  if (ec != std::errc{} || ptr != port_text.data() + port_text.size() || port < 0 || port > 65535) {
    throw std::invalid_argument("bad port in listen address");
  }
  return {host, port};
}

struct GatewayHttpServer::Impl {
  Gateway& gateway;
  std::unique_ptr<httplib::Server> server;
};

namespace {

constexpr std::size_t kMaxBody = 128 * 1024;

void send(httplib::Response& res, const Reply& reply) {
  res.status = reply.status;
  res.set_content(reply.body.dump(), "application/json");
}

std::string bearer(const httplib::Request& req) {
  const auto header = req.get_header_value("Authorization");
  constexpr std::string_view prefix = "Bearer ";
  if (header.size() <= prefix.size() || header.compare(0, prefix.size(), prefix) != 0) return {};
  return header.substr(prefix.size());
}

}  // namespace

GatewayHttpServer::GatewayHttpServer(Gateway& gateway, std::optional<TlsFiles> tls)
    : impl_(std::make_unique<Impl>(Impl{gateway, nullptr})) {
  if (tls) {
    impl_->server = std::make_unique<httplib::SSLServer>(tls->cert_path.c_str(), tls->key_path.c_str());
  } else {
    impl_->server = std::make_unique<httplib::Server>();
  }
  auto& srv = *impl_->server;
  auto& gw = impl_->gateway;
  srv.set_payload_max_length(kMaxBody);

  auto post = [&srv, &gw](const char* path, Reply (Gateway::*handler)(const json&)) {
    srv.Post(path, [&gw, handler](const httplib::Request& req, httplib::Response& res) {
      json body;
      try {
        body = json::parse(req.body);
      } catch (const json::exception&) {
        send(res, gw.error_reply(400, code::kProtocol, "body is not JSON"));
        return;
      }
      send(res, (gw.*handler)(body));
    });
  };
  post("/api/register", &Gateway::handle_register);
  post("/api/login", &Gateway::handle_login);
  post("/api/chat", &Gateway::handle_chat);
  post("/api/logout", &Gateway::handle_logout);

  srv.Get("/api/gateway-key", [&gw](const httplib::Request&, httplib::Response& res) {
    send(res, gw.gateway_key());
  });
  srv.Get("/api/health", [&gw](const httplib::Request&, httplib::Response& res) {
    send(res, gw.health());
  });
  srv.Get("/api/explorer/history", [&gw](const httplib::Request& req, httplib::Response& res) {
    std::optional<std::string> account;
    if (req.has_param("account")) account = req.get_param_value("account");
    send(res, gw.explorer_history(bearer(req), account));
  });
  srv.Get(R"(/api/explorer/block/(\d{1,19}))", [&gw](const httplib::Request& req, httplib::Response& res) {
    const auto text = req.matches[1].str();
    std::uint64_t height = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), height);
    if (ec != std::errc{}) {
      send(res, gw.error_reply(404, code::kNotFound, "no block at that height"));
      return;
    }
    send(res, gw.explorer_block(bearer(req), height));
  });
  srv.set_error_handler([&gw](const httplib::Request&, httplib::Response& res) {
    if (!res.body.empty()) return;
    send(res, gw.error_reply(res.status, res.status == 404 ? code::kNotFound : code::kProtocol));
  });
  srv.set_exception_handler([&gw](const httplib::Request&, httplib::Response& res, std::exception_ptr) {
    send(res, gw.error_reply(500, code::kInternal));
  });
}

GatewayHttpServer::~GatewayHttpServer() { stop(); }

bool GatewayHttpServer::valid() const { return impl_->server->is_valid(); }

int GatewayHttpServer::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server->bind_to_any_port(host);
  return impl_->server->bind_to_port(host, port) ? port : -1;
}

bool GatewayHttpServer::listen_after_bind() { return impl_->server->listen_after_bind(); }

void GatewayHttpServer::stop() { impl_->server->stop(); }

}  // namespace bonik::gateway
