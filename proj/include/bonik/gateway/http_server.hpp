/**
 * Copyright BONIK authors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <memory>
#include <optional>
#include <string>
#include <utility>

#include "bonik/gateway/gateway.hpp"

namespace bonik::gateway {

struct TlsFiles {
  std::string cert_path;
  std::string key_path;
};

/// "host:port" or ":port". Throws std::invalid_argument.
std::pair<std::string, int> parse_listen(std::string_view spec);

/// HTTP/JSON front for a Gateway:
///   GET  /api/gateway-key        POST /api/register     POST /api/login
///   POST /api/chat               POST /api/logout       GET  /api/health
///   GET  /api/explorer/history   GET  /api/explorer/block/{height}
/// Explorer routes take "Authorization: Bearer <session_id>".
class GatewayHttpServer {
 public:
  explicit GatewayHttpServer(Gateway& gateway, std::optional<TlsFiles> tls = std::nullopt);
  ~GatewayHttpServer();
  GatewayHttpServer(const GatewayHttpServer&) = delete;
  GatewayHttpServer& operator=(const GatewayHttpServer&) = delete;

  /// False when the TLS certificate or key could not be loaded.
  bool valid() const;
  /// Port 0 picks a free port. Returns the bound port or -1.
  int bind(const std::string& host, int port);
  bool listen_after_bind();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace bonik::gateway
