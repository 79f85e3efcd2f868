/**
 * Copyright BONIK authors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <thread>

#include <httplib.h>

#include "bonik/gateway/client.hpp"
#include "bonik/gateway/http_server.hpp"

using namespace bonik;
using namespace bonik::gateway;

namespace {

const std::string kSecret(64, 'a');

network::NetworkConfig small_config() {
  network::NetworkConfig c;
  c.topology = network::Topology::preset("2O2P");
  return c;
}

std::shared_ptr<nlu::NluService> make_nlu() {
  auto table = std::make_shared<const nlu::PatternTable>(
      nlu::load_datasets(BONIK_DATA_DIR "/user_dataset.json", BONIK_DATA_DIR "/bot_dataset.json"));
  return std::make_shared<nlu::NluService>(table, kSecret);
}

/// A gateway listening on a loopback port for the lifetime of the object.
struct Running {
  explicit Running(std::optional<TlsFiles> tls = std::nullopt)
      : gw(net, make_nlu(), kSecret), server(gw, std::move(tls)) {
    REQUIRE(server.valid());
    port = server.bind("127.0.0.1", 0);
    REQUIRE(port > 0);
    thread = std::thread([this] { server.listen_after_bind(); });
  }
  ~Running() {
    server.stop();
    thread.join();
  }

  network::SimulatedNetwork net{small_config(), "http-tests"};
  Gateway gw;
  GatewayHttpServer server;
  int port = 0;
  std::thread thread;
};

template <typename Http>
struct Scripted {
  Http& http;
  crypto::PublicKey gateway_key{};

  json post(const std::string& path, const json& body, int expect) {
    auto res = http.Post(path, body.dump(), "application/json");
    REQUIRE(res);
    CHECK(res->status == expect);
    auto reply = json::parse(res->body);
    CHECK(client::verify_reply(reply, gateway_key));
    return reply;
  }

  json get(const std::string& path, const std::string& session, int expect) {
    httplib::Headers headers;
    if (!session.empty()) headers.emplace("Authorization", "Bearer " + session);
    auto res = http.Get(path, headers);
    REQUIRE(res);
    CHECK(res->status == expect);
    return json::parse(res->body);
  }

  void fetch_key() {
    auto res = http.Get("/api/gateway-key");
    REQUIRE(res);
    REQUIRE(res->status == 200);
    const json body = json::parse(res->body);
    gateway_key = crypto::decode_public_key(body["public_key"].get<std::string>());
  }
};

struct Account {
  crypto::KeyPair keys;
  std::string account;
  std::string session;
};

template <typename Http>
Account sign_up(Scripted<Http>& s, const std::string& name) {
  auto m1 = client::make_m1(s.gateway_key, name, "pw");
  const json m4 = s.post("/api/register", m1.message, 200);
  auto reg = client::accept_m4(m4, m1.nonce, s.gateway_key);
  auto login = client::make_login(s.gateway_key, reg.keypair.private_key, name, "pw");
  const json ok = s.post("/api/login", login.message, 200);
  return {reg.keypair, *reg.response.account_num, ok["session_id"].get<std::string>()};
}

template <typename Http>
void run_script(Http& http) {
  Scripted<Http> s{http};
  s.fetch_key();
  CHECK(s.get("/api/health", "", 200)["status"] == "ok");

  auto alice = sign_up(s, "alice");
  auto bob = sign_up(s, "bob");

  const json bal = s.post("/api/chat", client::make_chat(alice.keys.private_key, alice.session,
                                                   "what is my balance").message, 200);
  CHECK(bal["transaction"]["response"]["balance"] == 10000);

  s.post("/api/chat", client::make_chat(alice.keys.private_key, alice.session,
                                        "send account no " + bob.account + " 1000 unit").message, 200);
  const json done = s.post("/api/chat", client::make_chat(alice.keys.private_key, alice.session, "yes").message, 200);
  CHECK(done["bot_text"] == "TRANSACTION SUCCESSFUL");
  CHECK(done["transaction"]["outcome"] == "committed");

  const json history = s.get("/api/explorer/history", alice.session, 200);
  CHECK(history["entries"].size() == 2);
  s.get("/api/explorer/history?account=" + bob.account, alice.session, 403);
  s.get("/api/explorer/history", "", 401);
  const auto height = done["transaction"]["block_height"].get<std::uint64_t>();
  const json block = s.get("/api/explorer/block/" + std::to_string(height), alice.session, 200);
  CHECK(block["transactions"].size() == 1);
  s.get("/api/explorer/block/999999", alice.session, 404);

  // Replay the exact bytes of a chat message.
  auto chat = client::make_chat(alice.keys.private_key, alice.session, "hello");
  s.post("/api/chat", chat.message, 200);
  s.post("/api/chat", chat.message, 409);

  auto res = http.Post("/api/chat", "{not json", "application/json");
  REQUIRE(res);
  CHECK(res->status == 400);
  CHECK(client::verify_reply(json::parse(res->body), s.gateway_key));
  CHECK(s.get("/api/nowhere", "", 404)["error"] == code::kNotFound);

  s.post("/api/logout", client::make_logout(alice.keys.private_key, alice.session).message, 200);
  s.post("/api/chat", client::make_chat(alice.keys.private_key, alice.session, "hello").message, 401);
}

}  // namespace

TEST_CASE("parse_listen") {
  CHECK(parse_listen("127.0.0.1:8080") == std::pair<std::string, int>{"127.0.0.1", 8080});
  CHECK(parse_listen(":9000") == std::pair<std::string, int>{"0.0.0.0", 9000});
  CHECK_THROWS(parse_listen("8080"));
  CHECK_THROWS(parse_listen("host:99999"));
  CHECK_THROWS(parse_listen("host:80x"));
}

TEST_CASE("scripted client over plain HTTP") {
  Running rig;
  httplib::Client http("127.0.0.1", rig.port);
  run_script(http);
}

TEST_CASE("scripted client over TLS") {
  namespace fs = std::filesystem;
  const auto dir = fs::temp_directory_path() / ("bonik-tls-" + crypto::random_token_hex().substr(0, 8));
  fs::create_directories(dir);
  const auto cert = (dir / "cert.pem").string();
  const auto key = (dir / "key.pem").string();
  const auto cmd = "openssl req -x509 -newkey rsa:2048 -nodes -days 1 -subj /CN=localhost -keyout " +
                   key + " -out " + cert + " >/dev/null 2>&1";
  if (std::system(cmd.c_str()) != 0) {
    MESSAGE("openssl CLI unavailable; TLS round-trip not exercised");
    fs::remove_all(dir);
    return;
  }
  {
    Running rig(TlsFiles{cert, key});
    httplib::SSLClient https("127.0.0.1", rig.port);
    https.set_ca_cert_path(cert.c_str());
    https.enable_server_certificate_verification(false);
    run_script(https);

    // Plain HTTP against the TLS port gets nothing usable back.
    httplib::Client plain("127.0.0.1", rig.port);
    plain.set_read_timeout(2, 0);
    auto res = plain.Get("/api/health");
    CHECK((!res || res->status != 200));
  }
  fs::remove_all(dir);
}
