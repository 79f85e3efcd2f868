/**
 * Copyright BONIK authors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

// Drives the shipped binaries as separate processes.

#include <doctest.h>

#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <regex>

#include <httplib.h>

#include "bonik/gateway/client.hpp"
#include "bonik/ledger/ledger.hpp"

extern char** environ;

using namespace bonik;
using namespace bonik::gateway;
namespace fs = std::filesystem;

namespace {

/// A child process whose stdout is read until a "listening on ...:<port>" line.
class Child {
 public:
  explicit Child(std::vector<std::string> argv) {
    int fds[2];
    REQUIRE(pipe(fds) == 0);
    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    posix_spawn_file_actions_adddup2(&actions, fds[1], STDOUT_FILENO);
    posix_spawn_file_actions_addclose(&actions, fds[0]);
    std::vector<char*> args;
    for (auto& a : argv) args.push_back(a.data());
    args.push_back(nullptr);
    REQUIRE(posix_spawn(&pid_, args[0], &actions, nullptr, args.data(), environ) == 0);
    posix_spawn_file_actions_destroy(&actions);
    close(fds[1]);
    out_ = fdopen(fds[0], "r");
  }
  ~Child() {
    if (pid_ > 0) stop();
    if (out_) fclose(out_);
  }

  /// Reads stdout lines until one matches; returns the first capture group.
  std::string wait_for(const std::regex& pattern) {
    char line[1024];
    while (std::fgets(line, sizeof line, out_)) {
      lines_.emplace_back(line);
      std::smatch m;
      if (std::regex_search(lines_.back(), m, pattern)) return m[1].str();
    }
    FAIL("process exited before printing the expected line");
    return {};
  }

  int stop() {
    kill(pid_, SIGTERM);
    return wait();
  }

  /// Waits for exit without signalling.
  int wait() {
    int status = 0;
    waitpid(pid_, &status, 0);
    pid_ = -1;
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

 private:
  pid_t pid_ = -1;
  FILE* out_ = nullptr;
  std::vector<std::string> lines_;
};

int port_of(Child& child) {
  return std::stoi(child.wait_for(std::regex(R"(listening on https?://[^:]+:(\d+))")));
}

json post(httplib::Client& http, const std::string& path, const json& body, int expect) {
  auto res = http.Post(path, body.dump(), "application/json");
  REQUIRE(res);
  CHECK(res->status == expect);
  return json::parse(res->body);
}

crypto::PublicKey fetch_key(httplib::Client& http) {
  auto res = http.Get("/api/gateway-key");
  REQUIRE(res);
  return crypto::decode_public_key(json::parse(res->body)["public_key"].get<std::string>());
}

std::string login(httplib::Client& http, const crypto::PublicKey& key, const crypto::PrivateKey& user_key,
                  const std::string& name) {
  auto msg = client::make_login(key, user_key, name, "pw");
  return post(http, "/api/login", msg.message, 200)["session_id"].get<std::string>();
}

}  // namespace

TEST_CASE("gateway and nlu binaries: scripted session survives a restart") {
  const auto dir = fs::temp_directory_path() / ("bonik-cli-" + crypto::random_token_hex().substr(0, 8));
  fs::create_directories(dir);
  const auto ledger_path = (dir / "ledger.ndjson").string();
  const std::string secret(64, 'b');
  setenv("BONIK_NLU_SECRET", secret.c_str(), 1);

  Child nlu({BONIK_NLU_BIN, "--listen", "127.0.0.1:0"});
  const int nlu_port = port_of(nlu);
  const std::vector<std::string> gateway_argv{BONIK_GATEWAY_BIN, "--listen", "127.0.0.1:0",
                                              "--seed", "cli-test", "--ledger-path", ledger_path,
                                              "--nlu-url", "http://127.0.0.1:" + std::to_string(nlu_port),
                                              "--config", BONIK_CONFIG_DIR "/paper-calibration.json"};

  crypto::KeyPair alice_keys;
  std::string bob_account;
  {
    Child gw(gateway_argv);
    httplib::Client http("127.0.0.1", port_of(gw));
    const auto key = fetch_key(http);

    auto enroll = [&](const std::string& name) {
      auto m1 = client::make_m1(key, name, "pw");
      return client::accept_m4(post(http, "/api/register", m1.message, 200), m1.nonce, key);
    };
    auto alice = enroll("alice");
    auto bob = enroll("bob");
    alice_keys = alice.keypair;
    bob_account = *bob.response.account_num;

    const auto session = login(http, key, alice_keys.private_key, "alice");
    post(http, "/api/chat",
         client::make_chat(alice_keys.private_key, session, "send 1200 to " + bob_account).message, 200);
    auto done = post(http, "/api/chat", client::make_chat(alice_keys.private_key, session, "yes").message, 200);
    CHECK(done["bot_text"] == "TRANSACTION SUCCESSFUL");
    CHECK(gw.stop() == 0);
  }

  // The ledger file on disk verifies on its own.
  {
    std::ifstream in(ledger_path);
    auto ledger = ledger::Ledger::load(in);
    CHECK(ledger.verify_chain());
    CHECK(ledger.tip_height() >= 3);
  }
  CHECK(fs::exists(ledger_path + ".users.json"));

  {
    Child gw(gateway_argv);
    httplib::Client http("127.0.0.1", port_of(gw));
    const auto key = fetch_key(http);
    const auto session = login(http, key, alice_keys.private_key, "alice");
    auto bal = post(http, "/api/chat",
                    client::make_chat(alice_keys.private_key, session, "what is my balance").message, 200);
    CHECK(bal["transaction"]["response"]["balance"] == 8800);
    auto history = http.Get("/api/explorer/history", {{"Authorization", "Bearer " + session}});
    REQUIRE(history);
    CHECK(json::parse(history->body)["entries"].size() == 2);
    CHECK(gw.stop() == 0);
  }

  CHECK(nlu.stop() == 0);
  unsetenv("BONIK_NLU_SECRET");
  fs::remove_all(dir);
}

TEST_CASE("gateway refuses persistence without a seed and bench rejects bad input") {
  Child gw({BONIK_GATEWAY_BIN, "--listen", "127.0.0.1:0", "--ledger-path", "/tmp/bonik-never.ndjson"});
  CHECK(gw.wait() == 2);
  CHECK_FALSE(fs::exists("/tmp/bonik-never.ndjson"));

  Child bench({BONIK_BENCH_BIN, "--workload", "create", "--users", "10", "--topology", "2O2P", "--config",
               "/nonexistent.json"});
  CHECK(bench.wait() != 0);
}

TEST_CASE("bench binary writes the csv") {
  const auto out = (fs::temp_directory_path() / "bonik-cli-bench.csv").string();
  Child bench({BONIK_BENCH_BIN, "--workload", "query", "--users", "10", "--duration", "5", "--repetitions",
               "2", "--out", out});
  bench.wait_for(std::regex("wrote (.*)"));
  std::ifstream in(out);
  std::string header;
  std::getline(in, header);
  CHECK(header == "workload,users,topology,repetition,committed,aborted,elapsed_ms,tps");
  int rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  CHECK(rows == 2);
  fs::remove(out);
}
