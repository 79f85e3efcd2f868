/**
 * Copyright BONIK authors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

// HTTP gateway in front of the ledger network and the NLU engine.

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "bonik/gateway/http_server.hpp"
#include "bonik/ledger/block.hpp"
#include "bonik/network/network.hpp"

using namespace bonik;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct Options {
  std::string config_path;
  std::string mode = "interactive";
  std::string listen = "127.0.0.1:8080";
  std::string ledger_path;
  std::string seed;
  std::string nlu_url;
  std::string data_dir = BONIK_DEFAULT_DATA_DIR;
  std::string tls_cert;
  std::string tls_key;
};

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return json::parse(in);
}

/// Writes through a temporary file so a crash never leaves half a document.
void write_atomically(const fs::path& path, const std::string& text) {
  const auto tmp = fs::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << text;
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::pair<std::string, int> parse_nlu_url(const std::string& url) {
  constexpr std::string_view scheme = "http://";
  if (url.rfind(scheme, 0) != 0) throw std::invalid_argument("--nlu-url must start with http://");
  auto rest = url.substr(scheme.size());
  if (auto slash = rest.find('/'); slash != std::string::npos) rest.resize(slash);
  return gateway::parse_listen(rest);
}

/// Blocks SIGINT/SIGTERM in every thread; the main thread collects them.
sigset_t block_stop_signals() {
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);
  return set;
}

int run(const Options& opt) {
  json doc = opt.config_path.empty() ? json::object() : read_json(opt.config_path);
  const auto net_config = network::network_config_from_json(doc);
  std::string seed = opt.seed;
  if (seed.empty() && doc.contains("seed")) seed = doc["seed"].get<std::string>();
  const json gw_doc = doc.value("gateway", json::object());

  if (!opt.ledger_path.empty() && seed.empty()) {
    throw std::invalid_argument("--ledger-path needs a network seed (--seed or \"seed\" in the config) "
                                "so certificates verify after a restart");
  }

  std::unique_ptr<network::TransactionService> net;
  std::optional<std::string> seed_opt = seed.empty() ? std::nullopt : std::optional(seed);
  if (opt.mode == "bench") {
    net = std::make_unique<network::SimulatedNetwork>(net_config, seed.empty() ? "bench" : seed);
  } else {
    net = std::make_unique<network::LiveNetwork>(net_config, seed_opt);
  }

  // Ledger file: one canonical block per line, appended as blocks commit.
  std::ofstream ledger_out;
  fs::path users_path;
  if (!opt.ledger_path.empty()) {
    const fs::path path = opt.ledger_path;
    if (fs::exists(path)) {
      std::ifstream in(path);
      net->consortium().load_ledger(in);
      std::fprintf(stderr, "loaded %llu blocks from %s\n",
                   static_cast<unsigned long long>(net->consortium().ledger().tip_height() + 1),
                   path.string().c_str());
    } else {
      std::ofstream fresh(path, std::ios::binary);
      net->consortium().ledger().write_to(fresh);
    }
    ledger_out.open(path, std::ios::binary | std::ios::app);
    if (!ledger_out) throw std::runtime_error("cannot append to " + path.string());
    net->consortium().ledger().set_block_sink([&ledger_out](const ledger::Block& block) {
      ledger_out << ledger::block_line(block) << '\n';
      ledger_out.flush();
    });
    users_path = path.string() + ".users.json";
  }

  std::optional<std::string> configured_secret;
  if (gw_doc.contains("nlu_secret")) configured_secret = gw_doc["nlu_secret"].get<std::string>();
  const auto secret = nlu::resolve_secret(configured_secret);

  std::shared_ptr<nlu::NluClient> nlu_client;
  if (!opt.nlu_url.empty()) {
    if (!std::getenv("BONIK_NLU_SECRET") && !configured_secret) {
      throw std::invalid_argument("a remote NLU needs BONIK_NLU_SECRET (or gateway.nlu_secret)");
    }
    auto [host, port] = parse_nlu_url(opt.nlu_url);
    nlu_client = std::make_shared<nlu::HttpNluClient>(host, port, secret);
  } else {
    auto table = std::make_shared<const nlu::PatternTable>(nlu::load_datasets(
        fs::path(opt.data_dir) / "user_dataset.json", fs::path(opt.data_dir) / "bot_dataset.json"));
    nlu_client = std::make_shared<nlu::NluService>(table, secret);
  }

  gateway::Gateway gw(*net, nlu_client, secret);
  if (!users_path.empty()) {
    if (fs::exists(users_path)) gw.import_users(read_json(users_path));
    gw.on_user_registered([users_path](const gateway::Gateway& g) {
      write_atomically(users_path, g.export_users().dump(2) + "\n");
    });
  }

  std::optional<gateway::TlsFiles> tls;
  if (!opt.tls_cert.empty() || !opt.tls_key.empty()) {
    if (opt.tls_cert.empty() || opt.tls_key.empty()) {
      throw std::invalid_argument("--tls-cert and --tls-key go together");
    }
    tls = gateway::TlsFiles{opt.tls_cert, opt.tls_key};
  }

  const auto signals = block_stop_signals();
  gateway::GatewayHttpServer server(gw, tls);
  if (!server.valid()) throw std::runtime_error("TLS certificate or key could not be loaded");
  auto [host, port] = gateway::parse_listen(opt.listen);
  const int bound = server.bind(host, port);
  if (bound < 0) throw std::runtime_error("cannot bind " + opt.listen);
  std::printf("bonik-gateway %s mode, listening on %s://%s:%d, key %s\n", opt.mode.c_str(),
              tls ? "https" : "http", host.c_str(), bound, crypto::encode(gw.public_key()).c_str());
  std::fflush(stdout);

  std::thread serving([&server] { server.listen_after_bind(); });
  int sig = 0;
  sigwait(&signals, &sig);
  std::fprintf(stderr, "signal %d, shutting down\n", sig);
  server.stop();
  serving.join();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bonik-gateway: chat gateway over the ledger network"};
  Options opt;
  app.add_option("--config", opt.config_path, "JSON config (seed, topology, latency, batch, gateway)")
      ->check(CLI::ExistingFile);
  app.add_option("--mode", opt.mode, "interactive (wall clock) or bench (virtual clock)")
      ->check(CLI::IsMember({"interactive", "bench"}));
  app.add_option("--listen", opt.listen, "host:port or :port");
  app.add_option("--ledger-path", opt.ledger_path, "Ledger file; users go to <path>.users.json");
  app.add_option("--seed", opt.seed, "Network seed (MSP root and entity keys)");
  app.add_option("--nlu-url", opt.nlu_url, "Remote NLU, e.g. http://127.0.0.1:8090 (default: in-process)");
  app.add_option("--data-dir", opt.data_dir, "Directory holding user_dataset.json and bot_dataset.json");
  app.add_option("--tls-cert", opt.tls_cert, "PEM certificate for HTTPS")->check(CLI::ExistingFile);
  app.add_option("--tls-key", opt.tls_key, "PEM private key for HTTPS")->check(CLI::ExistingFile);
  CLI11_PARSE(app, argc, argv);

  try {
    return run(opt);
  } catch (const std::exception& e) {
    std::cerr << "bonik-gateway: " << e.what() << "\n";
    return 2;
  }
}
