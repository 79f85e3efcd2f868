/**
 * Copyright BONIK authors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

// Standalone NLU service: POST /nlu/query, POST /nlu/forget, GET /nlu/health.

#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "bonik/gateway/http_server.hpp"
#include "bonik/nlu/service.hpp"

using namespace bonik;
namespace fs = std::filesystem;

int main(int argc, char** argv) {
  CLI::App app{"bonik-nlu: intent and entity service"};
  std::string listen = "127.0.0.1:8090";
  std::string data_dir = BONIK_DEFAULT_DATA_DIR;
  app.add_option("--listen", listen, "host:port or :port");
  app.add_option("--data-dir", data_dir, "Directory holding user_dataset.json and bot_dataset.json");
  CLI11_PARSE(app, argc, argv);

  try {
    const bool from_env = std::getenv("BONIK_NLU_SECRET") != nullptr;
    const auto secret = nlu::resolve_secret();
    auto table = std::make_shared<const nlu::PatternTable>(nlu::load_datasets(
        fs::path(data_dir) / "user_dataset.json", fs::path(data_dir) / "bot_dataset.json"));
    nlu::NluService service(table, secret);

    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);

    nlu::NluHttpServer server(service);
    auto [host, port] = gateway::parse_listen(listen);
    const int bound = server.bind(host, port);
    if (bound < 0) throw std::runtime_error("cannot bind " + listen);
    std::printf("bonik-nlu listening on http://%s:%d (%zu intents)\n", host.c_str(), bound,
                table->intent_count());
    if (!from_env) {
      // Only a generated secret is shown; one from the environment is already known.
      std::printf("BONIK_NLU_SECRET=%s\n", secret.c_str());
    }
    std::fflush(stdout);

    std::thread serving([&server] { server.listen_after_bind(); });
    int sig = 0;
    sigwait(&signals, &sig);
    server.stop();
    serving.join();
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "bonik-nlu: " << e.what() << "\n";
    return 2;
  }
}
