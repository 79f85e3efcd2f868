/**
 * Copyright BONIK authors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

#include <json.hpp>

namespace bonik::network {

using json = nlohmann::json;
using Micros = std::chrono::microseconds;

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Topology {
  int orderer_count = 2;
  int peers_per_org = 1;
  int endorsers_per_org = 2;
  int org_count = 2;

  int total_peers() const { return peers_per_org * org_count; }
  int total_endorsers() const { return endorsers_per_org * org_count; }

  /// "2O2P", "2O4P", "2O6P": two orderers, peers split evenly over two orgs,
  /// two endorsers per org.
  static Topology preset(std::string_view name);
  /// Preset name when this topology matches one, otherwise "<o>O<p>P".
  std::string name() const;
  void validate() const;
  bool operator==(const Topology&) const = default;
};

/// Milliseconds of simulated service time per pipeline stage. The defaults
/// are the calibration profile used by the benchmark.
struct LatencyProfile {
  double endorse_ms = 10.0;
  double order_base_ms = 10.0;
  double order_per_tx_ms = 3.5;
  double disseminate_per_peer_ms = 80.0;
  double commit_ms = 10.0;
  double read_ms = 0.5;
  double read_contention_ms_per_client = 5.4;

  void validate() const;
  bool operator==(const LatencyProfile&) const = default;
};

struct BatchPolicy {
  double batch_timeout_ms = 1000.0;
  int max_message_count = 500;

  void validate() const;
  bool operator==(const BatchPolicy&) const = default;
};

struct NetworkConfig {
  Topology topology;
  LatencyProfile latency;
  BatchPolicy batch;
};

Micros to_micros(double ms);

json to_json(const Topology& t);
json to_json(const LatencyProfile& p);
json to_json(const BatchPolicy& b);
json to_json(const NetworkConfig& c);

/// Accepts a preset string or a field object.
Topology topology_from_json(const json& value);
LatencyProfile latency_from_json(const json& value);
BatchPolicy batch_from_json(const json& value);
/// Missing sections keep their defaults.
NetworkConfig network_config_from_json(const json& value);
NetworkConfig load_network_config(const std::filesystem::path& path);

}  // namespace bonik::network
