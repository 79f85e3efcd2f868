/**
 * Copyright BONIK authors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#include "bonik/network/config.hpp"

#include <cmath>
#include <fstream>

namespace bonik::network {

namespace {

void require_non_negative(double v, const char* name) {
  if (!std::isfinite(v) || v < 0.0) {
    throw ConfigError(std::string(name) + " must be a finite non-negative number");
  }
}

template <typename T>
void read_field(const json& obj, const char* name, T& out) {
  if (!obj.contains(name)) return;
  try {
    out = obj.at(name).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("field '") + name + "' has the wrong type");
  }
}

}  // namespace

Topology Topology::preset(std::string_view name) {
  if (name == "2O2P") return {2, 1, 2, 2};
  if (name == "2O4P") return {2, 2, 2, 2};
  if (name == "2O6P") return {2, 3, 2, 2};
  throw ConfigError("unknown topology preset '" + std::string(name) + "'");
}

std::string Topology::name() const {
  return std::to_string(orderer_count) + "O" + std::to_string(total_peers()) + "P";
}

void Topology::validate() const {
  if (orderer_count < 1 || peers_per_org < 1 || endorsers_per_org < 1 || org_count < 1) {
    throw ConfigError("topology counts must be positive");
  }
}

void LatencyProfile::validate() const {
  require_non_negative(endorse_ms, "endorse_ms");
  require_non_negative(order_base_ms, "order_base_ms");
  require_non_negative(order_per_tx_ms, "order_per_tx_ms");
  require_non_negative(disseminate_per_peer_ms, "disseminate_per_peer_ms");
  require_non_negative(commit_ms, "commit_ms");
  require_non_negative(read_ms, "read_ms");
  require_non_negative(read_contention_ms_per_client, "read_contention_ms_per_client");
}

void BatchPolicy::validate() const {
  require_non_negative(batch_timeout_ms, "batch_timeout_ms");
  if (max_message_count < 1) throw ConfigError("max_message_count must be positive");
}

Micros to_micros(double ms) { return Micros(std::llround(ms * 1000.0)); }

json to_json(const Topology& t) {
  return {{"orderer_count", t.orderer_count},
          {"peers_per_org", t.peers_per_org},
          {"endorsers_per_org", t.endorsers_per_org},
          {"org_count", t.org_count}};
}

json to_json(const LatencyProfile& p) {
  return {{"endorse_ms", p.endorse_ms},
          {"order_base_ms", p.order_base_ms},
          {"order_per_tx_ms", p.order_per_tx_ms},
          {"disseminate_per_peer_ms", p.disseminate_per_peer_ms},
          {"commit_ms", p.commit_ms},
          {"read_ms", p.read_ms},
          {"read_contention_ms_per_client", p.read_contention_ms_per_client}};
}

json to_json(const BatchPolicy& b) {
  return {{"batch_timeout_ms", b.batch_timeout_ms}, {"max_message_count", b.max_message_count}};
}

json to_json(const NetworkConfig& c) {
  return {{"topology", to_json(c.topology)},
          {"latency", to_json(c.latency)},
          {"batch", to_json(c.batch)}};
}

Topology topology_from_json(const json& value) {
  if (value.is_string()) return Topology::preset(value.get<std::string>());
  if (!value.is_object()) throw ConfigError("topology must be a preset name or an object");
  Topology t;
  read_field(value, "orderer_count", t.orderer_count);
  read_field(value, "peers_per_org", t.peers_per_org);
  read_field(value, "endorsers_per_org", t.endorsers_per_org);
  read_field(value, "org_count", t.org_count);
  t.validate();
  return t;
}

LatencyProfile latency_from_json(const json& value) {
  if (!value.is_object()) throw ConfigError("latency must be an object");
  LatencyProfile p;
  read_field(value, "endorse_ms", p.endorse_ms);
  read_field(value, "order_base_ms", p.order_base_ms);
  read_field(value, "order_per_tx_ms", p.order_per_tx_ms);
  read_field(value, "disseminate_per_peer_ms", p.disseminate_per_peer_ms);
  read_field(value, "commit_ms", p.commit_ms);
  read_field(value, "read_ms", p.read_ms);
  read_field(value, "read_contention_ms_per_client", p.read_contention_ms_per_client);
  p.validate();
  return p;
}

BatchPolicy batch_from_json(const json& value) {
  if (!value.is_object()) throw ConfigError("batch must be an object");
  BatchPolicy b;
  read_field(value, "batch_timeout_ms", b.batch_timeout_ms);
  read_field(value, "max_message_count", b.max_message_count);
  b.validate();
  return b;
}

NetworkConfig network_config_from_json(const json& value) {
  if (!value.is_object()) throw ConfigError("network config must be an object");
  NetworkConfig c;
  if (value.contains("topology")) c.topology = topology_from_json(value["topology"]);
  if (value.contains("latency")) c.latency = latency_from_json(value["latency"]);
  if (value.contains("batch")) c.batch = batch_from_json(value["batch"]);
  return c;
}

NetworkConfig load_network_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json parsed;
  try {
    parsed = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file " + path.string() + " is not valid JSON: " + e.what());
  }
  return network_config_from_json(parsed);
}

}  // namespace bonik::network
