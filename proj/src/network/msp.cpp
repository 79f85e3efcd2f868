/**
 * Copyright BONIK authors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#include "bonik/network/msp.hpp"

#include <array>
#include <cstring>

#include "bonik/crypto/wire.hpp"

namespace bonik::network {

namespace {

constexpr std::array<std::string_view, 5> kRoleNames = {"user", "peer", "endorser", "orderer",
                                                         "gateway"};

}  // namespace

std::string_view to_string(Role role) { return kRoleNames[static_cast<std::size_t>(role)]; }

std::optional<Role> parse_role(std::string_view name) {
  for (std::size_t i = 0; i < kRoleNames.size(); ++i) {
    if (kRoleNames[i] == name) return static_cast<Role>(i);
  }
  return std::nullopt;
}

Msp::Msp(std::optional<std::string> seed) : seed_(std::move(seed)) {
  root_ = seed_ ? crypto::keypair_from_seed(*seed_ + "/msp-root") : crypto::generate_keypair();
}

json Msp::certificate_body(const Identity& identity) {
  return {{"name", identity.name},
          {"role", std::string(to_string(identity.role))},
          {"public_key", crypto::encode(identity.keypair.public_key)}};
}

Identity Msp::register_identity(const std::string& name, Role role) {
  auto keypair = seed_ ? crypto::keypair_from_seed(*seed_ + "/" + std::string(to_string(role)) +
                                                   "/" + name)
                       : crypto::generate_keypair();
  return register_with_keypair(name, role, keypair);
}

Identity Msp::register_with_keypair(const std::string& name, Role role,
                                    crypto::KeyPair keypair) {
  Identity id{name, role, keypair, {}};
  id.certificate = crypto::sign_json(root_.private_key, certificate_body(id));

  std::lock_guard lock(mutex_);
  auto [it, inserted] = registry_.try_emplace({role, name}, id);
  if (!inserted) {
    throw AlreadyRegistered(std::string(to_string(role)) + " '" + name + "' already registered");
  }
  it->second.keypair.private_key = {};
  return id;
}

bool Msp::verify_certificate(const Identity& identity) const {
  // Verification is a pure function of (body, certificate), so positive
  // results can be memoized; the submit path checks the same few identities
  // over and over.
  auto key = crypto::hash(crypto::canonical(certificate_body(identity)) +
                          crypto::to_hex({identity.certificate.data(), identity.certificate.size()}));
  {
    std::lock_guard lock(mutex_);
    if (verified_.count(key)) return true;
  }
  if (!verify_certificate(identity, root_.public_key)) return false;
  std::lock_guard lock(mutex_);
  verified_.insert(key);
  return true;
}

bool Msp::verify_certificate(const Identity& identity, const crypto::PublicKey& root) {
  return crypto::verify(root, crypto::canonical(certificate_body(identity)),
                        identity.certificate);
}

std::optional<Identity> Msp::lookup(std::string_view name, Role role) const {
  std::lock_guard lock(mutex_);
  auto it = registry_.find(std::pair<Role, std::string>{role, std::string(name)});
  if (it == registry_.end()) return std::nullopt;
  return it->second;
}

json Msp::export_identities(Role role) const {
  std::lock_guard lock(mutex_);
  json out = json::array();
  for (const auto& [key, id] : registry_) {
    if (key.first != role) continue;
    out.push_back({{"name", id.name},
                   {"role", std::string(to_string(id.role))},
                   {"public_key", crypto::encode(id.keypair.public_key)},
                   {"certificate", crypto::encode(id.certificate)}});
  }
  return out;
}

void Msp::import_identities(const json& records) {
  for (const auto& r : records) {
    Identity id;
    id.name = r.at("name").get<std::string>();
    auto role = parse_role(r.at("role").get<std::string>());
    if (!role) throw std::invalid_argument("unknown role in identity record");
    id.role = *role;
    id.keypair.public_key = crypto::decode_public_key(r.at("public_key").get<std::string>());
    auto cert = crypto::from_base64(r.at("certificate").get<std::string>());
    if (cert.size() != id.certificate.size()) throw std::invalid_argument("bad certificate size");
    std::memcpy(id.certificate.data(), cert.data(), cert.size());
    if (!verify_certificate(id)) {
      throw std::invalid_argument("certificate for '" + id.name + "' does not verify");
    }
    std::lock_guard lock(mutex_);
    registry_.insert_or_assign({id.role, id.name}, id);
  }
}

}  // namespace bonik::network
