/**
 * Copyright BONIK authors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

#include <json.hpp>

#include "bonik/crypto/crypto.hpp"

namespace bonik::network {

using json = nlohmann::json;

enum class Role { user, peer, endorser, orderer, gateway };

std::string_view to_string(Role role);
std::optional<Role> parse_role(std::string_view name);

struct Identity {
  std::string name;
  Role role = Role::user;
  crypto::KeyPair keypair;
  /// MSP root signature over {name, role, public_key} in canonical form.
  crypto::Signature certificate{};
};

class AlreadyRegistered : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Membership service: the certificate authority that admits entities to
/// the network.
class Msp {
 public:
  /// With a seed, the root and every issued keypair are derived from it, so
  /// a simulation can be replayed byte for byte.
  explicit Msp(std::optional<std::string> seed = std::nullopt);

  Identity register_identity(const std::string& name, Role role);
  /// Admits an entity whose keypair was produced elsewhere.
  Identity register_with_keypair(const std::string& name, Role role, crypto::KeyPair keypair);

  bool verify_certificate(const Identity& identity) const;
  static bool verify_certificate(const Identity& identity, const crypto::PublicKey& root);

  /// Public half only (the private key is zeroed).
  std::optional<Identity> lookup(std::string_view name, Role role) const;
  const crypto::PublicKey& root_public_key() const { return root_.public_key; }

  /// Public records for persistence; import re-checks every certificate.
  json export_identities(Role role) const;
  void import_identities(const json& records);

 private:
  static json certificate_body(const Identity& identity);

  std::optional<std::string> seed_;
  crypto::KeyPair root_;
  std::map<std::pair<Role, std::string>, Identity, std::less<>> registry_;
  mutable std::set<crypto::MessageDigest> verified_;
  mutable std::mutex mutex_;
};

}  // namespace bonik::network
