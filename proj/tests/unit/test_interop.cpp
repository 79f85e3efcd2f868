/**
 * Copyright BONIK authors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

// Shared fixtures for the browser client: anything signed, sealed or hashed
// on one side must check out on the other.

#include <doctest.h>

#include <fstream>

#include <openssl/sha.h>

#include "bonik/crypto/wire.hpp"
#include "bonik/gateway/protocol.hpp"

using namespace bonik;
using json = nlohmann::json;

namespace {

json fixtures() {
  std::ifstream in(BONIK_FIXTURE_DIR "/crypto_interop.json");
  REQUIRE(in.good());
  return json::parse(in);
}

std::string openssl_sha256(const std::string& text) {
  unsigned char out[SHA256_DIGEST_LENGTH];
  SHA256(reinterpret_cast<const unsigned char*>(text.data()), text.size(), out);
  return crypto::to_hex({out, sizeof out});
}

}  // namespace

TEST_CASE("seeded keys match the fixture") {
  const auto doc = fixtures();
  for (const char* who : {"user", "gateway"}) {
    const auto& entry = doc[who];
    const auto kp = crypto::keypair_from_seed(entry["seed"].get<std::string>());
    CHECK(crypto::encode(kp.public_key) == entry["public_key"]);
    CHECK(crypto::encode(kp.private_key) == entry["private_key"]);
  }
}

TEST_CASE("fixture signatures verify and re-signing reproduces them") {
  const auto doc = fixtures();
  const auto user_pub = crypto::decode_public_key(doc["user"]["public_key"].get<std::string>());
  const auto user_priv = crypto::decode_private_key(doc["user"]["private_key"].get<std::string>());
  const auto gw_pub = crypto::decode_public_key(doc["gateway"]["public_key"].get<std::string>());
  REQUIRE(doc["signed_by_user"].size() >= 4);
  for (const auto& m : doc["signed_by_user"]) {
    CHECK(gateway::verify_signed_message(user_pub, m));
    CHECK_FALSE(gateway::verify_signed_message(gw_pub, m));
    auto bare = m;
    bare.erase("signature");
    CHECK(gateway::signed_message(user_priv, bare) == m);
    // The browser signs exactly these bytes.
    CHECK(gateway::signing_payload(m) == bare.dump());
    auto tampered = m;
    tampered["nonce"] = std::string(64, '9');
    CHECK_FALSE(gateway::verify_signed_message(user_pub, tampered));
  }
  for (const auto& m : doc["signed_by_gateway"]) {
    CHECK(gateway::verify_signed_message(gw_pub, m));
  }
}

TEST_CASE("fixture envelopes open with the gateway key and their associated data") {
  const auto doc = fixtures();
  const auto gw_priv = crypto::decode_private_key(doc["gateway"]["private_key"].get<std::string>());
  const auto user_priv = crypto::decode_private_key(doc["user"]["private_key"].get<std::string>());
  for (const auto& e : doc["envelopes"]) {
    const auto env = crypto::envelope_from_json(e["envelope"]);
    const auto aad = e["associated_data"].get<std::string>();
    const auto plain = crypto::open(gw_priv, env, crypto::as_bytes(aad));
    CHECK(std::string(plain.begin(), plain.end()) == e["plaintext"]);
    CHECK_THROWS(crypto::open(gw_priv, env, crypto::as_bytes(std::string(64, '0'))));
    CHECK_THROWS(crypto::open(user_priv, env, crypto::as_bytes(aad)));
  }
}

TEST_CASE("canonical form and digests agree with an independent SHA-256") {
  const auto doc = fixtures();
  for (const auto& h : doc["hashes"]) {
    const auto text = h["canonical"].get<std::string>();
    CHECK(crypto::canonical(json::parse(text)) == text);
    CHECK(crypto::hash_json(json::parse(text)).to_hex() == h["sha256"]);
    CHECK(openssl_sha256(text) == h["sha256"]);
  }
}
