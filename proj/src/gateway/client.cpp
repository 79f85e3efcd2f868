/**
 * Copyright BONIK authors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#include "bonik/gateway/client.hpp"

#include "bonik/crypto/wire.hpp"

namespace bonik::gateway::client {

namespace {

json seal_request(const crypto::PublicKey& gateway_key, const chaincode::Request& req,
                  const crypto::Nonce& nonce) {
  const auto plain = crypto::canonical(chaincode::to_json(req));
  const auto aad = nonce.to_hex();
  return crypto::envelope_to_json(crypto::seal(gateway_key, crypto::as_bytes(plain), crypto::as_bytes(aad)));
}

}  // namespace

Outbound make_m1(const crypto::PublicKey& gateway_key, const std::string& user_name,
                 std::string_view password) {
  const auto n1 = crypto::fresh_nonce();
  const chaincode::Request req{chaincode::RegisData{user_name, crypto::hash(password)}};
  return {{{"kind", "M1"}, {"nonce", n1.to_hex()}, {"payload", seal_request(gateway_key, req, n1)}}, n1};
}

Registration accept_m4(const json& m4, const crypto::Nonce& n1,
                       const crypto::PublicKey& gateway_key) {
  auto reject = [](const std::string& why) { return ProtocolError(400, code::kProtocol, why); };
  if (!verify_signed_message(gateway_key, m4)) throw reject("gateway signature does not verify");
  try {
    if (m4.at("kind") != "M4") throw reject("not an M4");
    if (m4.at("nonce").get<std::string>() != n1.to_hex()) throw reject("N1 not echoed");
    const auto& resp_prime = m4.at("resp_prime");
    if (crypto::hash_json(resp_prime).to_hex() != m4.at("digest").get<std::string>()) {
      throw reject("digest mismatch");
    }
    Registration out;
    out.response = chaincode::response_from_json(resp_prime.at("resp"));
    out.keypair.public_key = crypto::decode_public_key(resp_prime.at("public_key").get<std::string>());
    out.keypair.private_key = crypto::decode_private_key(resp_prime.at("private_key").get<std::string>());
    if (!crypto::is_matching_pair(out.keypair.public_key, out.keypair.private_key)) {
      throw reject("keypair does not match");
    }
    return out;
  } catch (const json::exception& e) {
    throw reject(e.what());
  } catch (const crypto::CryptoError& e) {
    throw reject(e.what());
  }
}

Outbound make_login(const crypto::PublicKey& gateway_key, const crypto::PrivateKey& user_key,
                    const std::string& user_name, std::string_view password) {
  const auto nonce = crypto::fresh_nonce();
  const chaincode::Request req{chaincode::LoginData{user_name, crypto::hash(password)}};
  json msg{{"kind", "LOGIN"}, {"nonce", nonce.to_hex()}, {"payload", seal_request(gateway_key, req, nonce)}};
  return {signed_message(user_key, std::move(msg)), nonce};
}

Outbound make_chat(const crypto::PrivateKey& user_key, const std::string& session_id,
                   const std::string& utterance) {
  const auto nonce = crypto::fresh_nonce();
  json msg{{"kind", "CHAT"},
           {"session_id", session_id},
           {"nonce", nonce.to_hex()},
           {"utterance", utterance}};
  return {signed_message(user_key, std::move(msg)), nonce};
}

Outbound make_logout(const crypto::PrivateKey& user_key, const std::string& session_id) {
  const auto nonce = crypto::fresh_nonce();
  json msg{{"kind", "LOGOUT"}, {"session_id", session_id}, {"nonce", nonce.to_hex()}};
  return {signed_message(user_key, std::move(msg)), nonce};
}

bool verify_reply(const json& body, const crypto::PublicKey& gateway_key) {
  return verify_signed_message(gateway_key, body);
}

}  // namespace bonik::gateway::client
