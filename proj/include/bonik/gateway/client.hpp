/**
 * Copyright BONIK authors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <optional>
#include <string>

#include "bonik/gateway/protocol.hpp"

namespace bonik::gateway::client {

/// Builders for the client side of the wire protocol. The browser client
/// produces the same messages; tests and the scripted CLI client use these.

struct Outbound {
  json message;
  crypto::Nonce nonce;
};

/// M1: {kind, nonce, payload}, the registration request sealed to K_d with
/// the nonce bound as associated data. The password is hashed here.
Outbound make_m1(const crypto::PublicKey& gateway_key, const std::string& user_name,
                 std::string_view password);

struct Registration {
  chaincode::Response response;
  crypto::KeyPair keypair;
};

/// Checks the M4 echo of N1, H(resp') and the keypair, and the gateway's
/// signature. Throws ProtocolError on any mismatch.
Registration accept_m4(const json& m4, const crypto::Nonce& n1,
                       const crypto::PublicKey& gateway_key);

/// LOGIN: {kind, nonce, payload, signature} signed with the user's key.
Outbound make_login(const crypto::PublicKey& gateway_key, const crypto::PrivateKey& user_key,
                    const std::string& user_name, std::string_view password);

/// CHAT: {kind, session_id, nonce, utterance, signature}.
Outbound make_chat(const crypto::PrivateKey& user_key, const std::string& session_id,
                   const std::string& utterance);

/// LOGOUT: {kind, session_id, nonce, signature}.
Outbound make_logout(const crypto::PrivateKey& user_key, const std::string& session_id);

/// Verifies a gateway response signature.
bool verify_reply(const json& body, const crypto::PublicKey& gateway_key);

}  // namespace bonik::gateway::client
