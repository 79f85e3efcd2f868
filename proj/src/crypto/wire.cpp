/**
 * Copyright BONIK authors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#include "bonik/crypto/wire.hpp"

namespace bonik::crypto {

bool verify_json(const PublicKey& key, const json& value, std::string_view signature_b64) {
  Bytes sig;
  try {
    sig = from_base64(signature_b64);
  } catch (const CryptoError&) {
    return false;
  }
  return verify(key, canonical(value), sig);
}

json envelope_to_json(const SealedEnvelope& env) {
  return {{"wrapped_key", to_base64(env.wrapped_key)},
          {"ciphertext", to_base64(env.ciphertext)}};
}

SealedEnvelope envelope_from_json(const json& value) {
  if (!value.is_object() || !value.contains("wrapped_key") ||
      !value.contains("ciphertext") || !value["wrapped_key"].is_string() ||
      !value["ciphertext"].is_string()) {
    throw CryptoError("envelope must carry wrapped_key and ciphertext strings");
  }
  return {from_base64(value["wrapped_key"].get<std::string>()),
          from_base64(value["ciphertext"].get<std::string>())};
}

}  // namespace bonik::crypto
