/**
 * Copyright BONIK authors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <string>

#include <json.hpp>

#include "bonik/crypto/crypto.hpp"

namespace bonik::crypto {

using json = nlohmann::json;

/// Sorted keys, no insignificant whitespace. Everything hashed or signed
/// goes through this form.
inline std::string canonical(const json& value) { return value.dump(); }

inline MessageDigest hash_json(const json& value) { return hash(canonical(value)); }

inline Signature sign_json(const PrivateKey& key, const json& value) {
  return sign(key, canonical(value));
}

bool verify_json(const PublicKey& key, const json& value, std::string_view signature_b64);

json envelope_to_json(const SealedEnvelope& env);
/// Throws CryptoError on missing fields or bad encodings.
SealedEnvelope envelope_from_json(const json& value);

}  // namespace bonik::crypto
