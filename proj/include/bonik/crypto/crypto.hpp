/**
 * Copyright BONIK authors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace bonik::crypto {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

class CryptoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Fixed-width binary value with lowercase hex wire form.
template <std::size_t N, typename Tag>
class FixedBytes {
 public:
  static constexpr std::size_t kSize = N;

  FixedBytes() = default;
  explicit FixedBytes(const std::array<std::uint8_t, N>& raw) : raw_(raw) {}

  /// Parses exactly 2*N lowercase hex characters; anything else throws CryptoError.
  static FixedBytes from_hex(std::string_view hex);

  std::string to_hex() const;
  const std::array<std::uint8_t, N>& bytes() const { return raw_; }
  std::array<std::uint8_t, N>& bytes() { return raw_; }
  ByteView view() const { return {raw_.data(), raw_.size()}; }

  auto operator<=>(const FixedBytes&) const = default;

 private:
  std::array<std::uint8_t, N> raw_{};
};

struct DigestTag;
struct NonceTag;

/// SHA-256 output.
using MessageDigest = FixedBytes<32, DigestTag>;
/// 128-bit single-use token.
using Nonce = FixedBytes<16, NonceTag>;

/// Ed25519 verification key; the same key encrypts to its owner via the
/// birationally equivalent X25519 point.
struct PublicKey {
  std::array<std::uint8_t, 32> raw{};
  auto operator<=>(const PublicKey&) const = default;
};

/// Ed25519 secret key (seed followed by public key).
struct PrivateKey {
  std::array<std::uint8_t, 64> raw{};
  bool operator==(const PrivateKey&) const = default;
};

struct KeyPair {
  PublicKey public_key;
  PrivateKey private_key;
};

using Signature = std::array<std::uint8_t, 64>;

/// Hybrid ciphertext: a random content key sealed to the recipient and the
/// payload under XChaCha20-Poly1305 with that key.
struct SealedEnvelope {
  Bytes wrapped_key;
  Bytes ciphertext;  // 24-byte nonce followed by AEAD output
  bool operator==(const SealedEnvelope&) const = default;
};

inline constexpr std::size_t kDefaultSealLimit = 64 * 1024;

MessageDigest hash(ByteView message);
MessageDigest hash(std::string_view message);

KeyPair generate_keypair();
/// Deterministic keypair for simulations; the seed is expanded with SHA-256.
KeyPair keypair_from_seed(std::string_view seed_material);

Signature sign(const PrivateKey& key, ByteView message);
Signature sign(const PrivateKey& key, std::string_view message);
bool verify(const PublicKey& key, ByteView message, ByteView signature);
bool verify(const PublicKey& key, std::string_view message, ByteView signature);
/// True iff the private key's embedded public half matches and signs for it.
bool is_matching_pair(const PublicKey& pub, const PrivateKey& priv);

SealedEnvelope seal(const PublicKey& recipient, ByteView payload,
                    ByteView associated_data = {},
                    std::size_t limit = kDefaultSealLimit);
Bytes open(const PrivateKey& recipient, const SealedEnvelope& envelope,
           ByteView associated_data = {},
           std::size_t limit = kDefaultSealLimit);

Nonce fresh_nonce();
/// 256 random bits as lowercase hex (session ids, shared secrets).
std::string random_token_hex();

/// Constant-time comparison of two equal-length strings.
bool constant_time_equal(std::string_view a, std::string_view b);

// Wire encodings.
std::string to_hex(ByteView data);
Bytes from_hex(std::string_view hex);
std::string to_base64(ByteView data);
Bytes from_base64(std::string_view b64);

std::string encode(const PublicKey& key);
std::string encode(const PrivateKey& key);
std::string encode(const Signature& sig);
PublicKey decode_public_key(std::string_view b64);
PrivateKey decode_private_key(std::string_view b64);

inline ByteView as_bytes(std::string_view s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

}  // namespace bonik::crypto
