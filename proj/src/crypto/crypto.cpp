/**
 * Copyright BONIK authors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#include "bonik/crypto/crypto.hpp"

#include <sodium.h>

#include <cstdlib>
#include <cstring>

namespace bonik::crypto {

namespace {

void ensure_sodium() {
  static const bool ready = [] {
    if (sodium_init() < 0) {
      // Without a working entropy source nothing downstream is safe.
      std::abort();
    }
    return true;
  }();
  (void)ready;
}

bool is_lower_hex(std::string_view s) {
  for (char c : s) {
    if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) return false;
  }
  return true;
}

}  // namespace

template <std::size_t N, typename Tag>
FixedBytes<N, Tag> FixedBytes<N, Tag>::from_hex(std::string_view hex) {
  if (hex.size() != 2 * N || !is_lower_hex(hex)) {
    throw CryptoError("expected " + std::to_string(2 * N) +
                      " lowercase hex characters");
  }
  FixedBytes out;
  auto bytes = crypto::from_hex(hex);
  std::memcpy(out.raw_.data(), bytes.data(), N);
  return out;
}

template <std::size_t N, typename Tag>
std::string FixedBytes<N, Tag>::to_hex() const {
  return crypto::to_hex(view());
}

template class FixedBytes<32, DigestTag>;
template class FixedBytes<16, NonceTag>;

MessageDigest hash(ByteView message) {
  ensure_sodium();
  std::array<std::uint8_t, 32> out{};
  crypto_hash_sha256(out.data(), message.data(), message.size());
  return MessageDigest(out);
}

MessageDigest hash(std::string_view message) { return hash(as_bytes(message)); }

KeyPair generate_keypair() {
  ensure_sodium();
  KeyPair kp;
  if (crypto_sign_keypair(kp.public_key.raw.data(), kp.private_key.raw.data()) != 0) {
    throw CryptoError("keypair generation failed");
  }
  return kp;
}

KeyPair keypair_from_seed(std::string_view seed_material) {
  ensure_sodium();
  auto seed = hash(seed_material);
  KeyPair kp;
  crypto_sign_seed_keypair(kp.public_key.raw.data(), kp.private_key.raw.data(),
                           seed.bytes().data());
  return kp;
}

Signature sign(const PrivateKey& key, ByteView message) {
  ensure_sodium();
  Signature sig{};
  crypto_sign_detached(sig.data(), nullptr, message.data(), message.size(),
                       key.raw.data());
  return sig;
}

Signature sign(const PrivateKey& key, std::string_view message) {
  return sign(key, as_bytes(message));
}

bool verify(const PublicKey& key, ByteView message, ByteView signature) {
  ensure_sodium();
  if (signature.size() != crypto_sign_BYTES) return false;
  return crypto_sign_verify_detached(signature.data(), message.data(),
                                     message.size(), key.raw.data()) == 0;
}

bool verify(const PublicKey& key, std::string_view message, ByteView signature) {
  return verify(key, as_bytes(message), signature);
}

bool is_matching_pair(const PublicKey& pub, const PrivateKey& priv) {
  std::array<std::uint8_t, 32> embedded{};
  crypto_sign_ed25519_sk_to_pk(embedded.data(), priv.raw.data());
  if (embedded != pub.raw) return false;
  static constexpr std::string_view probe = "keypair-probe";
  auto sig = sign(priv, probe);
  return verify(pub, probe, sig);
}

SealedEnvelope seal(const PublicKey& recipient, ByteView payload,
                    ByteView associated_data, std::size_t limit) {
  ensure_sodium();
  if (payload.size() > limit) {
    throw CryptoError("payload exceeds seal limit of " + std::to_string(limit) +
                      " bytes");
  }
  std::array<std::uint8_t, crypto_box_PUBLICKEYBYTES> x_pub{};
  if (crypto_sign_ed25519_pk_to_curve25519(x_pub.data(), recipient.raw.data()) != 0) {
    throw CryptoError("recipient key is not a valid curve point");
  }

  std::array<std::uint8_t, crypto_aead_xchacha20poly1305_ietf_KEYBYTES> content_key{};
  crypto_aead_xchacha20poly1305_ietf_keygen(content_key.data());

  SealedEnvelope env;
  env.wrapped_key.resize(crypto_box_SEALBYTES + content_key.size());
  crypto_box_seal(env.wrapped_key.data(), content_key.data(), content_key.size(),
                  x_pub.data());

  constexpr auto npub = crypto_aead_xchacha20poly1305_ietf_NPUBBYTES;
  env.ciphertext.resize(npub + payload.size() + crypto_aead_xchacha20poly1305_ietf_ABYTES);
  randombytes_buf(env.ciphertext.data(), npub);
  unsigned long long written = 0;
  crypto_aead_xchacha20poly1305_ietf_encrypt(
      env.ciphertext.data() + npub, &written, payload.data(), payload.size(),
      associated_data.data(), associated_data.size(), nullptr,
      env.ciphertext.data(), content_key.data());
  env.ciphertext.resize(npub + written);
  sodium_memzero(content_key.data(), content_key.size());
  return env;
}

Bytes open(const PrivateKey& recipient, const SealedEnvelope& envelope,
           ByteView associated_data, std::size_t limit) {
  ensure_sodium();
  constexpr auto npub = crypto_aead_xchacha20poly1305_ietf_NPUBBYTES;
  constexpr auto abytes = crypto_aead_xchacha20poly1305_ietf_ABYTES;
  constexpr auto key_bytes = crypto_aead_xchacha20poly1305_ietf_KEYBYTES;
  if (envelope.wrapped_key.size() != crypto_box_SEALBYTES + key_bytes) {
    throw CryptoError("wrapped key has wrong length");
  }
  if (envelope.ciphertext.size() < npub + abytes ||
      envelope.ciphertext.size() - npub - abytes > limit) {
    throw CryptoError("ciphertext has invalid length");
  }

  std::array<std::uint8_t, crypto_box_SECRETKEYBYTES> x_sec{};
  std::array<std::uint8_t, crypto_box_PUBLICKEYBYTES> x_pub{};
  if (crypto_sign_ed25519_sk_to_curve25519(x_sec.data(), recipient.raw.data()) != 0 ||
      crypto_sign_ed25519_pk_to_curve25519(x_pub.data(), recipient.raw.data() + 32) != 0) {
    throw CryptoError("private key cannot be converted for decryption");
  }

  std::array<std::uint8_t, key_bytes> content_key{};
  const int unwrap = crypto_box_seal_open(content_key.data(), envelope.wrapped_key.data(),
                                          envelope.wrapped_key.size(), x_pub.data(),
                                          x_sec.data());
  sodium_memzero(x_sec.data(), x_sec.size());
  if (unwrap != 0) throw CryptoError("content key unwrap failed");

  Bytes plain(envelope.ciphertext.size() - npub - abytes);
  unsigned long long plain_len = 0;
  const int rc = crypto_aead_xchacha20poly1305_ietf_decrypt(
      plain.data(), &plain_len, nullptr, envelope.ciphertext.data() + npub,
      envelope.ciphertext.size() - npub, associated_data.data(),
      associated_data.size(), envelope.ciphertext.data(), content_key.data());
  sodium_memzero(content_key.data(), content_key.size());
  if (rc != 0) throw CryptoError("authenticated decryption failed");
  plain.resize(plain_len);
  return plain;
}

Nonce fresh_nonce() {
  ensure_sodium();
  Nonce n;
  randombytes_buf(n.bytes().data(), Nonce::kSize);
  return n;
}

std::string random_token_hex() {
  ensure_sodium();
  std::array<std::uint8_t, 32> raw{};
  randombytes_buf(raw.data(), raw.size());
  return to_hex(raw);
}

bool constant_time_equal(std::string_view a, std::string_view b) {
  ensure_sodium();
  if (a.size() != b.size()) return false;
  if (a.empty()) return true;
  return sodium_memcmp(a.data(), b.data(), a.size()) == 0;
}

std::string to_hex(ByteView data) {
  ensure_sodium();
  std::string out(data.size() * 2 + 1, '\0');
  sodium_bin2hex(out.data(), out.size(), data.data(), data.size());
  out.pop_back();
  return out;
}

Bytes from_hex(std::string_view hex) {
  ensure_sodium();
  if (hex.size() % 2 != 0 || !is_lower_hex(hex)) {
    throw CryptoError("malformed hex string");
  }
  Bytes out(hex.size() / 2);
  std::size_t len = 0;
  if (sodium_hex2bin(out.data(), out.size(), hex.data(), hex.size(), nullptr, &len,
                     nullptr) != 0 ||
      len != out.size()) {
    throw CryptoError("malformed hex string");
  }
  return out;
}

std::string to_base64(ByteView data) {
  ensure_sodium();
  constexpr int variant = sodium_base64_VARIANT_ORIGINAL;
  std::string out(sodium_base64_ENCODED_LEN(data.size(), variant), '\0');
  sodium_bin2base64(out.data(), out.size(), data.data(), data.size(), variant);
  out.pop_back();
  return out;
}

Bytes from_base64(std::string_view b64) {
  ensure_sodium();
  Bytes out(b64.size() * 3 / 4 + 3);
  std::size_t len = 0;
  const char* end = nullptr;
  if (sodium_base642bin(out.data(), out.size(), b64.data(), b64.size(), nullptr, &len,
                        &end, sodium_base64_VARIANT_ORIGINAL) != 0 ||
      end != b64.data() + b64.size()) {
    throw CryptoError("malformed base64 string");
  }
  out.resize(len);
  return out;
}

std::string encode(const PublicKey& key) { return to_base64(key.raw); }
std::string encode(const PrivateKey& key) { return to_base64(key.raw); }
std::string encode(const Signature& sig) { return to_base64(sig); }

PublicKey decode_public_key(std::string_view b64) {
  auto raw = from_base64(b64);
  if (raw.size() != 32) throw CryptoError("public key must be 32 bytes");
  PublicKey key;
  std::memcpy(key.raw.data(), raw.data(), 32);
  return key;
}

PrivateKey decode_private_key(std::string_view b64) {
  auto raw = from_base64(b64);
  if (raw.size() != 64) throw CryptoError("private key must be 64 bytes");
  PrivateKey key;
  std::memcpy(key.raw.data(), raw.data(), 64);
  sodium_memzero(raw.data(), raw.size());
  return key;
}

}  // namespace bonik::crypto
