/**
 * Copyright BONIK authors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "bonik/chaincode/request.hpp"
#include "bonik/crypto/crypto.hpp"

namespace bonik::ledger {

using json = nlohmann::json;
using crypto::MessageDigest;

class LedgerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Endorsement {
  std::string endorser;
  crypto::Signature signature{};
  bool operator==(const Endorsement&) const = default;
};

struct LedgerTransaction {
  MessageDigest tx_id;
  std::string submitter;
  chaincode::Request request;
  std::int64_t timestamp_ms = 0;
  std::vector<Endorsement> endorsements;
  // Filled in when the block commits.
  bool valid = false;
  chaincode::Response response;

  /// hash(canonical request || 0x00 || submitter || 0x00 || decimal timestamp)
  static MessageDigest compute_id(const chaincode::Request& request,
                                  std::string_view submitter, std::int64_t timestamp_ms);

  static LedgerTransaction make(chaincode::Request request, std::string submitter,
                                std::int64_t timestamp_ms);

  bool operator==(const LedgerTransaction&) const = default;
};

struct Block {
  std::uint64_t height = 0;
  MessageDigest prev_hash;
  std::vector<LedgerTransaction> tx_list;
  MessageDigest block_hash;

  /// hash(8-byte big-endian height || prev_hash || tx_id...)
  static MessageDigest compute_hash(std::uint64_t height, const MessageDigest& prev_hash,
                                    const std::vector<LedgerTransaction>& txs);

  bool operator==(const Block&) const = default;
};

json to_json(const LedgerTransaction& tx);
LedgerTransaction transaction_from_json(const json& value);
json to_json(const Block& block);
/// Throws LedgerError on any schema violation.
Block block_from_json(const json& value);

/// One ledger-file line; parse_block_line rejects lines that are not in
/// canonical form.
std::string block_line(const Block& block);
Block parse_block_line(const std::string& line);

}  // namespace bonik::ledger
