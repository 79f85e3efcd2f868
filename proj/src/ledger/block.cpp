/**
 * Copyright BONIK authors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#include "bonik/ledger/block.hpp"

#include <algorithm>
#include <cstring>

#include "bonik/crypto/wire.hpp"

namespace bonik::ledger {

MessageDigest LedgerTransaction::compute_id(const chaincode::Request& request,
                                            std::string_view submitter,
                                            std::int64_t timestamp_ms) {
  std::string material = crypto::canonical(chaincode::to_json(request));
  material.push_back('\0');
  material.append(submitter);
  material.push_back('\0');
  material.append(std::to_string(timestamp_ms));
  return crypto::hash(material);
}

LedgerTransaction LedgerTransaction::make(chaincode::Request request, std::string submitter,
                                          std::int64_t timestamp_ms) {
  LedgerTransaction tx;
  tx.tx_id = compute_id(request, submitter, timestamp_ms);
  tx.submitter = std::move(submitter);
  tx.request = std::move(request);
  tx.timestamp_ms = timestamp_ms;
  return tx;
}

MessageDigest Block::compute_hash(std::uint64_t height, const MessageDigest& prev_hash,
                                  const std::vector<LedgerTransaction>& txs) {
  crypto::Bytes material;
  material.reserve(8 + 32 * (1 + txs.size()));
  for (int shift = 56; shift >= 0; shift -= 8) {
    material.push_back(static_cast<std::uint8_t>(height >> shift));
  }
  material.insert(material.end(), prev_hash.bytes().begin(), prev_hash.bytes().end());
  for (const auto& tx : txs) {
    material.insert(material.end(), tx.tx_id.bytes().begin(), tx.tx_id.bytes().end());
  }
  return crypto::hash(material);
}

json to_json(const LedgerTransaction& tx) {
  json endorsements = json::array();
  for (const auto& e : tx.endorsements) {
    endorsements.push_back({{"endorser", e.endorser}, {"signature", crypto::encode(e.signature)}});
  }
  return {{"tx_id", tx.tx_id.to_hex()},
          {"submitter", tx.submitter},
          {"request", chaincode::to_json(tx.request)},
          {"timestamp", tx.timestamp_ms},
          {"endorsements", std::move(endorsements)},
          {"valid", tx.valid},
          {"response", chaincode::to_json(tx.response)}};
}

LedgerTransaction transaction_from_json(const json& value) {
  try {
    LedgerTransaction tx;
    tx.tx_id = MessageDigest::from_hex(value.at("tx_id").get<std::string>());
    tx.submitter = value.at("submitter").get<std::string>();
    tx.request = chaincode::request_from_json(value.at("request"));
    tx.timestamp_ms = value.at("timestamp").get<std::int64_t>();
    for (const auto& e : value.at("endorsements")) {
      auto sig = crypto::from_base64(e.at("signature").get<std::string>());
      if (sig.size() != 64) throw LedgerError("endorsement signature must be 64 bytes");
      Endorsement en{e.at("endorser").get<std::string>(), {}};
      std::copy(sig.begin(), sig.end(), en.signature.begin());
      tx.endorsements.push_back(std::move(en));
    }
    tx.valid = value.at("valid").get<bool>();
    tx.response = chaincode::response_from_json(value.at("response"));
    return tx;
  } catch (const LedgerError&) {
    throw;
  } catch (const std::exception& e) {
    throw LedgerError(std::string("malformed transaction: ") + e.what());
  }
}

json to_json(const Block& block) {
  json txs = json::array();
  for (const auto& tx : block.tx_list) txs.push_back(to_json(tx));
  return {{"height", block.height},
          {"prev_hash", block.prev_hash.to_hex()},
          {"tx_list", std::move(txs)},
          {"block_hash", block.block_hash.to_hex()}};
}

Block block_from_json(const json& value) {
  try {
    if (!value.is_object() || value.size() != 4) {
      throw LedgerError("block must have exactly height, prev_hash, tx_list, block_hash");
    }
    Block block;
    block.height = value.at("height").get<std::uint64_t>();
    block.prev_hash = MessageDigest::from_hex(value.at("prev_hash").get<std::string>());
    for (const auto& tx : value.at("tx_list")) block.tx_list.push_back(transaction_from_json(tx));
    block.block_hash = MessageDigest::from_hex(value.at("block_hash").get<std::string>());
    return block;
  } catch (const LedgerError&) {
    throw;
  } catch (const std::exception& e) {
    throw LedgerError(std::string("malformed block: ") + e.what());
  }
}

std::string block_line(const Block& block) { return crypto::canonical(to_json(block)); }

Block parse_block_line(const std::string& line) {
  Block block;
  std::string reserialized;
  try {
    block = block_from_json(json::parse(line));
    reserialized = block_line(block);
  } catch (const LedgerError&) {
    throw;
  } catch (const std::exception& e) {
    throw LedgerError(std::string("unreadable ledger line: ") + e.what());
  }
  if (reserialized != line) throw LedgerError("ledger line is not in canonical form");
  return block;
}

}  // namespace bonik::ledger
