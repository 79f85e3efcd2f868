/**
 * Copyright BONIK authors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#include "bonik/chaincode/request.hpp"

#include <algorithm>
#include <array>
#include <cstdint>

namespace bonik::chaincode {

namespace {

constexpr std::array<std::string_view, 4> kTypeNames = {"registration", "login",
                                                         "balQuery", "transfer"};

const json& field(const json& obj, const char* name) {
  auto it = obj.find(name);
  if (it == obj.end()) {
    throw MalformedRequest(std::string("missing field '") + name + "'");
  }
  return *it;
}

std::string string_field(const json& obj, const char* name) {
  const auto& v = field(obj, name);
  if (!v.is_string()) throw MalformedRequest(std::string("field '") + name + "' must be a string");
  return v.get<std::string>();
}

crypto::MessageDigest digest_field(const json& obj, const char* name) {
  try {
    return crypto::MessageDigest::from_hex(string_field(obj, name));
  } catch (const crypto::CryptoError& e) {
    throw MalformedRequest(std::string("field '") + name + "': " + e.what());
  }
}

void expect_keys(const json& obj, std::initializer_list<std::string_view> keys) {
  for (const auto& [k, _] : obj.items()) {
    if (std::find(keys.begin(), keys.end(), k) == keys.end()) {
      throw MalformedRequest("unexpected field '" + k + "'");
    }
  }
}

}  // namespace

std::string_view to_string(RequestType type) {
  return kTypeNames[static_cast<std::size_t>(type)];
}

std::optional<RequestType> parse_request_type(std::string_view name) {
  for (std::size_t i = 0; i < kTypeNames.size(); ++i) {
    if (kTypeNames[i] == name) return static_cast<RequestType>(i);
  }
  return std::nullopt;
}

bool is_account_number(std::string_view s) {
  return s.size() == 10 &&
         std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

std::optional<std::string> validation_error(const Request& request) {
  return std::visit(
      [](const auto& d) -> std::optional<std::string> {
        using T = std::decay_t<decltype(d)>;
        if (d.userName.empty()) return "userName must be non-empty";
        if constexpr (std::is_same_v<T, BalData>) {
          if (!is_account_number(d.accountNum)) return "accountNum must be 10 digits";
        } else if constexpr (std::is_same_v<T, TransferData>) {
          if (!is_account_number(d.fromAcc)) return "fromAcc must be 10 digits";
          if (!is_account_number(d.toAcc)) return "toAcc must be 10 digits";
          if (d.fromAcc == d.toAcc) return "fromAcc and toAcc must differ";
          if (d.amount < 1) return "amount must be at least 1";
        }
        return std::nullopt;
      },
      request.data);
}

json to_json(const Request& request) {
  json data = std::visit(
      [](const auto& d) -> json {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, RegisData> || std::is_same_v<T, LoginData>) {
          return {{"userName", d.userName}, {"h", d.h.to_hex()}};
        } else if constexpr (std::is_same_v<T, BalData>) {
          return {{"userName", d.userName}, {"accountNum", d.accountNum}};
        } else {
          return {{"userName", d.userName},
                  {"fromAcc", d.fromAcc},
                  {"toAcc", d.toAcc},
                  {"amount", d.amount}};
        }
      },
      request.data);
  return {{"type", std::string(to_string(request.type()))}, {"data", std::move(data)}};
}

Request request_from_json(const json& value) {
  if (!value.is_object()) throw MalformedRequest("request must be an object");
  expect_keys(value, {"type", "data"});
  auto type = parse_request_type(string_field(value, "type"));
  if (!type) throw MalformedRequest("unknown request type");
  const auto& data = field(value, "data");
  if (!data.is_object()) throw MalformedRequest("data must be an object");

  Request req;
  switch (*type) {
    case RequestType::registration:
      expect_keys(data, {"userName", "h"});
      req.data = RegisData{string_field(data, "userName"), digest_field(data, "h")};
      break;
    case RequestType::login:
      expect_keys(data, {"userName", "h"});
      req.data = LoginData{string_field(data, "userName"), digest_field(data, "h")};
      break;
    case RequestType::balQuery:
      expect_keys(data, {"userName", "accountNum"});
      req.data = BalData{string_field(data, "userName"), string_field(data, "accountNum")};
      break;
    case RequestType::transfer: {
      expect_keys(data, {"userName", "fromAcc", "toAcc", "amount"});
      const auto& amount = field(data, "amount");
      if (!amount.is_number_integer()) throw MalformedRequest("amount must be an integer");
      if (amount.is_number_unsigned() &&
          amount.get<std::uint64_t>() > static_cast<std::uint64_t>(INT64_MAX)) {
        throw MalformedRequest("amount out of range");
      }
      req.data = TransferData{string_field(data, "userName"), string_field(data, "fromAcc"),
                              string_field(data, "toAcc"), amount.get<std::int64_t>()};
      break;
    }
  }
  if (auto err = validation_error(req)) throw MalformedRequest(*err);
  return req;
}

std::string_view to_string(Status status) {
  switch (status) {
    case Status::True: return "TRUE";
    case Status::False: return "FALSE";
    case Status::TransactionSuccessful: return "TRANSACTION SUCCESSFUL";
    case Status::TransactionAborted: return "TRANSACTION ABORTED";
    case Status::Balance: return "BALANCE";
    case Status::Error: return "ERROR";
  }
  return "ERROR";
}

std::string Response::text() const {
  if (status == Status::Balance) {
    return "BALANCE(" + std::to_string(balance.value_or(0)) + ")";
  }
  if (status == Status::Error) return "ERROR(" + code + ")";
  return std::string(to_string(status));
}

json to_json(const Response& response) {
  json out = {{"status", std::string(to_string(response.status))}};
  if (response.balance) out["balance"] = *response.balance;
  if (response.account_num) out["accountNum"] = *response.account_num;
  if (!response.code.empty()) out["code"] = response.code;
  if (!response.detail.empty()) out["detail"] = response.detail;
  return out;
}

Response response_from_json(const json& value) {
  if (!value.is_object() || !value.contains("status") || !value["status"].is_string()) {
    throw MalformedRequest("response must carry a status");
  }
  Response r;
  const auto status = value["status"].get<std::string>();
  bool known = false;
  for (auto s : {Status::True, Status::False, Status::TransactionSuccessful,
                 Status::TransactionAborted, Status::Balance, Status::Error}) {
    if (to_string(s) == status) {
      r.status = s;
      known = true;
    }
  }
  if (!known) throw MalformedRequest("unknown response status '" + status + "'");
  if (value.contains("balance")) r.balance = value["balance"].get<std::int64_t>();
  if (value.contains("accountNum")) r.account_num = value["accountNum"].get<std::string>();
  if (value.contains("code")) r.code = value["code"].get<std::string>();
  if (value.contains("detail")) r.detail = value["detail"].get<std::string>();
  return r;
}

}  // namespace bonik::chaincode
