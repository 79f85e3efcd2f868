/**
 * Copyright BONIK authors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>

#include <json.hpp>

#include "bonik/crypto/crypto.hpp"

namespace bonik::chaincode {

using json = nlohmann::json;

enum class RequestType { registration, login, balQuery, transfer };

std::string_view to_string(RequestType type);
std::optional<RequestType> parse_request_type(std::string_view name);

struct RegisData {
  std::string userName;
  crypto::MessageDigest h;
  bool operator==(const RegisData&) const = default;
};

struct LoginData {
  std::string userName;
  crypto::MessageDigest h;
  bool operator==(const LoginData&) const = default;
};

struct BalData {
  std::string userName;
  std::string accountNum;
  bool operator==(const BalData&) const = default;
};

struct TransferData {
  std::string userName;
  std::string fromAcc;
  std::string toAcc;
  std::int64_t amount = 0;
  bool operator==(const TransferData&) const = default;
};

/// Tagged request; the variant index is the type, so type/data always agree.
struct Request {
  std::variant<RegisData, LoginData, BalData, TransferData> data;

  RequestType type() const { return static_cast<RequestType>(data.index()); }
  /// Requests that never mutate the world state.
  bool read_only() const {
    return type() == RequestType::balQuery || type() == RequestType::login;
  }
  bool operator==(const Request&) const = default;
};

class MalformedRequest : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Field-level problems that the type system cannot rule out.
std::optional<std::string> validation_error(const Request& request);

bool is_account_number(std::string_view s);

json to_json(const Request& request);
/// Strict: unknown type, missing field or failed invariant throws MalformedRequest.
Request request_from_json(const json& value);

enum class Status {
  True,
  False,
  TransactionSuccessful,
  TransactionAborted,
  Balance,
  Error,
};

std::string_view to_string(Status status);

struct Response {
  Status status = Status::Error;
  std::optional<std::int64_t> balance;
  std::optional<std::string> account_num;  // set on successful registration
  std::string code;                        // machine-readable, Error only
  std::string detail;

  Response() = default;
  Response(Status s) : status(s) {}  // NOLINT(google-explicit-constructor)

  static Response ok(bool value) { return {value ? Status::True : Status::False}; }
  static Response error(std::string code, std::string detail = {}) {
    Response r(Status::Error);
    r.code = std::move(code);
    r.detail = std::move(detail);
    return r;
  }

  /// Human-facing rendering, e.g. "TRANSACTION SUCCESSFUL" or "BALANCE(10000)".
  std::string text() const;
  bool operator==(const Response&) const = default;
};

json to_json(const Response& response);
Response response_from_json(const json& value);

namespace error_code {
inline constexpr std::string_view kMalformed = "malformed-request";
inline constexpr std::string_view kRegistrationRejected = "registration-rejected";
inline constexpr std::string_view kAccountNotFound = "account-not-found";
inline constexpr std::string_view kUnsupportedType = "unsupported-type";
inline constexpr std::string_view kCorruptState = "corrupt-state";
}  // namespace error_code

}  // namespace bonik::chaincode
