/**
 * Copyright BONIK authors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#include "bonik/chaincode/chaincode.hpp"

#include <charconv>

namespace bonik::chaincode {

namespace {

std::optional<std::int64_t> parse_balance(const std::string& s) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || v < 0) return std::nullopt;
  return v;
}

std::string format_account(std::int64_t n) {
  std::string s = std::to_string(n);
  if (s.size() < 10) s.insert(0, 10 - s.size(), '0');
  return s;
}

}  // namespace

std::string user_key(std::string_view user_name) { return "user:" + std::string(user_name); }
std::string account_key(std::string_view user_name) { return "acct:" + std::string(user_name); }
std::string balance_key(std::string_view account_num) {
  return "bal:" + std::string(account_num);
}

Response scc_invoke(const Request& request, StateStore& state) {
  if (auto err = validation_error(request)) {
    return Response::error(std::string(error_code::kMalformed), *err);
  }
  switch (request.type()) {
    case RequestType::login:
      return login_func(std::get<LoginData>(request.data), state);
    case RequestType::registration:
      return reg_func(std::get<RegisData>(request.data), state);
    default:
      return bcc_invoke(request, state);
  }
}

Response reg_func(const RegisData& data, StateStore& state) {
  const auto key = user_key(data.userName);
  // Overwriting an existing credential would hand the account to whoever
  // registers the name second.
  if (state.get_state(key)) {
    return Response::error(std::string(error_code::kRegistrationRejected),
                           "user '" + data.userName + "' already registered");
  }

  std::int64_t next = kFirstAccountNumber;
  if (auto stored = state.get_state(kNextAccountKey)) {
    auto parsed = parse_balance(*stored);
    if (!parsed) return Response::error(std::string(error_code::kCorruptState), "account counter");
    next = *parsed;
  }
  const auto account = format_account(next);

  state.put_state(key, data.h.to_hex());
  state.put_state(account_key(data.userName), account);
  state.put_state(balance_key(account), std::to_string(kInitialBalance));
  state.put_state(std::string(kNextAccountKey), std::to_string(next + 1));

  auto resp = Response::ok(true);
  resp.account_num = account;
  return resp;
}

Response login_func(const LoginData& data, const StateStore& state) {
  auto stored = state.get_state(user_key(data.userName));
  if (!stored) return Response::ok(false);
  return Response::ok(*stored == data.h.to_hex());
}

Response bcc_invoke(const Request& request, StateStore& state) {
  switch (request.type()) {
    case RequestType::balQuery:
      return bal_q_func(std::get<BalData>(request.data), state);
    case RequestType::transfer:
      return trans_func(std::get<TransferData>(request.data), state);
    default:
      return Response::error(std::string(error_code::kUnsupportedType),
                             "bank chaincode handles balQuery and transfer only");
  }
}

Response bal_q_func(const BalData& data, const StateStore& state) {
  auto stored = state.get_state(balance_key(data.accountNum));
  if (!stored) {
    return Response::error(std::string(error_code::kAccountNotFound), data.accountNum);
  }
  auto balance = parse_balance(*stored);
  if (!balance) return Response::error(std::string(error_code::kCorruptState), data.accountNum);
  Response r{Status::Balance};
  r.balance = *balance;
  return r;
}

Response trans_func(const TransferData& data, StateStore& state) {
  auto from_raw = state.get_state(balance_key(data.fromAcc));
  auto to_raw = state.get_state(balance_key(data.toAcc));
  if (!from_raw || !to_raw) {
    return Response::error(std::string(error_code::kAccountNotFound),
                           !from_raw ? data.fromAcc : data.toAcc);
  }
  auto from_balance = parse_balance(*from_raw);
  auto to_balance = parse_balance(*to_raw);
  if (!from_balance || !to_balance) {
    return Response::error(std::string(error_code::kCorruptState), "balance");
  }

  if (*from_balance > data.amount) {
    *from_balance -= data.amount;
    *to_balance += data.amount;
    state.put_state(balance_key(data.fromAcc), std::to_string(*from_balance));
    state.put_state(balance_key(data.toAcc), std::to_string(*to_balance));
    return Response{Status::TransactionSuccessful};
  }
  return Response{Status::TransactionAborted};
}

}  // namespace bonik::chaincode
