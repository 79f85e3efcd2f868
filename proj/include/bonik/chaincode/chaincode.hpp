/**
 * Copyright BONIK authors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "bonik/chaincode/request.hpp"

namespace bonik::chaincode {

/// The key-value surface chaincode runs against. Writes are only legal while
/// a block is being committed; read-only views throw on put_state.
class StateStore {
 public:
  virtual ~StateStore() = default;
  virtual std::optional<std::string> get_state(std::string_view key) const = 0;
  virtual void put_state(const std::string& key, const std::string& value) = 0;
};

inline constexpr std::int64_t kInitialBalance = 10000;
inline constexpr std::int64_t kFirstAccountNumber = 1000000001;

/// World-state key namespaces. The prefixes keep user names and account
/// numbers from ever colliding.
std::string user_key(std::string_view user_name);
std::string account_key(std::string_view user_name);
std::string balance_key(std::string_view account_num);
inline constexpr std::string_view kNextAccountKey = "meta:nextAccount";

// System chaincode: login and registration, everything else goes to the bank.
Response scc_invoke(const Request& request, StateStore& state);
Response reg_func(const RegisData& data, StateStore& state);
Response login_func(const LoginData& data, const StateStore& state);

// Bank chaincode.
Response bcc_invoke(const Request& request, StateStore& state);
Response bal_q_func(const BalData& data, const StateStore& state);
/// Moves funds only when the sender's balance is strictly greater than the
/// amount, so sending an entire balance aborts.
Response trans_func(const TransferData& data, StateStore& state);

}  // namespace bonik::chaincode
