/**
 * Copyright BONIK authors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace bonik::nlu {

using json = nlohmann::json;

class NluError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A dataset file failed validation. The message names the offending record.
class DatasetError : public NluError {
 public:
  using NluError::NluError;
};

/// The caller did not present the shared secret.
class Unauthorized : public NluError {
 public:
  using NluError::NluError;
};

enum class Intent { balQuery, transfer, smalltalk, unknown };
std::string_view to_string(Intent intent);
std::optional<Intent> parse_intent(std::string_view name);

enum class EntityKind { accountNumber, amount, intentMarker };
std::string_view to_string(EntityKind kind);
std::optional<EntityKind> parse_entity_kind(std::string_view name);

/// Dataset slot names ("toAcc", "amount", "intentMarker") map onto entity kinds.
std::optional<EntityKind> slot_kind(std::string_view slot);
std::string_view slot_name(EntityKind kind);

inline constexpr std::string_view kAffirm = "affirm";
inline constexpr std::string_view kDeny = "deny";

/// Half-open character range [begin, end) into the utterance.
struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;
  bool operator==(const Span&) const = default;
};

struct Entity {
  EntityKind kind = EntityKind::amount;
  std::string value;
  Span source_span;
  bool operator==(const Entity&) const = default;
};

enum class Consent {
  not_required,  // nothing to confirm (reads, smalltalk, incomplete requests)
  awaiting,      // transfer complete, waiting for the user to affirm
  affirmed,
  declined,
};
std::string_view to_string(Consent consent);

struct EntitySet {
  Intent intent = Intent::unknown;
  std::vector<Entity> entities;
  bool complete = false;
  std::optional<std::string> missing_slot;
  Consent consent = Consent::not_required;

  std::optional<std::string> value(EntityKind kind) const;
};

json to_json(const Entity& entity);
json to_json(const EntitySet& set);

struct Utterance {
  std::string text;
  std::size_t turn_index = 0;
};

enum class Speaker { user, bot };

struct Turn {
  Speaker speaker = Speaker::user;
  Utterance utterance;
};

/// Per-session dialogue state. Owned by one session and touched serially.
struct Conversation {
  std::string session_id;
  std::vector<Turn> history;
  std::optional<Intent> pending_intent;
  std::vector<Entity> slots;  // merged entities of the pending intent
  bool awaiting_consent = false;
  /// The session user's own account; makes balQuery resolvable.
  std::optional<std::string> account;

  std::size_t next_turn_index() const { return history.size(); }
};

struct NluCredential {
  std::string secret_key;  // 64 lowercase hex chars
};

struct UserPattern {
  std::int64_t id = 0;
  std::string pattern;
  Intent intent = Intent::unknown;
  std::map<std::string, std::string> slots;
};

struct BotTemplate {
  std::string template_id;
  Intent intent = Intent::unknown;
  std::optional<std::string> missing_slot;
  std::string text;
};

std::vector<UserPattern> parse_user_dataset(const json& records);
std::vector<BotTemplate> parse_bot_dataset(const json& records);
std::vector<UserPattern> load_user_dataset(const std::filesystem::path& path);
std::vector<BotTemplate> load_bot_dataset(const std::filesystem::path& path);

struct Classification {
  Intent intent = Intent::unknown;
  std::vector<Entity> entities;
  std::optional<std::int64_t> pattern_id;
};

/// Compiled, immutable pattern and template tables. Safe to share.
class PatternTable {
 public:
  static PatternTable compile(std::vector<UserPattern> user, std::vector<BotTemplate> bot);

  /// Stateless single-utterance classification: the pattern with the most
  /// keywords that occur in order in the utterance wins, then the lowest id.
  Classification classify(std::string_view text) const;

  /// Templates for (intent, stage) in template_id order; falls back to the
  /// unknown-intent template when none exists.
  const BotTemplate& pick_template(Intent intent, std::optional<std::string_view> missing_slot,
                                   std::size_t turn_index) const;

  const std::vector<UserPattern>& user_patterns() const { return user_; }
  const std::vector<BotTemplate>& bot_templates() const { return bot_; }
  std::size_t intent_count() const;

 private:
  struct Compiled {
    std::int64_t id;
    Intent intent;
    std::vector<std::string> keywords;
    std::optional<std::string> marker;
  };

  std::vector<UserPattern> user_;
  std::vector<BotTemplate> bot_;
  std::vector<Compiled> compiled_;
};

PatternTable load_datasets(const std::filesystem::path& user_dataset_path,
                           const std::filesystem::path& bot_dataset_path);

/// Substitutes {toAcc} and {amount}.
std::string render_template(std::string_view text, const EntitySet& set);

class Engine {
 public:
  Engine(std::shared_ptr<const PatternTable> table, std::string secret_key);

  /// Classifies the utterance and merges it into the conversation's slot
  /// state. Throws Unauthorized before looking at the utterance.
  EntitySet d_flow_model(Conversation& conversation, const Utterance& utterance,
                         const NluCredential& credential) const;

  /// Appends and returns the bot's reply for the set just produced.
  Utterance next_bot_response(const EntitySet& set, Conversation& conversation) const;

  bool authorized(const NluCredential& credential) const;
  const PatternTable& table() const { return *table_; }

 private:
  std::shared_ptr<const PatternTable> table_;
  std::string secret_key_;
};

/// 256-bit secret: BONIK_NLU_SECRET if set, else a fresh random token.
std::string resolve_secret(std::optional<std::string> configured = std::nullopt);

}  // namespace bonik::nlu
