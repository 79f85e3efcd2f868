/**
 * Copyright BONIK authors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#include "bonik/nlu/nlu.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <set>

#include "bonik/crypto/crypto.hpp"

namespace bonik::nlu {

std::string_view to_string(Intent intent) {
  switch (intent) {
    case Intent::balQuery: return "balQuery";
    case Intent::transfer: return "transfer";
    case Intent::smalltalk: return "smalltalk";
    case Intent::unknown: return "unknown";
  }
  return "unknown";
}

std::optional<Intent> parse_intent(std::string_view name) {
  for (auto i : {Intent::balQuery, Intent::transfer, Intent::smalltalk, Intent::unknown}) {
    if (to_string(i) == name) return i;
  }
  return std::nullopt;
}

std::string_view to_string(EntityKind kind) {
  switch (kind) {
    case EntityKind::accountNumber: return "accountNumber";
    case EntityKind::amount: return "amount";
    case EntityKind::intentMarker: return "intentMarker";
  }
  return "amount";
}

std::optional<EntityKind> parse_entity_kind(std::string_view name) {
  for (auto k : {EntityKind::accountNumber, EntityKind::amount, EntityKind::intentMarker}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

std::optional<EntityKind> slot_kind(std::string_view slot) {
  if (slot == "toAcc") return EntityKind::accountNumber;
  if (slot == "amount") return EntityKind::amount;
  if (slot == "intentMarker") return EntityKind::intentMarker;
  return std::nullopt;
}

std::string_view slot_name(EntityKind kind) {
  switch (kind) {
    case EntityKind::accountNumber: return "toAcc";
    case EntityKind::amount: return "amount";
    case EntityKind::intentMarker: return "intentMarker";
  }
  return "amount";
}

std::string_view to_string(Consent consent) {
  switch (consent) {
    case Consent::not_required: return "not_required";
    case Consent::awaiting: return "awaiting";
    case Consent::affirmed: return "affirmed";
    case Consent::declined: return "declined";
  }
  return "not_required";
}

std::optional<std::string> EntitySet::value(EntityKind kind) const {
  for (const auto& e : entities) {
    if (e.kind == kind) return e.value;
  }
  return std::nullopt;
}

json to_json(const Entity& entity) {
  return {{"kind", to_string(entity.kind)},
          {"value", entity.value},
          {"span", {entity.source_span.begin, entity.source_span.end}}};
}

json to_json(const EntitySet& set) {
  json entities = json::array();
  for (const auto& e : set.entities) entities.push_back(to_json(e));
  json out{{"intent", to_string(set.intent)},
           {"entities", std::move(entities)},
           {"complete", set.complete},
           {"consent", to_string(set.consent)},
           {"missing_slot", nullptr}};
  if (set.missing_slot) out["missing_slot"] = *set.missing_slot;
  return out;
}

// ---------------------------------------------------------------------------
// Tokenizing and entity extraction

namespace {

struct Token {
  std::string text;
  Span span;
  bool numeric = false;
};

bool is_alnum(char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

std::vector<Token> tokenize(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    if (!is_alnum(s[i])) {
      ++i;
      continue;
    }
    Token t;
    t.span.begin = i;
    t.numeric = true;
    while (i < s.size() && is_alnum(s[i])) {
      char c = s[i];
      if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
      if (c < '0' || c > '9') t.numeric = false;
      t.text.push_back(c);
      ++i;
    }
    t.span.end = i;
    out.push_back(std::move(t));
  }
  return out;
}

struct Extraction {
  std::vector<Entity> entities;
  std::vector<std::string> keywords;
  std::vector<Span> keyword_spans;
};

// Ten-digit tokens are account numbers; any other positive integer up to 18
// digits is an amount, optionally followed by "unit"/"units".
Extraction extract(std::string_view text) {
  const auto tokens = tokenize(text);
  Extraction out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const auto& t = tokens[i];
    if (!t.numeric) {
      out.keywords.push_back(t.text);
      out.keyword_spans.push_back(t.span);
      continue;
    }
    if (t.text.size() == 10) {
      out.entities.push_back({EntityKind::accountNumber, t.text, t.span});
      continue;
    }
    if (t.text.size() > 18) continue;
    std::uint64_t v = 0;
    std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
    if (v == 0) continue;
    Span span = t.span;
    if (i + 1 < tokens.size() && (tokens[i + 1].text == "unit" || tokens[i + 1].text == "units")) {
      span.end = tokens[++i].span.end;
    }
    out.entities.push_back({EntityKind::amount, std::to_string(v), span});
  }
  return out;
}

// Returns matched keyword positions if `needle` is an ordered subsequence.
std::optional<std::vector<std::size_t>> subsequence(const std::vector<std::string>& needle,
                                                    const std::vector<std::string>& hay) {
  std::vector<std::size_t> at;
  std::size_t j = 0;
  for (const auto& k : needle) {
    while (j < hay.size() && hay[j] != k) ++j;
    if (j == hay.size()) return std::nullopt;
    at.push_back(j++);
  }
  return at;
}

bool is_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DatasetError("cannot open dataset " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (trim(text).empty()) throw DatasetError("dataset " + path.string() + " is empty");
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw DatasetError("dataset " + path.string() + " is not valid JSON: " + e.what());
  }
}

void check_keys(const json& record, std::initializer_list<std::string_view> allowed,
                const std::string& where) {
  for (const auto& [key, _] : record.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw DatasetError(where + ": unexpected field '" + key + "'");
    }
  }
}

std::string require_string(const json& record, const char* key, const std::string& where) {
  if (!record.contains(key) || !record[key].is_string() || record[key].get<std::string>().empty()) {
    throw DatasetError(where + ": '" + key + "' must be a non-empty string");
  }
  return record[key].get<std::string>();
}

const std::set<std::string, std::less<>> kStages = {"toAcc", "amount", "account", "consent",
                                                    "declined"};

}  // namespace

// ---------------------------------------------------------------------------
// Dataset loading

std::vector<UserPattern> parse_user_dataset(const json& records) {
  if (!records.is_array() || records.empty()) {
    throw DatasetError("user dataset must be a non-empty JSON array");
  }
  std::vector<UserPattern> out;
  std::set<std::int64_t> ids;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    std::string where = "user dataset record #" + std::to_string(i);
    if (!r.is_object()) throw DatasetError(where + ": not an object");
    if (r.contains("id") && r["id"].is_number_integer()) {
      where += " (id " + std::to_string(r["id"].get<std::int64_t>()) + ")";
    }
    check_keys(r, {"id", "pattern", "intent", "slots"}, where);
    if (!r.contains("id") || !r["id"].is_number_integer()) {
      throw DatasetError(where + ": 'id' must be an integer");
    }
    UserPattern p;
    p.id = r["id"].get<std::int64_t>();
    if (!ids.insert(p.id).second) throw DatasetError(where + ": duplicate pattern id");
    p.pattern = require_string(r, "pattern", where);
    const auto intent = parse_intent(require_string(r, "intent", where));
    if (!intent || *intent == Intent::unknown) throw DatasetError(where + ": unsupported intent");
    p.intent = *intent;
    if (r.contains("slots")) {
      if (!r["slots"].is_object()) throw DatasetError(where + ": 'slots' must be an object");
      for (const auto& [name, value] : r["slots"].items()) {
        const auto kind = slot_kind(name);
        if (!kind) throw DatasetError(where + ": unknown slot '" + name + "'");
        if (!value.is_string()) throw DatasetError(where + ": slot '" + name + "' must be a string");
        const auto v = value.get<std::string>();
        const bool ok = *kind == EntityKind::accountNumber ? is_digits(v) && v.size() == 10
                        : *kind == EntityKind::amount     ? is_digits(v) && v[0] != '0' && v.size() <= 18
                                                          : (v == kAffirm || v == kDeny);
        if (!ok) throw DatasetError(where + ": slot '" + name + "' has invalid value '" + v + "'");
        p.slots.emplace(name, v);
      }
    }
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<BotTemplate> parse_bot_dataset(const json& records) {
  if (!records.is_array() || records.empty()) {
    throw DatasetError("bot dataset must be a non-empty JSON array");
  }
  std::vector<BotTemplate> out;
  std::set<std::string> ids;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    std::string where = "bot dataset record #" + std::to_string(i);
    if (!r.is_object()) throw DatasetError(where + ": not an object");
    BotTemplate t;
    t.template_id = require_string(r, "template_id", where);
    where += " (" + t.template_id + ")";
    check_keys(r, {"template_id", "intent", "missing_slot", "text"}, where);
    if (!ids.insert(t.template_id).second) throw DatasetError(where + ": duplicate template_id");
    const auto intent = parse_intent(require_string(r, "intent", where));
    if (!intent) throw DatasetError(where + ": unsupported intent");
    t.intent = *intent;
    if (r.contains("missing_slot") && !r["missing_slot"].is_null()) {
      if (!r["missing_slot"].is_string() || !kStages.contains(r["missing_slot"].get<std::string>())) {
        throw DatasetError(where + ": unsupported missing_slot");
      }
      t.missing_slot = r["missing_slot"].get<std::string>();
    }
    t.text = require_string(r, "text", where);
    for (std::size_t pos = t.text.find('{'); pos != std::string::npos; pos = t.text.find('{', pos + 1)) {
      const auto close = t.text.find('}', pos);
      const auto name = close == std::string::npos ? "" : t.text.substr(pos + 1, close - pos - 1);
      if (name != "toAcc" && name != "amount") {
        throw DatasetError(where + ": unknown placeholder in text");
      }
    }
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<UserPattern> load_user_dataset(const std::filesystem::path& path) {
  return parse_user_dataset(read_json_file(path));
}

std::vector<BotTemplate> load_bot_dataset(const std::filesystem::path& path) {
  return parse_bot_dataset(read_json_file(path));
}

PatternTable load_datasets(const std::filesystem::path& user_dataset_path,
                           const std::filesystem::path& bot_dataset_path) {
  return PatternTable::compile(load_user_dataset(user_dataset_path),
                               load_bot_dataset(bot_dataset_path));
}

// ---------------------------------------------------------------------------
// PatternTable

PatternTable PatternTable::compile(std::vector<UserPattern> user, std::vector<BotTemplate> bot) {
  PatternTable t;
  std::map<std::vector<std::string>, const UserPattern*> by_keywords;
  for (const auto& p : user) {
    const auto where = "user dataset pattern id " + std::to_string(p.id);
    auto ex = extract(p.pattern);
    if (ex.keywords.empty()) throw DatasetError(where + ": pattern has no keywords");
    Compiled c{p.id, p.intent, ex.keywords, std::nullopt};
    if (auto it = p.slots.find("intentMarker"); it != p.slots.end()) c.marker = it->second;
    auto [it, fresh] = by_keywords.emplace(ex.keywords, &p);
    if (!fresh) {
      const auto* other = it->second;
      const auto other_marker = other->slots.contains("intentMarker")
                                    ? std::optional(other->slots.at("intentMarker"))
                                    : std::nullopt;
      if (other->intent != p.intent || other_marker != c.marker) {
        throw DatasetError(where + ": same keywords as id " + std::to_string(other->id) +
                           " with a different label");
      }
    }
    t.compiled_.push_back(std::move(c));
  }
  std::sort(t.compiled_.begin(), t.compiled_.end(),
            [](const Compiled& a, const Compiled& b) { return a.id < b.id; });

  std::sort(bot.begin(), bot.end(),
            [](const BotTemplate& a, const BotTemplate& b) { return a.template_id < b.template_id; });
  const bool has_fallback = std::any_of(bot.begin(), bot.end(), [](const BotTemplate& b) {
    return b.intent == Intent::unknown && !b.missing_slot;
  });
  if (!has_fallback) throw DatasetError("bot dataset has no fallback template (intent unknown)");
  t.user_ = std::move(user);
  t.bot_ = std::move(bot);
  return t;
}

std::size_t PatternTable::intent_count() const {
  std::set<Intent> intents;
  for (const auto& p : user_) intents.insert(p.intent);
  return intents.size();
}

Classification PatternTable::classify(std::string_view text) const {
  auto ex = extract(text);
  Classification out;
  const Compiled* best = nullptr;
  std::vector<std::size_t> best_at;
  for (const auto& c : compiled_) {
    if (best && c.keywords.size() <= best->keywords.size()) continue;
    if (auto at = subsequence(c.keywords, ex.keywords)) {
      best = &c;
      best_at = std::move(*at);
    }
  }
  out.entities = std::move(ex.entities);
  if (best) {
    out.intent = best->intent;
    out.pattern_id = best->id;
    if (best->marker) {
      Span span{ex.keyword_spans[best_at.front()].begin, ex.keyword_spans[best_at.back()].end};
      out.entities.push_back({EntityKind::intentMarker, *best->marker, span});
    }
  }
  std::stable_sort(out.entities.begin(), out.entities.end(), [](const Entity& a, const Entity& b) {
    return a.source_span.begin < b.source_span.begin;
  });
  return out;
}

const BotTemplate& PatternTable::pick_template(Intent intent,
                                               std::optional<std::string_view> missing_slot,
                                               std::size_t turn_index) const {
  std::vector<const BotTemplate*> hits;
  for (const auto& b : bot_) {
    if (b.intent == intent && b.missing_slot == missing_slot) hits.push_back(&b);
  }
  if (hits.empty()) {
    for (const auto& b : bot_) {
      if (b.intent == Intent::unknown && !b.missing_slot) hits.push_back(&b);
    }
  }
  return *hits[turn_index % hits.size()];
}

std::string render_template(std::string_view text, const EntitySet& set) {
  std::string out;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '{') {
      const auto close = text.find('}', i);
      const auto name = text.substr(i + 1, close - i - 1);
      const auto kind = slot_kind(name);
      out += kind ? set.value(*kind).value_or("?") : "?";
      i = close;
      continue;
    }
    out.push_back(text[i]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Engine

Engine::Engine(std::shared_ptr<const PatternTable> table, std::string secret_key)
    : table_(std::move(table)), secret_key_(std::move(secret_key)) {
  if (!table_) throw std::invalid_argument("engine needs a pattern table");
}

bool Engine::authorized(const NluCredential& credential) const {
  return !secret_key_.empty() && crypto::constant_time_equal(credential.secret_key, secret_key_);
}

namespace {

void merge_slot(std::vector<Entity>& slots, const Entity& e) {
  for (auto& s : slots) {
    if (s.kind == e.kind) {
      s = e;
      return;
    }
  }
  slots.push_back(e);
}

void reset_pending(Conversation& c) {
  c.pending_intent.reset();
  c.slots.clear();
  c.awaiting_consent = false;
}

}  // namespace

EntitySet Engine::d_flow_model(Conversation& conversation, const Utterance& utterance,
                               const NluCredential& credential) const {
  if (!authorized(credential)) throw Unauthorized("nlu credential rejected");
  if (trim(utterance.text).empty()) throw NluError("utterance is empty");
  if (!conversation.history.empty() && conversation.history.back().speaker == Speaker::user) {
    throw NluError("conversation is waiting for a bot turn");
  }
  conversation.history.push_back({Speaker::user, utterance});

  auto c = table_->classify(utterance.text);
  std::optional<std::string> marker;
  std::vector<Entity> numeric;
  for (const auto& e : c.entities) {
    if (e.kind == EntityKind::intentMarker) {
      marker = e.value;
    } else {
      numeric.push_back(e);
    }
  }

  EntitySet out;
  if (conversation.awaiting_consent && marker) {
    out.intent = Intent::transfer;
    out.entities = conversation.slots;
    out.complete = true;
    out.consent = *marker == kAffirm ? Consent::affirmed : Consent::declined;
    reset_pending(conversation);
    return out;
  }
  conversation.awaiting_consent = false;

  Intent intent = c.intent;
  if (intent == Intent::transfer || intent == Intent::balQuery) {
    if (conversation.pending_intent != intent) conversation.slots.clear();
    conversation.pending_intent = intent;
  } else if (intent == Intent::unknown && conversation.pending_intent && !numeric.empty()) {
    // A bare value answering the bot's question.
    intent = *conversation.pending_intent;
  } else if (intent == Intent::smalltalk && marker == kDeny && conversation.pending_intent) {
    out.intent = *conversation.pending_intent;
    out.entities = conversation.slots;
    out.consent = Consent::declined;
    reset_pending(conversation);
    return out;
  } else {
    out.intent = intent;
    out.entities = std::move(c.entities);
    out.complete = intent == Intent::smalltalk;
    return out;
  }

  out.intent = intent;
  if (intent == Intent::transfer) {
    for (const auto& e : numeric) merge_slot(conversation.slots, e);
    out.entities = conversation.slots;
    if (!out.value(EntityKind::accountNumber)) {
      out.missing_slot = "toAcc";
    } else if (!out.value(EntityKind::amount)) {
      out.missing_slot = "amount";
    } else {
      out.complete = true;
      out.consent = Consent::awaiting;
      conversation.awaiting_consent = true;
    }
    return out;
  }

  // balQuery: the only slot is the session's own account.
  if (conversation.account) {
    out.complete = true;
    reset_pending(conversation);
  } else {
    out.missing_slot = "account";
  }
  return out;
}

Utterance Engine::next_bot_response(const EntitySet& set, Conversation& conversation) const {
  if (conversation.history.empty() || conversation.history.back().speaker != Speaker::user) {
    throw NluError("bot turn must follow a user turn");
  }
  std::optional<std::string_view> stage;
  switch (set.intent) {
    case Intent::transfer:
      if (set.consent == Consent::awaiting) {
        stage = "consent";
      } else if (set.consent == Consent::declined) {
        stage = "declined";
      } else if (!set.complete) {
        stage = set.missing_slot;
      }
      break;
    case Intent::balQuery:
      if (set.consent == Consent::declined) {
        stage = "declined";
      } else if (!set.complete) {
        stage = set.missing_slot;
      }
      break;
    case Intent::smalltalk:
    case Intent::unknown: break;
  }
  const auto index = conversation.next_turn_index();
  const auto& tpl = table_->pick_template(set.intent, stage, index / 2);
  Utterance reply{render_template(tpl.text, set), index};
  conversation.history.push_back({Speaker::bot, reply});
  return reply;
}

std::string resolve_secret(std::optional<std::string> configured) {
  if (const char* env = std::getenv("BONIK_NLU_SECRET"); env && *env) configured = env;
  if (!configured) return crypto::random_token_hex();
  if (configured->size() != 64 || !std::all_of(configured->begin(), configured->end(), [](char c) {
        return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
      })) {
    throw NluError("nlu secret must be 64 lowercase hex characters");
  }
  return *configured;
}

}  // namespace bonik::nlu
