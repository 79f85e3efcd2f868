/**
 * Copyright BONIK authors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <thread>

#include "bonik/nlu/nlu.hpp"
#include "bonik/nlu/service.hpp"

using namespace bonik::nlu;

namespace {

const std::string kSecret(64, 'a');

std::shared_ptr<const PatternTable> shipped() {
  static auto table = std::make_shared<const PatternTable>(
      load_datasets(BONIK_DATA_DIR "/user_dataset.json", BONIK_DATA_DIR "/bot_dataset.json"));
  return table;
}

std::filesystem::path write_temp(const std::string& name, const std::string& content) {
  auto p = std::filesystem::temp_directory_path() / ("bonik-nlu-" + name);
  std::ofstream(p) << content;
  return p;
}

std::multiset<std::pair<std::string, std::string>> as_pairs(const std::vector<Entity>& es) {
  std::multiset<std::pair<std::string, std::string>> out;
  for (const auto& e : es) out.emplace(std::string(slot_name(e.kind)), e.value);
  return out;
}

struct Dialogue {
  Engine engine{shipped(), kSecret};
  Conversation conv;

  std::pair<EntitySet, std::string> say(const std::string& text) {
    auto set = engine.d_flow_model(conv, {text, conv.next_turn_index()}, {kSecret});
    auto bot = engine.next_bot_response(set, conv);
    return {set, bot.text};
  }
};

}  // namespace

TEST_CASE("shipped datasets meet the minimum shape") {
  auto t = shipped();
  CHECK(t->user_patterns().size() >= 20);
  CHECK(t->intent_count() >= 3);
  CHECK(t->bot_templates().size() >= 10);
}

TEST_CASE("golden corpus: every shipped utterance yields its labeled entities") {
  // Read the labels straight from the file rather than through the loader.
  std::ifstream in(BONIK_DATA_DIR "/user_dataset.json");
  const auto records = json::parse(in);
  auto t = shipped();
  for (const auto& r : records) {
    const auto text = r["pattern"].get<std::string>();
    CAPTURE(text);
    auto c = t->classify(text);
    CHECK(to_string(c.intent) == r["intent"].get<std::string>());
    std::multiset<std::pair<std::string, std::string>> expected;
    for (const auto& [k, v] : r["slots"].items()) expected.emplace(k, v.get<std::string>());
    CHECK(as_pairs(c.entities) == expected);
  }
}

TEST_CASE("example utterances") {
  auto t = shipped();
  SUBCASE("transfer with account and amount") {
    const std::string text = "send account no 1123158964 1000 unit";
    auto c = t->classify(text);
    CHECK(c.intent == Intent::transfer);
    REQUIRE(c.entities.size() == 2);
    CHECK(c.entities[0] == Entity{EntityKind::accountNumber, "1123158964", {16, 26}});
    CHECK(c.entities[1] == Entity{EntityKind::amount, "1000", {27, 36}});
    CHECK(text.substr(27, 9) == "1000 unit");
  }
  SUBCASE("balance") {
    auto c = t->classify("what is my balance");
    CHECK(c.intent == Intent::balQuery);
    CHECK(c.entities.empty());
  }
  SUBCASE("greeting") {
    auto c = t->classify("hello");
    CHECK(c.intent == Intent::smalltalk);
    CHECK(c.entities.empty());
  }
  SUBCASE("unrelated text") {
    auto c = t->classify("the weather is lovely");
    CHECK(c.intent == Intent::unknown);
    CHECK(c.entities.empty());
  }
  SUBCASE("case and punctuation do not matter") {
    auto c = t->classify("Send account no. 1123158964, 1000 UNITS!");
    CHECK(c.intent == Intent::transfer);
    CHECK(c.entities.size() == 2);
  }
}

TEST_CASE("ten-digit tokens are never amounts") {
  auto t = shipped();
  std::mt19937 rng(11);
  for (int trial = 0; trial < 500; ++trial) {
    std::string acct = std::to_string(1000000000 + rng() % 3000000000u);
    const auto amount = 1 + rng() % 99999;
    const bool account_first = rng() % 2;
    const std::string text = account_first
                                 ? "send " + acct + " " + std::to_string(amount)
                                 : "send " + std::to_string(amount) + " units to " + acct;
    auto c = t->classify(text);
    CAPTURE(text);
    int accounts = 0;
    for (const auto& e : c.entities) {
      if (e.kind == EntityKind::accountNumber) {
        ++accounts;
        CHECK(e.value == acct);
      } else {
        CHECK(e.kind == EntityKind::amount);
        CHECK(e.value == std::to_string(amount));
        CHECK(e.value.size() != 10);
      }
    }
    CHECK(accounts == 1);
  }
  // Nine and eleven digits are amounts.
  auto c = t->classify("send 123456789 and 12345678901");
  REQUIRE(c.entities.size() == 2);
  CHECK(c.entities[0].kind == EntityKind::amount);
  CHECK(c.entities[1].kind == EntityKind::amount);
  // Zero is not a positive amount.
  CHECK(t->classify("send 0").entities.empty());
}

TEST_CASE("longest pattern wins, then the lowest id") {
  std::vector<UserPattern> user = {
      {7, "pay bill", Intent::transfer, {}},
      {3, "show bill", Intent::balQuery, {}},
      {9, "pay", Intent::transfer, {}},
      {1, "bill", Intent::smalltalk, {}},
  };
  std::vector<BotTemplate> bot = {{"f", Intent::unknown, std::nullopt, "?"}};
  auto t = PatternTable::compile(user, bot);
  CHECK(t.classify("pay my bill").pattern_id == 7);
  CHECK(t.classify("show me the bill then pay bill").pattern_id == 3);
  CHECK(t.classify("bill").pattern_id == 1);
}

TEST_CASE("dataset validation") {
  const auto bot = write_temp("bot.json", R"([{"template_id":"f","intent":"unknown","missing_slot":null,"text":"?"}])");
  SUBCASE("empty file") {
    CHECK_THROWS_AS(load_datasets(write_temp("empty.json", ""), bot), DatasetError);
    CHECK_THROWS_AS(load_datasets(write_temp("emptyarr.json", "[]"), bot), DatasetError);
  }
  SUBCASE("duplicate ids name the record") {
    auto user = write_temp("dup.json",
                           R"([{"id":4,"pattern":"hello","intent":"smalltalk","slots":{}},
                               {"id":4,"pattern":"hi","intent":"smalltalk","slots":{}}])");
    try {
      load_datasets(user, bot);
      FAIL("expected a load error");
    } catch (const DatasetError& e) {
      CHECK(std::string(e.what()).find("id 4") != std::string::npos);
    }
  }
  SUBCASE("bad slot values") {
    CHECK_THROWS_AS(parse_user_dataset(json::parse(
                        R"([{"id":1,"pattern":"send 5 to 123","intent":"transfer","slots":{"toAcc":"123"}}])")),
                    DatasetError);
    CHECK_THROWS_AS(parse_user_dataset(json::parse(
                        R"([{"id":1,"pattern":"hi","intent":"smalltalk","slots":{"mood":"x"}}])")),
                    DatasetError);
    CHECK_THROWS_AS(parse_user_dataset(json::parse(
                        R"([{"id":1,"pattern":"hi","intent":"weather","slots":{}}])")),
                    DatasetError);
  }
  SUBCASE("conflicting labels for the same keywords") {
    std::vector<UserPattern> user = {{1, "pay 5", Intent::transfer, {}},
                                     {2, "pay 7", Intent::balQuery, {}}};
    CHECK_THROWS_AS(PatternTable::compile(user, parse_bot_dataset(json::parse(
                                                    R"([{"template_id":"f","intent":"unknown","text":"?"}])"))),
                    DatasetError);
  }
  SUBCASE("bot dataset needs a fallback and known placeholders") {
    CHECK_THROWS_AS(PatternTable::compile({{1, "hi", Intent::smalltalk, {}}},
                                          {{"s", Intent::smalltalk, std::nullopt, "hey"}}),
                    DatasetError);
    CHECK_THROWS_AS(parse_bot_dataset(json::parse(
                        R"([{"template_id":"f","intent":"unknown","text":"{balance}"}])")),
                    DatasetError);
    CHECK_THROWS_AS(parse_bot_dataset(json::parse(
                        R"([{"template_id":"f","intent":"unknown","text":"a"},{"template_id":"f","intent":"unknown","text":"b"}])")),
                    DatasetError);
  }
}

TEST_CASE("multi-turn transfer with confirmation") {
  Dialogue d;
  auto [s1, b1] = d.say("send money");
  CHECK(s1.intent == Intent::transfer);
  CHECK_FALSE(s1.complete);
  CHECK(s1.missing_slot == "toAcc");
  CHECK(b1 == "Which account number should receive the money?");

  auto [s2, b2] = d.say("1123158964");
  CHECK(s2.missing_slot == "amount");
  CHECK(b2 == "How much would you like to send?");

  auto [s3, b3] = d.say("1000 units");
  CHECK(s3.complete);
  CHECK(s3.consent == Consent::awaiting);
  CHECK(s3.value(EntityKind::accountNumber) == "1123158964");
  CHECK(s3.value(EntityKind::amount) == "1000");
  CHECK(b3.find("1000") != std::string::npos);
  CHECK(b3.find("1123158964") != std::string::npos);

  auto [s4, b4] = d.say("yes");
  CHECK(s4.intent == Intent::transfer);
  CHECK(s4.consent == Consent::affirmed);
  CHECK(s4.value(EntityKind::amount) == "1000");
  CHECK_FALSE(d.conv.pending_intent);

  // Turns alternate user/bot.
  REQUIRE(d.conv.history.size() == 8);
  for (std::size_t i = 0; i < d.conv.history.size(); ++i) {
    CHECK(d.conv.history[i].speaker == (i % 2 == 0 ? Speaker::user : Speaker::bot));
  }
}

TEST_CASE("one-shot transfer still asks for consent, and a refusal cancels") {
  Dialogue d;
  auto [s1, b1] = d.say("send account no 1123158964 1000 unit");
  CHECK(s1.complete);
  CHECK(s1.consent == Consent::awaiting);
  CHECK(b1 == "Send 1000 to account 1123158964? Reply yes to confirm or no to cancel.");
  auto [s2, b2] = d.say("no");
  CHECK(s2.consent == Consent::declined);
  CHECK(b2 == "Okay, the transfer has been cancelled.");
  // A later "yes" has nothing to confirm.
  auto [s3, b3] = d.say("yes");
  CHECK(s3.intent == Intent::smalltalk);
  CHECK(s3.consent == Consent::not_required);
}

TEST_CASE("a new instruction replaces an unconfirmed transfer") {
  Dialogue d;
  d.say("send account no 1123158964 1000 unit");
  auto [s, b] = d.say("what is my balance");
  CHECK(s.intent == Intent::balQuery);
  CHECK_FALSE(d.conv.awaiting_consent);
  auto [s2, b2] = d.say("yes");
  CHECK(s2.consent == Consent::not_required);
}

TEST_CASE("balance query needs the session account") {
  Dialogue d;
  auto [s1, b1] = d.say("what is my balance");
  CHECK_FALSE(s1.complete);
  CHECK(s1.missing_slot == "account");
  d.conv.account = "1000000001";
  auto [s2, b2] = d.say("check balance");
  CHECK(s2.complete);
  CHECK(s2.consent == Consent::not_required);
  CHECK(b2 == "Let me check your balance.");
}

TEST_CASE("fallback and smalltalk replies") {
  Dialogue d;
  auto [s1, b1] = d.say("the weather is lovely");
  CHECK(s1.intent == Intent::unknown);
  CHECK(b1.rfind("Sorry", 0) == 0);
  auto [s2, b2] = d.say("hello");
  CHECK(s2.intent == Intent::smalltalk);
  CHECK(s2.complete);
  bool from_smalltalk = false;
  for (const auto& tpl : shipped()->bot_templates()) {
    if (tpl.intent == Intent::smalltalk && tpl.text == b2) from_smalltalk = true;
  }
  CHECK(from_smalltalk);
}

TEST_CASE("wrong credential returns nothing and leaves the conversation alone") {
  Engine engine(shipped(), kSecret);
  Conversation conv;
  CHECK_THROWS_AS(engine.d_flow_model(conv, {"send account no 1123158964 1000 unit", 0},
                                      {std::string(64, 'b')}),
                  Unauthorized);
  CHECK_THROWS_AS(engine.d_flow_model(conv, {"hello", 0}, {""}), Unauthorized);
  CHECK(conv.history.empty());
  Engine unkeyed(shipped(), "");
  CHECK_THROWS_AS(unkeyed.d_flow_model(conv, {"hello", 0}, {""}), Unauthorized);
  CHECK_THROWS_AS(engine.d_flow_model(conv, {"   ", 0}, {kSecret}), NluError);
}

TEST_CASE("identical prefixes give identical results") {
  const std::vector<std::string> script = {"hi", "send money", "1123158964", "250", "yes",
                                           "what is my balance", "blah"};
  auto run = [&] {
    Dialogue d;
    std::vector<std::string> out;
    for (const auto& s : script) {
      auto [set, bot] = d.say(s);
      out.push_back(to_json(set).dump() + bot);
    }
    return out;
  };
  CHECK(run() == run());
}

TEST_CASE("service keeps one conversation per session") {
  NluService svc(shipped(), kSecret);
  auto r1 = svc.query({"s1", "send money", kSecret, std::nullopt});
  auto r2 = svc.query({"s2", "1123158964", kSecret, std::nullopt});
  CHECK(r1.entity_set.missing_slot == "toAcc");
  CHECK(r2.entity_set.intent == Intent::unknown);
  auto r3 = svc.query({"s1", "1123158964", kSecret, std::nullopt});
  CHECK(r3.entity_set.missing_slot == "amount");
  CHECK(svc.conversation_count() == 2);
  svc.forget("s1");
  CHECK(svc.conversation_count() == 1);
  CHECK_THROWS_AS(svc.query({"s1", "hello", "nope", std::nullopt}), Unauthorized);

  auto bal = svc.query({"s3", "what is my balance", kSecret, "1000000001"});
  CHECK(bal.entity_set.complete);
}

TEST_CASE("service over local http") {
  NluService svc(shipped(), kSecret);
  NluHttpServer server(svc);
  const int port = server.bind("127.0.0.1", 0);
  REQUIRE(port > 0);
  std::thread t([&] { server.listen_after_bind(); });

  HttpNluClient client("127.0.0.1", port, kSecret);
  auto r = client.query({"s", "send account no 1123158964 1000 unit", kSecret, std::nullopt});
  CHECK(r.entity_set.intent == Intent::transfer);
  CHECK(r.entity_set.complete);
  CHECK(as_pairs(r.entity_set.entities) ==
        std::multiset<std::pair<std::string, std::string>>{{"amount", "1000"}, {"toAcc", "1123158964"}});
  CHECK(r.bot_text.find("1123158964") != std::string::npos);
  CHECK_THROWS_AS(client.query({"s", "yes", std::string(64, 'c'), std::nullopt}), Unauthorized);
  client.forget("s");
  CHECK(svc.conversation_count() == 0);

  server.stop();
  t.join();
  CHECK_THROWS_AS(client.query({"s", "hi", kSecret, std::nullopt}), NluError);
}

TEST_CASE("json wire forms round-trip") {
  NluQuery q{"sid", "hello", kSecret, "1000000001"};
  auto back = query_from_json(to_json(q));
  CHECK(back.session_id == "sid");
  CHECK(back.account == "1000000001");
  NluReply r;
  r.entity_set.intent = Intent::transfer;
  r.entity_set.entities = {{EntityKind::amount, "5", {0, 1}}};
  r.entity_set.missing_slot = "toAcc";
  r.bot_text = "x";
  auto rr = reply_from_json(to_json(r));
  CHECK(rr.entity_set.entities == r.entity_set.entities);
  CHECK(rr.entity_set.missing_slot == "toAcc");
  CHECK_THROWS_AS(query_from_json(json{{"session_id", "x"}}), NluError);
}

TEST_CASE("secret resolution") {
  ::unsetenv("BONIK_NLU_SECRET");
  CHECK(resolve_secret().size() == 64);
  CHECK(resolve_secret(kSecret) == kSecret);
  CHECK_THROWS_AS(resolve_secret("short"), NluError);
  ::setenv("BONIK_NLU_SECRET", std::string(64, 'd').c_str(), 1);
  CHECK(resolve_secret(kSecret) == std::string(64, 'd'));
  ::unsetenv("BONIK_NLU_SECRET");
}
