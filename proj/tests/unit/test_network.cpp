/**
 * Copyright BONIK authors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#include <doctest.h>

#include <sstream>

#include "bonik/network/network.hpp"

using namespace bonik;
using namespace bonik::network;
using chaincode::Request;
using chaincode::Status;
using namespace std::chrono_literals;

namespace {

NetworkConfig config_for(std::string_view preset) {
  NetworkConfig c;
  c.topology = Topology::preset(preset);
  return c;
}

Request reg(const std::string& name) {
  return {chaincode::RegisData{name, crypto::hash(name)}};
}

}  // namespace

TEST_CASE("topology presets") {
  auto a = Topology::preset("2O2P");
  auto b = Topology::preset("2O4P");
  auto c = Topology::preset("2O6P");
  CHECK(a.orderer_count == 2);
  CHECK(a.total_peers() == 2);
  CHECK(b.total_peers() == 4);
  CHECK(c.total_peers() == 6);
  CHECK(a.name() == "2O2P");
  CHECK(c.name() == "2O6P");
  CHECK_THROWS_AS(Topology::preset("3O9P"), ConfigError);
  Topology bad;
  bad.org_count = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("config json round-trip") {
  auto c = config_for("2O4P");
  c.latency.order_per_tx_ms = 2.25;
  c.batch.max_message_count = 10;
  auto back = network_config_from_json(to_json(c));
  CHECK(back.topology == c.topology);
  CHECK(back.latency == c.latency);
  CHECK(back.batch == c.batch);
  CHECK(topology_from_json(json("2O6P")) == Topology::preset("2O6P"));
  CHECK_THROWS_AS(batch_from_json(json{{"batch_timeout_ms", -1}}), ConfigError);
}

TEST_CASE("event queue orders by time then insertion") {
  EventQueue q;
  std::vector<int> order;
  q.schedule(Micros{50}, "b", [&] { order.push_back(2); });
  q.schedule(Micros{10}, "a", [&] { order.push_back(1); });
  q.schedule(Micros{50}, "c", [&] { order.push_back(3); });
  auto done = q.advance_until(Micros{40});
  CHECK(done.size() == 1);
  CHECK(q.now() == Micros{40});
  q.advance_until(Micros{100});
  CHECK(order == std::vector<int>{1, 2, 3});
  CHECK(q.empty());
}

TEST_CASE("msp certificates") {
  Msp msp(std::string("unit"));
  auto alice = msp.register_identity("alice", Role::user);
  CHECK(msp.verify_certificate(alice));
  CHECK_THROWS_AS(msp.register_identity("alice", Role::user), AlreadyRegistered);

  auto forged = alice;
  forged.name = "mallory";
  CHECK_FALSE(msp.verify_certificate(forged));

  Msp other(std::string("other"));
  auto outsider = other.register_identity("alice", Role::user);
  CHECK_FALSE(msp.verify_certificate(outsider));

  Msp again(std::string("unit"));
  CHECK(again.register_identity("alice", Role::user).keypair.public_key == alice.keypair.public_key);
}

TEST_CASE("single write commits at the hand-derived virtual time") {
  SimulatedNetwork net(config_for("2O2P"), "t1");
  auto client = net.register_identity("client", Role::user);
  auto r = net.run_until_complete(net.submit_transaction(client, reg("alice")));
  CHECK(r.outcome == Outcome::committed);
  CHECK(r.block_height == 1);
  CHECK(r.response.status == Status::True);
  // endorse 10 ms, batch timeout 1000 ms, ordering 10 + 3.5 + 2 peers * 80,
  // commit 10 ms.
  const double expected_ms = 10 + 1000 + (10 + 3.5 + 2 * 80) + 10;
  CHECK(r.completed_at.count() == static_cast<std::int64_t>(expected_ms * 1000));
}

TEST_CASE("two writes inside one timeout share a block") {
  SimulatedNetwork net(config_for("2O2P"), "t2");
  auto client = net.register_identity("client", Role::user);
  auto t1 = net.submit_transaction(client, reg("alice"));
  net.advance_virtual_time(300ms);
  auto t2 = net.submit_transaction(client, reg("bob"));
  net.drain();
  auto r1 = *net.result(t1);
  auto r2 = *net.result(t2);
  CHECK(r1.block_height == r2.block_height);
  CHECK(net.ledger().tip_height() == 1);
  CHECK(net.ledger().block_at(1)->tx_list.size() == 2);
}

TEST_CASE("batch size limit cuts early") {
  auto cfg = config_for("2O2P");
  cfg.batch.max_message_count = 3;
  SimulatedNetwork net(cfg, "t3");
  auto client = net.register_identity("client", Role::user);
  for (int i = 0; i < 7; ++i) net.submit_transaction(client, reg("u" + std::to_string(i)));
  net.drain();
  CHECK(net.ledger().tip_height() == 3);
  CHECK(net.ledger().block_at(1)->tx_list.size() == 3);
  CHECK(net.ledger().block_at(3)->tx_list.size() == 1);
  CHECK(net.ledger().verify_chain());
}

TEST_CASE("reads are evaluated without ordering") {
  SimulatedNetwork net(config_for("2O2P"), "t4");
  auto client = net.register_identity("client", Role::user);
  net.execute(client, reg("alice"));
  const auto height = net.ledger().tip_height();
  net.set_concurrent_clients(10);
  CHECK(net.read_latency() == to_micros(0.5 + 5.4 * 9));
  auto r = net.execute(client, {chaincode::BalData{"alice", "1000000001"}});
  CHECK(r.outcome == Outcome::evaluated);
  CHECK(r.response.balance == 10000);
  CHECK_FALSE(r.block_height);
  CHECK(net.ledger().tip_height() == height);
  CHECK(r.completed_at - r.submitted_at == net.read_latency());
}

TEST_CASE("two transfers of 1000 leave 8000") {
  SimulatedNetwork net(config_for("2O2P"), "t5");
  auto client = net.register_identity("client", Role::user);
  net.execute(client, reg("alice"));
  net.execute(client, reg("bob"));
  for (int i = 0; i < 2; ++i) {
    auto r = net.execute(client, {chaincode::TransferData{"alice", "1000000001", "1000000002", 1000}});
    CHECK(r.response.status == Status::TransactionSuccessful);
  }
  CHECK(net.ledger().get_state("bal:1000000001") == "8000");
  CHECK(net.ledger().read_history("bal:1000000001").size() == 3);
}

TEST_CASE("malformed write aborts at endorsement and never reaches a block") {
  SimulatedNetwork net(config_for("2O2P"), "t6");
  auto client = net.register_identity("client", Role::user);
  auto r = net.execute(client, {chaincode::TransferData{"a", "1000000001", "1000000001", 5}});
  CHECK(r.outcome == Outcome::aborted);
  CHECK(net.ledger().tip_height() == 0);
}

TEST_CASE("uncertified submitters are refused") {
  SimulatedNetwork net(config_for("2O2P"), "t7");
  Msp rogue(std::string("rogue"));
  auto outsider = rogue.register_identity("client", Role::user);
  CHECK_THROWS_AS(net.submit_transaction(outsider, reg("x")), AccessDenied);
  CHECK(net.idle());
}

TEST_CASE("endorsement policy demands every endorser") {
  Consortium c(config_for("2O2P"), std::string("t8"));
  auto tx = ledger::LedgerTransaction::make(reg("alice"), "client", 1);
  REQUIRE_FALSE(c.endorse(tx));
  CHECK(tx.endorsements.size() == 4);
  CHECK(c.endorsement_policy_satisfied(tx));

  auto missing = tx;
  missing.endorsements.pop_back();
  CHECK_FALSE(c.endorsement_policy_satisfied(missing));

  auto duplicated = tx;
  duplicated.endorsements.back() = duplicated.endorsements.front();
  CHECK_FALSE(c.endorsement_policy_satisfied(duplicated));

  auto forged = tx;
  forged.endorsements[2].signature[0] ^= 1;
  CHECK_FALSE(c.endorsement_policy_satisfied(forged));

  // Committing the forged copy stores it as invalid with no state effect.
  auto block = c.ledger().append_block({forged});
  CHECK_FALSE(block.tx_list[0].valid);
  CHECK_FALSE(c.ledger().get_state("user:alice"));
  CHECK(c.ledger().verify_chain());
}

TEST_CASE("same seed and inputs give a byte-identical ledger file") {
  auto run = [] {
    SimulatedNetwork net(config_for("2O4P"), "determinism");
    auto client = net.register_identity("client", Role::user);
    for (int i = 0; i < 5; ++i) net.submit_transaction(client, reg("u" + std::to_string(i)));
    net.drain();
    for (int i = 0; i < 4; ++i) {
      net.submit_transaction(client, {chaincode::TransferData{"u", "1000000001", "1000000002", 100 + i}});
      net.advance_virtual_time(net.now() + 200ms);
    }
    net.drain();
    std::ostringstream out;
    net.ledger().write_to(out);
    return out.str();
  };
  const auto a = run();
  CHECK(a == run());
  CHECK(a.size() > 100);
}

TEST_CASE("ledger file reloads into a consortium") {
  SimulatedNetwork net(config_for("2O2P"), "reload");
  auto client = net.register_identity("client", Role::user);
  net.execute(client, reg("alice"));
  std::stringstream file;
  net.ledger().write_to(file);

  Consortium fresh(config_for("2O2P"), std::string("reload"));
  fresh.load_ledger(file);
  CHECK(fresh.ledger().tip_hash() == net.ledger().tip_hash());
  CHECK(fresh.ledger().get_state("user:alice"));

  // A consortium with different endorser keys rejects the recorded endorsements.
  std::stringstream again;
  net.ledger().write_to(again);
  Consortium stranger(config_for("2O2P"), std::string("other-seed"));
  CHECK_THROWS_AS(stranger.load_ledger(again), ledger::LedgerError);
}

TEST_CASE("commit latency grows with the peer count") {
  auto latency = [](std::string_view preset) {
    SimulatedNetwork net(config_for(preset), "mono");
    auto client = net.register_identity("client", Role::user);
    auto r = net.run_until_complete(net.submit_transaction(client, reg("alice")));
    return r.completed_at - r.submitted_at;
  };
  CHECK(latency("2O2P") < latency("2O4P"));
  CHECK(latency("2O4P") < latency("2O6P"));
}

TEST_CASE("live network commits with wall-clock batching") {
  auto cfg = config_for("2O2P");
  cfg.batch.batch_timeout_ms = 20;
  LiveNetwork net(cfg);
  auto client = net.consortium().msp().register_identity("client", Role::user);
  auto f1 = net.submit_transaction(client, reg("alice"));
  auto f2 = net.submit_transaction(client, reg("bob"));
  auto r1 = f1.get();
  auto r2 = f2.get();
  CHECK(r1.outcome == Outcome::committed);
  CHECK(r2.response.status == Status::True);
  auto bal = net.execute(client, {chaincode::BalData{"bob", *r2.response.account_num}});
  CHECK(bal.response.balance == 10000);
  CHECK(net.consortium().ledger().verify_chain());
}
