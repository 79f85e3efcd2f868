/**
 * Copyright BONIK authors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#include "bonik/bench/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <stdexcept>
#include <thread>

#include "bonik/chaincode/chaincode.hpp"
#include "bonik/network/network.hpp"

namespace bonik::bench {

using network::ConfigError;
using network::Micros;

std::string_view to_string(Workload w) {
  switch (w) {
    case Workload::create: return "create";
    case Workload::transfer: return "transfer";
    case Workload::query: return "query";
  }
  return "unknown";
}

Workload parse_workload(std::string_view name) {
  if (name == "create") return Workload::create;
  if (name == "transfer") return Workload::transfer;
  if (name == "query") return Workload::query;
  throw ConfigError("unknown workload '" + std::string(name) + "' (create, transfer, query)");
}

void WorkloadConfig::validate() const {
  network::Topology::preset(topology);
  if (users < 1) throw ConfigError("users must be positive");
  if (!(send_rate_per_user_tps > 0) || !std::isfinite(send_rate_per_user_tps)) {
    throw ConfigError("send_rate_per_user_tps must be positive");
  }
  if (!(duration_s > 0) || !std::isfinite(duration_s)) throw ConfigError("duration_s must be positive");
  if (repetitions < 1) throw ConfigError("repetitions must be at least 1");
  latency.validate();
  batch.validate();
}

namespace {

template <typename T>
void read_field(const json& obj, const char* name, T& out) {
  if (!obj.contains(name)) return;
  try {
    out = obj.at(name).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("bench field '") + name + "' has the wrong type");
  }
}

}  // namespace

WorkloadConfig apply_config(WorkloadConfig base, const json& doc) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  if (doc.contains("latency")) base.latency = network::latency_from_json(doc["latency"]);
  if (doc.contains("batch")) base.batch = network::batch_from_json(doc["batch"]);
  if (doc.contains("topology") && doc["topology"].is_string()) {
    base.topology = doc["topology"].get<std::string>();
  }
  if (doc.contains("bench")) {
    const auto& b = doc["bench"];
    if (!b.is_object()) throw ConfigError("bench section must be an object");
    if (b.contains("workload")) {
      if (!b["workload"].is_string()) throw ConfigError("bench field 'workload' has the wrong type");
      base.workload = parse_workload(b["workload"].get<std::string>());
    }
    read_field(b, "users", base.users);
    read_field(b, "topology", base.topology);
    read_field(b, "send_rate_per_user_tps", base.send_rate_per_user_tps);
    read_field(b, "duration_s", base.duration_s);
    read_field(b, "repetitions", base.repetitions);
    read_field(b, "seed", base.seed);
  }
  base.validate();
  return base;
}

WorkloadConfig load_config(WorkloadConfig base, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file " + path.string() + " is not valid JSON: " + e.what());
  }
  return apply_config(std::move(base), doc);
}

namespace {

std::int64_t balance_total(const network::SimulatedNetwork& net, const std::vector<std::string>& accounts) {
  std::int64_t total = 0;
  for (const auto& acc : accounts) {
    if (auto raw = net.ledger().get_state(chaincode::balance_key(acc))) total += std::stoll(*raw);
  }
  return total;
}

chaincode::RegisData registration(const std::string& name) {
  return {name, crypto::hash(std::string_view{name})};
}

}  // namespace

RepetitionReport run_repetition(const WorkloadConfig& config, int repetition) {
  config.validate();
  network::NetworkConfig net_config{network::Topology::preset(config.topology), config.latency,
                                    config.batch};
  network::SimulatedNetwork net(net_config, "bench:" + std::to_string(config.seed) + ":" +
                                                std::to_string(repetition));
  net.set_concurrent_clients(config.users);

  // Independent stream per (seed, repetition, cell).
  std::seed_seq seq{static_cast<std::uint32_t>(config.seed), static_cast<std::uint32_t>(config.seed >> 32),
                    static_cast<std::uint32_t>(repetition), static_cast<std::uint32_t>(config.workload),
                    static_cast<std::uint32_t>(config.users),
                    static_cast<std::uint32_t>(net_config.topology.total_peers())};
  std::mt19937_64 rng(seq);

  const auto n = static_cast<std::size_t>(config.users);
  std::vector<network::Identity> clients;
  clients.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    clients.push_back(net.register_identity("bench-client-" + std::to_string(i), network::Role::user));
  }

  // Transfer and query clients each own one account, opened before the window.
  std::vector<std::string> accounts(n);
  if (config.workload != Workload::create) {
    for (std::size_t i = 0; i < n; ++i) {
      net.submit_transaction(clients[i], {registration("holder-" + std::to_string(i))},
                             [&accounts, i](const network::TransactionResult& r) {
                               if (r.response.account_num) accounts[i] = *r.response.account_num;
                             });
    }
    net.drain();
    for (const auto& a : accounts) {
      if (a.empty()) throw std::runtime_error("bench setup: account registration failed");
    }
  }

  RepetitionReport report;
  report.repetition = repetition;
  report.accounts = config.workload == Workload::create ? 0 : n;
  report.height_at_start = net.ledger().tip_height();
  report.balance_total_start = balance_total(net, accounts);

  const Micros start = net.now();
  const Micros end = start + network::to_micros(config.duration_s * 1000.0);
  const Micros interval = network::to_micros(1000.0 / config.send_rate_per_user_tps);
  std::vector<std::uint64_t> issued(n, 0);
  std::uniform_int_distribution<std::size_t> pick_other(0, n > 1 ? n - 2 : 0);
  std::uniform_int_distribution<std::int64_t> pick_amount(1, 100);

  auto make_request = [&](std::size_t i) -> chaincode::Request {
    switch (config.workload) {
      case Workload::create:
        return {registration("c" + std::to_string(i) + "-" + std::to_string(issued[i]))};
      case Workload::transfer: {
        std::size_t to = n > 1 ? pick_other(rng) : i;
        if (n > 1 && to >= i) ++to;
        return {chaincode::TransferData{"holder-" + std::to_string(i), accounts[i], accounts[to],
                                        pick_amount(rng)}};
      }
      case Workload::query:
        return {chaincode::BalData{"holder-" + std::to_string(i), accounts[i]}};
    }
    throw std::logic_error("unreachable workload");
  };

  // Closed loop: a client submits, waits for completion, and never exceeds
  // its rate cap.
  std::function<void(std::size_t)> issue = [&](std::size_t i) {
    const Micros submitted = net.now();
    if (submitted >= end) return;
    ++report.offered;
    auto request = make_request(i);
    ++issued[i];
    net.submit_transaction(clients[i], std::move(request),
                           [&, i, submitted](const network::TransactionResult& r) {
                             if (r.completed_at <= end) {
                               if (r.outcome == network::Outcome::aborted) {
                                 ++report.aborted;
                               } else {
                                 ++report.committed;
                               }
                             }
                             const Micros next = std::max(r.completed_at, submitted + interval);
                             if (next < end) net.schedule_at(next, "client", [&issue, i] { issue(i); });
                           });
  };

  std::uniform_int_distribution<std::int64_t> offset(0, std::max<std::int64_t>(interval.count() - 1, 0));
  for (std::size_t i = 0; i < n; ++i) {
    net.schedule_at(start + Micros{offset(rng)}, "client", [&issue, i] { issue(i); });
  }
  net.drain();

  report.elapsed_ms = static_cast<double>((end - start).count()) / 1000.0;
  report.tps = static_cast<double>(report.committed) / (report.elapsed_ms / 1000.0);
  report.height_at_end = net.ledger().tip_height();
  report.balance_total_end = balance_total(net, accounts);
  return report;
}

BenchReport run_workload(const WorkloadConfig& config) {
  config.validate();
  BenchReport report;
  report.config = config;
  double tps_sum = 0;
  for (int rep = 0; rep < config.repetitions; ++rep) {
    auto r = run_repetition(config, rep);
    report.committed_count += r.committed;
    report.aborted_count += r.aborted;
    report.virtual_elapsed_ms += r.elapsed_ms;
    tps_sum += r.tps;
    report.repetitions.push_back(std::move(r));
  }
  report.tps = static_cast<double>(report.committed_count) / (report.virtual_elapsed_ms / 1000.0);
  report.mean_tps = tps_sum / config.repetitions;
  return report;
}

MatrixResult run_matrix(const MatrixConfig& config) {
  std::vector<WorkloadConfig> plan;
  for (auto w : config.workloads) {
    for (const auto& topo : config.topologies) {
      for (int users : config.users) {
        auto cell = config.base;
        cell.workload = w;
        cell.topology = topo;
        cell.users = users;
        plan.push_back(std::move(cell));
      }
    }
  }

  MatrixResult result;
  result.cells.resize(plan.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < plan.size(); i = next++) {
      try {
        result.cells[i] = run_workload(plan[i]);
      } catch (const std::exception& e) {
        result.cells[i] = BenchReport{};
        result.cells[i].config = plan[i];
        result.cells[i].error = e.what();
      }
    }
  };
  unsigned threads = config.threads ? config.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(plan.size(), 1)));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  result.trends = evaluate_trends(result.cells);
  result.calibration = calibration_check(result.cells);
  return result;
}

namespace {

std::optional<double> cell_tps(const std::vector<BenchReport>& cells, Workload w, int users,
                               const std::string& topology) {
  for (const auto& c : cells) {
    if (c.config.workload == w && c.config.users == users && c.config.topology == topology) {
      if (c.failed()) return std::nullopt;
      return c.tps;
    }
  }
  return std::nullopt;
}

std::vector<int> user_counts(const std::vector<BenchReport>& cells, Workload w, const std::string& topology) {
  std::vector<int> out;
  for (const auto& c : cells) {
    if (c.config.workload == w && c.config.topology == topology) out.push_back(c.config.users);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

/// Strictly monotone series over ascending user counts.
TrendVerdict series_trend(std::string id, std::string description, const std::vector<BenchReport>& cells,
                          Workload w, const std::string& topology, bool increasing) {
  TrendVerdict v{std::move(id), std::move(description), false, {}};
  const auto users = user_counts(cells, w, topology);
  if (users.size() < 2) {
    v.detail = "needs at least two user counts";
    return v;
  }
  v.pass = true;
  std::optional<double> prev;
  for (int u : users) {
    auto t = cell_tps(cells, w, u, topology);
    if (!t) {
      v.pass = false;
      v.detail += std::to_string(u) + ":failed ";
      continue;
    }
    v.detail += std::to_string(u) + ":" + fmt(*t) + " ";
    if (prev && (increasing ? !(*t > *prev) : !(*t < *prev))) v.pass = false;
    prev = t;
  }
  if (!v.detail.empty()) v.detail.pop_back();
  return v;
}

}  // namespace

std::vector<TrendVerdict> evaluate_trends(const std::vector<BenchReport>& cells) {
  std::vector<TrendVerdict> out;
  out.push_back(series_trend("a", "create TPS at 2O2P strictly increases with users", cells,
                             Workload::create, "2O2P", true));

  {
    TrendVerdict v{"b", "create TPS at the largest user count strictly decreases 2O2P>2O4P>2O6P", false, {}};
    const auto users = user_counts(cells, Workload::create, "2O2P");
    if (!users.empty()) {
      const int u = users.back();
      v.pass = true;
      std::optional<double> prev;
      int seen = 0;
      for (const char* topo : {"2O2P", "2O4P", "2O6P"}) {
        auto t = cell_tps(cells, Workload::create, u, topo);
        if (!t) continue;
        ++seen;
        v.detail += std::string(topo) + ":" + fmt(*t) + " ";
        if (prev && !(*t < *prev)) v.pass = false;
        prev = t;
      }
      if (seen < 2 || !cell_tps(cells, Workload::create, u, "2O6P")) v.pass = false;
      v.detail = "users=" + std::to_string(u) + " " + v.detail;
      v.detail.pop_back();
    } else {
      v.detail = "no create cells at 2O2P";
    }
    out.push_back(std::move(v));
  }

  {
    TrendVerdict v{"c", "query TPS >= 3x transfer TPS at every matching cell", false, {}};
    int matched = 0;
    bool ok = true;
    double worst = INFINITY;
    for (const auto& c : cells) {
      if (c.config.workload != Workload::query) continue;
      const bool has_transfer = std::any_of(cells.begin(), cells.end(), [&](const BenchReport& t) {
        return t.config.workload == Workload::transfer && t.config.users == c.config.users &&
               t.config.topology == c.config.topology;
      });
      if (!has_transfer) continue;
      ++matched;
      auto transfer = cell_tps(cells, Workload::transfer, c.config.users, c.config.topology);
      if (c.failed() || !transfer || *transfer <= 0) {
        ok = false;
        continue;
      }
      const double ratio = c.tps / *transfer;
      worst = std::min(worst, ratio);
      if (ratio < 3.0) ok = false;
    }
    v.pass = ok && matched > 0;
    v.detail = std::to_string(matched) + " cells, min ratio " + (std::isfinite(worst) ? fmt(worst) : "n/a");
    out.push_back(std::move(v));
  }

  out.push_back(series_trend("d", "query TPS at 2O2P strictly decreases with users", cells, Workload::query,
                             "2O2P", false));
  return out;
}

std::vector<CalibrationPoint> calibration_check(const std::vector<BenchReport>& cells) {
  const std::vector<CalibrationPoint> refs{
      {Workload::create, 10, "2O2P", 8.6, {}, false},     {Workload::create, 50, "2O2P", 37.98, {}, false},
      {Workload::create, 50, "2O6P", 28.14, {}, false},   {Workload::transfer, 50, "2O2P", 36.72, {}, false},
      {Workload::query, 10, "2O2P", 286.16, {}, false},   {Workload::query, 50, "2O2P", 194.9, {}, false},
  };
  std::vector<CalibrationPoint> out;
  for (auto p : refs) {
    p.measured_tps = cell_tps(cells, p.workload, p.users, p.topology);
    p.within_tolerance = p.measured_tps && std::abs(*p.measured_tps / p.reference_tps - 1.0) <= 0.30;
    out.push_back(p);
  }
  return out;
}

void emit_csv(const std::vector<BenchReport>& reports, std::ostream& out) {
  if (reports.empty()) throw std::invalid_argument("emit_csv: no reports");
  out << "workload,users,topology,repetition,committed,aborted,elapsed_ms,tps\n";
  char line[256];
  for (const auto& r : reports) {
    const auto w = std::string(to_string(r.config.workload));
    if (r.failed()) {
      std::snprintf(line, sizeof line, "%s,%d,%s,failed,0,0,0.000,0.0000\n", w.c_str(), r.config.users,
                    r.config.topology.c_str());
      out << line;
      continue;
    }
    for (const auto& rep : r.repetitions) {
      std::snprintf(line, sizeof line, "%s,%d,%s,%d,%llu,%llu,%.3f,%.4f\n", w.c_str(), r.config.users,
                    r.config.topology.c_str(), rep.repetition,
                    static_cast<unsigned long long>(rep.committed),
                    static_cast<unsigned long long>(rep.aborted), rep.elapsed_ms, rep.tps);
      out << line;
    }
  }
}

void emit_csv(const std::vector<BenchReport>& reports, const std::filesystem::path& path) {
  if (reports.empty()) throw std::invalid_argument("emit_csv: no reports");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  emit_csv(reports, static_cast<std::ostream&>(out));
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace bonik::bench
