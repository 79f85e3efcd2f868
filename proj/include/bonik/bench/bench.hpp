/**
 * Copyright BONIK authors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "bonik/network/config.hpp"

namespace bonik::bench {

using json = nlohmann::json;

enum class Workload { create, transfer, query };

std::string_view to_string(Workload w);
/// Throws network::ConfigError on an unknown name.
Workload parse_workload(std::string_view name);

struct WorkloadConfig {
  Workload workload = Workload::create;
  int users = 10;
  std::string topology = "2O2P";
  double send_rate_per_user_tps = 20.0;
  double duration_s = 60.0;
  int repetitions = 5;
  std::uint64_t seed = 42;
  network::LatencyProfile latency;
  network::BatchPolicy batch;

  /// Throws network::ConfigError.
  void validate() const;
};

/// Reads the "latency", "batch" and "bench" sections of a config file over
/// `base`. Fields absent from the file keep their values in `base`.
WorkloadConfig apply_config(WorkloadConfig base, const json& doc);
WorkloadConfig load_config(WorkloadConfig base, const std::filesystem::path& path);

struct RepetitionReport {
  int repetition = 0;
  std::uint64_t offered = 0;    // submissions issued inside the window
  std::uint64_t committed = 0;  // completed inside the window (ordered or evaluated)
  std::uint64_t aborted = 0;    // rejected before ordering, inside the window
  double elapsed_ms = 0;
  double tps = 0;

  // Diagnostics for invariant checks; not part of the CSV.
  std::uint64_t height_at_start = 0;
  std::uint64_t height_at_end = 0;
  std::int64_t balance_total_start = 0;
  std::int64_t balance_total_end = 0;
  std::size_t accounts = 0;
};

struct BenchReport {
  WorkloadConfig config;
  std::vector<RepetitionReport> repetitions;
  std::uint64_t committed_count = 0;
  std::uint64_t aborted_count = 0;
  double virtual_elapsed_ms = 0;
  /// committed_count over the summed elapsed time.
  double tps = 0;
  double mean_tps = 0;
  std::optional<std::string> error;

  bool failed() const { return error.has_value(); }
};

/// One repetition: a fresh simulated network, `users` closed-loop clients
/// each capped at send_rate_per_user_tps, measured over duration_s of
/// virtual time after setup.
RepetitionReport run_repetition(const WorkloadConfig& config, int repetition);
/// All repetitions, aggregated. Throws network::ConfigError on bad config.
BenchReport run_workload(const WorkloadConfig& config);

struct MatrixConfig {
  std::vector<Workload> workloads{Workload::create, Workload::transfer, Workload::query};
  std::vector<int> users{10, 20, 30, 40, 50};
  std::vector<std::string> topologies{"2O2P", "2O4P", "2O6P"};
  WorkloadConfig base;
  /// Worker threads; 0 picks hardware concurrency. Results do not depend on it.
  unsigned threads = 0;
};

struct TrendVerdict {
  std::string id;
  std::string description;
  bool pass = false;
  std::string detail;
};

struct CalibrationPoint {
  Workload workload = Workload::create;
  int users = 0;
  std::string topology;
  double reference_tps = 0;
  std::optional<double> measured_tps;
  bool within_tolerance = false;  // |measured/reference - 1| <= 0.30
};

struct MatrixResult {
  std::vector<BenchReport> cells;  // workload-major, then topology, then users
  std::vector<TrendVerdict> trends;
  std::vector<CalibrationPoint> calibration;
};

/// Runs every cell; a failing cell is recorded with its error and the rest
/// continue.
MatrixResult run_matrix(const MatrixConfig& config);

/// The four trend checks (a)-(d) over whichever cells are present; a check
/// whose cells are missing or failed does not pass.
std::vector<TrendVerdict> evaluate_trends(const std::vector<BenchReport>& cells);
/// Measured values against the six published reference points.
std::vector<CalibrationPoint> calibration_check(const std::vector<BenchReport>& cells);

/// CSV with header workload,users,topology,repetition,committed,aborted,elapsed_ms,tps;
/// one row per repetition, or one row with repetition "failed" for a failed
/// cell. Throws std::invalid_argument on empty input.
void emit_csv(const std::vector<BenchReport>& reports, std::ostream& out);
void emit_csv(const std::vector<BenchReport>& reports, const std::filesystem::path& path);

}  // namespace bonik::bench
