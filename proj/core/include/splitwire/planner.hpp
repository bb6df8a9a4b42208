// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The splitwire Authors
//
// Accuracy tables and the (split point, n_c) search.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "splitwire/accounting.hpp"
#include "splitwire/channel.hpp"
#include "splitwire/cost_model.hpp"
#include "splitwire/model_graph.hpp"

namespace splitwire {

struct AccuracyRecord {
  std::string model;
  SplitPoint split = SplitPoint::kSP2;
  std::int64_t n_c = 0;
  double snr_db = 0.0;
  double top1 = 0.0;
  std::string provenance;  // optional free-form tag

  friend bool operator==(const AccuracyRecord&, const AccuracyRecord&) = default;
};

struct AccuracyTable {
  std::vector<AccuracyRecord> records;
  std::string source;         // file path or "<memory>"
  std::uint64_t content_hash = 0;

  bool empty() const noexcept { return records.empty(); }
};

// CSV with header `model,split,n_c,snr_db,top1` and an optional trailing
// `provenance` column. Throws naming the line on a malformed row, naming the
// key on a duplicate (model, split, n_c, snr_db), and "no records" when
// there are no data rows.
AccuracyTable load_accuracy_table(std::string_view csv, std::string source = "<memory>");
AccuracyTable read_accuracy_table(const std::string& path);
std::string write_accuracy_table(const AccuracyTable& table);

// SNR row used for a requested SNR: the exact value when present, else the
// nearest lower one. Never interpolates.
std::optional<double> match_snr(const AccuracyTable& table, SplitPoint split, double snr_db,
                                const std::optional<std::string>& model = std::nullopt);

// Smallest n_c whose top1 reaches `floor` at (split, matched SNR).
std::optional<std::int64_t> min_nc(const AccuracyTable& table, SplitPoint split, double snr_db,
                                   double floor,
                                   const std::optional<std::string>& model = std::nullopt);

struct FlopEntry {
  double f_m_t = 0.0;
  double f_m_r = 0.0;
  double f_m = 0.0;
};

// FLOP reports per (model, split, n_c). An empty model name matches any
// model. A lookup tries the model's exact n_c, then its split-wide entry
// (n_c = 0), then the same two keys without a model.
class FlopCatalog {
 public:
  void set(SplitPoint split, std::int64_t n_c, FlopEntry entry, std::string_view model = {});
  void set(SplitPoint split, std::int64_t n_c, const FlopReport& report,
           std::string_view model = {});
  std::optional<FlopEntry> find(SplitPoint split, std::int64_t n_c,
                                std::string_view model = {}) const;
  bool empty() const noexcept { return entries_.empty(); }

 private:
  std::map<std::tuple<std::string, int, std::int64_t>, FlopEntry, std::less<>> entries_;
};

// CSV with at least the columns split, f_m_t, f_m_r, f_m (any order, extra
// columns ignored) and an optional n_c column. Values are scaled by
// `unit` (1e6 for tables in millions).
FlopCatalog load_flop_catalog(std::string_view csv, double unit = 1e6);
FlopCatalog read_flop_catalog(const std::string& path, double unit = 1e6);

struct PlanRequest {
  DeviceProfile dev_t;
  DeviceProfile dev_r;
  ChannelProfile channel;
  double floor = 0.0;
  std::optional<std::string> model;  // restrict to one model's rows
};

struct PlanCandidate {
  AccuracyRecord record;
  CostReport cost;
};

struct PlanResult {
  bool feasible = false;
  std::string model;
  SplitPoint split = SplitPoint::kSP2;
  std::int64_t n_c = 0;
  double snr_db = 0.0;  // matched table SNR
  double top1 = 0.0;
  CostReport cost;
  std::size_t candidates = 0;  // rows considered at the matched SNRs
  // When infeasible: the closest miss (highest top1 among candidates) and a
  // human-readable explanation.
  std::optional<AccuracyRecord> nearest_miss;
  std::string diagnostics;
};

// Rows at the matched SNR of every (model, split) cell, with their costs.
// Throws when the catalog lacks FLOPs for a candidate's split.
std::vector<PlanCandidate> plan_candidates(const AccuracyTable& table, const FlopCatalog& flops,
                                           const PlanRequest& request);

// Exhaustive search: feasible row minimizing t_task, ties broken by smaller
// n_c, then earlier split, then model name.
PlanResult plan(const AccuracyTable& table, const FlopCatalog& flops, const PlanRequest& request);

}  // namespace splitwire
