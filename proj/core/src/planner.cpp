// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The splitwire Authors

#include "splitwire/planner.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>
#include <tuple>

#include "splitwire/error.hpp"
#include "splitwire/hash.hpp"

namespace splitwire {
namespace {

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? comma : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  for (auto& f : out) {
    while (!f.empty() && (f.front() == ' ' || f.front() == '\t')) f.remove_prefix(1);
    while (!f.empty() && (f.back() == ' ' || f.back() == '\t' || f.back() == '\r')) {
      f.remove_suffix(1);
    }
  }
  return out;
}

[[noreturn]] void row_error(std::size_t line, const std::string& what) {
  throw Error(ErrorKind::kFormat, "accuracy table line " + std::to_string(line) + ": " + what);
}

double parse_double(std::string_view s, std::size_t line, const char* field) {
  // std::from_chars for double is available in libstdc++ 11.
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    row_error(line, std::string("bad ") + field + " '" + std::string(s) + "'");
  }
  return v;
}

std::string key_string(const AccuracyRecord& r) {
  std::ostringstream os;
  os << r.model << "," << to_string(r.split) << "," << r.n_c << "," << r.snr_db;
  return os.str();
}

bool model_ok(const AccuracyRecord& r, const std::optional<std::string>& model) {
  return !model || r.model == *model;
}

}  // namespace

AccuracyTable load_accuracy_table(std::string_view csv, std::string source) {
  AccuracyTable table;
  table.source = std::move(source);
  table.content_hash = fnv1a64(std::as_bytes(std::span(csv.data(), csv.size())));

  std::size_t line_no = 0;
  std::size_t pos = 0;
  bool header_seen = false;
  bool has_provenance = false;
  std::set<std::tuple<std::string, int, std::int64_t, double>> keys;
  while (pos < csv.size()) {
    const std::size_t nl = csv.find('\n', pos);
    std::string_view line = csv.substr(pos, nl == std::string_view::npos ? nl : nl - pos);
    pos = nl == std::string_view::npos ? csv.size() : nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;

    const auto fields = split_csv(line);
    if (!header_seen) {
      const std::vector<std::string_view> expected{"model", "split", "n_c", "snr_db", "top1"};
      if (fields.size() < expected.size() ||
          !std::equal(expected.begin(), expected.end(), fields.begin())) {
        row_error(line_no, "header must be model,split,n_c,snr_db,top1[,provenance]");
      }
      has_provenance = fields.size() == 6 && fields[5] == "provenance";
      if (fields.size() > 5 && !has_provenance) row_error(line_no, "unexpected header columns");
      header_seen = true;
      continue;
    }
    const std::size_t want = has_provenance ? 6 : 5;
    if (fields.size() != want) {
      row_error(line_no, "expected " + std::to_string(want) + " fields, got " +
                             std::to_string(fields.size()));
    }
    AccuracyRecord r;
    r.model = std::string(fields[0]);
    if (r.model.empty()) row_error(line_no, "empty model");
    const auto sp = parse_split_point(fields[1]);
    if (!sp) row_error(line_no, "unknown split '" + std::string(fields[1]) + "'");
    r.split = *sp;
    {
      const auto f = fields[2];
      const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), r.n_c);
      if (ec != std::errc() || ptr != f.data() + f.size() || r.n_c < 1) {
        row_error(line_no, "bad n_c '" + std::string(f) + "'");
      }
    }
    r.snr_db = parse_double(fields[3], line_no, "snr_db");
    r.top1 = parse_double(fields[4], line_no, "top1");
    if (r.top1 < 0.0 || r.top1 > 1.0) row_error(line_no, "top1 outside [0, 1]");
    if (has_provenance) r.provenance = std::string(fields[5]);
    if (!keys.emplace(r.model, split_index(r.split), r.n_c, r.snr_db).second) {
      row_error(line_no, "duplicate key " + key_string(r));
    }
    table.records.push_back(std::move(r));
  }
  if (table.records.empty()) {
    throw Error(ErrorKind::kFormat, "accuracy table " + table.source + ": no records");
  }
  return table;
}

AccuracyTable read_accuracy_table(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open accuracy table " + path);
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return load_accuracy_table(text, path);
}

std::string write_accuracy_table(const AccuracyTable& table) {
  const bool prov = std::any_of(table.records.begin(), table.records.end(),
                                [](const AccuracyRecord& r) { return !r.provenance.empty(); });
  std::ostringstream os;
  os.precision(17);
  os << "model,split,n_c,snr_db,top1" << (prov ? ",provenance" : "") << "\n";
  for (const auto& r : table.records) {
    os << r.model << "," << to_string(r.split) << "," << r.n_c << "," << r.snr_db << ","
       << r.top1;
    if (prov) os << "," << r.provenance;
    os << "\n";
  }
  return os.str();
}

std::optional<double> match_snr(const AccuracyTable& table, SplitPoint split, double snr_db,
                                const std::optional<std::string>& model) {
  std::optional<double> best;
  for (const auto& r : table.records) {
    if (r.split != split || !model_ok(r, model)) continue;
    if (r.snr_db == snr_db) return snr_db;
    if (r.snr_db < snr_db && (!best || r.snr_db > *best)) best = r.snr_db;
  }
  return best;
}

std::optional<std::int64_t> min_nc(const AccuracyTable& table, SplitPoint split, double snr_db,
                                   double floor, const std::optional<std::string>& model) {
  const auto snr = match_snr(table, split, snr_db, model);
  if (!snr) return std::nullopt;
  std::optional<std::int64_t> best;
  for (const auto& r : table.records) {
    if (r.split != split || r.snr_db != *snr || !model_ok(r, model)) continue;
    if (r.top1 >= floor && (!best || r.n_c < *best)) best = r.n_c;
  }
  return best;
}

void FlopCatalog::set(SplitPoint split, std::int64_t n_c, FlopEntry entry,
                      std::string_view model) {
  entries_[{std::string(model), split_index(split), n_c}] = entry;
}

void FlopCatalog::set(SplitPoint split, std::int64_t n_c, const FlopReport& report,
                      std::string_view model) {
  set(split, n_c,
      FlopEntry{static_cast<double>(report.f_m_t), static_cast<double>(report.f_m_r),
                static_cast<double>(report.f_m)},
      model);
}

std::optional<FlopEntry> FlopCatalog::find(SplitPoint split, std::int64_t n_c,
                                           std::string_view model) const {
  const std::string m(model);
  const int sp = split_index(split);
  for (const auto& key : {std::make_tuple(m, sp, n_c), std::make_tuple(m, sp, std::int64_t{0}),
                          std::make_tuple(std::string(), sp, n_c),
                          std::make_tuple(std::string(), sp, std::int64_t{0})}) {
    if (auto it = entries_.find(key); it != entries_.end()) return it->second;
  }
  return std::nullopt;
}

FlopCatalog load_flop_catalog(std::string_view csv, double unit) {
  FlopCatalog catalog;
  std::vector<std::string> header;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  const auto column = [&](std::string_view name) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    return std::nullopt;
  };
  std::optional<std::size_t> c_split, c_t, c_r, c_m, c_nc;
  while (pos < csv.size()) {
    const std::size_t nl = csv.find('\n', pos);
    std::string_view line = csv.substr(pos, nl == std::string_view::npos ? nl : nl - pos);
    pos = nl == std::string_view::npos ? csv.size() : nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;
    const auto fields = split_csv(line);
    if (header.empty()) {
      header.assign(fields.begin(), fields.end());
      c_split = column("split");
      c_t = column("f_m_t");
      c_r = column("f_m_r");
      c_m = column("f_m");
      c_nc = column("n_c");
      if (!c_split || !c_t || !c_r || !c_m) {
        throw Error(ErrorKind::kFormat, "FLOP table needs split, f_m_t, f_m_r and f_m columns");
      }
      continue;
    }
    if (fields.size() != header.size()) {
      throw Error(ErrorKind::kFormat, "FLOP table line " + std::to_string(line_no) +
                                          ": wrong number of fields");
    }
    const auto sp = parse_split_point(fields[*c_split]);
    if (!sp) {
      throw Error(ErrorKind::kFormat, "FLOP table line " + std::to_string(line_no) +
                                          ": unknown split");
    }
    std::int64_t n_c = 0;
    if (c_nc) n_c = static_cast<std::int64_t>(parse_double(fields[*c_nc], line_no, "n_c"));
    catalog.set(*sp, n_c,
                FlopEntry{parse_double(fields[*c_t], line_no, "f_m_t") * unit,
                          parse_double(fields[*c_r], line_no, "f_m_r") * unit,
                          parse_double(fields[*c_m], line_no, "f_m") * unit});
  }
  if (catalog.empty()) throw Error(ErrorKind::kFormat, "FLOP table has no rows");
  return catalog;
}

FlopCatalog read_flop_catalog(const std::string& path, double unit) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open FLOP table " + path);
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return load_flop_catalog(text, unit);
}

std::vector<PlanCandidate> plan_candidates(const AccuracyTable& table, const FlopCatalog& flops,
                                           const PlanRequest& req) {
  // Matched SNR per (model, split) cell.
  std::map<std::pair<std::string, int>, std::optional<double>> matched;
  std::vector<PlanCandidate> out;
  for (const auto& r : table.records) {
    if (!model_ok(r, req.model)) continue;
    const auto key = std::make_pair(r.model, split_index(r.split));
    auto it = matched.find(key);
    if (it == matched.end()) {
      it = matched.emplace(key, match_snr(table, r.split, req.channel.snr_db, r.model)).first;
    }
    if (!it->second || r.snr_db != *it->second) continue;
    const auto f = flops.find(r.split, r.n_c, r.model);
    if (!f) {
      throw Error(ErrorKind::kInvalidArgument,
                  "no FLOP report for " + r.model + " " + to_string(r.split) + " (n_c " + std::to_string(r.n_c) +
                      ")");
    }
    const std::int64_t bits = payload_bits(r.n_c, req.channel.dtype, r.split);
    out.push_back({r, total_task_time(f->f_m_t, f->f_m_r, req.dev_t, req.dev_r, bits, req.channel)});
  }
  return out;
}

PlanResult plan(const AccuracyTable& table, const FlopCatalog& flops, const PlanRequest& req) {
  const auto candidates = plan_candidates(table, flops, req);
  PlanResult res;
  res.candidates = candidates.size();
  const PlanCandidate* best = nullptr;
  const PlanCandidate* miss = nullptr;
  const auto better = [](const PlanCandidate& a, const PlanCandidate& b) {
    return std::make_tuple(a.cost.t_task, a.record.n_c, split_index(a.record.split), a.record.model) <
           std::make_tuple(b.cost.t_task, b.record.n_c, split_index(b.record.split), b.record.model);
  };
  for (const auto& c : candidates) {
    if (c.record.top1 >= req.floor) {
      if (best == nullptr || better(c, *best)) best = &c;
    } else if (miss == nullptr || c.record.top1 > miss->record.top1 ||
               (c.record.top1 == miss->record.top1 && better(c, *miss))) {
      miss = &c;
    }
  }
  if (best != nullptr) {
    res.feasible = true;
    res.model = best->record.model;
    res.split = best->record.split;
    res.n_c = best->record.n_c;
    res.snr_db = best->record.snr_db;
    res.top1 = best->record.top1;
    res.cost = best->cost;
    return res;
  }
  std::ostringstream os;
  if (candidates.empty()) {
    os << "no accuracy rows at or below " << req.channel.snr_db << " dB";
    if (req.model) os << " for model " << *req.model;
  } else {
    res.nearest_miss = miss->record;
    os << "no row reaches top1 >= " << req.floor << "; closest is " << key_string(miss->record)
       << " with top1 " << miss->record.top1 << " (short by " << req.floor - miss->record.top1
       << ")";
  }
  res.diagnostics = os.str();
  return res;
}

}  // namespace splitwire
