// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The splitwire Authors

#include "commands.hpp"

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <map>
#include <regex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "io.hpp"
#include "splitwire/accounting.hpp"
#include "splitwire/channel.hpp"
#include "splitwire/cost_model.hpp"
#include "splitwire/error.hpp"
#include "splitwire/hash.hpp"
#include "splitwire/pipeline.hpp"
#include "splitwire/planner.hpp"
#include "splitwire/runtime.hpp"
#include "splitwire/weights.hpp"
#include "splitwire/wire.hpp"

#ifndef SPLITWIRE_DATA_DIR
#define SPLITWIRE_DATA_DIR "data"
#endif

namespace splitwire::cli {
namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

[[noreturn]] void usage(const std::string& what) {
  throw Error(ErrorKind::kInvalidArgument, what);
}

// ----- tabular output ------------------------------------------------------

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<json>> rows;

  std::string csv() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
    os << "\n";
    for (const auto& r : rows) {
      for (std::size_t i = 0; i < r.size(); ++i) {
        os << (i ? "," : "") << (r[i].is_string() ? r[i].get<std::string>() : r[i].dump());
      }
      os << "\n";
    }
    return os.str();
  }

  json as_json() const {
    json arr = json::array();
    for (const auto& r : rows) {
      json obj = json::object();
      for (std::size_t i = 0; i < header.size(); ++i) obj[header[i]] = r[i];
      arr.push_back(obj);
    }
    return arr;
  }

  std::string text() const {
    std::vector<std::vector<std::string>> cells;
    std::vector<std::size_t> width(header.size());
    for (std::size_t i = 0; i < header.size(); ++i) width[i] = header[i].size();
    for (const auto& r : rows) {
      std::vector<std::string> line;
      for (std::size_t i = 0; i < r.size(); ++i) {
        std::string s;
        if (r[i].is_string()) {
          s = r[i].get<std::string>();
        } else if (r[i].is_number_float()) {
          std::ostringstream os;
          os << std::setprecision(6) << r[i].get<double>();
          s = os.str();
        } else {
          s = r[i].dump();
        }
        width[i] = std::max(width[i], s.size());
        line.push_back(std::move(s));
      }
      cells.push_back(std::move(line));
    }
    std::ostringstream os;
    for (std::size_t i = 0; i < header.size(); ++i) {
      os << (i ? "  " : "") << std::setw(static_cast<int>(width[i])) << header[i];
    }
    os << "\n";
    for (const auto& line : cells) {
      for (std::size_t i = 0; i < line.size(); ++i) {
        os << (i ? "  " : "") << std::setw(static_cast<int>(width[i])) << line[i];
      }
      os << "\n";
    }
    return os.str();
  }

  void print(OutputFormat f) const {
    if (f == OutputFormat::kCsv) {
      std::cout << csv();
    } else if (f == OutputFormat::kJson) {
      std::cout << as_json().dump(2) << "\n";
    } else {
      std::cout << text();
    }
  }
};

void print_json_or_text(OutputFormat f, const json& doc, const std::string& text) {
  if (f == OutputFormat::kJson) {
    std::cout << doc.dump(2) << "\n";
  } else {
    std::cout << text;
  }
}

// ----- model / channel construction ---------------------------------------

struct ModelName {
  int depth = 34;
  int stages = 2;
};

// "resnet18", "resnet34", optionally suffixed "-1stage" / "-2stage".
std::optional<ModelName> parse_model_name(const std::string& name) {
  static const std::regex re(R"(resnet(18|34)(?:-([12])stage)?)");
  std::smatch m;
  if (!std::regex_match(name, m, re)) return std::nullopt;
  ModelName out;
  out.depth = std::stoi(m[1].str());
  if (m[2].matched) out.stages = std::stoi(m[2].str());
  return out;
}

ModelGraph vanilla_graph(const ModelOptions& o, int depth) {
  const auto variant = parse_variant(o.variant);
  if (!variant) usage("unknown variant '" + o.variant + "' (expected cifar or standard)");
  return build_resnet(depth, *variant, o.classes,
                      o.input_size > 0 ? std::optional<std::int64_t>(o.input_size) : std::nullopt);
}

ModelGraph vanilla_graph(const ModelOptions& o) {
  const auto name = parse_model_name(o.model);
  if (!name) usage("unknown model '" + o.model + "' (expected resnet18 or resnet34)");
  return vanilla_graph(o, name->depth);
}

SplitPoint split_arg(const std::string& text) {
  const auto sp = parse_split_point(text);
  if (!sp) usage("unknown split id '" + text + "' (expected SP-0 .. SP-6)");
  return *sp;
}

void check_nc(std::int64_t n_c) {
  if (n_c < 1 || (n_c & (n_c - 1)) != 0) usage("--n-c must be a power of two");
}

SplitConfig split_config(const ModelOptions& o, int stages) {
  SplitConfig c;
  c.decompress_stages = stages;
  c.hidden_channels = o.hidden;
  c.latent_grid = o.latent_grid;
  return c;
}

SplitModel split_model(const ModelOptions& o) {
  const SplitPoint sp = split_arg(o.split);
  if (sp != SplitPoint::kSP0 && sp != SplitPoint::kSP6) check_nc(o.n_c);
  return apply_split(vanilla_graph(o), sp, o.n_c, split_config(o, o.stages));
}

ChannelProfile channel_profile(const ChannelOptions& o) {
  ChannelProfile c;
  if (o.snr == "inf" || o.snr == "+inf") {
    c.noiseless = true;
    c.snr_db = std::numeric_limits<double>::infinity();
  } else {
    try {
      std::size_t used = 0;
      c.snr_db = std::stod(o.snr, &used);
      if (used != o.snr.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      usage("--snr must be a number of dB or 'inf'");
    }
  }
  const auto dtype = parse_dtype(o.dtype);
  if (!dtype) usage("--dtype must be f32 or u8");
  c.dtype = *dtype;
  c.rate_bps = o.rate;
  c.validate();
  return c;
}

json snr_json(const ChannelProfile& c) { return c.noiseless ? json("inf") : json(c.snr_db); }

json cost_json(const CostReport& r) {
  return {{"t_mt", r.t_m_t},   {"t_mr", r.t_m_r},     {"t_comp", r.t_comp},
          {"t_comm", r.t_comm}, {"t_task", r.t_task}, {"payload_bits", r.payload_bits}};
}

json model_json(const ModelOptions& o) {
  return {{"model", o.model},   {"variant", o.variant}, {"classes", o.classes},
          {"split", o.split},   {"n_c", o.n_c},         {"stages", o.stages},
          {"hidden", o.hidden}, {"latent_grid", o.latent_grid},
          {"input_size", o.input_size}};
}

json channel_json(const ChannelOptions& o) {
  return {{"snr_db", o.snr}, {"dtype", o.dtype}, {"rate_bps", o.rate},
          {"alpha_t", o.alpha_t}, {"alpha_r", o.alpha_r}};
}

WeightStore load_or_random(const RunOptions& o, const SplitModel& m) {
  if (!o.weights.empty()) {
    WeightStore w = read_weights_file(o.weights);
    validate_weights(m.encoder, w);
    validate_weights(m.decoder, w);
    return w;
  }
  return random_weights(m.joined(), o.weights_seed);
}

Tensor input_tensor(const RunOptions& o, const SplitModel& m, std::size_t index = 0) {
  if (!o.input.empty()) return load_input(o.input, m.encoder.input_shape());
  return random_input(m.encoder.input_shape(), o.input_seed + index);
}

fs::path out_dir(const GlobalOptions& g) {
  fs::path dir(g.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::kIo, "cannot create output directory " + dir.string());
  return dir;
}

std::string fmt_m(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << v / 1e6;
  return os.str();
}

std::string fmt_pct(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << v;
  return os.str();
}

FlopCatalog reference_catalog() {
  return read_flop_catalog((fs::path(data_dir()) / "reference_flops.csv").string());
}

// Computed FLOPs for every (split, n_c) row of `table`, building each split
// model from the row's model name.
FlopCatalog computed_catalog(const AccuracyTable& table, const ModelOptions& o) {
  FlopCatalog cat;
  std::map<std::tuple<std::string, int, std::int64_t>, bool> seen;
  for (const auto& r : table.records) {
    if (!seen.emplace(std::make_tuple(r.model, split_index(r.split), r.n_c), true).second) continue;
    const auto name = parse_model_name(r.model);
    if (!name) usage("accuracy table model '" + r.model + "' is not a known architecture");
    const ModelGraph vanilla = vanilla_graph(o, name->depth);
    const SplitModel m = apply_split(vanilla, r.split, r.n_c, split_config(o, name->stages));
    cat.set(r.split, r.n_c, count_flops(m), r.model);
  }
  return cat;
}

AccuracyTable table_or_default(const std::string& path) {
  return read_accuracy_table(path.empty() ? (fs::path(data_dir()) / "reference_tables.csv").string()
                                          : path);
}

}  // namespace

std::string data_dir() {
  if (const char* env = std::getenv("SPLITWIRE_DATA"); env != nullptr && *env != '\0') return env;
  return SPLITWIRE_DATA_DIR;
}

// ----- profile --------------------------------------------------------------

int cmd_profile(const GlobalOptions& g, const ProfileOptions& o) {
  const ModelGraph vanilla = vanilla_graph(o.model);
  const fs::path dir = out_dir(g);
  RunManifest manifest("profile");
  manifest.config() = model_json(o.model);
  manifest.config()["all_splits"] = o.all_splits;

  Table t;
  t.header = {"split", "n_c", "f_m_t", "prop_t", "params_t", "params_prop_t",
              "f_m_r", "prop_r", "params_r", "params_prop_r", "f_m"};
  Table pretty;
  pretty.header = {"split", "FLOPs_t(M)", "prop_t(%)", "params_t(M)", "prop_t(%)",
                   "FLOPs_r(M)", "prop_r(%)", "params_r(M)", "prop_r(%)"};

  const auto add_row = [&](const std::string& label, std::int64_t n_c, const FlopReport& f,
                           const ParamReport& p) {
    t.rows.push_back({label, n_c, f.f_m_t, f.proportion_t(), p.params_t, p.proportion_t(),
                      f.f_m_r, f.proportion_r(), p.params_r, p.proportion_r(), f.f_m});
    pretty.rows.push_back({label, fmt_m(f.f_m_t), fmt_pct(f.proportion_t()), fmt_m(p.params_t),
                           fmt_pct(p.proportion_t()), fmt_m(f.f_m_r), fmt_pct(f.proportion_r()),
                           fmt_m(p.params_r), fmt_pct(p.proportion_r())});
  };

  std::vector<SplitPoint> splits;
  if (o.all_splits) {
    splits = {SplitPoint::kSP1, SplitPoint::kSP2, SplitPoint::kSP3, SplitPoint::kSP4,
              SplitPoint::kSP5};
  } else if (o.split_given) {
    splits = {split_arg(o.model.split)};
  }
  if (splits.empty()) {
    const FlopReport f = count_flops(vanilla);
    const ParamReport p = count_params(vanilla);
    add_row("none", 0, f, p);
    if (o.describe) manifest.write_output(dir, "graph.json", describe_json(vanilla) + "\n");
  } else {
    for (SplitPoint sp : splits) {
      if (sp != SplitPoint::kSP0 && sp != SplitPoint::kSP6) check_nc(o.model.n_c);
      const SplitModel m =
          apply_split(vanilla, sp, o.model.n_c, split_config(o.model, o.model.stages));
      add_row(to_string(sp), m.n_c, count_flops(m), count_params(m));
      if (o.describe) {
        manifest.write_output(dir, "graph_" + to_string(sp) + ".json", describe_json(m) + "\n");
      }
    }
  }
  manifest.write_output(dir, "profile.csv", t.csv());
  manifest.save(dir);
  if (g.format == OutputFormat::kText) {
    pretty.print(g.format);
  } else {
    t.print(g.format);
  }
  return kExitOk;
}

// ----- sweep ----------------------------------------------------------------

namespace {

int sweep_beta(const GlobalOptions& g, const SweepOptions& o) {
  std::vector<double> grid = o.betas;
  if (grid.empty()) {
    if (o.points < 1) usage("beta grid is empty");
    grid = log_grid(o.beta_min_exp, o.beta_max_exp, o.points);
  }
  for (double b : grid) {
    if (!(b > 0.0)) usage("beta values must be positive");
  }
  std::vector<std::string> splits = o.splits;
  if (splits.empty()) splits = {"SP-2", "SP-3", "SP-4"};

  FlopCatalog reference;
  if (o.flops_source == "reference") {
    reference = reference_catalog();
  } else if (o.flops_source != "computed") {
    usage("--flops-source must be computed or reference");
  }
  const ModelGraph vanilla =
      o.flops_source == "computed" ? vanilla_graph(o.model) : ModelGraph{};

  Table t;
  t.header = {"beta", "split", "normalized_tcomp"};
  for (const auto& s : splits) {
    const SplitPoint sp = split_arg(s);
    FlopEntry e;
    if (o.flops_source == "reference") {
      const auto found = reference.find(sp, 0);
      if (!found) usage("no published FLOPs for " + s);
      e = *found;
    } else {
      const FlopReport f = count_flops(
          apply_split(vanilla, sp, o.model.n_c, split_config(o.model, o.model.stages)));
      e = {static_cast<double>(f.f_m_t), static_cast<double>(f.f_m_r),
           static_cast<double>(f.f_m)};
    }
    for (const auto& pt : beta_sweep(e.f_m_t, e.f_m_r, e.f_m, grid)) {
      t.rows.push_back({pt.beta, s, pt.normalized_tcomp});
    }
  }
  const fs::path dir = out_dir(g);
  RunManifest manifest("sweep");
  manifest.config() = model_json(o.model);
  manifest.config()["kind"] = "beta";
  manifest.config()["flops_source"] = o.flops_source;
  manifest.config()["splits"] = splits;
  manifest.config()["betas"] = grid;
  manifest.write_output(dir, "sweep_beta.csv", t.csv());
  manifest.save(dir);
  t.print(g.format);
  return kExitOk;
}

// Trained containers named <model>_<SP-k>_nc<N>_snr<S>.swwt evaluated on a
// CIFAR-100 binary test file.
AccuracyTable evaluate_weights_dir(const SweepOptions& o, std::uint64_t seed) {
  static const std::regex re(R"((resnet(?:18|34)(?:-[12]stage)?)_(SP-[0-6])_nc(\d+)_snr(-?[0-9.]+)\.swwt)");
  const auto data = read_cifar100_bin(o.dataset, o.limit);
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(o.weights_dir)) files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  std::ostringstream csv;
  csv << "model,split,n_c,snr_db,top1,provenance\n";
  std::size_t rows = 0;
  for (const auto& path : files) {
    std::smatch m;
    const std::string fname = path.filename().string();
    if (!std::regex_match(fname, m, re)) continue;
    const auto name = parse_model_name(m[1].str());
    const SplitPoint sp = split_arg(m[2].str());
    const std::int64_t n_c = std::stoll(m[3].str());
    const double snr = std::stod(m[4].str());
    const SplitModel model =
        apply_split(vanilla_graph(o.model, name->depth), sp, n_c, split_config(o.model, name->stages));
    const WeightStore w = read_weights_file(path);
    validate_weights(model.encoder, w);
    validate_weights(model.decoder, w);
    ChannelProfile ch;
    ch.snr_db = snr;
    std::size_t correct = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
      const auto r = simulate(model, w, data[i].image, ch, seed == 0 ? i + 1 : seed + i);
      if (r.rx.label == data[i].label) ++correct;
    }
    csv << m[1].str() << "," << m[2].str() << "," << n_c << "," << snr << ","
        << static_cast<double>(correct) / static_cast<double>(data.size()) << ",evaluated:"
        << fname << "\n";
    ++rows;
  }
  if (rows == 0) {
    throw Error(ErrorKind::kIo, "no <model>_<SP-k>_nc<N>_snr<S>.swwt files in " + o.weights_dir);
  }
  return load_accuracy_table(csv.str(), o.weights_dir);
}

int sweep_nc(const GlobalOptions& g, const SweepOptions& o) {
  AccuracyTable table;
  const fs::path dir = out_dir(g);
  RunManifest manifest("sweep");
  if (!o.table.empty()) {
    table = read_accuracy_table(o.table);
  } else if (!o.weights_dir.empty() && !o.dataset.empty()) {
    table = evaluate_weights_dir(o, g.seed);
    manifest.write_output(dir, "accuracy.csv", write_accuracy_table(table));
  } else {
    usage(
        "nc sweep needs an accuracy source: either --table <accuracy.csv> or --weights-dir <dir> "
        "with --dataset <cifar-100 test.bin>");
  }
  std::vector<std::string> splits = o.splits;
  if (splits.empty()) splits = {"SP-2", "SP-3", "SP-4"};
  std::vector<double> snrs = o.snrs;
  if (snrs.empty()) snrs = {0.0, 3.0, 5.0};

  Table t;
  t.header = {"snr_db", "split", "floor", "min_nc"};
  const std::optional<std::string> model =
      o.table_model.empty() ? std::nullopt : std::optional<std::string>(o.table_model);
  for (double snr : snrs) {
    for (const auto& s : splits) {
      const auto n = min_nc(table, split_arg(s), snr, o.floor, model);
      t.rows.push_back({snr, s, o.floor, n ? json(*n) : json("infeasible")});
    }
  }
  manifest.config() = {{"kind", "nc"},          {"table", table.source},
                       {"table_hash", to_hex(table.content_hash)},
                       {"floor", o.floor},      {"snrs", snrs},
                       {"splits", splits},      {"model", o.table_model},
                       {"seed", g.seed}};
  manifest.write_output(dir, "sweep_nc.csv", t.csv());
  manifest.save(dir);
  t.print(g.format);
  return kExitOk;
}

}  // namespace

int cmd_sweep(const GlobalOptions& g, const SweepOptions& o) {
  if (o.kind == "beta") return sweep_beta(g, o);
  if (o.kind == "nc") return sweep_nc(g, o);
  usage("--kind must be beta or nc");
}

// ----- simulate -------------------------------------------------------------

int cmd_simulate(const GlobalOptions& g, const RunOptions& o) {
  const SplitModel m = split_model(o.model);
  const ChannelProfile ch = channel_profile(o.channel);
  const WeightStore w = load_or_random(o, m);
  const Tensor input = input_tensor(o, m);
  const SimulationResult r = simulate(m, w, input, ch, g.seed);

  const FlopReport flops = count_flops(m);
  const CostReport cost =
      total_task_time(flops, {o.channel.alpha_t}, {o.channel.alpha_r},
                      payload_bits(m.n_c, ch.dtype, m.split), ch);
  json result{{"split", to_string(m.split)},
              {"n_c", m.n_c},
              {"snr_db", snr_json(ch)},
              {"sigma", sigma_for(ch)},
              {"dtype", std::string(to_string(ch.dtype))},
              {"seed", r.rx.seed_used},
              {"label", r.rx.label},
              {"input_digest", to_hex(digest(input.data()))},
              {"z_digest", to_hex(digest(r.tx.z))},
              {"zhat_digest", to_hex(digest(r.rx.z_hat))},
              {"logits_digest", to_hex(digest(r.rx.logits))},
              {"weights_fingerprint", to_hex(w.fingerprint())},
              {"payload_bytes", r.tx.payload.size()},
              {"predicted", cost_json(cost)}};

  const fs::path dir = out_dir(g);
  RunManifest manifest("simulate");
  manifest.config() = model_json(o.model);
  manifest.config()["channel"] = channel_json(o.channel);
  manifest.config()["seed"] = g.seed;
  manifest.config()["seed_used"] = r.rx.seed_used;
  manifest.config()["weights"] = o.weights.empty() ? json(nullptr) : json(o.weights);
  manifest.config()["weights_seed"] = o.weights_seed;
  manifest.config()["input"] = o.input.empty() ? json(nullptr) : json(o.input);
  manifest.config()["input_seed"] = o.input_seed;
  manifest.write_output(dir, "simulate.json", result.dump(2) + "\n");
  const auto zb = std::as_bytes(std::span(r.rx.z_hat));
  manifest.write_output(dir, "zhat.f32", std::string(reinterpret_cast<const char*>(zb.data()), zb.size()));
  manifest.save(dir);

  std::ostringstream text;
  text << "split " << to_string(m.split) << "  n_c " << m.n_c << "  snr "
       << (ch.noiseless ? std::string("inf") : std::to_string(ch.snr_db)) << " dB  seed "
       << r.rx.seed_used << "\n"
       << "label " << r.rx.label << "\n"
       << "measured  t_mt " << r.tx.t_m_t << " s  t_mr " << r.rx.t_m_r << " s\n"
       << "predicted t_mt " << cost.t_m_t << " s  t_mr " << cost.t_m_r << " s  t_comm "
       << cost.t_comm << " s  t_task " << cost.t_task << " s\n";
  if (g.format == OutputFormat::kCsv) {
    std::cout << "split,n_c,snr_db,t_mt,t_mr,t_comm,t_task,label\n"
              << to_string(m.split) << "," << m.n_c << "," << snr_json(ch).dump() << ","
              << cost.t_m_t << "," << cost.t_m_r << "," << cost.t_comm << "," << cost.t_task
              << "," << r.rx.label << "\n";
  } else {
    print_json_or_text(g.format, result, text.str());
  }
  return kExitOk;
}

// ----- plan -----------------------------------------------------------------

int cmd_plan(const GlobalOptions& g, const PlanOptions& o) {
  const AccuracyTable table = table_or_default(o.table);
  PlanRequest req;
  req.dev_t.alpha = o.channel.alpha_t;
  req.dev_r.alpha = o.channel.alpha_r;
  req.channel = channel_profile(o.channel);
  if (req.channel.noiseless) usage("plan needs a finite --snr to match table rows");
  req.floor = o.floor;
  if (!o.table_model.empty()) req.model = o.table_model;

  FlopCatalog catalog;
  if (o.flops_source == "reference") {
    catalog = reference_catalog();
  } else if (o.flops_source == "computed") {
    catalog = computed_catalog(table, o.model);
  } else {
    usage("--flops-source must be computed or reference");
  }
  const PlanResult res = plan(table, catalog, req);

  json doc{{"feasible", res.feasible},
           {"floor", o.floor},
           {"snr_db", req.channel.snr_db},
           {"candidates", res.candidates},
           {"table", table.source},
           {"table_hash", to_hex(table.content_hash)}};
  std::ostringstream text;
  if (res.feasible) {
    doc["model"] = res.model;
    doc["split"] = to_string(res.split);
    doc["n_c"] = res.n_c;
    doc["matched_snr_db"] = res.snr_db;
    doc["top1"] = res.top1;
    doc["cost"] = cost_json(res.cost);
    text << "plan: " << res.model << " " << to_string(res.split) << " n_c " << res.n_c
         << " (top1 " << res.top1 << " at " << res.snr_db << " dB)\n"
         << "  t_mt " << res.cost.t_m_t << " s  t_mr " << res.cost.t_m_r << " s  t_comm "
         << res.cost.t_comm << " s  t_task " << res.cost.t_task << " s\n";
  } else {
    doc["diagnostics"] = res.diagnostics;
    if (res.nearest_miss) {
      doc["nearest_miss"] = {{"model", res.nearest_miss->model},
                             {"split", to_string(res.nearest_miss->split)},
                             {"n_c", res.nearest_miss->n_c},
                             {"snr_db", res.nearest_miss->snr_db},
                             {"top1", res.nearest_miss->top1}};
    }
    text << "infeasible: " << res.diagnostics << "\n";
  }

  const fs::path dir = out_dir(g);
  RunManifest manifest("plan");
  manifest.config() = {{"channel", channel_json(o.channel)}, {"floor", o.floor},
                       {"flops_source", o.flops_source},     {"model", o.table_model},
                       {"variant", o.model.variant},         {"classes", o.model.classes}};
  manifest.write_output(dir, "plan.json", doc.dump(2) + "\n");
  manifest.save(dir);
  if (g.format == OutputFormat::kCsv) {
    std::cout << "feasible,model,split,n_c,snr_db,top1,t_mt,t_mr,t_comm,t_task\n";
    if (res.feasible) {
      std::cout << "true," << res.model << "," << to_string(res.split) << "," << res.n_c << ","
                << res.snr_db << "," << res.top1 << "," << res.cost.t_m_t << ","
                << res.cost.t_m_r << "," << res.cost.t_comm << "," << res.cost.t_task << "\n";
    } else {
      std::cout << "false,,,,,,,,,\n";
    }
  } else {
    print_json_or_text(g.format, doc, text.str());
  }
  return res.feasible ? kExitOk : kExitInfeasible;
}

// ----- serve / send ---------------------------------------------------------

namespace {

std::atomic<wire::Server*> g_server{nullptr};

extern "C" void on_signal(int) {
  if (wire::Server* s = g_server.load()) s->request_stop();
}

}  // namespace

int cmd_serve(const GlobalOptions& g, const ServeOptions& o) {
  const SplitModel m = split_model(o.run.model);
  WeightStore w = load_or_random(o.run, m);
  wire::SessionConfig cfg;
  cfg.host = o.host;
  cfg.port = o.port;
  cfg.timeout_s = o.timeout;
  cfg.channel = channel_profile(o.run.channel);

  wire::Server server(m, std::move(w), cfg);
  std::atomic<std::size_t> count{0};
  if (o.max_requests > 0) {
    server.on_features = [&](const wire::ServedRequest&) {
      if (++count >= o.max_requests) server.request_stop();
    };
  }
  const std::uint16_t port = server.start();
  if (!o.port_file.empty()) write_file(o.port_file, std::to_string(port) + "\n");
  std::cerr << "serving " << to_string(m.split) << " n_c " << m.n_c << " on " << o.host << ":"
            << port << " fingerprint " << to_hex(server.fingerprint()) << "\n";
  (void)g;
  g_server = &server;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  server.wait();
  g_server = nullptr;
  server.stop();
  std::cerr << "served " << server.served() << " request(s), rejected " << server.rejected()
            << "\n";
  return kExitOk;
}

int cmd_send(const GlobalOptions& g, const SendOptions& o) {
  if (o.count < 1) usage("--count must be at least 1");
  const SplitModel m = split_model(o.run.model);
  const WeightStore w = load_or_random(o.run, m);
  wire::SessionConfig cfg;
  cfg.host = o.host;
  cfg.port = o.port;
  cfg.timeout_s = o.timeout;
  cfg.channel = channel_profile(o.run.channel);

  wire::Client client(m, w, cfg);
  client.set_devices({o.run.channel.alpha_t}, {o.run.channel.alpha_r});
  json requests = json::array();
  json timings = json::array();
  Table t;
  t.header = {"index", "label", "seed", "zhat_digest", "payload_bytes", "t_mt", "transfer",
              "t_mr"};
  for (std::size_t i = 0; i < o.count; ++i) {
    const Tensor input = input_tensor(o.run, m, i);
    const std::uint64_t seed = g.seed == 0 ? 0 : g.seed + i;
    const wire::SendResult r = client.send(input, seed);
    requests.push_back({{"index", i},
                        {"input_digest", to_hex(digest(input.data()))},
                        {"label", r.label},
                        {"seed_used", r.seed_used},
                        {"zhat_digest", to_hex(r.zhat_digest)},
                        {"payload_bytes", r.timing.payload_bytes},
                        {"frame_bytes", r.timing.frame_bytes}});
    timings.push_back({{"index", i},
                       {"t_mt", r.timing.t_m_t},
                       {"transfer", r.timing.transfer},
                       {"t_mr", r.timing.t_m_r},
                       {"round_trip", r.timing.round_trip},
                       {"predicted", cost_json(r.timing.predicted)}});
    t.rows.push_back({static_cast<std::int64_t>(i), r.label, r.seed_used, to_hex(r.zhat_digest),
                      r.timing.payload_bytes, r.timing.t_m_t, r.timing.transfer, r.timing.t_m_r});
  }
  const fs::path dir = out_dir(g);
  RunManifest manifest("send");
  manifest.config() = model_json(o.run.model);
  manifest.config()["channel"] = channel_json(o.run.channel);
  manifest.config()["seed"] = g.seed;
  manifest.config()["count"] = o.count;
  manifest.config()["weights_seed"] = o.run.weights_seed;
  manifest.config()["input_seed"] = o.run.input_seed;
  const json transcript{{"split", to_string(m.split)},
                        {"n_c", m.n_c},
                        {"fingerprint", to_hex(wire::model_fingerprint(m, w))},
                        {"requests", requests}};
  manifest.write_output(dir, "transcript.json", transcript.dump(2) + "\n");
  write_file(dir / "timing.json", json{{"requests", timings}}.dump(2) + "\n");
  manifest.add_volatile_output(dir / "timing.json");
  manifest.save(dir);
  t.print(g.format);
  return kExitOk;
}

}  // namespace splitwire::cli
