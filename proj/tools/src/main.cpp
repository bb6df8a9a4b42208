// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The splitwire Authors

#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "splitwire/error.hpp"

namespace {

using namespace splitwire::cli;

void add_model_options(CLI::App* cmd, ModelOptions& m, bool with_split) {
  cmd->add_option("--model", m.model, "resnet18 or resnet34")->capture_default_str();
  cmd->add_option("--variant", m.variant, "cifar or standard")->capture_default_str();
  cmd->add_option("--classes", m.classes, "number of classes")->capture_default_str();
  cmd->add_option("--input-size", m.input_size, "input side in pixels (0: variant default)");
  if (with_split) {
    cmd->add_option("--split", m.split, "split point SP-0 .. SP-6")->capture_default_str();
  }
  cmd->add_option("--n-c", m.n_c, "feature dimension (power of two)")->capture_default_str();
  cmd->add_option("--stages", m.stages, "decompression stages (1 or 2)")
      ->check(CLI::IsMember({1, 2}))
      ->capture_default_str();
  cmd->add_option("--hidden", m.hidden, "decompression hidden width (0: per-split default)");
  cmd->add_option("--latent-grid", m.latent_grid, "target latent grid side")->capture_default_str();
}

void add_channel_options(CLI::App* cmd, ChannelOptions& c) {
  cmd->add_option("--snr", c.snr, "channel SNR in dB, or inf for no noise")->capture_default_str();
  cmd->add_option("--dtype", c.dtype, "payload dtype f32 or u8")
      ->check(CLI::IsMember({"f32", "u8"}))
      ->capture_default_str();
  cmd->add_option("--rate", c.rate, "channel rate R in bits/s")->capture_default_str();
  cmd->add_option("--alpha-t", c.alpha_t, "transmitter seconds per FLOP")->capture_default_str();
  cmd->add_option("--alpha-r", c.alpha_r, "receiver seconds per FLOP")->capture_default_str();
}

void add_run_options(CLI::App* cmd, RunOptions& r) {
  add_model_options(cmd, r.model, true);
  add_channel_options(cmd, r.channel);
  cmd->add_option("--weights", r.weights, "weight container (.swwt); random weights if omitted");
  cmd->add_option("--weights-seed", r.weights_seed, "seed for random weights")
      ->capture_default_str();
  cmd->add_option("--input", r.input, "PNG or raw f32 CHW input; seeded random if omitted");
  cmd->add_option("--input-seed", r.input_seed, "seed for random inputs")->capture_default_str();
}

int exit_code_for(const splitwire::Error& e) {
  using splitwire::ErrorKind;
  switch (e.kind()) {
    case ErrorKind::kInvalidArgument:
    case ErrorKind::kShape:
      return kExitUsage;
    case ErrorKind::kIo:
    case ErrorKind::kFormat:
      return kExitIo;
    case ErrorKind::kProtocol:
    case ErrorKind::kTimeout:
      return kExitProtocol;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Split inference over a simulated AWGN channel"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  std::string format = "text";
  app.add_option("--seed", g.seed, "noise seed (0: fresh entropy per run)")->capture_default_str();
  app.add_option("--output-dir", g.output_dir, "directory for output files")->capture_default_str();
  app.add_option("--format", format, "stdout format")
      ->check(CLI::IsMember({"text", "csv", "json"}))
      ->capture_default_str();

  ProfileOptions profile;
  auto* c_profile = app.add_subcommand("profile", "per-side FLOPs and parameters");
  add_model_options(c_profile, profile.model, false);
  auto* split_opt = c_profile->add_option("--split", profile.model.split, "one split point");
  c_profile->add_flag("--all-splits", profile.all_splits, "rows for SP-1 .. SP-5");
  c_profile->add_flag("--describe", profile.describe, "write per-layer graph JSON");

  SweepOptions sweep;
  auto* c_sweep = app.add_subcommand("sweep", "beta or n_c sweeps as CSV");
  add_model_options(c_sweep, sweep.model, false);
  c_sweep->add_option("--kind", sweep.kind, "beta or nc")
      ->required()
      ->check(CLI::IsMember({"beta", "nc"}));
  c_sweep->add_option("--splits", sweep.splits, "split points")->delimiter(',');
  c_sweep->add_option("--flops-source", sweep.flops_source, "computed or reference")
      ->check(CLI::IsMember({"computed", "reference"}))
      ->capture_default_str();
  c_sweep->add_option("--betas", sweep.betas, "explicit beta values")->delimiter(',');
  c_sweep->add_option("--beta-min", sweep.beta_min_exp, "log10 of the smallest beta")
      ->capture_default_str();
  c_sweep->add_option("--beta-max", sweep.beta_max_exp, "log10 of the largest beta")
      ->capture_default_str();
  c_sweep->add_option("--points", sweep.points, "number of log-spaced betas")
      ->capture_default_str();
  c_sweep->add_option("--table", sweep.table, "accuracy CSV");
  c_sweep->add_option("--weights-dir", sweep.weights_dir, "trained weight containers");
  c_sweep->add_option("--dataset", sweep.dataset, "CIFAR-100 binary test file");
  c_sweep->add_option("--limit", sweep.limit, "images to evaluate (0: all)");
  c_sweep->add_option("--snr", sweep.snrs, "SNR values in dB")->delimiter(',');
  c_sweep->add_option("--floor", sweep.floor, "top-1 floor")->capture_default_str();
  c_sweep->add_option("--table-model", sweep.table_model, "model rows to use ('' for all)")
      ->capture_default_str();

  RunOptions simulate;
  auto* c_simulate = app.add_subcommand("simulate", "local encoder, channel and decoder run");
  add_run_options(c_simulate, simulate);

  PlanOptions plan;
  auto* c_plan = app.add_subcommand("plan", "choose split point and n_c");
  c_plan->add_option("--variant", plan.model.variant, "cifar or standard")->capture_default_str();
  c_plan->add_option("--classes", plan.model.classes, "number of classes")->capture_default_str();
  add_channel_options(c_plan, plan.channel);
  c_plan->add_option("--table", plan.table, "accuracy CSV (default: bundled)");
  c_plan->add_option("--flops-source", plan.flops_source, "computed or reference")
      ->check(CLI::IsMember({"computed", "reference"}))
      ->capture_default_str();
  c_plan->add_option("--floor", plan.floor, "top-1 floor")->capture_default_str();
  c_plan->add_option("--table-model", plan.table_model, "restrict to one model's rows");

  ServeOptions serve;
  auto* c_serve = app.add_subcommand("serve", "cloud runner: decoder behind a TCP port");
  add_run_options(c_serve, serve.run);
  c_serve->add_option("--host", serve.host, "bind address")->capture_default_str();
  c_serve->add_option("--port", serve.port, "port (0: any)")->capture_default_str();
  c_serve->add_option("--timeout", serve.timeout, "per-read timeout in seconds")
      ->capture_default_str();
  c_serve->add_option("--max-requests", serve.max_requests, "exit after this many requests");
  c_serve->add_option("--port-file", serve.port_file, "write the bound port here");

  SendOptions send;
  auto* c_send = app.add_subcommand("send", "edge runner: encoder and transmission");
  add_run_options(c_send, send.run);
  c_send->add_option("--host", send.host, "server address")->capture_default_str();
  c_send->add_option("--port", send.port, "server port")->capture_default_str();
  c_send->add_option("--timeout", send.timeout, "connect/read timeout in seconds")
      ->capture_default_str();
  c_send->add_option("--count", send.count, "number of inputs to send")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }
  g.format = format == "csv" ? OutputFormat::kCsv
             : format == "json" ? OutputFormat::kJson
                                : OutputFormat::kText;
  profile.split_given = split_opt->count() > 0;

  try {
    if (*c_profile) return cmd_profile(g, profile);
    if (*c_sweep) return cmd_sweep(g, sweep);
    if (*c_simulate) return cmd_simulate(g, simulate);
    if (*c_plan) return cmd_plan(g, plan);
    if (*c_serve) return cmd_serve(g, serve);
    if (*c_send) return cmd_send(g, send);
  } catch (const splitwire::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitUsage;
}
