// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The splitwire Authors

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "splitwire/model_graph.hpp"

namespace splitwire::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 2,
  kExitInfeasible = 3,
  kExitIo = 4,
  kExitProtocol = 5,
};

enum class OutputFormat { kText, kCsv, kJson };

struct GlobalOptions {
  std::uint64_t seed = 0;
  std::string output_dir = ".";
  OutputFormat format = OutputFormat::kText;
};

struct ModelOptions {
  std::string model = "resnet34";
  std::string variant = "cifar";
  std::int64_t classes = 100;
  std::int64_t input_size = 0;  // 0: variant default
  std::string split = "SP-2";
  std::int64_t n_c = 1024;
  int stages = 2;
  std::int64_t hidden = 0;
  std::int64_t latent_grid = 4;
};

struct ChannelOptions {
  std::string snr = "5";  // dB, or "inf"
  std::string dtype = "f32";
  double rate = 1e6;
  double alpha_t = 1e-8;
  double alpha_r = 1e-11;
};

struct ProfileOptions {
  ModelOptions model;
  bool all_splits = false;
  bool split_given = false;
  bool describe = false;
};

struct SweepOptions {
  ModelOptions model;
  std::string kind;
  std::vector<std::string> splits;
  std::string flops_source = "computed";
  std::vector<double> betas;
  double beta_min_exp = -5.0;
  double beta_max_exp = 0.0;
  int points = 51;
  std::string table;
  std::string weights_dir;
  std::string dataset;
  std::size_t limit = 0;
  std::vector<double> snrs;
  double floor = 0.66;
  std::string table_model = "resnet34";
};

struct RunOptions {
  ModelOptions model;
  ChannelOptions channel;
  std::string weights;
  std::uint64_t weights_seed = 1;
  std::string input;
  std::uint64_t input_seed = 1;
};

struct PlanOptions {
  ModelOptions model;  // variant / classes for computed FLOPs
  ChannelOptions channel;
  std::string table;
  std::string flops_source = "computed";
  double floor = 0.66;
  std::string table_model;
};

struct ServeOptions {
  RunOptions run;
  std::string host = "127.0.0.1";
  std::uint16_t port = 9707;
  double timeout = 10.0;
  std::size_t max_requests = 0;
  std::string port_file;
};

struct SendOptions {
  RunOptions run;
  std::string host = "127.0.0.1";
  std::uint16_t port = 9707;
  double timeout = 10.0;
  std::size_t count = 1;
};

int cmd_profile(const GlobalOptions& g, const ProfileOptions& o);
int cmd_sweep(const GlobalOptions& g, const SweepOptions& o);
int cmd_simulate(const GlobalOptions& g, const RunOptions& o);
int cmd_plan(const GlobalOptions& g, const PlanOptions& o);
int cmd_serve(const GlobalOptions& g, const ServeOptions& o);
int cmd_send(const GlobalOptions& g, const SendOptions& o);

// Bundled data directory: $SPLITWIRE_DATA, else the build-time path.
std::string data_dir();

}  // namespace splitwire::cli
