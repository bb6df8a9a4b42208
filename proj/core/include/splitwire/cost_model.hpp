// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The splitwire Authors
//
// Latency model of split inference:
//   T_Mt = alpha_t * F_Mt,  T_Mr = alpha_r * F_Mr,  T_comp = T_Mt + T_Mr,
//   T_comm = bits / R,      T_task = T_comp + T_comm
// and the computation cost normalized by the unsplit model,
//   F_Mt / F_M + beta * F_Mr / F_M  with beta = alpha_r / alpha_t.

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "splitwire/accounting.hpp"
#include "splitwire/channel.hpp"

namespace splitwire {

struct DeviceProfile {
  double alpha = 1e-9;  // seconds per FLOP

  void validate() const;  // alpha > 0 and finite
};

struct CostReport {
  double t_m_t = 0.0;
  double t_m_r = 0.0;
  double t_comp = 0.0;
  double t_comm = 0.0;
  double t_task = 0.0;
  std::int64_t payload_bits = 0;
};

double computation_time(double flops, const DeviceProfile& device);

CostReport total_task_time(double f_m_t, double f_m_r, const DeviceProfile& dev_t,
                           const DeviceProfile& dev_r, std::int64_t bits,
                           const ChannelProfile& channel);
CostReport total_task_time(const FlopReport& report, const DeviceProfile& dev_t,
                           const DeviceProfile& dev_r, std::int64_t bits,
                           const ChannelProfile& channel);

double normalized_comp(double f_m_t, double f_m_r, double f_m, double beta);

struct BetaPoint {
  double beta = 0.0;
  double normalized_tcomp = 0.0;
};

std::vector<BetaPoint> beta_sweep(double f_m_t, double f_m_r, double f_m,
                                  std::span<const double> beta_grid);
std::vector<BetaPoint> beta_sweep(const FlopReport& report, std::span<const double> beta_grid);

// `count` log-spaced points from 10^lo to 10^hi inclusive.
std::vector<double> log_grid(double lo_exp, double hi_exp, int count);

}  // namespace splitwire
