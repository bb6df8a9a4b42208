// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The splitwire Authors

#include "splitwire/cost_model.hpp"

#include <cmath>

#include "splitwire/error.hpp"

namespace splitwire {

void DeviceProfile::validate() const {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw Error(ErrorKind::kInvalidArgument, "per-FLOP time alpha must be positive and finite");
  }
}

double computation_time(double flops, const DeviceProfile& device) {
  device.validate();
  return device.alpha * flops;
}

CostReport total_task_time(double f_m_t, double f_m_r, const DeviceProfile& dev_t,
                           const DeviceProfile& dev_r, std::int64_t bits,
                           const ChannelProfile& channel) {
  dev_t.validate();
  dev_r.validate();
  channel.validate();
  if (bits < 0) throw Error(ErrorKind::kInvalidArgument, "payload bits must be non-negative");
  CostReport r;
  r.t_m_t = computation_time(f_m_t, dev_t);
  r.t_m_r = computation_time(f_m_r, dev_r);
  r.t_comp = r.t_m_t + r.t_m_r;
  r.t_comm = static_cast<double>(bits) / channel.rate_bps;
  r.t_task = r.t_comp + r.t_comm;
  r.payload_bits = bits;
  return r;
}

CostReport total_task_time(const FlopReport& report, const DeviceProfile& dev_t,
                           const DeviceProfile& dev_r, std::int64_t bits,
                           const ChannelProfile& channel) {
  return total_task_time(static_cast<double>(report.f_m_t), static_cast<double>(report.f_m_r),
                         dev_t, dev_r, bits, channel);
}

double normalized_comp(double f_m_t, double f_m_r, double f_m, double beta) {
  if (!(f_m > 0.0)) throw Error(ErrorKind::kInvalidArgument, "F_M must be positive");
  if (!(beta > 0.0)) throw Error(ErrorKind::kInvalidArgument, "beta must be positive");
  return f_m_t / f_m + beta * f_m_r / f_m;
}

std::vector<BetaPoint> beta_sweep(double f_m_t, double f_m_r, double f_m,
                                  std::span<const double> beta_grid) {
  if (beta_grid.empty()) throw Error(ErrorKind::kInvalidArgument, "beta grid is empty");
  std::vector<BetaPoint> out;
  out.reserve(beta_grid.size());
  for (double b : beta_grid) out.push_back({b, normalized_comp(f_m_t, f_m_r, f_m, b)});
  return out;
}

std::vector<BetaPoint> beta_sweep(const FlopReport& report, std::span<const double> beta_grid) {
  return beta_sweep(static_cast<double>(report.f_m_t), static_cast<double>(report.f_m_r),
                    static_cast<double>(report.f_m), beta_grid);
}

std::vector<double> log_grid(double lo_exp, double hi_exp, int count) {
  if (count < 1) throw Error(ErrorKind::kInvalidArgument, "grid needs at least one point");
  if (count == 1) return {std::pow(10.0, lo_exp)};
  std::vector<double> out(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    out[static_cast<std::size_t>(i)] =
        std::pow(10.0, lo_exp + (hi_exp - lo_exp) * i / (count - 1));
  }
  return out;
}

}  // namespace splitwire
