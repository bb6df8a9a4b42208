// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The splitwire Authors
//
// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Tolerances and time limits are pinned below.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <mutex>
#include <random>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "splitwire/accounting.hpp"
#include "splitwire/channel.hpp"
#include "splitwire/cost_model.hpp"
#include "splitwire/kernels.hpp"
#include "splitwire/pipeline.hpp"
#include "splitwire/planner.hpp"
#include "splitwire/runtime.hpp"
#include "splitwire/wire.hpp"

#ifndef SPLITWIRE_TEST_DATA_DIR
#error "SPLITWIRE_TEST_DATA_DIR must point at the shipped data directory"
#endif

using namespace splitwire;

namespace {

namespace tol {
constexpr double kParamRel = 0.02;
constexpr double kFlopRel = 0.05;
constexpr double kProportionPp = 3.0;
constexpr double kReductionPp = 2.0;
constexpr double kSigmaAbs = 1e-6;
constexpr double kSnrDb = 0.3;
constexpr double kKernelAbs = 1e-5;
constexpr double kCompositionAbs = 1e-5;
}  // namespace tol

namespace limit {
constexpr double kAccounting = 1.0;
constexpr double kCost = 1.0;
constexpr double kSigma = 1.0;
constexpr double kChannel = 10.0;
constexpr double kKernels = 30.0;
constexpr double kComposition = 60.0;
constexpr double kPlanner = 5.0;
constexpr double kWire = 60.0;
}  // namespace limit

const std::string kDataDir = SPLITWIRE_TEST_DATA_DIR;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [fail: " << what << "]";
    }
  }
};

int failures = 0;

void run(int id, const char* title, double time_limit, const std::function<void(Outcome&)>& body) {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(o);
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail << " [exception: " << e.what() << "]";
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (secs > time_limit) {
    o.pass = false;
    o.detail << " [over time limit]";
  }
  if (!o.pass) ++failures;
  std::printf("criterion %d %-4s %s: %s (%.2f s, limit %.0f s)\n", id, o.pass ? "PASS" : "FAIL",
              title, o.detail.str().c_str(), secs, time_limit);
  std::fflush(stdout);
}

double rel_err(double got, double want) { return std::abs(got - want) / want; }

ModelGraph cifar34() { return build_resnet(34, ResNetVariant::kCifar, 100); }

// ----- 1 --------------------------------------------------------------------

void parameters(Outcome& o) {
  const double standard = count_params(build_resnet(34, ResNetVariant::kStandard, 1000)).params_total;
  const double cifar = count_params(cifar34()).params_total;
  o.detail << "standard " << standard / 1e6 << "M vs 21.8M, cifar100 " << cifar / 1e6
           << "M vs 21.3M";
  o.require(rel_err(standard, 21.8e6) <= tol::kParamRel, "standard params");
  o.require(rel_err(cifar, 21.3e6) <= tol::kParamRel, "cifar params");
}

// ----- 2 --------------------------------------------------------------------

void flops(Outcome& o) {
  const ModelGraph v = cifar34();
  const double total = count_flops(v).f_m;
  o.detail << "total " << total / 1e9 << " GMAC vs 1.16";
  o.require(rel_err(total, 1.16e9) <= tol::kFlopRel, "total FLOPs");

  const auto sp = [&](SplitPoint s) { return count_flops(apply_split(v, s, 1024)); };
  const std::int64_t diff = sp(SplitPoint::kSP2).f_m_t - sp(SplitPoint::kSP1).f_m_t;
  o.detail << "; SP2-SP1 " << diff;
  o.require(diff == 226492416, "stage difference");

  const double published[] = {0.12, 9.96, 37.83, 79.12, 98.93};
  double worst = 0.0;
  for (int k = 1; k <= 5; ++k) {
    const double p = sp(static_cast<SplitPoint>(k)).proportion_t();
    worst = std::max(worst, std::abs(p - published[k - 1]));
  }
  o.detail << "; worst proportion gap " << worst << " pp";
  o.require(worst <= tol::kProportionPp, "per-split proportions");
}

// ----- 3 --------------------------------------------------------------------

void normalized_cost(Outcome& o) {
  const FlopCatalog cat = read_flop_catalog(kDataDir + "/reference_flops.csv");
  const double f_m = 1160e6;
  const SplitPoint splits[] = {SplitPoint::kSP2, SplitPoint::kSP3, SplitPoint::kSP4};
  const double expected[] = {0.80, 0.56, 0.18};
  for (int i = 0; i < 3; ++i) {
    const FlopEntry e = *cat.find(splits[i], 0);
    const double red = 1.0 - normalized_comp(e.f_m_t, e.f_m_r, f_m, 1e-3);
    o.detail << to_string(splits[i]) << " " << 100 * red << "% ";
    o.require(std::abs(red - expected[i]) * 100 <= tol::kReductionPp, to_string(splits[i]));
  }
  bool ordered = true;
  for (double b : log_grid(-8, -3, 500)) {
    double prev = -1.0;
    for (SplitPoint s : splits) {
      const FlopEntry e = *cat.find(s, 0);
      const double c = normalized_comp(e.f_m_t, e.f_m_r, f_m, b);
      ordered = ordered && c > prev;
      prev = c;
    }
  }
  o.detail << "; ordering " << (ordered ? "holds" : "broken");
  o.require(ordered, "early < mid < late");
}

// ----- 4 --------------------------------------------------------------------

void sigma(Outcome& o) {
  const double want[][2] = {{0, 1.0}, {10, 0.316228}, {20, 0.1}};
  for (const auto& w : want) {
    const double s = sigma_from_snr(w[0]);
    o.detail << w[0] << " dB -> " << s << "; ";
    o.require(std::abs(s - w[1]) <= tol::kSigmaAbs, "sigma value");
  }
  bool decreasing = true;
  for (int i = 1; i < 100; ++i) {
    decreasing = decreasing && sigma_from_snr(-10 + 0.4 * i) < sigma_from_snr(-10 + 0.4 * (i - 1));
  }
  o.detail << "monotone " << (decreasing ? "yes" : "no");
  o.require(decreasing, "monotonicity");
}

// ----- 5 --------------------------------------------------------------------

void channel_stats(Outcome& o) {
  constexpr int kTrials = 10000;
  constexpr std::size_t kNc = 64;
  std::mt19937_64 gen(5);
  std::normal_distribution<float> nd(0.0f, 2.0f);
  for (double snr : {0.0, 3.0, 5.0, 10.0}) {
    const double s = sigma_from_snr(snr);
    double signal = 0.0;
    double noise = 0.0;
    std::vector<float> z(kNc);
    for (int t = 0; t < kTrials; ++t) {
      for (float& v : z) v = nd(gen);
      normalize_and_scale_inplace(z);
      std::vector<float> n = z;
      awgn_inplace(n, s, static_cast<std::uint64_t>(t) + 1);
      for (std::size_t i = 0; i < kNc; ++i) {
        signal += double(z[i]) * z[i];
        noise += (double(n[i]) - z[i]) * (double(n[i]) - z[i]);
      }
    }
    const double measured = 10.0 * std::log10(signal / noise);
    o.detail << snr << "->" << measured << " dB; ";
    o.require(std::abs(measured - snr) <= tol::kSnrDb, "empirical SNR");
  }
}

// ----- 6 --------------------------------------------------------------------

std::int64_t pick(std::mt19937_64& g, std::int64_t lo, std::int64_t hi) {
  return std::uniform_int_distribution<std::int64_t>(lo, hi)(g);
}

void kernel_oracles(Outcome& o) {
  constexpr int kCases = 100;
  std::mt19937_64 gen(606);
  double worst[5] = {};
  for (int c = 0; c < kCases; ++c) {
    {
      const std::int64_t k = pick(gen, 1, 5), s = pick(gen, 1, 3), p = pick(gen, 0, k - 1);
      const std::int64_t lo = std::max<std::int64_t>(1, k - 2 * p);
      const Tensor x = oracle::normal_tensor({pick(gen, 1, 8), pick(gen, lo, 12), pick(gen, lo, 12)}, gen);
      const WeightTensor w = oracle::normal_weights({pick(gen, 1, 8), x.shape().channels, k, k}, gen);
      const auto b = oracle::normal_values(static_cast<std::size_t>(w.shape[0]), gen);
      worst[0] = std::max(worst[0], oracle::max_abs_diff(kernels::conv2d(x, w, b, s, p).data(),
                                                         oracle::conv2d(x, w, b, s, p).data()));
    }
    {
      const std::int64_t k = pick(gen, 2, 4), s = pick(gen, 1, 2), op = pick(gen, 0, s - 1);
      const std::int64_t p = pick(gen, 0, k / 2);
      const Tensor x = oracle::normal_tensor({pick(gen, 1, 6), pick(gen, 2, 8), pick(gen, 2, 8)}, gen);
      const WeightTensor w = oracle::normal_weights({x.shape().channels, pick(gen, 1, 6), k, k}, gen);
      const auto b = oracle::normal_values(static_cast<std::size_t>(w.shape[1]), gen);
      worst[1] = std::max(worst[1],
                          oracle::max_abs_diff(kernels::conv_transpose2d(x, w, b, s, p, op).data(),
                                               oracle::conv_transpose2d(x, w, b, s, p, op).data()));
    }
    {
      const std::int64_t ch = pick(gen, 1, 16);
      const Tensor x = oracle::normal_tensor({ch, pick(gen, 1, 9), pick(gen, 1, 9)}, gen);
      const auto n = static_cast<std::size_t>(ch);
      const auto g = oracle::normal_values(n, gen), be = oracle::normal_values(n, gen),
                 m = oracle::normal_values(n, gen);
      std::vector<float> v(n);
      for (auto& e : v) e = 0.1f + std::abs(oracle::normal_values(1, gen)[0]);
      worst[2] = std::max(worst[2],
                          oracle::max_abs_diff(kernels::batchnorm_infer(x, g, be, m, v, 1e-5).data(),
                                               oracle::batchnorm(x, g, be, m, v, 1e-5).data()));
    }
    {
      const auto in = static_cast<std::size_t>(pick(gen, 1, 512));
      const auto x = oracle::normal_values(in, gen);
      const WeightTensor w = oracle::normal_weights({pick(gen, 1, 100), std::int64_t(in)}, gen);
      const auto b = oracle::normal_values(static_cast<std::size_t>(w.shape[0]), gen);
      worst[3] = std::max(worst[3], oracle::max_abs_diff(kernels::linear(x, w, b),
                                                         oracle::linear(x, w, b)));
    }
    {
      const Tensor x = oracle::normal_tensor({pick(gen, 1, 64), pick(gen, 1, 8), pick(gen, 1, 8)}, gen);
      worst[4] = std::max(worst[4], oracle::max_abs_diff(kernels::global_avg_pool(x).data(),
                                                         oracle::global_avg_pool(x).data()));
    }
  }
  const char* names[] = {"conv2d", "conv_transpose2d", "batchnorm", "linear", "gap"};
  for (int i = 0; i < 5; ++i) {
    o.detail << names[i] << " " << worst[i] << "; ";
    o.require(worst[i] <= tol::kKernelAbs, names[i]);
  }
  o.detail << kCases << " cases each";
}

// ----- 7 --------------------------------------------------------------------

void composition(Outcome& o) {
  const ModelGraph v = cifar34();
  double worst = 0.0;
  for (int k = 1; k <= 5; ++k) {
    const auto sp = static_cast<SplitPoint>(k);
    const SplitModel m = apply_split(v, sp, 1024);
    const WeightStore w = random_weights(m.joined(), 700 + k);
    const Tensor x = random_input(v.input_shape(), 70 + k);
    const Tensor mono = run_graph(m.joined(), w, x);
    ChannelProfile clean;
    clean.noiseless = true;
    const SimulationResult r = simulate(m, w, x, clean, 1);
    const double d = oracle::max_abs_diff(mono.data(), r.rx.logits);
    worst = std::max(worst, d);
    o.require(d <= tol::kCompositionAbs, to_string(sp) + " logits");
    o.require(r.rx.label == kernels::argmax(mono.data()), to_string(sp) + " label");
  }
  o.detail << "SP-1..SP-5 worst logit gap " << worst << ", labels equal";
}

// ----- 8 --------------------------------------------------------------------

int stages_of(const std::string& model) {
  static const std::regex re(R"(resnet(18|34)(-([12])stage)?)");
  std::smatch m;
  if (!std::regex_match(model, m, re)) throw std::runtime_error("unknown model " + model);
  return m[3].matched ? std::stoi(m[3]) : 2;
}

int depth_of(const std::string& model) { return model.rfind("resnet18", 0) == 0 ? 18 : 34; }

void planner(Outcome& o) {
  const AccuracyTable t = read_accuracy_table(kDataDir + "/reference_tables.csv");
  const std::int64_t nine[3][3] = {{1024, 64, 32}, {512, 32, 32}, {512, 32, 16}};
  int hits = 0;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const auto got = min_nc(t, static_cast<SplitPoint>(j + 2), std::array{0.0, 3.0, 5.0}[i],
                              0.66, std::string("resnet34"));
      hits += got == nine[i][j];
    }
  }
  o.detail << "min_nc " << hits << "/9 cells";
  o.require(hits == 9, "min_nc cells");

  // Computed FLOPs for every row of the table, per model.
  FlopCatalog cat;
  struct Cost {
    std::string model;
    SplitPoint split;
    std::int64_t n_c;
    double f_t, f_r;
  };
  std::vector<Cost> costs;
  for (const auto& r : t.records) {
    const ModelGraph v = build_resnet(depth_of(r.model), ResNetVariant::kCifar, 100);
    SplitConfig c;
    c.decompress_stages = stages_of(r.model);
    const FlopReport f = count_flops(apply_split(v, r.split, r.n_c, c));
    cat.set(r.split, r.n_c, f, r.model);
    costs.push_back({r.model, r.split, r.n_c, double(f.f_m_t), double(f.f_m_r)});
  }

  std::mt19937_64 gen(808);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int agree = 0;
  int feasible = 0;
  for (int trial = 0; trial < 50; ++trial) {
    PlanRequest req;
    req.dev_t.alpha = std::pow(10.0, -11.0 + 4.0 * u(gen));
    req.dev_r.alpha = std::pow(10.0, -13.0 + 4.0 * u(gen));
    req.channel.snr_db = -1.0 + 8.0 * u(gen);
    req.channel.rate_bps = std::pow(10.0, 4.0 + 5.0 * u(gen));
    req.channel.dtype = gen() % 2 ? PayloadDtype::kU8 : PayloadDtype::kF32;
    req.floor = 0.4 + 0.4 * u(gen);
    const PlanResult got = plan(t, cat, req);

    // Enumeration oracle.
    bool found = false;
    std::tuple<double, std::int64_t, int, std::string> best;
    for (std::size_t i = 0; i < t.records.size(); ++i) {
      const auto& r = t.records[i];
      double matched = -INFINITY;
      for (const auto& q : t.records) {
        if (q.model == r.model && q.split == r.split && q.snr_db <= req.channel.snr_db) {
          matched = std::max(matched, q.snr_db);
        }
      }
      if (r.snr_db != matched || r.top1 < req.floor) continue;
      const double bits = r.split == SplitPoint::kSP6 ? 16.0
                          : req.channel.dtype == PayloadDtype::kU8 ? 8.0 * r.n_c + 64
                                                                   : 32.0 * r.n_c;
      const double tt = req.dev_t.alpha * costs[i].f_t + req.dev_r.alpha * costs[i].f_r +
                        bits / req.channel.rate_bps;
      const auto key = std::make_tuple(tt, r.n_c, split_index(r.split), r.model);
      if (!found || key < best) best = key;
      found = true;
    }
    bool same = got.feasible == found;
    if (same && found) {
      ++feasible;
      same = got.n_c == std::get<1>(best) && split_index(got.split) == std::get<2>(best) &&
             got.model == std::get<3>(best) &&
             std::abs(got.cost.t_task - std::get<0>(best)) <= 1e-12 * std::get<0>(best);
    }
    agree += same;
  }
  o.detail << "; oracle agreement " << agree << "/50 (" << feasible << " feasible)";
  o.require(agree == 50, "oracle agreement");
}

// ----- 9 --------------------------------------------------------------------

void wire_checks(Outcome& o) {
  using namespace splitwire::wire;
  std::mt19937_64 gen(909);

  // Roundtrip over random frames.
  int exact = 0;
  for (int i = 0; i < 200; ++i) {
    Frame f;
    f.type = static_cast<MsgType>(1 + gen() % 4);
    f.fingerprint = gen();
    f.split_id = static_cast<std::uint8_t>(gen() % kSplitPointCount);
    f.dtype = static_cast<PayloadDtype>(gen() % 2);
    f.seed = gen();
    if (f.type == MsgType::kFeatures) {
      f.n_c = f.split_id == 6 ? 1 : static_cast<std::uint32_t>(1 + gen() % 300);
      f.payload.resize(expected_payload_bytes(f.n_c, f.dtype, static_cast<SplitPoint>(f.split_id)));
    } else {
      f.n_c = static_cast<std::uint32_t>(gen());
      f.payload.resize(gen() % 100);
    }
    for (auto& b : f.payload) b = static_cast<std::byte>(gen());
    const auto bytes = encode_frame(f);
    exact += decode_frame(bytes) == f && encode_frame(decode_frame(bytes)) == bytes;
  }
  o.detail << "roundtrip " << exact << "/200";
  o.require(exact == 200, "roundtrip");

  // Fuzz: every outcome is a frame or a WireError.
  Frame base;
  base.split_id = 2;
  base.n_c = 64;
  base.seed = 7;
  base.fingerprint = 0xabcdef;
  base.payload.resize(256);
  for (auto& b : base.payload) b = static_cast<std::byte>(gen());
  const auto good = encode_frame(base);
  int rejected = 0;
  int crashes = 0;
  for (int i = 0; i < 10000; ++i) {
    auto b = good;
    const int flips = 1 + static_cast<int>(gen() % 8);
    for (int k = 0; k < flips; ++k) b[gen() % b.size()] ^= static_cast<std::byte>(1 + gen() % 255);
    if (gen() % 5 == 0) b.resize(gen() % b.size());
    try {
      decode_frame(b);
    } catch (const WireError&) {
      ++rejected;
    } catch (...) {
      ++crashes;
    }
  }
  o.detail << "; fuzz 10000 frames, " << rejected << " rejected, " << crashes << " crashes";
  o.require(crashes == 0, "fuzz");

  // Loopback.
  SplitConfig cfg;
  cfg.hidden_channels = 64;
  const SplitModel m = apply_split(build_resnet(18, ResNetVariant::kCifar, 100, 16),
                                   SplitPoint::kSP3, 64, cfg);
  const WeightStore w = random_weights(m.joined(), 99);
  SessionConfig clean;
  clean.channel.noiseless = true;
  clean.timeout_s = 10.0;
  Server server(m, w, clean);
  clean.port = server.start();
  int labels = 0;
  {
    Client client(m, w, clean);
    for (std::uint64_t i = 0; i < 100; ++i) {
      const Tensor x = random_input(m.vanilla.input_shape(), 9000 + i);
      const Tensor logits = run_graph(m.joined(), w, x);
      labels += client.send(x, i + 1).label == kernels::argmax(logits.data());
    }
  }
  server.stop();
  o.detail << "; loopback labels " << labels << "/100";
  o.require(labels == 100, "loopback labels");

  SessionConfig noisy;
  noisy.channel.snr_db = 3.0;
  noisy.channel.dtype = PayloadDtype::kU8;
  noisy.timeout_s = 10.0;
  Server server2(m, w, noisy);
  std::mutex mu;
  std::vector<float> last;
  server2.on_features = [&](const ServedRequest& r) {
    std::lock_guard lock(mu);
    last = r.result.z_hat;
  };
  noisy.port = server2.start();
  int identical = 0;
  {
    Client client(m, w, noisy);
    for (std::uint64_t i = 0; i < 20; ++i) {
      const Tensor x = random_input(m.vanilla.input_shape(), 5000 + i);
      const SendResult r = client.send(x, 777 + i);
      const SimulationResult local = simulate(m, w, x, noisy.channel, 777 + i);
      std::lock_guard lock(mu);
      identical += last == local.rx.z_hat && r.zhat_digest == digest(local.rx.z_hat) &&
                   r.label == local.rx.label;
    }
  }
  server2.stop();
  o.detail << "; seeded z_hat identical " << identical << "/20";
  o.require(identical == 20, "seeded z_hat");
}

}  // namespace

int main() {
  run(1, "parameter accounting", limit::kAccounting, parameters);
  run(2, "FLOP accounting", limit::kAccounting, flops);
  run(3, "normalized computation cost", limit::kCost, normalized_cost);
  run(4, "sigma(SNR)", limit::kSigma, sigma);
  run(5, "channel statistics", limit::kChannel, channel_stats);
  run(6, "numerics oracles", limit::kKernels, kernel_oracles);
  run(7, "split composition", limit::kComposition, composition);
  run(8, "planner reproduction", limit::kPlanner, planner);
  run(9, "wire", limit::kWire, wire_checks);
  std::printf("%s: %d of 9 criteria failed\n", failures == 0 ? "ALL PASS" : "FAILURES", failures);
  return failures == 0 ? 0 : 1;
}
