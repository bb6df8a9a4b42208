// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The splitwire Authors

#include "splitwire/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "splitwire/error.hpp"

namespace splitwire::kernels {
namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorKind::kShape, what);
}

void check_filter(const WeightTensor& w, std::int64_t expect_in, std::int64_t in_axis,
                  const char* op) {
  require(w.shape.size() == 4 && w.shape[2] == w.shape[3] && w.shape[2] >= 1,
          std::string(op) + ": weights must be (a, b, k, k)");
  require(w.shape[in_axis] == expect_in, std::string(op) + ": channel mismatch (input has " +
                                             std::to_string(expect_in) + ", weights expect " +
                                             std::to_string(w.shape[in_axis]) + ")");
  require(static_cast<std::int64_t>(w.values.size()) == w.elements(),
          std::string(op) + ": weight data length mismatch");
}

// Double-precision dot product with eight independent partial sums so the
// compiler can vectorize it.
double dot(const float* a, const float* b, std::int64_t n) noexcept {
  double s[8] = {};
  std::int64_t i = 0;
  for (; i + 8 <= n; i += 8) {
    for (int j = 0; j < 8; ++j) s[j] += static_cast<double>(a[i + j]) * b[i + j];
  }
  double t = ((s[0] + s[1]) + (s[2] + s[3])) + ((s[4] + s[5]) + (s[6] + s[7]));
  for (; i < n; ++i) t += static_cast<double>(a[i]) * b[i];
  return t;
}

// out[r * cols + p] = bias[r] + dot(w row r, x row p); both operands are
// row-major with `depth` columns. Positions are blocked so a block of input
// rows stays in cache while every filter passes over it.
void gemm_rows(const float* w, const float* x, std::int64_t rows, std::int64_t positions,
               std::int64_t depth, std::span<const float> bias, float* out) {
  constexpr std::int64_t kBlockBytes = 128 * 1024;
  const std::int64_t block =
      std::max<std::int64_t>(1, kBlockBytes / (depth * static_cast<std::int64_t>(sizeof(float))));
  for (std::int64_t p0 = 0; p0 < positions; p0 += block) {
    const std::int64_t p1 = std::min(positions, p0 + block);
    for (std::int64_t r = 0; r < rows; ++r) {
      const float* wr = w + r * depth;
      const double b = bias.empty() ? 0.0 : static_cast<double>(bias[r]);
      for (std::int64_t p = p0; p < p1; ++p) {
        out[r * positions + p] = static_cast<float>(b + dot(wr, x + p * depth, depth));
      }
    }
  }
}

}  // namespace

Tensor conv2d(const Tensor& input, const WeightTensor& weights, std::span<const float> bias,
              std::int64_t stride, std::int64_t padding) {
  const TensorShape in = input.shape();
  check_filter(weights, in.channels, 1, "conv2d");
  require(stride >= 1 && padding >= 0, "conv2d: invalid stride/padding");
  const std::int64_t cout = weights.shape[0];
  const std::int64_t k = weights.shape[2];
  require(bias.empty() || static_cast<std::int64_t>(bias.size()) == cout,
          "conv2d: bias length mismatch");
  require(in.height + 2 * padding >= k && in.width + 2 * padding >= k,
          "conv2d: kernel larger than padded input");
  const std::int64_t ho = (in.height + 2 * padding - k) / stride + 1;
  const std::int64_t wo = (in.width + 2 * padding - k) / stride + 1;
  const std::int64_t depth = in.channels * k * k;
  const std::int64_t positions = ho * wo;

  // One row of `depth` taps per output position, zeros where the window
  // hangs over the border.
  std::vector<float> cols(static_cast<std::size_t>(positions * depth), 0.0f);
  const float* x = input.data().data();
  for (std::int64_t oh = 0; oh < ho; ++oh) {
    for (std::int64_t ow = 0; ow < wo; ++ow) {
      float* c = cols.data() + (oh * wo + ow) * depth;
      for (std::int64_t ci = 0; ci < in.channels; ++ci) {
        const float* plane = x + ci * in.height * in.width;
        for (std::int64_t kh = 0; kh < k; ++kh) {
          const std::int64_t ih = oh * stride - padding + kh;
          if (ih < 0 || ih >= in.height) {
            c += k;
            continue;
          }
          for (std::int64_t kw = 0; kw < k; ++kw, ++c) {
            const std::int64_t iw = ow * stride - padding + kw;
            if (iw >= 0 && iw < in.width) *c = plane[ih * in.width + iw];
          }
        }
      }
    }
  }

  Tensor out({cout, ho, wo});
  gemm_rows(weights.values.data(), cols.data(), cout, positions, depth, bias, out.data().data());
  return out;
}

Tensor conv_transpose2d(const Tensor& input, const WeightTensor& weights,
                        std::span<const float> bias, std::int64_t stride, std::int64_t padding,
                        std::int64_t output_padding) {
  const TensorShape in = input.shape();
  check_filter(weights, in.channels, 0, "conv_transpose2d");
  require(stride >= 1 && padding >= 0 && output_padding >= 0,
          "conv_transpose2d: invalid stride/padding");
  const std::int64_t cout = weights.shape[1];
  const std::int64_t k = weights.shape[2];
  require(bias.empty() || static_cast<std::int64_t>(bias.size()) == cout,
          "conv_transpose2d: bias length mismatch");
  const std::int64_t ho = (in.height - 1) * stride - 2 * padding + k + output_padding;
  const std::int64_t wo = (in.width - 1) * stride - 2 * padding + k + output_padding;
  require(ho >= 1 && wo >= 1, "conv_transpose2d: empty output");

  Tensor out({cout, ho, wo});
  const float* x = input.data().data();
  float* y = out.data().data();
  // Output (oh, ow) receives input ih = (oh + padding - kh) / stride only
  // for taps with kh = (oh + padding) mod stride (likewise for columns), so
  // each stride phase is an ordinary gather over its own subset of taps.
  for (std::int64_t ph = 0; ph < stride; ++ph) {
    for (std::int64_t pw = 0; pw < stride; ++pw) {
      std::vector<std::int64_t> khs, kws, ohs, ows;
      for (std::int64_t t = ph; t < k; t += stride) khs.push_back(t);
      for (std::int64_t t = pw; t < k; t += stride) kws.push_back(t);
      for (std::int64_t o = 0; o < ho; ++o) {
        if ((o + padding) % stride == ph) ohs.push_back(o);
      }
      for (std::int64_t o = 0; o < wo; ++o) {
        if ((o + padding) % stride == pw) ows.push_back(o);
      }
      const auto nh = static_cast<std::int64_t>(khs.size());
      const auto nw = static_cast<std::int64_t>(kws.size());
      const std::int64_t positions = static_cast<std::int64_t>(ohs.size() * ows.size());
      if (positions == 0) continue;
      const std::int64_t depth = in.channels * nh * nw;
      std::vector<float> out_phase(static_cast<std::size_t>(cout * positions));
      if (depth == 0) {
        for (std::int64_t co = 0; co < cout; ++co) {
          std::fill_n(out_phase.begin() + co * positions, positions,
                      bias.empty() ? 0.0f : bias[co]);
        }
      } else {
        std::vector<float> wsub(static_cast<std::size_t>(cout * depth));
        for (std::int64_t co = 0; co < cout; ++co) {
          float* d = wsub.data() + co * depth;
          for (std::int64_t ci = 0; ci < in.channels; ++ci) {
            for (std::int64_t a : khs) {
              for (std::int64_t b : kws) {
                *d++ = weights.values[((ci * cout + co) * k + a) * k + b];
              }
            }
          }
        }
        std::vector<float> cols(static_cast<std::size_t>(positions * depth), 0.0f);
        float* c = cols.data();
        for (std::int64_t oh : ohs) {
          for (std::int64_t ow : ows) {
            for (std::int64_t ci = 0; ci < in.channels; ++ci) {
              const float* plane = x + ci * in.height * in.width;
              for (std::int64_t a : khs) {
                const std::int64_t ih = (oh + padding - a) / stride;
                const bool row_ok = oh + padding - a >= 0 && ih < in.height;
                for (std::int64_t b : kws) {
                  const std::int64_t iw = (ow + padding - b) / stride;
                  if (row_ok && ow + padding - b >= 0 && iw < in.width) {
                    *c = plane[ih * in.width + iw];
                  }
                  ++c;
                }
              }
            }
          }
        }
        gemm_rows(wsub.data(), cols.data(), cout, positions, depth, bias, out_phase.data());
      }
      for (std::int64_t co = 0; co < cout; ++co) {
        const float* src = out_phase.data() + co * positions;
        for (std::int64_t oh : ohs) {
          for (std::int64_t ow : ows) y[(co * ho + oh) * wo + ow] = *src++;
        }
      }
    }
  }
  return out;
}

Tensor batchnorm_infer(const Tensor& input, std::span<const float> gamma,
                       std::span<const float> beta, std::span<const float> mean,
                       std::span<const float> var, double eps) {
  const auto c = static_cast<std::size_t>(input.shape().channels);
  require(gamma.size() == c && beta.size() == c && mean.size() == c && var.size() == c,
          "batchnorm_infer: parameter length does not match " + std::to_string(c) + " channels");
  require(eps >= 0.0, "batchnorm_infer: negative eps");
  Tensor out(input.shape());
  const std::size_t plane = static_cast<std::size_t>(input.shape().height * input.shape().width);
  const float* x = input.data().data();
  float* y = out.data().data();
  for (std::size_t ch = 0; ch < c; ++ch) {
    const double denom = std::sqrt(static_cast<double>(var[ch]) + eps);
    require(denom > 0.0, "batchnorm_infer: zero variance with eps = 0");
    const double scale = static_cast<double>(gamma[ch]) / denom;
    const double m = mean[ch];
    const double b = beta[ch];
    for (std::size_t i = ch * plane; i < (ch + 1) * plane; ++i) {
      y[i] = static_cast<float>((x[i] - m) * scale + b);
    }
  }
  return out;
}

void relu_inplace(Tensor& t) noexcept {
  for (float& v : t.data()) v = v > 0.0f ? v : 0.0f;
}

Tensor max_pool2d(const Tensor& input, std::int64_t kernel, std::int64_t stride,
                  std::int64_t padding) {
  const TensorShape in = input.shape();
  require(kernel >= 1 && stride >= 1 && padding >= 0, "max_pool2d: invalid parameters");
  const std::int64_t ho = (in.height + 2 * padding - kernel) / stride + 1;
  const std::int64_t wo = (in.width + 2 * padding - kernel) / stride + 1;
  require(ho >= 1 && wo >= 1, "max_pool2d: empty output");
  Tensor out({in.channels, ho, wo});
  for (std::int64_t c = 0; c < in.channels; ++c) {
    for (std::int64_t oh = 0; oh < ho; ++oh) {
      for (std::int64_t ow = 0; ow < wo; ++ow) {
        float best = -std::numeric_limits<float>::infinity();
        for (std::int64_t kh = 0; kh < kernel; ++kh) {
          const std::int64_t ih = oh * stride - padding + kh;
          if (ih < 0 || ih >= in.height) continue;
          for (std::int64_t kw = 0; kw < kernel; ++kw) {
            const std::int64_t iw = ow * stride - padding + kw;
            if (iw < 0 || iw >= in.width) continue;
            best = std::max(best, input.at(c, ih, iw));
          }
        }
        out.at(c, oh, ow) = best;
      }
    }
  }
  return out;
}

Tensor global_avg_pool(const Tensor& input) {
  const TensorShape in = input.shape();
  Tensor out({in.channels, 1, 1});
  const std::int64_t plane = in.height * in.width;
  const float* x = input.data().data();
  for (std::int64_t c = 0; c < in.channels; ++c) {
    double sum = 0.0;
    for (std::int64_t i = 0; i < plane; ++i) sum += x[c * plane + i];
    out.at(c, 0, 0) = static_cast<float>(sum / static_cast<double>(plane));
  }
  return out;
}

std::vector<float> linear(std::span<const float> input, const WeightTensor& weights,
                          std::span<const float> bias) {
  require(weights.shape.size() == 2, "linear: weights must be (out, in)");
  const std::int64_t out_dim = weights.shape[0];
  const std::int64_t in_dim = weights.shape[1];
  require(static_cast<std::int64_t>(input.size()) == in_dim,
          "linear: input has " + std::to_string(input.size()) + " features, weights expect " +
              std::to_string(in_dim));
  require(bias.empty() || static_cast<std::int64_t>(bias.size()) == out_dim,
          "linear: bias length mismatch");
  require(static_cast<std::int64_t>(weights.values.size()) == weights.elements(),
          "linear: weight data length mismatch");
  std::vector<float> y(static_cast<std::size_t>(out_dim));
  for (std::int64_t o = 0; o < out_dim; ++o) {
    double acc = bias.empty() ? 0.0 : static_cast<double>(bias[o]);
    const float* row = weights.values.data() + o * in_dim;
    for (std::int64_t i = 0; i < in_dim; ++i) acc += static_cast<double>(row[i]) * input[i];
    y[o] = static_cast<float>(acc);
  }
  return y;
}

std::int64_t argmax(std::span<const float> values) {
  require(!values.empty(), "argmax: empty input");
  return std::distance(values.begin(), std::max_element(values.begin(), values.end()));
}

void add_inplace(Tensor& target, const Tensor& other) {
  require(target.shape() == other.shape(), "add: shape mismatch");
  auto dst = target.data();
  auto src = other.data();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

}  // namespace splitwire::kernels
