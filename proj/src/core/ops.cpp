// Copyright 2026 The Brain Diffuser Authors
// SPDX-License-Identifier: Apache-2.0
#include "braindiff/core/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "braindiff/core/error.hpp"
#include "braindiff/simd/kernels.hpp"

namespace bd::ops {
namespace {

// Parent i when it wants a gradient, else null.
Node* Target(Node& self, std::size_t i) {
  Node* p = self.parents[i].get();
  return (p && p->requires_grad) ? p : nullptr;
}

void RequireSameShape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape())
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_string(a.shape()) +
                         " vs " + shape_string(b.shape()));
}

void RequireRank(const Tensor& x, std::size_t rank, const char* op) {
  if (x.rank() != rank)
    throw DimensionError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got " +
                         shape_string(x.shape()));
}

template <typename Fwd, typename Bwd>
Tensor Unary(const Tensor& x, Fwd fwd, Bwd bwd) {
  std::vector<double> out(x.numel());
  const auto in = x.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = fwd(in[i]);
  return make_result(x.shape(), std::move(out), {x}, [bwd](Node& self) {
    if (Node* p = Target(self, 0)) {
      auto& g = p->ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i)
        g[i] += self.grad[i] * bwd(p->value[i], self.value[i]);
    }
  });
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  RequireSameShape(a, b, "add");
  std::vector<double> out(a.data().begin(), a.data().end());
  const auto bd = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bd[i];
  return make_result(a.shape(), std::move(out), {a, b}, [](Node& self) {
    for (std::size_t k = 0; k < 2; ++k)
      if (Node* p = Target(self, k)) simd::kernels().axpy(1.0, self.grad.data(), p->ensure_grad().data(), self.grad.size());
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  RequireSameShape(a, b, "sub");
  std::vector<double> out(a.data().begin(), a.data().end());
  const auto bd = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= bd[i];
  return make_result(a.shape(), std::move(out), {a, b}, [](Node& self) {
    const auto& k = simd::kernels();
    if (Node* p = Target(self, 0)) k.axpy(1.0, self.grad.data(), p->ensure_grad().data(), self.grad.size());
    if (Node* p = Target(self, 1)) k.axpy(-1.0, self.grad.data(), p->ensure_grad().data(), self.grad.size());
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  RequireSameShape(a, b, "mul");
  std::vector<double> out(a.numel());
  const auto ad = a.data();
  const auto bd = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = ad[i] * bd[i];
  return make_result(a.shape(), std::move(out), {a, b}, [](Node& self) {
    Node* pa = Target(self, 0);
    Node* pb = Target(self, 1);
    const auto& av = self.parents[0]->value;
    const auto& bv = self.parents[1]->value;
    if (pa) {
      auto& g = pa->ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * bv[i];
    }
    if (pb) {
      auto& g = pb->ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * av[i];
    }
  });
}

Tensor scale(const Tensor& a, double s) {
  std::vector<double> out(a.data().begin(), a.data().end());
  simd::kernels().scale(s, out.data(), out.size());
  return make_result(a.shape(), std::move(out), {a}, [s](Node& self) {
    if (Node* p = Target(self, 0)) simd::kernels().axpy(s, self.grad.data(), p->ensure_grad().data(), self.grad.size());
  });
}

Tensor add_channel(const Tensor& x, const Tensor& v) {
  if (x.rank() < 1 || v.numel() != x.dim(0))
    throw DimensionError("add_channel: " + shape_string(x.shape()) + " with vector of " +
                         std::to_string(v.numel()));
  const std::size_t channels = x.dim(0);
  const std::size_t inner = x.numel() / std::max<std::size_t>(channels, 1);
  std::vector<double> out(x.data().begin(), x.data().end());
  const auto vd = v.data();
  for (std::size_t c = 0; c < channels; ++c)
    for (std::size_t i = 0; i < inner; ++i) out[c * inner + i] += vd[c];
  return make_result(x.shape(), std::move(out), {x, v}, [channels, inner](Node& self) {
    const auto& k = simd::kernels();
    if (Node* p = Target(self, 0)) k.axpy(1.0, self.grad.data(), p->ensure_grad().data(), self.grad.size());
    if (Node* p = Target(self, 1)) {
      auto& g = p->ensure_grad();
      for (std::size_t c = 0; c < channels; ++c) g[c] += k.sum(self.grad.data() + c * inner, inner);
    }
  });
}

Tensor relu(const Tensor& x) {
  return Unary(x, [](double v) { return v > 0.0 ? v : 0.0; },
               [](double in, double) { return in > 0.0 ? 1.0 : 0.0; });
}

Tensor silu(const Tensor& x) {
  return Unary(x, [](double v) { return v / (1.0 + std::exp(-v)); },
               [](double in, double) {
                 const double s = 1.0 / (1.0 + std::exp(-in));
                 return s * (1.0 + in * (1.0 - s));
               });
}

Tensor sigmoid(const Tensor& x) {
  return Unary(x, [](double v) { return 1.0 / (1.0 + std::exp(-v)); },
               [](double, double out) { return out * (1.0 - out); });
}

Tensor reshape(const Tensor& x, Shape shape) {
  if (shape_numel(shape) != x.numel())
    throw DimensionError("reshape: " + shape_string(x.shape()) + " -> " + shape_string(shape));
  std::vector<double> out(x.data().begin(), x.data().end());
  return make_result(std::move(shape), std::move(out), {x}, [](Node& self) {
    if (Node* p = Target(self, 0)) simd::kernels().axpy(1.0, self.grad.data(), p->ensure_grad().data(), self.grad.size());
  });
}

Tensor concat0(const Tensor& a, const Tensor& b) {
  if (a.rank() != b.rank() || a.rank() == 0 ||
      !std::equal(a.shape().begin() + 1, a.shape().end(), b.shape().begin() + 1))
    throw DimensionError("concat0: " + shape_string(a.shape()) + " with " + shape_string(b.shape()));
  Shape shape = a.shape();
  shape[0] += b.dim(0);
  std::vector<double> out;
  out.reserve(a.numel() + b.numel());
  out.insert(out.end(), a.data().begin(), a.data().end());
  out.insert(out.end(), b.data().begin(), b.data().end());
  const std::size_t split = a.numel();
  return make_result(std::move(shape), std::move(out), {a, b}, [split](Node& self) {
    const auto& k = simd::kernels();
    if (Node* p = Target(self, 0)) k.axpy(1.0, self.grad.data(), p->ensure_grad().data(), split);
    if (Node* p = Target(self, 1))
      k.axpy(1.0, self.grad.data() + split, p->ensure_grad().data(), self.grad.size() - split);
  });
}

Tensor row(const Tensor& x, std::size_t i) {
  RequireRank(x, 2, "row");
  if (i >= x.dim(0)) throw IndexError("row: index " + std::to_string(i) + " out of range");
  const std::size_t cols = x.dim(1);
  std::vector<double> out(x.data().begin() + i * cols, x.data().begin() + (i + 1) * cols);
  return make_result({1, cols}, std::move(out), {x}, [i, cols](Node& self) {
    if (Node* p = Target(self, 0)) simd::kernels().axpy(1.0, self.grad.data(), p->ensure_grad().data() + i * cols, cols);
  });
}

Tensor transpose(const Tensor& x) {
  RequireRank(x, 2, "transpose");
  const std::size_t r = x.dim(0), c = x.dim(1);
  std::vector<double> out(x.numel());
  const auto in = x.data();
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out[j * r + i] = in[i * c + j];
  return make_result({c, r}, std::move(out), {x}, [r, c](Node& self) {
    if (Node* p = Target(self, 0)) {
      auto& g = p->ensure_grad();
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) g[i * c + j] += self.grad[j * r + i];
    }
  });
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  RequireRank(a, 2, "matmul");
  RequireRank(b, 2, "matmul");
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  if (b.dim(0) != k)
    throw DimensionError("matmul: " + shape_string(a.shape()) + " x " + shape_string(b.shape()));
  std::vector<double> out(m * n, 0.0);
  simd::kernels().gemm(m, n, k, a.data().data(), k, 1, b.data().data(), n, out.data(), n);
  return make_result({m, n}, std::move(out), {a, b}, [m, k, n](Node& self) {
    const auto& kt = simd::kernels();
    // dA = dC * B^T ; dB = A^T * dC
    if (Node* p = Target(self, 0))
      kt.gemm_nt(m, k, n, self.grad.data(), n, self.parents[1]->value.data(), n,
                 p->ensure_grad().data(), k);
    if (Node* p = Target(self, 1))
      kt.gemm(k, n, m, self.parents[0]->value.data(), 1, k, self.grad.data(), n,
              p->ensure_grad().data(), n);
  });
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
  RequireRank(a, 2, "matmul_nt");
  RequireRank(b, 2, "matmul_nt");
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(0);
  if (b.dim(1) != k)
    throw DimensionError("matmul_nt: " + shape_string(a.shape()) + " x " +
                         shape_string(b.shape()) + "^T");
  std::vector<double> out(m * n, 0.0);
  simd::kernels().gemm_nt(m, n, k, a.data().data(), k, b.data().data(), k, out.data(), n);
  return make_result({m, n}, std::move(out), {a, b}, [m, k, n](Node& self) {
    const auto& kt = simd::kernels();
    // C = A B^T: dA = dC * B ; dB = dC^T * A
    if (Node* p = Target(self, 0))
      kt.gemm(m, k, n, self.grad.data(), n, 1, self.parents[1]->value.data(), k,
              p->ensure_grad().data(), k);
    if (Node* p = Target(self, 1))
      kt.gemm(n, k, m, self.grad.data(), 1, n, self.parents[0]->value.data(), k,
              p->ensure_grad().data(), k);
  });
}

Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  RequireRank(x, 2, "linear");
  RequireRank(weight, 2, "linear");
  const std::size_t n = x.dim(0), in = x.dim(1), out_dim = weight.dim(0);
  if (weight.dim(1) != in)
    throw DimensionError("linear: input " + shape_string(x.shape()) + " vs weight " +
                         shape_string(weight.shape()));
  if (bias.defined() && bias.numel() != out_dim)
    throw DimensionError("linear: bias has " + std::to_string(bias.numel()) + " values, need " +
                         std::to_string(out_dim));
  std::vector<double> out(n * out_dim, 0.0);
  if (bias.defined())
    for (std::size_t r = 0; r < n; ++r)
      std::copy(bias.data().begin(), bias.data().end(), out.begin() + r * out_dim);
  simd::kernels().gemm_nt(n, out_dim, in, x.data().data(), in, weight.data().data(), in,
                          out.data(), out_dim);
  return make_result({n, out_dim}, std::move(out), {x, weight, bias}, [n, in, out_dim](Node& self) {
    const auto& kt = simd::kernels();
    if (Node* p = Target(self, 0))
      kt.gemm(n, in, out_dim, self.grad.data(), out_dim, 1, self.parents[1]->value.data(), in,
              p->ensure_grad().data(), in);
    if (Node* p = Target(self, 1))
      kt.gemm(out_dim, in, n, self.grad.data(), 1, out_dim, self.parents[0]->value.data(), in,
              p->ensure_grad().data(), in);
    if (self.parents[2])
      if (Node* p = Target(self, 2)) {
        auto& g = p->ensure_grad();
        for (std::size_t r = 0; r < n; ++r) kt.axpy(1.0, self.grad.data() + r * out_dim, g.data(), out_dim);
      }
  });
}

namespace {

struct ConvGeometry {
  std::size_t cin, d, h, w;
  std::size_t cout, cin_g, cout_g, groups;
  std::size_t kd, kh, kw;
  std::size_t od, oh, ow;
  ConvSpec spec;

  std::size_t kvol() const { return cin_g * kd * kh * kw; }
  std::size_t plane() const { return oh * ow; }
  bool pointwise() const {
    return kd == 1 && kh == 1 && kw == 1 && spec.stride == std::array<std::size_t, 3>{1, 1, 1} &&
           spec.pad == std::array<std::size_t, 3>{0, 0, 0};
  }
};

std::size_t OutExtent(std::size_t in, std::size_t k, std::size_t stride, std::size_t pad,
                      const char* axis) {
  if (stride == 0) throw DimensionError("conv3d: zero stride");
  if (in + 2 * pad < k)
    throw DimensionError(std::string("conv3d: kernel larger than padded input along ") + axis);
  return (in + 2 * pad - k) / stride + 1;
}

// Column buffer for one group and one output depth slice:
// col[(ci, a, b, c), (y, x)] = input[g*cin_g + ci, z*sd - pd + a, ...]
void Im2ColSlice(const ConvGeometry& g, const double* x, std::size_t group, std::size_t oz,
                 double* col) {
  const auto& s = g.spec;
  const std::size_t plane = g.plane();
  std::size_t row = 0;
  for (std::size_t ci = 0; ci < g.cin_g; ++ci) {
    const double* xc = x + (group * g.cin_g + ci) * g.d * g.h * g.w;
    for (std::size_t a = 0; a < g.kd; ++a) {
      const long iz = static_cast<long>(oz * s.stride[0] + a) - static_cast<long>(s.pad[0]);
      for (std::size_t b = 0; b < g.kh; ++b)
        for (std::size_t c = 0; c < g.kw; ++c, ++row) {
          double* dst = col + row * plane;
          if (iz < 0 || iz >= static_cast<long>(g.d)) {
            std::fill(dst, dst + plane, 0.0);
            continue;
          }
          const double* xz = xc + static_cast<std::size_t>(iz) * g.h * g.w;
          for (std::size_t y = 0; y < g.oh; ++y) {
            const long iy = static_cast<long>(y * s.stride[1] + b) - static_cast<long>(s.pad[1]);
            double* drow = dst + y * g.ow;
            if (iy < 0 || iy >= static_cast<long>(g.h)) {
              std::fill(drow, drow + g.ow, 0.0);
              continue;
            }
            const double* xrow = xz + static_cast<std::size_t>(iy) * g.w;
            for (std::size_t xo = 0; xo < g.ow; ++xo) {
              const long ix = static_cast<long>(xo * s.stride[2] + c) - static_cast<long>(s.pad[2]);
              drow[xo] = (ix < 0 || ix >= static_cast<long>(g.w)) ? 0.0 : xrow[ix];
            }
          }
        }
    }
  }
}

void Col2ImSlice(const ConvGeometry& g, const double* col, std::size_t group, std::size_t oz,
                 double* dx) {
  const auto& s = g.spec;
  const std::size_t plane = g.plane();
  std::size_t row = 0;
  for (std::size_t ci = 0; ci < g.cin_g; ++ci) {
    double* xc = dx + (group * g.cin_g + ci) * g.d * g.h * g.w;
    for (std::size_t a = 0; a < g.kd; ++a) {
      const long iz = static_cast<long>(oz * s.stride[0] + a) - static_cast<long>(s.pad[0]);
      for (std::size_t b = 0; b < g.kh; ++b)
        for (std::size_t c = 0; c < g.kw; ++c, ++row) {
          if (iz < 0 || iz >= static_cast<long>(g.d)) continue;
          const double* src = col + row * plane;
          double* xz = xc + static_cast<std::size_t>(iz) * g.h * g.w;
          for (std::size_t y = 0; y < g.oh; ++y) {
            const long iy = static_cast<long>(y * s.stride[1] + b) - static_cast<long>(s.pad[1]);
            if (iy < 0 || iy >= static_cast<long>(g.h)) continue;
            double* xrow = xz + static_cast<std::size_t>(iy) * g.w;
            const double* srow = src + y * g.ow;
            for (std::size_t xo = 0; xo < g.ow; ++xo) {
              const long ix = static_cast<long>(xo * s.stride[2] + c) - static_cast<long>(s.pad[2]);
              if (ix >= 0 && ix < static_cast<long>(g.w)) xrow[ix] += srow[xo];
            }
          }
        }
    }
  }
}

}  // namespace

Tensor conv3d(const Tensor& x, const Tensor& weight, const Tensor& bias, const ConvSpec& spec) {
  RequireRank(x, 4, "conv3d input");
  RequireRank(weight, 5, "conv3d weight");
  ConvGeometry g{};
  g.spec = spec;
  g.cin = x.dim(0), g.d = x.dim(1), g.h = x.dim(2), g.w = x.dim(3);
  g.cout = weight.dim(0), g.cin_g = weight.dim(1);
  g.kd = weight.dim(2), g.kh = weight.dim(3), g.kw = weight.dim(4);
  g.groups = spec.groups;
  if (g.groups == 0 || g.cin % g.groups || g.cout % g.groups || g.cin / g.groups != g.cin_g)
    throw DimensionError("conv3d: input has " + std::to_string(g.cin) + " channels, weight " +
                         shape_string(weight.shape()) + " with " + std::to_string(g.groups) +
                         " groups");
  if (bias.defined() && bias.numel() != g.cout)
    throw DimensionError("conv3d: bias size " + std::to_string(bias.numel()) + " != " +
                         std::to_string(g.cout));
  g.cout_g = g.cout / g.groups;
  g.od = OutExtent(g.d, g.kd, spec.stride[0], spec.pad[0], "depth");
  g.oh = OutExtent(g.h, g.kh, spec.stride[1], spec.pad[1], "height");
  g.ow = OutExtent(g.w, g.kw, spec.stride[2], spec.pad[2], "width");

  const auto& kt = simd::kernels();
  const std::size_t plane = g.plane();
  const std::size_t out_vol = g.od * plane;
  const std::size_t in_vol = g.d * g.h * g.w;
  const std::size_t kvol = g.kvol();
  std::vector<double> out(g.cout * out_vol, 0.0);
  if (bias.defined())
    for (std::size_t c = 0; c < g.cout; ++c)
      std::fill(out.begin() + c * out_vol, out.begin() + (c + 1) * out_vol, bias[c]);

  const double* xd = x.data().data();
  const double* wd = weight.data().data();
  if (g.pointwise()) {
    for (std::size_t grp = 0; grp < g.groups; ++grp)
      kt.gemm(g.cout_g, in_vol, g.cin_g, wd + grp * g.cout_g * kvol, kvol, 1,
              xd + grp * g.cin_g * in_vol, in_vol, out.data() + grp * g.cout_g * out_vol, out_vol);
  } else {
    std::vector<double> col(kvol * plane);
    for (std::size_t grp = 0; grp < g.groups; ++grp)
      for (std::size_t oz = 0; oz < g.od; ++oz) {
        Im2ColSlice(g, xd, grp, oz, col.data());
        kt.gemm(g.cout_g, plane, kvol, wd + grp * g.cout_g * kvol, kvol, 1, col.data(), plane,
                out.data() + grp * g.cout_g * out_vol + oz * plane, out_vol);
      }
  }

  return make_result({g.cout, g.od, g.oh, g.ow}, std::move(out), {x, weight, bias}, [g](Node& self) {
    const auto& kt = simd::kernels();
    const std::size_t plane = g.plane();
    const std::size_t out_vol = g.od * plane;
    const std::size_t in_vol = g.d * g.h * g.w;
    const std::size_t kvol = g.kvol();
    const double* xd = self.parents[0]->value.data();
    const double* wd = self.parents[1]->value.data();
    const double* gy = self.grad.data();
    Node* px = Target(self, 0);
    Node* pw = Target(self, 1);
    Node* pb = self.parents[2] ? Target(self, 2) : nullptr;

    if (pb) {
      auto& gb = pb->ensure_grad();
      for (std::size_t c = 0; c < g.cout; ++c) gb[c] += kt.sum(gy + c * out_vol, out_vol);
    }
    if (!px && !pw) return;
    double* gw = pw ? pw->ensure_grad().data() : nullptr;
    double* gx = px ? px->ensure_grad().data() : nullptr;

    if (g.pointwise()) {
      for (std::size_t grp = 0; grp < g.groups; ++grp) {
        const double* gyg = gy + grp * g.cout_g * out_vol;
        if (gw)
          kt.gemm_nt(g.cout_g, g.cin_g, in_vol, gyg, out_vol, xd + grp * g.cin_g * in_vol, in_vol,
                     gw + grp * g.cout_g * kvol, kvol);
        if (gx)
          kt.gemm(g.cin_g, in_vol, g.cout_g, wd + grp * g.cout_g * kvol, 1, kvol, gyg, out_vol,
                  gx + grp * g.cin_g * in_vol, in_vol);
      }
      return;
    }

    std::vector<double> col(kvol * plane);
    std::vector<double> dcol(gx ? kvol * plane : 0);
    for (std::size_t grp = 0; grp < g.groups; ++grp)
      for (std::size_t oz = 0; oz < g.od; ++oz) {
        const double* gyz = gy + grp * g.cout_g * out_vol + oz * plane;
        if (gw) {
          Im2ColSlice(g, xd, grp, oz, col.data());
          kt.gemm_nt(g.cout_g, kvol, plane, gyz, out_vol, col.data(), plane,
                     gw + grp * g.cout_g * kvol, kvol);
        }
        if (gx) {
          std::fill(dcol.begin(), dcol.end(), 0.0);
          kt.gemm(kvol, plane, g.cout_g, wd + grp * g.cout_g * kvol, 1, kvol, gyz, out_vol,
                  dcol.data(), plane);
          Col2ImSlice(g, dcol.data(), grp, oz, gx);
        }
      }
  });
}

Tensor instance_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps) {
  if (x.rank() < 2) throw DimensionError("instance_norm: need (C, ...), got " + shape_string(x.shape()));
  const std::size_t channels = x.dim(0);
  const std::size_t inner = x.numel() / channels;
  const bool affine = gamma.defined();
  if (affine != beta.defined()) throw ArgumentError("instance_norm: gamma and beta must both be set");
  if (affine && (gamma.numel() != channels || beta.numel() != channels))
    throw DimensionError("instance_norm: affine parameters must have " + std::to_string(channels) +
                         " entries");
  const auto& kt = simd::kernels();
  std::vector<double> xhat(x.numel());
  std::vector<double> inv_std(channels);
  std::vector<double> out(x.numel());
  const double* xd = x.data().data();
  for (std::size_t c = 0; c < channels; ++c) {
    const double* xc = xd + c * inner;
    const double mu = kt.sum(xc, inner) / static_cast<double>(inner);
    const double var = kt.sum_sq_dev(xc, mu, inner) / static_cast<double>(inner);
    const double is = 1.0 / std::sqrt(var + eps);
    inv_std[c] = is;
    const double gm = affine ? gamma[c] : 1.0;
    const double bt = affine ? beta[c] : 0.0;
    for (std::size_t i = 0; i < inner; ++i) {
      const double h = (xc[i] - mu) * is;
      xhat[c * inner + i] = h;
      out[c * inner + i] = gm * h + bt;
    }
  }
  return make_result(x.shape(), std::move(out), {x, gamma, beta},
                     [channels, inner, affine, xhat = std::move(xhat),
                      inv_std = std::move(inv_std)](Node& self) {
    const auto& kt = simd::kernels();
    const double* gy = self.grad.data();
    Node* px = Target(self, 0);
    Node* pg = affine ? Target(self, 1) : nullptr;
    Node* pb = affine ? Target(self, 2) : nullptr;
    const double n = static_cast<double>(inner);
    for (std::size_t c = 0; c < channels; ++c) {
      const double* gyc = gy + c * inner;
      const double* hc = xhat.data() + c * inner;
      const double sum_gy = kt.sum(gyc, inner);
      const double sum_gyh = kt.dot(gyc, hc, inner);
      if (pg) pg->ensure_grad()[c] += sum_gyh;
      if (pb) pb->ensure_grad()[c] += sum_gy;
      if (px) {
        const double gm = affine ? self.parents[1]->value[c] : 1.0;
        double* gx = px->ensure_grad().data() + c * inner;
        const double k = gm * inv_std[c];
        const double mean_g = sum_gy / n;
        const double mean_gh = sum_gyh / n;
        for (std::size_t i = 0; i < inner; ++i) gx[i] += k * (gyc[i] - mean_g - hc[i] * mean_gh);
      }
    }
  });
}

namespace {

std::size_t BinStart(std::size_t i, std::size_t in, std::size_t out) { return (i * in) / out; }
std::size_t BinEnd(std::size_t i, std::size_t in, std::size_t out) {
  return ((i + 1) * in + out - 1) / out;
}

}  // namespace

Tensor adaptive_avg_pool3d(const Tensor& x, std::array<std::size_t, 3> out_ext) {
  RequireRank(x, 4, "adaptive_avg_pool3d");
  const std::size_t c = x.dim(0), d = x.dim(1), h = x.dim(2), w = x.dim(3);
  const auto [od, oh, ow] = out_ext;
  if (od == 0 || oh == 0 || ow == 0) throw DimensionError("adaptive_avg_pool3d: zero output extent");
  std::vector<double> out(c * od * oh * ow, 0.0);
  const auto xd = x.data();
  for (std::size_t ch = 0; ch < c; ++ch)
    for (std::size_t a = 0; a < od; ++a)
      for (std::size_t b = 0; b < oh; ++b)
        for (std::size_t e = 0; e < ow; ++e) {
          double acc = 0.0;
          const std::size_t z0 = BinStart(a, d, od), z1 = BinEnd(a, d, od);
          const std::size_t y0 = BinStart(b, h, oh), y1 = BinEnd(b, h, oh);
          const std::size_t x0 = BinStart(e, w, ow), x1 = BinEnd(e, w, ow);
          for (std::size_t z = z0; z < z1; ++z)
            for (std::size_t y = y0; y < y1; ++y)
              for (std::size_t xx = x0; xx < x1; ++xx) acc += xd[((ch * d + z) * h + y) * w + xx];
          out[((ch * od + a) * oh + b) * ow + e] =
              acc / static_cast<double>((z1 - z0) * (y1 - y0) * (x1 - x0));
        }
  return make_result({c, od, oh, ow}, std::move(out), {x}, [c, d, h, w, od, oh, ow](Node& self) {
    Node* p = Target(self, 0);
    if (!p) return;
    auto& g = p->ensure_grad();
    for (std::size_t ch = 0; ch < c; ++ch)
      for (std::size_t a = 0; a < od; ++a)
        for (std::size_t b = 0; b < oh; ++b)
          for (std::size_t e = 0; e < ow; ++e) {
            const std::size_t z0 = BinStart(a, d, od), z1 = BinEnd(a, d, od);
            const std::size_t y0 = BinStart(b, h, oh), y1 = BinEnd(b, h, oh);
            const std::size_t x0 = BinStart(e, w, ow), x1 = BinEnd(e, w, ow);
            const double share = self.grad[((ch * od + a) * oh + b) * ow + e] /
                                 static_cast<double>((z1 - z0) * (y1 - y0) * (x1 - x0));
            for (std::size_t z = z0; z < z1; ++z)
              for (std::size_t y = y0; y < y1; ++y)
                for (std::size_t xx = x0; xx < x1; ++xx) g[((ch * d + z) * h + y) * w + xx] += share;
          }
  });
}

Tensor resize_nearest3d(const Tensor& x, std::array<std::size_t, 3> out_ext) {
  RequireRank(x, 4, "resize_nearest3d");
  const std::size_t c = x.dim(0), d = x.dim(1), h = x.dim(2), w = x.dim(3);
  const auto [od, oh, ow] = out_ext;
  // Flat source index for every output position, shared by backward.
  std::vector<std::size_t> src(c * od * oh * ow);
  std::vector<double> out(src.size());
  const auto xd = x.data();
  for (std::size_t ch = 0; ch < c; ++ch)
    for (std::size_t a = 0; a < od; ++a)
      for (std::size_t b = 0; b < oh; ++b)
        for (std::size_t e = 0; e < ow; ++e) {
          const std::size_t o = ((ch * od + a) * oh + b) * ow + e;
          const std::size_t s = ((ch * d + a * d / od) * h + b * h / oh) * w + e * w / ow;
          src[o] = s;
          out[o] = xd[s];
        }
  return make_result({c, od, oh, ow}, std::move(out), {x}, [src = std::move(src)](Node& self) {
    if (Node* p = Target(self, 0)) {
      auto& g = p->ensure_grad();
      for (std::size_t o = 0; o < src.size(); ++o) g[src[o]] += self.grad[o];
    }
  });
}

Tensor softmax_rows(const Tensor& x) {
  RequireRank(x, 2, "softmax_rows");
  const std::size_t r = x.dim(0), c = x.dim(1);
  std::vector<double> out(x.numel());
  const auto xd = x.data();
  for (std::size_t i = 0; i < r; ++i) {
    const double* xi = xd.data() + i * c;
    const double mx = *std::max_element(xi, xi + c);
    double z = 0.0;
    for (std::size_t j = 0; j < c; ++j) z += (out[i * c + j] = std::exp(xi[j] - mx));
    for (std::size_t j = 0; j < c; ++j) out[i * c + j] /= z;
  }
  return make_result(x.shape(), std::move(out), {x}, [r, c](Node& self) {
    if (Node* p = Target(self, 0)) {
      auto& g = p->ensure_grad();
      for (std::size_t i = 0; i < r; ++i) {
        const double* yi = self.value.data() + i * c;
        const double* gi = self.grad.data() + i * c;
        double dotv = 0.0;
        for (std::size_t j = 0; j < c; ++j) dotv += gi[j] * yi[j];
        for (std::size_t j = 0; j < c; ++j) g[i * c + j] += yi[j] * (gi[j] - dotv);
      }
    }
  });
}

Tensor sum(const Tensor& x) {
  const double s = simd::kernels().sum(x.data().data(), x.numel());
  return make_result({1}, {s}, {x}, [](Node& self) {
    if (Node* p = Target(self, 0)) {
      auto& g = p->ensure_grad();
      for (auto& v : g) v += self.grad[0];
    }
  });
}

Tensor mean(const Tensor& x) { return scale(sum(x), 1.0 / static_cast<double>(x.numel())); }

Tensor mse(const Tensor& a, const Tensor& b) {
  RequireSameShape(a, b, "mse");
  const std::size_t n = a.numel();
  std::vector<double> diff(n);
  for (std::size_t i = 0; i < n; ++i) diff[i] = a[i] - b[i];
  const double loss = simd::kernels().dot(diff.data(), diff.data(), n) / static_cast<double>(n);
  return make_result({1}, {loss}, {a, b}, [diff = std::move(diff)](Node& self) {
    const double k = 2.0 * self.grad[0] / static_cast<double>(diff.size());
    const auto& kt = simd::kernels();
    if (Node* p = Target(self, 0)) kt.axpy(k, diff.data(), p->ensure_grad().data(), diff.size());
    if (Node* p = Target(self, 1)) kt.axpy(-k, diff.data(), p->ensure_grad().data(), diff.size());
  });
}

Tensor l1(const Tensor& a, const Tensor& b) {
  RequireSameShape(a, b, "l1");
  const std::size_t n = a.numel();
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += std::abs(a[i] - b[i]);
  return make_result({1}, {acc / static_cast<double>(n)}, {a, b}, [n](Node& self) {
    const double k = self.grad[0] / static_cast<double>(n);
    const auto& av = self.parents[0]->value;
    const auto& bv = self.parents[1]->value;
    Node* pa = Target(self, 0);
    Node* pb = Target(self, 1);
    for (std::size_t i = 0; i < n; ++i) {
      const double d = av[i] - bv[i];
      const double s = d > 0.0 ? k : (d < 0.0 ? -k : 0.0);
      if (pa) pa->ensure_grad()[i] += s;
      if (pb) pb->ensure_grad()[i] -= s;
    }
  });
}

Tensor symmetrize_zero_diag(const Tensor& x) {
  RequireRank(x, 2, "symmetrize_zero_diag");
  const std::size_t n = x.dim(0);
  if (x.dim(1) != n) throw DimensionError("symmetrize_zero_diag: not square " + shape_string(x.shape()));
  std::vector<double> out(n * n, 0.0);
  const auto xd = x.data();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) out[i * n + j] = 0.5 * (xd[i * n + j] + xd[j * n + i]);
  return make_result({n, n}, std::move(out), {x}, [n](Node& self) {
    if (Node* p = Target(self, 0)) {
      auto& g = p->ensure_grad();
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          if (i != j) g[i * n + j] += 0.5 * (self.grad[i * n + j] + self.grad[j * n + i]);
    }
  });
}

Tensor gcn_normalize(const Tensor& a) {
  RequireRank(a, 2, "gcn_normalize");
  const std::size_t n = a.dim(0);
  if (a.dim(1) != n) throw DimensionError("gcn_normalize: not square " + shape_string(a.shape()));
  const auto ad = a.data();
  std::vector<double> deg(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) deg[i] += ad[i * n + j];
    deg[i] += 1.0;
  }
  for (std::size_t i = 0; i < n; ++i)
    if (!(deg[i] > 0.0))
      throw ValidationError("gcn_normalize: non-positive degree at node " + std::to_string(i));
  std::vector<double> s(n);
  for (std::size_t i = 0; i < n; ++i) s[i] = 1.0 / std::sqrt(deg[i]);
  std::vector<double> out(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      // (s_i s_j) first: the product is order-independent, so symmetric input
      // yields an exactly symmetric result.
      out[i * n + j] = (s[i] * s[j]) * (ad[i * n + j] + (i == j ? 1.0 : 0.0));
  return make_result({n, n}, std::move(out), {a}, [n, deg = std::move(deg), s = std::move(s)](Node& self) {
    Node* p = Target(self, 0);
    if (!p) return;
    const auto& av = self.parents[0]->value;
    const double* gy = self.grad.data();
    // out_ij = s_i t_ij s_j with t = A + I and s_i = deg_i^{-1/2}
    std::vector<double> gs(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const double t = av[i * n + j] + (i == j ? 1.0 : 0.0);
        const double gt = gy[i * n + j] * t;
        gs[i] += gt * s[j];
        gs[j] += gt * s[i];
      }
    std::vector<double> gdeg(n);
    for (std::size_t i = 0; i < n; ++i) gdeg[i] = gs[i] * (-0.5) * s[i] / deg[i];
    auto& g = p->ensure_grad();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) g[i * n + j] += gy[i * n + j] * s[i] * s[j] + gdeg[i];
  });
}

Tensor nll_floor(const Tensor& probs, std::size_t label, double floor) {
  if (label >= probs.numel()) throw IndexError("nll_floor: label " + std::to_string(label) + " out of range");
  const double p = probs[label];
  const bool clamped = !(p > floor);
  const double loss = -std::log(clamped ? floor : p);
  return make_result({1}, {loss}, {probs}, [label, clamped](Node& self) {
    if (clamped) return;
    if (Node* pp = Target(self, 0)) pp->ensure_grad()[label] += -self.grad[0] / pp->value[label];
  });
}

}  // namespace bd::ops
