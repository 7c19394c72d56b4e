#include "fringe/nn/ops.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cstring>
#include <string>
#include <utility>
#include <vector>

namespace fringe::nn {
namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MapMat = Eigen::Map<RowMat<T>>;
template <typename T>
using CMapMat = Eigen::Map<const RowMat<T>>;

struct Shape {
  int in_ch, in_h, in_w, out_ch, k, out_h, out_w;
};

template <typename T>
Shape check_conv(const Tensor<T>& x, const Tensor<T>& w, ConvGeometry g) {
  if (w.height() != w.width() || w.height() % 2 == 0)
    throw ValidationError("conv kernel must be square and odd-sized, got " + w.shape_string());
  if (x.channels() != w.channels())
    throw ValidationError("conv channel mismatch: input " + x.shape_string() + " vs weight " + w.shape_string());
  if (g.stride < 1 || g.padding < 0) throw ValidationError("conv stride must be >= 1 and padding >= 0");
  Shape s{x.channels(), x.height(), x.width(), w.batch(), w.height(), 0, 0};
  s.out_h = conv_out_size(s.in_h, s.k, g);
  s.out_w = conv_out_size(s.in_w, s.k, g);
  if (s.out_h <= 0 || s.out_w <= 0) throw ValidationError("conv input too small for kernel: " + x.shape_string());
  return s;
}

// Column matrix (in_ch k k) x ((oy1 - oy0) out_w) for output rows [oy0, oy1) of one sample.
template <typename T>
void im2col(const T* src, const Shape& s, ConvGeometry g, int oy0, int oy1, T* col) {
  const std::size_t cols = static_cast<std::size_t>(oy1 - oy0) * s.out_w;
  for (int c = 0; c < s.in_ch; ++c) {
    const T* plane = src + static_cast<std::size_t>(c) * s.in_h * s.in_w;
    for (int ky = 0; ky < s.k; ++ky) {
      for (int kx = 0; kx < s.k; ++kx) {
        T* row = col + ((static_cast<std::size_t>(c) * s.k + ky) * s.k + kx) * cols;
        for (int oy = oy0; oy < oy1; ++oy) {
          const int iy = oy * g.stride + ky - g.padding;
          T* out = row + static_cast<std::size_t>(oy - oy0) * s.out_w;
          if (iy < 0 || iy >= s.in_h) {
            std::fill(out, out + s.out_w, T{});
            continue;
          }
          const T* in = plane + static_cast<std::size_t>(iy) * s.in_w;
          if (g.stride == 1) {
            const int shift = kx - g.padding;
            const int lo = std::max(0, -shift);
            const int hi = std::min(s.out_w, s.in_w - shift);
            std::fill(out, out + std::max(lo, 0), T{});
            if (hi > lo) std::memcpy(out + lo, in + lo + shift, sizeof(T) * static_cast<std::size_t>(hi - lo));
            std::fill(out + std::max(hi, lo), out + s.out_w, T{});
          } else {
            for (int ox = 0; ox < s.out_w; ++ox) {
              const int ix = ox * g.stride + kx - g.padding;
              out[ox] = (ix >= 0 && ix < s.in_w) ? in[ix] : T{};
            }
          }
        }
      }
    }
  }
}

template <typename T>
void col2im_add(const T* col, const Shape& s, ConvGeometry g, int oy0, int oy1, T* dst) {
  const std::size_t cols = static_cast<std::size_t>(oy1 - oy0) * s.out_w;
  for (int c = 0; c < s.in_ch; ++c) {
    T* plane = dst + static_cast<std::size_t>(c) * s.in_h * s.in_w;
    for (int ky = 0; ky < s.k; ++ky) {
      for (int kx = 0; kx < s.k; ++kx) {
        const T* row = col + ((static_cast<std::size_t>(c) * s.k + ky) * s.k + kx) * cols;
        for (int oy = oy0; oy < oy1; ++oy) {
          const int iy = oy * g.stride + ky - g.padding;
          if (iy < 0 || iy >= s.in_h) continue;
          const T* in = row + static_cast<std::size_t>(oy - oy0) * s.out_w;
          T* out = plane + static_cast<std::size_t>(iy) * s.in_w;
          if (g.stride == 1) {
            const int shift = kx - g.padding;
            const int lo = std::max(0, -shift);
            const int hi = std::min(s.out_w, s.in_w - shift);
            T* o = out + shift;
            for (int ox = lo; ox < hi; ++ox) o[ox] += in[ox];
            continue;
          }
          for (int ox = 0; ox < s.out_w; ++ox) {
            const int ix = ox * g.stride + kx - g.padding;
            if (ix >= 0 && ix < s.in_w) out[ix] += in[ox];
          }
        }
      }
    }
  }
}

template <typename T, int Slot = 0>
std::vector<T>& scratch() {
  thread_local std::vector<T> buf;
  return buf;
}

// Output rows per column block, sized so the block's column matrix stays in cache.
int block_rows(const Shape& s) {
  constexpr std::size_t kBlockElems = 64 * 1024;
  const std::size_t per_row = static_cast<std::size_t>(s.in_ch) * s.k * s.k * s.out_w;
  return static_cast<int>(std::clamp<std::size_t>(kBlockElems / std::max<std::size_t>(per_row, 1), 1, s.out_h));
}

}  // namespace

template <typename T>
Tensor<T> conv2d_forward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b, ConvGeometry g) {
  const Shape s = check_conv(x, w, g);
  if (b.size() != static_cast<std::size_t>(s.out_ch)) throw ValidationError("conv bias size mismatch");
  Tensor<T> y(x.batch(), s.out_ch, s.out_h, s.out_w);
  const int rows = s.in_ch * s.k * s.k;
  const int cols = s.out_h * s.out_w;
  const int step = block_rows(s);
  auto& col = scratch<T>();
  col.resize(static_cast<std::size_t>(rows) * step * s.out_w);
  CMapMat<T> wm(w.data(), s.out_ch, rows);
  for (int n = 0; n < x.batch(); ++n) {
    MapMat<T> ym(y.sample(n), s.out_ch, cols);
    for (int oy0 = 0; oy0 < s.out_h; oy0 += step) {
      const int oy1 = std::min(s.out_h, oy0 + step);
      const int bc = (oy1 - oy0) * s.out_w;
      im2col(x.sample(n), s, g, oy0, oy1, col.data());
      ym.middleCols(oy0 * s.out_w, bc).noalias() = wm * CMapMat<T>(col.data(), rows, bc);
    }
    for (int o = 0; o < s.out_ch; ++o) ym.row(o).array() += b[static_cast<std::size_t>(o)];
  }
  return y;
}

template <typename T>
ConvGrads<T> conv2d_backward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& upstream, ConvGeometry g) {
  const Shape s = check_conv(x, w, g);
  if (upstream.batch() != x.batch() || upstream.channels() != s.out_ch || upstream.height() != s.out_h ||
      upstream.width() != s.out_w)
    throw ValidationError("conv upstream gradient has shape " + upstream.shape_string());
  ConvGrads<T> gr{Tensor<T>(x.dims()), Tensor<T>(w.dims()), Tensor<T>(1, s.out_ch, 1, 1)};
  const int rows = s.in_ch * s.k * s.k;
  const int cols = s.out_h * s.out_w;
  const int step = block_rows(s);
  auto& col = scratch<T>();
  col.resize(static_cast<std::size_t>(rows) * step * s.out_w);
  auto& gcol = scratch<T, 1>();
  gcol.resize(col.size());
  CMapMat<T> wm(w.data(), s.out_ch, rows);
  MapMat<T> gw(gr.w.data(), s.out_ch, rows);
  for (int n = 0; n < x.batch(); ++n) {
    CMapMat<T> gy(upstream.sample(n), s.out_ch, cols);
    // Plain loop: a vectorised reduction would make the order depend on buffer alignment.
    for (int o = 0; o < s.out_ch; ++o) {
      const T* row = upstream.sample(n) + static_cast<std::size_t>(o) * cols;
      T acc{};
      for (int i = 0; i < cols; ++i) acc += row[i];
      gr.b[static_cast<std::size_t>(o)] += acc;
    }
    for (int oy0 = 0; oy0 < s.out_h; oy0 += step) {
      const int oy1 = std::min(s.out_h, oy0 + step);
      const int bc = (oy1 - oy0) * s.out_w;
      const auto gy_block = gy.middleCols(oy0 * s.out_w, bc);
      im2col(x.sample(n), s, g, oy0, oy1, col.data());
      gw.noalias() += gy_block * CMapMat<T>(col.data(), rows, bc).transpose();
      MapMat<T>(gcol.data(), rows, bc).noalias() = wm.transpose() * gy_block;
      col2im_add(gcol.data(), s, g, oy0, oy1, gr.x.sample(n));
    }
  }
  return gr;
}

template <typename T>
Tensor<T> relu_forward(const Tensor<T>& x) {
  Tensor<T> y(x.dims());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] > T{} ? x[i] : T{};
  return y;
}

template <typename T>
Tensor<T> relu_backward(const Tensor<T>& y, const Tensor<T>& upstream) {
  require_same_dims(y, upstream, "relu backward");
  Tensor<T> g(y.dims());
  for (std::size_t i = 0; i < y.size(); ++i) g[i] = y[i] > T{} ? upstream[i] : T{};
  return g;
}

template <typename T>
Tensor<T> upsample_nearest2x(const Tensor<T>& x) {
  Tensor<T> y(x.batch(), x.channels(), 2 * x.height(), 2 * x.width());
  for (int n = 0; n < x.batch(); ++n)
    for (int c = 0; c < x.channels(); ++c) {
      const T* in = x.channel(n, c);
      T* out = y.channel(n, c);
      for (int yy = 0; yy < y.height(); ++yy)
        for (int xx = 0; xx < y.width(); ++xx)
          out[static_cast<std::size_t>(yy) * y.width() + xx] = in[static_cast<std::size_t>(yy / 2) * x.width() + xx / 2];
    }
  return y;
}

template <typename T>
Tensor<T> upsample_nearest2x_backward(const Tensor<T>& upstream) {
  if (upstream.height() % 2 || upstream.width() % 2) throw ValidationError("upsample gradient must have even dims");
  Tensor<T> g(upstream.batch(), upstream.channels(), upstream.height() / 2, upstream.width() / 2);
  for (int n = 0; n < g.batch(); ++n)
    for (int c = 0; c < g.channels(); ++c) {
      const T* in = upstream.channel(n, c);
      T* out = g.channel(n, c);
      for (int yy = 0; yy < upstream.height(); ++yy)
        for (int xx = 0; xx < upstream.width(); ++xx)
          out[static_cast<std::size_t>(yy / 2) * g.width() + xx / 2] += in[static_cast<std::size_t>(yy) * upstream.width() + xx];
    }
  return g;
}

template <typename T>
Tensor<T> concat_channels(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.batch() != b.batch() || a.height() != b.height() || a.width() != b.width())
    throw ValidationError("concat: shape mismatch " + a.shape_string() + " vs " + b.shape_string());
  Tensor<T> y(a.batch(), a.channels() + b.channels(), a.height(), a.width());
  for (int n = 0; n < a.batch(); ++n) {
    std::copy(a.sample(n), a.sample(n) + a.sample_size(), y.sample(n));
    std::copy(b.sample(n), b.sample(n) + b.sample_size(), y.sample(n) + a.sample_size());
  }
  return y;
}

template <typename T>
std::pair<Tensor<T>, Tensor<T>> split_channels(const Tensor<T>& x, int first) {
  if (first < 0 || first > x.channels()) throw ValidationError("split: invalid channel count");
  Tensor<T> a(x.batch(), first, x.height(), x.width());
  Tensor<T> b(x.batch(), x.channels() - first, x.height(), x.width());
  for (int n = 0; n < x.batch(); ++n) {
    std::copy(x.sample(n), x.sample(n) + a.sample_size(), a.sample(n));
    std::copy(x.sample(n) + a.sample_size(), x.sample(n) + x.sample_size(), b.sample(n));
  }
  return {std::move(a), std::move(b)};
}

template <typename T>
LossResult<T> mse_loss(const Tensor<T>& pred, const Tensor<T>& target) {
  require_same_dims(pred, target, "mse loss");
  LossResult<T> r{0.0, Tensor<T>(pred.dims())};
  if (pred.size() == 0) return r;
  const double inv = 1.0 / static_cast<double>(pred.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = static_cast<double>(pred[i]) - static_cast<double>(target[i]);
    sum += d * d;
    r.grad[i] = static_cast<T>(2.0 * d * inv);
  }
  r.loss = sum * inv;
  return r;
}

#define FRINGE_NN_OPS(T)                                                                                  \
  template Tensor<T> conv2d_forward(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, ConvGeometry);  \
  template ConvGrads<T> conv2d_backward(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, ConvGeometry); \
  template Tensor<T> relu_forward(const Tensor<T>&);                                                      \
  template Tensor<T> relu_backward(const Tensor<T>&, const Tensor<T>&);                                   \
  template Tensor<T> upsample_nearest2x(const Tensor<T>&);                                                \
  template Tensor<T> upsample_nearest2x_backward(const Tensor<T>&);                                       \
  template Tensor<T> concat_channels(const Tensor<T>&, const Tensor<T>&);                                 \
  template std::pair<Tensor<T>, Tensor<T>> split_channels(const Tensor<T>&, int);                         \
  template LossResult<T> mse_loss(const Tensor<T>&, const Tensor<T>&);

FRINGE_NN_OPS(float)
FRINGE_NN_OPS(double)

}  // namespace fringe::nn
