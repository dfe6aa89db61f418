#include "forcediff/core/tape.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <atomic>
#include <cmath>

namespace forcediff {
namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatMap = Eigen::Map<RowMat<T>>;
template <typename T>
using ConstMatMap = Eigen::Map<const RowMat<T>>;

std::atomic<std::uint64_t> next_tape_id{1};

struct ConvDims {
  std::size_t batch, c_in, length, c_out, kernel, l_out;
  bool unbatched;
};

template <typename T>
ConvDims conv_dims(const Array<T>& x, const Array<T>& w, const Array<T>& b, std::size_t stride,
                   std::size_t padding) {
  if (stride == 0) throw ConfigError("conv1d: stride must be positive");
  if (w.rank() != 3) throw DimensionError("conv1d: kernels must be rank 3, got " + shape_string(w.shape()));
  ConvDims d{};
  if (x.rank() == 2) {
    d.batch = 1;
    d.c_in = x.dim(0);
    d.length = x.dim(1);
    d.unbatched = true;
  } else if (x.rank() == 3) {
    d.batch = x.dim(0);
    d.c_in = x.dim(1);
    d.length = x.dim(2);
    d.unbatched = false;
  } else {
    throw DimensionError("conv1d: input must be [C,L] or [B,C,L], got " + shape_string(x.shape()));
  }
  d.c_out = w.dim(0);
  d.kernel = w.dim(2);
  if (w.dim(1) != d.c_in) {
    throw DimensionError("conv1d: kernel expects " + std::to_string(w.dim(1)) +
                         " input channels, input has " + std::to_string(d.c_in));
  }
  if (d.kernel % 2 == 0) throw DimensionError("conv1d: kernel size must be odd");
  require_shape(b.shape(), Shape{d.c_out}, "conv1d bias");
  if (d.length + 2 * padding < d.kernel) {
    throw DimensionError("conv1d: padded length shorter than kernel");
  }
  d.l_out = conv1d_output_length(d.length, d.kernel, stride, padding);
  return d;
}

// col[(ci*k + j), (b*l_out + l)] = x[b, ci, l*stride + j - padding], zero outside.
template <typename T>
Array<T> im2col(const Array<T>& x, const ConvDims& d, std::size_t stride, std::size_t padding) {
  const std::size_t cols = d.batch * d.l_out;
  Array<T> col(Shape{d.c_in * d.kernel, cols});
  const T* xs = x.data().data();
  T* out = col.data().data();
  for (std::size_t ci = 0; ci < d.c_in; ++ci) {
    for (std::size_t j = 0; j < d.kernel; ++j) {
      T* row = out + (ci * d.kernel + j) * cols;
      for (std::size_t b = 0; b < d.batch; ++b) {
        const T* src = xs + (b * d.c_in + ci) * d.length;
        T* dst = row + b * d.l_out;
        for (std::size_t l = 0; l < d.l_out; ++l) {
          const std::ptrdiff_t pos = static_cast<std::ptrdiff_t>(l * stride + j) -
                                     static_cast<std::ptrdiff_t>(padding);
          dst[l] = (pos >= 0 && pos < static_cast<std::ptrdiff_t>(d.length)) ? src[pos] : T{0};
        }
      }
    }
  }
  return col;
}

template <typename T>
Array<T> conv_forward(const Array<T>& w, const Array<T>& b, const Array<T>& col, const ConvDims& d) {
  const std::size_t cols = d.batch * d.l_out;
  RowMat<T> y = ConstMatMap<T>(w.data().data(), d.c_out, d.c_in * d.kernel) *
                ConstMatMap<T>(col.data().data(), d.c_in * d.kernel, cols);
  Array<T> out(d.unbatched ? Shape{d.c_out, d.l_out} : Shape{d.batch, d.c_out, d.l_out});
  T* o = out.data().data();
  for (std::size_t bb = 0; bb < d.batch; ++bb) {
    for (std::size_t co = 0; co < d.c_out; ++co) {
      const T bias = b[co];
      const T* src = y.data() + co * cols + bb * d.l_out;
      T* dst = o + (bb * d.c_out + co) * d.l_out;
      for (std::size_t l = 0; l < d.l_out; ++l) dst[l] = src[l] + bias;
    }
  }
  return out;
}

template <typename T>
T sigmoid(T x) {
  return T{1} / (T{1} + std::exp(-x));
}

template <typename T>
Array<T> linear_forward(const Array<T>& x, const Array<T>& w, const Array<T>& b, bool& unbatched) {
  if (w.rank() != 2) throw DimensionError("linear: weight must be rank 2");
  const std::size_t f_out = w.dim(0);
  const std::size_t f_in = w.dim(1);
  std::size_t batch;
  if (x.rank() == 1) {
    unbatched = true;
    batch = 1;
    if (x.dim(0) != f_in) throw DimensionError("linear: input width does not match weight");
  } else if (x.rank() == 2) {
    unbatched = false;
    batch = x.dim(0);
    if (x.dim(1) != f_in) throw DimensionError("linear: input width does not match weight");
  } else {
    throw DimensionError("linear: input must be [F] or [B,F], got " + shape_string(x.shape()));
  }
  require_shape(b.shape(), Shape{f_out}, "linear bias");
  Array<T> out(unbatched ? Shape{f_out} : Shape{batch, f_out});
  MatMap<T> y(out.data().data(), batch, f_out);
  y.noalias() = ConstMatMap<T>(x.data().data(), batch, f_in) *
                ConstMatMap<T>(w.data().data(), f_out, f_in).transpose();
  for (std::size_t i = 0; i < batch; ++i) {
    for (std::size_t j = 0; j < f_out; ++j) y(i, j) += b[j];
  }
  return out;
}

// Splits a sequence shape into (batch, channels, length).
void seq_dims(const Shape& s, std::size_t& batch, std::size_t& ch, std::size_t& len,
              const char* what) {
  if (s.size() == 3) {
    batch = s[0];
    ch = s[1];
    len = s[2];
  } else if (s.size() == 2) {
    batch = 1;
    ch = s[0];
    len = s[1];
  } else {
    throw DimensionError(std::string(what) + ": expected [C,L] or [B,C,L], got " + shape_string(s));
  }
}

}  // namespace

std::size_t conv1d_output_length(std::size_t length, std::size_t kernel, std::size_t stride,
                                 std::size_t padding) {
  if (length + 2 * padding < kernel) throw DimensionError("conv1d: padded length shorter than kernel");
  return (length + 2 * padding - kernel) / stride + 1;
}

template <typename T>
Array<T> conv1d(const Array<T>& x, const Array<T>& w, const Array<T>& b, std::size_t stride,
                std::size_t padding) {
  const ConvDims d = conv_dims(x, w, b, stride, padding);
  Array<T> out = conv_forward(w, b, im2col(x, d, stride, padding), d);
  out.require_finite("conv1d");
  return out;
}

template <typename T>
Array<T> linear(const Array<T>& x, const Array<T>& w, const Array<T>& b) {
  bool unbatched = false;
  Array<T> out = linear_forward(x, w, b, unbatched);
  out.require_finite("linear");
  return out;
}

template <typename T>
Array<T> silu(const Array<T>& x) {
  Array<T> out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] * sigmoid(x[i]);
  out.require_finite("silu");
  return out;
}

template <typename T>
Tape<T>::Tape() : id_(next_tape_id.fetch_add(1)) {}

template <typename T>
std::size_t Tape<T>::check(Var v) const {
  if (v.tape_id != id_ || v.index >= nodes_.size()) {
    throw GraphError("variable does not belong to this tape");
  }
  return v.index;
}

template <typename T>
Var Tape<T>::push(TapeNode<T> node) {
  node.val().require_finite("tape operation");
  nodes_.push_back(std::move(node));
  return Var{id_, nodes_.size() - 1};
}

template <typename T>
bool Tape<T>::any_requires_grad(std::initializer_list<Var> vars) const {
  for (Var v : vars) {
    if (nodes_[check(v)].requires_grad) return true;
  }
  return false;
}

template <typename T>
Var Tape<T>::constant(Array<T> value) {
  TapeNode<T> n;
  n.value = std::move(value);
  return push(std::move(n));
}

template <typename T>
Var Tape<T>::variable(Array<T> value) {
  TapeNode<T> n;
  n.value = std::move(value);
  n.requires_grad = true;
  return push(std::move(n));
}

template <typename T>
Var Tape<T>::param(const Array<T>& value, bool requires_grad) {
  TapeNode<T> n;
  n.external = &value;
  n.requires_grad = requires_grad;
  return push(std::move(n));
}

template <typename T>
Var Tape<T>::conv1d(Var x, Var w, Var b, std::size_t stride, std::size_t padding) {
  const auto& xv = nodes_[check(x)].val();
  const auto& wv = nodes_[check(w)].val();
  const auto& bv = nodes_[check(b)].val();
  const ConvDims d = conv_dims(xv, wv, bv, stride, padding);
  TapeNode<T> n;
  n.op = OpKind::kConv1d;
  n.inputs[0] = x.index;
  n.inputs[1] = w.index;
  n.inputs[2] = b.index;
  n.num_inputs = 3;
  n.stride = stride;
  n.padding = padding;
  n.unbatched = d.unbatched;
  n.saved = im2col(xv, d, stride, padding);
  n.value = conv_forward(wv, bv, n.saved, d);
  n.requires_grad = any_requires_grad({x, w, b});
  return push(std::move(n));
}

template <typename T>
Var Tape<T>::linear(Var x, Var w, Var b) {
  TapeNode<T> n;
  n.op = OpKind::kLinear;
  n.inputs[0] = check(x);
  n.inputs[1] = check(w);
  n.inputs[2] = check(b);
  n.num_inputs = 3;
  n.value = linear_forward(nodes_[x.index].val(), nodes_[w.index].val(), nodes_[b.index].val(),
                           n.unbatched);
  n.requires_grad = any_requires_grad({x, w, b});
  return push(std::move(n));
}

template <typename T>
Var Tape<T>::silu(Var x) {
  const auto& xv = nodes_[check(x)].val();
  TapeNode<T> n;
  n.op = OpKind::kSilu;
  n.inputs[0] = x.index;
  n.num_inputs = 1;
  n.value = Array<T>(xv.shape());
  n.saved = Array<T>(xv.shape());
  for (std::size_t i = 0; i < xv.size(); ++i) {
    n.saved[i] = sigmoid(xv[i]);
    n.value[i] = xv[i] * n.saved[i];
  }
  n.requires_grad = nodes_[x.index].requires_grad;
  return push(std::move(n));
}

template <typename T>
Var Tape<T>::add(Var a, Var b) {
  const auto& av = nodes_[check(a)].val();
  const auto& bv = nodes_[check(b)].val();
  require_shape(bv.shape(), av.shape(), "add");
  TapeNode<T> n;
  n.op = OpKind::kAdd;
  n.inputs[0] = a.index;
  n.inputs[1] = b.index;
  n.num_inputs = 2;
  n.value = av;
  for (std::size_t i = 0; i < bv.size(); ++i) n.value[i] += bv[i];
  n.requires_grad = any_requires_grad({a, b});
  return push(std::move(n));
}

template <typename T>
Var Tape<T>::add_channel_bias(Var x, Var bias) {
  const auto& xv = nodes_[check(x)].val();
  const auto& bv = nodes_[check(bias)].val();
  std::size_t batch, ch, len;
  seq_dims(xv.shape(), batch, ch, len, "add_channel_bias");
  if (bv.size() != batch * ch) {
    throw DimensionError("add_channel_bias: bias " + shape_string(bv.shape()) +
                         " does not match input " + shape_string(xv.shape()));
  }
  TapeNode<T> n;
  n.op = OpKind::kAddChannelBias;
  n.inputs[0] = x.index;
  n.inputs[1] = bias.index;
  n.num_inputs = 2;
  n.value = xv;
  for (std::size_t r = 0; r < batch * ch; ++r) {
    T* row = n.value.data().data() + r * len;
    for (std::size_t l = 0; l < len; ++l) row[l] += bv[r];
  }
  n.requires_grad = any_requires_grad({x, bias});
  return push(std::move(n));
}

template <typename T>
Var Tape<T>::concat_channels(Var a, Var b) {
  const auto& av = nodes_[check(a)].val();
  const auto& bv = nodes_[check(b)].val();
  std::size_t ba, ca, la, bb, cb, lb;
  seq_dims(av.shape(), ba, ca, la, "concat_channels");
  seq_dims(bv.shape(), bb, cb, lb, "concat_channels");
  if (av.rank() != bv.rank() || ba != bb || la != lb) {
    throw DimensionError("concat_channels: incompatible shapes " + shape_string(av.shape()) +
                         " and " + shape_string(bv.shape()));
  }
  TapeNode<T> n;
  n.op = OpKind::kConcatChannels;
  n.inputs[0] = a.index;
  n.inputs[1] = b.index;
  n.num_inputs = 2;
  n.value = Array<T>(av.rank() == 3 ? Shape{ba, ca + cb, la} : Shape{ca + cb, la});
  T* out = n.value.data().data();
  for (std::size_t i = 0; i < ba; ++i) {
    std::copy_n(av.data().data() + i * ca * la, ca * la, out + i * (ca + cb) * la);
    std::copy_n(bv.data().data() + i * cb * la, cb * la, out + i * (ca + cb) * la + ca * la);
  }
  n.requires_grad = any_requires_grad({a, b});
  return push(std::move(n));
}

template <typename T>
Var Tape<T>::upsample2(Var x) {
  const auto& xv = nodes_[check(x)].val();
  std::size_t batch, ch, len;
  seq_dims(xv.shape(), batch, ch, len, "upsample2");
  TapeNode<T> n;
  n.op = OpKind::kUpsample2;
  n.inputs[0] = x.index;
  n.num_inputs = 1;
  n.value = Array<T>(xv.rank() == 3 ? Shape{batch, ch, 2 * len} : Shape{ch, 2 * len});
  for (std::size_t r = 0; r < batch * ch; ++r) {
    const T* src = xv.data().data() + r * len;
    T* dst = n.value.data().data() + r * 2 * len;
    for (std::size_t l = 0; l < len; ++l) dst[2 * l] = dst[2 * l + 1] = src[l];
  }
  n.requires_grad = nodes_[x.index].requires_grad;
  return push(std::move(n));
}

template <typename T>
Var Tape<T>::sum(Var x) {
  const auto& xv = nodes_[check(x)].val();
  TapeNode<T> n;
  n.op = OpKind::kSum;
  n.inputs[0] = x.index;
  n.num_inputs = 1;
  T acc{0};
  for (T v : xv.data()) acc += v;
  n.value = Array<T>::scalar(acc);
  n.requires_grad = nodes_[x.index].requires_grad;
  return push(std::move(n));
}

template <typename T>
Var Tape<T>::mse(Var prediction, const Array<T>& target) {
  const auto& pv = nodes_[check(prediction)].val();
  require_shape(target.shape(), pv.shape(), "mse target");
  if (pv.size() == 0) throw DimensionError("mse: empty input");
  TapeNode<T> n;
  n.op = OpKind::kMse;
  n.inputs[0] = prediction.index;
  n.num_inputs = 1;
  n.saved = target;
  T acc{0};
  for (std::size_t i = 0; i < pv.size(); ++i) {
    const T d = pv[i] - target[i];
    acc += d * d;
  }
  n.value = Array<T>::scalar(acc / static_cast<T>(pv.size()));
  n.requires_grad = nodes_[prediction.index].requires_grad;
  return push(std::move(n));
}

template <typename T>
Var Tape<T>::scale(Var x, T factor) {
  const auto& xv = nodes_[check(x)].val();
  TapeNode<T> n;
  n.op = OpKind::kScale;
  n.inputs[0] = x.index;
  n.num_inputs = 1;
  n.factor = factor;
  n.value = xv;
  for (auto& v : n.value.data()) v *= factor;
  n.requires_grad = nodes_[x.index].requires_grad;
  return push(std::move(n));
}

template <typename T>
const Array<T>& Tape<T>::value(Var v) const {
  return nodes_[check(v)].val();
}

template <typename T>
Array<T> Tape<T>::grad(Var v) const {
  const auto& n = nodes_[check(v)];
  if (n.has_grad) return n.grad;
  return Array<T>(n.val().shape());
}

template <typename T>
Array<T>& Tape<T>::grad_slot(std::size_t index) {
  auto& n = nodes_[index];
  if (!n.has_grad) {
    n.grad = Array<T>(n.val().shape());
    n.has_grad = true;
  }
  return n.grad;
}

template <typename T>
void Tape<T>::accumulate(std::size_t index, const Array<T>& g) {
  if (!nodes_[index].requires_grad) return;
  auto& slot = grad_slot(index);
  for (std::size_t i = 0; i < g.size(); ++i) slot[i] += g[i];
}

template <typename T>
void Tape<T>::backward(Var loss) {
  const std::size_t root = check(loss);
  if (nodes_[root].val().size() != 1) {
    throw GraphError("backward requires a scalar loss, got shape " +
                     shape_string(nodes_[root].val().shape()));
  }
  for (auto& n : nodes_) {
    n.has_grad = false;
    n.grad = Array<T>(Shape{0});
  }
  if (!nodes_[root].requires_grad) return;
  grad_slot(root)[0] = T{1};
  for (std::size_t i = root + 1; i-- > 0;) {
    if (nodes_[i].has_grad && nodes_[i].op != OpKind::kLeaf) backprop_node(i);
  }
}

template <typename T>
void Tape<T>::backprop_node(std::size_t index) {
  const TapeNode<T>& n = nodes_[index];
  const Array<T>& g = n.grad;
  g.require_finite("backward pass");
  switch (n.op) {
    case OpKind::kLeaf:
      break;
    case OpKind::kConv1d: {
      const auto& xv = nodes_[n.inputs[0]].val();
      const auto& wv = nodes_[n.inputs[1]].val();
      const auto& bv = nodes_[n.inputs[2]].val();
      const ConvDims d = conv_dims(xv, wv, bv, n.stride, n.padding);
      const std::size_t cols = d.batch * d.l_out;
      const std::size_t rows = d.c_in * d.kernel;
      // Regroup the output gradient as [Cout, B*Lout] to match the column matrix.
      RowMat<T> dy(d.c_out, cols);
      for (std::size_t bb = 0; bb < d.batch; ++bb) {
        for (std::size_t co = 0; co < d.c_out; ++co) {
          const T* src = g.data().data() + (bb * d.c_out + co) * d.l_out;
          for (std::size_t l = 0; l < d.l_out; ++l) dy(co, bb * d.l_out + l) = src[l];
        }
      }
      const ConstMatMap<T> col(n.saved.data().data(), rows, cols);
      if (nodes_[n.inputs[1]].requires_grad) {
        Array<T> dw(wv.shape());
        MatMap<T>(dw.data().data(), d.c_out, rows).noalias() = dy * col.transpose();
        accumulate(n.inputs[1], dw);
      }
      if (nodes_[n.inputs[2]].requires_grad) {
        Array<T> db(bv.shape());
        for (std::size_t co = 0; co < d.c_out; ++co) db[co] = dy.row(co).sum();
        accumulate(n.inputs[2], db);
      }
      if (nodes_[n.inputs[0]].requires_grad) {
        RowMat<T> dcol = ConstMatMap<T>(wv.data().data(), d.c_out, rows).transpose() * dy;
        Array<T>& dx = grad_slot(n.inputs[0]);
        for (std::size_t ci = 0; ci < d.c_in; ++ci) {
          for (std::size_t j = 0; j < d.kernel; ++j) {
            const T* row = dcol.data() + (ci * d.kernel + j) * cols;
            for (std::size_t bb = 0; bb < d.batch; ++bb) {
              T* dst = dx.data().data() + (bb * d.c_in + ci) * d.length;
              for (std::size_t l = 0; l < d.l_out; ++l) {
                const std::ptrdiff_t pos = static_cast<std::ptrdiff_t>(l * n.stride + j) -
                                           static_cast<std::ptrdiff_t>(n.padding);
                if (pos >= 0 && pos < static_cast<std::ptrdiff_t>(d.length)) {
                  dst[pos] += row[bb * d.l_out + l];
                }
              }
            }
          }
        }
      }
      break;
    }
    case OpKind::kLinear: {
      const auto& xv = nodes_[n.inputs[0]].val();
      const auto& wv = nodes_[n.inputs[1]].val();
      const std::size_t f_out = wv.dim(0);
      const std::size_t f_in = wv.dim(1);
      const std::size_t batch = n.unbatched ? 1 : xv.dim(0);
      const ConstMatMap<T> dy(g.data().data(), batch, f_out);
      if (nodes_[n.inputs[1]].requires_grad) {
        Array<T> dw(wv.shape());
        MatMap<T>(dw.data().data(), f_out, f_in).noalias() =
            dy.transpose() * ConstMatMap<T>(xv.data().data(), batch, f_in);
        accumulate(n.inputs[1], dw);
      }
      if (nodes_[n.inputs[2]].requires_grad) {
        Array<T> db(Shape{f_out});
        for (std::size_t j = 0; j < f_out; ++j) db[j] = dy.col(j).sum();
        accumulate(n.inputs[2], db);
      }
      if (nodes_[n.inputs[0]].requires_grad) {
        Array<T> dx(xv.shape());
        MatMap<T>(dx.data().data(), batch, f_in).noalias() =
            dy * ConstMatMap<T>(wv.data().data(), f_out, f_in);
        accumulate(n.inputs[0], dx);
      }
      break;
    }
    case OpKind::kSilu: {
      if (!nodes_[n.inputs[0]].requires_grad) break;
      const auto& xv = nodes_[n.inputs[0]].val();
      Array<T>& dx = grad_slot(n.inputs[0]);
      for (std::size_t i = 0; i < xv.size(); ++i) {
        const T s = n.saved[i];
        dx[i] += g[i] * s * (T{1} + xv[i] * (T{1} - s));
      }
      break;
    }
    case OpKind::kAdd:
      accumulate(n.inputs[0], g);
      accumulate(n.inputs[1], g);
      break;
    case OpKind::kAddChannelBias: {
      accumulate(n.inputs[0], g);
      if (!nodes_[n.inputs[1]].requires_grad) break;
      Array<T>& db = grad_slot(n.inputs[1]);
      const std::size_t len = g.shape().back();
      for (std::size_t r = 0; r < db.size(); ++r) {
        T acc{0};
        for (std::size_t l = 0; l < len; ++l) acc += g[r * len + l];
        db[r] += acc;
      }
      break;
    }
    case OpKind::kConcatChannels: {
      const auto& av = nodes_[n.inputs[0]].val();
      const auto& bv = nodes_[n.inputs[1]].val();
      const std::size_t batch = av.rank() == 3 ? av.dim(0) : 1;
      const std::size_t a_block = av.size() / batch;
      const std::size_t b_block = bv.size() / batch;
      const bool need_a = nodes_[n.inputs[0]].requires_grad;
      const bool need_b = nodes_[n.inputs[1]].requires_grad;
      for (std::size_t i = 0; i < batch; ++i) {
        const T* src = g.data().data() + i * (a_block + b_block);
        if (need_a) {
          T* da = grad_slot(n.inputs[0]).data().data() + i * a_block;
          for (std::size_t k = 0; k < a_block; ++k) da[k] += src[k];
        }
        if (need_b) {
          T* db = grad_slot(n.inputs[1]).data().data() + i * b_block;
          for (std::size_t k = 0; k < b_block; ++k) db[k] += src[a_block + k];
        }
      }
      break;
    }
    case OpKind::kUpsample2: {
      if (!nodes_[n.inputs[0]].requires_grad) break;
      Array<T>& dx = grad_slot(n.inputs[0]);
      for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += g[2 * i] + g[2 * i + 1];
      break;
    }
    case OpKind::kSum: {
      if (!nodes_[n.inputs[0]].requires_grad) break;
      Array<T>& dx = grad_slot(n.inputs[0]);
      for (auto& v : dx.data()) v += g[0];
      break;
    }
    case OpKind::kMse: {
      if (!nodes_[n.inputs[0]].requires_grad) break;
      const auto& pv = nodes_[n.inputs[0]].val();
      Array<T>& dx = grad_slot(n.inputs[0]);
      const T coeff = T{2} * g[0] / static_cast<T>(pv.size());
      for (std::size_t i = 0; i < pv.size(); ++i) dx[i] += coeff * (pv[i] - n.saved[i]);
      break;
    }
    case OpKind::kScale: {
      if (!nodes_[n.inputs[0]].requires_grad) break;
      Array<T>& dx = grad_slot(n.inputs[0]);
      for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += n.factor * g[i];
      break;
    }
  }
}

template class Tape<float>;
template class Tape<double>;
template Array<float> conv1d(const Array<float>&, const Array<float>&, const Array<float>&,
                             std::size_t, std::size_t);
template Array<double> conv1d(const Array<double>&, const Array<double>&, const Array<double>&,
                              std::size_t, std::size_t);
template Array<float> linear(const Array<float>&, const Array<float>&, const Array<float>&);
template Array<double> linear(const Array<double>&, const Array<double>&, const Array<double>&);
template Array<float> silu(const Array<float>&);
template Array<double> silu(const Array<double>&);

}  // namespace forcediff
