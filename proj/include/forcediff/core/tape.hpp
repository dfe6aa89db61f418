#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "forcediff/core/array.hpp"

namespace forcediff {

// Handle to a value recorded on a Tape. Only meaningful for the tape that
// issued it; using it with another tape raises GraphError.
struct Var {
  std::uint64_t tape_id = 0;
  std::size_t index = 0;
};

enum class OpKind {
  kLeaf,
  kConv1d,
  kLinear,
  kSilu,
  kAdd,
  kAddChannelBias,
  kConcatChannels,
  kUpsample2,
  kSum,
  kMse,
  kScale,
};

template <typename T>
struct TapeNode {
  OpKind op = OpKind::kLeaf;
  std::size_t inputs[3] = {0, 0, 0};
  std::size_t num_inputs = 0;
  Array<T> value;
  // Leaves created by Tape::param alias caller-owned storage instead of `value`.
  const Array<T>* external = nullptr;
  // Saved activations: im2col columns for conv1d, the target for mse.
  Array<T> saved;
  std::size_t stride = 1;
  std::size_t padding = 0;
  T factor = T{1};
  bool unbatched = false;
  bool requires_grad = false;
  bool has_grad = false;
  Array<T> grad;

  const Array<T>& val() const { return external ? *external : value; }
};

// Reverse-mode differentiation over the small set of layer types the
// denoiser uses. Nodes are appended in evaluation order, so walking the node
// list backwards is a reverse topological order and each node is visited once.
//
// Array layouts: sequences are [batch, channels, length]; a rank-2
// [channels, length] input is treated as a batch of one and keeps rank 2.
template <typename T>
class Tape {
 public:
  Tape();

  Var constant(Array<T> value);
  // Trainable leaf owned by the tape.
  Var variable(Array<T> value);
  // Leaf that aliases `value`; the array must outlive the tape and stay unchanged.
  Var param(const Array<T>& value, bool requires_grad = true);

  // Cross-correlation with zero padding. x [B,Cin,L], w [Cout,Cin,k], b [Cout].
  Var conv1d(Var x, Var w, Var b, std::size_t stride, std::size_t padding);
  // x [B,Fin] or [Fin], w [Fout,Fin], b [Fout].
  Var linear(Var x, Var w, Var b);
  Var silu(Var x);
  Var add(Var a, Var b);
  // x [B,C,L] plus bias [B,C] broadcast over length.
  Var add_channel_bias(Var x, Var bias);
  Var concat_channels(Var a, Var b);
  // Nearest-neighbour upsampling by two along length.
  Var upsample2(Var x);
  Var sum(Var x);
  // Mean squared error against a constant target; returns a scalar.
  Var mse(Var prediction, const Array<T>& target);
  Var scale(Var x, T factor);

  const Array<T>& value(Var v) const;
  // Gradient accumulated by the last backward(); zeros when v was not reached.
  Array<T> grad(Var v) const;
  void backward(Var loss);

  std::size_t size() const { return nodes_.size(); }
  std::uint64_t id() const { return id_; }
  const TapeNode<T>& node(Var v) const { return nodes_[check(v)]; }

 private:
  std::size_t check(Var v) const;
  Var push(TapeNode<T> node);
  bool any_requires_grad(std::initializer_list<Var> vars) const;
  void accumulate(std::size_t index, const Array<T>& g);
  Array<T>& grad_slot(std::size_t index);
  void backprop_node(std::size_t index);

  std::uint64_t id_;
  std::vector<TapeNode<T>> nodes_;
};

// Stateless layer evaluations on plain arrays (no recording).
template <typename T>
Array<T> conv1d(const Array<T>& x, const Array<T>& w, const Array<T>& b, std::size_t stride,
                std::size_t padding);
template <typename T>
Array<T> linear(const Array<T>& x, const Array<T>& w, const Array<T>& b);
template <typename T>
Array<T> silu(const Array<T>& x);

std::size_t conv1d_output_length(std::size_t length, std::size_t kernel, std::size_t stride,
                                 std::size_t padding);

extern template class Tape<float>;
extern template class Tape<double>;

}  // namespace forcediff
