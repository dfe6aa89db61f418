#include "forcediff/denoiser/unet.hpp"

#include <cmath>

#include "forcediff/errors.hpp"

namespace forcediff::denoiser {
namespace {

std::string level_name(const char* prefix, std::size_t level) { return prefix + std::to_string(level); }

void add_block(std::vector<std::pair<std::string, Shape>>& out, const std::string& name, std::size_t cin,
               std::size_t cout, const UNetConfig& c) {
  out.push_back({name + ".conv1.w", {cout, cin, c.kernel_size}});
  out.push_back({name + ".conv1.b", {cout}});
  out.push_back({name + ".temb.w", {cout, c.embed_dim}});
  out.push_back({name + ".temb.b", {cout}});
  out.push_back({name + ".conv2.w", {cout, cout, c.kernel_size}});
  out.push_back({name + ".conv2.b", {cout}});
}

template <typename T>
class Network {
 public:
  Network(Tape<T>& tape, const DenoiserParams<T>& params, std::span<const Var> bound)
      : tape_(tape), params_(params), bound_(bound), pad_(params.config.kernel_size / 2) {
    if (bound.size() != params.size()) throw GraphError("forward: parameter binding size mismatch");
  }

  Var run(Var noisy, Var conditioning, std::span<const int> steps, const ForwardOptions& options) {
    const UNetConfig& c = params_.config;
    const Shape& ns = tape_.value(noisy).shape();
    const Shape& cs = tape_.value(conditioning).shape();
    if (ns.size() != 3 || ns[1] != c.out_channels || ns[2] != c.window_length) {
      throw DimensionError("denoiser: noisy input must be [B," + std::to_string(c.out_channels) + "," +
                           std::to_string(c.window_length) + "], got " + shape_string(ns));
    }
    if (cs.size() != 3 || cs[0] != ns[0] || cs[1] != c.conditioning_channels() || cs[2] != ns[2]) {
      throw DimensionError("denoiser: conditioning must be [B," + std::to_string(c.conditioning_channels()) +
                           "," + std::to_string(c.window_length) + "], got " + shape_string(cs));
    }
    if (steps.size() != ns[0]) throw DimensionError("denoiser: need one diffusion step per batch entry");
    if (options.drop_skip && *options.drop_skip >= c.depth) throw ConfigError("denoiser: no such skip level");

    Array<T> emb(Shape{ns[0], c.embed_dim});
    for (std::size_t b = 0; b < ns[0]; ++b) {
      if (steps[b] < 0) throw ConfigError("denoiser: diffusion step must be nonnegative");
      const Array<T> e = sinusoidal_embed<T>(steps[b], c.embed_dim);
      std::copy(e.data().begin(), e.data().end(), emb.data().begin() + b * c.embed_dim);
    }
    time_ = tape_.silu(tape_.linear(tape_.constant(std::move(emb)), p("time.w"), p("time.b")));

    Var x = c.conditioning_channels() > 0 ? tape_.concat_channels(noisy, conditioning) : noisy;
    std::vector<Var> skips;
    for (std::size_t l = 0; l < c.depth; ++l) {
      x = block(x, level_name("enc", l));
      skips.push_back(x);
      const std::string down = level_name("down", l);
      x = tape_.conv1d(x, p(down + ".w"), p(down + ".b"), 2, pad_);
    }
    x = block(x, "mid");
    for (std::size_t l = c.depth; l-- > 0;) {
      const std::string up = level_name("up", l);
      x = tape_.conv1d(tape_.upsample2(x), p(up + ".w"), p(up + ".b"), 1, pad_);
      Var skip = skips[l];
      if (options.drop_skip == l) skip = tape_.constant(Array<T>(tape_.value(skip).shape()));
      x = block(tape_.concat_channels(x, skip), level_name("dec", l));
    }
    return tape_.conv1d(x, p("out.w"), p("out.b"), 1, pad_);
  }

 private:
  Var p(const std::string& name) const { return bound_[params_.index(name)]; }

  Var block(Var x, const std::string& name) {
    Var y = tape_.conv1d(x, p(name + ".conv1.w"), p(name + ".conv1.b"), 1, pad_);
    y = tape_.add_channel_bias(y, tape_.linear(time_, p(name + ".temb.w"), p(name + ".temb.b")));
    y = tape_.silu(y);
    y = tape_.conv1d(y, p(name + ".conv2.w"), p(name + ".conv2.b"), 1, pad_);
    return tape_.silu(y);
  }

  Tape<T>& tape_;
  const DenoiserParams<T>& params_;
  std::span<const Var> bound_;
  std::size_t pad_;
  Var time_{};
};

}  // namespace

void UNetConfig::validate() const {
  if (in_channels == 0 || out_channels == 0 || out_channels > in_channels) {
    throw ConfigError("unet: need 0 < out_channels <= in_channels");
  }
  if (base_width == 0 || embed_dim == 0 || window_length == 0) throw ConfigError("unet: extents must be positive");
  if (kernel_size % 2 == 0) throw ConfigError("unet: kernel size must be odd");
  if (embed_dim % 2 != 0) throw ConfigError("unet: embedding dimension must be even");
  if (depth > 16 || window_length % (std::size_t{1} << depth) != 0) {
    throw ConfigError("unet: window length " + std::to_string(window_length) + " not divisible by 2^" +
                      std::to_string(depth));
  }
  if ((window_length >> depth) + 2 * (kernel_size / 2) < kernel_size) {
    throw ConfigError("unet: bottleneck shorter than the kernel");
  }
}

template <typename T>
std::size_t DenoiserParams<T>::count() const {
  std::size_t n = 0;
  for (const auto& a : arrays) n += a.size();
  return n;
}

template <typename T>
std::size_t DenoiserParams<T>::index(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return i;
  }
  throw ConfigError("denoiser has no parameter '" + name + "'");
}

std::vector<std::pair<std::string, Shape>> parameter_layout(const UNetConfig& c) {
  c.validate();
  std::vector<std::pair<std::string, Shape>> out;
  out.push_back({"time.w", {c.embed_dim, c.embed_dim}});
  out.push_back({"time.b", {c.embed_dim}});
  for (std::size_t l = 0; l < c.depth; ++l) {
    add_block(out, level_name("enc", l), l == 0 ? c.in_channels : c.width(l), c.width(l), c);
    out.push_back({level_name("down", l) + ".w", {c.width(l + 1), c.width(l), c.kernel_size}});
    out.push_back({level_name("down", l) + ".b", {c.width(l + 1)}});
  }
  add_block(out, "mid", c.width(c.depth), c.width(c.depth), c);
  for (std::size_t l = c.depth; l-- > 0;) {
    out.push_back({level_name("up", l) + ".w", {c.width(l), c.width(l + 1), c.kernel_size}});
    out.push_back({level_name("up", l) + ".b", {c.width(l)}});
    add_block(out, level_name("dec", l), 2 * c.width(l), c.width(l), c);
  }
  out.push_back({"out.w", {c.out_channels, c.width(0), c.kernel_size}});
  out.push_back({"out.b", {c.out_channels}});
  return out;
}

template <typename T>
DenoiserParams<T> init_params(const UNetConfig& config, Rng& rng) {
  DenoiserParams<T> params;
  params.config = config;
  const auto layout = parameter_layout(config);
  // Biases share the fan-in of the weight listed just before them.
  double bound = 0.0;
  for (const auto& [name, shape] : layout) {
    Array<T> a(shape);
    if (shape.size() > 1) bound = 1.0 / std::sqrt(static_cast<double>(shape_size(shape) / shape[0]));
    if (!name.starts_with("out.")) {
      for (auto& v : a.data()) v = static_cast<T>(bound * (2.0 * rng.uniform() - 1.0));
    }
    params.names.push_back(name);
    params.arrays.push_back(std::move(a));
  }
  return params;
}

template <typename T>
Array<T> sinusoidal_embed(double t, std::size_t dim) {
  if (dim == 0 || dim % 2 != 0) throw ConfigError("embedding dimension must be positive and even");
  Array<T> out(Shape{dim});
  for (std::size_t i = 0; i < dim / 2; ++i) {
    const double omega = std::pow(10000.0, -2.0 * static_cast<double>(i) / static_cast<double>(dim));
    out[2 * i] = static_cast<T>(std::sin(t * omega));
    out[2 * i + 1] = static_cast<T>(std::cos(t * omega));
  }
  return out;
}

template <typename T>
std::vector<Var> bind_params(Tape<T>& tape, const DenoiserParams<T>& params, bool requires_grad) {
  std::vector<Var> out;
  out.reserve(params.size());
  for (const auto& a : params.arrays) out.push_back(tape.param(a, requires_grad));
  return out;
}

template <typename T>
Var forward(Tape<T>& tape, const DenoiserParams<T>& params, std::span<const Var> bound, Var noisy,
            Var conditioning, std::span<const int> steps, const ForwardOptions& options) {
  return Network<T>(tape, params, bound).run(noisy, conditioning, steps, options);
}

template <typename T>
Array<T> predict(const DenoiserParams<T>& params, const Array<T>& noisy, const Array<T>& conditioning,
                 std::span<const int> steps, const ForwardOptions& options) {
  Tape<T> tape;
  const auto bound = bind_params(tape, params, false);
  const Var out = forward(tape, params, bound, tape.constant(noisy), tape.constant(conditioning), steps, options);
  return tape.value(out);
}

#define FORCEDIFF_INSTANTIATE(T)                                                                           \
  template struct DenoiserParams<T>;                                                                       \
  template DenoiserParams<T> init_params<T>(const UNetConfig&, Rng&);                                      \
  template Array<T> sinusoidal_embed<T>(double, std::size_t);                                              \
  template std::vector<Var> bind_params<T>(Tape<T>&, const DenoiserParams<T>&, bool);                      \
  template Var forward<T>(Tape<T>&, const DenoiserParams<T>&, std::span<const Var>, Var, Var,              \
                          std::span<const int>, const ForwardOptions&);                                    \
  template Array<T> predict<T>(const DenoiserParams<T>&, const Array<T>&, const Array<T>&,                 \
                               std::span<const int>, const ForwardOptions&);

FORCEDIFF_INSTANTIATE(float)
FORCEDIFF_INSTANTIATE(double)

}  // namespace forcediff::denoiser
