#include "adcprune/qmlp.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

namespace adcprune {
namespace {

int pow2_exponent(double q) { return std::ilogb(std::fabs(q)); }

int argmax(std::span<const double> v) {
  return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
}

// log-sum-exp based cross-entropy of one logit vector; also returns softmax.
double softmax_xent(std::span<const double> logits, int label, std::vector<double>& probs) {
  const double peak = *std::max_element(logits.begin(), logits.end());
  double denom = 0.0;
  probs.resize(logits.size());
  for (std::size_t c = 0; c < logits.size(); ++c) {
    probs[c] = std::exp(logits[c] - peak);
    denom += probs[c];
  }
  for (double& p : probs) p /= denom;
  return -(logits[static_cast<std::size_t>(label)] - peak - std::log(denom));
}

std::vector<double> code_values(const QuantizedSet& data) {
  const double scale = std::ldexp(1.0, -data.input_bits);
  std::vector<double> out(data.codes.size());
  std::transform(data.codes.begin(), data.codes.end(), out.begin(),
                 [scale](std::uint8_t c) { return c * scale; });
  return out;
}

void check_set(const QuantMlp& mlp, const QuantizedSet& data) {
  if (data.features != mlp.input_size()) {
    throw std::invalid_argument("dataset has " + std::to_string(data.features) +
                                " features, model expects " + std::to_string(mlp.input_size()));
  }
  if (data.codes.size() != data.size() * static_cast<std::size_t>(data.features)) {
    throw std::invalid_argument("quantized set codes/labels size mismatch");
  }
  if (data.input_bits != mlp.config().input_bits) {
    throw std::invalid_argument("dataset input bitwidth differs from the model's");
  }
  for (int label : data.labels) {
    if (label < 0 || label >= mlp.output_size()) throw std::invalid_argument("label out of range");
  }
}

}  // namespace

void QuantConfig::validate() const {
  if (weight_bits < 2 || weight_bits > 8) throw std::invalid_argument("weight_bits must be in [2, 8]");
  if (activation_bits < 2 || activation_bits > 8) {
    throw std::invalid_argument("activation_bits must be in [2, 8]");
  }
  if (input_bits < 1 || input_bits > 8) throw std::invalid_argument("input_bits must be in [1, 8]");
}

int QuantConfig::min_exponent() const { return -((1 << (weight_bits - 1)) - 2); }

double quantize_pow2(double w, const QuantConfig& cfg) {
  const int e_min = cfg.min_exponent();
  const double mag = std::fabs(w);
  if (mag < std::ldexp(1.0, e_min - 1)) return 0.0;
  const int e = std::clamp(static_cast<int>(std::round(std::log2(mag))), e_min, 0);
  return std::copysign(std::ldexp(1.0, e), w);
}

double quantize_activation(double a, int bits) {
  const double levels = std::ldexp(1.0, bits);
  const double q = std::min(std::floor(std::max(a, 0.0) * levels), levels - 1.0);
  return q / levels;
}

void TrainSpec::validate() const {
  if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (epochs < 0) throw std::invalid_argument("epochs must be >= 0");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw std::invalid_argument("learning_rate must be positive");
  }
}

QuantMlp::QuantMlp(std::vector<int> topology, QuantConfig cfg, std::uint64_t init_seed)
    : topology_(std::move(topology)), cfg_(cfg) {
  cfg_.validate();
  if (topology_.size() < 2) throw std::invalid_argument("topology needs input and output sizes");
  for (int n : topology_) {
    if (n < 1) throw std::invalid_argument("layer sizes must be positive");
  }
  if (topology_.back() < 2) throw std::invalid_argument("classifier needs at least two classes");
  std::mt19937_64 rng(init_seed);
  for (std::size_t l = 0; l + 1 < topology_.size(); ++l) {
    Layer layer;
    layer.inputs = topology_[l];
    layer.outputs = topology_[l + 1];
    const double limit = 1.0 / std::sqrt(static_cast<double>(layer.inputs));
    std::uniform_real_distribution<double> init(-limit, limit);
    layer.weights.resize(static_cast<std::size_t>(layer.inputs * layer.outputs));
    for (double& w : layer.weights) w = init(rng);
    layer.biases.assign(static_cast<std::size_t>(layer.outputs), 0.0);
    layers_.push_back(std::move(layer));
  }
  requantize();
}

void QuantMlp::set_parameters(std::size_t layer, std::vector<double> weights,
                              std::vector<double> biases) {
  Layer& l = layers_.at(layer);
  if (weights.size() != l.weights.size() || biases.size() != l.biases.size()) {
    throw std::invalid_argument("parameter shape mismatch");
  }
  l.weights = std::move(weights);
  l.biases = std::move(biases);
  requantize();
}

void QuantMlp::requantize() {
  for (Layer& l : layers_) {
    l.q_weights.resize(l.weights.size());
    l.q_biases.resize(l.biases.size());
    for (std::size_t i = 0; i < l.weights.size(); ++i) l.q_weights[i] = quantize_pow2(l.weights[i], cfg_);
    for (std::size_t i = 0; i < l.biases.size(); ++i) l.q_biases[i] = quantize_pow2(l.biases[i], cfg_);
  }
}

std::vector<double> QuantMlp::forward(std::span<const double> inputs) const {
  if (static_cast<int>(inputs.size()) != input_size()) {
    throw std::invalid_argument("input width does not match the model");
  }
  std::vector<double> act(inputs.begin(), inputs.end());
  std::vector<double> next;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const Layer& layer = layers_[l];
    next.assign(static_cast<std::size_t>(layer.outputs), 0.0);
    for (int o = 0; o < layer.outputs; ++o) {
      double z = layer.q_biases[static_cast<std::size_t>(o)];
      const double* w = layer.q_weights.data() + static_cast<std::size_t>(o * layer.inputs);
      for (int i = 0; i < layer.inputs; ++i) z += w[i] * act[static_cast<std::size_t>(i)];
      next[static_cast<std::size_t>(o)] = z;
    }
    if (l + 1 < layers_.size()) {
      for (double& z : next) z = quantize_activation(z, cfg_.activation_bits);
    }
    act.swap(next);
  }
  return act;
}

std::vector<double> QuantMlp::forward_codes(std::span<const std::uint8_t> codes) const {
  const double scale = std::ldexp(1.0, -cfg_.input_bits);
  std::vector<double> x(codes.size());
  for (std::size_t i = 0; i < codes.size(); ++i) x[i] = codes[i] * scale;
  return forward(x);
}

int QuantMlp::predict_codes(std::span<const std::uint8_t> codes) const {
  return argmax(forward_codes(codes));
}

// Owns the scratch buffers of one training run.
struct Trainer {
  static TrainResult run(QuantMlp& mlp, const QuantizedSet& data, const TrainSpec& spec);
};

TrainResult Trainer::run(QuantMlp& mlp, const QuantizedSet& data, const TrainSpec& spec) {
  spec.validate();
  check_set(mlp, data);
  TrainResult result;
  if (spec.epochs == 0 || data.size() == 0) return result;

  auto& layers = mlp.layers_;
  const std::size_t depth = layers.size();
  const std::vector<double> x = code_values(data);
  const auto features = static_cast<std::size_t>(data.features);

  // Adam state and gradient accumulators, one slot per parameter.
  struct Slots {
    std::vector<double> gw, gb, mw, mb, vw, vb;
  };
  std::vector<Slots> slots(depth);
  for (std::size_t l = 0; l < depth; ++l) {
    const auto nw = layers[l].weights.size();
    const auto nb = layers[l].biases.size();
    slots[l] = {std::vector<double>(nw), std::vector<double>(nb), std::vector<double>(nw),
                std::vector<double>(nb), std::vector<double>(nw), std::vector<double>(nb)};
  }
  constexpr double kBeta1 = 0.9;
  constexpr double kBeta2 = 0.999;
  constexpr double kEps = 1e-7;
  double beta1_t = 1.0;
  double beta2_t = 1.0;

  // acts[0] is the input; acts[l+1] the output of layer l (logits last).
  std::vector<std::vector<double>> acts(depth + 1);
  std::vector<std::vector<double>> pre(depth);
  std::vector<std::vector<double>> delta(depth);
  acts[0].resize(features);
  for (std::size_t l = 0; l < depth; ++l) {
    acts[l + 1].resize(static_cast<std::size_t>(layers[l].outputs));
    pre[l].resize(static_cast<std::size_t>(layers[l].outputs));
    delta[l].resize(static_cast<std::size_t>(layers[l].outputs));
  }
  std::vector<double> probs;

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(spec.seed);
  const int act_bits = mlp.cfg_.activation_bits;

  for (int epoch = 0; epoch < spec.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(spec.batch_size)) {
      const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(spec.batch_size));
      const double inv_batch = 1.0 / static_cast<double>(stop - start);
      for (auto& s : slots) {
        std::fill(s.gw.begin(), s.gw.end(), 0.0);
        std::fill(s.gb.begin(), s.gb.end(), 0.0);
      }
      for (std::size_t n = start; n < stop; ++n) {
        const std::size_t sample = order[n];
        std::copy_n(x.begin() + static_cast<std::ptrdiff_t>(sample * features), features, acts[0].begin());
        for (std::size_t l = 0; l < depth; ++l) {
          const auto& layer = layers[l];
          for (int o = 0; o < layer.outputs; ++o) {
            double z = layer.q_biases[static_cast<std::size_t>(o)];
            const double* w = layer.q_weights.data() + static_cast<std::size_t>(o * layer.inputs);
            for (int i = 0; i < layer.inputs; ++i) z += w[i] * acts[l][static_cast<std::size_t>(i)];
            pre[l][static_cast<std::size_t>(o)] = z;
            acts[l + 1][static_cast<std::size_t>(o)] = (l + 1 < depth) ? quantize_activation(z, act_bits) : z;
          }
        }
        const int label = data.labels[sample];
        epoch_loss += softmax_xent(acts[depth], label, probs);

        for (std::size_t c = 0; c < probs.size(); ++c) {
          delta[depth - 1][c] = (probs[c] - (static_cast<int>(c) == label ? 1.0 : 0.0)) * inv_batch;
        }
        for (std::size_t l = depth; l-- > 0;) {
          const auto& layer = layers[l];
          auto& s = slots[l];
          for (int o = 0; o < layer.outputs; ++o) {
            const double d = delta[l][static_cast<std::size_t>(o)];
            if (d == 0.0) continue;
            s.gb[static_cast<std::size_t>(o)] += d;
            double* g = s.gw.data() + static_cast<std::size_t>(o * layer.inputs);
            for (int i = 0; i < layer.inputs; ++i) g[i] += d * acts[l][static_cast<std::size_t>(i)];
          }
          if (l == 0) break;
          // Straight-through the clipped, truncated ReLU of layer l-1.
          auto& below = delta[l - 1];
          for (int i = 0; i < layer.inputs; ++i) {
            const double z = pre[l - 1][static_cast<std::size_t>(i)];
            if (z <= 0.0 || z >= 1.0) {
              below[static_cast<std::size_t>(i)] = 0.0;
              continue;
            }
            double sum = 0.0;
            for (int o = 0; o < layer.outputs; ++o) {
              sum += layer.q_weights[static_cast<std::size_t>(o * layer.inputs + i)] *
                     delta[l][static_cast<std::size_t>(o)];
            }
            below[static_cast<std::size_t>(i)] = sum;
          }
        }
      }

      beta1_t *= kBeta1;
      beta2_t *= kBeta2;
      const double step = spec.learning_rate * std::sqrt(1.0 - beta2_t) / (1.0 - beta1_t);
      auto adam = [&](std::vector<double>& p, const std::vector<double>& g, std::vector<double>& m,
                      std::vector<double>& v) {
        for (std::size_t i = 0; i < p.size(); ++i) {
          m[i] = kBeta1 * m[i] + (1.0 - kBeta1) * g[i];
          v[i] = kBeta2 * v[i] + (1.0 - kBeta2) * g[i] * g[i];
          p[i] = std::clamp(p[i] - step * m[i] / (std::sqrt(v[i]) + kEps), -1.0, 1.0);
        }
      };
      for (std::size_t l = 0; l < depth; ++l) {
        adam(layers[l].weights, slots[l].gw, slots[l].mw, slots[l].vw);
        adam(layers[l].biases, slots[l].gb, slots[l].mb, slots[l].vb);
      }
      mlp.requantize();
    }
    epoch_loss /= static_cast<double>(data.size());
    result.epoch_loss.push_back(epoch_loss);
    result.epochs_run = epoch + 1;
    if (!std::isfinite(epoch_loss)) {
      result.diverged = true;
      break;
    }
  }
  return result;
}

TrainResult train(QuantMlp& mlp, const QuantizedSet& data, const TrainSpec& spec) {
  return Trainer::run(mlp, data, spec);
}

double mean_loss(const QuantMlp& mlp, const QuantizedSet& data) {
  check_set(mlp, data);
  if (data.size() == 0) throw std::invalid_argument("cannot score an empty dataset");
  std::vector<double> probs;
  double total = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    total += softmax_xent(mlp.forward_codes(data.row(i)), data.labels[i], probs);
  }
  return total / static_cast<double>(data.size());
}

double evaluate_accuracy(const QuantMlp& mlp, const QuantizedSet& data) {
  check_set(mlp, data);
  if (data.size() == 0) throw std::invalid_argument("cannot evaluate on an empty dataset");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (mlp.predict_codes(data.row(i)) == data.labels[i]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(data.size());
}

int infer_fixed_point(const QuantMlp& mlp, std::span<const std::uint8_t> codes, int accumulator_bits) {
  if (accumulator_bits < 2 || accumulator_bits > 63) {
    throw std::invalid_argument("accumulator width must be in [2, 63]");
  }
  if (static_cast<int>(codes.size()) != mlp.input_size()) {
    throw std::invalid_argument("input width does not match the model");
  }
  const QuantConfig& cfg = mlp.config();
  const int headroom = accumulator_bits - 1;  // magnitude bits of a signed register
  const std::int64_t limit = std::int64_t{1} << headroom;
  auto overflow = [&](const std::string& what) {
    return AccumulatorOverflow(what + " exceeds a " + std::to_string(accumulator_bits) +
                               "-bit accumulator");
  };

  std::vector<std::int64_t> u;
  for (std::uint8_t c : codes) {
    if (c >> cfg.input_bits != 0) throw std::invalid_argument("input code wider than input_bits");
    u.push_back(c);
  }
  int scale = cfg.input_bits;  // register value = u / 2^scale

  const auto& layers = mlp.layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& layer = layers[l];
    int e_lo = 0;
    for (double w : layer.q_weights) {
      if (w != 0.0) e_lo = std::min(e_lo, pow2_exponent(w));
    }
    for (double b : layer.q_biases) {
      if (b != 0.0) e_lo = std::min(e_lo, pow2_exponent(b));
    }
    const int align = -e_lo;
    const int acc_scale = scale + align;

    std::vector<std::int64_t> acc(static_cast<std::size_t>(layer.outputs), 0);
    for (int o = 0; o < layer.outputs; ++o) {
      std::int64_t sum = 0;
      const double b = layer.q_biases[static_cast<std::size_t>(o)];
      if (b != 0.0) {
        const int pos = acc_scale + pow2_exponent(b);
        if (pos >= headroom) throw overflow("bias constant");
        sum = b > 0 ? (std::int64_t{1} << pos) : -(std::int64_t{1} << pos);
      }
      for (int i = 0; i < layer.inputs; ++i) {
        const double w = layer.q_weights[static_cast<std::size_t>(o * layer.inputs + i)];
        const std::int64_t x = u[static_cast<std::size_t>(i)];
        if (w == 0.0 || x == 0) continue;
        if (static_cast<int>(std::bit_width(static_cast<std::uint64_t>(x))) + align > headroom) {
          throw overflow("aligned input register");
        }
        const std::int64_t term = (x << align) >> (-pow2_exponent(w));
        sum += w > 0 ? term : -term;
        if (sum >= limit || sum <= -limit) throw overflow("accumulator");
      }
      acc[static_cast<std::size_t>(o)] = sum;
    }

    if (l + 1 == layers.size()) {
      return static_cast<int>(std::max_element(acc.begin(), acc.end()) - acc.begin());
    }
    const int bits = cfg.activation_bits;
    const std::int64_t top = (std::int64_t{1} << bits) - 1;
    u.assign(acc.size(), 0);
    for (std::size_t o = 0; o < acc.size(); ++o) {
      const std::int64_t a = std::max<std::int64_t>(acc[o], 0);
      std::int64_t q;
      if (acc_scale >= bits) {
        q = std::min(a >> (acc_scale - bits), top);
      } else {
        const int up = bits - acc_scale;
        q = a > (top >> up) ? top : a << up;
      }
      u[o] = q;
    }
    scale = bits;
  }
  return 0;
}

nlohmann::json to_json(const QuantMlp& mlp) {
  nlohmann::json j;
  j["topology"] = mlp.topology();
  j["quant"] = {{"weight_bits", mlp.config().weight_bits},
                {"activation_bits", mlp.config().activation_bits},
                {"input_bits", mlp.config().input_bits}};
  auto sign_of = [](double q) { return q > 0 ? 1 : (q < 0 ? -1 : 0); };
  auto exp_of = [](double q) { return q == 0.0 ? 0 : pow2_exponent(q); };
  auto& layers = j["layers"] = nlohmann::json::array();
  for (const auto& layer : mlp.layers()) {
    nlohmann::json sign = nlohmann::json::array();
    nlohmann::json expo = nlohmann::json::array();
    for (int o = 0; o < layer.outputs; ++o) {
      std::vector<int> s;
      std::vector<int> e;
      for (int i = 0; i < layer.inputs; ++i) {
        const double q = layer.q_weights[static_cast<std::size_t>(o * layer.inputs + i)];
        s.push_back(sign_of(q));
        e.push_back(exp_of(q));
      }
      sign.push_back(s);
      expo.push_back(e);
    }
    std::vector<int> bs;
    std::vector<int> be;
    for (double q : layer.q_biases) {
      bs.push_back(sign_of(q));
      be.push_back(exp_of(q));
    }
    layers.push_back({{"sign", sign}, {"exponent", expo}, {"bias_sign", bs}, {"bias_exponent", be}});
  }
  return j;
}

QuantMlp mlp_from_json(const nlohmann::json& j) {
  QuantConfig cfg;
  cfg.weight_bits = j.at("quant").at("weight_bits").get<int>();
  cfg.activation_bits = j.at("quant").at("activation_bits").get<int>();
  cfg.input_bits = j.at("quant").at("input_bits").get<int>();
  QuantMlp mlp(j.at("topology").get<std::vector<int>>(), cfg, 0);
  const auto& layers = j.at("layers");
  if (layers.size() != mlp.layers().size()) throw std::invalid_argument("layer count mismatch");
  auto value = [](int s, int e) { return s == 0 ? 0.0 : s * std::ldexp(1.0, e); };
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& shape = mlp.layers()[l];
    const auto sign = layers[l].at("sign").get<std::vector<std::vector<int>>>();
    const auto expo = layers[l].at("exponent").get<std::vector<std::vector<int>>>();
    const auto bs = layers[l].at("bias_sign").get<std::vector<int>>();
    const auto be = layers[l].at("bias_exponent").get<std::vector<int>>();
    if (static_cast<int>(sign.size()) != shape.outputs || sign.size() != expo.size() ||
        static_cast<int>(bs.size()) != shape.outputs || bs.size() != be.size()) {
      throw std::invalid_argument("layer " + std::to_string(l) + " shape mismatch");
    }
    std::vector<double> w;
    for (std::size_t o = 0; o < sign.size(); ++o) {
      if (static_cast<int>(sign[o].size()) != shape.inputs || sign[o].size() != expo[o].size()) {
        throw std::invalid_argument("layer " + std::to_string(l) + " row width mismatch");
      }
      for (std::size_t i = 0; i < sign[o].size(); ++i) w.push_back(value(sign[o][i], expo[o][i]));
    }
    std::vector<double> b;
    for (std::size_t o = 0; o < bs.size(); ++o) b.push_back(value(bs[o], be[o]));
    mlp.set_parameters(l, std::move(w), std::move(b));
  }
  return mlp;
}

}  // namespace adcprune
