#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rhslearn/linalg.hpp"
#include "rhslearn/rng.hpp"

namespace rhslearn::net {

inline double lrelu(double z, double eps) { return z >= 0.0 ? z : eps * z; }
inline double lrelu_slope(double z, double eps) { return z >= 0.0 ? 1.0 : eps; }

// Fully connected network: x -> sigma(x W_1^T + b_1) -> ... -> W_L^T + b_L.
// The last layer is affine with no activation.
struct MlpParams {
  std::vector<std::size_t> layer_sizes;        // n_0 .. n_L
  std::vector<Matrix> weights;                 // weights[i]: n_{i+1} x n_i
  std::vector<std::vector<double>> biases;     // biases[i]: n_{i+1}
  double lrelu_eps = 0.01;

  std::size_t depth() const { return weights.size(); }
  std::size_t input_width() const { return layer_sizes.front(); }
  std::size_t output_width() const { return layer_sizes.back(); }
};

// Gradient container with the same shapes as MlpParams.
struct MlpGrads {
  std::vector<Matrix> weights;
  std::vector<std::vector<double>> biases;
};

struct ForwardTape {
  Matrix input;
  std::vector<Matrix> pre_activations;  // z_i for i = 1..L
  std::vector<Matrix> activations;      // sigma(z_i) for i = 1..L-1
};

inline void validate_sizes(const std::vector<std::size_t>& sizes) {
  if (sizes.size() < 2) throw std::invalid_argument("MlpParams: need at least one layer");
  for (std::size_t n : sizes) {
    if (n == 0) throw std::invalid_argument("MlpParams: zero-width layer");
  }
}

// Variance-preserving uniform init on +-sqrt(6 / (n_in + n_out)); zero biases.
inline MlpParams init_params(const std::vector<std::size_t>& layer_sizes, std::uint64_t seed,
                             double lrelu_eps = 0.01) {
  validate_sizes(layer_sizes);
  if (!(lrelu_eps > 0.0 && lrelu_eps < 1.0)) {
    throw std::invalid_argument("init_params: lrelu_eps must lie in (0, 1)");
  }
  MlpParams params;
  params.layer_sizes = layer_sizes;
  params.lrelu_eps = lrelu_eps;
  Rng rng(seed);
  for (std::size_t i = 0; i + 1 < layer_sizes.size(); ++i) {
    const std::size_t n_in = layer_sizes[i];
    const std::size_t n_out = layer_sizes[i + 1];
    const double bound = std::sqrt(6.0 / static_cast<double>(n_in + n_out));
    Matrix w(n_out, n_in);
    for (double& v : w.data) v = rng.uniform(-bound, bound);
    params.weights.push_back(std::move(w));
    params.biases.emplace_back(n_out, 0.0);
  }
  return params;
}

inline MlpGrads zero_grads(const MlpParams& params) {
  MlpGrads grads;
  for (std::size_t i = 0; i < params.depth(); ++i) {
    grads.weights.emplace_back(params.weights[i].rows, params.weights[i].cols);
    grads.biases.emplace_back(params.biases[i].size(), 0.0);
  }
  return grads;
}

inline void accumulate_scaled(MlpGrads& into, const MlpGrads& grads, double scale) {
  for (std::size_t i = 0; i < into.weights.size(); ++i) {
    for (std::size_t k = 0; k < into.weights[i].data.size(); ++k) {
      into.weights[i].data[k] += scale * grads.weights[i].data[k];
    }
    for (std::size_t k = 0; k < into.biases[i].size(); ++k) {
      into.biases[i][k] += scale * grads.biases[i][k];
    }
  }
}

// params += scale * grads, e.g. a plain gradient-descent step.
inline void accumulate_scaled_params(MlpParams& params, const MlpGrads& grads, double scale) {
  for (std::size_t i = 0; i < params.depth(); ++i) {
    for (std::size_t k = 0; k < params.weights[i].data.size(); ++k) {
      params.weights[i].data[k] += scale * grads.weights[i].data[k];
    }
    for (std::size_t k = 0; k < params.biases[i].size(); ++k) {
      params.biases[i][k] += scale * grads.biases[i][k];
    }
  }
}

struct ForwardResult {
  Matrix output;
  ForwardTape tape;
};

// Batch forward pass. Each row is processed with the same fixed summation
// order, so a batch row matches the singleton evaluation bit for bit.
inline ForwardResult forward(const MlpParams& params, const Matrix& batch) {
  if (batch.cols != params.input_width()) throw std::invalid_argument("forward: batch width mismatch");
  const std::size_t n_layers = params.depth();
  const std::size_t n_rows = batch.rows;

  ForwardResult res;
  res.tape.input = batch;
  const Matrix* prev = &res.tape.input;
  for (std::size_t i = 0; i < n_layers; ++i) {
    const Matrix& w = params.weights[i];
    const std::vector<double>& b = params.biases[i];
    Matrix z(n_rows, w.rows);
    for (std::size_t r = 0; r < n_rows; ++r) {
      const double* in = prev->row(r);
      double* out = z.row(r);
      for (std::size_t u = 0; u < w.rows; ++u) {
        out[u] = b[u] + dot(w.row(u), in, w.cols);
      }
    }
    res.tape.pre_activations.push_back(std::move(z));
    if (i + 1 < n_layers) {
      Matrix h = res.tape.pre_activations.back();
      for (double& v : h.data) v = lrelu(v, params.lrelu_eps);
      res.tape.activations.push_back(std::move(h));
      prev = &res.tape.activations.back();
    }
  }
  res.output = res.tape.pre_activations.back();
  return res;
}

// Forward pass without keeping the tape.
inline Matrix predict(const MlpParams& params, const Matrix& batch) {
  return forward(params, batch).output;
}

struct BackwardResult {
  MlpGrads grads;
  Matrix input_grads;
};

// Reverse-mode gradients of sum(upstream .* output) with respect to all
// parameters and the batch inputs.
inline BackwardResult backward(const MlpParams& params, const ForwardTape& tape,
                               const Matrix& upstream) {
  const std::size_t n_layers = params.depth();
  if (tape.pre_activations.size() != n_layers || tape.activations.size() + 1 != n_layers ||
      tape.input.cols != params.input_width()) {
    throw std::invalid_argument("backward: tape does not match parameters");
  }
  for (std::size_t i = 0; i < n_layers; ++i) {
    if (tape.pre_activations[i].cols != params.layer_sizes[i + 1]) {
      throw std::invalid_argument("backward: tape does not match parameters");
    }
  }
  if (upstream.rows != tape.input.rows || upstream.cols != params.output_width()) {
    throw std::invalid_argument("backward: upstream shape mismatch");
  }

  BackwardResult res;
  res.grads = zero_grads(params);
  Matrix delta = upstream;
  for (std::size_t li = n_layers; li-- > 0;) {
    const Matrix& w = params.weights[li];
    const Matrix& below = li == 0 ? tape.input : tape.activations[li - 1];
    Matrix& wg = res.grads.weights[li];
    std::vector<double>& bg = res.grads.biases[li];
    for (std::size_t u = 0; u < w.rows; ++u) {
      for (std::size_t r = 0; r < delta.rows; ++r) bg[u] += delta(r, u);
      double* wrow = wg.row(u);
      for (std::size_t c = 0; c < w.cols; ++c) {
        double acc = 0.0;
        for (std::size_t r = 0; r < delta.rows; ++r) acc += delta(r, u) * below(r, c);
        wrow[c] = acc;
      }
    }
    Matrix next(delta.rows, w.cols);
    for (std::size_t r = 0; r < delta.rows; ++r) {
      for (std::size_t c = 0; c < w.cols; ++c) {
        double acc = 0.0;
        for (std::size_t u = 0; u < w.rows; ++u) acc += delta(r, u) * w(u, c);
        next(r, c) = acc;
      }
    }
    if (li > 0) {
      const Matrix& z = tape.pre_activations[li - 1];
      for (std::size_t k = 0; k < next.data.size(); ++k) {
        next.data[k] *= lrelu_slope(z.data[k], params.lrelu_eps);
      }
    }
    delta = std::move(next);
  }
  res.input_grads = std::move(delta);
  return res;
}

// ---------------------------------------------------------------------------
// Checkpoint format: magic, version, lrelu_eps, layer sizes, then row-major
// weights and biases per layer. Round-trips bit for bit.

inline constexpr char kCheckpointMagic[8] = {'R', 'H', 'S', 'N', 'E', 'T', '0', '1'};

inline void save_checkpoint(const MlpParams& params, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_checkpoint: cannot open '" + path + "'");
  out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
  const std::uint32_t version = 1;
  out.write(reinterpret_cast<const char*>(&version), sizeof(version));
  out.write(reinterpret_cast<const char*>(&params.lrelu_eps), sizeof(double));
  const std::uint64_t n_sizes = params.layer_sizes.size();
  out.write(reinterpret_cast<const char*>(&n_sizes), sizeof(n_sizes));
  for (std::size_t s : params.layer_sizes) {
    const std::uint64_t v = s;
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
  }
  for (std::size_t i = 0; i < params.depth(); ++i) {
    out.write(reinterpret_cast<const char*>(params.weights[i].data.data()),
              static_cast<std::streamsize>(params.weights[i].data.size() * sizeof(double)));
    out.write(reinterpret_cast<const char*>(params.biases[i].data()),
              static_cast<std::streamsize>(params.biases[i].size() * sizeof(double)));
  }
  if (!out) throw std::runtime_error("save_checkpoint: write failed for '" + path + "'");
}

inline MlpParams load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_checkpoint: cannot open '" + path + "'");
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || !std::equal(magic, magic + 8, kCheckpointMagic)) {
    throw std::runtime_error("load_checkpoint: bad magic in '" + path + "'");
  }
  std::uint32_t version = 0;
  in.read(reinterpret_cast<char*>(&version), sizeof(version));
  if (version != 1) throw std::runtime_error("load_checkpoint: unsupported version");
  MlpParams params;
  in.read(reinterpret_cast<char*>(&params.lrelu_eps), sizeof(double));
  std::uint64_t n_sizes = 0;
  in.read(reinterpret_cast<char*>(&n_sizes), sizeof(n_sizes));
  if (!in || n_sizes < 2 || n_sizes > 1024) throw std::runtime_error("load_checkpoint: corrupt sizes");
  params.layer_sizes.resize(n_sizes);
  for (auto& s : params.layer_sizes) {
    std::uint64_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    s = static_cast<std::size_t>(v);
  }
  validate_sizes(params.layer_sizes);
  for (std::size_t i = 0; i + 1 < params.layer_sizes.size(); ++i) {
    Matrix w(params.layer_sizes[i + 1], params.layer_sizes[i]);
    in.read(reinterpret_cast<char*>(w.data.data()),
            static_cast<std::streamsize>(w.data.size() * sizeof(double)));
    params.weights.push_back(std::move(w));
    std::vector<double> b(params.layer_sizes[i + 1]);
    in.read(reinterpret_cast<char*>(b.data()),
            static_cast<std::streamsize>(b.size() * sizeof(double)));
    params.biases.push_back(std::move(b));
  }
  if (!in) throw std::runtime_error("load_checkpoint: truncated file '" + path + "'");
  return params;
}

}  // namespace rhslearn::net
