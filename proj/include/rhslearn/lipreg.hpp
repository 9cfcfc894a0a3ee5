#pragma once

#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "rhslearn/datagen.hpp"
#include "rhslearn/linalg.hpp"
#include "rhslearn/net.hpp"
#include "rhslearn/rng.hpp"

namespace rhslearn::lipreg {

// Call counter for the finite-set estimator, so tests can assert the
// alpha = 0 training path never touches it.
inline std::atomic<std::uint64_t>& estimator_call_count() {
  static std::atomic<std::uint64_t> count{0};
  return count;
}

// Finite probe set of network inputs with pairwise-distinct rows.
struct ProbeSet {
  Matrix points;  // n x (1 + d)

  explicit ProbeSet(Matrix candidate) {
    std::vector<std::size_t> keep;
    for (std::size_t r = 0; r < candidate.rows; ++r) {
      bool duplicate = false;
      for (std::size_t q : keep) {
        if (squared_distance(candidate.row(r), candidate.row(q), candidate.cols) == 0.0) {
          duplicate = true;
          break;
        }
      }
      if (!duplicate) keep.push_back(r);
    }
    if (keep.size() < 2) throw std::invalid_argument("ProbeSet: need at least 2 distinct points");
    points = Matrix(keep.size(), candidate.cols);
    for (std::size_t r = 0; r < keep.size(); ++r) {
      for (std::size_t c = 0; c < candidate.cols; ++c) points(r, c) = candidate(keep[r], c);
    }
  }

  std::size_t size() const { return points.rows; }
};

// n training inputs sampled uniformly without replacement (all of them when
// n covers the training set).
inline ProbeSet sample_probe_set(const datagen::Dataset& dataset, std::size_t n, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("sample_probe_set: need n >= 2");
  const std::size_t pool = dataset.train.size();
  if (pool == 0) throw std::invalid_argument("sample_probe_set: empty training set");

  std::vector<std::size_t> chosen;
  if (n >= pool) {
    chosen.resize(pool);
    for (std::size_t i = 0; i < pool; ++i) chosen[i] = i;
  } else {
    Rng rng(seed);
    chosen = rng.sample_without_replacement(pool, n);
  }
  Matrix pts(chosen.size(), dataset.train.front().input.size());
  for (std::size_t r = 0; r < chosen.size(); ++r) {
    const auto& input = dataset.train[chosen[r]].input;
    for (std::size_t c = 0; c < input.size(); ++c) pts(r, c) = input[c];
  }
  return ProbeSet(std::move(pts));
}

struct LipEstimate {
  double value = 0.0;
  std::size_t a = 0;  // argmax pair, indices into the probe set
  std::size_t b = 0;
};

// Max difference quotient ||N(x_a) - N(x_b)|| / ||x_a - x_b|| over unordered
// probe pairs. Ties keep the lexicographically first pair.
inline LipEstimate estimate_lipschitz(const net::MlpParams& params, const ProbeSet& probe) {
  estimator_call_count().fetch_add(1, std::memory_order_relaxed);
  if (probe.size() < 2) throw std::invalid_argument("estimate_lipschitz: need at least 2 probe points");
  const Matrix outputs = net::predict(params, probe.points);

  LipEstimate best;
  best.value = -1.0;
  for (std::size_t i = 0; i + 1 < probe.size(); ++i) {
    for (std::size_t j = i + 1; j < probe.size(); ++j) {
      const double num = squared_distance(outputs.row(i), outputs.row(j), outputs.cols);
      const double den = squared_distance(probe.points.row(i), probe.points.row(j), probe.points.cols);
      const double ratio = std::sqrt(num / den);
      if (ratio > best.value) {
        best.value = ratio;
        best.a = i;
        best.b = j;
      }
    }
  }
  return best;
}

// Exact gradient of g(theta) = ||N(x_a) - N(x_b)|| / ||x_a - x_b|| with the
// pair held fixed. Returns zero at the ||N(x_a) - N(x_b)|| = 0 kink.
inline net::MlpGrads lipschitz_subgradient(const net::MlpParams& params,
                                           const std::vector<double>& x_a,
                                           const std::vector<double>& x_b) {
  if (x_a.size() != x_b.size() || x_a.size() != params.input_width()) {
    throw std::invalid_argument("lipschitz_subgradient: input width mismatch");
  }
  double input_dist2 = 0.0;
  for (std::size_t c = 0; c < x_a.size(); ++c) {
    const double d = x_a[c] - x_b[c];
    input_dist2 += d * d;
  }
  if (input_dist2 == 0.0) throw std::invalid_argument("lipschitz_subgradient: coincident pair");

  Matrix batch(2, x_a.size());
  for (std::size_t c = 0; c < x_a.size(); ++c) {
    batch(0, c) = x_a[c];
    batch(1, c) = x_b[c];
  }
  const net::ForwardResult fwd = net::forward(params, batch);
  double out_dist2 = 0.0;
  for (std::size_t c = 0; c < fwd.output.cols; ++c) {
    const double d = fwd.output(0, c) - fwd.output(1, c);
    out_dist2 += d * d;
  }
  if (out_dist2 == 0.0) return net::zero_grads(params);

  const double scale = 1.0 / (std::sqrt(out_dist2) * std::sqrt(input_dist2));
  Matrix upstream(2, fwd.output.cols);
  for (std::size_t c = 0; c < fwd.output.cols; ++c) {
    const double d = fwd.output(0, c) - fwd.output(1, c);
    upstream(0, c) = scale * d;
    upstream(1, c) = -scale * d;
  }
  return net::backward(params, fwd.tape, upstream).grads;
}

// Lightweight subsample of an existing probe set (rows stay distinct).
inline ProbeSet subsample_probe_set(const ProbeSet& probe, std::size_t n, Rng& rng) {
  if (n >= probe.size()) return probe;
  if (n < 2) throw std::invalid_argument("subsample_probe_set: need n >= 2");
  const std::vector<std::size_t> chosen = rng.sample_without_replacement(probe.size(), n);
  Matrix pts(n, probe.points.cols);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < probe.points.cols; ++c) pts(r, c) = probe.points(chosen[r], c);
  }
  return ProbeSet(std::move(pts));
}

}  // namespace rhslearn::lipreg
