#pragma once

#include <array>
#include <cstdint>
#include <string_view>
#include <vector>

#include "nmla/core.hpp"

namespace nmla {

struct ModelShape {
  int source_vocab = 0;    // |V_src|
  int extended_vocab = 0;  // |V*| = target words + blank
  int dim = 32;
  int upsample_factor = 3;
};

// Embedding -> uniform copy (x upsample_factor) -> one tanh layer -> output
// projection. Every layer after the copy is position-wise. The encoder output
// for source position i is embed(x_i) + context(x_{(i + floor(L/2)) mod L}),
// the word half a sentence away, so a reordered translation is representable
// too. `slot` adds a learned vector for the copy index within each upsampled
// group so a source word can emit its translation on one copy and blanks on
// the others.
struct ToyModelParams {
  Matrix embed;     // |V_src| x d
  Matrix context;   // |V_src| x d
  Matrix slot;      // upsample_factor x d
  Matrix hidden_w;  // d x d
  Matrix hidden_b;  // 1 x d
  Matrix out_w;     // d x |V*|
  Matrix out_b;     // 1 x |V*|
  int upsample_factor = 3;

  static constexpr std::array<std::string_view, 7> kTensorNames = {
      "embed", "context", "slot", "hidden_w", "hidden_b", "out_w", "out_b"};

  std::array<Matrix*, 7> tensors() {
    return {&embed, &context, &slot, &hidden_w, &hidden_b, &out_w, &out_b};
  }
  std::array<const Matrix*, 7> tensors() const {
    return {&embed, &context, &slot, &hidden_w, &hidden_b, &out_w, &out_b};
  }

  ModelShape shape() const;
  // Same shapes, all zeros.
  ToyModelParams zeros_like() const;
  bool all_finite() const;
  std::size_t num_parameters() const;
};

// Uniform in [-0.1, 0.1].
ToyModelParams init_params(const ModelShape& shape, std::uint64_t seed);

struct ForwardCache {
  Matrix inputs;  // T_a x d, embedding + context + slot
  Matrix hidden;  // T_a x d, after tanh
};

// Source index whose word feeds the context input of source position i.
inline std::size_t context_partner(std::size_t i, std::size_t length) {
  return (i + length / 2) % length;
}

// Logits of shape (upsample_factor * |source|) x |V*|. Throws
// std::invalid_argument for an empty source or out-of-range token.
LogitMatrix forward(const ToyModelParams& params, const Sentence& source,
                    ForwardCache* cache = nullptr);

// Accumulates dLoss/dparams into `grads` given dLoss/dlogits.
void backward(const ToyModelParams& params, const Sentence& source, const ForwardCache& cache,
              const Matrix& grad_logits, ToyModelParams& grads);

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.98;
  double epsilon = 1e-8;
};

struct AdamState {
  std::vector<Matrix> first_moment;
  std::vector<Matrix> second_moment;
  std::int64_t step = 0;
};

AdamState init_adam(const ToyModelParams& params);

// Bias-corrected Adam update in place.
void adam_step(ToyModelParams& params, const ToyModelParams& grads, AdamState& state, double lr,
               const AdamConfig& config = {});

}  // namespace nmla
