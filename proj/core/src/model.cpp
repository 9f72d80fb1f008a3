#include "nmla/model.hpp"

#include <random>

#include "nmla/random.hpp"

namespace nmla {

ModelShape ToyModelParams::shape() const {
  return {static_cast<int>(embed.rows()), static_cast<int>(out_w.cols()),
          static_cast<int>(embed.cols()), upsample_factor};
}

ToyModelParams ToyModelParams::zeros_like() const {
  ToyModelParams z = *this;
  for (Matrix* t : z.tensors()) t->setZero();
  return z;
}

bool ToyModelParams::all_finite() const {
  for (const Matrix* t : tensors()) {
    if (!t->allFinite()) return false;
  }
  return true;
}

std::size_t ToyModelParams::num_parameters() const {
  std::size_t total = 0;
  for (const Matrix* t : tensors()) total += static_cast<std::size_t>(t->size());
  return total;
}

ToyModelParams init_params(const ModelShape& shape, std::uint64_t seed) {
  if (shape.source_vocab < 1 || shape.extended_vocab < 2 || shape.dim < 1) {
    throw std::invalid_argument("init_params: degenerate model shape");
  }
  if (shape.upsample_factor < 1) throw std::invalid_argument("init_params: upsample_factor must be >= 1");

  Rng rng = make_rng(seed, "init");
  std::uniform_real_distribution<double> uniform(-0.1, 0.1);
  auto fill = [&](Eigen::Index rows, Eigen::Index cols) {
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = uniform(rng);
    return m;
  };
  ToyModelParams p;
  p.upsample_factor = shape.upsample_factor;
  p.embed = fill(shape.source_vocab, shape.dim);
  p.context = fill(shape.source_vocab, shape.dim);
  p.slot = fill(shape.upsample_factor, shape.dim);
  p.hidden_w = fill(shape.dim, shape.dim);
  p.hidden_b = fill(1, shape.dim);
  p.out_w = fill(shape.dim, shape.extended_vocab);
  p.out_b = fill(1, shape.extended_vocab);
  return p;
}

LogitMatrix forward(const ToyModelParams& params, const Sentence& source, ForwardCache* cache) {
  if (source.empty()) throw std::invalid_argument("forward: empty source sentence");
  const int factor = params.upsample_factor;
  const auto length = static_cast<Eigen::Index>(source.size()) * factor;
  const Eigen::Index dim = params.embed.cols();

  for (const TokenId token : source.tokens) {
    if (token < 0 || token >= params.embed.rows()) {
      throw std::invalid_argument("forward: source token out of range");
    }
  }
  Matrix inputs(length, dim);
  for (Eigen::Index j = 0; j < length; ++j) {
    const auto i = static_cast<std::size_t>(j / factor);
    inputs.row(j) = params.embed.row(source[i]) +
                    params.context.row(source[context_partner(i, source.size())]) +
                    params.slot.row(j % factor);
  }
  Matrix hidden = inputs * params.hidden_w;
  hidden.rowwise() += params.hidden_b.row(0);
  hidden = hidden.array().tanh().matrix();
  Matrix logits = hidden * params.out_w;
  logits.rowwise() += params.out_b.row(0);

  if (cache != nullptr) {
    cache->inputs = std::move(inputs);
    cache->hidden = std::move(hidden);
  }
  return LogitMatrix(std::move(logits));
}

void backward(const ToyModelParams& params, const Sentence& source, const ForwardCache& cache,
              const Matrix& grad_logits, ToyModelParams& grads) {
  const int factor = params.upsample_factor;
  grads.out_w.noalias() += cache.hidden.transpose() * grad_logits;
  grads.out_b += grad_logits.colwise().sum();

  const Matrix grad_hidden = grad_logits * params.out_w.transpose();
  const Matrix grad_pre =
      (grad_hidden.array() * (1.0 - cache.hidden.array().square())).matrix();
  grads.hidden_w.noalias() += cache.inputs.transpose() * grad_pre;
  grads.hidden_b += grad_pre.colwise().sum();

  const Matrix grad_inputs = grad_pre * params.hidden_w.transpose();
  for (Eigen::Index j = 0; j < grad_inputs.rows(); ++j) {
    const auto i = static_cast<std::size_t>(j / factor);
    grads.embed.row(source[i]) += grad_inputs.row(j);
    grads.context.row(source[context_partner(i, source.size())]) += grad_inputs.row(j);
    grads.slot.row(j % factor) += grad_inputs.row(j);
  }
}

AdamState init_adam(const ToyModelParams& params) {
  AdamState state;
  for (const Matrix* t : params.tensors()) {
    state.first_moment.push_back(Matrix::Zero(t->rows(), t->cols()));
    state.second_moment.push_back(Matrix::Zero(t->rows(), t->cols()));
  }
  return state;
}

void adam_step(ToyModelParams& params, const ToyModelParams& grads, AdamState& state, double lr,
               const AdamConfig& config) {
  auto targets = params.tensors();
  const auto sources = grads.tensors();
  if (state.first_moment.size() != targets.size()) state = init_adam(params);

  ++state.step;
  const double correction1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.step));
  const double correction2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < targets.size(); ++i) {
    Matrix& m = state.first_moment[i];
    Matrix& v = state.second_moment[i];
    const Matrix& g = *sources[i];
    if (g.rows() != targets[i]->rows() || g.cols() != targets[i]->cols()) {
      throw std::invalid_argument("adam_step: gradient shape mismatch");
    }
    m = config.beta1 * m + (1.0 - config.beta1) * g;
    v = config.beta2 * v + (1.0 - config.beta2) * g.cwiseProduct(g);
    *targets[i] -= (lr * (m.array() / correction1) /
                    ((v.array() / correction2).sqrt() + config.epsilon))
                       .matrix();
  }
}

}  // namespace nmla
