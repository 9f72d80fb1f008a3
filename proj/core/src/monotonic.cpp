#include "nmla/monotonic.hpp"

namespace nmla {
namespace {

Matrix log_of(const ProbMatrix& p) {
  return p.values().unaryExpr([](double v) { return safe_log(v); });
}

// occupancy(t, k) is the posterior probability that position t emits k.
LossValueWithGrad loss_from_occupancy(const ProbMatrix& p, double log_z, const Matrix& occupancy) {
  LossValueWithGrad out;
  out.value = -log_z;
  const Matrix& probs = p.values();
  out.grad.resize(probs.rows(), probs.cols());
  for (Eigen::Index t = 0; t < probs.rows(); ++t) {
    const double mass = occupancy.row(t).sum();
    out.grad.row(t) = probs.row(t) * mass - occupancy.row(t);
  }
  return out;
}

}  // namespace

ForwardTable sctc_forward(const ProbMatrix& p, const Sentence& y) {
  check_sentence(p, y);
  const Eigen::Index length = p.num_positions();
  const auto words = static_cast<Eigen::Index>(y.size());
  const TokenId blank = p.blank_id();
  const Matrix logp = log_of(p);

  ForwardTable table{Matrix::Constant(length + 1, words + 1, kLogZero)};
  Matrix& alpha = table.log_alpha;
  alpha(0, 0) = 0.0;
  for (Eigen::Index t = 1; t <= length; ++t) {
    const Eigen::Index top = std::min(t, words);
    for (Eigen::Index s = 0; s <= top; ++s) {
      double v = alpha(t - 1, s) + logp(t - 1, blank);
      if (s > 0) v = log_add(v, alpha(t - 1, s - 1) + logp(t - 1, y[static_cast<std::size_t>(s - 1)]));
      alpha(t, s) = v;
    }
  }
  return table;
}

LossValueWithGrad sctc_loss(const ProbMatrix& p, const Sentence& y) {
  const ForwardTable forward = sctc_forward(p, y);
  const double log_z = forward.log_likelihood();
  if (log_z == kLogZero) throw ZeroLikelihood("sctc_loss: target has zero probability");

  const Eigen::Index length = p.num_positions();
  const auto words = static_cast<Eigen::Index>(y.size());
  const TokenId blank = p.blank_id();
  const Matrix logp = log_of(p);
  const Matrix& alpha = forward.log_alpha;

  // beta(t, s): log-probability of emitting y_{s+1:T} with positions t+1..T_a.
  Matrix beta = Matrix::Constant(length + 1, words + 1, kLogZero);
  beta(length, words) = 0.0;
  for (Eigen::Index t = length - 1; t >= 0; --t) {
    for (Eigen::Index s = 0; s <= words; ++s) {
      double v = beta(t + 1, s) + logp(t, blank);
      if (s < words) v = log_add(v, beta(t + 1, s + 1) + logp(t, y[static_cast<std::size_t>(s)]));
      beta(t, s) = v;
    }
  }

  Matrix occupancy = Matrix::Zero(length, p.extended_size());
  for (Eigen::Index t = 0; t < length; ++t) {
    for (Eigen::Index s = 0; s <= words; ++s) {
      const double stay = alpha(t, s) + logp(t, blank) + beta(t + 1, s);
      if (stay != kLogZero) occupancy(t, blank) += std::exp(stay - log_z);
      if (s > 0) {
        const TokenId w = y[static_cast<std::size_t>(s - 1)];
        const double emit = alpha(t, s - 1) + logp(t, w) + beta(t + 1, s);
        if (emit != kLogZero) occupancy(t, w) += std::exp(emit - log_z);
      }
    }
  }
  return loss_from_occupancy(p, log_z, occupancy);
}

namespace {

struct CtcLattice {
  std::vector<TokenId> labels;  // blank, y1, blank, y2, ..., blank
  Matrix log_alpha;             // T_a x U, emissions at t included
  double log_z = kLogZero;
};

bool can_skip(const std::vector<TokenId>& labels, std::size_t u, TokenId blank) {
  return u >= 2 && labels[u] != blank && labels[u] != labels[u - 2];
}

CtcLattice ctc_alpha(const ProbMatrix& p, const Sentence& y) {
  check_sentence(p, y);
  const TokenId blank = p.blank_id();
  CtcLattice lat;
  lat.labels.reserve(2 * y.size() + 1);
  lat.labels.push_back(blank);
  for (TokenId w : y.tokens) {
    lat.labels.push_back(w);
    lat.labels.push_back(blank);
  }
  const Eigen::Index length = p.num_positions();
  const auto states = static_cast<Eigen::Index>(lat.labels.size());
  if (length == 0) {
    lat.log_z = y.empty() ? 0.0 : kLogZero;
    return lat;
  }

  const Matrix logp = log_of(p);
  Matrix& alpha = lat.log_alpha;
  alpha = Matrix::Constant(length, states, kLogZero);
  alpha(0, 0) = logp(0, blank);
  if (states > 1) alpha(0, 1) = logp(0, lat.labels[1]);
  for (Eigen::Index t = 1; t < length; ++t) {
    for (Eigen::Index u = 0; u < states; ++u) {
      const auto uu = static_cast<std::size_t>(u);
      double v = alpha(t - 1, u);
      if (u >= 1) v = log_add(v, alpha(t - 1, u - 1));
      if (can_skip(lat.labels, uu, blank)) v = log_add(v, alpha(t - 1, u - 2));
      alpha(t, u) = v == kLogZero ? kLogZero : v + logp(t, lat.labels[uu]);
    }
  }
  lat.log_z = alpha(length - 1, states - 1);
  if (states > 1) lat.log_z = log_add(lat.log_z, alpha(length - 1, states - 2));
  return lat;
}

}  // namespace

double ctc_forward(const ProbMatrix& p, const Sentence& y) { return ctc_alpha(p, y).log_z; }

LossValueWithGrad ctc_loss(const ProbMatrix& p, const Sentence& y) {
  const CtcLattice lat = ctc_alpha(p, y);
  if (lat.log_z == kLogZero) throw ZeroLikelihood("ctc_loss: target has zero probability");

  const Eigen::Index length = p.num_positions();
  const auto states = static_cast<Eigen::Index>(lat.labels.size());
  const TokenId blank = p.blank_id();
  const Matrix logp = log_of(p);
  const Matrix& alpha = lat.log_alpha;

  // beta(t, u): log-probability of the remaining emissions after position t,
  // given state u at t.
  Matrix beta = Matrix::Constant(length, states, kLogZero);
  beta(length - 1, states - 1) = 0.0;
  if (states > 1) beta(length - 1, states - 2) = 0.0;
  for (Eigen::Index t = length - 2; t >= 0; --t) {
    for (Eigen::Index u = 0; u < states; ++u) {
      const auto uu = static_cast<std::size_t>(u);
      double v = beta(t + 1, u) + logp(t + 1, lat.labels[uu]);
      if (u + 1 < states) v = log_add(v, beta(t + 1, u + 1) + logp(t + 1, lat.labels[uu + 1]));
      if (u + 2 < states && can_skip(lat.labels, uu + 2, blank)) {
        v = log_add(v, beta(t + 1, u + 2) + logp(t + 1, lat.labels[uu + 2]));
      }
      beta(t, u) = v;
    }
  }

  Matrix occupancy = Matrix::Zero(length, p.extended_size());
  for (Eigen::Index t = 0; t < length; ++t) {
    for (Eigen::Index u = 0; u < states; ++u) {
      const double v = alpha(t, u) + beta(t, u);
      if (v != kLogZero) occupancy(t, lat.labels[static_cast<std::size_t>(u)]) += std::exp(v - lat.log_z);
    }
  }
  return loss_from_occupancy(p, lat.log_z, occupancy);
}

LossValueWithGrad monotonic_loss(const ProbMatrix& p, const Sentence& y, CollapseMode mode) {
  return mode == CollapseMode::kCtc ? ctc_loss(p, y) : sctc_loss(p, y);
}

}  // namespace nmla
