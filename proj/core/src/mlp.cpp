// Copyright 2026 The airgrad Authors
// SPDX-License-Identifier: Apache-2.0

#include "airgrad/mlp.hpp"

#include <cmath>

#include "airgrad/error.hpp"

namespace airgrad {
namespace {

using ConstW1 = Eigen::Map<const HiddenWeights>;
using ConstW2 = Eigen::Map<const OutputWeights>;

struct Views {
  ConstW1 w1;
  Eigen::Map<const HiddenVector> b1;
  ConstW2 w2;
  Eigen::Map<const ClassVector> b2;

  explicit Views(const Eigen::VectorXd& w)
      : w1(w.data() + kW1Offset),
        b1(w.data() + kB1Offset),
        w2(w.data() + kW2Offset),
        b2(w.data() + kB2Offset) {}
};

void check_params(const Eigen::VectorXd& w) {
  require(w.size() == kNumParams, "parameter vector must have 15910 entries");
}

int argmax_first(const ClassVector& v) {
  int best = 0;
  for (int c = 1; c < kClasses; ++c) {
    if (v[c] > v[best]) best = c;
  }
  return best;
}

}  // namespace

Eigen::VectorXd flatten(const MlpParams& p) {
  Eigen::VectorXd w(kNumParams);
  Eigen::Map<HiddenWeights>(w.data() + kW1Offset) = p.w1;
  w.segment(kB1Offset, kHidden) = p.b1;
  Eigen::Map<OutputWeights>(w.data() + kW2Offset) = p.w2;
  w.segment(kB2Offset, kClasses) = p.b2;
  return w;
}

MlpParams unflatten(const Eigen::VectorXd& w) {
  check_params(w);
  const Views v(w);
  MlpParams p;
  p.w1 = v.w1;
  p.b1 = v.b1;
  p.w2 = v.w2;
  p.b2 = v.b2;
  return p;
}

ModelState init_model(Rng& rng) {
  MlpParams p;
  const double lim1 = std::sqrt(6.0 / (kImagePixels + kHidden));
  const double lim2 = std::sqrt(6.0 / (kHidden + kClasses));
  std::uniform_real_distribution<double> u1(-lim1, lim1);
  std::uniform_real_distribution<double> u2(-lim2, lim2);
  for (Eigen::Index i = 0; i < p.w1.size(); ++i) p.w1.data()[i] = u1(rng);
  for (Eigen::Index i = 0; i < p.w2.size(); ++i) p.w2.data()[i] = u2(rng);

  ModelState s;
  s.w = flatten(p);
  s.m = Eigen::VectorXd::Zero(kNumParams);
  s.v = Eigen::VectorXd::Zero(kNumParams);
  return s;
}

ClassVector softmax(const ClassVector& logits) {
  const ClassVector e = (logits.array() - logits.maxCoeff()).exp();
  return e / e.sum();
}

ClassVector forward(const Eigen::VectorXd& w, const Eigen::Ref<const Eigen::RowVectorXd>& image) {
  check_params(w);
  require(image.size() == kImagePixels, "image must have 784 pixels");
  const Views v(w);
  const HiddenVector hidden = (v.w1.transpose() * image.transpose() + v.b1).cwiseMax(0.0);
  return softmax(v.w2.transpose() * hidden + v.b2);
}

double batch_loss(const Eigen::VectorXd& w, const Dataset& data,
                  std::span<const std::size_t> batch) {
  require(!batch.empty(), "batch must not be empty");
  double total = 0.0;
  for (auto idx : batch) {
    const ClassVector p = forward(w, data.image(idx));
    total -= std::log(p[data.labels[idx]]);
  }
  return total / static_cast<double>(batch.size());
}

GradientVector local_gradient(const Eigen::VectorXd& w, const Dataset& data,
                              std::span<const std::size_t> batch) {
  check_params(w);
  require(!batch.empty(), "batch must not be empty");
  const Views v(w);

  GradientVector out;
  out.g = Eigen::VectorXd::Zero(kNumParams);
  out.batch_size = static_cast<int>(batch.size());
  Eigen::Map<HiddenWeights> gw1(out.g.data() + kW1Offset);
  auto gb1 = out.g.segment<kHidden>(kB1Offset);
  Eigen::Map<OutputWeights> gw2(out.g.data() + kW2Offset);
  auto gb2 = out.g.segment<kClasses>(kB2Offset);

  for (auto idx : batch) {
    require(idx < data.size(), "sample index out of range");
    const auto x = data.image(idx);
    const HiddenVector pre = v.w1.transpose() * x.transpose() + v.b1;
    const HiddenVector hidden = pre.cwiseMax(0.0);
    ClassVector delta_out = softmax(v.w2.transpose() * hidden + v.b2);
    delta_out[data.labels[idx]] -= 1.0;

    HiddenVector delta_hidden = v.w2 * delta_out;
    for (int j = 0; j < kHidden; ++j) {
      if (!(pre[j] > 0.0)) delta_hidden[j] = 0.0;
    }

    gw2.noalias() += hidden * delta_out.transpose();
    gb2 += delta_out;
    gw1.noalias() += x.transpose() * delta_hidden.transpose();
    gb1 += delta_hidden;
  }
  out.g /= static_cast<double>(batch.size());
  out.norm = out.g.norm();
  return out;
}

ModelState adam_step(ModelState state, const Eigen::VectorXd& grad, const AdamConfig& cfg) {
  require(grad.size() == state.w.size() && state.m.size() == state.w.size() &&
              state.v.size() == state.w.size(),
          "adam_step: length mismatch");
  state.step += 1;
  state.m = cfg.beta1 * state.m + (1.0 - cfg.beta1) * grad;
  state.v = cfg.beta2 * state.v + (1.0 - cfg.beta2) * grad.cwiseAbs2();
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  state.w.array() -= cfg.learning_rate * (state.m.array() / c1) /
                     ((state.v.array() / c2).sqrt() + cfg.epsilon);
  return state;
}

Eigen::VectorXd gd_step(const Eigen::VectorXd& w, const Eigen::VectorXd& grad, double lr) {
  require(w.size() == grad.size(), "gd_step: length mismatch");
  return w - lr * grad;
}

int predict(const Eigen::VectorXd& w, const Eigen::Ref<const Eigen::RowVectorXd>& image) {
  return argmax_first(forward(w, image));
}

double evaluate_accuracy(const Eigen::VectorXd& w, const Dataset& data) {
  check_params(w);
  if (data.size() == 0) return 0.0;
  const Views v(w);
  // Argmax over probabilities, not logits: exp() can round distinct logits to a tie.
  const Eigen::MatrixXd hidden =
      ((data.images * v.w1).rowwise() + v.b1.transpose()).cwiseMax(0.0);
  const Eigen::MatrixXd logits = (hidden * v.w2).rowwise() + v.b2.transpose();
  std::size_t correct = 0;
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const ClassVector p = softmax(logits.row(i).transpose());
    if (argmax_first(p) == data.labels[static_cast<std::size_t>(i)]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

}  // namespace airgrad
