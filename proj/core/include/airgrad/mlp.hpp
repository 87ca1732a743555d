// Copyright 2026 The airgrad Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>

#include <Eigen/Dense>

#include "airgrad/mnist.hpp"
#include "airgrad/rng.hpp"

namespace airgrad {

inline constexpr int kHidden = 20;
inline constexpr int kClasses = 10;

// Flattened parameter layout, in order:
//   hidden weights  784 x 20, row-major (input pixel major)
//   hidden biases   20
//   output weights  20 x 10, row-major (hidden unit major)
//   output biases   10
inline constexpr Eigen::Index kW1Offset = 0;
inline constexpr Eigen::Index kB1Offset = kW1Offset + kImagePixels * kHidden;
inline constexpr Eigen::Index kW2Offset = kB1Offset + kHidden;
inline constexpr Eigen::Index kB2Offset = kW2Offset + kHidden * kClasses;
inline constexpr Eigen::Index kNumParams = kB2Offset + kClasses;
static_assert(kNumParams == 15910);

using HiddenWeights = Eigen::Matrix<double, kImagePixels, kHidden, Eigen::RowMajor>;
using OutputWeights = Eigen::Matrix<double, kHidden, kClasses, Eigen::RowMajor>;
using HiddenVector = Eigen::Matrix<double, kHidden, 1>;
using ClassVector = Eigen::Matrix<double, kClasses, 1>;

/// Unflattened view of the two-layer perceptron.
struct MlpParams {
  HiddenWeights w1 = HiddenWeights::Zero();
  HiddenVector b1 = HiddenVector::Zero();
  OutputWeights w2 = OutputWeights::Zero();
  ClassVector b2 = ClassVector::Zero();
};

Eigen::VectorXd flatten(const MlpParams& p);
MlpParams unflatten(const Eigen::VectorXd& w);

/// Parameters plus ADAM moments. `step` counts completed optimizer steps.
struct ModelState {
  Eigen::VectorXd w;
  Eigen::VectorXd m;
  Eigen::VectorXd v;
  long step = 0;
};

/// Glorot-uniform weights, zero biases, zero moments.
ModelState init_model(Rng& rng);

struct GradientVector {
  Eigen::VectorXd g;
  double norm = 0.0;
  int batch_size = 0;
};

/// Numerically stable softmax (max subtraction).
ClassVector softmax(const ClassVector& logits);

/// Class probabilities for one 784-pixel image.
ClassVector forward(const Eigen::VectorXd& w, const Eigen::Ref<const Eigen::RowVectorXd>& image);

/// Mean cross-entropy loss over the batch; used by the finite-difference checks.
double batch_loss(const Eigen::VectorXd& w, const Dataset& data,
                  std::span<const std::size_t> batch);

/// Mean per-sample cross-entropy gradient. Samples are accumulated in the
/// order given, so a fixed batch gives bit-identical output.
GradientVector local_gradient(const Eigen::VectorXd& w, const Dataset& data,
                              std::span<const std::size_t> batch);

struct AdamConfig {
  double learning_rate = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// One bias-corrected ADAM update.
ModelState adam_step(ModelState state, const Eigen::VectorXd& grad, const AdamConfig& cfg = {});

/// Plain gradient descent: w - lr * grad.
Eigen::VectorXd gd_step(const Eigen::VectorXd& w, const Eigen::VectorXd& grad, double lr);

/// Index of the largest probability; ties go to the smaller class.
int predict(const Eigen::VectorXd& w, const Eigen::Ref<const Eigen::RowVectorXd>& image);

/// Fraction of samples whose argmax class matches the label.
double evaluate_accuracy(const Eigen::VectorXd& w, const Dataset& data);

}  // namespace airgrad
