// Copyright 2026 The airgrad Authors
// SPDX-License-Identifier: Apache-2.0

#include "airgrad/recovery.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "airgrad/complexity.hpp"
#include "airgrad/error.hpp"

namespace airgrad {

std::string_view to_string(Method m) {
  switch (m) {
    case Method::kProposed: return "proposed";
    case Method::kMrc: return "mrc";
    case Method::kLmmse: return "lmmse";
    case Method::kPerfect: return "perfect";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  if (name == "proposed") return Method::kProposed;
  if (name == "mrc") return Method::kMrc;
  if (name == "lmmse") return Method::kLmmse;
  if (name == "perfect") return Method::kPerfect;
  throw ConfigError("unknown method '" + std::string(name) + "'");
}

namespace {

// Omega is re-symmetrized after this many rank-one updates.
constexpr int kSymmetrizeEvery = 32;

Selection select_with_norms(const Eigen::MatrixXd& h, const Eigen::VectorXd& norms2,
                            const Eigen::VectorXd& r, const std::vector<bool>& excluded) {
  const Eigen::VectorXd corr = h.transpose() * r;
  Selection best;
  for (Eigen::Index k = 0; k < h.cols(); ++k) {
    if (excluded[static_cast<std::size_t>(k)] || !(norms2[k] > 0.0)) continue;
    const double metric = corr[k] * corr[k] / norms2[k];
    if (best.index < 0 || metric > best.metric) {
      best.index = static_cast<int>(k);
      best.metric = metric;
      best.correlation = corr[k];
    }
  }
  return best;
}

}  // namespace

Selection select_index(const Eigen::MatrixXd& channels, const Eigen::VectorXd& residual,
                       const std::vector<bool>& excluded) {
  require(residual.size() == channels.rows(), "residual length must equal 2M");
  require(static_cast<Eigen::Index>(excluded.size()) == channels.cols(),
          "exclusion mask must have K entries");
  const Eigen::VectorXd norms2 = channels.colwise().squaredNorm().transpose();
  auto sel = select_with_norms(channels, norms2, residual, excluded);
  require(sel.index >= 0, "select_index: no selectable device remains");
  return sel;
}

double alpha_estimate(const Eigen::VectorXd& h, const Eigen::VectorXd& residual) {
  require(h.size() == residual.size(), "alpha_estimate: length mismatch");
  const double n2 = h.squaredNorm();
  require(n2 > 0.0, "alpha_estimate: zero channel");
  const double c = h.dot(residual);
  return c * c / (n2 * n2);
}

Eigen::MatrixXd omega_update(const Eigen::MatrixXd& omega_prev, const Eigen::VectorXd& h,
                             double alpha) {
  require(omega_prev.rows() == omega_prev.cols() && omega_prev.rows() == h.size(),
          "omega_update: shape mismatch");
  require(alpha >= 0.0, "omega_update: alpha must be nonnegative");
  if (alpha == 0.0) return omega_prev;
  const Eigen::VectorXd u = omega_prev * h;
  const double gain = alpha / (1.0 + alpha * h.dot(u));
  Eigen::MatrixXd out = omega_prev;
  out.noalias() -= gain * u * u.transpose();
  return out;
}

Eigen::VectorXd residual(const Eigen::MatrixXd& omega, const Eigen::VectorXd& y,
                         double noise_var) {
  require(omega.cols() == y.size(), "residual: shape mismatch");
  return noise_var * (omega * y);
}

double stopping_threshold(double trace_prev, double trace_curr, double quad, double noise_var) {
  const double s4 = noise_var * noise_var;
  return s4 * (trace_curr - (trace_prev - trace_curr) / (2.0 * (1.0 + quad)));
}

double stopping_threshold(const Eigen::MatrixXd& omega_prev, const Eigen::MatrixXd& omega_curr,
                          double alpha_last, const Eigen::VectorXd& h_last, double noise_var) {
  const double quad = alpha_last * h_last.dot(omega_prev * h_last);
  return stopping_threshold(omega_prev.trace(), omega_curr.trace(), quad, noise_var);
}

CsRecovery::CsRecovery(Eigen::MatrixXd channels, double noise_var)
    : h_(std::move(channels)), noise_var_(noise_var) {
  require(noise_var > 0.0, "cs_recover: noise variance must be positive");
  norms2_ = h_.colwise().squaredNorm().transpose();
}

RecoveryResult CsRecovery::recover(const Eigen::VectorXd& y, const CsOptions& options) const {
  const Eigen::Index dim = h_.rows();
  const Eigen::Index k_count = h_.cols();
  require(y.size() == dim, "cs_recover: received vector length must equal 2M");
  const long d = static_cast<long>(dim);
  const double s2 = noise_var_;

  RecoveryResult res;
  res.x_hat = Eigen::VectorXd::Zero(k_count);

  std::vector<bool> excluded(static_cast<std::size_t>(k_count), false);
  for (Eigen::Index k = 0; k < k_count; ++k) {
    if (!(norms2_[k] > 0.0)) {
      excluded[static_cast<std::size_t>(k)] = true;
      res.skipped.push_back(static_cast<int>(k));
    }
  }

  Eigen::MatrixXd omega = Eigen::MatrixXd::Identity(dim, dim) / s2;
  double trace = static_cast<double>(dim) / s2;
  Eigen::VectorXd r = y;  // r_0
  Eigen::VectorXd u(dim);

  const bool forced = !options.forced_support.empty();
  const auto max_iter = forced ? static_cast<Eigen::Index>(options.forced_support.size()) : k_count;
  int stop = -1;

  for (Eigen::Index i = 1; i <= max_iter; ++i) {
    int k = -1;
    double corr = 0.0;
    if (forced) {
      k = options.forced_support[static_cast<std::size_t>(i - 1)];
      require(k >= 0 && k < k_count, "forced support index out of range");
      require(!excluded[static_cast<std::size_t>(k)], "forced support repeats or hits a zero column");
      corr = h_.col(k).dot(r);
      res.multiplications += d;
    } else {
      const auto sel = select_with_norms(h_, norms2_, r, excluded);
      res.multiplications += d * k_count + 2 * k_count;
      if (sel.index < 0) break;
      k = sel.index;
      corr = sel.correlation;
    }
    const auto hk = h_.col(k);
    const double alpha = corr * corr / (norms2_[k] * norms2_[k]);

    u.noalias() = omega * hk;
    const double quad = alpha * hk.dot(u);
    const double gain = alpha / (1.0 + quad);
    omega.noalias() -= (gain * u) * u.transpose();
    if (i % kSymmetrizeEvery == 0) omega = 0.5 * (omega + omega.transpose()).eval();
    const double trace_new = omega.trace();

    Eigen::VectorXd r_new = s2 * (omega * y);
    const double energy = r_new.squaredNorm();
    const double threshold = stopping_threshold(trace, trace_new, quad, s2);
    res.multiplications += 3 * d * d + 4 * d + 8;

    res.residual_energies.push_back(energy);
    res.thresholds.push_back(threshold);
    if (options.trace) {
      res.trace.push_back({k, alpha, omega, r_new, energy, threshold});
    }

    if (options.stopping && energy < threshold) {
      stop = static_cast<int>(i - 1);
      break;
    }
    excluded[static_cast<std::size_t>(k)] = true;
    res.support.push_back(k);
    res.alphas.push_back(alpha);
    r = std::move(r_new);
    trace = trace_new;
  }
  res.stop_index = stop >= 0 ? stop : static_cast<int>(res.support.size());

  // x_hat = D_alpha H_S^T Omega_{I*} y, and Omega_{I*} y = r_{I*} / sigma^2.
  for (std::size_t s = 0; s < res.support.size(); ++s) {
    const int k = res.support[s];
    res.x_hat[k] = res.alphas[s] * h_.col(k).dot(r) / s2;
  }
  res.multiplications += static_cast<long>(res.support.size()) * (d + 2);
  return res;
}

RecoveryResult cs_recover(const Eigen::VectorXd& y, const Eigen::MatrixXd& channels,
                          double noise_var, const CsOptions& options) {
  return CsRecovery(channels, noise_var).recover(y, options);
}

MrcCombiner::MrcCombiner(const Eigen::MatrixXd& channels) : combiner_(channels.transpose()) {
  for (Eigen::Index k = 0; k < channels.cols(); ++k) {
    const double n2 = channels.col(k).squaredNorm();
    if (n2 > 0.0) {
      combiner_.row(k) /= n2;
    } else {
      combiner_.row(k).setZero();
      skipped_.push_back(static_cast<int>(k));
    }
  }
}

Eigen::VectorXd MrcCombiner::recover(const Eigen::VectorXd& y) const {
  require(y.size() == combiner_.cols(), "mrc: received vector length must equal 2M");
  return combiner_ * y;
}

Eigen::VectorXd mrc_recover(const Eigen::VectorXd& y, const Eigen::MatrixXd& channels) {
  return MrcCombiner(channels).recover(y);
}

LmmseFilter::LmmseFilter(const Eigen::MatrixXd& channels, double noise_var) {
  require(noise_var > 0.0, "lmmse: noise variance must be positive");
  const Eigen::Index dim = channels.rows();
  const Eigen::Index k_count = channels.cols();
  if (k_count <= dim) {
    // (H^T H + s2 I_K)^-1 H^T
    Eigen::MatrixXd gram = channels.transpose() * channels;
    gram.diagonal().array() += noise_var;
    filter_ = gram.llt().solve(channels.transpose());
  } else {
    // H^T (H H^T + s2 I_2M)^-1
    Eigen::MatrixXd gram = channels * channels.transpose();
    gram.diagonal().array() += noise_var;
    filter_ = gram.llt().solve(channels).transpose();
  }
}

Eigen::VectorXd lmmse_recover(const Eigen::VectorXd& y, const Eigen::MatrixXd& channels,
                              double noise_var) {
  require(y.size() == channels.rows(), "lmmse: received vector length must equal 2M");
  return LmmseFilter(channels, noise_var).recover(y);
}

namespace {

class ProposedDetector final : public Detector {
 public:
  explicit ProposedDetector(double noise_var) : noise_var_(noise_var) {}
  Method method() const override { return Method::kProposed; }
  void set_channel(const Eigen::MatrixXd& channels) override {
    cs_.emplace(channels, noise_var_);
  }
  Detection detect(const Eigen::VectorXd& y) const override {
    auto r = cs_->recover(y);
    Detection d;
    d.x_hat = std::move(r.x_hat);
    d.stop_index = r.stop_index;
    d.multiplications = r.multiplications;
    d.residual_energies = std::move(r.residual_energies);
    d.thresholds = std::move(r.thresholds);
    return d;
  }

 private:
  double noise_var_;
  std::optional<CsRecovery> cs_;
};

class MrcDetector final : public Detector {
 public:
  Method method() const override { return Method::kMrc; }
  void set_channel(const Eigen::MatrixXd& channels) override {
    mrc_.emplace(channels);
    mults_ = mrc_multiplications(channels.cols(), channels.rows() / 2);
  }
  Detection detect(const Eigen::VectorXd& y) const override {
    return {mrc_->recover(y), std::nullopt, mults_, {}, {}};
  }

 private:
  std::optional<MrcCombiner> mrc_;
  long mults_ = 0;
};

class LmmseDetector final : public Detector {
 public:
  explicit LmmseDetector(double noise_var) : noise_var_(noise_var) {}
  Method method() const override { return Method::kLmmse; }
  void set_channel(const Eigen::MatrixXd& channels) override {
    lmmse_.emplace(channels, noise_var_);
    mults_ = lmmse_multiplications(channels.cols(), channels.rows() / 2);
  }
  Detection detect(const Eigen::VectorXd& y) const override {
    return {lmmse_->recover(y), std::nullopt, mults_, {}, {}};
  }

 private:
  double noise_var_;
  std::optional<LmmseFilter> lmmse_;
  long mults_ = 0;
};

}  // namespace

std::unique_ptr<Detector> make_detector(Method method, double noise_var) {
  switch (method) {
    case Method::kProposed: return std::make_unique<ProposedDetector>(noise_var);
    case Method::kMrc: return std::make_unique<MrcDetector>();
    case Method::kLmmse: return std::make_unique<LmmseDetector>(noise_var);
    case Method::kPerfect: break;
  }
  throw ContractViolation("perfect reconstruction has no detector");
}

}  // namespace airgrad
