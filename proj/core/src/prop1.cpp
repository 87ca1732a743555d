// Copyright 2026 The airgrad Authors
// SPDX-License-Identifier: Apache-2.0

#include "airgrad/prop1.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "airgrad/error.hpp"
#include "airgrad/recovery.hpp"
#include "airgrad/rng.hpp"

namespace airgrad {

namespace {

bool contains(const std::vector<int>& v, int k) { return std::find(v.begin(), v.end(), k) != v.end(); }

bool is_subset(const std::vector<int>& a, const std::vector<int>& b) {
  return std::all_of(a.begin(), a.end(), [&](int k) { return contains(b, k); });
}

void check_case(SupportCase c, const std::vector<int>& truth, const std::vector<int>& sel) {
  switch (c) {
    case SupportCase::kMissing:
      require(is_subset(sel, truth) && sel.size() < truth.size(),
              "missing case needs a proper subset of the true support");
      return;
    case SupportCase::kExact:
      require(sel.size() == truth.size() && is_subset(sel, truth),
              "exact case needs the selection to equal the true support");
      return;
    case SupportCase::kOvershoot:
      require(!sel.empty() && sel.size() == truth.size() + 1 && !contains(truth, sel.back()),
              "overshoot case needs the true support plus one extra device selected last");
      require(is_subset({sel.begin(), sel.end() - 1}, truth) && is_subset(truth, sel),
              "overshoot case needs the true support plus one extra device selected last");
      return;
  }
  throw ContractViolation("unknown support case");
}

}  // namespace

Eigen::MatrixXd omega_for_support(const Eigen::MatrixXd& channels, const Eigen::VectorXd& alpha,
                                  const std::vector<int>& selected, double noise_var) {
  require(noise_var > 0.0, "noise variance must be positive");
  const Eigen::Index dim = channels.rows();
  Eigen::MatrixXd omega = Eigen::MatrixXd::Identity(dim, dim) / noise_var;
  for (int k : selected) {
    require(k >= 0 && k < channels.cols(), "selected device out of range");
    omega = omega_update(omega, channels.col(k), alpha[k]);
  }
  return omega;
}

double expected_residual_energy(SupportCase c, const SupportModel& model,
                                const std::vector<int>& selected, double noise_var) {
  check_case(c, model.true_support, selected);
  const double s4 = noise_var * noise_var;
  const Eigen::MatrixXd omega = omega_for_support(model.channels, model.alpha, selected, noise_var);
  switch (c) {
    case SupportCase::kMissing: {
      double extra = 0.0;
      for (int k : model.true_support) {
        if (contains(selected, k)) continue;
        extra += model.alpha[k] * (omega * model.channels.col(k)).squaredNorm();
      }
      return s4 * (omega.trace() + extra);
    }
    case SupportCase::kExact:
      return s4 * omega.trace();
    case SupportCase::kOvershoot: {
      const std::vector<int> prev_sel(selected.begin(), selected.end() - 1);
      const Eigen::MatrixXd prev =
          omega_for_support(model.channels, model.alpha, prev_sel, noise_var);
      const int k = selected.back();
      const auto h = model.channels.col(k);
      const double quad = model.alpha[k] * h.dot(prev * h);
      return s4 * (omega.trace() - (prev.trace() - omega.trace()) / (1.0 + quad));
    }
  }
  throw ContractViolation("unknown support case");
}

std::vector<Prop1Row> run_prop1(const Prop1Config& cfg) {
  if (cfg.antennas < 1 || cfg.devices < 1) throw ConfigError("prop1: M and K must be at least 1");
  if (cfg.support_size < 0 || cfg.support_size > cfg.devices)
    throw ConfigError("prop1: support size must lie in [0, K]");
  if (cfg.trials < 1) throw ConfigError("prop1: trials must be at least 1");
  if (!(cfg.noise_var > 0.0)) throw ConfigError("prop1: noise variance must be positive");

  const int dim = 2 * cfg.antennas;
  Rng setup = substream(cfg.seed, Stream::kProp1, 0);
  std::normal_distribution<double> entry(0.0, std::sqrt(0.5));
  std::uniform_real_distribution<double> power(0.5, 2.0);

  SupportModel model;
  model.channels = Eigen::MatrixXd::NullaryExpr(dim, cfg.devices, [&] { return entry(setup); });
  model.alpha = Eigen::VectorXd::Zero(cfg.devices);
  for (int k = 0; k < cfg.support_size; ++k) {
    model.true_support.push_back(k);
    model.alpha[k] = power(setup);
  }
  // A wrongly selected inactive device sees only noise, so alpha ~ sigma^2 / ||h||^2.
  const int extra = cfg.support_size < cfg.devices ? cfg.support_size : -1;
  if (extra >= 0) model.alpha[extra] = cfg.noise_var / model.channels.col(extra).squaredNorm();

  std::vector<std::pair<SupportCase, std::vector<int>>> cases;
  const auto& truth = model.true_support;
  if (!truth.empty()) cases.emplace_back(SupportCase::kMissing, std::vector<int>(truth.begin(), truth.end() - 1));
  cases.emplace_back(SupportCase::kExact, truth);
  if (extra >= 0) {
    auto over = truth;
    over.push_back(extra);
    cases.emplace_back(SupportCase::kOvershoot, over);
  }

  // Signal x_k = +-sqrt(alpha_k) on the true support, independent signs.
  Eigen::MatrixXd h_true(dim, static_cast<Eigen::Index>(truth.size()));
  Eigen::VectorXd amp(static_cast<Eigen::Index>(truth.size()));
  for (std::size_t s = 0; s < truth.size(); ++s) {
    h_true.col(static_cast<Eigen::Index>(s)) = model.channels.col(truth[s]);
    amp[static_cast<Eigen::Index>(s)] = std::sqrt(model.alpha[truth[s]]);
  }

  std::vector<Prop1Row> rows;
  for (std::size_t ci = 0; ci < cases.size(); ++ci) {
    const auto& [which, selected] = cases[ci];
    const Eigen::MatrixXd filt =
        cfg.noise_var * omega_for_support(model.channels, model.alpha, selected, cfg.noise_var);
    Rng rng = substream(cfg.seed, Stream::kProp1, 1 + ci);
    std::normal_distribution<double> noise(0.0, std::sqrt(cfg.noise_var));
    std::bernoulli_distribution sign(0.5);
    Eigen::VectorXd x(amp.size());
    Eigen::VectorXd y(dim);
    double acc = 0.0;
    for (long t = 0; t < cfg.trials; ++t) {
      for (Eigen::Index s = 0; s < amp.size(); ++s) x[s] = sign(rng) ? amp[s] : -amp[s];
      for (int d = 0; d < dim; ++d) y[d] = noise(rng);
      y.noalias() += h_true * x;
      acc += (filt * y).squaredNorm();
    }
    Prop1Row row;
    row.which = which;
    row.analytical = expected_residual_energy(which, model, selected, cfg.noise_var);
    row.empirical = acc / static_cast<double>(cfg.trials);
    row.relative_error = std::abs(row.empirical - row.analytical) / row.analytical;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace airgrad
