// Copyright 2026 The airgrad Authors
// SPDX-License-Identifier: Apache-2.0

#include "airgrad/experiments.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

#include "airgrad/complexity.hpp"
#include "airgrad/error.hpp"
#include "json.hpp"

namespace airgrad {

namespace {

using nlohmann::json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string num(double v, int digits = 10) {
  if (std::isnan(v)) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
}

json methods_json(const std::vector<Method>& methods) {
  json arr = json::array();
  for (auto m : methods) arr.push_back(std::string(to_string(m)));
  return arr;
}

json config_json(const ExperimentConfig& c) {
  json j;
  j["K"] = c.devices;
  j["M"] = c.antennas;
  j["L"] = c.taps;
  j["nsub"] = c.subcarriers;
  j["noise"] = c.noise;
  j["T"] = c.rounds;
  j["batch"] = c.batch.to_string();
  j["fixed_batch"] = c.batch.fixed;
  j["methods"] = methods_json(c.methods);
  j["seed"] = c.seed;
  j["out"] = c.out_dir.generic_string();
  j["trials"] = c.trials;
  j["permute"] = c.permute;
  j["support"] = c.support_size;
  j["Ks"] = c.device_grid;
  j["Ms"] = c.antenna_grid;
  if (c.fixed_stop_index) j["istar"] = *c.fixed_stop_index;
  else j["istar"] = "measured";
  return j;
}

double mean_over_rounds(const std::vector<RoundRecord>& rounds) {
  if (rounds.empty()) return kNaN;
  double s = 0.0;
  for (const auto& r : rounds) s += r.mean_stop_index;
  return s / static_cast<double>(rounds.size());
}

}  // namespace

void ExperimentConfig::validate() const {
  if (devices < 1) throw ConfigError("K must be at least 1");
  if (antennas < 1) throw ConfigError("M must be at least 1");
  if (taps < 1) throw ConfigError("L must be at least 1");
  if (subcarriers < taps) throw ConfigError("nsub must be at least L");
  if (!(noise > 0.0)) throw ConfigError("noise must be positive");
  if (rounds < 0) throw ConfigError("T must be nonnegative");
  if (trials < 1) throw ConfigError("trials must be at least 1");
  if (methods.empty()) throw ConfigError("methods must not be empty");
  if (support_size < 0) throw ConfigError("support must be nonnegative");
  if (fixed_stop_index && *fixed_stop_index < 0) throw ConfigError("istar must be nonnegative");
  for (int k : device_grid) if (k < 1) throw ConfigError("Ks entries must be at least 1");
  for (int m : antenna_grid) if (m < 1) throw ConfigError("Ms entries must be at least 1");
  batch.validate();
}

TrainingConfig ExperimentConfig::training() const {
  TrainingConfig t;
  t.devices = devices;
  t.channel.antennas = antennas;
  t.channel.taps = taps;
  t.channel.num_subcarriers = subcarriers;
  t.channel.noise.complex_variance = noise;
  t.batch = batch;
  t.permute = permute;
  t.seed = seed;
  return t;
}

std::vector<Method> parse_methods(const std::string& list) {
  std::vector<Method> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    out.push_back(parse_method(item));
  }
  if (out.empty()) throw ConfigError("methods must not be empty");
  return out;
}

ExperimentConfig config_from_json(const std::string& text, ExperimentConfig c) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  try {
    for (auto& [key, v] : j.items()) {
      if (key == "K") c.devices = v.get<int>();
      else if (key == "M") c.antennas = v.get<int>();
      else if (key == "L") c.taps = v.get<int>();
      else if (key == "nsub") c.subcarriers = v.get<long>();
      else if (key == "noise") c.noise = v.get<double>();
      else if (key == "T") c.rounds = v.get<long>();
      else if (key == "batch") {
        const bool fixed = c.batch.fixed;
        c.batch = BatchPolicy::parse(v.get<std::string>());
        c.batch.fixed = fixed;
      } else if (key == "fixed_batch") c.batch.fixed = v.get<bool>();
      else if (key == "methods") {
        if (v.is_string()) {
          c.methods = parse_methods(v.get<std::string>());
        } else {
          c.methods.clear();
          for (const auto& m : v) c.methods.push_back(parse_method(m.get<std::string>()));
        }
      } else if (key == "seed") c.seed = v.get<std::uint64_t>();
      else if (key == "out") c.out_dir = v.get<std::string>();
      else if (key == "mnist_dir") c.mnist_dir = v.get<std::string>();
      else if (key == "trials") c.trials = v.get<long>();
      else if (key == "permute") c.permute = v.get<bool>();
      else if (key == "support") c.support_size = v.get<int>();
      else if (key == "timing") c.timing = v.get<bool>();
      else if (key == "Ks") c.device_grid = v.get<std::vector<int>>();
      else if (key == "Ms") c.antenna_grid = v.get<std::vector<int>>();
      else if (key == "istar") {
        if (v.is_string() && v.get<std::string>() == "measured") c.fixed_stop_index.reset();
        else c.fixed_stop_index = v.get<double>();
      } else {
        throw ConfigError("config: unknown key '" + key + "'");
      }
    }
  } catch (const json::type_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return c;
}

std::string config_to_json(const ExperimentConfig& cfg) { return config_json(cfg).dump(2); }

void XiHistogram::add(double xi) {
  require(xi >= 0.0 && xi <= 1.0, "xi must lie in [0, 1]");
  // Smallest j with xi <= j/100.
  int j = static_cast<int>(std::ceil(xi * 100.0));
  if (j > 0 && xi <= (j - 1) / 100.0) --j;
  if (j < kGridPoints - 1 && xi > j / 100.0) ++j;
  ++bins_[static_cast<std::size_t>(j)];
  ++total_;
  if (xi == 0.0) ++zeros_;
}

void XiHistogram::add(const Eigen::Ref<const Eigen::VectorXd>& xi) {
  for (Eigen::Index i = 0; i < xi.size(); ++i) add(xi[i]);
}

double XiHistogram::zero_fraction() const {
  return total_ == 0 ? 0.0 : static_cast<double>(zeros_) / static_cast<double>(total_);
}

double XiHistogram::cdf(int j) const {
  require(j >= 0 && j < kGridPoints, "cdf grid index out of range");
  if (total_ == 0) return 0.0;
  long long acc = 0;
  for (int i = 0; i <= j; ++i) acc += bins_[static_cast<std::size_t>(i)];
  return static_cast<double>(acc) / static_cast<double>(total_);
}

std::array<double, XiHistogram::kGridPoints> XiHistogram::cdf_grid() const {
  std::array<double, kGridPoints> out{};
  long long acc = 0;
  for (int j = 0; j < kGridPoints; ++j) {
    acc += bins_[static_cast<std::size_t>(j)];
    out[static_cast<std::size_t>(j)] =
        total_ == 0 ? 0.0 : static_cast<double>(acc) / static_cast<double>(total_);
  }
  return out;
}

void Reservoir::offer(const Sample& s) {
  ++seen_;
  if (samples_.size() < capacity_) {
    samples_.push_back(s);
    return;
  }
  std::uniform_int_distribution<long long> pick(0, seen_ - 1);
  const auto slot = pick(rng_);
  if (slot < static_cast<long long>(capacity_)) samples_[static_cast<std::size_t>(slot)] = s;
}

std::vector<MethodSummary> cmd_train(const ExperimentConfig& cfg, const Dataset& train,
                                     const Dataset& test, std::ostream* log, bool write) {
  cfg.validate();
  const Federation fed(cfg.training(), train, &test);
  const std::string run_id = "seed" + std::to_string(cfg.seed);

  std::ofstream metrics;
  std::ofstream recovery;
  if (write) {
    metrics = open_out(cfg.out_dir / "metrics.csv");
    metrics << "# airgrad metrics v1\n"
            << "run_id,method,K,M,round,accuracy,mean_reconstruction_mse,mean_I_star,wall_ms\n";
    if (cfg.dump_recovery) {
      recovery = open_out(cfg.out_dir / "recovery.csv");
      recovery << "# airgrad recovery v1\n"
               << "round,resource,method,I_star,residual_norms,thresholds,multiplications\n";
    }
  }

  std::vector<MethodSummary> out;
  for (Method m : cfg.methods) {
    const std::string mname(to_string(m));
    auto sink = [&](const RoundRecord& r) {
      if (log) *log << mname << " round " << r.round << " accuracy " << num(r.accuracy, 6) << "\n";
      if (!write) return;
      metrics << run_id << ',' << mname << ',' << cfg.devices << ',' << cfg.antennas << ','
              << r.round << ',' << num(r.accuracy) << ',' << num(r.mean_reconstruction_mse) << ','
              << num(r.mean_stop_index) << ',' << num(cfg.timing ? r.wall_ms : 0.0, 6) << '\n';
    };
    ResourceObserver observer;
    if (write && cfg.dump_recovery && m != Method::kPerfect) {
      observer = [&](const ResourceEvent& ev) {
        const auto& d = *ev.detection;
        recovery << ev.round << ',' << ev.resource << ',' << mname << ','
                 << (d.stop_index ? std::to_string(*d.stop_index) : "") << ',';
        for (std::size_t i = 0; i < d.residual_energies.size(); ++i)
          recovery << (i ? ";" : "") << num(std::sqrt(d.residual_energies[i]));
        recovery << ',';
        for (std::size_t i = 0; i < d.thresholds.size(); ++i)
          recovery << (i ? ";" : "") << num(d.thresholds[i]);
        recovery << ',' << d.multiplications << '\n';
      };
    }
    auto run = run_experiment(fed, m, cfg.rounds, sink, observer);
    MethodSummary s{m, run.initial_accuracy,
                    run.rounds.empty() ? run.initial_accuracy : run.rounds.back().accuracy,
                    m == Method::kProposed ? mean_over_rounds(run.rounds) : kNaN,
                    std::move(run.rounds)};
    out.push_back(std::move(s));
  }

  if (write && cfg.dump_channel) {
    auto ch = open_out(cfg.out_dir / "channel.csv");
    ch << "# airgrad channel v1\nround,device,antenna,tap,re,im\n";
    const auto tc = cfg.training();
    for (long t = 1; t <= cfg.rounds; ++t) {
      const RoundChannel rc(tc.channel, cfg.devices, cfg.seed, t);
      for (int k = 0; k < cfg.devices; ++k)
        for (int a = 0; a < cfg.antennas; ++a) {
          const auto& taps = rc.cir(k, a).taps;
          for (std::size_t l = 0; l < taps.size(); ++l)
            ch << t << ',' << k << ',' << a << ',' << l << ',' << num(taps[l].real(), 17) << ','
               << num(taps[l].imag(), 17) << '\n';
        }
    }
  }

  if (write) {
    json manifest;
    manifest["schema"] = "airgrad-manifest-v1";
    manifest["command"] = "train";
    manifest["config"] = config_json(cfg);
    json results = json::array();
    for (const auto& s : out) {
      json r;
      r["method"] = std::string(to_string(s.method));
      r["initial_accuracy"] = s.initial_accuracy;
      r["final_accuracy"] = s.final_accuracy;
      if (!std::isnan(s.mean_stop_index)) r["mean_I_star"] = s.mean_stop_index;
      results.push_back(r);
    }
    manifest["results"] = results;
    write_text(cfg.out_dir / "manifest.json", manifest.dump(2) + "\n");
  }
  return out;
}

SparsityResult cmd_sparsity(const ExperimentConfig& cfg, const Dataset& train, std::ostream* log,
                            bool write) {
  cfg.validate();
  const Method m = cfg.methods.front();
  SparsityResult res;
  std::optional<Reservoir> reservoir;
  std::ofstream raw;
  if (write && cfg.dump_xi) {
    reservoir.emplace(kXiReservoirCap, substream(cfg.seed, Stream::kSynthetic, 1));
  }

  for (bool permute : {true, false}) {
    auto tc = cfg.training();
    tc.permute = permute;
    const Federation fed(tc, train, nullptr);
    XiHistogram& hist = permute ? res.permuted : res.unpermuted;
    auto observer = [&](const ResourceEvent& ev) {
      const Eigen::VectorXd xi = magnitude_ratio(ev.x);
      hist.add(xi);
      if (reservoir && permute) {
        for (Eigen::Index k = 0; k < xi.size(); ++k)
          reservoir->offer({ev.round, ev.resource, static_cast<int>(k), xi[k]});
      }
    };
    auto sink = [&](const RoundRecord& r) {
      if (log && r.round > 0) *log << (permute ? "permuted" : "unpermuted") << " round " << r.round << "\n";
    };
    run_experiment(fed, m, cfg.rounds, sink, observer);
  }

  if (write) {
    auto out = open_out(cfg.out_dir / "sparsity_cdf.csv");
    out << "# airgrad sparsity v1\nxi,cdf_permuted,cdf_unpermuted\n";
    const auto a = res.permuted.cdf_grid();
    const auto b = res.unpermuted.cdf_grid();
    for (int j = 0; j < XiHistogram::kGridPoints; ++j)
      out << num(j / 100.0) << ',' << num(a[static_cast<std::size_t>(j)]) << ','
          << num(b[static_cast<std::size_t>(j)]) << '\n';

    json s;
    s["schema"] = "airgrad-sparsity-v1";
    s["config"] = config_json(cfg);
    s["method"] = std::string(to_string(m));
    for (auto [name, h] : {std::pair{"permuted", &res.permuted}, std::pair{"unpermuted", &res.unpermuted}}) {
      s[name]["samples"] = h->count();
      s[name]["exact_zero_fraction"] = h->zero_fraction();
      s[name]["nonzero_fraction"] = 1.0 - h->zero_fraction();
      s[name]["cdf_at_0.01"] = h->cdf(1);
    }
    write_text(cfg.out_dir / "sparsity.json", s.dump(2) + "\n");

    if (reservoir) {
      auto x = open_out(cfg.out_dir / "xi_samples.csv");
      x << "# airgrad xi v1\nround,resource,device,xi\n";
      for (const auto& r : reservoir->samples())
        x << r.round << ',' << r.resource << ',' << r.device << ',' << num(r.xi, 17) << '\n';
    }
  }
  return res;
}

std::vector<Prop1Row> cmd_prop1(const ExperimentConfig& cfg, bool write) {
  cfg.validate();
  if (cfg.support_size > cfg.devices) throw ConfigError("support must not exceed K");
  Prop1Config pc;
  pc.antennas = cfg.antennas;
  pc.devices = cfg.devices;
  pc.support_size = cfg.support_size;
  pc.trials = cfg.trials;
  pc.seed = cfg.seed;
  pc.noise_var = cfg.noise / 2.0;
  auto rows = run_prop1(pc);
  if (write) {
    auto out = open_out(cfg.out_dir / "prop1.csv");
    out << "# airgrad prop1 v1\ncase,analytical,empirical,relative_error\n";
    for (const auto& r : rows)
      out << static_cast<int>(r.which) << ',' << num(r.analytical, 12) << ','
          << num(r.empirical, 12) << ',' << num(r.relative_error, 6) << '\n';
  }
  return rows;
}

std::vector<ComplexityRow> cmd_complexity(const ExperimentConfig& cfg, const Dataset* train,
                                          std::ostream* log, bool write) {
  cfg.validate();
  if (!cfg.fixed_stop_index && train == nullptr)
    throw ConfigError("measured stop index needs training data");
  std::vector<ComplexityRow> rows;
  for (int k : cfg.device_grid) {
    for (int m : cfg.antenna_grid) {
      ComplexityRow r;
      r.devices = k;
      r.antennas = m;
      if (cfg.fixed_stop_index) {
        r.stop_index = *cfg.fixed_stop_index;
      } else {
        auto sub = cfg;
        sub.devices = k;
        sub.antennas = m;
        const Federation fed(sub.training(), *train, nullptr);
        auto run = run_experiment(fed, Method::kProposed, cfg.rounds);
        r.stop_index = mean_over_rounds(run.rounds);
        if (log) *log << "K=" << k << " M=" << m << " mean I*=" << num(r.stop_index, 6) << "\n";
      }
      r.proposed = proposed_multiplications(double(k), double(m), r.stop_index);
      r.lmmse = static_cast<double>(lmmse_multiplications(k, m));
      r.mrc = static_cast<double>(mrc_multiplications(k, m));
      r.ratio = r.proposed / r.lmmse;
      r.ratio_large = complexity_ratio_large(k, m, r.stop_index);
      rows.push_back(r);
    }
  }
  if (write) {
    auto out = open_out(cfg.out_dir / "complexity.csv");
    out << "# airgrad complexity v1\nK,M,I_star,C_proposed,C_lmmse,C_mrc,ratio,ratio_large\n";
    for (const auto& r : rows)
      out << r.devices << ',' << r.antennas << ',' << num(r.stop_index) << ','
          << num(r.proposed, 15) << ',' << num(r.lmmse, 15) << ',' << num(r.mrc, 15) << ','
          << num(r.ratio) << ',' << num(r.ratio_large) << '\n';
  }
  return rows;
}

}  // namespace airgrad
