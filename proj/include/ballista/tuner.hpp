// Copyright 2026 The Ballista Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "ballista/common.hpp"

namespace ballista {

// Asynchronous tree-structured Parzen estimator: complete trials are split at
// an objective quantile into good/bad sets, per-dimension Parzen densities are
// fit to each, and candidates drawn from the good density are ranked by the
// density ratio. Running trials are ignored by the fits.

enum class ParamType { kContinuous, kLogContinuous, kBoolean };

struct ParamSpec {
  std::string name;
  ParamType type = ParamType::kContinuous;
  double lo = 0.0;
  double hi = 1.0;
};

struct SearchSpace {
  std::vector<ParamSpec> dims;

  /// The sweep dimensions of the reference study: curriculum thresholds,
  /// reward coefficients and observation toggles. The recurrent-backbone
  /// toggle is pinned off and not searched.
  static SearchSpace study_default() {
    SearchSpace s;
    s.dims = {
        {"stability_reward_pct", ParamType::kContinuous, 0.0, 0.2},
        {"stability_threshold", ParamType::kContinuous, 0.0, 1.0},
        {"accuracy_threshold", ParamType::kContinuous, 0.0, 1.0},
        {"desired_kl", ParamType::kLogContinuous, 1e-3, 1e-1},
        {"roll_reward_pct", ParamType::kContinuous, 0.0, 0.5},
        {"reward_scale", ParamType::kContinuous, 0.5, 5.0},
        {"value_loss_coef", ParamType::kContinuous, 0.1, 1.0},
        {"global_foot_pitch_state", ParamType::kBoolean, 0.0, 1.0},
        {"body_roll_state", ParamType::kBoolean, 0.0, 1.0},
        {"estimate_displacement_state", ParamType::kBoolean, 0.0, 1.0},
        {"ball_released_state", ParamType::kBoolean, 0.0, 1.0},
    };
    return s;
  }
};

using Assignment = std::map<std::string, double>;

struct TrialRecord {
  enum class Status { kRunning, kComplete, kFailed };
  int id = -1;
  Assignment params;
  double objective = std::numeric_limits<double>::quiet_NaN();
  Status status = Status::kRunning;
  double t_start = 0.0;
  double t_end = 0.0;
};

struct TpeConfig {
  double quantile = 0.25;
  int n_candidates = 24;
  int n_startup = 10;
  double bandwidth_floor = 0.01;  // fraction of the (unit) range
};

/// Sweep objective: throwing accuracy plus stability rate clipped at 0.75.
inline double sweep_objective(double accuracy, double stability_rate) {
  return accuracy + std::min(stability_rate, 0.75);
}

namespace tpe_detail {

inline double to_unit(const ParamSpec& d, double x) {
  if (d.type == ParamType::kLogContinuous)
    return (std::log(x) - std::log(d.lo)) / (std::log(d.hi) - std::log(d.lo));
  return (x - d.lo) / (d.hi - d.lo);
}

inline double from_unit(const ParamSpec& d, double u) {
  u = std::clamp(u, 0.0, 1.0);
  if (d.type == ParamType::kLogContinuous)
    return std::exp(std::log(d.lo) + u * (std::log(d.hi) - std::log(d.lo)));
  return d.lo + u * (d.hi - d.lo);
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// Per-point bandwidths: nearest-neighbor spacing with a floor.
inline std::vector<double> bandwidths(const std::vector<double>& pts, double floor) {
  std::vector<double> bw(pts.size(), 1.0);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    double nn = 1.0;
    for (std::size_t j = 0; j < pts.size(); ++j)
      if (j != i) nn = std::min(nn, std::abs(pts[i] - pts[j]));
    bw[i] = std::clamp(std::max(nn, floor), floor, 1.0);
  }
  return bw;
}

/// Mixture of boundary-corrected Gaussians on [0, 1].
inline double log_parzen_density(double u, const std::vector<double>& pts,
                                 const std::vector<double>& bw) {
  double acc = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double z = (u - pts[i]) / bw[i];
    const double mass = normal_cdf((1.0 - pts[i]) / bw[i]) - normal_cdf(-pts[i] / bw[i]);
    const double pdf = std::exp(-0.5 * z * z) / (bw[i] * std::sqrt(2.0 * M_PI));
    acc += pdf / std::max(mass, 1e-12);
  }
  return std::log(std::max(acc / pts.size(), 1e-300));
}

inline double bernoulli_smoothed(const std::vector<double>& vals) {
  double trues = 0.0;
  for (double v : vals) trues += v > 0.5 ? 1.0 : 0.0;
  return (trues + 1.0) / (static_cast<double>(vals.size()) + 2.0);
}

}  // namespace tpe_detail

inline Assignment uniform_sample(const SearchSpace& space, Rng& rng) {
  Assignment a;
  for (const auto& d : space.dims) {
    if (d.type == ParamType::kBoolean) {
      a[d.name] = uniform(rng, 0.0, 1.0) < 0.5 ? 0.0 : 1.0;
    } else {
      a[d.name] = tpe_detail::from_unit(d, uniform(rng, 0.0, 1.0));
    }
  }
  return a;
}

inline Assignment suggest(const std::vector<TrialRecord>& history,
                          const SearchSpace& space, const TpeConfig& cfg, Rng& rng) {
  if (space.dims.empty()) throw std::invalid_argument("suggest: empty search space");

  std::vector<const TrialRecord*> complete;
  for (const auto& t : history)
    if (t.status == TrialRecord::Status::kComplete && std::isfinite(t.objective))
      complete.push_back(&t);

  if (static_cast<int>(complete.size()) < cfg.n_startup)
    return uniform_sample(space, rng);

  std::sort(complete.begin(), complete.end(),
            [](const TrialRecord* a, const TrialRecord* b) {
              return a->objective > b->objective;
            });
  const int n = static_cast<int>(complete.size());
  int n_good = std::max(1, static_cast<int>(std::ceil(cfg.quantile * n)));
  n_good = std::min(n_good, n - 1);

  // Per-dimension kernel sets in unit coordinates.
  const int dims = static_cast<int>(space.dims.size());
  std::vector<std::vector<double>> good(dims), bad(dims);
  for (int k = 0; k < n; ++k) {
    for (int d = 0; d < dims; ++d) {
      const auto& spec = space.dims[d];
      const auto it = complete[k]->params.find(spec.name);
      if (it == complete[k]->params.end()) continue;
      const double u = spec.type == ParamType::kBoolean
                           ? it->second
                           : tpe_detail::to_unit(spec, it->second);
      (k < n_good ? good[d] : bad[d]).push_back(u);
    }
  }

  std::vector<std::vector<double>> good_bw(dims), bad_bw(dims);
  std::vector<double> p_true_good(dims, 0.5), p_true_bad(dims, 0.5);
  for (int d = 0; d < dims; ++d) {
    if (space.dims[d].type == ParamType::kBoolean) {
      p_true_good[d] = tpe_detail::bernoulli_smoothed(good[d]);
      p_true_bad[d] = tpe_detail::bernoulli_smoothed(bad[d]);
    } else {
      good_bw[d] = tpe_detail::bandwidths(good[d], cfg.bandwidth_floor);
      bad_bw[d] = tpe_detail::bandwidths(bad[d], cfg.bandwidth_floor);
    }
  }

  Assignment best;
  double best_score = -std::numeric_limits<double>::infinity();
  for (int c = 0; c < cfg.n_candidates; ++c) {
    Assignment cand;
    double score = 0.0;
    for (int d = 0; d < dims; ++d) {
      const auto& spec = space.dims[d];
      if (spec.type == ParamType::kBoolean) {
        const double v = uniform(rng, 0.0, 1.0) < p_true_good[d] ? 1.0 : 0.0;
        const double pl = v > 0.5 ? p_true_good[d] : 1.0 - p_true_good[d];
        const double pg = v > 0.5 ? p_true_bad[d] : 1.0 - p_true_bad[d];
        score += std::log(pl) - std::log(std::max(pg, 1e-12));
        cand[spec.name] = v;
      } else {
        const std::size_t i = static_cast<std::size_t>(
            std::min<double>(good[d].size() - 1.0,
                             uniform(rng, 0.0, static_cast<double>(good[d].size()))));
        double u = 0.0;
        std::normal_distribution<double> normal(good[d][i], good_bw[d][i]);
        bool ok = false;
        for (int tries = 0; tries < 100; ++tries) {
          u = normal(rng);
          if (u >= 0.0 && u <= 1.0) {
            ok = true;
            break;
          }
        }
        if (!ok) u = std::clamp(u, 0.0, 1.0);
        score += tpe_detail::log_parzen_density(u, good[d], good_bw[d]) -
                 tpe_detail::log_parzen_density(u, bad[d], bad_bw[d]);
        cand[spec.name] = tpe_detail::from_unit(spec, u);
      }
    }
    if (score > best_score) {
      best_score = score;
      best = std::move(cand);
    }
  }
  return best;
}

// -------- Sweep harness --------

inline nlohmann::json trial_to_json(const TrialRecord& t) {
  nlohmann::json j;
  j["id"] = t.id;
  j["status"] = t.status == TrialRecord::Status::kComplete ? "complete"
                : t.status == TrialRecord::Status::kFailed ? "failed"
                                                           : "running";
  j["params"] = t.params;
  if (std::isfinite(t.objective)) j["objective"] = t.objective;
  j["t_start"] = t.t_start;
  j["t_end"] = t.t_end;
  return j;
}

inline TrialRecord trial_from_json(const nlohmann::json& j) {
  TrialRecord t;
  t.id = j.at("id").get<int>();
  const std::string status = j.at("status").get<std::string>();
  t.status = status == "complete" ? TrialRecord::Status::kComplete
             : status == "failed" ? TrialRecord::Status::kFailed
                                  : TrialRecord::Status::kRunning;
  for (const auto& [k, v] : j.at("params").items()) t.params[k] = v.get<double>();
  if (j.contains("objective")) t.objective = j["objective"].get<double>();
  t.t_start = j.value("t_start", 0.0);
  t.t_end = j.value("t_end", 0.0);
  return t;
}

/// Loads a JSON-lines history file; the last record per trial id wins.
inline std::vector<TrialRecord> load_history(const std::string& path) {
  std::vector<TrialRecord> out;
  std::ifstream is(path);
  if (!is) return out;
  std::map<int, TrialRecord> by_id;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    try {
      TrialRecord rec = trial_from_json(nlohmann::json::parse(line));
      by_id[rec.id] = std::move(rec);
    } catch (const nlohmann::json::exception&) {
      continue;  // torn tail line after a crash
    }
  }
  for (auto& [id, rec] : by_id) out.push_back(std::move(rec));
  return out;
}

struct SweepResult {
  TrialRecord best;
  std::vector<TrialRecord> history;
};

/// Runs trials until `budget` have completed, dispatching to `workers`
/// parallel evaluators. Every state change is appended to the history file,
/// so a killed sweep resumes from where it stopped; stale "running" records
/// are simply abandoned.
inline SweepResult run_sweep(
    const SearchSpace& space, int budget, int workers,
    const std::function<double(const Assignment&, int trial_id)>& eval,
    const std::string& history_path, const TpeConfig& cfg, std::uint64_t seed) {
  if (budget < 1) throw std::invalid_argument("run_sweep: budget must be >= 1");
  workers = std::max(1, workers);

  std::vector<TrialRecord> history = load_history(history_path);
  int next_id = 0;
  int complete = 0;
  for (const auto& t : history) {
    next_id = std::max(next_id, t.id + 1);
    if (t.status == TrialRecord::Status::kComplete) ++complete;
  }

  std::ofstream file(history_path, std::ios::app);
  if (!file) throw std::runtime_error("run_sweep: cannot open " + history_path);

  std::mutex mu;
  int inflight = 0;
  Rng rng(seed);

  const auto now = [] {
    return std::chrono::duration<double>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
  };

  auto worker = [&] {
    for (;;) {
      TrialRecord trial;
      {
        std::unique_lock lock(mu);
        // A failed trial is retried by its own worker on the next loop, so
        // counting inflight trials as prospective completions cannot leave
        // the sweep short of budget.
        if (complete + inflight >= budget) return;
        trial.id = next_id++;
        trial.params = suggest(history, space, cfg, rng);
        trial.status = TrialRecord::Status::kRunning;
        trial.t_start = now();
        ++inflight;
        history.push_back(trial);
        file << trial_to_json(trial).dump() << "\n" << std::flush;
      }
      double obj = std::numeric_limits<double>::quiet_NaN();
      bool failed = false;
      try {
        obj = eval(trial.params, trial.id);
        if (!std::isfinite(obj)) failed = true;
      } catch (const std::exception&) {
        failed = true;
      }
      {
        std::unique_lock lock(mu);
        --inflight;
        trial.t_end = now();
        trial.objective = obj;
        trial.status =
            failed ? TrialRecord::Status::kFailed : TrialRecord::Status::kComplete;
        for (auto& h : history)
          if (h.id == trial.id) h = trial;
        file << trial_to_json(trial).dump() << "\n" << std::flush;
        if (!failed) ++complete;
      }
    }
  };

  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  SweepResult result;
  result.history = history;
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& t : history)
    if (t.status == TrialRecord::Status::kComplete && t.objective > best) {
      best = t.objective;
      result.best = t;
    }
  return result;
}

}  // namespace ballista
