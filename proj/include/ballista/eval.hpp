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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ballista/config.hpp"
#include "ballista/env.hpp"

namespace ballista {

struct EvalReport {
  std::vector<EpisodeSummary> episodes;
  double mean_error = 0.0;       // unreleased episodes count at E = r
  double std_error = 0.0;
  double mean_norm_error = 0.0;  // mean E / r
  double mean_accuracy = 0.0;    // mean throwing reward
  double stability_rate = 0.0;
  double max_stable_landing = 0.0;  // farthest stable throw, [m]
};

/// Rolls `n_episodes` deterministic or stochastic episodes of `policy` and
/// aggregates. Domain randomization stays on. `policy` must be callable
/// concurrently; episodes are spread over parallel env instances with
/// per-instance seeds, so the result does not depend on the thread count.
template <typename Policy>
EvalReport evaluate_policy(Policy&& policy, const RunConfig& cfg,
                           const CurriculumView& view, std::uint64_t seed,
                           int n_episodes) {
  EvalReport report;
  if (n_episodes <= 0) return report;

  const int lanes = std::min(n_episodes, std::max(1, std::min(64, cfg.env_count)));
  const int per_lane = (n_episodes + lanes - 1) / lanes;
  std::vector<std::vector<EpisodeSummary>> lane_results(lanes);
  const auto seeds = ThrowVectorEnv::sequential_seeds(lanes, seed);

  parallel_for(lanes, [&](int lane) {
    ThrowEnv env(cfg.env, cfg.plant, cfg.reward, seeds[lane]);
    env.set_curriculum(view);
    env.set_training_iteration(cfg.env.privileged_fade_iters);  // deployment: faded out
    for (int ep = 0; ep < per_lane; ++ep) {
      ThrowEnv::Obs obs = env.reset();
      while (true) {
        const ThrowEnv::Action act = policy(obs);
        const auto res = env.step(act);
        obs = res.obs;
        if (res.done) break;
      }
      lane_results[lane].push_back(env.summary());
    }
  });

  for (auto& lane : lane_results)
    for (auto& s : lane) {
      if (static_cast<int>(report.episodes.size()) >= n_episodes) break;
      report.episodes.push_back(s);
    }

  double err = 0.0, err2 = 0.0, norm = 0.0, stab = 0.0, acc = 0.0;
  for (const auto& s : report.episodes) {
    const double e = s.released ? s.error : s.target_r;
    err += e;
    err2 += e * e;
    norm += e / s.target_r;
    stab += s.stability;
    acc += s.accuracy;
    if (s.stability == 1)
      report.max_stable_landing = std::max(report.max_stable_landing, s.landing_distance);
  }
  const double n = static_cast<double>(report.episodes.size());
  report.mean_error = err / n;
  report.std_error = std::sqrt(std::max(0.0, err2 / n - report.mean_error * report.mean_error));
  report.mean_norm_error = norm / n;
  report.mean_accuracy = acc / n;
  report.stability_rate = stab / n;
  return report;
}

/// Wraps an ActorCritic as a deterministic (mean-action) policy functor.
inline auto mean_policy(const ActorCritic<float>& ac) {
  return [&ac](const ThrowEnv::Obs& obs) -> ThrowEnv::Action {
    const MatX<float> x = obs.cast<float>();
    return ac.actor.forward(x).cast<double>();
  };
}

inline constexpr const char* kErrorByDistanceHeader =
    "r_lo,r_hi,count,mean_error,std_error,stability_rate,mean_norm_error\n";
inline constexpr const char* kPolarGridHeader =
    "phi_lo,phi_hi,theta_lo,theta_hi,count,mean_error\n";

inline void write_error_by_distance(const EvalReport& report, const RunConfig& cfg,
                                    const std::string& path) {
  std::ofstream os(path);
  os << kErrorByDistanceHeader;
  if (report.episodes.empty()) return;
  double lo = report.episodes.front().target_r, hi = lo;
  for (const auto& s : report.episodes) {
    lo = std::min(lo, s.target_r);
    hi = std::max(hi, s.target_r);
  }
  const int bins = std::max(1, cfg.eval.distance_bins);
  const double width = std::max(1e-9, (hi - lo) / bins);
  for (int b = 0; b < bins; ++b) {
    const double b_lo = lo + b * width, b_hi = b_lo + width;
    double err = 0.0, err2 = 0.0, stab = 0.0, norm = 0.0;
    int count = 0;
    for (const auto& s : report.episodes) {
      if (s.target_r < b_lo || (s.target_r >= b_hi && b + 1 < bins)) continue;
      const double e = s.released ? s.error : s.target_r;
      err += e;
      err2 += e * e;
      norm += e / s.target_r;
      stab += s.stability;
      ++count;
    }
    if (count > 0) {
      const double m = err / count;
      os << csv_row({b_lo, b_hi, static_cast<double>(count), m,
                     std::sqrt(std::max(0.0, err2 / count - m * m)), stab / count,
                     norm / count});
    } else {
      os << csv_row({b_lo, b_hi, 0.0, 0.0, 0.0, 0.0, 0.0});
    }
  }
}

inline void write_polar_grid(const EvalReport& report, const RunConfig& cfg,
                             const std::string& path) {
  std::ofstream os(path);
  os << kPolarGridHeader;
  const int pb = std::max(1, cfg.eval.phi_bins);
  const int tb = std::max(1, cfg.eval.theta_bins);
  const double pw = 2.0 * M_PI / pb;
  const double tw = 1.0 / tb;
  for (int p = 0; p < pb; ++p) {
    for (int t = 0; t < tb; ++t) {
      const double p_lo = p * pw, t_lo = t * tw;
      double err = 0.0;
      int count = 0;
      for (const auto& s : report.episodes) {
        if (s.target_phi < p_lo || s.target_phi >= p_lo + pw) continue;
        if (s.target_theta_tilde < t_lo ||
            (s.target_theta_tilde >= t_lo + tw && t + 1 < tb))
          continue;
        err += s.released ? s.error : s.target_r;
        ++count;
      }
      os << csv_row({p_lo, p_lo + pw, t_lo, t_lo + tw, static_cast<double>(count),
                     count > 0 ? err / count : 0.0});
    }
  }
}

inline void write_summary_json(const EvalReport& report, const RunConfig& cfg,
                               const std::string& path) {
  nlohmann::json j;
  j["episodes"] = report.episodes.size();
  j["mean_error"] = report.mean_error;
  j["std_error"] = report.std_error;
  j["mean_norm_error"] = report.mean_norm_error;
  j["mean_accuracy"] = report.mean_accuracy;
  j["stability_rate"] = report.stability_rate;
  j["max_stable_landing_distance"] = report.max_stable_landing;
  j["config"] = to_json(cfg);  // resolved config, for provenance
  std::ofstream os(path);
  os << j.dump(2) << "\n";
}

inline void write_eval_report(const EvalReport& report, const RunConfig& cfg,
                              const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  write_error_by_distance(report, cfg, (fs::path(dir) / "error_by_distance.csv").string());
  write_polar_grid(report, cfg, (fs::path(dir) / "polar_grid.csv").string());
  write_summary_json(report, cfg, (fs::path(dir) / "summary.json").string());
}

/// Cell-wise difference of two polar grids (a - b), matched on bin edges.
/// Feeds the angular-consistency comparison between actuation modes.
inline void polar_grid_difference(const std::string& path_a,
                                  const std::string& path_b,
                                  const std::string& out_path) {
  const auto read = [](const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open polar grid: " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    std::getline(is, line);  // header
    while (std::getline(is, line)) {
      if (line.empty()) continue;
      std::vector<double> row;
      std::stringstream ss(line);
      std::string cell;
      while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
      rows.push_back(std::move(row));
    }
    return rows;
  };
  const auto a = read(path_a);
  const auto b = read(path_b);
  if (a.size() != b.size())
    throw std::runtime_error("polar grids have different bin counts");
  std::ofstream os(out_path);
  os << "phi_lo,phi_hi,theta_lo,theta_hi,count_a,count_b,error_difference\n";
  for (std::size_t i = 0; i < a.size(); ++i) {
    os << csv_row({a[i][0], a[i][1], a[i][2], a[i][3], a[i][4], b[i][4],
                   a[i][5] - b[i][5]});
  }
}

}  // namespace ballista
