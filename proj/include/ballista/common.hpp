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

#include <Eigen/Core>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <random>
#include <string>
#include <thread>
#include <vector>

namespace ballista {

using Vec3 = Eigen::Vector3d;
using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

/// Worker-thread cap: BALLISTA_THREADS if set, hardware concurrency otherwise.
inline int thread_budget() {
  if (const char* env = std::getenv("BALLISTA_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

// Static partitioning; fn(i) must only touch state owned by item i, so the
// result is independent of scheduling.
template <typename F>
void parallel_for(int n, F&& fn, int max_threads = -1) {
  if (max_threads < 0) max_threads = thread_budget();
  const int workers = std::min(max_threads, n);
  if (workers <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const int chunk = (n + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const int lo = w * chunk;
    const int hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn] {
      for (int i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

/// Exponentially weighted mean/variance tracker.
class RunningStats {
 public:
  explicit RunningStats(double rate = 0.01) : rate_(rate) {}

  void push(double x) {
    if (count_ == 0) {
      mean_ = x;
      var_ = 0.0;
    } else {
      const double d = x - mean_;
      mean_ += rate_ * d;
      var_ = (1.0 - rate_) * (var_ + rate_ * d * d);
    }
    ++count_;
  }

  double mean() const { return mean_; }
  double variance() const { return var_; }
  double stddev() const { return std::sqrt(std::max(0.0, var_)); }
  std::int64_t count() const { return count_; }

 private:
  double rate_;
  double mean_ = 0.0;
  double var_ = 0.0;
  std::int64_t count_ = 0;
};

/// Shortest-repr float formatting, stable across runs of the same binary.
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

inline std::string csv_row(const std::vector<double>& vals) {
  std::string out;
  for (std::size_t i = 0; i < vals.size(); ++i) {
    if (i) out += ',';
    out += format_double(vals[i]);
  }
  out += '\n';
  return out;
}

}  // namespace ballista
