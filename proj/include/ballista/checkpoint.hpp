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

#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ballista/net.hpp"

namespace ballista {

// Versioned flat-weight checkpoint:
//   magic "BLST", u32 version, u32 obs_dim, u32 act_dim,
//   u32 n_hidden, u32 hidden[n_hidden],
// followed by float32 little-endian arrays in fixed order: actor layers
// (weight row-major, then bias), actor log-std, critic layers.

inline constexpr char kCheckpointMagic[4] = {'B', 'L', 'S', 'T'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

namespace detail {

inline void write_u32(std::ostream& os, std::uint32_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

inline std::uint32_t read_u32(std::istream& is) {
  std::uint32_t v = 0;
  is.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}

inline void write_f32(std::ostream& os, const float* data, std::size_t n) {
  os.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(n * 4));
}

inline void read_f32(std::istream& is, float* data, std::size_t n) {
  is.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(n * 4));
}

inline void write_mlp(std::ostream& os, const Mlp<float>& net) {
  for (const auto& lin : net.layers()) {
    // Row-major weights.
    for (Eigen::Index r = 0; r < lin.weight.rows(); ++r)
      for (Eigen::Index c = 0; c < lin.weight.cols(); ++c) {
        const float v = lin.weight(r, c);
        write_f32(os, &v, 1);
      }
    write_f32(os, lin.bias.data(), static_cast<std::size_t>(lin.bias.size()));
  }
}

inline void read_mlp(std::istream& is, Mlp<float>& net) {
  for (auto& lin : net.layers()) {
    for (Eigen::Index r = 0; r < lin.weight.rows(); ++r)
      for (Eigen::Index c = 0; c < lin.weight.cols(); ++c) {
        float v;
        read_f32(is, &v, 1);
        lin.weight(r, c) = v;
      }
    read_f32(is, lin.bias.data(), static_cast<std::size_t>(lin.bias.size()));
  }
}

}  // namespace detail

struct CheckpointHeader {
  int obs_dim = 0;
  int act_dim = 0;
  std::vector<int> hidden;
};

inline void save_checkpoint(const ActorCritic<float>& ac,
                            const std::vector<int>& hidden,
                            const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("save_checkpoint: cannot open " + path);
  os.write(kCheckpointMagic, 4);
  detail::write_u32(os, kCheckpointVersion);
  detail::write_u32(os, static_cast<std::uint32_t>(ac.obs_dim));
  detail::write_u32(os, static_cast<std::uint32_t>(ac.act_dim));
  detail::write_u32(os, static_cast<std::uint32_t>(hidden.size()));
  for (int h : hidden) detail::write_u32(os, static_cast<std::uint32_t>(h));
  detail::write_mlp(os, ac.actor);
  detail::write_f32(os, ac.log_std.data(), static_cast<std::size_t>(ac.log_std.size()));
  detail::write_mlp(os, ac.critic);
  if (!os) throw std::runtime_error("save_checkpoint: write failed for " + path);
}

inline ActorCritic<float> load_checkpoint(const std::string& path,
                                          CheckpointHeader* header = nullptr) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("load_checkpoint: cannot open " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::string(magic, 4) != std::string(kCheckpointMagic, 4))
    throw std::runtime_error("load_checkpoint: bad magic in " + path);
  const std::uint32_t version = detail::read_u32(is);
  if (version != kCheckpointVersion)
    throw std::runtime_error("load_checkpoint: unsupported version");
  const int obs_dim = static_cast<int>(detail::read_u32(is));
  const int act_dim = static_cast<int>(detail::read_u32(is));
  const int n_hidden = static_cast<int>(detail::read_u32(is));
  if (obs_dim <= 0 || act_dim <= 0 || n_hidden < 0 || n_hidden > 64)
    throw std::runtime_error("load_checkpoint: corrupt header");
  std::vector<int> hidden(n_hidden);
  for (int& h : hidden) h = static_cast<int>(detail::read_u32(is));

  Rng rng(0);
  ActorCritic<float> ac = ActorCritic<float>::make(obs_dim, act_dim, hidden, 0.5, rng);
  detail::read_mlp(is, ac.actor);
  detail::read_f32(is, ac.log_std.data(), static_cast<std::size_t>(ac.log_std.size()));
  detail::read_mlp(is, ac.critic);
  if (!is) throw std::runtime_error("load_checkpoint: truncated file " + path);
  if (header) *header = CheckpointHeader{obs_dim, act_dim, hidden};
  return ac;
}

}  // namespace ballista
