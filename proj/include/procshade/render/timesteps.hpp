#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "procshade/core/error.hpp"
#include "procshade/core/rng.hpp"

namespace procshade::render {

inline constexpr double kDefaultFrameRate = 4.0;  // frames per second

// Sampled render times: t_k = k / rate + delta_k, with delta_k drawn
// independently per frame from U[0, 1/rate). At the default 4 fps that is
// U[0, 0.25), which keeps t strictly increasing and avoids exact duplicates
// for periodic shaders.
struct TimestepPlan {
  double base_rate = kDefaultFrameRate;
  std::uint64_t seed = 0;
  std::vector<double> offsets;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
};

// Random access into the timestep stream: the offset for frame k depends only
// on (seed, k), so plans of different lengths agree on their common prefix.
inline double timestep_offset(std::uint64_t seed, std::uint64_t frame_index,
                              double base_rate = kDefaultFrameRate) {
  Rng rng = Rng::keyed(seed, "timesteps").derive(frame_index);
  return rng.uniform01() / base_rate;
}

inline double timestep_at(std::uint64_t seed, std::uint64_t frame_index,
                          double base_rate = kDefaultFrameRate) {
  return static_cast<double>(frame_index) / base_rate +
         timestep_offset(seed, frame_index, base_rate);
}

inline TimestepPlan sample_timesteps(std::size_t n, std::uint64_t seed,
                                     double base_rate = kDefaultFrameRate) {
  if (n < 1) raise(Errc::ZeroCount, "sample_timesteps requires n >= 1");
  if (!(base_rate > 0)) raise(Errc::BadParameter, "base_rate must be > 0");
  TimestepPlan plan;
  plan.base_rate = base_rate;
  plan.seed = seed;
  plan.offsets.reserve(n);
  plan.values.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double off = timestep_offset(seed, k, base_rate);
    plan.offsets.push_back(off);
    plan.values.push_back(static_cast<double>(k) / base_rate + off);
  }
  return plan;
}

// What to render: output raster size (RGB8) plus the sampled times.
struct RenderSpec {
  int width = 384;
  int height = 384;
  TimestepPlan timesteps;

  void validate() const {
    if (width < 1 || height < 1) raise(Errc::InvalidArgument, "resolution must be >= 1x1");
    for (double t : timesteps.values)
      if (!(t >= 0.0) || !std::isfinite(t))
        raise(Errc::InvalidArgument, "timesteps must be finite and >= 0");
  }
};

}  // namespace procshade::render
