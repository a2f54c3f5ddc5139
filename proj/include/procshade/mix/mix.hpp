#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "procshade/core/error.hpp"
#include "procshade/core/image.hpp"
#include "procshade/core/rng.hpp"

namespace procshade::mix {

enum class MixMode : std::uint8_t { None = 0, Mixup = 1, Cutmix = 2 };

inline const char* mix_mode_name(MixMode m) {
  switch (m) {
    case MixMode::None: return "none";
    case MixMode::Mixup: return "mixup";
    case MixMode::Cutmix: return "cutmix";
  }
  return "?";
}

inline MixMode parse_mix_mode(const std::string& s) {
  if (s == "none") return MixMode::None;
  if (s == "mixup") return MixMode::Mixup;
  if (s == "cutmix") return MixMode::Cutmix;
  raise(Errc::InvalidArgument, "unknown mix mode '" + s + "'");
}

// Defaults: six frames mixed with a flat Dirichlet (alpha = 1).
struct MixSpec {
  MixMode mode = MixMode::Mixup;
  int n = 6;
  double alpha = 1.0;
  std::uint64_t seed = 0;

  void validate() const {
    if (n < 1) raise(Errc::BadParameter, "mix frame count must be >= 1");
    if (!(alpha > 0)) raise(Errc::BadParameter, "dirichlet alpha must be > 0");
    if (mode == MixMode::None && n != 1)
      raise(Errc::BadParameter, "mode=none implies n=1");
  }
};

// One source program's contribution to a synthesized sample.
struct SourceRef {
  std::string shader_id;
  double t = 0;
  double weight = 1.0;
  bool has_rect = false;
  std::array<int, 4> rect{0, 0, 0, 0};  // x, y, w, h
};

struct MixedSample {
  Image image;
  std::vector<SourceRef> sources;
  MixSpec spec;
};

// n non-negative weights on the simplex, deterministic in the rng stream.
inline std::vector<double> sample_dirichlet(int n, double alpha, Rng& rng) {
  if (n < 1) raise(Errc::BadParameter, "dirichlet needs n >= 1");
  if (!(alpha > 0)) raise(Errc::BadParameter, "dirichlet needs alpha > 0");
  if (n == 1) return {1.0};
  std::vector<double> w(n);
  double sum = 0;
  for (double& x : w) {
    x = rng.gamma(alpha);
    sum += x;
  }
  if (!(sum > 0)) {  // vanishingly unlikely underflow for tiny alpha
    for (double& x : w) x = 1.0 / n;
    return w;
  }
  for (double& x : w) x /= sum;
  return w;
}

inline std::vector<double> sample_dirichlet(int n, double alpha, std::uint64_t seed) {
  Rng rng = Rng::keyed(seed, "dirichlet");
  return sample_dirichlet(n, alpha, rng);
}

// Per-pixel convex combination in [0,1] space, quantized once at the end by
// round-to-nearest (half away from zero). Weights are snapped to 32-bit
// fixed point and accumulated in integers: a single rounding step at the end
// (no compounding across terms) and an accumulation that is exactly
// commutative, so jointly permuting (images, weights) cannot change a byte.
inline Image mixup(std::span<const Image> images, std::span<const double> weights) {
  if (images.empty()) raise(Errc::BadParameter, "mixup needs at least one image");
  if (images.size() > (1u << 20)) raise(Errc::BadParameter, "too many mixup inputs");
  if (images.size() != weights.size())
    raise(Errc::WeightMismatch, "got " + std::to_string(images.size()) + " images but " +
                                    std::to_string(weights.size()) + " weights");
  double sum = 0;
  for (double w : weights) {
    if (w < 0) raise(Errc::WeightMismatch, "mixup weights must be non-negative");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-6)
    raise(Errc::WeightMismatch, "weights sum to " + std::to_string(sum) + ", expected 1");
  const int w = images[0].width, h = images[0].height;
  for (const Image& img : images)
    if (img.width != w || img.height != h)
      raise(Errc::DimensionMismatch, "mixup inputs must share one resolution");

  constexpr double kOne = 4294967296.0;  // 2^32
  std::vector<std::uint64_t> wfix(images.size());
  for (std::size_t k = 0; k < weights.size(); ++k)
    wfix[k] = static_cast<std::uint64_t>(std::llround(weights[k] * kOne));

  const std::size_t n_bytes = images[0].pixels.size();
  std::vector<std::uint64_t> acc(n_bytes, 0);
  for (std::size_t k = 0; k < images.size(); ++k) {
    const std::uint64_t wk = wfix[k];
    const std::uint8_t* px = images[k].pixels.data();
    for (std::size_t i = 0; i < n_bytes; ++i) acc[i] += wk * px[i];
  }
  Image out;
  out.width = w;
  out.height = h;
  out.pixels.resize(n_bytes);
  for (std::size_t i = 0; i < n_bytes; ++i) {
    const std::uint64_t rounded = (acc[i] + (1ull << 31)) >> 32;
    out.pixels[i] = static_cast<std::uint8_t>(std::min<std::uint64_t>(rounded, 255));
  }
  return out;
}

// Pastes `rect` (x, y, w, h) of `donor` onto `canvas` in place.
inline void paste_rect(Image& canvas, const Image& donor, const std::array<int, 4>& rect) {
  const auto [x0, y0, rw, rh] = rect;
  for (int y = y0; y < y0 + rh; ++y) {
    const std::uint8_t* src = donor.at(x0, y);
    std::uint8_t* dst = canvas.at(x0, y);
    std::copy_n(src, static_cast<std::size_t>(rw) * 3, dst);
  }
}

inline constexpr std::array<double, 2> kCutmixAreaRange{0.1, 0.5};

// images[0] is the base; donors are pasted in order, each into a rectangle
// with area fraction uniform in `area_range` and uniform position fully
// inside the canvas. Draw order per donor: area, x, y. Rects are recorded so
// a sample can be replayed from provenance alone.
inline MixedSample cutmix(std::span<const Image> images, Rng& rng,
                          std::array<double, 2> area_range = kCutmixAreaRange) {
  if (images.empty()) raise(Errc::BadParameter, "cutmix needs at least one image");
  const int w = images[0].width, h = images[0].height;
  for (const Image& img : images)
    if (img.width != w || img.height != h)
      raise(Errc::DimensionMismatch, "cutmix inputs must share one resolution");

  MixedSample sample;
  sample.image = images[0];
  sample.sources.push_back({images[0].shader_id, images[0].t, 1.0, false, {0, 0, 0, 0}});
  for (std::size_t k = 1; k < images.size(); ++k) {
    const double area = rng.uniform(area_range[0], area_range[1]);
    const double side = std::sqrt(area);
    const int rw = std::clamp(static_cast<int>(std::lround(w * side)), 1, w);
    const int rh = std::clamp(static_cast<int>(std::lround(h * side)), 1, h);
    const int x0 = static_cast<int>(rng.below(static_cast<std::uint64_t>(w - rw + 1)));
    const int y0 = static_cast<int>(rng.below(static_cast<std::uint64_t>(h - rh + 1)));
    const std::array<int, 4> rect{x0, y0, rw, rh};
    paste_rect(sample.image, images[k], rect);
    sample.sources.push_back({images[k].shader_id, images[k].t, 0.0, true, rect});
  }
  return sample;
}

}  // namespace procshade::mix
