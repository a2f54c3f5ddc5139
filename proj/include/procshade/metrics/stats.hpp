#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <future>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "procshade/core/error.hpp"
#include "procshade/core/gzip.hpp"
#include "procshade/core/image.hpp"
#include "procshade/core/jpeg.hpp"
#include "procshade/core/rng.hpp"
#include "procshade/corpus/manifest.hpp"
#include "procshade/metrics/quantile.hpp"
#include "procshade/metrics/stats_record.hpp"
#include "procshade/render/engine.hpp"
#include "procshade/render/timesteps.hpp"

namespace procshade::metrics {

// Defaults: statistics per shader over 400 samples at 384x384.
struct StatsOptions {
  std::size_t samples = 400;
  int width = 384;
  int height = 384;
  int jpeg_quality = kDefaultJpegQuality;
  int self_sim_pairs = 16;    // crop pairs per image
  int self_sim_images = 50;   // images fed to the self-similarity average
  double crop_frac = 0.5;
  std::uint64_t seed = 0;
};

// ---------------------------------------------------------------------------
// Intra-image self-similarity. The perceptual-network distance is out of
// scope; the distance is pluggable and defaults to mean absolute per-pixel
// difference after box-downsampling both crops to 32x32.
// ---------------------------------------------------------------------------

using ImageDistance = std::function<double(const Image&, const Image&)>;

inline Image box_downsample(const Image& src, int out_w, int out_h) {
  Image out;
  out.width = out_w;
  out.height = out_h;
  out.pixels.resize(static_cast<std::size_t>(out_w) * out_h * 3);
  for (int oy = 0; oy < out_h; ++oy) {
    const int y0 = oy * src.height / out_h;
    const int y1 = std::max(y0 + 1, (oy + 1) * src.height / out_h);
    for (int ox = 0; ox < out_w; ++ox) {
      const int x0 = ox * src.width / out_w;
      const int x1 = std::max(x0 + 1, (ox + 1) * src.width / out_w);
      std::uint32_t acc[3] = {0, 0, 0};
      for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x) {
          const std::uint8_t* p = src.at(x, y);
          acc[0] += p[0];
          acc[1] += p[1];
          acc[2] += p[2];
        }
      const std::uint32_t count = static_cast<std::uint32_t>((y1 - y0) * (x1 - x0));
      std::uint8_t* q = out.at(ox, oy);
      for (int c = 0; c < 3; ++c)
        q[c] = static_cast<std::uint8_t>((acc[c] + count / 2) / count);
    }
  }
  return out;
}

// Mean absolute difference on [0,1] after 32x32 downsampling. 0 for equal
// crops, 1 for black vs white.
inline double default_crop_distance(const Image& a, const Image& b) {
  const Image da = box_downsample(a, 32, 32);
  const Image db = box_downsample(b, 32, 32);
  double acc = 0;
  for (std::size_t i = 0; i < da.pixels.size(); ++i)
    acc += std::abs(static_cast<int>(da.pixels[i]) - static_cast<int>(db.pixels[i])) / 255.0;
  return acc / static_cast<double>(da.pixels.size());
}

inline Image crop_image(const Image& src, int x0, int y0, int side) {
  Image out;
  out.width = side;
  out.height = side;
  out.pixels.resize(static_cast<std::size_t>(side) * side * 3);
  for (int y = 0; y < side; ++y)
    std::copy_n(src.at(x0, y0 + y), static_cast<std::size_t>(side) * 3, out.at(0, y));
  return out;
}

// Side of a square crop covering `crop_frac` of the image area.
inline int crop_side_for_fraction(const Image& img, double crop_frac) {
  if (!(crop_frac > 0.0) || crop_frac > 1.0)
    raise(Errc::BadParameter, "crop fraction must be in (0, 1]");
  const double area = crop_frac * static_cast<double>(img.width) * img.height;
  const int side = std::max(1, static_cast<int>(std::lround(std::sqrt(area))));
  if (side > img.width || side > img.height)
    raise(Errc::CropTooLarge, "square crop of area fraction " + std::to_string(crop_frac) +
                                  " does not fit in " + std::to_string(img.width) + "x" +
                                  std::to_string(img.height));
  return side;
}

inline double crop_pair_distance(const Image& img, int ax, int ay, int bx, int by, int side,
                                 const ImageDistance& distance) {
  return distance(crop_image(img, ax, ay, side), crop_image(img, bx, by, side));
}

// Mean distance over n_pairs independently positioned square crop pairs, each
// crop covering crop_frac of the image area.
inline double self_similarity(const Image& img, int n_pairs, double crop_frac,
                              const ImageDistance& distance, Rng& rng) {
  if (n_pairs < 1) raise(Errc::BadParameter, "self_similarity needs n_pairs >= 1");
  const int side = crop_side_for_fraction(img, crop_frac);
  const std::uint64_t span_x = static_cast<std::uint64_t>(img.width - side) + 1;
  const std::uint64_t span_y = static_cast<std::uint64_t>(img.height - side) + 1;
  double acc = 0;
  for (int k = 0; k < n_pairs; ++k) {
    const int ax = static_cast<int>(rng.below(span_x));
    const int ay = static_cast<int>(rng.below(span_y));
    const int bx = static_cast<int>(rng.below(span_x));
    const int by = static_cast<int>(rng.below(span_y));
    acc += crop_pair_distance(img, ax, ay, bx, by, side, distance);
  }
  return acc / n_pairs;
}

// ---------------------------------------------------------------------------
// Per-shader statistics
// ---------------------------------------------------------------------------

// Renders `samples` frames from the shader's timestep plan and accumulates:
// mean JPEG KiB, mean gzip KiB of each raw frame compressed on its own, FPS
// over the same render loop (readback included), and self-similarity over the
// first self_sim_images frames.
inline StatsRecord compute_stats(render::RenderEngine& engine, const corpus::ProgramRecord& rec,
                                 const StatsOptions& opt,
                                 const ImageDistance& distance = default_crop_distance) {
  if (opt.samples == 0) raise(Errc::ZeroCount, "stats need samples >= 1");
  if (!rec.usable())
    raise(Errc::InvalidArgument, "stats need a compiled, unique, non-static program");

  const render::TimestepPlan plan =
      render::sample_timesteps(opt.samples, Rng::keyed(opt.seed, "stats").derive(rec.id).next_u64());
  const std::string glsl = rec.glsl;
  const std::string id = rec.id;

  auto fut = engine.submit([&, glsl, id](render::RenderEngine::Worker& w) {
    StatsRecord out;
    out.shader_id = id;
    out.char_count = rec.char_count;
    out.samples_used = opt.samples;
    out.width = opt.width;
    out.height = opt.height;

    auto handle = w.program(glsl);
    Rng sim_rng = Rng::keyed(opt.seed, "self_sim").derive(id);
    double jpeg_bytes = 0, gzip_bytes = 0, sim_acc = 0;
    int sim_images = 0;
    double render_secs = 0;  // render + readback only; encode time excluded

    for (std::size_t k = 0; k < plan.values.size(); ++k) {
      const auto t0 = std::chrono::steady_clock::now();
      Image img = w.ctx->render(*handle, plan.values[k], opt.width, opt.height);
      render_secs += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      jpeg_bytes += static_cast<double>(encode_jpeg(img, opt.jpeg_quality).size());
      gzip_bytes += static_cast<double>(gzip_compressed_size(img.pixels));
      if (sim_images < opt.self_sim_images) {
        sim_acc += self_similarity(img, opt.self_sim_pairs, opt.crop_frac, distance, sim_rng);
        ++sim_images;
      }
    }

    out.jpeg_kb = jpeg_bytes / static_cast<double>(opt.samples) / 1024.0;
    out.gzip_kb = gzip_bytes / static_cast<double>(opt.samples) / 1024.0;
    out.fps = static_cast<double>(opt.samples) / render_secs;
    out.self_sim = sim_images ? sim_acc / sim_images : 0.0;
    return out;
  });
  return fut.get();
}

// Computes stats for every usable record lacking them (or all, when `force`).
inline std::size_t compute_all_stats(render::RenderEngine& engine,
                                     corpus::CorpusManifest& manifest, const StatsOptions& opt,
                                     bool force = false,
                                     const ImageDistance& distance = default_crop_distance) {
  std::size_t done = 0;
  for (auto& rec : manifest.records()) {
    if (!rec.usable()) continue;
    if (rec.stats && !force) continue;
    rec.stats = compute_stats(engine, rec, opt, distance);
    ++done;
  }
  auto& settings = manifest.settings();
  settings["stats"] = {{"samples", opt.samples},
                       {"resolution", {opt.width, opt.height}},
                       {"jpeg_quality", opt.jpeg_quality},
                       {"self_sim_pairs", opt.self_sim_pairs},
                       {"self_sim_images", opt.self_sim_images},
                       {"crop_frac", opt.crop_frac},
                       {"seed", opt.seed}};
  return done;
}

// ---------------------------------------------------------------------------
// Corpus summary (average and 5/95 nearest-rank quantiles per metric)
// ---------------------------------------------------------------------------

struct CorpusSummary {
  std::string subset;
  std::size_t shaders = 0;
  SummaryStat chars, jpeg_kb, gzip_kb, fps, self_sim;
  std::optional<double> external_fid;  // slot for externally computed FID

  nlohmann::ordered_json to_json() const {
    auto stat = [](const SummaryStat& s) {
      return nlohmann::ordered_json{{"avg", s.avg}, {"q5", s.q5}, {"q95", s.q95}};
    };
    nlohmann::ordered_json j;
    j["subset"] = subset;
    j["shaders"] = shaders;
    j["chars"] = stat(chars);
    j["jpeg_kb"] = stat(jpeg_kb);
    j["gzip_kb"] = stat(gzip_kb);
    j["fps"] = stat(fps);
    j["self_sim"] = stat(self_sim);
    if (external_fid)
      j["fid"] = *external_fid;
    else
      j["fid"] = nullptr;
    return j;
  }
};

using SubsetFilter = std::function<bool(const corpus::ProgramRecord&)>;

inline SubsetFilter subset_all() {
  return [](const corpus::ProgramRecord&) { return true; };
}
inline SubsetFilter subset_dialect(corpus::Dialect d) {
  return [d](const corpus::ProgramRecord& r) { return r.dialect == d; };
}

inline CorpusSummary summarize(const corpus::CorpusManifest& manifest, const SubsetFilter& filter,
                               const std::string& subset_name) {
  std::vector<double> chars, jpeg, gz, fps, sim;
  for (const auto& rec : manifest.records()) {
    if (!rec.stats || !filter(rec)) continue;
    chars.push_back(static_cast<double>(rec.stats->char_count));
    jpeg.push_back(rec.stats->jpeg_kb);
    gz.push_back(rec.stats->gzip_kb);
    fps.push_back(rec.stats->fps);
    sim.push_back(rec.stats->self_sim);
  }
  if (chars.empty())
    raise(Errc::EmptySubset, "no records with stats in subset '" + subset_name + "'");
  CorpusSummary s;
  s.subset = subset_name;
  s.shaders = chars.size();
  s.chars = summarize_values(std::move(chars));
  s.jpeg_kb = summarize_values(std::move(jpeg));
  s.gzip_kb = summarize_values(std::move(gz));
  s.fps = summarize_values(std::move(fps));
  s.self_sim = summarize_values(std::move(sim));
  return s;
}

// ---------------------------------------------------------------------------
// Score-driven selection plumbing: scores come from outside (a predictor, a
// human, anything); this just orders and truncates.
// ---------------------------------------------------------------------------

inline std::vector<std::string> select_top_k(const std::map<std::string, double>& scores,
                                             std::size_t k) {
  if (k > scores.size())
    raise(Errc::KTooLarge, "k=" + std::to_string(k) + " exceeds " +
                               std::to_string(scores.size()) + " scored shaders");
  std::vector<std::pair<std::string, double>> items(scores.begin(), scores.end());
  std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;  // descending score
    return a.first < b.first;                              // ties: ascending id
  });
  std::vector<std::string> ids;
  ids.reserve(k);
  for (std::size_t i = 0; i < k; ++i) ids.push_back(items[i].first);
  return ids;
}

}  // namespace procshade::metrics
