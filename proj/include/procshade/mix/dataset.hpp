#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <string>
#include <vector>

#include <json.hpp>

#include "procshade/core/error.hpp"
#include "procshade/core/jpeg.hpp"
#include "procshade/corpus/manifest.hpp"
#include "procshade/mix/mix.hpp"
#include "procshade/render/engine.hpp"
#include "procshade/render/timesteps.hpp"
#include "procshade/version.hpp"

namespace procshade::mix {

// A shader available for sampling: id plus its normalized GLSL.
struct PoolEntry {
  std::string id;
  const std::string* glsl;
};

inline std::vector<PoolEntry> sampling_pool(const corpus::CorpusManifest& manifest) {
  std::vector<PoolEntry> pool;
  for (const corpus::ProgramRecord* rec : manifest.unique_pool())
    pool.push_back({rec->id, &rec->glsl});
  return pool;
}

using RenderFn = std::function<Image(const PoolEntry&, double t)>;

// Synthesizes sample `index` of a dataset stream. Everything about the sample
// is a pure function of (pool order, spec, dataset_seed, index):
//   - the RNG stream is derived from (dataset_seed, index), so synthesis is
//     schedule-independent,
//   - source programs are drawn uniformly without replacement from the pool,
//   - each source slot gets its own timestep stream; the frame index is the
//     sample index, matching the corpus-wide 4 fps prior,
//   - mixup weights / cutmix rects come from dedicated child streams.
inline MixedSample synthesize_sample(const std::vector<PoolEntry>& pool, const MixSpec& spec,
                                     int width, int height, std::uint64_t dataset_seed,
                                     std::uint64_t index, const RenderFn& render,
                                     double base_rate = render::kDefaultFrameRate) {
  spec.validate();
  if (pool.size() < static_cast<std::size_t>(spec.n))
    raise(Errc::InsufficientPrograms,
          "need " + std::to_string(spec.n) + " unique non-static programs, have " +
              std::to_string(pool.size()));

  Rng sample_rng = Rng(dataset_seed).derive("sample").derive(index);

  // partial Fisher-Yates over pool indices
  Rng select_rng = sample_rng.derive("select");
  std::vector<std::uint32_t> idx(pool.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<std::uint32_t>(i);
  for (int k = 0; k < spec.n; ++k) {
    const std::size_t j = k + select_rng.below(idx.size() - k);
    std::swap(idx[k], idx[j]);
  }

  std::vector<Image> frames;
  frames.reserve(spec.n);
  Rng t_rng = sample_rng.derive("timesteps");
  for (int k = 0; k < spec.n; ++k) {
    const PoolEntry& entry = pool[idx[k]];
    const std::uint64_t slot_seed = t_rng.derive(static_cast<std::uint64_t>(k)).next_u64();
    const double t = render::timestep_at(slot_seed, index, base_rate);
    Image img = render(entry, t);
    if (img.width != width || img.height != height)
      raise(Errc::DimensionMismatch, "render callback ignored the requested resolution");
    img.shader_id = entry.id;
    img.t = t;
    frames.push_back(std::move(img));
  }

  MixedSample sample;
  sample.spec = spec;
  switch (spec.mode) {
    case MixMode::None: {
      sample.image = frames[0];
      sample.sources.push_back({frames[0].shader_id, frames[0].t, 1.0, false, {0, 0, 0, 0}});
      break;
    }
    case MixMode::Mixup: {
      Rng w_rng = sample_rng.derive("weights");
      const std::vector<double> weights = sample_dirichlet(spec.n, spec.alpha, w_rng);
      sample.image = mixup(frames, weights);
      for (int k = 0; k < spec.n; ++k)
        sample.sources.push_back({frames[k].shader_id, frames[k].t, weights[k], false, {}});
      break;
    }
    case MixMode::Cutmix: {
      Rng r_rng = sample_rng.derive("rects");
      MixedSample cm = cutmix(frames, r_rng);
      sample.image = std::move(cm.image);
      sample.sources = std::move(cm.sources);
      break;
    }
  }
  sample.image.shader_id.clear();
  return sample;
}

inline nlohmann::ordered_json provenance_row(std::uint64_t index, const std::string& image_path,
                                             const MixedSample& sample) {
  nlohmann::ordered_json row;
  row["index"] = index;
  row["image"] = image_path;
  nlohmann::ordered_json sources = nlohmann::ordered_json::array();
  for (const SourceRef& s : sample.sources) {
    nlohmann::ordered_json src;
    src["id"] = s.shader_id;
    src["t"] = s.t;
    if (s.has_rect)
      src["rect"] = {s.rect[0], s.rect[1], s.rect[2], s.rect[3]};
    else
      src["weight"] = s.weight;
    sources.push_back(std::move(src));
  }
  row["sources"] = std::move(sources);
  return row;
}

struct DatasetReport {
  std::size_t count = 0;
  std::filesystem::path out_dir;
  std::filesystem::path provenance_path;
};

// Offline dataset build: `count` JPEGs under images/ plus provenance.manifest
// (header line with the full spec echo and encoder settings, then one row per
// image). Deterministic in (manifest order by id, spec, seed): a rerun
// produces byte-identical provenance and image files.
inline DatasetReport build_mixed_dataset(render::RenderEngine& engine,
                                         const corpus::CorpusManifest& manifest,
                                         std::size_t count, const MixSpec& spec, int width,
                                         int height, std::uint64_t seed,
                                         const std::filesystem::path& out_dir,
                                         int jpeg_quality = kDefaultJpegQuality) {
  namespace fs = std::filesystem;
  spec.validate();
  if (width < 1 || height < 1) raise(Errc::BadParameter, "resolution must be >= 1x1");
  const std::vector<PoolEntry> pool = sampling_pool(manifest);
  if (pool.size() < static_cast<std::size_t>(spec.n))
    raise(Errc::InsufficientPrograms,
          "need " + std::to_string(spec.n) + " unique non-static programs, have " +
              std::to_string(pool.size()));

  std::error_code ec;
  fs::create_directories(out_dir / "images", ec);
  if (ec) raise(Errc::IoError, "cannot create " + (out_dir / "images").string());

  std::vector<std::future<nlohmann::ordered_json>> rows;
  rows.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    rows.push_back(engine.submit([&, i](render::RenderEngine::Worker& w) {
      const RenderFn render = [&w, width, height](const PoolEntry& entry, double t) {
        return w.ctx->render(*w.program(*entry.glsl), t, width, height);
      };
      MixedSample sample =
          synthesize_sample(pool, spec, width, height, seed, i, render);
      char name[32];
      std::snprintf(name, sizeof name, "%07zu.jpg", i);
      const std::string rel = std::string("images/") + name;
      const auto jpeg = encode_jpeg(sample.image, jpeg_quality);
      std::ofstream img_out(out_dir / rel, std::ios::binary | std::ios::trunc);
      if (!img_out) raise(Errc::IoError, "cannot write " + (out_dir / rel).string());
      img_out.write(reinterpret_cast<const char*>(jpeg.data()),
                    static_cast<std::streamsize>(jpeg.size()));
      if (!img_out) raise(Errc::IoError, "short write " + (out_dir / rel).string());
      return provenance_row(i, rel, sample);
    }));
  }

  nlohmann::ordered_json header;
  header["format"] = "procshade-dataset";
  header["format_version"] = 1;
  header["count"] = count;
  header["mode"] = mix_mode_name(spec.mode);
  header["n"] = spec.n;
  header["alpha"] = spec.alpha;
  header["seed"] = seed;
  header["resolution"] = {width, height};
  header["base_rate"] = render::kDefaultFrameRate;
  header["jpeg_quality"] = jpeg_quality;
  header["encoder"] = "libjpeg-baseline";
  header["tool_version"] = kVersion;

  const fs::path prov_path = out_dir / "provenance.manifest";
  std::ofstream prov(prov_path, std::ios::trunc);
  if (!prov) raise(Errc::IoError, "cannot write " + prov_path.string());
  prov << header.dump() << "\n";
  for (auto& fut : rows) prov << fut.get().dump() << "\n";
  if (!prov) raise(Errc::IoError, "short write " + prov_path.string());

  DatasetReport report;
  report.count = count;
  report.out_dir = out_dir;
  report.provenance_path = prov_path;
  return report;
}

}  // namespace procshade::mix
