#pragma once

#include <algorithm>
#include <future>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "procshade/core/error.hpp"
#include "procshade/core/hash.hpp"
#include "procshade/core/image.hpp"
#include "procshade/corpus/manifest.hpp"
#include "procshade/render/engine.hpp"
#include "procshade/render/timesteps.hpp"

namespace procshade::dedup {

// Content hash of a rendered frame: digest over the pixel bytes only, so
// equal images from different shaders collide by construction.
struct Fingerprint {
  std::string digest;  // hex
  double t_used = 0;
  int width = 0;
  int height = 0;
};

inline Fingerprint fingerprint(const Image& img) {
  Fingerprint fp;
  fp.digest = image_digest_hex(img);
  fp.t_used = img.t;
  fp.width = img.width;
  fp.height = img.height;
  return fp;
}

struct PruneReport {
  std::size_t input = 0;       // records examined
  std::size_t duplicates = 0;  // newly marked duplicate_of
  std::size_t statics = 0;     // newly marked static
  std::size_t failed = 0;      // render failures, skipped and flagged
  std::size_t kept = 0;        // compiled unique records after the pass

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["input"] = input;
    j["duplicates"] = duplicates;
    j["static"] = statics;
    j["failed"] = failed;
    j["kept"] = kept;
    return j;
  }

  std::string summary() const {
    return "examined " + std::to_string(input) + ": +" + std::to_string(duplicates) +
           " duplicates, +" + std::to_string(statics) + " static, " + std::to_string(failed) +
           " render failures, " + std::to_string(kept) + " unique kept";
  }
};

namespace detail {

inline void require_no_pending(const corpus::CorpusManifest& manifest) {
  for (const auto& r : manifest.records())
    if (r.status == corpus::Status::Pending)
      raise(Errc::InvalidArgument, "manifest has pending records; run validate first");
}

inline std::size_t count_kept(const corpus::CorpusManifest& manifest) {
  std::size_t kept = 0;
  for (const auto& r : manifest.records())
    if (r.usable()) ++kept;
  return kept;
}

// Re-points duplicates of `old_head` after it stops being unique. The
// invariant "duplicate_of references a unique record" survives any call
// order of the two pruning passes.
inline std::vector<std::string> promote_duplicates_of(corpus::CorpusManifest& manifest,
                                                      const std::string& old_head) {
  std::vector<corpus::ProgramRecord*> dependents;
  for (auto& r : manifest.records())
    if (r.dedup == corpus::DedupState::Duplicate && r.duplicate_of == old_head)
      dependents.push_back(&r);
  if (dependents.empty()) return {};
  std::sort(dependents.begin(), dependents.end(),
            [](auto* a, auto* b) { return a->id < b->id; });
  corpus::ProgramRecord* new_head = dependents.front();
  new_head->dedup = corpus::DedupState::Unique;
  new_head->duplicate_of.clear();
  for (std::size_t i = 1; i < dependents.size(); ++i)
    dependents[i]->duplicate_of = new_head->id;
  return {new_head->id};
}

}  // namespace detail

// Removes exact duplicates: renders one frame per unique compiled record at
// `t0`, groups by fingerprint, and keeps the lexicographically smallest id of
// each group. Records whose render fails are skipped and flagged as rejected.
// Idempotent, and the kept set does not depend on manifest order.
inline PruneReport remove_duplicates(render::RenderEngine& engine,
                                     corpus::CorpusManifest& manifest, double t0, int width,
                                     int height) {
  detail::require_no_pending(manifest);
  PruneReport report;

  struct Item {
    std::string id;
    std::future<Image> fut;
  };
  std::vector<Item> items;
  for (auto& rec : manifest.records()) {
    if (!rec.usable()) continue;
    const std::string glsl = rec.glsl;
    items.push_back({rec.id, engine.submit([glsl, t0, width, height](auto& w) {
                       return w.ctx->render(*w.program(glsl), t0, width, height);
                     })});
  }
  report.input = items.size();

  std::map<std::string, std::vector<std::string>> groups;  // digest -> ids
  for (Item& item : items) {
    try {
      Image img = item.fut.get();
      img.t = t0;
      groups[fingerprint(img).digest].push_back(item.id);
    } catch (const Error& e) {
      auto& rec = manifest.at(item.id);
      rec.status = corpus::Status::Rejected;
      rec.reject_reason = std::string(errc_name(e.code())) + ": " + e.message();
      ++report.failed;
    }
  }

  for (auto& [digest, ids] : groups) {
    if (ids.size() < 2) continue;
    std::sort(ids.begin(), ids.end());
    const std::string& kept = ids.front();
    for (std::size_t i = 1; i < ids.size(); ++i) {
      auto& rec = manifest.at(ids[i]);
      rec.dedup = corpus::DedupState::Duplicate;
      rec.duplicate_of = kept;
      ++report.duplicates;
    }
  }

  auto& settings = manifest.settings();
  settings["dedup_duplicates"] = {{"t0", t0}, {"resolution", {width, height}}};
  report.kept = detail::count_kept(manifest);
  return report;
}

// Removes static programs: renders k probe frames from a fixed recorded
// timestep plan and marks a record static iff the maximum absolute
// per-channel difference across all probes is <= threshold. threshold 0 is
// the byte-exact default; 255 marks everything static (useful boundary).
inline PruneReport remove_static(render::RenderEngine& engine, corpus::CorpusManifest& manifest,
                                 int k_probes, int threshold, int width, int height,
                                 std::uint64_t probe_seed) {
  if (k_probes < 2) raise(Errc::BadParameter, "static detection needs k_probes >= 2");
  if (threshold < 0 || threshold > 255)
    raise(Errc::BadParameter, "threshold is a max-abs pixel diff in [0,255]");
  detail::require_no_pending(manifest);

  const render::TimestepPlan plan = render::sample_timesteps(k_probes, probe_seed);
  PruneReport report;

  std::set<std::string> probed;
  std::vector<std::string> todo;
  for (auto& rec : manifest.records())
    if (rec.usable()) todo.push_back(rec.id);

  while (!todo.empty()) {
    struct Item {
      std::string id;
      std::future<bool> fut;  // true = static
    };
    std::vector<Item> items;
    for (const std::string& id : todo) {
      probed.insert(id);
      const std::string glsl = manifest.at(id).glsl;
      items.push_back({id, engine.submit([glsl, plan, threshold, width, height](auto& w) {
                         auto handle = w.program(glsl);
                         Image first = w.ctx->render(*handle, plan.values[0], width, height);
                         std::vector<std::uint8_t> lo = first.pixels;
                         std::vector<std::uint8_t> hi = std::move(first.pixels);
                         for (std::size_t k = 1; k < plan.values.size(); ++k) {
                           Image img = w.ctx->render(*handle, plan.values[k], width, height);
                           for (std::size_t i = 0; i < img.pixels.size(); ++i) {
                             lo[i] = std::min(lo[i], img.pixels[i]);
                             hi[i] = std::max(hi[i], img.pixels[i]);
                           }
                         }
                         int max_diff = 0;
                         for (std::size_t i = 0; i < lo.size(); ++i)
                           max_diff = std::max(max_diff, static_cast<int>(hi[i]) - lo[i]);
                         return max_diff <= threshold;
                       })});
    }
    report.input += items.size();
    todo.clear();

    for (Item& item : items) {
      bool is_static = false;
      try {
        is_static = item.fut.get();
      } catch (const Error& e) {
        auto& rec = manifest.at(item.id);
        rec.status = corpus::Status::Rejected;
        rec.reject_reason = std::string(errc_name(e.code())) + ": " + e.message();
        ++report.failed;
        continue;
      }
      if (!is_static) continue;
      auto& rec = manifest.at(item.id);
      rec.dedup = corpus::DedupState::Static;
      rec.duplicate_of.clear();
      ++report.statics;
      // a static head may have had duplicates pointing at it
      for (const std::string& promoted : detail::promote_duplicates_of(manifest, item.id))
        if (!probed.count(promoted)) todo.push_back(promoted);
    }
  }

  auto& settings = manifest.settings();
  settings["dedup_static"] = {{"k_probes", k_probes},
                              {"threshold", threshold},
                              {"probe_seed", probe_seed},
                              {"resolution", {width, height}},
                              {"base_rate", plan.base_rate}};
  report.kept = detail::count_kept(manifest);
  return report;
}

}  // namespace procshade::dedup
