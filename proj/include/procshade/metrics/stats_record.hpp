#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

namespace procshade::metrics {

// Per-program statistics: sizes per image, throughput including readback,
// and intra-image self-similarity.
struct StatsRecord {
  std::string shader_id;
  std::size_t char_count = 0;
  double jpeg_kb = 0;      // mean encoded size per image, KiB
  double gzip_kb = 0;      // mean gzip size of each raw RGB8 frame, KiB
  double fps = 0;          // frames/s including readback
  double self_sim = 0;     // mean crop-pair distance
  std::size_t samples_used = 0;
  int width = 0;
  int height = 0;

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["shader_id"] = shader_id;
    j["char_count"] = char_count;
    j["jpeg_kb"] = jpeg_kb;
    j["gzip_kb"] = gzip_kb;
    j["fps"] = fps;
    j["self_sim"] = self_sim;
    j["samples_used"] = samples_used;
    j["resolution"] = {width, height};
    return j;
  }

  static StatsRecord from_json(const nlohmann::json& j) {
    StatsRecord r;
    r.shader_id = j.value("shader_id", "");
    r.char_count = j.value("char_count", std::size_t{0});
    r.jpeg_kb = j.value("jpeg_kb", 0.0);
    r.gzip_kb = j.value("gzip_kb", 0.0);
    r.fps = j.value("fps", 0.0);
    r.self_sim = j.value("self_sim", 0.0);
    r.samples_used = j.value("samples_used", std::size_t{0});
    if (j.contains("resolution") && j["resolution"].is_array() && j["resolution"].size() == 2) {
      r.width = j["resolution"][0].get<int>();
      r.height = j["resolution"][1].get<int>();
    }
    return r;
  }
};

}  // namespace procshade::metrics
