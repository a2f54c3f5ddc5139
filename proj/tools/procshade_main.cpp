// procshade: corpus engine for procedural image programs.
//
// Subcommands cover the full pipeline: ingest -> validate -> dedup ->
// {render, mix, stats, summarize, select, serve, preview}. Every run writes
// its resolved configuration next to its outputs so results are reproducible
// from the echo file alone.

#include <CLI11.hpp>

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include <json.hpp>

#include "procshade/core/error.hpp"
#include "procshade/core/image.hpp"
#include "procshade/core/jpeg.hpp"
#include "procshade/corpus/dialect.hpp"
#include "procshade/corpus/ingest.hpp"
#include "procshade/corpus/manifest.hpp"
#include "procshade/corpus/validate.hpp"
#include "procshade/dedup/dedup.hpp"
#include "procshade/metrics/stats.hpp"
#include "procshade/mix/dataset.hpp"
#include "procshade/render/engine.hpp"
#include "procshade/stream/server.hpp"
#include "procshade/version.hpp"

namespace ps = procshade;
namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

std::atomic<bool> g_shutdown{false};

void handle_signal(int) { g_shutdown.store(true); }

struct Resolution {
  int width = 384;
  int height = 384;
};

Resolution parse_resolution(const std::string& text) {
  Resolution r;
  const auto x = text.find('x');
  try {
    if (x == std::string::npos) {
      r.width = r.height = std::stoi(text);
    } else {
      r.width = std::stoi(text.substr(0, x));
      r.height = std::stoi(text.substr(x + 1));
    }
  } catch (...) {
    ps::raise(ps::Errc::InvalidArgument, "bad resolution '" + text + "' (use N or WxH)");
  }
  if (r.width < 1 || r.height < 1)
    ps::raise(ps::Errc::InvalidArgument, "resolution must be >= 1x1");
  return r;
}

struct CommonFlags {
  std::uint64_t seed = 0;
  std::string backend = "auto";
  unsigned workers = 0;
  int timeout_ms = 2000;
  bool dry_run = false;
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--seed", flags.seed, "global seed; all randomness derives from it");
  cmd->add_option("--backend", flags.backend, "render backend: auto|cpu|gl")
      ->check(CLI::IsMember({"auto", "cpu", "gl", "software", "gpu"}));
  cmd->add_option("--workers", flags.workers, "render worker contexts (0 = pick)");
  cmd->add_option("--timeout-ms", flags.timeout_ms, "per-frame wall-clock cap");
  cmd->add_flag("--dry-run", flags.dry_run, "resolve and echo the run config, then exit");
}

ps::render::RenderEngine make_engine(const CommonFlags& flags) {
  ps::render::EngineOptions opt;
  opt.backend = ps::render::parse_backend(flags.backend);
  opt.workers = flags.workers;
  opt.frame_timeout = std::chrono::milliseconds(flags.timeout_ms);
  return ps::render::RenderEngine(opt);
}

ordered_json base_config(const std::string& subcommand, const CommonFlags& flags) {
  ordered_json j;
  j["tool"] = "procshade";
  j["tool_version"] = ps::kVersion;
  j["subcommand"] = subcommand;
  j["seed"] = flags.seed;
  j["backend"] = flags.backend;
  j["workers"] = flags.workers;
  j["timeout_ms"] = flags.timeout_ms;
  return j;
}

// The config echo lands next to the run's primary output.
void write_run_config(const fs::path& dir, const std::string& subcommand,
                      const ordered_json& config) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  const fs::path path = dir / ("run_config." + subcommand + ".json");
  std::ofstream out(path, std::ios::trunc);
  if (!out) ps::raise(ps::Errc::IoError, "cannot write " + path.string());
  out << config.dump(2) << "\n";
}

fs::path manifest_dir(const fs::path& manifest_path) {
  return manifest_path.parent_path().empty() ? fs::path(".") : manifest_path.parent_path();
}

std::map<std::string, double> load_scores(const fs::path& path) {
  std::ifstream in(path);
  if (!in) ps::raise(ps::Errc::IoError, "cannot open scores file " + path.string());
  std::map<std::string, double> scores;
  if (path.extension() == ".json") {
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      ps::raise(ps::Errc::IoError, std::string("bad scores json: ") + e.what());
    }
    for (auto& [id, value] : j.items()) scores[id] = value.get<double>();
    return scores;
  }
  // CSV: id,score per line; a header line is tolerated
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      ps::raise(ps::Errc::IoError, "scores csv line without comma: " + line);
    const std::string id = line.substr(0, comma);
    try {
      scores[id] = std::stod(line.substr(comma + 1));
    } catch (...) {
      if (scores.empty()) continue;  // header
      ps::raise(ps::Errc::IoError, "bad score value in line: " + line);
    }
  }
  return scores;
}

std::string format_summary_table(const std::vector<ps::metrics::CorpusSummary>& blocks,
                                 const ordered_json& settings) {
  char buf[256];
  std::string out;
  out += "# procshade corpus summary\n";
  out += "# settings: " + settings.dump() + "\n";
  out += "# columns: metric subset avg q5 q95\n";
  auto row = [&](const char* metric, const std::string& subset,
                 const ps::metrics::SummaryStat& s) {
    std::snprintf(buf, sizeof buf, "%-10s %-10s %12.3f %12.3f %12.3f\n", metric, subset.c_str(),
                  s.avg, s.q5, s.q95);
    out += buf;
  };
  for (const auto& b : blocks) {
    row("chars", b.subset, b.chars);
    row("jpeg_kb", b.subset, b.jpeg_kb);
    row("gzip_kb", b.subset, b.gzip_kb);
    row("fps", b.subset, b.fps);
    row("self_sim", b.subset, b.self_sim);
    if (b.external_fid) {
      std::snprintf(buf, sizeof buf, "%-10s %-10s %12.3f %12s %12s\n", "fid", b.subset.c_str(),
                    *b.external_fid, "-", "-");
      out += buf;
    } else {
      std::snprintf(buf, sizeof buf, "%-10s %-10s %12s %12s %12s\n", "fid", b.subset.c_str(), "-",
                    "-", "-");
      out += buf;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// subcommand bodies
// ---------------------------------------------------------------------------

int run_ingest(const CommonFlags& flags, const fs::path& dir, const fs::path& manifest_path,
               const std::string& dialect) {
  ordered_json config = base_config("ingest", flags);
  config["dir"] = dir.string();
  config["manifest"] = manifest_path.string();
  config["dialect"] = dialect;
  if (flags.dry_run) {
    write_run_config(manifest_dir(manifest_path), "ingest", config);
    return 0;
  }

  ps::corpus::CorpusManifest manifest;
  if (fs::exists(manifest_path)) manifest = ps::corpus::CorpusManifest::load(manifest_path);
  std::optional<ps::corpus::Dialect> forced;
  if (dialect != "auto") forced = ps::corpus::parse_dialect(dialect);
  const auto report = ps::corpus::ingest_directory(manifest, dir, forced);
  manifest.save(manifest_path);
  write_run_config(manifest_dir(manifest_path), "ingest", config);
  std::printf("ingested %zu snippets (%zu rejected at ingest, %zu files skipped); manifest: %s\n",
              report.ingested, report.rejected_at_ingest, report.skipped.size(),
              manifest_path.string().c_str());
  return 0;
}

int run_validate(const CommonFlags& flags, const fs::path& manifest_path) {
  ordered_json config = base_config("validate", flags);
  config["manifest"] = manifest_path.string();
  if (flags.dry_run) {
    write_run_config(manifest_dir(manifest_path), "validate", config);
    return 0;
  }
  auto manifest = ps::corpus::CorpusManifest::load(manifest_path);
  auto engine = make_engine(flags);
  config["backend_resolved"] = engine.context_info().backend;
  const auto summary = ps::corpus::validate_all(engine, manifest);
  manifest.save(manifest_path);
  write_run_config(manifest_dir(manifest_path), "validate", config);
  std::printf("validate: %zu compiled, %zu rejected, %zu untouched\n", summary.compiled,
              summary.rejected, summary.already_done);
  return 0;
}

int run_dedup(const CommonFlags& flags, const fs::path& manifest_path, double t0, int k_probes,
              int threshold, const std::string& resolution) {
  const Resolution res = parse_resolution(resolution);
  ordered_json config = base_config("dedup", flags);
  config["manifest"] = manifest_path.string();
  config["t0"] = t0;
  config["k_probes"] = k_probes;
  config["threshold"] = threshold;
  config["resolution"] = {res.width, res.height};
  if (flags.dry_run) {
    write_run_config(manifest_dir(manifest_path), "dedup", config);
    return 0;
  }
  auto manifest = ps::corpus::CorpusManifest::load(manifest_path);
  auto engine = make_engine(flags);
  config["backend_resolved"] = engine.context_info().backend;

  const auto dup_report =
      ps::dedup::remove_duplicates(engine, manifest, t0, res.width, res.height);
  const auto static_report = ps::dedup::remove_static(engine, manifest, k_probes, threshold,
                                                      res.width, res.height, flags.seed);
  manifest.save(manifest_path);

  ordered_json report;
  report["duplicates_pass"] = dup_report.to_json();
  report["static_pass"] = static_report.to_json();
  const fs::path report_path = manifest_dir(manifest_path) / "dedup_report.json";
  std::ofstream out(report_path, std::ios::trunc);
  out << report.dump(2) << "\n";
  write_run_config(manifest_dir(manifest_path), "dedup", config);
  std::printf("duplicates: %s\nstatic:     %s\n", dup_report.summary().c_str(),
              static_report.summary().c_str());
  return 0;
}

int run_render(const CommonFlags& flags, const fs::path& manifest_path, const std::string& id,
               std::size_t frames, const std::string& resolution, const fs::path& out_path,
               const fs::path& jpeg_dir, bool measure_fps) {
  const Resolution res = parse_resolution(resolution);
  ordered_json config = base_config("render", flags);
  config["manifest"] = manifest_path.string();
  config["id"] = id;
  config["frames"] = frames;
  config["resolution"] = {res.width, res.height};
  config["out"] = out_path.string();
  const fs::path out_dir =
      out_path.parent_path().empty() ? fs::path(".") : out_path.parent_path();
  if (flags.dry_run) {
    write_run_config(out_dir, "render", config);
    return 0;
  }
  auto manifest = ps::corpus::CorpusManifest::load(manifest_path);
  const auto& rec = manifest.at(id);
  if (rec.status != ps::corpus::Status::Compiled)
    ps::raise(ps::Errc::InvalidArgument, "record '" + id + "' is not compiled");
  auto engine = make_engine(flags);
  config["backend_resolved"] = engine.context_info().backend;

  const auto plan = ps::render::sample_timesteps(frames, flags.seed);
  const auto batch = engine.render_batch(rec.glsl, id, plan, res.width, res.height);
  ps::write_raw_dump(out_path, batch);
  if (!jpeg_dir.empty()) {
    fs::create_directories(jpeg_dir);
    for (std::size_t k = 0; k < batch.size(); ++k) {
      char name[32];
      std::snprintf(name, sizeof name, "%07zu.jpg", k);
      const auto jpg = ps::encode_jpeg(batch[k]);
      std::ofstream img(jpeg_dir / name, std::ios::binary | std::ios::trunc);
      img.write(reinterpret_cast<const char*>(jpg.data()),
                static_cast<std::streamsize>(jpg.size()));
    }
  }
  write_run_config(out_dir, "render", config);
  std::printf("rendered %zu frames of '%s' at %dx%d -> %s\n", batch.size(), id.c_str(), res.width,
              res.height, out_path.string().c_str());
  if (measure_fps) {
    const double fps =
        engine.measure_fps(rec.glsl, static_cast<int>(std::max<std::size_t>(frames, 10)),
                           res.width, res.height);
    std::printf("throughput: %.1f frames/s including readback (hardware-dependent)\n", fps);
  }
  return 0;
}

int run_mix(const CommonFlags& flags, const fs::path& manifest_path, const fs::path& out_dir,
            std::size_t count, const std::string& mode, int n, double alpha,
            const std::string& resolution, int jpeg_quality) {
  const Resolution res = parse_resolution(resolution);
  ps::mix::MixSpec spec;
  spec.mode = ps::mix::parse_mix_mode(mode);
  spec.n = n;
  spec.alpha = alpha;
  spec.seed = flags.seed;
  ordered_json config = base_config("mix", flags);
  config["manifest"] = manifest_path.string();
  config["out"] = out_dir.string();
  config["count"] = count;
  config["mode"] = mode;
  config["n"] = n;
  config["alpha"] = alpha;
  config["resolution"] = {res.width, res.height};
  config["jpeg_quality"] = jpeg_quality;
  if (flags.dry_run) {
    write_run_config(out_dir, "mix", config);
    return 0;
  }
  spec.validate();
  auto manifest = ps::corpus::CorpusManifest::load(manifest_path);
  auto engine = make_engine(flags);
  config["backend_resolved"] = engine.context_info().backend;
  const auto report = ps::mix::build_mixed_dataset(engine, manifest, count, spec, res.width,
                                                   res.height, flags.seed, out_dir, jpeg_quality);
  write_run_config(out_dir, "mix", config);
  std::printf("wrote %zu images and %s\n", report.count,
              report.provenance_path.string().c_str());
  return 0;
}

int run_stats(const CommonFlags& flags, const fs::path& manifest_path, std::size_t samples,
              const std::string& resolution, const fs::path& out_jsonl, const fs::path& out_csv,
              bool force) {
  const Resolution res = parse_resolution(resolution);
  ps::metrics::StatsOptions opt;
  opt.samples = samples;
  opt.width = res.width;
  opt.height = res.height;
  opt.seed = flags.seed;
  ordered_json config = base_config("stats", flags);
  config["manifest"] = manifest_path.string();
  config["samples"] = samples;
  config["resolution"] = {res.width, res.height};
  config["self_sim_pairs"] = opt.self_sim_pairs;
  config["self_sim_images"] = opt.self_sim_images;
  config["crop_frac"] = opt.crop_frac;
  config["jpeg_quality"] = opt.jpeg_quality;
  config["force"] = force;
  if (flags.dry_run) {
    write_run_config(manifest_dir(manifest_path), "stats", config);
    return 0;
  }
  auto manifest = ps::corpus::CorpusManifest::load(manifest_path);
  auto engine = make_engine(flags);
  config["backend_resolved"] = engine.context_info().backend;
  const std::size_t done = ps::metrics::compute_all_stats(engine, manifest, opt, force);
  manifest.save(manifest_path);

  const fs::path jsonl_path =
      out_jsonl.empty() ? manifest_dir(manifest_path) / "stats.jsonl" : out_jsonl;
  std::ofstream jsonl(jsonl_path, std::ios::trunc);
  for (const auto& rec : manifest.records())
    if (rec.stats) jsonl << rec.stats->to_json().dump() << "\n";
  if (!out_csv.empty()) {
    std::ofstream csv(out_csv, std::ios::trunc);
    csv << "id,chars,jpeg_kb,gzip_kb,fps,self_sim\n";
    for (const auto& rec : manifest.records())
      if (rec.stats) {
        const auto& s = *rec.stats;
        csv << rec.id << ',' << s.char_count << ',' << s.jpeg_kb << ',' << s.gzip_kb << ','
            << s.fps << ',' << s.self_sim << "\n";
      }
  }
  write_run_config(manifest_dir(manifest_path), "stats", config);
  std::printf("computed stats for %zu shaders -> %s\n", done, jsonl_path.string().c_str());
  return 0;
}

int run_summarize(const CommonFlags& flags, const fs::path& manifest_path,
                  const std::string& subset, const fs::path& out_path, double fid,
                  bool fid_given) {
  ordered_json config = base_config("summarize", flags);
  config["manifest"] = manifest_path.string();
  config["subset"] = subset;
  const fs::path out_dir =
      out_path.empty() ? manifest_dir(manifest_path)
                       : (out_path.parent_path().empty() ? fs::path(".") : out_path.parent_path());
  if (flags.dry_run) {
    write_run_config(out_dir, "summarize", config);
    return 0;
  }
  auto manifest = ps::corpus::CorpusManifest::load(manifest_path);

  std::vector<ps::metrics::CorpusSummary> blocks;
  auto push = [&](const std::string& name, const ps::metrics::SubsetFilter& f) {
    try {
      blocks.push_back(ps::metrics::summarize(manifest, f, name));
    } catch (const ps::Error& e) {
      if (e.code() != ps::Errc::EmptySubset) throw;
    }
  };
  if (subset == "all") {
    push("twigl", ps::metrics::subset_dialect(ps::corpus::Dialect::Twigl));
    push("shadertoy", ps::metrics::subset_dialect(ps::corpus::Dialect::Shadertoy));
    push("raw-glsl", ps::metrics::subset_dialect(ps::corpus::Dialect::RawGlsl));
    blocks.push_back(ps::metrics::summarize(manifest, ps::metrics::subset_all(), "all"));
  } else {
    blocks.push_back(ps::metrics::summarize(
        manifest, ps::metrics::subset_dialect(ps::corpus::parse_dialect(subset)), subset));
  }
  if (fid_given && !blocks.empty()) blocks.back().external_fid = fid;

  const ordered_json settings = manifest.settings().contains("stats")
                                    ? manifest.settings()["stats"]
                                    : ordered_json::object();
  const std::string table = format_summary_table(blocks, settings);
  std::fputs(table.c_str(), stdout);
  if (!out_path.empty()) {
    std::ofstream out(out_path, std::ios::trunc);
    out << table;
    ordered_json j = ordered_json::array();
    for (const auto& b : blocks) j.push_back(b.to_json());
    std::ofstream js(out_path.string() + ".json", std::ios::trunc);
    js << j.dump(2) << "\n";
  }
  write_run_config(out_dir, "summarize", config);
  return 0;
}

int run_select(const CommonFlags& flags, const fs::path& scores_path, std::size_t k,
               const fs::path& out_path) {
  ordered_json config = base_config("select", flags);
  config["scores"] = scores_path.string();
  config["k"] = k;
  const fs::path out_dir =
      out_path.empty() ? fs::path(".")
                       : (out_path.parent_path().empty() ? fs::path(".") : out_path.parent_path());
  if (flags.dry_run) {
    write_run_config(out_dir, "select", config);
    return 0;
  }
  const auto scores = load_scores(scores_path);
  const auto ids = ps::metrics::select_top_k(scores, k);
  std::string listing;
  for (const auto& id : ids) listing += id + "\n";
  std::fputs(listing.c_str(), stdout);
  if (!out_path.empty()) {
    std::ofstream out(out_path, std::ios::trunc);
    out << listing;
  }
  write_run_config(out_dir, "select", config);
  return 0;
}

int run_serve(const CommonFlags& flags, const fs::path& manifest_path, const std::string& bind,
              int max_inflight) {
  ps::stream::ServerOptions opt;
  const auto colon = bind.rfind(':');
  if (colon == std::string::npos)
    ps::raise(ps::Errc::InvalidArgument, "--bind expects HOST:PORT");
  opt.host = bind.substr(0, colon);
  opt.port = static_cast<std::uint16_t>(std::stoi(bind.substr(colon + 1)));
  opt.max_inflight_per_connection = max_inflight;

  ordered_json config = base_config("serve", flags);
  config["manifest"] = manifest_path.string();
  config["bind"] = bind;
  config["max_inflight"] = max_inflight;
  config["protocol_version"] = ps::stream::kProtocolVersion;
  if (flags.dry_run) {
    write_run_config(manifest_dir(manifest_path), "serve", config);
    return 0;
  }
  auto manifest = ps::corpus::CorpusManifest::load(manifest_path);
  auto engine = make_engine(flags);
  config["backend_resolved"] = engine.context_info().backend;
  ps::stream::StreamServer server(manifest, engine, opt);
  server.start();
  write_run_config(manifest_dir(manifest_path), "serve", config);
  std::printf("serving %s on %s:%u (protocol v%u, %u workers)\n",
              manifest_path.string().c_str(), opt.host.c_str(), server.port(),
              ps::stream::kProtocolVersion, engine.worker_count());
  std::fflush(stdout);

  std::signal(SIGINT, handle_signal);
  std::signal(SIGTERM, handle_signal);
  while (!g_shutdown.load()) std::this_thread::sleep_for(std::chrono::milliseconds(50));
  std::printf("shutting down after %llu images served\n",
              static_cast<unsigned long long>(server.images_served()));
  server.stop();
  return 0;
}

int run_preview(const CommonFlags& flags, const fs::path& manifest_path, int rows, int cols,
                const std::string& resolution, const fs::path& out_path) {
  const Resolution res = parse_resolution(resolution);
  ordered_json config = base_config("preview", flags);
  config["manifest"] = manifest_path.string();
  config["rows"] = rows;
  config["cols"] = cols;
  config["cell_resolution"] = {res.width, res.height};
  config["out"] = out_path.string();
  const fs::path out_dir =
      out_path.parent_path().empty() ? fs::path(".") : out_path.parent_path();
  if (flags.dry_run) {
    write_run_config(out_dir, "preview", config);
    return 0;
  }
  if (rows < 1 || cols < 1) ps::raise(ps::Errc::BadParameter, "grid must be at least 1x1");
  auto manifest = ps::corpus::CorpusManifest::load(manifest_path);
  const auto pool = manifest.unique_pool();
  if (pool.empty()) ps::raise(ps::Errc::InsufficientPrograms, "no usable programs to preview");
  auto engine = make_engine(flags);
  config["backend_resolved"] = engine.context_info().backend;

  ps::Image grid = ps::Image::solid(cols * res.width, rows * res.height, 0, 0, 0);
  ps::Rng rng = ps::Rng::keyed(flags.seed, "preview");
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const auto& rec = *pool[rng.below(pool.size())];
      const double t = ps::render::timestep_at(rng.next_u64(), rng.below(64));
      ps::Image cell = engine.render_one(rec.glsl, rec.id, t, res.width, res.height);
      for (int y = 0; y < res.height; ++y)
        std::copy_n(cell.at(0, y), static_cast<std::size_t>(res.width) * 3,
                    grid.at(c * res.width, r * res.height + y));
    }
  }
  const auto jpg = ps::encode_jpeg(grid);
  std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
  if (!out) ps::raise(ps::Errc::IoError, "cannot write " + out_path.string());
  out.write(reinterpret_cast<const char*>(jpg.data()), static_cast<std::streamsize>(jpg.size()));
  write_run_config(out_dir, "preview", config);
  std::printf("wrote %dx%d preview grid to %s\n", cols, rows, out_path.string().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"procshade: corpus engine for procedural shader image programs"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(ps::kVersion));

  CommonFlags flags;

  // ingest
  auto* ingest = app.add_subcommand("ingest", "ingest snippet files into a corpus manifest");
  fs::path ingest_dir_path, ingest_manifest;
  std::string ingest_dialect = "auto";
  ingest->add_option("--dir", ingest_dir_path, "directory of snippet files")->required();
  ingest->add_option("--manifest", ingest_manifest, "manifest path (created or extended)")
      ->required();
  ingest->add_option("--dialect", ingest_dialect,
                     "force a dialect instead of per-file extensions")
      ->check(CLI::IsMember({"auto", "twigl", "shadertoy", "raw-glsl", "raw", "glsl"}));
  add_common_flags(ingest, flags);

  // validate
  auto* validate = app.add_subcommand("validate", "compile-filter pending records");
  fs::path validate_manifest;
  validate->add_option("--manifest", validate_manifest, "manifest path")->required();
  add_common_flags(validate, flags);

  // dedup
  auto* dedup = app.add_subcommand("dedup", "remove duplicate and static programs");
  fs::path dedup_manifest;
  double dedup_t0 = 0.0;
  int dedup_k_probes = 4;
  int dedup_threshold = 0;
  std::string dedup_resolution = "384";
  dedup->add_option("--manifest", dedup_manifest, "manifest path")->required();
  dedup->add_option("--t0", dedup_t0, "timestep used for duplicate fingerprints");
  dedup->add_option("--k-probes", dedup_k_probes, "probe frames for static detection");
  dedup->add_option("--threshold", dedup_threshold,
                    "max abs per-channel diff considered static (0 = byte exact)");
  dedup->add_option("--resolution", dedup_resolution, "probe resolution (N or WxH)");
  add_common_flags(dedup, flags);

  // render
  auto* render = app.add_subcommand("render", "render frames of one program to a raw dump");
  fs::path render_manifest, render_out, render_jpeg_dir;
  std::string render_id, render_resolution = "384";
  std::size_t render_frames = 16;
  bool render_fps = false;
  render->add_option("--manifest", render_manifest, "manifest path")->required();
  render->add_option("--id", render_id, "program id")->required();
  render->add_option("--frames", render_frames, "frame count");
  render->add_option("--resolution", render_resolution, "render resolution (N or WxH)");
  render->add_option("--out", render_out, "raw dump output path")->required();
  render->add_option("--jpeg-dir", render_jpeg_dir, "also write one JPEG per frame here");
  render->add_flag("--measure-fps", render_fps, "report frames/s including readback");
  add_common_flags(render, flags);

  // mix
  auto* mix = app.add_subcommand("mix", "build a fixed mixed dataset offline");
  fs::path mix_manifest, mix_out;
  std::size_t mix_count = 0;
  std::string mix_mode = "mixup", mix_resolution = "384";
  int mix_n = 6;
  double mix_alpha = 1.0;
  int mix_quality = ps::kDefaultJpegQuality;
  mix->add_option("--manifest", mix_manifest, "manifest path")->required();
  mix->add_option("--out", mix_out, "dataset output directory")->required();
  mix->add_option("--count", mix_count, "number of images to synthesize")->required();
  mix->add_option("--mode", mix_mode, "none|mixup|cutmix")
      ->check(CLI::IsMember({"none", "mixup", "cutmix"}));
  mix->add_option("--n", mix_n, "frames mixed per image");
  mix->add_option("--alpha", mix_alpha, "dirichlet concentration");
  mix->add_option("--resolution", mix_resolution, "render resolution (N or WxH)");
  mix->add_option("--jpeg-quality", mix_quality, "encoder quality");
  add_common_flags(mix, flags);

  // stats
  auto* stats = app.add_subcommand("stats", "compute per-shader statistics");
  fs::path stats_manifest, stats_out, stats_csv;
  std::size_t stats_samples = 400;
  std::string stats_resolution = "384";
  bool stats_force = false;
  stats->add_option("--manifest", stats_manifest, "manifest path")->required();
  stats->add_option("--samples", stats_samples, "rendered samples per shader");
  stats->add_option("--resolution", stats_resolution, "render resolution (N or WxH)");
  stats->add_option("--out", stats_out, "stats JSONL path (default: next to manifest)");
  stats->add_option("--csv", stats_csv, "also export id,metric CSV here");
  stats->add_flag("--force", stats_force, "recompute even when stats exist");
  add_common_flags(stats, flags);

  // summarize
  auto* summarize = app.add_subcommand("summarize", "corpus summary table (avg, Q5, Q95)");
  fs::path summarize_manifest, summarize_out;
  std::string summarize_subset = "all";
  double summarize_fid = 0.0;
  summarize->add_option("--manifest", summarize_manifest, "manifest path")->required();
  summarize->add_option("--subset", summarize_subset, "all|twigl|shadertoy|raw-glsl");
  summarize->add_option("--out", summarize_out, "write the table here (plus .json)");
  auto* fid_opt = summarize->add_option("--fid", summarize_fid,
                                        "externally computed FID for the summary slot");
  add_common_flags(summarize, flags);

  // select
  auto* select = app.add_subcommand("select", "greedy top-k selection from external scores");
  fs::path select_scores, select_out;
  std::size_t select_k = 0;
  select->add_option("--scores", select_scores, "scores file (.json map or id,score csv)")
      ->required();
  select->add_option("--k", select_k, "how many ids to keep")->required();
  select->add_option("--out", select_out, "write selected ids here (one per line)");
  add_common_flags(select, flags);

  // serve
  auto* serve = app.add_subcommand("serve", "run the batch-generation server");
  fs::path serve_manifest;
  std::string serve_bind = "127.0.0.1:9377";
  int serve_inflight = 2;
  serve->add_option("--manifest", serve_manifest, "manifest path")->required();
  serve->add_option("--bind", serve_bind, "HOST:PORT to listen on");
  serve->add_option("--max-inflight", serve_inflight, "per-connection in-flight request cap");
  add_common_flags(serve, flags);

  // preview
  auto* preview = app.add_subcommand("preview", "render an n x m grid of random samples");
  fs::path preview_manifest, preview_out = "preview.jpg";
  int preview_rows = 4, preview_cols = 4;
  std::string preview_resolution = "192";
  preview->add_option("--manifest", preview_manifest, "manifest path")->required();
  preview->add_option("--rows", preview_rows, "grid rows");
  preview->add_option("--cols", preview_cols, "grid columns");
  preview->add_option("--resolution", preview_resolution, "cell resolution (N or WxH)");
  preview->add_option("--out", preview_out, "output JPEG path");
  add_common_flags(preview, flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*ingest)
      return run_ingest(flags, ingest_dir_path, ingest_manifest, ingest_dialect);
    if (*validate) return run_validate(flags, validate_manifest);
    if (*dedup)
      return run_dedup(flags, dedup_manifest, dedup_t0, dedup_k_probes, dedup_threshold,
                       dedup_resolution);
    if (*render)
      return run_render(flags, render_manifest, render_id, render_frames, render_resolution,
                        render_out, render_jpeg_dir, render_fps);
    if (*mix)
      return run_mix(flags, mix_manifest, mix_out, mix_count, mix_mode, mix_n, mix_alpha,
                     mix_resolution, mix_quality);
    if (*stats)
      return run_stats(flags, stats_manifest, stats_samples, stats_resolution, stats_out,
                       stats_csv, stats_force);
    if (*summarize)
      return run_summarize(flags, summarize_manifest, summarize_subset, summarize_out,
                           summarize_fid, fid_opt->count() > 0);
    if (*select) return run_select(flags, select_scores, select_k, select_out);
    if (*serve) return run_serve(flags, serve_manifest, serve_bind, serve_inflight);
    if (*preview)
      return run_preview(flags, preview_manifest, preview_rows, preview_cols,
                         preview_resolution, preview_out);
  } catch (const ps::Error& e) {
    std::fprintf(stderr, "error: code=%s msg=\"%s\"\n", ps::errc_name(e.code()),
                 e.message().c_str());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: code=Internal msg=\"%s\"\n", e.what());
    return 1;
  }
  return 2;
}
