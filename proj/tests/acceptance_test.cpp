// Acceptance suite: one test per pipeline acceptance criterion, each printing
// a single [ACCEPT] pass/fail line. Run via ctest or directly.

#include <gtest/gtest.h>

#include <array>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "procshade/corpus/dialect.hpp"
#include "procshade/corpus/ingest.hpp"
#include "procshade/corpus/validate.hpp"
#include "procshade/dedup/dedup.hpp"
#include "procshade/metrics/quantile.hpp"
#include "procshade/metrics/stats.hpp"
#include "procshade/mix/dataset.hpp"
#include "procshade/mix/mix.hpp"
#include "procshade/render/engine.hpp"
#include "procshade/render/timesteps.hpp"
#include "procshade/stream/client.hpp"
#include "procshade/stream/server.hpp"
#include "testutil.hpp"

namespace ps = procshade;
namespace cp = ps::corpus;
namespace rd = ps::render;
namespace mx = ps::mix;
namespace mt = ps::metrics;
namespace st = ps::stream;
namespace fs = std::filesystem;

namespace {

struct Reporter {
  int criterion;
  std::string label;
  Reporter(int criterion, std::string label) : criterion(criterion), label(std::move(label)) {}
  ~Reporter() {
    const bool failed = ::testing::Test::HasFailure();
    std::printf("[ACCEPT] criterion %2d: %s - %s\n", criterion, failed ? "FAIL" : "PASS",
                label.c_str());
    std::fflush(stdout);
  }
};

rd::RenderEngine& engine() {
  static rd::RenderEngine e({.backend = rd::Backend::Cpu, .workers = 8});
  return e;
}

struct CliResult {
  int exit_code = -1;
  std::string output;
};

CliResult run_cli(const std::string& args) {
  const std::string cmd = std::string(PROCSHADE_CLI_PATH) + " " + args + " 2>&1";
  std::array<char, 4096> buf;
  CliResult result;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return result;
  while (fgets(buf.data(), buf.size(), pipe)) result.output += buf.data();
  const int rc = pclose(pipe);
  result.exit_code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  return result;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>{});
}

}  // namespace

// Criterion 1: on a 100-shader corpus with 20 exact duplicate pairs and 10
// static shaders, dedup leaves exactly 70 unique dynamic programs; reruns are
// idempotent; runtime under a minute.
TEST(Acceptance, C01_DedupOracle) {
  Reporter reporter(1, "dedup leaves 70 of 100 (20 dup pairs, 10 static), idempotent, <1min");
  const auto start = std::chrono::steady_clock::now();

  cp::CorpusManifest manifest = testutil::synthetic_corpus(engine(), 70, 20, 10);
  ASSERT_EQ(manifest.size(), 100u);

  auto dup = ps::dedup::remove_duplicates(engine(), manifest, 0.0, 128, 128);
  auto sta = ps::dedup::remove_static(engine(), manifest, 4, 0, 128, 128, 1234);
  EXPECT_EQ(dup.duplicates, 20u);
  EXPECT_EQ(sta.statics, 10u);
  EXPECT_EQ(sta.kept, 70u);

  std::size_t unique_dynamic = 0;
  for (const auto& rec : manifest.records())
    if (rec.usable()) ++unique_dynamic;
  EXPECT_EQ(unique_dynamic, 70u);

  // idempotence
  auto dup2 = ps::dedup::remove_duplicates(engine(), manifest, 0.0, 128, 128);
  auto sta2 = ps::dedup::remove_static(engine(), manifest, 4, 0, 128, 128, 1234);
  EXPECT_EQ(dup2.duplicates, 0u);
  EXPECT_EQ(sta2.statics, 0u);
  EXPECT_EQ(sta2.kept, 70u);

  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  EXPECT_LT(secs, 60.0) << "dedup oracle took " << secs << "s";
}

// Criterion 2: 10,000 sampled plans satisfy t_k in [k/4, k/4 + 0.25]; the
// pooled offsets pass a KS test against U[0, 0.25] at significance 0.01.
TEST(Acceptance, C02_TimestepPrior) {
  Reporter reporter(2, "timestep windows hold; offsets pass KS vs U[0,0.25] at alpha=0.01");
  constexpr int kPlans = 10000;
  constexpr int kFrames = 4;
  std::vector<double> offsets;
  offsets.reserve(kPlans * kFrames);
  for (int s = 0; s < kPlans; ++s) {
    const auto plan = rd::sample_timesteps(kFrames, static_cast<std::uint64_t>(s));
    for (int k = 0; k < kFrames; ++k) {
      const double t = plan.values[k];
      ASSERT_GE(t, k / 4.0);
      ASSERT_LE(t, k / 4.0 + 0.25);
      offsets.push_back(t - k / 4.0);
    }
  }
  const double d = testutil::ks_statistic_uniform(offsets, 0.0, 0.25);
  const double p = testutil::ks_pvalue(d, offsets.size());
  EXPECT_GE(p, 0.01) << "KS D=" << d << " p=" << p;
  std::printf("        timestep KS: n=%zu D=%.5f p=%.3f\n", offsets.size(), d, p);
}

// Criterion 3: Dirichlet weights sum to one within 1e-9 with component means
// 1/6 +- 0.01 over 10,000 draws; mixup scalar oracles hold exactly.
TEST(Acceptance, C03_MixupMath) {
  Reporter reporter(3, "dirichlet(6,1) simplex + means 1/6, mixup 0/255 -> 128, one-hot exact");
  ps::Rng rng = ps::Rng::keyed(42, "acceptance-dirichlet");
  std::array<double, 6> mean_acc{};
  for (int i = 0; i < 10000; ++i) {
    const auto w = mx::sample_dirichlet(6, 1.0, rng);
    double sum = 0;
    for (double x : w) {
      ASSERT_GE(x, 0.0);
      sum += x;
    }
    ASSERT_NEAR(sum, 1.0, 1e-9);
    for (int k = 0; k < 6; ++k) mean_acc[k] += w[k];
  }
  for (int k = 0; k < 6; ++k) EXPECT_NEAR(mean_acc[k] / 10000.0, 1.0 / 6.0, 0.01);

  // 0.5*0 + 0.5*255 = 127.5 -> rounds half away from zero to 128
  std::vector<ps::Image> bw{ps::Image::solid(16, 16, 0, 0, 0),
                            ps::Image::solid(16, 16, 255, 255, 255)};
  std::vector<double> half{0.5, 0.5};
  const ps::Image mixed = mx::mixup(bw, half);
  for (auto b : mixed.pixels) ASSERT_EQ(b, 128);

  std::vector<ps::Image> imgs;
  for (int k = 0; k < 6; ++k) imgs.push_back(testutil::random_image(8, 8, 500 + k));
  for (int hot = 0; hot < 6; ++hot) {
    std::vector<double> w(6, 0.0);
    w[hot] = 1.0;
    ASSERT_EQ(mx::mixup(imgs, w).pixels, imgs[hot].pixels);
  }
}

// Criterion 4: with a recorded seed, cutmix region-wise equality holds on 100
// random cases (inside each recorded rect: donor; outside: running base).
TEST(Acceptance, C04_CutmixGeometry) {
  Reporter reporter(4, "cutmix rects replay region-exactly on 100 random cases");
  ps::Rng meta(2024);
  for (int trial = 0; trial < 100; ++trial) {
    const int w = 8 + static_cast<int>(meta.below(57));
    const int h = 8 + static_cast<int>(meta.below(41));
    const int n = 2 + static_cast<int>(meta.below(4));
    std::vector<ps::Image> images;
    for (int k = 0; k < n; ++k)
      images.push_back(testutil::random_image(w, h, trial * 100 + k, "s" + std::to_string(k)));

    ps::Rng rng(static_cast<std::uint64_t>(trial));
    const auto sample = mx::cutmix(images, rng);
    ASSERT_EQ(sample.sources.size(), static_cast<std::size_t>(n));

    ps::Image replay = images[0];
    for (int k = 1; k < n; ++k) {
      const auto& src = sample.sources[k];
      ASSERT_TRUE(src.has_rect);
      ASSERT_GE(src.rect[0], 0);
      ASSERT_GE(src.rect[1], 0);
      ASSERT_LE(src.rect[0] + src.rect[2], w);
      ASSERT_LE(src.rect[1] + src.rect[3], h);
      mx::paste_rect(replay, images[k], src.rect);
    }
    ASSERT_EQ(replay.pixels, sample.image.pixels) << "trial " << trial;
  }
}

// Criterion 5: quantiles match a brute-force sort oracle exactly; singleton
// subsets collapse; the stats defaults are 400 samples at 384x384.
TEST(Acceptance, C05_StatisticsSuite) {
  Reporter reporter(5, "nearest-rank matches sort oracle; singleton collapse; 400@384 defaults");
  ps::Rng rng(77);
  std::vector<double> values;
  for (int i = 0; i < 1000; ++i) values.push_back(rng.uniform(-1000.0, 1000.0));
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  for (double q : {0.05, 0.95}) {
    const std::size_t rank = static_cast<std::size_t>(std::ceil(q * 1000.0));
    const double oracle = sorted[rank - 1];
    ASSERT_EQ(mt::nearest_rank_quantile(sorted, q), oracle);
  }

  cp::CorpusManifest singleton = testutil::synthetic_corpus(engine(), 1, 0, 0);
  mt::StatsOptions small;
  small.samples = 4;
  small.width = small.height = 32;
  small.self_sim_images = 1;
  mt::compute_all_stats(engine(), singleton, small);
  const auto summary = mt::summarize(singleton, mt::subset_all(), "all");
  EXPECT_EQ(summary.chars.avg, summary.chars.q5);
  EXPECT_EQ(summary.chars.q5, summary.chars.q95);
  EXPECT_EQ(summary.fps.q5, summary.fps.q95);

  const mt::StatsOptions defaults;
  EXPECT_EQ(defaults.samples, 400u);
  EXPECT_EQ(defaults.width, 384);
  EXPECT_EQ(defaults.height, 384);

  // the CLI resolves the same defaults
  testutil::TempDir dir("accept_stats");
  cp::CorpusManifest m = testutil::synthetic_corpus(engine(), 1, 0, 0);
  const fs::path manifest_path = dir.path / "m.manifest";
  m.save(manifest_path);
  auto r = run_cli("stats --manifest " + manifest_path.string() + " --dry-run");
  ASSERT_EQ(r.exit_code, 0) << r.output;
  const std::string cfg = slurp(dir.path / "run_config.stats.json");
  EXPECT_NE(cfg.find("\"samples\": 400"), std::string::npos);
  EXPECT_NE(cfg.find("384"), std::string::npos);
}

// Criterion 6: measure_fps on a constant shader at 384x384 (readback
// included) is finite, positive, and beats a heavy-loop shader on the same
// machine. Published corpus figures are reference points, not gates.
TEST(Acceptance, C06_ThroughputMeasurement) {
  Reporter reporter(6, "fps finite/positive at 384x384; constant > heavy loop");
  const std::string constant = cp::normalize_raw(testutil::constant_raw_source(0.3, 0.5, 0.7));
  const std::string heavy = cp::normalize_raw(testutil::heavy_loop_raw_source(120));

  const double fps_constant = engine().measure_fps(constant, 10, 384, 384);
  const double fps_heavy = engine().measure_fps(heavy, 10, 384, 384);
  EXPECT_TRUE(std::isfinite(fps_constant));
  EXPECT_GT(fps_constant, 0.0);
  EXPECT_TRUE(std::isfinite(fps_heavy));
  EXPECT_GT(fps_heavy, 0.0);
  EXPECT_GT(fps_constant, fps_heavy);
  std::printf(
      "        fps(constant)=%.1f fps(heavy)=%.1f on backend=%s; reference figures from the "
      "source corpus: 886.9 (TwiGL avg) and 979 (combined) on a GTX TITAN X incl. readback - "
      "hardware-dependent, not gated\n",
      fps_constant, fps_heavy, engine().context_info().backend.c_str());
}

// Criterion 7: end-to-end determinism. `mix --count 100 --seed 7` twice gives
// byte-identical provenance; repeated stream requests with one seed give
// byte-identical responses; different seeds differ. Under two minutes.
TEST(Acceptance, C07_EndToEndDeterminism) {
  Reporter reporter(7, "mix rerun byte-identical; stream responses repeat by seed; <2min");
  const auto start = std::chrono::steady_clock::now();

  testutil::TempDir dir("accept_det");
  cp::CorpusManifest manifest = testutil::synthetic_corpus(engine(), 12, 0, 0);
  const fs::path manifest_path = dir.path / "m.manifest";
  manifest.save(manifest_path);

  const std::string common = "mix --manifest " + manifest_path.string() +
                             " --count 100 --seed 7 --resolution 64 --out ";
  auto r1 = run_cli(common + (dir.path / "a").string());
  auto r2 = run_cli(common + (dir.path / "b").string());
  ASSERT_EQ(r1.exit_code, 0) << r1.output;
  ASSERT_EQ(r2.exit_code, 0) << r2.output;
  const std::string prov_a = slurp(dir.path / "a" / "provenance.manifest");
  EXPECT_FALSE(prov_a.empty());
  EXPECT_EQ(prov_a, slurp(dir.path / "b" / "provenance.manifest"));

  st::StreamServer server(manifest, engine());
  server.start();
  {
    st::StreamClient client("127.0.0.1", server.port());
    st::BatchRequestWire req;
    req.seed = 7;
    req.count = 4;
    req.width = 32;
    req.height = 32;
    req.mix_mode = 1;
    req.mix_n = 6;
    req.alpha = 1.0;
    req.encoding = 0;
    client.send_frame(st::MsgType::BatchRequest, req.encode());
    auto [t1, body1] = client.read_frame();
    client.send_frame(st::MsgType::BatchRequest, req.encode());
    auto [t2, body2] = client.read_frame();
    ASSERT_EQ(t1, st::MsgType::BatchResponse);
    EXPECT_EQ(body1, body2);

    req.seed = 8;
    client.send_frame(st::MsgType::BatchRequest, req.encode());
    auto [t3, body3] = client.read_frame();
    ASSERT_EQ(t3, st::MsgType::BatchResponse);
    EXPECT_NE(body1, body3);
  }
  server.stop();

  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  EXPECT_LT(secs, 120.0) << "determinism checks took " << secs << "s";
}

// Criterion 8: a raw_rgb8 batch of 8 images at 64x64 carries exactly 98,304
// payload bytes plus the documented per-field overhead; a version-mismatched
// client is turned away before any image bytes move.
TEST(Acceptance, C08_ProtocolArithmetic) {
  Reporter reporter(8, "raw 8x64x64 payload = 98,304 B + documented header; version gate first");
  cp::CorpusManifest manifest = testutil::synthetic_corpus(engine(), 4, 0, 0);
  st::StreamServer server(manifest, engine());
  server.start();
  {
    st::StreamClient client("127.0.0.1", server.port());
    st::BatchRequestWire req;
    req.seed = 3;
    req.count = 8;
    req.width = 64;
    req.height = 64;
    req.mix_mode = 0;
    req.mix_n = 1;
    req.encoding = 0;
    client.send_frame(st::MsgType::BatchRequest, req.encode());
    auto [type, body] = client.read_frame();
    ASSERT_EQ(type, st::MsgType::BatchResponse);

    st::BatchResponseWire resp;
    ASSERT_TRUE(st::BatchResponseWire::decode(body, resp));
    ASSERT_EQ(resp.status, 0u);
    ASSERT_EQ(resp.images.size(), 8u);

    std::size_t payload_total = 0;
    std::size_t expected_body = 4 + 4 + resp.message.size() + 4;  // status, message, count
    for (const auto& img : resp.images) {
      ASSERT_EQ(img.payload.size(), 64u * 64u * 3u);
      payload_total += img.payload.size();
      expected_body += 4;  // source count
      for (const auto& s : img.sources)
        expected_body += 4 + s.id.size() + 8 + 1 + 8;  // id, t, kind, weight
      expected_body += 8 + img.payload.size();         // payload length + payload
    }
    EXPECT_EQ(payload_total, 98304u);
    EXPECT_EQ(body.size(), expected_body) << "wire layout drifted from docs/protocol.md";
  }
  {
    // stale protocol version: server answers with an error frame and closes
    // the connection without transferring a single image byte
    st::StreamClient stale("127.0.0.1", server.port());
    st::BatchRequestWire req;
    req.seed = 1;
    req.count = 1;
    req.width = 8;
    req.height = 8;
    req.mix_mode = 0;
    req.mix_n = 1;
    stale.send_frame(st::MsgType::BatchRequest, req.encode(), /*version=*/2);
    auto [type, body] = stale.read_frame();
    ASSERT_EQ(type, st::MsgType::Error);
    st::ErrorWire err;
    ASSERT_TRUE(st::ErrorWire::decode(body, err));
    EXPECT_EQ(err.code, static_cast<std::uint32_t>(st::WireError::VersionMismatch));
  }
  server.stop();
}

// Criterion 9: dialect handling end to end. A TwiGL body and a Shadertoy
// mainImage source transpile/adapt, compile, and render; a channel-touching
// source is rejected with RequiresExternalInput.
TEST(Acceptance, C09_DialectHandling) {
  Reporter reporter(9, "twigl + shadertoy compile and render; channel source rejected");
  cp::CorpusManifest manifest;
  cp::ingest_snippet(manifest, "o=vec4(fract(t+FC.x/r.x),fract(t),0.5,1.0);",
                     cp::Dialect::Twigl, "tw");
  cp::ingest_snippet(manifest,
                     "void mainImage(out vec4 fragColor, in vec2 fragCoord) {\n"
                     "  fragColor = vec4(0.25, 0.5, 0.75, 1.0);\n"
                     "}\n",
                     cp::Dialect::Shadertoy, "sh");
  cp::ingest_snippet(manifest,
                     "void mainImage(out vec4 c, in vec2 p) {\n"
                     "  c = texture(iChannel0, p / iResolution.xy);\n"
                     "}\n",
                     cp::Dialect::Shadertoy, "chan");

  EXPECT_EQ(manifest.at("chan").status, cp::Status::Rejected);
  EXPECT_NE(manifest.at("chan").reject_reason.find("RequiresExternalInput"), std::string::npos);

  cp::validate_all(engine(), manifest);
  EXPECT_EQ(manifest.at("tw").status, cp::Status::Compiled);
  EXPECT_EQ(manifest.at("sh").status, cp::Status::Compiled);
  EXPECT_EQ(manifest.at("chan").status, cp::Status::Rejected);

  ps::Image tw = engine().render_one(manifest.at("tw").glsl, "tw", 0.25, 32, 32);
  EXPECT_TRUE(tw.valid());
  ps::Image sh = engine().render_one(manifest.at("sh").glsl, "sh", 0.0, 32, 32);
  EXPECT_EQ(sh.at(16, 16)[0], 64);   // 0.25
  EXPECT_EQ(sh.at(16, 16)[1], 128);  // 0.5
  EXPECT_EQ(sh.at(16, 16)[2], 191);  // 0.75
}

// Criterion 10: large-scale training accuracies are out of reach for this
// artifact by design. What is verified instead: the generation-side
// preconditions those results depend on - the offline MixUp defaults (n=6,
// alpha=1), deterministic fixed datasets (criteria 3 and 7), and live
// per-batch freshness under client-chosen seeds.
TEST(Acceptance, C10_PaperScaleScopeBoundary) {
  Reporter reporter(10, "training-scale results out of scope; generation preconditions verified");
  const mx::MixSpec defaults;
  EXPECT_EQ(defaults.mode, mx::MixMode::Mixup);
  EXPECT_EQ(defaults.n, 6);
  EXPECT_DOUBLE_EQ(defaults.alpha, 1.0);

  // live-generator freshness: distinct seeds produce distinct batches
  cp::CorpusManifest manifest = testutil::synthetic_corpus(engine(), 6, 0, 0);
  st::StreamServer server(manifest, engine());
  server.start();
  {
    st::StreamClient client("127.0.0.1", server.port());
    st::BatchRequestWire req;
    req.seed = 1;
    req.count = 1;
    req.width = 16;
    req.height = 16;
    req.mix_mode = 1;
    req.mix_n = 6;
    req.encoding = 0;
    auto a = client.request_batch(req);
    req.seed = 2;
    auto b = client.request_batch(req);
    ASSERT_EQ(a.status, 0u);
    ASSERT_EQ(b.status, 0u);
    EXPECT_NE(a.images[0].payload, b.images[0].payload);
  }
  server.stop();
  std::printf(
      "        note: ImageNet/VTAB accuracies and predictor figures require neural training "
      "outside this artifact; their data-generation preconditions are what is gated here\n");
}
