#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "procshade/metrics/quantile.hpp"
#include "procshade/metrics/stats.hpp"
#include "testutil.hpp"

namespace ps = procshade;
namespace mt = ps::metrics;
namespace cp = ps::corpus;
namespace rd = ps::render;

namespace {

rd::RenderEngine& shared_engine() {
  static rd::RenderEngine engine({.backend = rd::Backend::Cpu, .workers = 4});
  return engine;
}

// independent nearest-rank oracle: sort and index directly
double oracle_quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const std::size_t rank =
      static_cast<std::size_t>(std::ceil(q * static_cast<double>(v.size())));
  return v[std::max<std::size_t>(rank, 1) - 1];
}

}  // namespace

// --- quantiles ----------------------------------------------------------------

TEST(Quantile, MatchesSortOracleOnRandomValues) {
  ps::Rng rng(99);
  std::vector<double> values;
  values.reserve(1000);
  for (int i = 0; i < 1000; ++i) values.push_back(rng.uniform(-50.0, 150.0));
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  for (double q : {0.05, 0.5, 0.95, 0.01, 1.0}) {
    EXPECT_EQ(mt::nearest_rank_quantile(sorted, q), oracle_quantile(values, q)) << "q=" << q;
  }
}

TEST(Quantile, SmallKnownCases) {
  std::vector<double> v{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  EXPECT_EQ(mt::nearest_rank_quantile(v, 0.05), 1.0);   // ceil(0.5) = 1
  EXPECT_EQ(mt::nearest_rank_quantile(v, 0.95), 10.0);  // ceil(9.5) = 10
  EXPECT_EQ(mt::nearest_rank_quantile(v, 0.5), 5.0);    // ceil(5) = 5
  EXPECT_EQ(mt::nearest_rank_quantile(v, 1.0), 10.0);
}

TEST(Quantile, SingletonCollapses) {
  std::vector<double> v{4.2};
  auto s = mt::summarize_values(v);
  EXPECT_EQ(s.avg, 4.2);
  EXPECT_EQ(s.q5, 4.2);
  EXPECT_EQ(s.q95, 4.2);
}

TEST(Quantile, Q5NeverAboveQ95) {
  ps::Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> v;
    const int n = 1 + static_cast<int>(rng.below(200));
    for (int i = 0; i < n; ++i) v.push_back(rng.uniform(0, 1e6));
    auto s = mt::summarize_values(v);
    EXPECT_LE(s.q5, s.q95);
  }
}

TEST(Quantile, EmptyRejected) {
  EXPECT_THROW(mt::summarize_values({}), ps::Error);
}

// --- self similarity -------------------------------------------------------------

TEST(SelfSim, ConstantImageScoresZero) {
  ps::Image img = ps::Image::solid(64, 64, 120, 50, 230);
  ps::Rng rng(1);
  EXPECT_DOUBLE_EQ(
      mt::self_similarity(img, 8, 0.5, mt::default_crop_distance, rng), 0.0);
}

TEST(SelfSim, TwoToneOppositeCropsMaximal) {
  // width 2H, height H: a side-H crop covers exactly half the area. Forcing
  // the two crops onto opposite halves gives mean |0 - 1| = 1.
  const int h = 32;
  ps::Image img = ps::Image::solid(2 * h, h, 0, 0, 0);
  for (int y = 0; y < h; ++y)
    for (int x = h; x < 2 * h; ++x) {
      auto* p = img.at(x, y);
      p[0] = p[1] = p[2] = 255;
    }
  const int side = mt::crop_side_for_fraction(img, 0.5);
  EXPECT_EQ(side, h);
  const double d =
      mt::crop_pair_distance(img, 0, 0, h, 0, side, mt::default_crop_distance);
  EXPECT_DOUBLE_EQ(d, 1.0);
}

TEST(SelfSim, NonNegativeOnRandomImages) {
  ps::Rng rng(7);
  for (int trial = 0; trial < 5; ++trial) {
    ps::Image img = testutil::random_image(48, 48, 1000 + trial);
    double score = mt::self_similarity(img, 8, 0.5, mt::default_crop_distance, rng);
    EXPECT_GE(score, 0.0);
    EXPECT_LE(score, 1.0);
  }
}

TEST(SelfSim, InvariantToConstantShiftWithHeadroom) {
  ps::Image base = ps::Image::solid(40, 40, 0, 0, 0);
  ps::Rng fill(3);
  for (auto& b : base.pixels) b = static_cast<std::uint8_t>(fill.below(100));  // headroom 155
  ps::Image shifted = base;
  for (auto& b : shifted.pixels) b = static_cast<std::uint8_t>(b + 70);

  ps::Rng rng_a(55), rng_b(55);
  const double a = mt::self_similarity(base, 16, 0.5, mt::default_crop_distance, rng_a);
  const double b = mt::self_similarity(shifted, 16, 0.5, mt::default_crop_distance, rng_b);
  EXPECT_NEAR(a, b, 1e-12);
}

TEST(SelfSim, CropTooLargeForThinImages) {
  ps::Image thin = ps::Image::solid(100, 10, 0, 0, 0);
  ps::Rng rng(1);
  EXPECT_THROW(mt::self_similarity(thin, 4, 0.5, mt::default_crop_distance, rng), ps::Error);
}

TEST(SelfSim, PluggableDistanceIsUsed) {
  ps::Image img = testutil::random_image(32, 32, 4);
  ps::Rng rng(2);
  const double score = mt::self_similarity(
      img, 4, 0.5, [](const ps::Image&, const ps::Image&) { return 0.25; }, rng);
  EXPECT_DOUBLE_EQ(score, 0.25);
}

// --- per-shader stats ---------------------------------------------------------------

TEST(Stats, DefaultSampleCountAndResolution) {
  mt::StatsOptions opt;
  EXPECT_EQ(opt.samples, 400u);
  EXPECT_EQ(opt.width, 384);
  EXPECT_EQ(opt.height, 384);
}

TEST(Stats, ConstantCompressesBetterThanNoise) {
  cp::CorpusManifest m;
  cp::ingest_snippet(m, testutil::constant_raw_source(0.5, 0.5, 0.5), cp::Dialect::RawGlsl,
                     "flat");
  cp::ingest_snippet(m, testutil::noise_raw_source(), cp::Dialect::RawGlsl, "noise");
  cp::validate_all(shared_engine(), m);

  mt::StatsOptions opt;
  opt.samples = 8;
  opt.width = opt.height = 64;
  opt.self_sim_images = 2;
  auto flat = mt::compute_stats(shared_engine(), m.at("flat"), opt);
  auto noise = mt::compute_stats(shared_engine(), m.at("noise"), opt);
  EXPECT_LT(flat.gzip_kb, noise.gzip_kb);
  EXPECT_LT(flat.jpeg_kb, noise.jpeg_kb);
  EXPECT_LT(flat.self_sim, noise.self_sim + 1e-9);
  EXPECT_GT(flat.fps, 0.0);
  EXPECT_EQ(flat.samples_used, 8u);
}

TEST(Stats, ZeroSamplesRejected) {
  cp::CorpusManifest m;
  cp::ingest_snippet(m, testutil::constant_raw_source(1, 1, 1), cp::Dialect::RawGlsl, "a");
  cp::validate_all(shared_engine(), m);
  mt::StatsOptions opt;
  opt.samples = 0;
  try {
    mt::compute_stats(shared_engine(), m.at("a"), opt);
    FAIL();
  } catch (const ps::Error& e) {
    EXPECT_EQ(e.code(), ps::Errc::ZeroCount);
  }
}

TEST(Stats, ComputeAllFillsManifest) {
  cp::CorpusManifest m = testutil::synthetic_corpus(shared_engine(), 3, 0, 0);
  mt::StatsOptions opt;
  opt.samples = 4;
  opt.width = opt.height = 32;
  opt.self_sim_images = 1;
  const std::size_t done = mt::compute_all_stats(shared_engine(), m, opt);
  EXPECT_EQ(done, 3u);
  for (const auto& rec : m.records()) {
    ASSERT_TRUE(rec.stats.has_value());
    EXPECT_EQ(rec.stats->samples_used, 4u);
    EXPECT_EQ(rec.stats->char_count, rec.char_count);
  }
  EXPECT_EQ(m.settings()["stats"]["samples"], 4);
  // second run skips records that already have stats
  EXPECT_EQ(mt::compute_all_stats(shared_engine(), m, opt), 0u);
}

// --- summarize ------------------------------------------------------------------------

TEST(Summarize, SingletonSubset) {
  cp::CorpusManifest m = testutil::synthetic_corpus(shared_engine(), 1, 0, 0);
  mt::StatsOptions opt;
  opt.samples = 3;
  opt.width = opt.height = 24;
  opt.self_sim_images = 1;
  mt::compute_all_stats(shared_engine(), m, opt);
  auto s = mt::summarize(m, mt::subset_all(), "all");
  EXPECT_EQ(s.shaders, 1u);
  EXPECT_EQ(s.chars.avg, s.chars.q5);
  EXPECT_EQ(s.chars.q5, s.chars.q95);
  EXPECT_EQ(s.gzip_kb.avg, s.gzip_kb.q95);
}

TEST(Summarize, SubsetFilterAndEmpty) {
  cp::CorpusManifest m = testutil::synthetic_corpus(shared_engine(), 2, 0, 0);
  mt::StatsOptions opt;
  opt.samples = 2;
  opt.width = opt.height = 16;
  opt.self_sim_images = 1;
  mt::compute_all_stats(shared_engine(), m, opt);
  EXPECT_NO_THROW(mt::summarize(m, mt::subset_dialect(cp::Dialect::RawGlsl), "raw-glsl"));
  try {
    mt::summarize(m, mt::subset_dialect(cp::Dialect::Twigl), "twigl");
    FAIL();
  } catch (const ps::Error& e) {
    EXPECT_EQ(e.code(), ps::Errc::EmptySubset);
  }
}

TEST(Summarize, JsonHasFidSlot) {
  cp::CorpusManifest m = testutil::synthetic_corpus(shared_engine(), 1, 0, 0);
  mt::StatsOptions opt;
  opt.samples = 2;
  opt.width = opt.height = 16;
  opt.self_sim_images = 1;
  mt::compute_all_stats(shared_engine(), m, opt);
  auto s = mt::summarize(m, mt::subset_all(), "all");
  auto j = s.to_json();
  EXPECT_TRUE(j.contains("fid"));
  EXPECT_TRUE(j["fid"].is_null());
  s.external_fid = 35.04;
  EXPECT_DOUBLE_EQ(s.to_json()["fid"].get<double>(), 35.04);
}

// --- selection ----------------------------------------------------------------------

TEST(SelectTopK, SpecExamples) {
  std::map<std::string, double> scores{{"a", 0.3}, {"b", 0.2}, {"c", 0.9}};
  auto top2 = mt::select_top_k(scores, 2);
  ASSERT_EQ(top2.size(), 2u);
  EXPECT_EQ(top2[0], "c");
  EXPECT_EQ(top2[1], "a");

  auto all = mt::select_top_k(scores, 3);
  EXPECT_EQ(all, (std::vector<std::string>{"c", "a", "b"}));
}

TEST(SelectTopK, TiesBreakAscendingById) {
  std::map<std::string, double> scores{{"z", 1.0}, {"a", 1.0}, {"m", 1.0}};
  auto ids = mt::select_top_k(scores, 3);
  EXPECT_EQ(ids, (std::vector<std::string>{"a", "m", "z"}));
}

TEST(SelectTopK, KTooLarge) {
  std::map<std::string, double> scores{{"a", 1.0}};
  try {
    mt::select_top_k(scores, 2);
    FAIL();
  } catch (const ps::Error& e) {
    EXPECT_EQ(e.code(), ps::Errc::KTooLarge);
  }
}

TEST(SelectTopK, ZeroKGivesEmpty) {
  std::map<std::string, double> scores{{"a", 1.0}};
  EXPECT_TRUE(mt::select_top_k(scores, 0).empty());
}
