#include <gtest/gtest.h>

#include "procshade/dedup/dedup.hpp"
#include "testutil.hpp"

namespace ps = procshade;
namespace cp = ps::corpus;
namespace rd = ps::render;
namespace dd = ps::dedup;

namespace {

rd::RenderEngine& shared_engine() {
  static rd::RenderEngine engine({.backend = rd::Backend::Cpu, .workers = 4});
  return engine;
}

struct DedupCounts {
  std::size_t unique = 0, duplicates = 0, statics = 0;
};

DedupCounts count_states(const cp::CorpusManifest& m) {
  DedupCounts c;
  for (const auto& r : m.records()) {
    if (r.status != cp::Status::Compiled) continue;
    switch (r.dedup) {
      case cp::DedupState::Unique: ++c.unique; break;
      case cp::DedupState::Duplicate: ++c.duplicates; break;
      case cp::DedupState::Static: ++c.statics; break;
    }
  }
  return c;
}

}  // namespace

TEST(Fingerprint, PixelsOnly) {
  ps::Image a = testutil::random_image(16, 16, 1, "ida");
  ps::Image b = a;
  b.shader_id = "idb";
  b.t = 99.0;
  EXPECT_EQ(dd::fingerprint(a).digest, dd::fingerprint(b).digest);
  b.pixels[7] ^= 1;
  EXPECT_NE(dd::fingerprint(a).digest, dd::fingerprint(b).digest);
}

TEST(RemoveDuplicates, TieBreaksToSmallestId) {
  cp::CorpusManifest m;
  const std::string src = testutil::dynamic_raw_source(1);
  cp::ingest_snippet(m, src, cp::Dialect::RawGlsl, "b");
  cp::ingest_snippet(m, src, cp::Dialect::RawGlsl, "a");
  cp::validate_all(shared_engine(), m);
  dd::remove_duplicates(shared_engine(), m, 0.0, 32, 32);
  EXPECT_EQ(m.at("a").dedup, cp::DedupState::Unique);
  EXPECT_EQ(m.at("b").dedup, cp::DedupState::Duplicate);
  EXPECT_EQ(m.at("b").duplicate_of, "a");
}

TEST(RemoveDuplicates, DistinctCorpusUnchanged) {
  cp::CorpusManifest m = testutil::synthetic_corpus(shared_engine(), 10, 0, 0);
  auto report = dd::remove_duplicates(shared_engine(), m, 0.0, 32, 32);
  EXPECT_EQ(report.duplicates, 0u);
  EXPECT_EQ(count_states(m).unique, 10u);
}

TEST(RemoveDuplicates, TwentyPairsInHundredLeavesEighty) {
  cp::CorpusManifest m = testutil::synthetic_corpus(shared_engine(), 80, 20, 0);
  ASSERT_EQ(m.size(), 100u);
  auto report = dd::remove_duplicates(shared_engine(), m, 0.0, 48, 48);
  EXPECT_EQ(report.duplicates, 20u);
  EXPECT_EQ(count_states(m).unique, 80u);
}

TEST(RemoveDuplicates, Idempotent) {
  cp::CorpusManifest m = testutil::synthetic_corpus(shared_engine(), 10, 5, 0);
  dd::remove_duplicates(shared_engine(), m, 0.0, 32, 32);
  const auto first = count_states(m);
  dd::remove_duplicates(shared_engine(), m, 0.0, 32, 32);
  const auto second = count_states(m);
  EXPECT_EQ(first.unique, second.unique);
  EXPECT_EQ(first.duplicates, second.duplicates);
}

TEST(RemoveDuplicates, KeptSetIndependentOfManifestOrder) {
  auto build = [&](bool reversed) {
    cp::CorpusManifest m;
    std::vector<int> order{0, 1, 2, 3, 4};
    if (reversed) std::reverse(order.begin(), order.end());
    for (int i : order) {
      char id[8];
      std::snprintf(id, sizeof id, "s%d", i);
      cp::ingest_snippet(m, testutil::dynamic_raw_source(i % 3), cp::Dialect::RawGlsl, id);
    }
    cp::validate_all(shared_engine(), m);
    dd::remove_duplicates(shared_engine(), m, 0.0, 32, 32);
    std::vector<std::string> kept;
    for (const auto& r : m.records())
      if (r.usable()) kept.push_back(r.id);
    std::sort(kept.begin(), kept.end());
    return kept;
  };
  EXPECT_EQ(build(false), build(true));
}

TEST(RemoveDuplicates, PendingRecordsRejected) {
  cp::CorpusManifest m;
  cp::ingest_snippet(m, testutil::dynamic_raw_source(0), cp::Dialect::RawGlsl, "a");
  EXPECT_THROW(dd::remove_duplicates(shared_engine(), m, 0.0, 8, 8), ps::Error);
}

TEST(RemoveStatic, ConstantShaderMarkedStatic) {
  cp::CorpusManifest m = testutil::synthetic_corpus(shared_engine(), 3, 0, 2);
  auto report = dd::remove_static(shared_engine(), m, 4, 0, 32, 32, 123);
  EXPECT_EQ(report.statics, 2u);
  EXPECT_EQ(m.at("sta000").dedup, cp::DedupState::Static);
  EXPECT_EQ(m.at("dyn000").dedup, cp::DedupState::Unique);
}

TEST(RemoveStatic, FractTimeShaderKept) {
  // fract(t) as gray: probe values differ across the plan unless quantization
  // collapses them; with byte-exact threshold 0 the shader must survive.
  cp::CorpusManifest m;
  cp::ingest_snippet(m, "void main(){gl_FragColor=vec4(vec3(fract(time)),1.0);}",
                     cp::Dialect::RawGlsl, "gray");
  cp::validate_all(shared_engine(), m);
  dd::remove_static(shared_engine(), m, 4, 0, 16, 16, 7);
  EXPECT_EQ(m.at("gray").dedup, cp::DedupState::Unique);
}

TEST(RemoveStatic, Threshold255MarksEverythingStatic) {
  cp::CorpusManifest m = testutil::synthetic_corpus(shared_engine(), 4, 0, 1);
  auto report = dd::remove_static(shared_engine(), m, 3, 255, 16, 16, 7);
  EXPECT_EQ(report.statics, 5u);
  EXPECT_EQ(count_states(m).unique, 0u);
}

TEST(RemoveStatic, Idempotent) {
  cp::CorpusManifest m = testutil::synthetic_corpus(shared_engine(), 6, 0, 3);
  dd::remove_static(shared_engine(), m, 4, 0, 24, 24, 9);
  const auto first = count_states(m);
  dd::remove_static(shared_engine(), m, 4, 0, 24, 24, 9);
  const auto second = count_states(m);
  EXPECT_EQ(first.statics, second.statics);
  EXPECT_EQ(first.unique, second.unique);
}

TEST(RemoveStatic, KProbesBelowTwoRejected) {
  cp::CorpusManifest m = testutil::synthetic_corpus(shared_engine(), 1, 0, 0);
  EXPECT_THROW(dd::remove_static(shared_engine(), m, 1, 0, 8, 8, 1), ps::Error);
}

TEST(DedupInvariant, DuplicateOfAlwaysReferencesUnique) {
  // two byte-identical *constant* shaders: the duplicate pass keeps one, then
  // the static pass retires it; the dependent must be promoted, not dangle.
  cp::CorpusManifest m;
  const std::string src = testutil::constant_raw_source(0.3, 0.6, 0.9);
  cp::ingest_snippet(m, src, cp::Dialect::RawGlsl, "a");
  cp::ingest_snippet(m, src, cp::Dialect::RawGlsl, "b");
  cp::ingest_snippet(m, testutil::dynamic_raw_source(4), cp::Dialect::RawGlsl, "c");
  cp::validate_all(shared_engine(), m);

  dd::remove_duplicates(shared_engine(), m, 0.0, 16, 16);
  EXPECT_EQ(m.at("b").duplicate_of, "a");
  dd::remove_static(shared_engine(), m, 4, 0, 16, 16, 5);

  for (const auto& r : m.records()) {
    if (r.dedup != cp::DedupState::Duplicate) continue;
    const auto& head = m.at(r.duplicate_of);
    EXPECT_EQ(head.dedup, cp::DedupState::Unique)
        << r.id << " points at non-unique " << head.id;
  }
  // both constant twins end up out of the pool, the dynamic one stays
  EXPECT_EQ(m.at("c").dedup, cp::DedupState::Unique);
  EXPECT_NE(m.at("a").dedup, cp::DedupState::Unique);
  EXPECT_NE(m.at("b").dedup, cp::DedupState::Unique);
}

TEST(DedupReport, CountsAreConsistent) {
  cp::CorpusManifest m = testutil::synthetic_corpus(shared_engine(), 20, 5, 5);
  auto dup_report = dd::remove_duplicates(shared_engine(), m, 0.0, 32, 32);
  auto static_report = dd::remove_static(shared_engine(), m, 4, 0, 32, 32, 11);
  EXPECT_EQ(dup_report.duplicates, 5u);
  EXPECT_EQ(static_report.statics, 5u);
  EXPECT_EQ(static_report.kept, 20u);
  auto j = static_report.to_json();
  EXPECT_EQ(j["static"], 5);
  EXPECT_EQ(j["kept"], 20);
  EXPECT_FALSE(static_report.summary().empty());
  // settings recorded for auditability
  EXPECT_EQ(m.settings()["dedup_static"]["k_probes"], 4);
  EXPECT_EQ(m.settings()["dedup_duplicates"]["t0"], 0.0);
}
