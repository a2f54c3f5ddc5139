#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "procshade/corpus/dialect.hpp"
#include "procshade/corpus/ingest.hpp"
#include "procshade/corpus/manifest.hpp"
#include "procshade/corpus/validate.hpp"
#include "procshade/render/cpu_context.hpp"
#include "procshade/render/engine.hpp"
#include "testutil.hpp"

namespace ps = procshade;
namespace cp = ps::corpus;
namespace rd = ps::render;

namespace {

constexpr const char* kMinimalRaw = "void main(){gl_FragColor=vec4(1.);}";
constexpr const char* kMinimalShadertoy =
    "void mainImage(out vec4 fragColor, in vec2 fragCoord) {\n"
    "    fragColor = vec4(0.2, 0.4, 0.6, 1.0);\n"
    "}\n";

}  // namespace

// --- ingest --------------------------------------------------------------------

TEST(Ingest, FillsHashesAndCounts) {
  cp::CorpusManifest m;
  auto& rec = cp::ingest_snippet(m, kMinimalRaw, cp::Dialect::RawGlsl, "a");
  EXPECT_EQ(rec.status, cp::Status::Pending);
  EXPECT_EQ(rec.char_count, std::string(kMinimalRaw).size());
  EXPECT_EQ(rec.source_hash, ps::sha256_hex(kMinimalRaw));
  EXPECT_FALSE(rec.glsl.empty());
  EXPECT_EQ(m.size(), 1u);
}

TEST(Ingest, EmptySourceRejected) {
  cp::CorpusManifest m;
  try {
    cp::ingest_snippet(m, "", cp::Dialect::RawGlsl, "b");
    FAIL();
  } catch (const ps::Error& e) {
    EXPECT_EQ(e.code(), ps::Errc::EmptySource);
  }
}

TEST(Ingest, HashIsPureFunctionOfSource) {
  cp::CorpusManifest m;
  auto& a = cp::ingest_snippet(m, kMinimalRaw, cp::Dialect::RawGlsl, "a");
  auto& b = cp::ingest_snippet(m, kMinimalRaw, cp::Dialect::RawGlsl, "b");
  EXPECT_EQ(a.source_hash, b.source_hash);
}

TEST(Ingest, DuplicateIdRejected) {
  cp::CorpusManifest m;
  cp::ingest_snippet(m, kMinimalRaw, cp::Dialect::RawGlsl, "a");
  try {
    cp::ingest_snippet(m, "void main(){}", cp::Dialect::RawGlsl, "a");
    FAIL();
  } catch (const ps::Error& e) {
    EXPECT_EQ(e.code(), ps::Errc::DuplicateId);
  }
}

TEST(Ingest, DirectoryByExtension) {
  testutil::TempDir dir("ingest");
  auto write = [&](const char* name, const std::string& content) {
    std::ofstream out(dir.path / name);
    out << content;
  };
  write("a.frag", kMinimalRaw);
  write("b.twigl", "o=vec4(sin(t));");
  write("c.shadertoy", kMinimalShadertoy);
  write("notes.txt", "not a shader");

  cp::CorpusManifest m;
  auto report = cp::ingest_directory(m, dir.path);
  EXPECT_EQ(report.ingested, 3u);
  ASSERT_EQ(report.skipped.size(), 1u);
  EXPECT_EQ(report.skipped[0], "notes.txt");
  EXPECT_EQ(m.at("a").dialect, cp::Dialect::RawGlsl);
  EXPECT_EQ(m.at("b").dialect, cp::Dialect::Twigl);
  EXPECT_EQ(m.at("c").dialect, cp::Dialect::Shadertoy);
}

// --- twigl ----------------------------------------------------------------------

TEST(Twigl, BodyGetsPreambleAndMain) {
  const std::string glsl = cp::transpile_twigl("o=vec4(sin(t));");
  EXPECT_NE(glsl.find("uniform float time"), std::string::npos);
  EXPECT_NE(glsl.find("uniform float t"), std::string::npos);
  EXPECT_NE(glsl.find("void main()"), std::string::npos);
  EXPECT_NE(glsl.find("o=vec4(sin(t));"), std::string::npos);

  rd::CpuRenderContext ctx;
  auto handle = ctx.compile(glsl);  // must compile under validate's context
  ps::Image img = ctx.render(*handle, 0.6, 8, 8);
  // sin(0.6) ~= 0.5646 -> 144
  EXPECT_NEAR(img.at(4, 4)[0], 144, 1);
}

TEST(Twigl, ExistingMainPassesThrough) {
  const std::string body = "void main(){o=vec4(1.0,0.5,0.25,1.0);}";
  const std::string glsl = cp::transpile_twigl(body);
  EXPECT_NE(glsl.find(body), std::string::npos);
  // exactly one main
  EXPECT_EQ(glsl.find("void main"), glsl.rfind("void main"));
}

TEST(Twigl, FragCoordAbbreviationWorks) {
  const std::string glsl = cp::transpile_twigl("o=vec4(FC.xy/r,0.0,1.0);");
  rd::CpuRenderContext ctx;
  auto handle = ctx.compile(glsl);
  ps::Image img = ctx.render(*handle, 0.0, 10, 10);
  // bottom-right pixel has FC.xy ~ (9.5, 0.5)
  EXPECT_NEAR(img.at(9, 9)[0], std::lround(9.5 / 10.0 * 255.0), 1);
}

TEST(Twigl, UnknownAbbreviationFailsAtValidate) {
  // 'b' (backbuffer) is outside the fixed table: transpiles, then rejects
  const std::string glsl = cp::transpile_twigl("o=vec4(texture(b,FC.xy/r));");
  rd::CpuRenderContext ctx;
  try {
    ctx.compile(glsl);
    FAIL();
  } catch (const ps::Error& e) {
    EXPECT_EQ(e.code(), ps::Errc::CompileError);
    EXPECT_FALSE(e.message().empty());
  }
}

TEST(Twigl, TranspilationDeterministic) {
  const std::string body = "o=vec4(fract(t*2.0));";
  EXPECT_EQ(cp::transpile_twigl(body), cp::transpile_twigl(body));
}

// --- shadertoy --------------------------------------------------------------------

TEST(Shadertoy, MinimalMainImageRenders) {
  const std::string glsl = cp::adapt_shadertoy(kMinimalShadertoy);
  rd::CpuRenderContext ctx;
  auto handle = ctx.compile(glsl);
  ps::Image img = ctx.render(*handle, 0.0, 6, 6);
  EXPECT_EQ(img.at(2, 2)[0], 51);   // 0.2
  EXPECT_EQ(img.at(2, 2)[1], 102);  // 0.4
  EXPECT_EQ(img.at(2, 2)[2], 153);  // 0.6
}

TEST(Shadertoy, ChannelInputRejected) {
  const std::string src =
      "void mainImage(out vec4 fragColor, in vec2 fragCoord) {\n"
      "    fragColor = texture(iChannel0, fragCoord / iResolution.xy);\n"
      "}\n";
  try {
    cp::adapt_shadertoy(src);
    FAIL();
  } catch (const ps::Error& e) {
    EXPECT_EQ(e.code(), ps::Errc::RequiresExternalInput);
    EXPECT_NE(e.message().find("iChannel0"), std::string::npos);
  }
}

TEST(Shadertoy, AllRejectionListIdentifiersCaught) {
  for (const std::string& bad : cp::external_input_identifiers()) {
    const std::string src = "void mainImage(out vec4 c, in vec2 p){ c = vec4(" + bad + ".x); }";
    try {
      cp::adapt_shadertoy(src);
      FAIL() << bad << " not caught";
    } catch (const ps::Error& e) {
      EXPECT_EQ(e.code(), ps::Errc::RequiresExternalInput);
      EXPECT_NE(e.message().find(bad), std::string::npos);
    }
  }
}

TEST(Shadertoy, CommentedChannelDoesNotReject) {
  const std::string src =
      "// iChannel0 intentionally unused\n"
      "void mainImage(out vec4 c, in vec2 p){ c = vec4(1.0); }";
  EXPECT_NO_THROW(cp::adapt_shadertoy(src));
}

TEST(Shadertoy, MissingEntryPointRejected) {
  try {
    cp::adapt_shadertoy("void main(){gl_FragColor=vec4(1.0);}");
    FAIL();
  } catch (const ps::Error& e) {
    EXPECT_EQ(e.code(), ps::Errc::MissingEntryPoint);
  }
}

TEST(Shadertoy, ITimeMapsToEngineTime) {
  const std::string glsl = cp::adapt_shadertoy(
      "void mainImage(out vec4 c, in vec2 p){ c = vec4(vec3(fract(iTime)), 1.0); }");
  rd::CpuRenderContext ctx;
  auto handle = ctx.compile(glsl);
  ps::Image img = ctx.render(*handle, 0.5, 4, 4);
  EXPECT_NEAR(img.at(1, 1)[0], 128, 1);
}

// --- validate ----------------------------------------------------------------------

TEST(Validate, CompilesAndRejects) {
  rd::RenderEngine engine({.backend = rd::Backend::Cpu, .workers = 2});
  cp::CorpusManifest m;
  cp::ingest_snippet(m, kMinimalRaw, cp::Dialect::RawGlsl, "good");
  cp::ingest_snippet(m, "void main(){gl_FragColor=vec4(1.0;}", cp::Dialect::RawGlsl, "bad");
  auto summary = cp::validate_all(engine, m);
  EXPECT_EQ(summary.compiled, 1u);
  EXPECT_EQ(summary.rejected, 1u);
  EXPECT_EQ(m.at("good").status, cp::Status::Compiled);
  EXPECT_EQ(m.at("bad").status, cp::Status::Rejected);
  EXPECT_FALSE(m.at("bad").reject_reason.empty());
}

TEST(Validate, MixedBatchCountsAddUp) {
  // 80 valid / 20 invalid: count(compiled) + count(rejected) = 100
  rd::RenderEngine engine({.backend = rd::Backend::Cpu, .workers = 4});
  cp::CorpusManifest m;
  for (int i = 0; i < 100; ++i) {
    char id[16];
    std::snprintf(id, sizeof id, "s%03d", i);
    if (i % 5 == 0)
      cp::ingest_snippet(m, "void main(){oops" + std::to_string(i), cp::Dialect::RawGlsl, id);
    else
      cp::ingest_snippet(m, testutil::dynamic_raw_source(i), cp::Dialect::RawGlsl, id);
  }
  auto summary = cp::validate_all(engine, m);
  EXPECT_EQ(summary.compiled, 80u);
  EXPECT_EQ(summary.rejected, 20u);
  EXPECT_EQ(summary.compiled + summary.rejected, 100u);
}

TEST(Validate, DoesNotMutateSourceOrGlsl) {
  rd::RenderEngine engine({.backend = rd::Backend::Cpu, .workers = 1});
  cp::CorpusManifest m;
  auto& rec = cp::ingest_snippet(m, kMinimalRaw, cp::Dialect::RawGlsl, "a");
  const std::string source_before = rec.source;
  const std::string glsl_before = rec.glsl;
  cp::validate_all(engine, m);
  EXPECT_EQ(m.at("a").source, source_before);
  EXPECT_EQ(m.at("a").glsl, glsl_before);
  EXPECT_EQ(m.at("a").status, cp::Status::Compiled);
}

TEST(Validate, RejectedAtIngestStaysRejected) {
  rd::RenderEngine engine({.backend = rd::Backend::Cpu, .workers = 1});
  cp::CorpusManifest m;
  auto& rec = cp::ingest_snippet(
      m, "void mainImage(out vec4 c, in vec2 p){c=texture(iChannel0,p);}",
      cp::Dialect::Shadertoy, "chan");
  EXPECT_EQ(rec.status, cp::Status::Rejected);
  EXPECT_NE(rec.reject_reason.find("RequiresExternalInput"), std::string::npos);
  // the reason names at least one identifier from the rejection list
  bool names_one = false;
  for (const std::string& bad : cp::external_input_identifiers())
    names_one = names_one || rec.reject_reason.find(bad) != std::string::npos;
  EXPECT_TRUE(names_one);
  cp::validate_all(engine, m);
  EXPECT_EQ(m.at("chan").status, cp::Status::Rejected);
}

// --- manifest persistence -------------------------------------------------------------

TEST(Manifest, SaveLoadRoundTrip) {
  testutil::TempDir dir("manifest");
  rd::RenderEngine engine({.backend = rd::Backend::Cpu, .workers = 2});
  cp::CorpusManifest m = testutil::synthetic_corpus(engine, 5, 0, 2);
  m.settings()["note"] = "round-trip";
  const auto path = dir.path / "corpus.manifest";
  m.save(path);

  EXPECT_TRUE(std::filesystem::exists(dir.path / "frags" / "dyn000.frag"));

  cp::CorpusManifest back = cp::CorpusManifest::load(path);
  ASSERT_EQ(back.size(), m.size());
  for (const auto& rec : m.records()) {
    const auto& b = back.at(rec.id);
    EXPECT_EQ(b.source, rec.source);
    EXPECT_EQ(b.glsl, rec.glsl);
    EXPECT_EQ(b.source_hash, rec.source_hash);
    EXPECT_EQ(b.status, rec.status);
    EXPECT_EQ(b.dialect, rec.dialect);
  }
  EXPECT_EQ(back.settings()["note"], "round-trip");
  EXPECT_EQ(back.meta()["hash_algorithm"], "sha256");
}

TEST(Manifest, HeaderRecordsHashAlgorithm) {
  testutil::TempDir dir("manifest2");
  cp::CorpusManifest m;
  cp::ingest_snippet(m, kMinimalRaw, cp::Dialect::RawGlsl, "a");
  const auto path = dir.path / "corpus.manifest";
  m.save(path);
  std::ifstream in(path);
  std::string first_line;
  std::getline(in, first_line);
  EXPECT_NE(first_line.find("\"hash_algorithm\":\"sha256\""), std::string::npos);
}

TEST(Manifest, UniquePoolSortedById) {
  rd::RenderEngine engine({.backend = rd::Backend::Cpu, .workers = 2});
  cp::CorpusManifest m;
  cp::ingest_snippet(m, testutil::dynamic_raw_source(2), cp::Dialect::RawGlsl, "zz");
  cp::ingest_snippet(m, testutil::dynamic_raw_source(3), cp::Dialect::RawGlsl, "aa");
  cp::validate_all(engine, m);
  auto pool = m.unique_pool();
  ASSERT_EQ(pool.size(), 2u);
  EXPECT_EQ(pool[0]->id, "aa");
  EXPECT_EQ(pool[1]->id, "zz");
}
