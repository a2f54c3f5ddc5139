#include <gtest/gtest.h>

#include <chrono>

#include "procshade/render/cpu_context.hpp"
#include "procshade/render/engine.hpp"
#include "procshade/render/gl_context.hpp"
#include "procshade/render/timesteps.hpp"
#include "testutil.hpp"

namespace ps = procshade;
namespace rd = ps::render;

namespace {

std::string with_raw_preamble(const std::string& body) {
  return ps::corpus::normalize_raw(body);
}

}  // namespace

// --- timestep plans -----------------------------------------------------------

TEST(Timesteps, SingleValueInFirstWindow) {
  for (std::uint64_t seed : {0ull, 1ull, 99ull}) {
    auto plan = rd::sample_timesteps(1, seed);
    ASSERT_EQ(plan.values.size(), 1u);
    EXPECT_GE(plan.values[0], 0.0);
    EXPECT_LT(plan.values[0], 0.25);
  }
}

TEST(Timesteps, EachFrameInItsWindow) {
  auto plan = rd::sample_timesteps(3, 42);
  for (std::size_t k = 0; k < 3; ++k) {
    EXPECT_GE(plan.values[k], k / 4.0);
    EXPECT_LT(plan.values[k], k / 4.0 + 0.25);
  }
}

TEST(Timesteps, DeterministicAndPrefixStable) {
  auto a = rd::sample_timesteps(16, 7);
  auto b = rd::sample_timesteps(16, 7);
  EXPECT_EQ(a.values, b.values);
  auto shorter = rd::sample_timesteps(4, 7);
  for (std::size_t k = 0; k < 4; ++k) EXPECT_EQ(shorter.values[k], a.values[k]);
  for (std::size_t k = 0; k < 16; ++k)
    EXPECT_EQ(rd::timestep_at(7, k), a.values[k]);
}

TEST(Timesteps, StrictlyIncreasing) {
  auto plan = rd::sample_timesteps(1000, 3);
  for (std::size_t k = 1; k < plan.values.size(); ++k)
    EXPECT_GT(plan.values[k], plan.values[k - 1]);
}

TEST(Timesteps, ZeroCountRejected) {
  EXPECT_THROW(
      {
        try {
          rd::sample_timesteps(0, 1);
        } catch (const ps::Error& e) {
          EXPECT_EQ(e.code(), ps::Errc::ZeroCount);
          throw;
        }
      },
      ps::Error);
}

TEST(Timesteps, CustomRateScalesWindows) {
  auto plan = rd::sample_timesteps(4, 5, 2.0);
  for (std::size_t k = 0; k < 4; ++k) {
    EXPECT_GE(plan.values[k], k / 2.0);
    EXPECT_LT(plan.values[k], k / 2.0 + 0.5);
  }
}

// --- CPU context ----------------------------------------------------------------

TEST(CpuRender, ConstantShaderFillsViewport) {
  rd::CpuRenderContext ctx;
  auto handle = ctx.compile(with_raw_preamble(testutil::constant_raw_source(1.0, 0.0, 0.0)));
  ps::Image img = ctx.render(*handle, 0.0, 16, 12);
  ASSERT_TRUE(img.valid());
  EXPECT_EQ(img.pixels.size(), 16u * 12u * 3u);
  for (std::size_t i = 0; i < img.pixels.size(); i += 3) {
    ASSERT_EQ(img.pixels[i], 255);
    ASSERT_EQ(img.pixels[i + 1], 0);
    ASSERT_EQ(img.pixels[i + 2], 0);
  }
}

TEST(CpuRender, FractTimeGrayLevel) {
  // fract(0.5) = 0.5 exactly; 0.5 * 255 = 127.5 rounds to 128
  rd::CpuRenderContext ctx;
  auto handle = ctx.compile(with_raw_preamble(
      "void main(){gl_FragColor=vec4(vec3(fract(time)),1.0);}"));
  ps::Image img = ctx.render(*handle, 0.5, 8, 8);
  for (std::size_t i = 0; i < img.pixels.size(); ++i)
    ASSERT_NEAR(static_cast<int>(img.pixels[i]), 128, 1);
}

TEST(CpuRender, SameHandleSameTimeIsByteIdentical) {
  rd::CpuRenderContext ctx;
  auto handle = ctx.compile(with_raw_preamble(testutil::noise_raw_source()));
  ps::Image a = ctx.render(*handle, 1.25, 32, 32);
  ps::Image b = ctx.render(*handle, 1.25, 32, 32);
  EXPECT_EQ(a.pixels, b.pixels);
}

TEST(CpuRender, TwoCompilesRenderIdentically) {
  rd::CpuRenderContext ctx;
  const std::string glsl = with_raw_preamble(testutil::dynamic_raw_source(3));
  auto h1 = ctx.compile(glsl);
  auto h2 = ctx.compile(glsl);
  EXPECT_EQ(ctx.render(*h1, 0.75, 24, 24).pixels, ctx.render(*h2, 0.75, 24, 24).pixels);
}

TEST(CpuRender, CompileErrorCarriesLog) {
  rd::CpuRenderContext ctx;
  try {
    ctx.compile(with_raw_preamble("void main(){gl_FragColor=vec4(1.0;}"));
    FAIL() << "expected CompileError";
  } catch (const ps::Error& e) {
    EXPECT_EQ(e.code(), ps::Errc::CompileError);
    EXPECT_FALSE(e.message().empty());
  }
}

TEST(CpuRender, FragCoordOriginBottomLeft) {
  // white where gl_FragCoord.y is in the upper half; image row 0 is the top
  rd::CpuRenderContext ctx;
  auto handle = ctx.compile(with_raw_preamble(
      "void main(){gl_FragColor=vec4(vec3(step(resolution.y*0.5,gl_FragCoord.y)),1.0);}"));
  ps::Image img = ctx.render(*handle, 0.0, 4, 8);
  EXPECT_EQ(img.at(0, 0)[0], 255);      // top row
  EXPECT_EQ(img.at(0, 7)[0], 0);        // bottom row
}

TEST(CpuRender, RunawayShaderHitsTimeout) {
  rd::CpuRenderContext ctx;
  ctx.set_frame_timeout(std::chrono::milliseconds(100));
  auto handle = ctx.compile(with_raw_preamble(
      "void main(){float s=0.0;while(s>=0.0){s+=0.0001;}gl_FragColor=vec4(s);}"));
  try {
    ctx.render(*handle, 0.0, 64, 64);
    FAIL() << "expected RenderTimeout";
  } catch (const ps::Error& e) {
    EXPECT_EQ(e.code(), ps::Errc::RenderTimeout);
  }
}

TEST(CpuRender, MultithreadedRenderMatchesSingleThreaded) {
  rd::CpuRenderContext one(1), four(4);
  const std::string glsl = with_raw_preamble(testutil::noise_raw_source());
  auto h1 = one.compile(glsl);
  auto h4 = four.compile(glsl);
  EXPECT_EQ(one.render(*h1, 0.5, 33, 17).pixels, four.render(*h4, 0.5, 33, 17).pixels);
}

// --- GL context -------------------------------------------------------------------

TEST(GlRender, UnavailableContextReportsCleanly) {
  try {
    rd::GlRenderContext ctx;
    GTEST_SKIP() << "EGL stack present on this host; backend " << ctx.info().device;
  } catch (const ps::Error& e) {
    EXPECT_EQ(e.code(), ps::Errc::ContextUnavailable);
    EXPECT_FALSE(e.message().empty());
  }
}

TEST(GlRender, AutoBackendFallsBackToCpu) {
  rd::RenderEngine engine({.backend = rd::Backend::Auto, .workers = 1});
  // whichever backend resolved, rendering must work end to end
  ps::Image img = engine.render_one(with_raw_preamble(testutil::constant_raw_source(0.0, 1.0, 0.0)),
                                    "x", 0.0, 8, 8);
  EXPECT_EQ(img.at(3, 3)[1], 255);
}

// --- engine ------------------------------------------------------------------------

TEST(Engine, RenderBatchMatchesLoopedFrames) {
  rd::RenderEngine engine({.backend = rd::Backend::Cpu, .workers = 4});
  const std::string glsl = with_raw_preamble(testutil::dynamic_raw_source(5));
  auto plan = rd::sample_timesteps(5, 11);
  ps::ImageBatch batch = engine.render_batch(glsl, "s", plan, 20, 20);
  ASSERT_EQ(batch.size(), 5u);
  for (std::size_t k = 0; k < plan.values.size(); ++k) {
    EXPECT_EQ(batch[k].t, plan.values[k]);
    ps::Image single = engine.render_one(glsl, "s", plan.values[k], 20, 20);
    EXPECT_EQ(batch[k].pixels, single.pixels) << "frame " << k;
  }
}

TEST(Engine, EmptyPlanGivesEmptyBatch) {
  rd::RenderEngine engine({.backend = rd::Backend::Cpu, .workers = 2});
  rd::TimestepPlan empty;
  ps::ImageBatch batch =
      engine.render_batch(with_raw_preamble(testutil::constant_raw_source(0, 0, 0)), "s", empty,
                          8, 8);
  EXPECT_TRUE(batch.empty());
}

TEST(Engine, MeasureFpsSanity) {
  rd::RenderEngine engine({.backend = rd::Backend::Cpu, .workers = 1});
  const double fps = engine.measure_fps(
      with_raw_preamble(testutil::constant_raw_source(0.5, 0.5, 0.5)), 10, 64, 64);
  EXPECT_TRUE(std::isfinite(fps));
  EXPECT_GT(fps, 0.0);
  EXPECT_THROW(engine.measure_fps(with_raw_preamble(testutil::constant_raw_source(0, 0, 0)), 0,
                                  8, 8),
               ps::Error);
}

TEST(Engine, CompileErrorsPropagateThroughFutures) {
  rd::RenderEngine engine({.backend = rd::Backend::Cpu, .workers = 2});
  EXPECT_THROW(engine.render_one(with_raw_preamble("void main(){broken"), "x", 0.0, 8, 8),
               ps::Error);
}
