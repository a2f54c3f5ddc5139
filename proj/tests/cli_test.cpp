#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "procshade/core/image.hpp"
#include "procshade/core/jpeg.hpp"
#include "testutil.hpp"

namespace fs = std::filesystem;

namespace {

struct CliResult {
  int exit_code = -1;
  std::string output;  // stdout + stderr
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

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream out(p);
  out << content;
}

// ingest + validate a small corpus; returns the manifest path
fs::path prepare_corpus(const testutil::TempDir& dir, int n_dynamic) {
  const fs::path snip = dir.path / "snippets";
  fs::create_directories(snip);
  for (int i = 0; i < n_dynamic; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "dyn%03d.frag", i);
    write_file(snip / name, testutil::dynamic_raw_source(i));
  }
  const fs::path manifest = dir.path / "corpus" / "corpus.manifest";
  auto r1 = run_cli("ingest --dir " + snip.string() + " --manifest " + manifest.string());
  EXPECT_EQ(r1.exit_code, 0) << r1.output;
  auto r2 = run_cli("validate --manifest " + manifest.string() + " --backend cpu");
  EXPECT_EQ(r2.exit_code, 0) << r2.output;
  return manifest;
}

}  // namespace

TEST(Cli, UnknownSubcommandExits2) {
  auto r = run_cli("frobnicate");
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.output.find("subcommand"), std::string::npos);
}

TEST(Cli, MissingRequiredFlagExits2) {
  auto r = run_cli("validate");
  EXPECT_EQ(r.exit_code, 2);
}

TEST(Cli, ModuleErrorExits1WithParsableLine) {
  testutil::TempDir dir("cli_err");
  const fs::path manifest = prepare_corpus(dir, 2);
  auto r = run_cli("render --manifest " + manifest.string() +
                   " --id nope --frames 4 --out " + (dir.path / "x.raw").string());
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_NE(r.output.find("error: code=NotFound"), std::string::npos);
}

TEST(Cli, PipelineIngestValidateDedup) {
  testutil::TempDir dir("cli_pipe");
  const fs::path snip = dir.path / "snippets";
  fs::create_directories(snip);
  write_file(snip / "a.frag", testutil::dynamic_raw_source(0));
  write_file(snip / "b.frag", testutil::dynamic_raw_source(0));  // duplicate of a
  write_file(snip / "c.frag", testutil::dynamic_raw_source(1));
  write_file(snip / "flat.frag", testutil::static_raw_source(2));
  write_file(snip / "broken.frag", "void main(){");

  const fs::path manifest = dir.path / "c" / "m.manifest";
  auto r1 = run_cli("ingest --dir " + snip.string() + " --manifest " + manifest.string());
  EXPECT_EQ(r1.exit_code, 0) << r1.output;
  auto r2 = run_cli("validate --manifest " + manifest.string());
  EXPECT_EQ(r2.exit_code, 0) << r2.output;
  EXPECT_NE(r2.output.find("4 compiled, 1 rejected"), std::string::npos) << r2.output;
  auto r3 = run_cli("dedup --manifest " + manifest.string() + " --resolution 48 --seed 5");
  EXPECT_EQ(r3.exit_code, 0) << r3.output;
  EXPECT_TRUE(fs::exists(dir.path / "c" / "dedup_report.json"));

  nlohmann::json report = nlohmann::json::parse(slurp(dir.path / "c" / "dedup_report.json"));
  EXPECT_EQ(report["duplicates_pass"]["duplicates"], 1);
  EXPECT_EQ(report["static_pass"]["static"], 1);
  EXPECT_EQ(report["static_pass"]["kept"], 2);
}

TEST(Cli, RenderWritesRawDump) {
  testutil::TempDir dir("cli_render");
  const fs::path manifest = prepare_corpus(dir, 2);
  const fs::path out = dir.path / "frames.raw";
  auto r = run_cli("render --manifest " + manifest.string() +
                   " --id dyn000 --frames 3 --resolution 32 --out " + out.string());
  EXPECT_EQ(r.exit_code, 0) << r.output;
  auto frames = procshade::read_raw_dump(out);
  ASSERT_EQ(frames.size(), 3u);
  EXPECT_EQ(frames[0].width, 32);
  EXPECT_EQ(frames[0].pixels.size(), 32u * 32u * 3u);
}

TEST(Cli, MixRerunsAreByteIdentical) {
  testutil::TempDir dir("cli_mix");
  const fs::path manifest = prepare_corpus(dir, 8);
  const std::string common = "mix --manifest " + manifest.string() +
                             " --count 6 --n 3 --resolution 24 --seed 7 --out ";
  auto r1 = run_cli(common + (dir.path / "a").string());
  auto r2 = run_cli(common + (dir.path / "b").string());
  EXPECT_EQ(r1.exit_code, 0) << r1.output;
  EXPECT_EQ(r2.exit_code, 0) << r2.output;
  EXPECT_EQ(slurp(dir.path / "a" / "provenance.manifest"),
            slurp(dir.path / "b" / "provenance.manifest"));
  EXPECT_EQ(slurp(dir.path / "a" / "images" / "0000003.jpg"),
            slurp(dir.path / "b" / "images" / "0000003.jpg"));
}

TEST(Cli, RunConfigEchoWrittenNextToOutputs) {
  testutil::TempDir dir("cli_cfg");
  const fs::path manifest = prepare_corpus(dir, 2);
  EXPECT_TRUE(fs::exists(dir.path / "corpus" / "run_config.ingest.json"));
  EXPECT_TRUE(fs::exists(dir.path / "corpus" / "run_config.validate.json"));
  nlohmann::json cfg =
      nlohmann::json::parse(slurp(dir.path / "corpus" / "run_config.validate.json"));
  EXPECT_EQ(cfg["subcommand"], "validate");
  EXPECT_TRUE(cfg.contains("seed"));
  EXPECT_TRUE(cfg.contains("backend_resolved"));
}

TEST(Cli, StatsDryRunEchoesDefaults) {
  testutil::TempDir dir("cli_dry");
  const fs::path manifest = prepare_corpus(dir, 1);
  auto r = run_cli("stats --manifest " + manifest.string() + " --dry-run");
  EXPECT_EQ(r.exit_code, 0) << r.output;
  nlohmann::json cfg = nlohmann::json::parse(slurp(dir.path / "corpus" / "run_config.stats.json"));
  EXPECT_EQ(cfg["samples"], 400);
  EXPECT_EQ(cfg["resolution"][0], 384);
  EXPECT_EQ(cfg["resolution"][1], 384);
}

TEST(Cli, MixDefaultSettings) {
  testutil::TempDir dir("cli_mixdef");
  const fs::path manifest = prepare_corpus(dir, 1);
  auto r = run_cli("mix --manifest " + manifest.string() + " --count 1 --out " +
                   (dir.path / "d").string() + " --dry-run");
  EXPECT_EQ(r.exit_code, 0) << r.output;
  nlohmann::json cfg = nlohmann::json::parse(slurp(dir.path / "d" / "run_config.mix.json"));
  EXPECT_EQ(cfg["mode"], "mixup");
  EXPECT_EQ(cfg["n"], 6);
  EXPECT_DOUBLE_EQ(cfg["alpha"].get<double>(), 1.0);
  EXPECT_EQ(cfg["resolution"][0], 384);
}

TEST(Cli, SelectFromJsonAndCsv) {
  testutil::TempDir dir("cli_select");
  write_file(dir.path / "scores.json", R"({"a": 0.3, "b": 0.2, "c": 0.9})");
  auto r = run_cli("select --scores " + (dir.path / "scores.json").string() + " --k 2");
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_EQ(r.output, "c\na\n");

  write_file(dir.path / "scores.csv", "id,score\nx,1.5\ny,2.5\nz,0.5\n");
  auto r2 = run_cli("select --scores " + (dir.path / "scores.csv").string() + " --k 3 --out " +
                    (dir.path / "picked.txt").string());
  EXPECT_EQ(r2.exit_code, 0) << r2.output;
  EXPECT_EQ(slurp(dir.path / "picked.txt"), "y\nx\nz\n");

  auto r3 = run_cli("select --scores " + (dir.path / "scores.json").string() + " --k 9");
  EXPECT_EQ(r3.exit_code, 1);
  EXPECT_NE(r3.output.find("code=KTooLarge"), std::string::npos);
}

TEST(Cli, PreviewWritesGrid) {
  testutil::TempDir dir("cli_prev");
  const fs::path manifest = prepare_corpus(dir, 3);
  const fs::path out = dir.path / "grid.jpg";
  auto r = run_cli("preview --manifest " + manifest.string() +
                   " --rows 2 --cols 3 --resolution 16 --out " + out.string());
  EXPECT_EQ(r.exit_code, 0) << r.output;
  const std::string jpg = slurp(out);
  ASSERT_GT(jpg.size(), 4u);
  EXPECT_EQ(static_cast<unsigned char>(jpg[0]), 0xFF);
  EXPECT_EQ(static_cast<unsigned char>(jpg[1]), 0xD8);
  auto img = procshade::decode_jpeg(std::span<const std::uint8_t>(
      reinterpret_cast<const std::uint8_t*>(jpg.data()), jpg.size()));
  EXPECT_EQ(img.width, 3 * 16);
  EXPECT_EQ(img.height, 2 * 16);
}

TEST(Cli, VersionFlagPrintsVersion) {
  auto r = run_cli("--version");
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_NE(r.output.find("0.1.0"), std::string::npos);
}
