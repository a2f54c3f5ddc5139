#pragma once

#include <future>
#include <string>
#include <vector>

#include "procshade/core/error.hpp"
#include "procshade/corpus/manifest.hpp"
#include "procshade/render/engine.hpp"

namespace procshade::corpus {

struct CompileReport {
  std::string id;
  bool ok = false;
  std::string log;  // driver log, verbatim, on failure
};

// Compile filtering for one record: pending -> compiled | rejected(log).
// Only `status` and `reject_reason` change; `source` and `glsl` do not.
inline CompileReport validate_record(render::RenderContext& ctx, ProgramRecord& rec) {
  CompileReport report;
  report.id = rec.id;
  if (rec.status == Status::Rejected) {
    report.ok = false;
    report.log = rec.reject_reason;
    return report;
  }
  if (rec.status == Status::Compiled) {
    report.ok = true;
    return report;
  }
  if (rec.glsl.empty()) {
    rec.status = Status::Rejected;
    rec.reject_reason = "no normalized glsl";
    report.log = rec.reject_reason;
    return report;
  }
  try {
    (void)ctx.compile(rec.glsl);
    rec.status = Status::Compiled;
    report.ok = true;
  } catch (const Error& e) {
    if (e.code() == Errc::ContextUnavailable) throw;
    rec.status = Status::Rejected;
    rec.reject_reason = "compile_error: " + e.message();
    report.log = e.message();
  }
  return report;
}

struct ValidateSummary {
  std::size_t compiled = 0;
  std::size_t rejected = 0;
  std::size_t already_done = 0;
};

// Compiles every pending record. Compilation fans out over the worker pool;
// the manifest mutation happens on this thread once results are in.
inline ValidateSummary validate_all(render::RenderEngine& engine, CorpusManifest& manifest) {
  ValidateSummary summary;
  struct Item {
    std::size_t index;
    std::future<std::pair<bool, std::string>> fut;
  };
  std::vector<Item> items;
  auto& records = manifest.records();
  for (std::size_t i = 0; i < records.size(); ++i) {
    ProgramRecord& rec = records[i];
    if (rec.status != Status::Pending) {
      ++summary.already_done;
      continue;
    }
    if (rec.glsl.empty()) {
      rec.status = Status::Rejected;
      rec.reject_reason = "no normalized glsl";
      ++summary.rejected;
      continue;
    }
    const std::string glsl = rec.glsl;
    items.push_back(
        {i, engine.submit([glsl](render::RenderEngine::Worker& w) -> std::pair<bool, std::string> {
           try {
             (void)w.program(glsl);
             return {true, ""};
           } catch (const Error& e) {
             if (e.code() == Errc::ContextUnavailable) throw;
             return {false, e.message()};
           }
         })});
  }

  for (Item& item : items) {
    auto [ok, log] = item.fut.get();
    ProgramRecord& rec = records[item.index];
    if (ok) {
      rec.status = Status::Compiled;
      ++summary.compiled;
    } else {
      rec.status = Status::Rejected;
      rec.reject_reason = "compile_error: " + log;
      ++summary.rejected;
    }
  }
  return summary;
}

}  // namespace procshade::corpus
