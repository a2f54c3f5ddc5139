#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "procshade/core/error.hpp"
#include "procshade/core/hash.hpp"
#include "procshade/corpus/dialect.hpp"
#include "procshade/corpus/manifest.hpp"

namespace procshade::corpus {

inline bool valid_record_id(const std::string& id) {
  if (id.empty() || id.size() > 128) return false;
  for (char c : id) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '.' || c == '_' || c == '-';
    if (!ok) return false;
  }
  return id != "." && id != "..";
}

// Records the snippet and normalizes it immediately (transpilation is pure).
// Snippets the adapter rejects (external inputs, missing entry point) are
// stored as rejected instead of failing the whole ingest run; source bytes
// are kept untouched either way.
inline ProgramRecord& ingest_snippet(CorpusManifest& manifest, std::string source,
                                     Dialect dialect, const std::string& id) {
  if (source.empty()) raise(Errc::EmptySource, "snippet '" + id + "' is empty");
  if (!valid_record_id(id))
    raise(Errc::InvalidArgument,
          "id '" + id + "' must match [A-Za-z0-9._-]{1,128} (it names the shader file)");
  if (manifest.has(id)) raise(Errc::DuplicateId, "id '" + id + "' already ingested");

  ProgramRecord rec;
  rec.id = id;
  rec.dialect = dialect;
  rec.char_count = source.size();
  rec.source_hash = sha256_hex(source);
  rec.source = std::move(source);
  rec.status = Status::Pending;
  try {
    rec.glsl = normalize(rec.source, dialect);
  } catch (const Error& e) {
    if (e.code() != Errc::RequiresExternalInput && e.code() != Errc::MissingEntryPoint) throw;
    rec.status = Status::Rejected;
    rec.reject_reason = std::string(errc_name(e.code())) + ": " + e.message();
  }
  return manifest.add(std::move(rec));
}

inline std::optional<Dialect> dialect_from_extension(const std::filesystem::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (ext == ".twigl") return Dialect::Twigl;
  if (ext == ".shadertoy" || ext == ".st") return Dialect::Shadertoy;
  if (ext == ".frag" || ext == ".glsl") return Dialect::RawGlsl;
  return std::nullopt;
}

struct IngestReport {
  std::size_t ingested = 0;
  std::size_t rejected_at_ingest = 0;  // adapter rejections recorded in the manifest
  std::vector<std::string> skipped;    // files with no recognized extension
};

// Ingests every recognized snippet file in `dir`, in lexicographic order so
// the resulting manifest order is reproducible. `forced` overrides the
// per-file extension rule.
inline IngestReport ingest_directory(CorpusManifest& manifest, const std::filesystem::path& dir,
                                     std::optional<Dialect> forced = std::nullopt) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) raise(Errc::IoError, dir.string() + " is not a directory");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file()) files.push_back(entry.path());
  std::sort(files.begin(), files.end());

  IngestReport report;
  for (const fs::path& p : files) {
    std::optional<Dialect> dialect = forced ? forced : dialect_from_extension(p);
    if (!dialect) {
      report.skipped.push_back(p.filename().string());
      continue;
    }
    std::ifstream in(p, std::ios::binary);
    if (!in) raise(Errc::IoError, "cannot read " + p.string());
    std::string source(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>{});
    std::string id = p.stem().string();
    ProgramRecord& rec = ingest_snippet(manifest, std::move(source), *dialect, id);
    ++report.ingested;
    if (rec.status == Status::Rejected) ++report.rejected_at_ingest;
  }
  return report;
}

}  // namespace procshade::corpus
