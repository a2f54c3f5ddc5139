#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <string>
#include <deque>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "procshade/core/error.hpp"
#include "procshade/core/hash.hpp"
#include "procshade/corpus/record.hpp"
#include "procshade/version.hpp"

namespace procshade::corpus {

// Persistent corpus index. On disk: a header line followed by one JSON record
// per line (append- and diff-friendly); normalized GLSL lives in sibling
// `frags/<id>.frag` files. Concurrency contract: any number of readers, one
// writer; the pipeline steps are the writers.
class CorpusManifest {
 public:
  static constexpr const char* kFormat = "procshade-manifest";
  static constexpr int kFormatVersion = 1;
  static constexpr const char* kGlslDirName = "frags";

  CorpusManifest() {
    meta_["format"] = kFormat;
    meta_["format_version"] = kFormatVersion;
    meta_["hash_algorithm"] = kHashAlgorithm;
    meta_["glsl_dir"] = kGlslDirName;
    meta_["tool_version"] = kVersion;
    meta_["settings"] = nlohmann::ordered_json::object();
  }

  // --- record access ---------------------------------------------------------

  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }

  bool has(const std::string& id) const { return index_.count(id) > 0; }

  ProgramRecord& add(ProgramRecord rec) {
    if (rec.id.empty()) raise(Errc::InvalidArgument, "record id must not be empty");
    if (has(rec.id)) raise(Errc::DuplicateId, "id '" + rec.id + "' already in manifest");
    records_.push_back(std::move(rec));
    index_[records_.back().id] = records_.size() - 1;
    return records_.back();
  }

  ProgramRecord& at(const std::string& id) {
    auto it = index_.find(id);
    if (it == index_.end()) raise(Errc::NotFound, "no record with id '" + id + "'");
    return records_[it->second];
  }
  const ProgramRecord& at(const std::string& id) const {
    return const_cast<CorpusManifest*>(this)->at(id);
  }

  std::deque<ProgramRecord>& records() { return records_; }
  const std::deque<ProgramRecord>& records() const { return records_; }

  // Compiled, unique, non-static records sorted by id: the sampling pool for
  // dataset building and serving. Sorted order makes runs independent of
  // manifest insertion order.
  std::vector<const ProgramRecord*> unique_pool() const {
    std::vector<const ProgramRecord*> pool;
    for (const ProgramRecord& r : records_)
      if (r.usable()) pool.push_back(&r);
    std::sort(pool.begin(), pool.end(),
              [](const ProgramRecord* a, const ProgramRecord* b) { return a->id < b->id; });
    return pool;
  }

  nlohmann::ordered_json& settings() { return meta_["settings"]; }
  const nlohmann::ordered_json& meta() const { return meta_; }

  struct Counts {
    std::size_t total = 0, pending = 0, compiled = 0, rejected = 0;
    std::size_t unique = 0, duplicates = 0, statics = 0;
  };
  Counts counts() const {
    Counts c;
    c.total = records_.size();
    for (const ProgramRecord& r : records_) {
      switch (r.status) {
        case Status::Pending: ++c.pending; break;
        case Status::Compiled: ++c.compiled; break;
        case Status::Rejected: ++c.rejected; break;
      }
      if (r.status == Status::Compiled) {
        switch (r.dedup) {
          case DedupState::Unique: ++c.unique; break;
          case DedupState::Duplicate: ++c.duplicates; break;
          case DedupState::Static: ++c.statics; break;
        }
      }
    }
    return c;
  }

  // --- persistence ------------------------------------------------------------

  void save(const std::filesystem::path& path) const {
    namespace fs = std::filesystem;
    const fs::path dir = path.parent_path().empty() ? fs::path(".") : path.parent_path();
    const fs::path frag_dir = dir / kGlslDirName;
    std::error_code ec;
    fs::create_directories(frag_dir, ec);
    if (ec) raise(Errc::IoError, "cannot create " + frag_dir.string() + ": " + ec.message());

    std::ofstream out(path, std::ios::trunc);
    if (!out) raise(Errc::IoError, "cannot write " + path.string());
    out << meta_.dump() << "\n";
    for (const ProgramRecord& r : records_) {
      out << record_to_json(r).dump() << "\n";
      if (!r.glsl.empty()) {
        std::ofstream frag(frag_dir / (r.id + ".frag"), std::ios::trunc);
        if (!frag) raise(Errc::IoError, "cannot write shader file for '" + r.id + "'");
        frag << r.glsl;
      }
    }
    if (!out) raise(Errc::IoError, "short write to " + path.string());
  }

  static CorpusManifest load(const std::filesystem::path& path) {
    namespace fs = std::filesystem;
    std::ifstream in(path);
    if (!in) raise(Errc::IoError, "cannot open manifest " + path.string());
    const fs::path dir = path.parent_path().empty() ? fs::path(".") : path.parent_path();

    CorpusManifest m;
    std::string line;
    if (!std::getline(in, line)) raise(Errc::IoError, "empty manifest " + path.string());
    nlohmann::ordered_json header;
    try {
      header = nlohmann::ordered_json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      raise(Errc::IoError, std::string("bad manifest header: ") + e.what());
    }
    if (header.value("format", "") != kFormat)
      raise(Errc::IoError, "not a procshade manifest: " + path.string());
    m.meta_ = header;
    if (!m.meta_.contains("settings")) m.meta_["settings"] = nlohmann::ordered_json::object();

    const fs::path frag_dir = dir / header.value("glsl_dir", std::string(kGlslDirName));
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(line);
      } catch (const nlohmann::json::exception& e) {
        raise(Errc::IoError,
              "bad manifest record at line " + std::to_string(line_no) + ": " + e.what());
      }
      ProgramRecord r = record_from_json(j);
      const fs::path frag_path = frag_dir / (r.id + ".frag");
      if (fs::exists(frag_path)) {
        std::ifstream frag(frag_path);
        r.glsl.assign(std::istreambuf_iterator<char>(frag), std::istreambuf_iterator<char>());
      }
      m.add(std::move(r));
    }
    return m;
  }

  // Documented field order for the line format.
  static nlohmann::ordered_json record_to_json(const ProgramRecord& r) {
    nlohmann::ordered_json j;
    j["id"] = r.id;
    j["dialect"] = dialect_name(r.dialect);
    j["status"] = status_name(r.status);
    j["reject_reason"] = r.reject_reason;
    j["source_hash"] = r.source_hash;
    j["char_count"] = r.char_count;
    j["dedup"] = dedup_state_name(r.dedup);
    j["duplicate_of"] = r.duplicate_of;
    j["source"] = r.source;
    if (r.stats) j["stats"] = r.stats->to_json();
    return j;
  }

  static ProgramRecord record_from_json(const nlohmann::json& j) {
    ProgramRecord r;
    r.id = j.value("id", "");
    r.dialect = parse_dialect(j.value("dialect", "raw-glsl"));
    const std::string status = j.value("status", "pending");
    r.status = status == "compiled" ? Status::Compiled
               : status == "rejected" ? Status::Rejected
                                      : Status::Pending;
    r.reject_reason = j.value("reject_reason", "");
    r.source_hash = j.value("source_hash", "");
    r.char_count = j.value("char_count", std::size_t{0});
    const std::string dd = j.value("dedup", "unique");
    r.dedup = dd == "duplicate" ? DedupState::Duplicate
              : dd == "static" ? DedupState::Static
                               : DedupState::Unique;
    r.duplicate_of = j.value("duplicate_of", "");
    r.source = j.value("source", "");
    if (j.contains("stats")) r.stats = metrics::StatsRecord::from_json(j["stats"]);
    return r;
  }

 private:
  std::deque<ProgramRecord> records_;  // deque: stable references across add()
  std::unordered_map<std::string, std::size_t> index_;
  nlohmann::ordered_json meta_;
};

}  // namespace procshade::corpus
