#pragma once

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "newsdesk/error.hpp"
#include "newsdesk/html.hpp"
#include "newsdesk/text.hpp"
#include "newsdesk/url.hpp"

namespace newsdesk {

namespace fs = std::filesystem;
using UtcTime = std::chrono::sys_seconds;

struct LinkRecord {
  std::string url;
  std::string text;

  friend bool operator==(const LinkRecord&, const LinkRecord&) = default;
};

struct Snapshot {
  std::string snapshot_id;
  std::string outlet_id;
  UtcTime captured_at;
  std::string html;  // raw bytes of page.html
  std::vector<LinkRecord> links;
  std::optional<fs::path> geometry;  // geometry.json inside the bundle, when present
  std::optional<std::string> base_url;  // meta.json base_url, else the page's <base href>
  fs::path bundle_dir;

  friend bool operator==(const Snapshot&, const Snapshot&) = default;
};

enum class Severity { kWarning, kFatal };

struct ValidationIssue {
  Severity severity;
  std::string code;
  std::string message;
};

struct ValidationReport {
  bool ok = true;
  std::vector<ValidationIssue> issues;

  void add(Severity severity, std::string code, std::string message) {
    if (severity == Severity::kFatal) ok = false;
    issues.push_back({severity, std::move(code), std::move(message)});
  }
};

// Closed interval; an absent bound is unbounded.
struct TimeRange {
  std::optional<UtcTime> begin;
  std::optional<UtcTime> end;

  bool contains(UtcTime t) const { return (!begin || t >= *begin) && (!end || t <= *end); }
};

// Parses "YYYY-MM-DDTHH:MM:SS" followed by "Z" or "+00:00". Fractional
// seconds are accepted and truncated.
inline std::optional<UtcTime> parse_utc(std::string_view s) {
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, sec = 0;
  int consumed = 0;
  const std::string buf(s);
  if (std::sscanf(buf.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d%n", &y, &mo, &d, &h, &mi, &sec, &consumed) != 6 ||
      consumed != 19) {
    return std::nullopt;
  }
  std::string_view rest = s.substr(19);
  if (!rest.empty() && rest[0] == '.') {
    std::size_t k = 1;
    while (k < rest.size() && rest[k] >= '0' && rest[k] <= '9') ++k;
    if (k == 1) return std::nullopt;
    rest.remove_prefix(k);
  }
  if (rest != "Z" && rest != "+00:00") return std::nullopt;
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(mo)},
                                        std::chrono::day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || sec > 60) return std::nullopt;
  return std::chrono::sys_days{ymd} + std::chrono::hours{h} + std::chrono::minutes{mi} +
         std::chrono::seconds{sec};
}

inline std::string format_utc(UtcTime t, bool basic) {
  const auto days = std::chrono::floor<std::chrono::days>(t);
  const std::chrono::year_month_day ymd{days};
  const std::chrono::hh_mm_ss hms{t - days};
  char buf[32];
  std::snprintf(buf, sizeof buf, basic ? "%04d%02u%02uT%02d%02d%02dZ" : "%04d-%02u-%02uT%02d:%02d:%02dZ",
                static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()), static_cast<int>(hms.hours().count()),
                static_cast<int>(hms.minutes().count()), static_cast<int>(hms.seconds().count()));
  return buf;
}

inline std::string make_snapshot_id(std::string_view outlet_id, UtcTime captured_at) {
  return std::string(outlet_id) + "_" + format_utc(captured_at, /*basic=*/true);
}

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kMissingFile, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const fs::path& path, std::string_view contents) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoFailure, "cannot write " + path.string());
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error(ErrorCode::kIoFailure, "short write to " + path.string());
}

// Canonical links.json: sorted by (url, text), one object per record.
inline std::string serialize_links(std::vector<LinkRecord> links) {
  std::sort(links.begin(), links.end(),
            [](const LinkRecord& a, const LinkRecord& b) { return std::tie(a.url, a.text) < std::tie(b.url, b.text); });
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& l : links) arr.push_back({{"url", l.url}, {"text", l.text}});
  return arr.dump(2) + "\n";
}

namespace detail {

struct MetaFields {
  std::string outlet_id;
  UtcTime captured_at;
  std::optional<std::string> base_url;
};

inline MetaFields parse_meta(const std::string& raw) {
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(raw);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kMalformedMeta, std::string("meta.json is not valid JSON: ") + e.what());
  }
  if (!meta.is_object()) throw Error(ErrorCode::kMalformedMeta, "meta.json must be an object");
  const auto outlet = meta.find("outlet_id");
  const auto captured = meta.find("captured_at");
  if (outlet == meta.end() || !outlet->is_string() || outlet->get<std::string>().empty()) {
    throw Error(ErrorCode::kMalformedMeta, "meta.json lacks a non-empty string outlet_id");
  }
  if (captured == meta.end() || !captured->is_string()) {
    throw Error(ErrorCode::kMalformedMeta, "meta.json lacks a string captured_at");
  }
  const auto when = parse_utc(captured->get<std::string>());
  if (!when) throw Error(ErrorCode::kMalformedMeta, "captured_at is not an ISO-8601 UTC timestamp");
  MetaFields out{outlet->get<std::string>(), *when, std::nullopt};
  const std::string& slug = out.outlet_id;
  if (slug.find_first_of("\t\n\r/\\ ") != std::string::npos) {
    throw Error(ErrorCode::kMalformedMeta, "outlet_id must be a slug");
  }
  if (const auto base = meta.find("base_url"); base != meta.end()) {
    if (!base->is_string() || !url::is_absolute(base->get<std::string>())) {
      throw Error(ErrorCode::kMalformedMeta, "base_url must be an absolute URL string");
    }
    out.base_url = base->get<std::string>();
  }
  return out;
}

inline std::vector<LinkRecord> parse_links(const std::string& raw) {
  nlohmann::json links;
  try {
    links = nlohmann::json::parse(raw);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kMalformedLinks, std::string("links.json is not valid JSON: ") + e.what());
  }
  if (!links.is_array()) throw Error(ErrorCode::kMalformedLinks, "links.json must be an array");
  std::vector<LinkRecord> out;
  out.reserve(links.size());
  for (const auto& item : links) {
    if (!item.is_object() || item.size() != 2 || !item.contains("url") || !item.contains("text") ||
        !item["url"].is_string() || !item["text"].is_string()) {
      throw Error(ErrorCode::kMalformedLinks, "links.json entries must be objects with exactly url and text");
    }
    out.push_back({item["url"].get<std::string>(), item["text"].get<std::string>()});
  }
  return out;
}

// <base href> from the page, if any.
inline std::optional<std::string> document_base(const html::DomNode& dom) {
  std::optional<std::string> found;
  html::walk(dom, [&](const html::DomNode& node, const html::NodePath&) {
    if (!found && node.tag == "base") {
      if (const auto* href = node.attr("href"); href != nullptr && url::is_absolute(*href)) found = *href;
    }
  });
  return found;
}

inline std::optional<std::string> page_base(const MetaFields& meta, const std::string& page) {
  if (meta.base_url) return meta.base_url;
  return document_base(html::parse_html(page));
}

inline void resolve_links(std::vector<LinkRecord>& links, const std::optional<std::string>& base) {
  for (auto& link : links) {
    if (url::is_absolute(link.url)) continue;
    if (!base) {
      throw Error(ErrorCode::kMalformedLinks, "relative link '" + link.url + "' and no page base");
    }
    link.url = url::resolve(*base, link.url);
  }
}

}  // namespace detail

// Structural checks on a bundle. Reports defects; never throws on content.
inline ValidationReport validate_bundle(const fs::path& bundle_dir) {
  ValidationReport report;
  if (!fs::is_directory(bundle_dir)) {
    report.add(Severity::kFatal, "MISSING_BUNDLE", bundle_dir.string() + " is not a directory");
    return report;
  }
  const auto page_path = bundle_dir / "page.html";
  const auto links_path = bundle_dir / "links.json";
  const auto meta_path = bundle_dir / "meta.json";

  std::optional<std::string> page;
  std::optional<detail::MetaFields> meta;
  if (!fs::is_regular_file(page_path)) {
    report.add(Severity::kFatal, "MISSING_PAGE", "page.html is absent");
  } else {
    page = read_file(page_path);
    bool bad_utf8 = false;
    text::decode_utf8_lossy(*page, &bad_utf8);
    if (bad_utf8) report.add(Severity::kWarning, "INVALID_UTF8", "page.html contains invalid UTF-8; replaced");
    if (html::count_elements(html::parse_html(*page)) == 0) {
      report.add(Severity::kFatal, "UNPARSEABLE_HTML", "page.html parses to zero elements");
    }
  }
  if (!fs::is_regular_file(meta_path)) {
    report.add(Severity::kFatal, "MISSING_META", "meta.json is absent");
  } else {
    try {
      meta = detail::parse_meta(read_file(meta_path));
    } catch (const Error& e) {
      report.add(Severity::kFatal, "MALFORMED_META", e.what());
    }
  }
  if (!fs::is_regular_file(links_path)) {
    report.add(Severity::kFatal, "MISSING_LINKS", "links.json is absent");
  } else {
    try {
      auto links = detail::parse_links(read_file(links_path));
      if (links.empty()) {
        report.add(Severity::kFatal, "EMPTY_LINKS", "links.json lists no links");
      } else if (meta && page) {
        detail::resolve_links(links, detail::page_base(*meta, *page));
      }
    } catch (const Error& e) {
      report.add(Severity::kFatal, "MALFORMED_LINKS", e.what());
    }
  }
  const auto geometry_path = bundle_dir / "geometry.json";
  if (fs::exists(geometry_path)) {
    try {
      const auto g = nlohmann::json::parse(read_file(geometry_path));
      if (!g.is_object() || !g.contains("boxes")) {
        report.add(Severity::kFatal, "MALFORMED_GEOMETRY", "geometry.json lacks boxes");
      }
    } catch (const nlohmann::json::exception& e) {
      report.add(Severity::kFatal, "MALFORMED_GEOMETRY", e.what());
    }
  }
  return report;
}

// Reads one bundle into a Snapshot without touching any store.
inline Snapshot load_bundle(const fs::path& bundle_dir) {
  for (const char* name : {"page.html", "links.json", "meta.json"}) {
    if (!fs::is_regular_file(bundle_dir / name)) {
      throw Error(ErrorCode::kMissingFile, (bundle_dir / name).string() + " is missing");
    }
  }
  Snapshot snap;
  snap.html = read_file(bundle_dir / "page.html");
  const auto meta = detail::parse_meta(read_file(bundle_dir / "meta.json"));
  snap.links = detail::parse_links(read_file(bundle_dir / "links.json"));
  snap.base_url = detail::page_base(meta, snap.html);
  detail::resolve_links(snap.links, snap.base_url);
  snap.outlet_id = meta.outlet_id;
  snap.captured_at = meta.captured_at;
  snap.snapshot_id = make_snapshot_id(meta.outlet_id, meta.captured_at);
  snap.bundle_dir = fs::weakly_canonical(bundle_dir);
  if (fs::is_regular_file(bundle_dir / "geometry.json")) snap.geometry = snap.bundle_dir / "geometry.json";
  return snap;
}

struct ManifestEntry {
  std::string snapshot_id;
  std::string outlet_id;
  UtcTime captured_at;
  std::string bundle_path;  // relative to the store directory
};

// Append-only store index over bundle directories. Reads are safe from
// many threads; appends are serialized inside one process.
class SnapshotStore {
 public:
  explicit SnapshotStore(fs::path dir) : dir_(std::move(dir)) {
    fs::create_directories(dir_);
    load_manifest();
  }

  const fs::path& dir() const { return dir_; }
  fs::path manifest_path() const { return dir_ / "manifest.tsv"; }

  Snapshot ingest_snapshot(const fs::path& bundle_dir) {
    Snapshot snap = load_bundle(bundle_dir);
    if (snap.links.empty()) throw Error(ErrorCode::kMalformedLinks, "links.json lists no links");
    std::lock_guard lock(mu_);
    const auto existing = std::find_if(entries_.begin(), entries_.end(),
                                       [&](const ManifestEntry& e) { return e.snapshot_id == snap.snapshot_id; });
    if (existing == entries_.end()) {
      ManifestEntry entry{snap.snapshot_id, snap.outlet_id, snap.captured_at,
                          fs::relative(snap.bundle_dir, fs::weakly_canonical(dir_)).generic_string()};
      std::ofstream out(manifest_path(), std::ios::app | std::ios::binary);
      if (!out) throw Error(ErrorCode::kIoFailure, "cannot append to " + manifest_path().string());
      out << entry.snapshot_id << '\t' << entry.outlet_id << '\t' << format_utc(entry.captured_at, false) << '\t'
          << entry.bundle_path << '\n';
      entries_.push_back(std::move(entry));
    }
    return snap;
  }

  std::vector<std::string> list_snapshots(const std::optional<std::string>& outlet_filter = std::nullopt,
                                          const std::optional<TimeRange>& time_range = std::nullopt) const {
    std::vector<const ManifestEntry*> hits;
    {
      std::lock_guard lock(mu_);
      for (const auto& e : entries_) {
        if (outlet_filter && e.outlet_id != *outlet_filter) continue;
        if (time_range && !time_range->contains(e.captured_at)) continue;
        hits.push_back(&e);
      }
    }
    std::sort(hits.begin(), hits.end(), [](const ManifestEntry* a, const ManifestEntry* b) {
      return std::tie(a->outlet_id, a->captured_at, a->snapshot_id) <
             std::tie(b->outlet_id, b->captured_at, b->snapshot_id);
    });
    std::vector<std::string> ids;
    ids.reserve(hits.size());
    for (const auto* e : hits) ids.push_back(e->snapshot_id);
    return ids;
  }

  const ManifestEntry& entry(std::string_view snapshot_id) const {
    std::lock_guard lock(mu_);
    for (const auto& e : entries_) {
      if (e.snapshot_id == snapshot_id) return e;
    }
    throw Error(ErrorCode::kUnknownSnapshot, "no snapshot " + std::string(snapshot_id) + " in store");
  }

  Snapshot load(std::string_view snapshot_id) const {
    return load_bundle(dir_ / entry(snapshot_id).bundle_path);
  }

 private:
  void load_manifest() {
    if (!fs::exists(manifest_path())) return;
    std::ifstream in(manifest_path(), std::ios::binary);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      std::vector<std::string> cols;
      std::size_t start = 0;
      for (std::size_t tab; (tab = line.find('\t', start)) != std::string::npos; start = tab + 1) {
        cols.push_back(line.substr(start, tab - start));
      }
      cols.push_back(line.substr(start));
      const auto when = cols.size() == 4 ? parse_utc(cols[2]) : std::nullopt;
      if (!when) {
        throw Error(ErrorCode::kIoFailure,
                    "manifest line " + std::to_string(lineno) + " is malformed in " + manifest_path().string());
      }
      entries_.push_back({cols[0], cols[1], *when, cols[3]});
    }
  }

  fs::path dir_;
  mutable std::mutex mu_;
  std::vector<ManifestEntry> entries_;
};

}  // namespace newsdesk
