#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <regex>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "newsdesk/error.hpp"
#include "newsdesk/geometry.hpp"
#include "newsdesk/layout.hpp"
#include "newsdesk/text.hpp"

namespace newsdesk {

enum class Criterion { kSize, kPosition, kCombined };

constexpr std::string_view to_string(Criterion c) {
  switch (c) {
    case Criterion::kSize: return "size";
    case Criterion::kPosition: return "position";
    case Criterion::kCombined: return "combined";
  }
  return "size";
}

inline std::optional<Criterion> parse_criterion(std::string_view s) {
  if (s == "size") return Criterion::kSize;
  if (s == "position") return Criterion::kPosition;
  if (s == "combined") return Criterion::kCombined;
  return std::nullopt;
}

struct PreferencePair {
  std::string text_a;
  std::string text_b;
  int label = 0;  // 1: a is preferred over b
  Criterion criterion = Criterion::kSize;
  std::string outlet_id;
  std::string snapshot_id;
  // Card indices within the snapshot; in-memory only, not serialized.
  std::size_t card_a = 0;
  std::size_t card_b = 0;
};

inline constexpr double kDefaultAdjacencyGap = 50;

// Index pairs (i < j) whose rects, grown by `gap` on every side, intersect.
inline std::vector<std::pair<std::size_t, std::size_t>> adjacency_graph(const std::vector<Rect>& rects,
                                                                        double gap = kDefaultAdjacencyGap) {
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t i = 0; i < rects.size(); ++i) {
    const Rect a = expand(rects[i], gap);
    for (std::size_t j = i + 1; j < rects.size(); ++j) {
      if (touches(a, expand(rects[j], gap))) edges.emplace_back(i, j);
    }
  }
  return edges;
}

namespace detail {

inline constexpr char kSeparator = '\x1f';

inline const std::vector<std::regex>& date_time_patterns() {
  static const std::vector<std::regex> patterns = [] {
    const auto flags = std::regex::ECMAScript | std::regex::icase | std::regex::optimize;
    const std::string month =
        "(?:jan(?:uary)?|feb(?:ruary)?|mar(?:ch)?|apr(?:il)?|may|june?|july?|aug(?:ust)?|"
        "sep(?:t(?:ember)?)?|oct(?:ober)?|nov(?:ember)?|dec(?:ember)?)";
    const std::string weekday = "(?:(?:mon|tues|wednes|thurs|fri|satur|sun)day,?\\s+)?";
    const std::string tz = "(?:\\s*(?:ET|EST|EDT|CT|CST|CDT|MT|MST|MDT|PT|PST|PDT|GMT|UTC|BST)\\b)?";
    std::vector<std::regex> out;
    // ISO dates, optionally with a time part.
    out.emplace_back("\\b\\d{4}-\\d{2}-\\d{2}(?:[T ]\\d{2}:\\d{2}(?::\\d{2})?(?:\\.\\d+)?(?:Z|[+-]\\d{2}:?\\d{2})?)?\\b",
                     flags);
    // Clock times: 12:34, 9:05:10 pm ET.
    out.emplace_back("\\b\\d{1,2}:\\d{2}(?::\\d{2})?(?:\\s*[ap]\\.?m\\b\\.?)?" + tz, flags);
    // Hour-only times: 5 PM, 11a.m.
    out.emplace_back("\\b\\d{1,2}\\s*[ap]\\.?m\\b\\.?" + tz, flags);
    // Month-name dates: May 4, 2023 / Tuesday, Sept. 12 / 4th May 2023 / June 2023.
    out.emplace_back("\\b" + weekday + month + "\\.?\\s+\\d{1,2}(?:st|nd|rd|th)?\\b(?:,?\\s+\\d{4}\\b)?", flags);
    out.emplace_back("\\b\\d{1,2}(?:st|nd|rd|th)?\\s+" + month + "\\b\\.?(?:,?\\s+\\d{4}\\b)?", flags);
    out.emplace_back("\\b" + month + "\\.?,?\\s+\\d{4}\\b", flags);
    // Numeric dates: 5/4/2023, 05/04/23.
    out.emplace_back("\\b\\d{1,2}/\\d{1,2}/(?:\\d{4}|\\d{2})\\b", flags);
    // Relative ages: 3 hours ago, an hour ago.
    out.emplace_back(
        "\\b(?:\\d+|an?|one)\\s+(?:seconds?|secs?|minutes?|mins?|hours?|hrs?|days?|weeks?|months?|years?)\\s+ago\\b",
        flags);
    return out;
  }();
  return patterns;
}

// Pipes and bullets become a private separator so bylines can be scoped.
inline std::string mark_separators(std::string_view raw) {
  static constexpr std::string_view kMarks[] = {"|", "\xE2\x80\xA2", "\xC2\xB7", "\xE2\x97\x8F", "\xE2\x96\xAA",
                                                "\xE2\x80\xA3", "\xE2\x88\x99", "\n"};
  std::string out;
  out.reserve(raw.size());
  std::size_t i = 0;
  while (i < raw.size()) {
    bool hit = false;
    for (auto mark : kMarks) {
      if (raw.substr(i, mark.size()) == mark) {
        out.push_back(kSeparator);
        i += mark.size();
        hit = true;
        break;
      }
    }
    if (!hit) out.push_back(raw[i++]);
  }
  return out;
}

inline bool is_upper_start(std::string_view s) { return !s.empty() && s[0] >= 'A' && s[0] <= 'Z'; }

// "By <Name>" at the start of a separator-delimited segment is dropped up
// to the end of its sentence (or the whole segment). A period directly
// after a single capital letter is an initial, not a sentence end.
inline std::string strip_byline(std::string_view segment) {
  std::size_t start = 0;
  while (start < segment.size() && text::is_space(static_cast<unsigned char>(segment[start]))) ++start;
  const std::string_view s = segment.substr(start);
  if (s.size() < 4 || !(s.substr(0, 3) == "By " || s.substr(0, 3) == "BY " || s.substr(0, 3) == "by ")) {
    return std::string(segment);
  }
  std::size_t name = 3;
  while (name < s.size() && s[name] == ' ') ++name;
  if (!is_upper_start(s.substr(name))) return std::string(segment);
  for (std::size_t i = name; i < s.size(); ++i) {
    if (s[i] != '.' && s[i] != '!' && s[i] != '?') continue;
    const bool at_break = i + 1 == s.size() || text::is_space(static_cast<unsigned char>(s[i + 1]));
    const bool initial = s[i] == '.' && i >= 1 && s[i - 1] >= 'A' && s[i - 1] <= 'Z' &&
                         (i < 2 || s[i - 2] == ' ' || s[i - 2] == '.');
    if (at_break && !initial) return std::string(s.substr(i + 1));
  }
  return {};
}

inline std::string trim_punctuation(std::string_view s) {
  auto junk = [](char c) { return c == ' ' || c == ',' || c == ';' || c == ':' || c == '-'; };
  std::size_t b = 0, e = s.size();
  while (b < e && junk(s[b])) ++b;
  while (e > b && junk(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

}  // namespace detail

// Strips dates, times, relative ages, bylines and pipe/bullet separators,
// then collapses whitespace.
inline std::string clean_text(std::string_view raw) {
  std::string s = detail::mark_separators(raw);
  for (const auto& re : detail::date_time_patterns()) s = std::regex_replace(s, re, " ");
  std::string out;
  std::size_t start = 0;
  while (start <= s.size()) {
    std::size_t end = s.find(detail::kSeparator, start);
    if (end == std::string::npos) end = s.size();
    const std::string segment = detail::trim_punctuation(
        text::collapse_whitespace(detail::strip_byline(std::string_view(s).substr(start, end - start))));
    if (!segment.empty()) {
      if (!out.empty()) out.push_back(' ');
      out += segment;
    }
    start = end + 1;
  }
  return text::collapse_whitespace(out);
}

// 1 when a is more prominent, 0 when b is, nullopt when the criterion
// cannot separate them.
inline std::optional<int> label_pair(const ProminenceFeatures& fa, const ProminenceFeatures& fb, Criterion criterion) {
  switch (criterion) {
    case Criterion::kSize:
      if (fa.area > fb.area) return 1;
      if (fa.area < fb.area) return 0;
      return std::nullopt;
    case Criterion::kPosition:
      if (fa.reading_rank < fb.reading_rank) return 1;
      if (fa.reading_rank > fb.reading_rank) return 0;
      return std::nullopt;
    case Criterion::kCombined: {
      const bool a_wins = fa.area > fb.area || (fa.top_decile && fa.reading_rank < fb.reading_rank);
      const bool b_wins = fb.area > fa.area || (fb.top_decile && fb.reading_rank < fa.reading_rank);
      if (a_wins && !b_wins) return 1;
      if (b_wins && !a_wins) return 0;
      return std::nullopt;
    }
  }
  return std::nullopt;
}

// One snapshot's cards ready for pairing; vectors are parallel.
struct SnapshotCards {
  std::string outlet_id;
  std::string snapshot_id;
  std::vector<std::string> texts;  // already cleaned
  std::vector<ProminenceFeatures> features;
  std::vector<Rect> rects;
};

// Both orientations of every labeled adjacent pair. Cards whose cleaned
// text is empty take no part.
inline std::vector<PreferencePair> build_pairs(const SnapshotCards& snap, Criterion criterion,
                                               double gap = kDefaultAdjacencyGap) {
  if (snap.texts.size() != snap.features.size() || snap.texts.size() != snap.rects.size()) {
    throw Error(ErrorCode::kEmptyInput, "texts, features and rects must be parallel");
  }
  std::vector<PreferencePair> pairs;
  for (const auto& [i, j] : adjacency_graph(snap.rects, gap)) {
    if (snap.texts[i].empty() || snap.texts[j].empty()) continue;
    const auto label = label_pair(snap.features[i], snap.features[j], criterion);
    if (!label) continue;
    pairs.push_back({snap.texts[i], snap.texts[j], *label, criterion, snap.outlet_id, snap.snapshot_id, i, j});
    pairs.push_back({snap.texts[j], snap.texts[i], 1 - *label, criterion, snap.outlet_id, snap.snapshot_id, j, i});
  }
  return pairs;
}

struct SplitResult {
  std::vector<PreferencePair> train;
  std::vector<PreferencePair> test;
};

// Whole snapshots go to one side. Snapshot ids are sorted, shuffled with a
// seeded Fisher-Yates pass, and the first round(ratio * n) go to train;
// with two or more snapshots each side keeps at least one.
inline SplitResult split_dataset(const std::vector<PreferencePair>& pairs, double ratio = 0.8, std::uint64_t seed = 0) {
  if (pairs.empty()) throw Error(ErrorCode::kEmptyInput, "no pairs to split");
  if (!(ratio > 0.0 && ratio < 1.0)) throw Error(ErrorCode::kInvalidThreshold, "split ratio must lie in (0, 1)");
  std::set<std::string> unique;
  for (const auto& p : pairs) unique.insert(p.snapshot_id);
  std::vector<std::string> ids(unique.begin(), unique.end());
  std::mt19937_64 rng(seed);
  for (std::size_t i = ids.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(ids[i - 1], ids[j]);
  }
  const auto n = static_cast<long long>(ids.size());
  long long n_train = std::llround(ratio * static_cast<double>(n));
  if (n >= 2) n_train = std::clamp(n_train, 1LL, n - 1);
  const std::set<std::string> train_ids(ids.begin(), ids.begin() + n_train);

  SplitResult out;
  for (const auto& p : pairs) (train_ids.count(p.snapshot_id) ? out.train : out.test).push_back(p);
  return out;
}

inline std::string pair_to_jsonl(const PreferencePair& p) {
  nlohmann::ordered_json j;
  j["text_a"] = p.text_a;
  j["text_b"] = p.text_b;
  j["label"] = p.label;
  j["criterion"] = std::string(to_string(p.criterion));
  j["outlet_id"] = p.outlet_id;
  j["snapshot_id"] = p.snapshot_id;
  return j.dump();
}

inline std::string pairs_to_jsonl(const std::vector<PreferencePair>& pairs) {
  std::string out;
  for (const auto& p : pairs) out += pair_to_jsonl(p) + "\n";
  return out;
}

inline std::vector<PreferencePair> pairs_from_jsonl(std::string_view contents) {
  std::vector<PreferencePair> pairs;
  std::size_t start = 0;
  std::size_t lineno = 0;
  while (start < contents.size()) {
    std::size_t end = contents.find('\n', start);
    if (end == std::string_view::npos) end = contents.size();
    const std::string_view line = contents.substr(start, end - start);
    start = end + 1;
    ++lineno;
    if (text::collapse_whitespace(line).empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      PreferencePair p;
      p.text_a = j.at("text_a").get<std::string>();
      p.text_b = j.at("text_b").get<std::string>();
      p.label = j.at("label").get<int>();
      const auto crit = parse_criterion(j.at("criterion").get<std::string>());
      p.outlet_id = j.at("outlet_id").get<std::string>();
      p.snapshot_id = j.at("snapshot_id").get<std::string>();
      if (!crit || (p.label != 0 && p.label != 1)) throw std::invalid_argument("bad label or criterion");
      p.criterion = *crit;
      pairs.push_back(std::move(p));
    } catch (const std::exception& e) {
      throw Error(ErrorCode::kIoFailure, "pairs line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return pairs;
}

}  // namespace newsdesk
