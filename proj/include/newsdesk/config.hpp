#pragma once

#include <bit>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "newsdesk/card_extractor.hpp"
#include "newsdesk/comparator.hpp"
#include "newsdesk/error.hpp"
#include "newsdesk/layout.hpp"
#include "newsdesk/pair_builder.hpp"
#include "newsdesk/report.hpp"
#include "newsdesk/text.hpp"

namespace newsdesk {

// Every pipeline setting. Each field has one key, used verbatim in the
// config file and as --key-with-dashes on the command line.
struct PipelineConfig {
  std::filesystem::path store_dir = "store";
  std::vector<std::filesystem::path> bundles;  // ingest inputs
  std::string outlet;                          // optional outlet filter
  double viewport_w = kDefaultViewportWidth;
  double band_height = kDefaultBandHeight;
  double adjacency_gap = kDefaultAdjacencyGap;
  double text_match_min = 0.8;
  double count_ratio_min = 0.8;
  AnchorMode anchor_mode = AnchorMode::kQualifying;
  std::filesystem::path link_rules;  // empty: built-in rules
  Criterion criterion = Criterion::kSize;
  double split_ratio = 0.8;
  Hyperparameters hyper;
  std::uint32_t feature_dim = kDefaultFeatureDim;
  std::vector<std::filesystem::path> articles;  // article sets; empty: <store>/articles.jsonl
  std::size_t top_k = 10;
  ReportFormat report_format = ReportFormat::kCsv;
  std::size_t jobs = 1;
  std::uint64_t seed = 0;

  static const std::vector<std::string_view>& keys() {
    static const std::vector<std::string_view> k = {
        "store_dir",    "bundles",        "outlet",          "viewport_w",  "band_height", "adjacency_gap",
        "text_match_min", "count_ratio_min", "anchor_mode",   "link_rules",  "criterion",   "split_ratio",
        "learning_rate", "epochs",         "l2",              "feature_dim", "articles",    "top_k",
        "report_format", "jobs",           "seed"};
    return k;
  }

  // Sets one key from its textual value; throws ConfigError.
  void set(std::string_view key, std::string_view raw) {
    const std::string value = unquote(raw);
    auto fail = [&](const std::string& why) {
      return Error(ErrorCode::kConfigError, std::string(key) + ": " + why);
    };
    auto number = [&]() {
      try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument("trailing characters");
        return v;
      } catch (const std::exception&) {
        throw fail("expected a number, got '" + value + "'");
      }
    };
    auto integer = [&]() {
      const double v = number();
      if (v < 0 || v != static_cast<double>(static_cast<std::uint64_t>(v))) throw fail("expected a non-negative integer");
      return static_cast<std::uint64_t>(v);
    };
    auto path_list = [&]() {
      std::vector<std::filesystem::path> out;
      std::string item;
      std::istringstream in(value);
      while (std::getline(in, item, ',')) {
        item = text::collapse_whitespace(item);
        if (!item.empty()) out.emplace_back(item);
      }
      return out;
    };

    if (key == "store_dir") {
      if (value.empty()) throw fail("must not be empty");
      store_dir = value;
    } else if (key == "bundles") {
      bundles = path_list();
    } else if (key == "outlet") {
      outlet = value;
    } else if (key == "viewport_w") {
      viewport_w = number();
      if (!(viewport_w > 0)) throw fail("must be positive");
    } else if (key == "band_height") {
      band_height = number();
      if (!(band_height > 0)) throw fail("must be positive");
    } else if (key == "adjacency_gap") {
      adjacency_gap = number();
      if (!(adjacency_gap >= 0)) throw fail("must be non-negative");
    } else if (key == "text_match_min") {
      text_match_min = number();
      if (!(text_match_min >= 0 && text_match_min <= 1)) throw fail("must lie in [0, 1]");
    } else if (key == "count_ratio_min") {
      count_ratio_min = number();
      if (!(count_ratio_min >= 0 && count_ratio_min <= 1)) throw fail("must lie in [0, 1]");
    } else if (key == "anchor_mode") {
      if (value == "qualifying") anchor_mode = AnchorMode::kQualifying;
      else if (value == "all") anchor_mode = AnchorMode::kAllAnchors;
      else throw fail("expected qualifying or all");
    } else if (key == "link_rules") {
      link_rules = value;
    } else if (key == "criterion") {
      const auto c = parse_criterion(value);
      if (!c) throw fail("expected size, position or combined");
      criterion = *c;
    } else if (key == "split_ratio") {
      split_ratio = number();
      if (!(split_ratio > 0 && split_ratio < 1)) throw fail("must lie in (0, 1)");
    } else if (key == "learning_rate") {
      hyper.learning_rate = number();
      if (!(hyper.learning_rate > 0)) throw fail("must be positive");
    } else if (key == "epochs") {
      const auto e = integer();
      if (e == 0 || e > 1'000'000) throw fail("must be a positive integer");
      hyper.epochs = static_cast<std::uint32_t>(e);
    } else if (key == "l2") {
      hyper.l2 = number();
      if (!(hyper.l2 >= 0)) throw fail("must be non-negative");
    } else if (key == "feature_dim") {
      const auto d = integer();
      if (d <= kReservedFeatures || d > (1ULL << 30) || !std::has_single_bit(d)) throw fail("must be a power of two");
      feature_dim = static_cast<std::uint32_t>(d);
    } else if (key == "articles") {
      articles = path_list();
    } else if (key == "top_k") {
      top_k = integer();
    } else if (key == "report_format") {
      const auto f = parse_report_format(value);
      if (!f) throw fail("expected csv or json");
      report_format = *f;
    } else if (key == "jobs") {
      jobs = integer();
      if (jobs == 0) throw fail("must be at least 1");
    } else if (key == "seed") {
      seed = integer();
      hyper.seed = seed;
    } else {
      throw Error(ErrorCode::kConfigError, "unknown config key '" + std::string(key) + "'");
    }
  }

  // Flat "key = value" lines; '#' starts a comment; [section] headers are
  // ignored. Relative paths are taken relative to the config file.
  static PipelineConfig from_string(std::string_view contents, const std::filesystem::path& base_dir = {}) {
    PipelineConfig cfg;
    std::istringstream in{std::string(contents)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto hash = find_comment(line);
      const std::string body = text::collapse_whitespace(line.substr(0, hash));
      if (body.empty() || (body.front() == '[' && body.back() == ']')) continue;
      const auto eq = body.find('=');
      if (eq == std::string::npos) {
        throw Error(ErrorCode::kConfigError, "config line " + std::to_string(lineno) + " lacks '='");
      }
      const std::string key = text::collapse_whitespace(body.substr(0, eq));
      cfg.set(key, text::collapse_whitespace(body.substr(eq + 1)));
    }
    cfg.rebase(base_dir);
    return cfg;
  }

  static PipelineConfig from_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::kConfigError, "cannot read config " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_string(ss.str(), path.parent_path());
  }

 private:
  static std::string unquote(std::string_view raw) {
    std::string v = text::collapse_whitespace(raw);
    if (v.size() >= 2 && ((v.front() == '"' && v.back() == '"') || (v.front() == '\'' && v.back() == '\''))) {
      v = v.substr(1, v.size() - 2);
    }
    return v;
  }

  static std::size_t find_comment(const std::string& line) {
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') quoted = !quoted;
      if (line[i] == '#' && !quoted) return i;
    }
    return line.size();
  }

  void rebase(const std::filesystem::path& base) {
    if (base.empty()) return;
    auto fix = [&](std::filesystem::path& p) {
      if (!p.empty() && p.is_relative()) p = base / p;
    };
    fix(store_dir);
    fix(link_rules);
    for (auto& b : bundles) fix(b);
    for (auto& a : articles) fix(a);
  }
};

}  // namespace newsdesk
