#pragma once

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <functional>
#include <regex>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "newsdesk/error.hpp"
#include "newsdesk/snapshot_store.hpp"
#include "newsdesk/text.hpp"
#include "newsdesk/url.hpp"

namespace newsdesk {

enum class LinkKind { kNewsArticle, kOther };

struct LinkClass {
  LinkKind kind = LinkKind::kOther;
  double confidence = 0.5;  // in [0, 1]

  bool is_news() const { return kind == LinkKind::kNewsArticle; }
};

// Default rule set. One rule per line:
//   deny <segment>              any path segment equal to <segment> -> other
//   deny-regex <ecmascript>     whole URL matches -> other
//   news-date                   year/month[/day] segments or a YYYY-MM-DD segment -> news
//   news-slug <hyphens> <depth> last segment has >= hyphens and path depth >= depth -> news
//   news-regex <ecmascript>     whole URL matches -> news
// Deny rules are checked before news rules. Anything unmatched is other.
inline constexpr std::string_view kDefaultLinkRules = R"(# default article-vs-navigation rules
deny login
deny signin
deny sign-in
deny logout
deny register
deny account
deny about
deny about-us
deny subscribe
deny subscription
deny newsletter
deny newsletters
deny contact
deny contact-us
deny privacy
deny privacy-policy
deny terms
deny terms-of-service
deny tag
deny tags
deny topic
deny author
deny authors
deny by
deny search
deny careers
deny jobs
deny advertise
news-date
news-slug 3 2
)";

class LinkClassifier {
 public:
  using Override = std::function<LinkClass(std::string_view url, std::string_view anchor_text)>;

  LinkClassifier() : LinkClassifier(parse(kDefaultLinkRules)) {}

  static LinkClassifier from_rules(std::string_view rules) { return LinkClassifier(parse(rules)); }

  static LinkClassifier from_file(const std::filesystem::path& path) {
    return from_rules(read_file(path));
  }

  // A trained model can replace the rules wholesale.
  void set_override(Override model) { override_ = std::move(model); }

  LinkClass classify(std::string_view link_url, std::string_view anchor_text) const {
    if (override_) return override_(link_url, anchor_text);
    const auto parts = url::split(link_url);
    if (!parts.scheme || (*parts.scheme != "http" && *parts.scheme != "https")) {
      return {LinkKind::kOther, 0.99};
    }
    std::vector<std::string> segs = url::path_segments(link_url);
    for (auto& s : segs) {
      s = text::to_lower(s);
      if (const auto dot = s.rfind('.'); dot != std::string::npos && dot > 0) {
        const std::string ext = s.substr(dot + 1);
        if (ext == "html" || ext == "htm" || ext == "php" || ext == "aspx" || ext == "shtml") s.erase(dot);
      }
    }
    const std::string whole(link_url);
    for (const auto& seg : segs) {
      if (std::find(denied_segments_.begin(), denied_segments_.end(), seg) != denied_segments_.end()) {
        return {LinkKind::kOther, 0.95};
      }
    }
    for (const auto& re : deny_patterns_) {
      if (std::regex_search(whole, re)) return {LinkKind::kOther, 0.9};
    }
    if (date_rule_ && has_date_path(segs)) return {LinkKind::kNewsArticle, 0.95};
    for (const auto& [hyphens, depth] : slug_rules_) {
      if (!segs.empty() && static_cast<int>(segs.size()) >= depth &&
          std::count(segs.back().begin(), segs.back().end(), '-') >= hyphens) {
        return {LinkKind::kNewsArticle, 0.85};
      }
    }
    for (const auto& re : news_patterns_) {
      if (std::regex_search(whole, re)) return {LinkKind::kNewsArticle, 0.8};
    }
    return {LinkKind::kOther, 0.6};
  }

 private:
  struct Rules {
    std::vector<std::string> denied_segments;
    std::vector<std::regex> deny_patterns;
    std::vector<std::regex> news_patterns;
    std::vector<std::pair<int, int>> slug_rules;
    bool date_rule = false;
  };

  explicit LinkClassifier(Rules rules)
      : denied_segments_(std::move(rules.denied_segments)),
        deny_patterns_(std::move(rules.deny_patterns)),
        news_patterns_(std::move(rules.news_patterns)),
        slug_rules_(std::move(rules.slug_rules)),
        date_rule_(rules.date_rule) {}

  static Rules parse(std::string_view source) {
    Rules rules;
    std::istringstream in{std::string(source)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const std::string trimmed = text::collapse_whitespace(line);
      if (trimmed.empty() || trimmed[0] == '#') continue;
      std::istringstream fields(trimmed);
      std::string op;
      fields >> op;
      std::string rest;
      std::getline(fields, rest);
      rest = text::collapse_whitespace(rest);
      auto fail = [&](const std::string& why) {
        return Error(ErrorCode::kConfigError, "link rule line " + std::to_string(lineno) + ": " + why);
      };
      try {
        if (op == "deny") {
          if (rest.empty() || rest.find(' ') != std::string::npos) throw fail("deny takes one segment");
          rules.denied_segments.push_back(text::to_lower(rest));
        } else if (op == "deny-regex") {
          rules.deny_patterns.emplace_back(rest, std::regex::ECMAScript | std::regex::icase);
        } else if (op == "news-regex") {
          rules.news_patterns.emplace_back(rest, std::regex::ECMAScript | std::regex::icase);
        } else if (op == "news-date") {
          rules.date_rule = true;
        } else if (op == "news-slug") {
          std::istringstream nums(rest);
          int hyphens = -1, depth = -1;
          if (!(nums >> hyphens >> depth) || hyphens < 0 || depth < 0) throw fail("news-slug takes two counts");
          rules.slug_rules.emplace_back(hyphens, depth);
        } else {
          throw fail("unknown rule '" + op + "'");
        }
      } catch (const std::regex_error& e) {
        throw fail(std::string("bad regex: ") + e.what());
      }
    }
    return rules;
  }

  static bool all_digits(std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
  }

  static bool is_year(std::string_view s) {
    return s.size() == 4 && all_digits(s) && (s.substr(0, 2) == "19" || s.substr(0, 2) == "20");
  }

  static bool is_month(std::string_view s) {
    if (s.empty() || s.size() > 2 || !all_digits(s)) return false;
    const int m = std::stoi(std::string(s));
    return m >= 1 && m <= 12;
  }

  static bool has_date_path(const std::vector<std::string>& segs) {
    for (std::size_t i = 0; i < segs.size(); ++i) {
      const std::string& s = segs[i];
      if (i + 1 < segs.size() && is_year(s) && is_month(segs[i + 1])) return true;
      if (s.size() >= 10 && is_year(std::string_view(s).substr(0, 4)) && s[4] == '-' &&
          is_month(std::string_view(s).substr(5, 2)) && s[7] == '-' && all_digits(std::string_view(s).substr(8, 2))) {
        return true;
      }
    }
    return false;
  }

  std::vector<std::string> denied_segments_;
  std::vector<std::regex> deny_patterns_;
  std::vector<std::regex> news_patterns_;
  std::vector<std::pair<int, int>> slug_rules_;
  bool date_rule_ = false;
  Override override_;
};

inline LinkClass classify_link(std::string_view link_url, std::string_view anchor_text) {
  static const LinkClassifier kDefault;
  return kDefault.classify(link_url, anchor_text);
}

}  // namespace newsdesk
