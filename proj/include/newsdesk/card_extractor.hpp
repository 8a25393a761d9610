#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include <json.hpp>

#include "newsdesk/error.hpp"
#include "newsdesk/geometry.hpp"
#include "newsdesk/html.hpp"
#include "newsdesk/link_classifier.hpp"
#include "newsdesk/snapshot_store.hpp"
#include "newsdesk/text.hpp"
#include "newsdesk/url.hpp"

namespace newsdesk {

struct ArticleCard {
  html::NodePath card_path;
  std::string anchor_url;
  std::string headline_text;
  std::string full_text;
  int image_count = 0;

  friend bool operator==(const ArticleCard&, const ArticleCard&) = default;
};

// Which anchors stop a card from growing. kQualifying counts only
// news-classified anchors; kAllAnchors is the plain single-<a> variant,
// which shrinks cards that contain author or section links.
enum class AnchorMode { kQualifying, kAllAnchors };

namespace detail {

inline void collect_text(const html::DomNode& node, std::string& out) {
  if (node.is_text()) {
    out += node.text;
    return;
  }
  if (node.tag == "script" || node.tag == "style" || node.tag == "noscript" || node.tag == "template") return;
  const bool block = html::is_block_element(node.tag);
  if (block) out.push_back(' ');
  for (const auto& c : node.children) collect_text(c, out);
  if (block) out.push_back(' ');
}

inline int count_images(const html::DomNode& node) {
  int n = node.tag == "img" ? 1 : 0;
  for (const auto& c : node.children) n += count_images(c);
  return n;
}

inline std::string strip_fragment(std::string_view u) {
  return std::string(u.substr(0, u.find('#')));
}

}  // namespace detail

// Visible text of a subtree: #text descendants in document order with
// script/style bodies skipped, block boundaries read as spaces, whitespace
// collapsed and trimmed.
inline std::string visible_text(const html::DomNode& node) {
  std::string raw;
  detail::collect_text(node, raw);
  return text::collapse_whitespace(raw);
}

inline std::string card_text(const html::DomNode& dom, const html::NodePath& path) {
  return visible_text(html::node_at(dom, path));
}

inline std::string card_text(const html::DomNode& dom, const ArticleCard& card) {
  return card_text(dom, card.card_path);
}

struct ExtractOptions {
  AnchorMode mode = AnchorMode::kQualifying;
  // Base for resolving relative hrefs in the page.
  std::optional<std::string> base_url;
  const LinkClassifier* classifier = nullptr;  // default rules when null
};

// URLs of news-classified links, with fragments dropped.
inline std::unordered_set<std::string> qualifying_urls(const std::vector<LinkRecord>& links,
                                                      const LinkClassifier* classifier = nullptr) {
  std::unordered_set<std::string> out;
  for (const auto& l : links) {
    const LinkClass cls = classifier ? classifier->classify(l.url, l.text) : classify_link(l.url, l.text);
    if (cls.is_news()) out.insert(detail::strip_fragment(l.url));
  }
  return out;
}

struct AnchorInfo {
  html::NodePath path;
  std::string url;   // resolved, fragment dropped; empty when unresolvable
  std::string text;  // visible anchor text
  bool qualifying = false;
};

// Every <a href> in document order, tagged against the qualifying set.
// Anchors with empty visible text never qualify.
inline std::vector<AnchorInfo> find_anchors(const html::DomNode& dom,
                                            const std::unordered_set<std::string>& qualifying,
                                            const std::optional<std::string>& base_url) {
  std::vector<AnchorInfo> anchors;
  html::walk(dom, [&](const html::DomNode& node, const html::NodePath& path) {
    if (node.tag != "a") return;
    const std::string* href = node.attr("href");
    if (href == nullptr) return;
    AnchorInfo info;
    info.path = path;
    const std::string trimmed = text::collapse_whitespace(*href);
    if (url::is_absolute(trimmed)) {
      info.url = detail::strip_fragment(trimmed);
    } else if (base_url) {
      info.url = detail::strip_fragment(url::resolve(*base_url, trimmed));
    }
    info.text = visible_text(node);
    info.qualifying = !info.url.empty() && !info.text.empty() && qualifying.count(info.url) > 0;
    anchors.push_back(std::move(info));
  });
  return anchors;
}

// Grows each qualifying anchor to its maximal enclosing subtree that holds
// exactly one blocking anchor. Which anchors block depends on the mode.
// Cards come back in document order; repeated URLs yield one card each.
inline std::vector<ArticleCard> extract_cards(const html::DomNode& dom, const std::vector<LinkRecord>& links,
                                              const ExtractOptions& options = {}) {
  const auto qualifying = qualifying_urls(links, options.classifier);
  const auto anchors = find_anchors(dom, qualifying, options.base_url);

  // Blocking-anchor count for every proper prefix of every anchor path.
  std::map<html::NodePath, int> counts;
  bool any_qualifying = false;
  for (const auto& a : anchors) {
    any_qualifying = any_qualifying || a.qualifying;
    const bool blocks = options.mode == AnchorMode::kAllAnchors || a.qualifying;
    if (!blocks) continue;
    for (std::size_t len = 0; len <= a.path.size(); ++len) {
      ++counts[html::NodePath(a.path.begin(), a.path.begin() + static_cast<std::ptrdiff_t>(len))];
    }
  }
  if (!any_qualifying) throw Error(ErrorCode::kNoAnchors, "page has no qualifying article anchors");

  std::vector<ArticleCard> cards;
  for (const auto& a : anchors) {
    if (!a.qualifying) continue;
    // Climb while the parent is not the document root and still holds only
    // this anchor.
    std::size_t len = a.path.size();
    while (len > 1) {
      const html::NodePath parent(a.path.begin(), a.path.begin() + static_cast<std::ptrdiff_t>(len - 1));
      if (counts[parent] != 1) break;
      --len;
    }
    ArticleCard card;
    card.card_path.assign(a.path.begin(), a.path.begin() + static_cast<std::ptrdiff_t>(len));
    const html::DomNode& root = html::node_at(dom, card.card_path);
    card.anchor_url = a.url;
    card.headline_text = a.text;
    card.full_text = visible_text(root);
    card.image_count = detail::count_images(root);
    cards.push_back(std::move(card));
  }
  std::stable_sort(cards.begin(), cards.end(),
                   [](const ArticleCard& x, const ArticleCard& y) { return x.card_path < y.card_path; });
  return cards;
}

// Fraction of the link text's distinct tokens present in the card text.
inline double text_match_score(std::string_view card_text, std::string_view link_text) {
  const auto link_tokens = text::tokenize(link_text);
  if (link_tokens.empty()) return 0.0;
  const std::set<std::string> need(link_tokens.begin(), link_tokens.end());
  const auto card_tokens = text::tokenize(card_text);
  const std::set<std::string> have(card_tokens.begin(), card_tokens.end());
  std::size_t hit = 0;
  for (const auto& t : need) hit += have.count(t);
  return static_cast<double>(hit) / static_cast<double>(need.size());
}

inline constexpr std::string_view kLowTextMatch = "LOW_TEXT_MATCH";

struct DroppedCard {
  ArticleCard card;
  std::string reason;
};

struct FilterResult {
  std::vector<ArticleCard> kept;
  std::vector<DroppedCard> dropped;
};

// Drops cards whose text covers less than `min_match` of their link's text.
// When several link records share a URL the best-matching one is used.
inline FilterResult filter_cards(const std::vector<ArticleCard>& cards, const std::vector<std::string>& texts,
                                 const std::vector<LinkRecord>& links, double min_match) {
  if (!(min_match >= 0.0 && min_match <= 1.0)) {
    throw Error(ErrorCode::kInvalidThreshold, "min_match must lie in [0, 1]");
  }
  if (texts.size() != cards.size()) throw Error(ErrorCode::kEmptyInput, "one text per card is required");
  std::unordered_map<std::string, std::vector<const LinkRecord*>> by_url;
  for (const auto& l : links) by_url[detail::strip_fragment(l.url)].push_back(&l);

  FilterResult result;
  for (std::size_t i = 0; i < cards.size(); ++i) {
    double best = 0.0;
    if (const auto it = by_url.find(cards[i].anchor_url); it != by_url.end()) {
      for (const auto* l : it->second) best = std::max(best, text_match_score(texts[i], l->text));
    }
    if (best >= min_match) {
      result.kept.push_back(cards[i]);
    } else {
      result.dropped.push_back({cards[i], std::string(kLowTextMatch)});
    }
  }
  return result;
}

// Snapshot-level sanity check: false means discard the snapshot.
inline bool count_ratio_check(std::size_t n_cards, std::size_t n_qualifying_links, double min_ratio = 0.8) {
  if (n_qualifying_links == 0) return false;
  return static_cast<double>(n_cards) / static_cast<double>(n_qualifying_links) >= min_ratio;
}

// Keeps one card per anchor URL: the one with the larger area, earlier in
// document order on ties. Cards without geometry are kept as-is.
inline std::vector<ArticleCard> dedup_cards(const std::vector<ArticleCard>& cards, const GeometryMap& geo) {
  std::unordered_map<std::string, std::size_t> best;
  auto area_of = [&](const ArticleCard& c) {
    const Rect* r = geo.find(c.card_path);
    return r == nullptr ? -1.0 : r->area();
  };
  for (std::size_t i = 0; i < cards.size(); ++i) {
    const auto [it, inserted] = best.emplace(cards[i].anchor_url, i);
    if (!inserted && area_of(cards[i]) > area_of(cards[it->second])) it->second = i;
  }
  std::vector<ArticleCard> out;
  for (std::size_t i = 0; i < cards.size(); ++i) {
    if (best.at(cards[i].anchor_url) == i) out.push_back(cards[i]);
  }
  return out;
}

inline nlohmann::ordered_json cards_to_json(const std::vector<ArticleCard>& cards) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& c : cards) {
    arr.push_back({{"card_path", c.card_path},
                   {"anchor_url", c.anchor_url},
                   {"headline_text", c.headline_text},
                   {"full_text", c.full_text},
                   {"image_count", c.image_count}});
  }
  return arr;
}

inline std::vector<ArticleCard> cards_from_json(const nlohmann::json& arr) {
  if (!arr.is_array()) throw Error(ErrorCode::kIoFailure, "cards.json must be an array");
  std::vector<ArticleCard> cards;
  try {
    for (const auto& item : arr) {
      ArticleCard c;
      c.card_path = item.at("card_path").get<html::NodePath>();
      c.anchor_url = item.at("anchor_url").get<std::string>();
      c.headline_text = item.at("headline_text").get<std::string>();
      c.full_text = item.at("full_text").get<std::string>();
      c.image_count = item.at("image_count").get<int>();
      cards.push_back(std::move(c));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kIoFailure, std::string("malformed cards.json: ") + e.what());
  }
  return cards;
}

}  // namespace newsdesk
