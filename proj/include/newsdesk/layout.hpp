#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "newsdesk/card_extractor.hpp"
#include "newsdesk/error.hpp"
#include "newsdesk/geometry.hpp"
#include "newsdesk/html.hpp"
#include "newsdesk/text.hpp"

namespace newsdesk {

inline constexpr double kDefaultViewportWidth = 1280;
inline constexpr double kDefaultBandHeight = 100;

// Flow-layout constants for the built-in estimator.
inline constexpr double kCardBaseHeight = 40;
inline constexpr double kLineHeight = 20;
inline constexpr std::size_t kCharsPerLine = 80;
inline constexpr double kImageHeight = 180;

inline double estimated_card_height(const ArticleCard& card) {
  const auto lines = text::codepoint_count(card.full_text) / kCharsPerLine;
  return kCardBaseHeight + kLineHeight * static_cast<double>(lines) + (card.image_count > 0 ? kImageHeight : 0.0);
}

inline bool is_column_container(const html::DomNode& node) {
  const std::string* cls = node.attr("class");
  if (cls == nullptr) return false;
  const std::string lower = text::to_lower(*cls);
  return lower.find("col") != std::string::npos || lower.find("grid") != std::string::npos ||
         lower.find("row") != std::string::npos;
}

namespace detail {

class FlowLayout {
 public:
  FlowLayout(const html::DomNode& dom, const std::vector<ArticleCard>& cards) : dom_(dom) {
    for (const auto& c : cards) {
      card_at_.emplace(c.card_path, &c);
      for (std::size_t len = 0; len <= c.card_path.size(); ++len) {
        holds_card_.insert(html::NodePath(c.card_path.begin(), c.card_path.begin() + static_cast<std::ptrdiff_t>(len)));
      }
    }
  }

  double place(const html::DomNode& node, html::NodePath& path, double x, double y, double w) {
    if (const auto it = card_at_.find(path); it != card_at_.end()) {
      const double h = estimated_card_height(*it->second);
      out_.entries[path] = Rect{x, y, w, h};
      return h;
    }
    std::vector<std::size_t> occupied;
    for (std::size_t i = 0; i < node.children.size(); ++i) {
      path.push_back(static_cast<int>(i));
      if (holds_card_.count(path)) occupied.push_back(i);
      path.pop_back();
    }
    if (occupied.empty()) return 0;
    double height = 0;
    if (is_column_container(node)) {
      const double col_w = std::floor(w / static_cast<double>(occupied.size()));
      for (std::size_t k = 0; k < occupied.size(); ++k) {
        path.push_back(static_cast<int>(occupied[k]));
        height = std::max(height, place(node.children[occupied[k]], path, x + col_w * static_cast<double>(k), y, col_w));
        path.pop_back();
      }
    } else {
      for (std::size_t i : occupied) {
        path.push_back(static_cast<int>(i));
        height += place(node.children[i], path, x, y + height, w);
        path.pop_back();
      }
    }
    return height;
  }

  GeometryMap run(double viewport_w) {
    html::NodePath path;
    out_.viewport_w = viewport_w;
    out_.page_h = place(dom_, path, 0, 0, viewport_w);
    return std::move(out_);
  }

 private:
  const html::DomNode& dom_;
  std::map<html::NodePath, const ArticleCard*> card_at_;
  std::set<html::NodePath> holds_card_;
  GeometryMap out_;
};

}  // namespace detail

// Deterministic naive flow layout over card roots in document order.
// Containers whose class mentions col/grid/row split their card-bearing
// children into equal-width columns; everything else stacks full width.
inline GeometryMap estimate_layout(const html::DomNode& dom, const std::vector<ArticleCard>& cards,
                                   double viewport_w = kDefaultViewportWidth) {
  if (!(viewport_w > 0)) throw Error(ErrorCode::kMalformedGeometry, "viewport_w must be positive");
  return detail::FlowLayout(dom, cards).run(viewport_w);
}

struct ProminenceFeatures {
  double area = 0;
  double center_x = 0;
  double top_y = 0;
  int reading_rank = 0;  // 1-based
  bool top_decile = false;
  int image_count = 0;

  friend bool operator==(const ProminenceFeatures&, const ProminenceFeatures&) = default;
};

// 1-based reading-order ranks by (band, x, path), band = floor(y / band_height).
inline std::vector<int> reading_ranks(const std::vector<html::NodePath>& paths, const std::vector<Rect>& rects,
                                      double band_height = kDefaultBandHeight) {
  std::vector<std::size_t> order(paths.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  auto key = [&](std::size_t i) { return std::make_tuple(std::floor(rects[i].y / band_height), rects[i].x, std::cref(paths[i])); };
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return key(a) < key(b); });
  std::vector<int> ranks(paths.size());
  for (std::size_t r = 0; r < order.size(); ++r) ranks[order[r]] = static_cast<int>(r) + 1;
  return ranks;
}

// Features for every card of one snapshot; reading ranks are relative to
// this card set.
inline std::vector<ProminenceFeatures> prominence_features(const std::vector<ArticleCard>& cards, const GeometryMap& geo,
                                                           double band_height = kDefaultBandHeight) {
  if (!(band_height > 0)) throw Error(ErrorCode::kInvalidThreshold, "band_height must be positive");
  std::vector<html::NodePath> paths;
  std::vector<Rect> rects;
  for (const auto& c : cards) {
    const Rect* r = geo.find(c.card_path);
    if (r == nullptr) {
      throw Error(ErrorCode::kMissingGeometry, "no geometry for card at " + detail::path_string(c.card_path));
    }
    paths.push_back(c.card_path);
    rects.push_back(*r);
  }
  const auto ranks = reading_ranks(paths, rects, band_height);
  std::vector<ProminenceFeatures> out;
  out.reserve(cards.size());
  for (std::size_t i = 0; i < cards.size(); ++i) {
    ProminenceFeatures f;
    f.area = rects[i].area();
    f.center_x = rects[i].x + rects[i].w / 2;
    f.top_y = rects[i].y;
    f.reading_rank = ranks[i];
    f.top_decile = rects[i].y < 0.10 * geo.page_h;
    f.image_count = cards[i].image_count;
    out.push_back(f);
  }
  return out;
}

inline ProminenceFeatures prominence_features(const ArticleCard& card, const std::vector<ArticleCard>& snapshot_cards,
                                              const GeometryMap& geo, double band_height = kDefaultBandHeight) {
  const auto all = prominence_features(snapshot_cards, geo, band_height);
  for (std::size_t i = 0; i < snapshot_cards.size(); ++i) {
    if (snapshot_cards[i].card_path == card.card_path) return all[i];
  }
  throw Error(ErrorCode::kMissingGeometry, "card is not part of the snapshot card set");
}

}  // namespace newsdesk
