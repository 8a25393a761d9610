#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <string>

#include <json.hpp>

#include "newsdesk/error.hpp"
#include "newsdesk/html.hpp"
#include "newsdesk/snapshot_store.hpp"

namespace newsdesk {

// Pixel rectangle, origin at the page's top-left corner.
struct Rect {
  double x = 0;
  double y = 0;
  double w = 0;
  double h = 0;

  double area() const { return w * h; }
  double right() const { return x + w; }
  double bottom() const { return y + h; }

  friend bool operator==(const Rect&, const Rect&) = default;
};

inline double intersection_area(const Rect& a, const Rect& b) {
  const double iw = std::min(a.right(), b.right()) - std::max(a.x, b.x);
  const double ih = std::min(a.bottom(), b.bottom()) - std::max(a.y, b.y);
  return (iw > 0 && ih > 0) ? iw * ih : 0.0;
}

inline double iou(const Rect& a, const Rect& b) {
  const double inter = intersection_area(a, b);
  if (inter <= 0) return 0.0;
  return inter / (a.area() + b.area() - inter);
}

// Closed-rectangle intersection: touching edges count.
inline bool touches(const Rect& a, const Rect& b) {
  return a.x <= b.right() && b.x <= a.right() && a.y <= b.bottom() && b.y <= a.bottom();
}

inline Rect expand(const Rect& r, double gap) { return {r.x - gap, r.y - gap, r.w + 2 * gap, r.h + 2 * gap}; }

struct GeometryMap {
  std::map<html::NodePath, Rect> entries;
  double viewport_w = 0;
  double page_h = 0;

  const Rect* find(const html::NodePath& path) const {
    const auto it = entries.find(path);
    return it == entries.end() ? nullptr : &it->second;
  }
};

namespace detail {

inline std::string path_string(const html::NodePath& path) {
  std::string s = "[";
  for (std::size_t i = 0; i < path.size(); ++i) s += (i ? "," : "") + std::to_string(path[i]);
  return s + "]";
}

}  // namespace detail

// Throws OutOfBounds or MalformedGeometry for entries that break the map's
// invariants.
inline void validate_geometry(const GeometryMap& geo) {
  if (!(geo.viewport_w > 0) || !(geo.page_h >= 0)) {
    throw Error(ErrorCode::kMalformedGeometry, "viewport_w must be positive and page_h non-negative");
  }
  for (const auto& [path, r] : geo.entries) {
    if (r.w < 0 || r.h < 0 || r.x < 0 || r.y < 0) {
      throw Error(ErrorCode::kMalformedGeometry, "negative box component at " + detail::path_string(path));
    }
    if (r.right() > geo.viewport_w || r.bottom() > geo.page_h) {
      throw Error(ErrorCode::kOutOfBounds, "box exceeds the page at " + detail::path_string(path));
    }
  }
}

inline GeometryMap parse_geometry_sidecar(const std::string& raw) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(raw);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kMalformedGeometry, std::string("geometry sidecar is not JSON: ") + e.what());
  }
  auto bad = [](const std::string& why) { return Error(ErrorCode::kMalformedGeometry, why); };
  if (!doc.is_object()) throw bad("geometry sidecar must be an object");
  if (!doc.contains("viewport_w") || !doc["viewport_w"].is_number_integer()) throw bad("viewport_w must be an integer");
  if (!doc.contains("page_h") || !doc["page_h"].is_number_integer()) throw bad("page_h must be an integer");
  if (!doc.contains("boxes") || !doc["boxes"].is_array()) throw bad("boxes must be an array");
  GeometryMap geo;
  geo.viewport_w = doc["viewport_w"].get<double>();
  geo.page_h = doc["page_h"].get<double>();
  for (const auto& box : doc["boxes"]) {
    if (!box.is_object() || !box.contains("path") || !box["path"].is_array()) throw bad("box lacks a path array");
    html::NodePath path;
    for (const auto& idx : box["path"]) {
      if (!idx.is_number_integer() || idx.get<long long>() < 0) throw bad("path entries must be non-negative integers");
      path.push_back(idx.get<int>());
    }
    Rect r;
    for (auto [key, slot] : {std::pair{"x", &r.x}, std::pair{"y", &r.y}, std::pair{"w", &r.w}, std::pair{"h", &r.h}}) {
      if (!box.contains(key) || !box[key].is_number()) throw bad(std::string("box lacks numeric ") + key);
      *slot = box[key].get<double>();
    }
    if (!geo.entries.emplace(path, r).second) throw bad("duplicate path " + detail::path_string(path));
  }
  validate_geometry(geo);
  return geo;
}

inline GeometryMap load_geometry_sidecar(const std::filesystem::path& file) {
  return parse_geometry_sidecar(read_file(file));
}

// Integral page extents are written as integers as the sidecar requires.
inline std::string serialize_geometry_sidecar(const GeometryMap& geo) {
  nlohmann::ordered_json doc;
  doc["viewport_w"] = static_cast<long long>(geo.viewport_w);
  doc["page_h"] = static_cast<long long>(std::ceil(geo.page_h));
  doc["boxes"] = nlohmann::ordered_json::array();
  for (const auto& [path, r] : geo.entries) {
    doc["boxes"].push_back({{"path", path}, {"x", r.x}, {"y", r.y}, {"w", r.w}, {"h", r.h}});
  }
  return doc.dump(2) + "\n";
}

}  // namespace newsdesk
