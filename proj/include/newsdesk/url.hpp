#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "newsdesk/text.hpp"

namespace newsdesk::url {

// Generic URI components, split per the RFC 3986 reference grammar.
struct UrlParts {
  std::optional<std::string> scheme;
  std::optional<std::string> authority;
  std::string path;
  std::optional<std::string> query;
  std::optional<std::string> fragment;
};

inline UrlParts split(std::string_view s) {
  UrlParts parts;
  std::size_t pos = 0;

  // scheme = ALPHA *( ALPHA / DIGIT / "+" / "-" / "." ) ":"
  const std::size_t colon = s.find_first_of(":/?#");
  if (colon != std::string_view::npos && colon > 0 && s[colon] == ':') {
    bool valid = (s[0] >= 'a' && s[0] <= 'z') || (s[0] >= 'A' && s[0] <= 'Z');
    for (std::size_t i = 1; valid && i < colon; ++i) {
      const char c = s[i];
      valid = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
              c == '+' || c == '-' || c == '.';
    }
    if (valid) {
      parts.scheme = text::to_lower(s.substr(0, colon));
      pos = colon + 1;
    }
  }
  if (s.substr(pos, 2) == "//") {
    const std::size_t end = s.find_first_of("/?#", pos + 2);
    const std::size_t stop = end == std::string_view::npos ? s.size() : end;
    parts.authority = std::string(s.substr(pos + 2, stop - pos - 2));
    pos = stop;
  }
  const std::size_t path_end = s.find_first_of("?#", pos);
  const std::size_t pstop = path_end == std::string_view::npos ? s.size() : path_end;
  parts.path = std::string(s.substr(pos, pstop - pos));
  pos = pstop;
  if (pos < s.size() && s[pos] == '?') {
    const std::size_t hash = s.find('#', pos);
    const std::size_t qstop = hash == std::string_view::npos ? s.size() : hash;
    parts.query = std::string(s.substr(pos + 1, qstop - pos - 1));
    pos = qstop;
  }
  if (pos < s.size() && s[pos] == '#') {
    parts.fragment = std::string(s.substr(pos + 1));
  }
  return parts;
}

inline std::string recompose(const UrlParts& p) {
  std::string out;
  if (p.scheme) out += *p.scheme + ":";
  if (p.authority) out += "//" + *p.authority;
  out += p.path;
  if (p.query) out += "?" + *p.query;
  if (p.fragment) out += "#" + *p.fragment;
  return out;
}

inline std::string remove_dot_segments(std::string_view input) {
  std::string in(input);
  std::string out;
  while (!in.empty()) {
    if (in.rfind("../", 0) == 0) {
      in.erase(0, 3);
    } else if (in.rfind("./", 0) == 0) {
      in.erase(0, 2);
    } else if (in.rfind("/./", 0) == 0) {
      in.replace(0, 3, "/");
    } else if (in == "/.") {
      in = "/";
    } else if (in.rfind("/../", 0) == 0 || in == "/..") {
      in = in.size() == 3 ? std::string("/") : in.substr(3);
      const std::size_t last = out.rfind('/');
      out.erase(last == std::string::npos ? 0 : last);
    } else if (in == "." || in == "..") {
      in.clear();
    } else {
      const std::size_t next = in.find('/', in[0] == '/' ? 1 : 0);
      const std::size_t seg_end = next == std::string::npos ? in.size() : next;
      out.append(in, 0, seg_end);
      in.erase(0, seg_end);
    }
  }
  return out;
}

inline bool is_absolute(std::string_view s) { return split(s).scheme.has_value(); }

// Resolves `reference` against `base` (strict RFC 3986 resolution).
inline std::string resolve(std::string_view base, std::string_view reference) {
  const UrlParts b = split(base);
  const UrlParts r = split(reference);
  UrlParts t;
  if (r.scheme) {
    t.scheme = r.scheme;
    t.authority = r.authority;
    t.path = remove_dot_segments(r.path);
    t.query = r.query;
  } else {
    if (r.authority) {
      t.authority = r.authority;
      t.path = remove_dot_segments(r.path);
      t.query = r.query;
    } else {
      if (r.path.empty()) {
        t.path = b.path;
        t.query = r.query ? r.query : b.query;
      } else {
        if (r.path[0] == '/') {
          t.path = remove_dot_segments(r.path);
        } else {
          std::string merged;
          if (b.authority && b.path.empty()) {
            merged = "/" + r.path;
          } else {
            const std::size_t last = b.path.rfind('/');
            merged = (last == std::string::npos ? std::string() : b.path.substr(0, last + 1)) + r.path;
          }
          t.path = remove_dot_segments(merged);
        }
        t.query = r.query;
      }
      t.authority = b.authority;
    }
    t.scheme = b.scheme;
  }
  t.fragment = r.fragment;
  return recompose(t);
}

inline std::string host(std::string_view absolute) {
  const UrlParts p = split(absolute);
  if (!p.authority) return {};
  std::string_view a = *p.authority;
  if (const auto at = a.rfind('@'); at != std::string_view::npos) a.remove_prefix(at + 1);
  if (const auto colon = a.rfind(':'); colon != std::string_view::npos && a.find(']') == std::string_view::npos) {
    a = a.substr(0, colon);
  }
  return text::to_lower(a);
}

// Non-empty path segments, in order.
inline std::vector<std::string> path_segments(std::string_view absolute) {
  const UrlParts p = split(absolute);
  std::vector<std::string> segs;
  std::size_t start = 0;
  const std::string& path = p.path;
  while (start <= path.size()) {
    std::size_t end = path.find('/', start);
    if (end == std::string::npos) end = path.size();
    if (end > start) segs.push_back(path.substr(start, end - start));
    start = end + 1;
  }
  return segs;
}

}  // namespace newsdesk::url
