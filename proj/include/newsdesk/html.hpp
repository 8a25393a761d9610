#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "newsdesk/error.hpp"
#include "newsdesk/text.hpp"

namespace newsdesk::html {

inline constexpr std::string_view kTextTag = "#text";
inline constexpr std::string_view kDocumentTag = "#document";

struct DomNode {
  std::string tag;  // lowercase element name, "#text", or "#document" for the root
  std::vector<std::pair<std::string, std::string>> attrs;  // in source order
  std::vector<DomNode> children;
  std::string text;  // #text nodes only

  bool is_text() const { return tag == kTextTag; }
  bool is_element() const { return !tag.empty() && tag[0] != '#'; }

  const std::string* attr(std::string_view name) const {
    for (const auto& [k, v] : attrs) {
      if (k == name) return &v;
    }
    return nullptr;
  }
};

// Child indices from the root. Lexicographic order is document order.
using NodePath = std::vector<int>;

inline bool is_prefix(const NodePath& prefix, const NodePath& path) {
  return prefix.size() <= path.size() && std::equal(prefix.begin(), prefix.end(), path.begin());
}

inline const DomNode* find_node(const DomNode& root, const NodePath& path) {
  const DomNode* node = &root;
  for (int idx : path) {
    if (idx < 0 || static_cast<std::size_t>(idx) >= node->children.size()) return nullptr;
    node = &node->children[static_cast<std::size_t>(idx)];
  }
  return node;
}

inline const DomNode& node_at(const DomNode& root, const NodePath& path) {
  const DomNode* node = find_node(root, path);
  if (node == nullptr) throw Error(ErrorCode::kInvalidPath, "node path does not resolve in the tree");
  return *node;
}

// Pre-order visit of every node with its path.
inline void walk(const DomNode& root, const std::function<void(const DomNode&, const NodePath&)>& visit) {
  NodePath path;
  std::function<void(const DomNode&)> rec = [&](const DomNode& node) {
    visit(node, path);
    for (std::size_t i = 0; i < node.children.size(); ++i) {
      path.push_back(static_cast<int>(i));
      rec(node.children[i]);
      path.pop_back();
    }
  };
  rec(root);
}

inline std::size_t count_nodes(const DomNode& node) {
  std::size_t n = 1;
  for (const auto& c : node.children) n += count_nodes(c);
  return n;
}

inline std::size_t count_elements(const DomNode& node) {
  std::size_t n = node.is_element() ? 1 : 0;
  for (const auto& c : node.children) n += count_elements(c);
  return n;
}

namespace detail {

inline bool one_of(std::string_view name, std::initializer_list<std::string_view> set) {
  return std::find(set.begin(), set.end(), name) != set.end();
}

inline bool is_void(std::string_view tag) {
  return one_of(tag, {"area", "base", "br", "col", "embed", "hr", "img", "input", "link", "meta",
                      "param", "source", "track", "wbr"});
}

inline bool is_raw_text(std::string_view tag) {
  return one_of(tag, {"script", "style", "textarea", "title", "xmp", "noscript"});
}

// Start tags that implicitly close an open <p>.
inline bool closes_p(std::string_view tag) {
  return one_of(tag, {"address", "article", "aside", "blockquote", "details", "div", "dl",
                      "fieldset", "figcaption", "figure", "footer", "form", "h1", "h2", "h3",
                      "h4", "h5", "h6", "header", "hr", "main", "menu", "nav", "ol", "p", "pre",
                      "section", "table", "ul"});
}

inline bool is_scope_boundary(std::string_view tag) {
  return one_of(tag, {"table", "td", "th", "caption", "html", "template"});
}

inline std::string decode_entities(std::string_view s) {
  struct Named {
    std::string_view name;
    std::string_view value;
  };
  static constexpr std::array<Named, 18> kNamed = {{
      {"amp", "&"},        {"lt", "<"},          {"gt", ">"},         {"quot", "\""},
      {"apos", "'"},       {"nbsp", "\xC2\xA0"}, {"mdash", "\xE2\x80\x94"},
      {"ndash", "\xE2\x80\x93"}, {"hellip", "\xE2\x80\xA6"}, {"rsquo", "\xE2\x80\x99"},
      {"lsquo", "\xE2\x80\x98"}, {"rdquo", "\xE2\x80\x9D"}, {"ldquo", "\xE2\x80\x9C"},
      {"bull", "\xE2\x80\xA2"},  {"middot", "\xC2\xB7"}, {"copy", "\xC2\xA9"},
      {"reg", "\xC2\xAE"},       {"laquo", "\xC2\xAB"},
  }};
  std::string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    if (s[i] != '&') {
      out.push_back(s[i++]);
      continue;
    }
    const std::size_t semi = s.find(';', i + 1);
    if (semi == std::string_view::npos || semi - i > 12) {
      out.push_back(s[i++]);
      continue;
    }
    const std::string_view body = s.substr(i + 1, semi - i - 1);
    bool done = false;
    if (!body.empty() && body[0] == '#') {
      std::uint32_t cp = 0;
      bool ok = body.size() > 1;
      const bool hex = ok && (body[1] == 'x' || body[1] == 'X');
      const std::size_t start = hex ? 2 : 1;
      ok = ok && body.size() > start;
      for (std::size_t k = start; ok && k < body.size(); ++k) {
        const char c = body[k];
        int digit = -1;
        if (c >= '0' && c <= '9') digit = c - '0';
        else if (hex && c >= 'a' && c <= 'f') digit = c - 'a' + 10;
        else if (hex && c >= 'A' && c <= 'F') digit = c - 'A' + 10;
        if (digit < 0 || cp > 0x10FFFF) ok = false;
        else cp = cp * (hex ? 16 : 10) + static_cast<std::uint32_t>(digit);
      }
      if (ok) {
        if (cp == 0 || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) cp = 0xFFFD;
        if (cp < 0x80) {
          out.push_back(static_cast<char>(cp));
        } else if (cp < 0x800) {
          out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
          out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        } else if (cp < 0x10000) {
          out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
          out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
          out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        } else {
          out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
          out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
          out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
          out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        }
        done = true;
      }
    } else {
      for (const auto& e : kNamed) {
        if (e.name == body) {
          out.append(e.value);
          done = true;
          break;
        }
      }
    }
    if (done) {
      i = semi + 1;
    } else {
      out.push_back(s[i++]);
    }
  }
  return out;
}

inline bool is_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }

class TreeBuilder {
 public:
  TreeBuilder() { root_.tag = std::string(kDocumentTag); }

  void add_text(std::string value) {
    if (value.empty()) return;
    DomNode node;
    node.tag = std::string(kTextTag);
    node.text = std::move(value);
    current().children.push_back(std::move(node));
  }

  void start_tag(std::string tag, std::vector<std::pair<std::string, std::string>> attrs,
                 bool self_closing) {
    if (closes_p(tag)) close_in_scope("p", {});
    if (tag == "li") close_in_scope("li", {"ul", "ol"});
    if (tag == "dt" || tag == "dd") {
      close_in_scope("dt", {"dl"});
      close_in_scope("dd", {"dl"});
    }
    if (tag == "option") close_in_scope("option", {"select", "datalist"});
    if (tag == "tr") {
      close_in_scope("td", {"tr", "table"});
      close_in_scope("th", {"tr", "table"});
      close_in_scope("tr", {"table", "tbody", "thead", "tfoot"});
    }
    if (tag == "td" || tag == "th") {
      close_in_scope("td", {"tr"});
      close_in_scope("th", {"tr"});
    }
    if (tag == "a") close_in_scope("a", {});

    DomNode node;
    node.tag = std::move(tag);
    node.attrs = std::move(attrs);
    const bool leaf = self_closing || is_void(node.tag);
    current().children.push_back(std::move(node));
    if (!leaf) open_.push_back(current().children.size() - 1);
  }

  void end_tag(std::string_view tag) {
    // Pop to the nearest matching open element; stray end tags are ignored.
    for (std::size_t depth = open_.size(); depth > 0; --depth) {
      if (element_at_depth(depth).tag == tag) {
        open_.resize(depth - 1);
        return;
      }
    }
  }

  DomNode take() { return std::move(root_); }

 private:
  // open_ stores child indices from the root; walking them yields the
  // current insertion point. Pointers would dangle on vector growth.
  DomNode& element_at_depth(std::size_t depth) {
    DomNode* node = &root_;
    for (std::size_t i = 0; i < depth; ++i) node = &node->children[open_[i]];
    return *node;
  }

  DomNode& current() { return element_at_depth(open_.size()); }

  void close_in_scope(std::string_view tag, std::initializer_list<std::string_view> stop_at) {
    for (std::size_t depth = open_.size(); depth > 0; --depth) {
      const std::string& t = element_at_depth(depth).tag;
      if (t == tag) {
        open_.resize(depth - 1);
        return;
      }
      if (is_scope_boundary(t) || std::find(stop_at.begin(), stop_at.end(), t) != stop_at.end()) {
        return;
      }
    }
  }

  DomNode root_;
  std::vector<std::size_t> open_;
};

}  // namespace detail

// Tolerant HTML parse. Never fails: unclosed tags are closed at end of
// input, unknown tags are kept, and script/style bodies become a single
// opaque #text child. Comments, doctypes and processing instructions are
// dropped. Input is decoded as UTF-8 with lossy replacement first.
inline DomNode parse_html(std::string_view bytes) {
  const std::string src = text::decode_utf8_lossy(bytes);
  detail::TreeBuilder builder;
  std::string pending;
  const std::size_t n = src.size();
  std::size_t i = 0;

  auto flush_text = [&] {
    if (!pending.empty()) {
      builder.add_text(detail::decode_entities(pending));
      pending.clear();
    }
  };

  while (i < n) {
    const char c = src[i];
    if (c != '<') {
      pending.push_back(c);
      ++i;
      continue;
    }
    // Comment.
    if (src.compare(i, 4, "<!--") == 0) {
      flush_text();
      const std::size_t end = src.find("-->", i + 4);
      i = end == std::string::npos ? n : end + 3;
      continue;
    }
    // Doctype, CDATA-ish markup, processing instruction.
    if (i + 1 < n && (src[i + 1] == '!' || src[i + 1] == '?')) {
      flush_text();
      const std::size_t end = src.find('>', i + 2);
      i = end == std::string::npos ? n : end + 1;
      continue;
    }
    const bool closing = i + 1 < n && src[i + 1] == '/';
    const std::size_t name_start = i + (closing ? 2 : 1);
    if (name_start >= n || !detail::is_alpha(src[name_start])) {
      pending.push_back(c);
      ++i;
      continue;
    }
    flush_text();
    std::size_t p = name_start;
    while (p < n && !text::is_space(static_cast<unsigned char>(src[p])) && src[p] != '/' && src[p] != '>') ++p;
    std::string name = text::to_lower(std::string_view(src).substr(name_start, p - name_start));

    std::vector<std::pair<std::string, std::string>> attrs;
    bool self_closing = false;
    while (p < n && src[p] != '>') {
      const auto ch = static_cast<unsigned char>(src[p]);
      if (text::is_space(ch)) {
        ++p;
        continue;
      }
      if (src[p] == '/') {
        self_closing = p + 1 < n && src[p + 1] == '>';
        ++p;
        continue;
      }
      std::size_t a = p;
      while (p < n && !text::is_space(static_cast<unsigned char>(src[p])) && src[p] != '=' && src[p] != '>' &&
             !(src[p] == '/' && p + 1 < n && src[p + 1] == '>')) {
        ++p;
      }
      std::string attr_name = text::to_lower(std::string_view(src).substr(a, p - a));
      std::string value;
      std::size_t q = p;
      while (q < n && text::is_space(static_cast<unsigned char>(src[q]))) ++q;
      if (q < n && src[q] == '=') {
        ++q;
        while (q < n && text::is_space(static_cast<unsigned char>(src[q]))) ++q;
        if (q < n && (src[q] == '"' || src[q] == '\'')) {
          const char quote = src[q];
          const std::size_t close = src.find(quote, q + 1);
          const std::size_t stop = close == std::string::npos ? n : close;
          value = src.substr(q + 1, stop - q - 1);
          p = close == std::string::npos ? n : close + 1;
        } else {
          std::size_t v = q;
          while (v < n && !text::is_space(static_cast<unsigned char>(src[v])) && src[v] != '>') ++v;
          value = src.substr(q, v - q);
          p = v;
        }
      }
      if (!attr_name.empty() && !closing) {
        const bool duplicate = std::any_of(attrs.begin(), attrs.end(),
                                           [&](const auto& kv) { return kv.first == attr_name; });
        if (!duplicate) attrs.emplace_back(std::move(attr_name), detail::decode_entities(value));
      }
    }
    i = p < n ? p + 1 : n;

    if (closing) {
      builder.end_tag(name);
      continue;
    }
    const bool raw = detail::is_raw_text(name);
    builder.start_tag(name, std::move(attrs), self_closing);
    if (raw && !self_closing) {
      // Raw text runs to the matching end tag, case-insensitively.
      const std::string needle = "</" + name;
      std::size_t end = i;
      while (true) {
        end = src.find("</", end);
        if (end == std::string::npos) break;
        if (text::to_lower(std::string_view(src).substr(end, needle.size())) == needle) break;
        end += 2;
      }
      const std::size_t stop = end == std::string::npos ? n : end;
      std::string body = src.substr(i, stop - i);
      if (name == "textarea" || name == "title") body = detail::decode_entities(body);
      builder.add_text(std::move(body));
      builder.end_tag(name);
      if (end == std::string::npos) {
        i = n;
      } else {
        const std::size_t gt = src.find('>', end);
        i = gt == std::string::npos ? n : gt + 1;
      }
    }
  }
  flush_text();
  return builder.take();
}

inline bool is_block_element(std::string_view tag) {
  return detail::closes_p(tag) ||
         detail::one_of(tag, {"li", "dd", "dt", "br", "tr", "td", "th", "body", "html"});
}

}  // namespace newsdesk::html
