#include <gtest/gtest.h>

#include <random>
#include <string>

#include "newsdesk/error.hpp"
#include "newsdesk/html.hpp"

namespace html = newsdesk::html;

namespace {

// Compact structural dump: elements as tag(children...), text as "text".
std::string dump(const html::DomNode& n) {
  if (n.is_text()) return "\"" + n.text + "\"";
  std::string out = n.tag == html::kDocumentTag ? "" : n.tag;
  out += "(";
  for (std::size_t i = 0; i < n.children.size(); ++i) out += (i ? " " : "") + dump(n.children[i]);
  return out + ")";
}

}  // namespace

TEST(Html, ImpliedParagraphEnd) {
  EXPECT_EQ(dump(html::parse_html("<p>a<p>b")), R"((p("a") p("b")))");
}

TEST(Html, ImpliedListItemAndNestedAnchorEnds) {
  EXPECT_EQ(dump(html::parse_html("<ul><li>x<li>y</ul>")), R"((ul(li("x") li("y"))))");
  EXPECT_EQ(dump(html::parse_html("<a href=1>x<a href=2>y</a>")), R"((a("x") a("y")))");
  EXPECT_EQ(dump(html::parse_html("<table><tr><td>1<td>2<tr><td>3</table>")),
            R"((table(tr(td("1") td("2")) tr(td("3")))))");
  // A div inside an open p closes it.
  EXPECT_EQ(dump(html::parse_html("<p>a<div>b</div>")), R"((p("a") div("b")))");
}

TEST(Html, VoidAndSelfClosingElementsHaveNoChildren) {
  EXPECT_EQ(dump(html::parse_html("<div><img src=x>t<br/>u</div>")), R"((div(img() "t" br() "u")))");
  EXPECT_EQ(dump(html::parse_html("<svg><path d='M0'/></svg>")), R"((svg(path())))");
}

TEST(Html, CommentsDoctypeDroppedAndStrayEndTagsIgnored) {
  EXPECT_EQ(dump(html::parse_html("<!DOCTYPE html><!-- c --><div>a</span>b</div></div>")), R"((div("a" "b")))");
}

TEST(Html, RawTextBodiesStayOpaque) {
  const auto dom = html::parse_html("<script>if (a<b) { x = '</div>'; }</script><p>t</p>");
  EXPECT_EQ(dump(dom), R"((script("if (a<b) { x = '</div>'; }") p("t")))");
}

TEST(Html, ScriptBodyUntilItsEndTag) {
  const auto dom = html::parse_html("<SCRIPT>var s = \"<a href=x>\";</Script><b>t</b>");
  EXPECT_EQ(dump(dom), "(script(\"var s = \"<a href=x>\";\") b(\"t\"))");
}

TEST(Html, AttributesAndEntities) {
  const auto dom = html::parse_html(R"(<A HREF="/x?a=1&amp;b=2" class=big data-x='q'>Fish &amp; chips &#8212; &#x41;&bogus;</a>)");
  ASSERT_EQ(dom.children.size(), 1u);
  const auto& a = dom.children[0];
  EXPECT_EQ(a.tag, "a");
  ASSERT_NE(a.attr("href"), nullptr);
  EXPECT_EQ(*a.attr("href"), "/x?a=1&b=2");
  EXPECT_EQ(*a.attr("class"), "big");
  EXPECT_EQ(*a.attr("data-x"), "q");
  EXPECT_EQ(a.attr("missing"), nullptr);
  EXPECT_EQ(a.children[0].text, "Fish & chips \xE2\x80\x94 A&bogus;");
}

TEST(Html, LessThanNotFollowedByLetterIsText) {
  EXPECT_EQ(dump(html::parse_html("<p>1 < 2 and 3<4</p>")), R"((p("1 < 2 and 3<4")))");
}

TEST(Html, WhitespaceTextNodesAreKeptInPaths) {
  const auto dom = html::parse_html("<div>\n  <a href=x>t</a>\n</div>");
  ASSERT_EQ(dom.children[0].children.size(), 3u);
  EXPECT_EQ(html::node_at(dom, {0, 1}).tag, "a");
  EXPECT_THROW(html::node_at(dom, {0, 7}), newsdesk::Error);
  EXPECT_EQ(html::find_node(dom, {5}), nullptr);
}

TEST(Html, WalkVisitsEveryNodeOnceInPreorderWithValidPaths) {
  const auto dom = html::parse_html("<div><p>a<b>b</b></p><ul><li>c<li>d</ul></div>tail");
  std::size_t visits = 0;
  html::NodePath previous;
  html::walk(dom, [&](const html::DomNode& node, const html::NodePath& path) {
    ++visits;
    EXPECT_EQ(&html::node_at(dom, path), &node);
    if (visits > 1) {
      EXPECT_LT(previous, path);  // preorder = lexicographic path order
    }
    previous = path;
  });
  EXPECT_EQ(visits, html::count_nodes(dom));
  EXPECT_EQ(html::count_elements(dom), 6u);
}

TEST(Html, IsPrefix) {
  EXPECT_TRUE(html::is_prefix({}, {1, 2}));
  EXPECT_TRUE(html::is_prefix({1}, {1, 2}));
  EXPECT_TRUE(html::is_prefix({1, 2}, {1, 2}));
  EXPECT_FALSE(html::is_prefix({1, 3}, {1, 2}));
  EXPECT_FALSE(html::is_prefix({1, 2, 3}, {1, 2}));
}

TEST(Html, ParserIsTotalOnRandomInput) {
  std::mt19937 rng(11);
  const std::string alphabet = "<>/=\"' abpdivli&;#x!-\n\xC3\xFF";
  for (int trial = 0; trial < 500; ++trial) {
    std::string s(rng() % 200, ' ');
    for (char& c : s) c = alphabet[rng() % alphabet.size()];
    html::DomNode dom;
    ASSERT_NO_THROW(dom = html::parse_html(s)) << s;
    EXPECT_EQ(dom.tag, html::kDocumentTag);
    // Text never holds element children; every path resolves.
    html::walk(dom, [&](const html::DomNode& n, const html::NodePath& p) {
      if (n.is_text()) {
        EXPECT_TRUE(n.children.empty());
      }
      EXPECT_EQ(&html::node_at(dom, p), &n);
    });
  }
}

TEST(Html, BlockElements) {
  EXPECT_TRUE(html::is_block_element("div"));
  EXPECT_TRUE(html::is_block_element("li"));
  EXPECT_TRUE(html::is_block_element("br"));
  EXPECT_FALSE(html::is_block_element("span"));
  EXPECT_FALSE(html::is_block_element("a"));
}
