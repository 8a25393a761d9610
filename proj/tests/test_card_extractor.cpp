#include <gtest/gtest.h>

#include <set>
#include <string>
#include <vector>

#include "newsdesk/card_extractor.hpp"
#include "newsdesk/error.hpp"
#include "page_gen.hpp"

using namespace newsdesk;
using html::NodePath;

namespace {

const std::string kA = "https://x.test/2024/05/01/alpha-story";
const std::string kB = "https://x.test/2024/05/01/beta-story";
const std::string kAuthor = "https://x.test/authors/jane-doe";

std::vector<NodePath> paths_of(const std::vector<ArticleCard>& cards) {
  std::vector<NodePath> out;
  for (const auto& c : cards) out.push_back(c.card_path);
  return out;
}

}  // namespace

TEST(CardText, ConcatenatesVisibleText) {
  const auto dom = html::parse_html("<div><b>A</b>lpha <i>B</i>eta</div>");
  EXPECT_EQ(card_text(dom, NodePath{0}), "Alpha Beta");
  const auto dom2 = html::parse_html("<div>Mayor<span> signs </span>bill<style>.x{color:red}</style>"
                                     "<script>var y;</script></div>");
  EXPECT_EQ(card_text(dom2, NodePath{0}), "Mayor signs bill");
  EXPECT_THROW(card_text(dom2, NodePath{3}), Error);
}

TEST(CardText, BlockBoundariesSeparateWords) {
  const auto dom = html::parse_html("<div><h2>Headline</h2><p>Summary</p></div>");
  EXPECT_EQ(card_text(dom, NodePath{0}), "Headline Summary");
}

TEST(ExtractCards, SingleAnchorGrowsToOutermostContainer) {
  // body > div > (h2 > a, p): the card climbs to the topmost element below
  // the document root.
  const auto dom = html::parse_html("<body><div><h2><a href=\"" + kA + "\">Alpha story</a></h2><p>x</p></div></body>");
  const auto cards = extract_cards(dom, {{kA, "Alpha story"}});
  ASSERT_EQ(cards.size(), 1u);
  EXPECT_EQ(cards[0].card_path, (NodePath{0}));
  EXPECT_EQ(cards[0].anchor_url, kA);
  EXPECT_EQ(cards[0].headline_text, "Alpha story");
  EXPECT_EQ(cards[0].full_text, "Alpha story x");
}

TEST(ExtractCards, TwoSiblingContainers) {
  const auto dom = html::parse_html("<body><div><a href=\"" + kA + "\">A</a></div><div><a href=\"" + kB +
                                    "\">B</a></div></body>");
  const auto cards = extract_cards(dom, {{kA, "A"}, {kB, "B"}});
  EXPECT_EQ(paths_of(cards), (std::vector<NodePath>{{0, 0}, {0, 1}}));
  // Brute-force agreement on this hand-built page.
  const auto oracle = pagegen::oracle_cards(dom, {kA, kB});
  ASSERT_EQ(oracle.size(), 2u);
  EXPECT_EQ(oracle[0].path, (NodePath{0, 0}));
  EXPECT_EQ(oracle[1].path, (NodePath{0, 1}));
}

TEST(ExtractCards, AuthorLinkDoesNotBlockQualifyingMode) {
  const std::string page = "<body><div class=grid><article><h2><a href=\"" + kA +
                           "\">Alpha story</a></h2><p>By <a href=\"" + kAuthor +
                           "\">Jane Doe</a></p></article><article><h2><a href=\"" + kB +
                           "\">Beta story</a></h2></article></div></body>";
  const auto dom = html::parse_html(page);
  const std::vector<LinkRecord> links = {{kA, "Alpha story"}, {kB, "Beta story"}, {kAuthor, "Jane Doe"}};
  const auto cards = extract_cards(dom, links);
  ASSERT_EQ(cards.size(), 2u);
  EXPECT_EQ(cards[0].card_path, (NodePath{0, 0, 0}));
  EXPECT_EQ(cards[0].full_text, "Alpha story By Jane Doe");
  EXPECT_EQ(cards[0].anchor_url, kA);

  ExtractOptions all;
  all.mode = AnchorMode::kAllAnchors;
  const auto plain = extract_cards(dom, links, all);
  ASSERT_EQ(plain.size(), 2u);
  EXPECT_EQ(plain[0].card_path, (NodePath{0, 0, 0, 0})) << "the author link stops growth at the h2";
  EXPECT_EQ(plain[1].card_path, (NodePath{0, 0, 1}));
}

TEST(ExtractCards, DuplicateUrlsGiveOneCardEach) {
  const auto dom = html::parse_html("<body><div><a href=\"" + kA + "\">Alpha</a></div><ul><li><a href=\"" + kA +
                                    "\">Alpha</a></li><li><a href=\"" + kB + "\">Beta</a></li></ul></body>");
  const auto cards = extract_cards(dom, {{kA, "Alpha"}, {kB, "Beta"}});
  EXPECT_EQ(paths_of(cards), (std::vector<NodePath>{{0, 0}, {0, 1, 0}, {0, 1, 1}}));
}

TEST(ExtractCards, RelativeHrefsUseBase) {
  const auto dom = html::parse_html("<div><a href=\"/2024/05/01/alpha-story#top\">Alpha</a></div>");
  ExtractOptions opts;
  opts.base_url = "https://x.test/section/";
  const auto cards = extract_cards(dom, {{kA, "Alpha"}}, opts);
  ASSERT_EQ(cards.size(), 1u);
  EXPECT_EQ(cards[0].anchor_url, kA);
  // Without a base the relative href cannot match.
  EXPECT_THROW(extract_cards(dom, {{kA, "Alpha"}}), Error);
}

TEST(ExtractCards, NoQualifyingAnchors) {
  const auto dom = html::parse_html("<div><a href=\"https://x.test/about\">About</a><a href=\"" + kA +
                                    "\"><img src=x></a></div>");
  try {
    extract_cards(dom, {{"https://x.test/about", "About"}, {kA, ""}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNoAnchors);
  }
}

TEST(ExtractCards, ImageCount) {
  const auto dom = html::parse_html("<div><article><img src=1><picture><img src=2></picture><a href=\"" + kA +
                                    "\">A</a></article><article><a href=\"" + kB + "\">B</a></article></div>");
  const auto cards = extract_cards(dom, {{kA, "A"}, {kB, "B"}});
  ASSERT_EQ(cards.size(), 2u);
  EXPECT_EQ(cards[0].image_count, 2);
  EXPECT_EQ(cards[1].image_count, 0);
}

// Maximality, uniqueness, disjointness and completeness against the
// brute-force oracle, in both anchor modes.
TEST(ExtractCards, MatchesBruteForceOracleOnRandomPages) {
  std::size_t total_cards = 0, pages_where_modes_differ = 0;
  for (std::uint32_t seed = 1; seed <= 150; ++seed) {
    const auto page = pagegen::random_page(seed);
    const auto dom = html::parse_html(page.html);
    ASSERT_LE(html::count_nodes(dom), 200u) << seed;
    std::set<std::string> news;
    for (const auto& l : page.links) {
      if (classify_link(l.url, l.text).is_news()) news.insert(l.url);
    }
    for (const bool all : {false, true}) {
      const auto oracle = pagegen::oracle_cards(dom, news, all);
      ExtractOptions opts;
      opts.mode = all ? AnchorMode::kAllAnchors : AnchorMode::kQualifying;
      std::vector<ArticleCard> cards;
      try {
        cards = extract_cards(dom, page.links, opts);
      } catch (const Error& e) {
        ASSERT_EQ(e.code(), ErrorCode::kNoAnchors);
      }
      ASSERT_EQ(cards.size(), oracle.size()) << "seed " << seed << " all=" << all;
      total_cards += cards.size();
      if (all && oracle != pagegen::oracle_cards(dom, news, false)) ++pages_where_modes_differ;
      for (std::size_t i = 0; i < cards.size(); ++i) {
        EXPECT_EQ(cards[i].card_path, oracle[i].path) << seed;
        EXPECT_EQ(cards[i].anchor_url, oracle[i].url) << seed;
      }
      for (std::size_t i = 0; i < cards.size(); ++i) {
        for (std::size_t j = 0; j < cards.size(); ++j) {
          if (i != j) {
            EXPECT_FALSE(html::is_prefix(cards[i].card_path, cards[j].card_path)) << seed;
          }
        }
      }
    }
  }
  // The corpus is not degenerate.
  EXPECT_GT(total_cards, 600u);
  EXPECT_GT(pages_where_modes_differ, 20u);
}

TEST(ParseHtml, NodeCountBound) {
  for (std::uint32_t seed = 1; seed <= 50; ++seed) {
    const auto page = pagegen::random_page(seed);
    std::size_t tags = 0, lt = 0;
    for (std::size_t i = 0; i + 1 < page.html.size(); ++i) {
      if (page.html[i] != '<') continue;
      ++lt;
      if (std::isalpha(static_cast<unsigned char>(page.html[i + 1]))) ++tags;
    }
    // Text runs sit between '<' characters, so there are at most lt + 1.
    EXPECT_LE(html::count_nodes(html::parse_html(page.html)), tags + (lt + 1) + 1);
  }
}

TEST(TextMatch, Scores) {
  EXPECT_DOUBLE_EQ(text_match_score("Mayor signs bill", "Mayor signs bill"), 1.0);
  EXPECT_DOUBLE_EQ(text_match_score("storm hits coast", "Mayor signs bill"), 0.0);
  EXPECT_DOUBLE_EQ(text_match_score("Breaking: mayor signs the budget bill today", "Mayor signs bill"), 1.0);
  EXPECT_DOUBLE_EQ(text_match_score("mayor signs", "Mayor signs bill"), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(text_match_score("anything", ""), 0.0);
  EXPECT_DOUBLE_EQ(text_match_score("", "--"), 0.0);
  // Repeated link tokens count once.
  EXPECT_DOUBLE_EQ(text_match_score("bill", "bill bill mayor"), 0.5);
}

TEST(TextMatch, SubsetAlwaysScoresOne) {
  std::mt19937 rng(9);
  const std::vector<std::string> vocab = {"a", "storm", "City", "vote", "Rail", "x1", "caf\xC3\xA9"};
  for (int trial = 0; trial < 300; ++trial) {
    std::string link, card = "prefix";
    for (int k = 0; k < 1 + static_cast<int>(rng() % 5); ++k) {
      const auto& w = vocab[rng() % vocab.size()];
      link += w + (rng() % 2 ? " " : ", ");
      card += " " + text::to_lower(w) + " noise";
    }
    EXPECT_DOUBLE_EQ(text_match_score(card, link), 1.0) << link << " | " << card;
  }
}

TEST(FilterCards, KeepsAtThresholdAndPreservesOrder) {
  std::vector<ArticleCard> cards(3);
  cards[0].anchor_url = kA;
  cards[1].anchor_url = kB;
  cards[2].anchor_url = "https://x.test/2024/05/01/gamma-story";
  const std::vector<std::string> texts = {"alpha story", "nothing relevant", "gamma partial"};
  const std::vector<LinkRecord> links = {
      {kA, "Alpha story"}, {kB, "Beta story"}, {cards[2].anchor_url, "gamma story words here"}};
  auto r = filter_cards(cards, texts, links, 0.8);
  ASSERT_EQ(r.kept.size(), 1u);
  EXPECT_EQ(r.kept[0].anchor_url, kA);
  ASSERT_EQ(r.dropped.size(), 2u);
  EXPECT_EQ(r.dropped[0].card.anchor_url, kB);
  EXPECT_EQ(r.dropped[0].reason, "LOW_TEXT_MATCH");
  EXPECT_EQ(r.dropped[1].card.anchor_url, cards[2].anchor_url);
  // Score of card 2 is exactly 1/4: a threshold of 0.25 keeps it.
  r = filter_cards(cards, texts, links, 0.25);
  EXPECT_EQ(r.kept.size(), 2u);
  r = filter_cards(cards, texts, links, 0.0);
  EXPECT_EQ(r.kept.size(), 3u);
  EXPECT_THROW(filter_cards(cards, texts, links, 1.5), Error);
  EXPECT_THROW(filter_cards(cards, texts, links, -0.1), Error);
}

TEST(FilterCards, BestLinkRecordForRepeatedUrl) {
  std::vector<ArticleCard> cards(1);
  cards[0].anchor_url = kA;
  const auto r = filter_cards(cards, {"alpha story"}, {{kA, "Read more"}, {kA, "Alpha story"}}, 0.8);
  EXPECT_EQ(r.kept.size(), 1u);
}

TEST(CountRatio, Rule) {
  EXPECT_TRUE(count_ratio_check(8, 10, 0.8));
  EXPECT_FALSE(count_ratio_check(7, 10, 0.8));
  EXPECT_FALSE(count_ratio_check(0, 0, 0.8));
  EXPECT_FALSE(count_ratio_check(5, 0, 0.0));
  EXPECT_TRUE(count_ratio_check(12, 10));
}

TEST(DedupCards, KeepsLargerArea) {
  std::vector<ArticleCard> cards(3);
  cards[0].card_path = {0};
  cards[0].anchor_url = kA;
  cards[1].card_path = {1};
  cards[1].anchor_url = kB;
  cards[2].card_path = {2};
  cards[2].anchor_url = kA;
  GeometryMap geo;
  geo.viewport_w = 100;
  geo.page_h = 1000;
  geo.entries[{0}] = {0, 0, 10, 10};
  geo.entries[{1}] = {0, 20, 10, 10};
  geo.entries[{2}] = {0, 40, 50, 50};
  auto out = dedup_cards(cards, geo);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].card_path, (NodePath{1}));
  EXPECT_EQ(out[1].card_path, (NodePath{2}));
  // Equal areas: the earlier card wins.
  geo.entries[{2}] = {0, 40, 10, 10};
  out = dedup_cards(cards, geo);
  EXPECT_EQ(out[0].card_path, (NodePath{0}));
}

TEST(CardsJson, RoundTrip) {
  const auto dom = html::parse_html("<div><a href=\"" + kA + "\">A \"quoted\" caf\xC3\xA9</a><img src=x></div>");
  const auto cards = extract_cards(dom, {{kA, "A"}});
  EXPECT_EQ(cards_from_json(nlohmann::json::parse(cards_to_json(cards).dump())), cards);
}
