#include <gtest/gtest.h>

#include <random>
#include <string>
#include <vector>

#include "extraction_cases.hpp"
#include "newsdesk/error.hpp"
#include "newsdesk/extraction_eval.hpp"

using namespace newsdesk;

TEST(ExtractionEval, HandLabeledCases) {
  const auto all = cases::load_box_cases(std::string(NEWSDESK_FIXTURES) + "/extraction_cases.json");
  ASSERT_EQ(all.size(), 20u);
  for (const auto& c : all) {
    const auto r = evaluate_extraction(c.pred, c.gold, c.iou_match);
    EXPECT_EQ(r, c.expect) << c.name;
    EXPECT_GT(cases::bucket_count(r, c.bucket), 0) << c.name;
  }
}

TEST(ExtractionEval, IdenticalBoxesAllCorrect) {
  const std::vector<Rect> boxes = {{0, 0, 10, 10}, {20, 0, 10, 10}, {0, 40, 50, 5}};
  const auto r = evaluate_extraction(boxes, boxes);
  EXPECT_EQ(r.matched, 3);
  EXPECT_EQ(r.pct_correct, 100.0);
  EXPECT_EQ(r.fp_multi + r.fp_empty + r.fn_partial + r.fn_missed, 0);
}

TEST(ExtractionEval, ThresholdValidation) {
  for (double t : {0.0, -0.1, 1.01}) {
    try {
      evaluate_extraction({}, {}, t);
      ADD_FAILURE() << t;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kInvalidThreshold);
    }
  }
  EXPECT_NO_THROW(evaluate_extraction({}, {}, 1.0));
}

// Random 5-box layouts: the overlap buckets against a direct enumeration of
// overlapping pairs, and the bookkeeping identities for the rest.
TEST(ExtractionEval, OverlapBucketsMatchEnumeration) {
  std::mt19937 rng(99);
  auto box = [&] {
    return Rect{static_cast<double>(rng() % 200), static_cast<double>(rng() % 200), static_cast<double>(1 + rng() % 80),
                static_cast<double>(1 + rng() % 80)};
  };
  int saw_missed = 0;
  for (int trial = 0; trial < 2000; ++trial) {
    std::vector<Rect> pred, gold;
    const int np = static_cast<int>(rng() % 6);
    for (int i = 0; i < np; ++i) pred.push_back(box());
    for (int i = 0; i < 5; ++i) gold.push_back(box());
    const auto r = evaluate_extraction(pred, gold);

    auto overlap = [](const Rect& a, const Rect& b) {
      return std::min(a.x + a.w, b.x + b.w) > std::max(a.x, b.x) && std::min(a.y + a.h, b.y + b.h) > std::max(a.y, b.y);
    };
    int multi = 0, empty = 0, missed = 0;
    for (const auto& p : pred) {
      int n = 0;
      for (const auto& g : gold) n += overlap(p, g);
      multi += n >= 2;
      empty += n == 0;
    }
    for (const auto& g : gold) {
      bool any = false;
      for (const auto& p : pred) any = any || overlap(p, g);
      missed += !any;
    }
    EXPECT_EQ(r.fp_multi, multi);
    EXPECT_EQ(r.fp_empty, empty);
    EXPECT_EQ(r.fn_missed, missed);
    EXPECT_EQ(r.matched + r.fn_partial + r.fn_missed, 5);
    EXPECT_LE(r.matched, np);
    saw_missed += missed > 0;
  }
  EXPECT_GT(saw_missed, 100);
}

TEST(ExtractionEval, AuthorLinksBreakAllAnchorsModeOnly) {
  int pages = 0;
  for (std::uint32_t seed = 1; seed <= 40; ++seed) {
    const auto gp = pagegen::grid_page(seed, true);
    ASSERT_GT(gp.author_cards, 0);
    const auto plain = cases::score_grid_page(gp, AnchorMode::kAllAnchors);
    const auto qual = cases::score_grid_page(gp, AnchorMode::kQualifying);
    EXPECT_GE(plain.fn_partial, 1) << seed;
    EXPECT_EQ(plain.fn_partial, gp.author_cards) << seed;
    EXPECT_EQ(qual.fn_partial, 0) << seed;
    EXPECT_EQ(qual.pct_correct, 100.0) << seed;
    ++pages;
  }
  EXPECT_EQ(pages, 40);
  // Without author links both modes agree.
  const auto gp = pagegen::grid_page(7, false);
  EXPECT_EQ(cases::score_grid_page(gp, AnchorMode::kAllAnchors), cases::score_grid_page(gp, AnchorMode::kQualifying));
}
