// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any
// failure.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "cli_run.hpp"
#include "comparator_gen.hpp"
#include "extraction_cases.hpp"
#include "newsdesk/card_extractor.hpp"
#include "newsdesk/comparator.hpp"
#include "newsdesk/html.hpp"
#include "newsdesk/link_classifier.hpp"
#include "newsdesk/pair_builder.hpp"
#include "newsdesk/pipeline.hpp"
#include "newsdesk/ranker.hpp"
#include "page_gen.hpp"
#include "pair_gen.hpp"
#include "rank_gen.hpp"
#include "test_util.hpp"

using namespace newsdesk;
using html::NodePath;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

// 1. Card invariants on 50 random pages, each checked from scratch.
Outcome dom_invariants() {
  Outcome o;
  std::size_t cards_total = 0, anchors_total = 0, violations = 0;
  const double secs = testutil::seconds([&] {
    for (std::uint32_t seed = 1001; seed <= 1050; ++seed) {
      const auto page = pagegen::random_page(seed, 200);
      const auto dom = html::parse_html(page.html);
      if (html::count_nodes(dom) > 200) ++violations;
      std::set<std::string> news;
      for (const auto& l : page.links) {
        if (classify_link(l.url, l.text).is_news()) news.insert(l.url);
      }
      std::vector<ArticleCard> cards;
      try {
        cards = extract_cards(dom, page.links);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kNoAnchors) ++violations;
      }
      cards_total += cards.size();
      auto qualifying_under = [&](const NodePath& p) {
        std::vector<pagegen::OracleAnchor> found;
        pagegen::collect_blocking(html::node_at(dom, p), news, false, found);
        return found.size();
      };
      for (const auto& c : cards) {
        if (qualifying_under(c.card_path) != 1) ++violations;  // uniqueness
        const NodePath parent(c.card_path.begin(), c.card_path.end() - 1);
        if (!parent.empty() && qualifying_under(parent) < 2) ++violations;  // maximality
      }
      for (std::size_t i = 0; i < cards.size(); ++i) {  // disjointness
        for (std::size_t j = 0; j < cards.size(); ++j) {
          if (i != j && html::is_prefix(cards[i].card_path, cards[j].card_path)) ++violations;
        }
      }
      html::walk(dom, [&](const html::DomNode& n, const NodePath& p) {  // completeness
        if (n.tag != "a") return;
        const std::string* href = n.attr("href");
        if (href == nullptr || !news.count(*href) || !pagegen::has_visible_text(n)) return;
        ++anchors_total;
        int holders = 0;
        for (const auto& c : cards) holders += html::is_prefix(c.card_path, p);
        if (holders != 1) ++violations;
      });
      std::vector<NodePath> got;
      for (const auto& c : cards) got.push_back(c.card_path);
      std::vector<NodePath> want;
      for (const auto& c : pagegen::oracle_cards(dom, news)) want.push_back(c.path);
      if (got != want) ++violations;
    }
  });
  o.pass = violations == 0 && secs < 10.0 && cards_total > 100;
  o.detail = std::to_string(cards_total) + " cards, " + std::to_string(anchors_total) + " qualifying anchors, " +
             std::to_string(violations) + " violations, " + fmt("%.2f s", secs);
  return o;
}

// 2. Author-link failure mode, then the hand-labeled error buckets.
Outcome failure_modes() {
  Outcome o;
  int pages = 0, plain_ok = 0, qual_ok = 0;
  for (std::uint32_t seed = 2001; seed <= 2030; ++seed) {
    const auto gp = pagegen::grid_page(seed, true);
    ++pages;
    plain_ok += cases::score_grid_page(gp, AnchorMode::kAllAnchors).fn_partial >= 1;
    qual_ok += cases::score_grid_page(gp, AnchorMode::kQualifying).fn_partial == 0;
  }
  const auto all = cases::load_box_cases(std::string(NEWSDESK_FIXTURES) + "/extraction_cases.json");
  int agree = 0;
  for (const auto& c : all) {
    const auto r = evaluate_extraction(c.pred, c.gold, c.iou_match);
    agree += r == c.expect && cases::bucket_count(r, c.bucket) > 0;
  }
  o.pass = plain_ok == pages && qual_ok == pages && all.size() == 20 && agree == 20;
  o.detail = "all-anchors FN-partial on " + std::to_string(plain_ok) + "/" + std::to_string(pages) +
             " pages, qualifying clean on " + std::to_string(qual_ok) + "/" + std::to_string(pages) +
             ", hand labels " + std::to_string(agree) + "/" + std::to_string(all.size());
  return o;
}

// 3. Kendall tau against the quadratic count.
Outcome kendall() {
  Outcome o;
  std::mt19937 rng(3003);
  int mismatches = 0, bound_failures = 0;
  const double secs = testutil::seconds([&] {
    for (int trial = 0; trial < 1000; ++trial) {
      const int n = 2 + static_cast<int>(rng() % 199);
      std::vector<int> a(n), b(n);
      std::iota(a.begin(), a.end(), 0);
      std::iota(b.begin(), b.end(), 0);
      std::shuffle(a.begin(), a.end(), rng);
      std::shuffle(b.begin(), b.end(), rng);
      std::vector<int> pos(n);
      for (int i = 0; i < n; ++i) pos[b[i]] = i;
      long long conc = 0, disc = 0;
      for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) (pos[a[i]] < pos[a[j]] ? conc : disc)++;
      }
      const double brute = static_cast<double>(conc - disc) / (static_cast<double>(n) * (n - 1) / 2);
      mismatches += kendall_tau(a, b) != brute;
      const std::vector<int> rev(a.rbegin(), a.rend());
      bound_failures += kendall_tau(a, a) != 1.0 || kendall_tau(a, rev) != -1.0;
    }
  });
  o.pass = mismatches == 0 && bound_failures == 0 && secs < 5.0;
  o.detail = "1000 pairs, " + std::to_string(mismatches) + " mismatches, " + std::to_string(bound_failures) +
             " identity/reverse failures, " + fmt("%.2f s", secs);
  return o;
}

// 4. Pair antisymmetry, adjacency, relabeling and split leakage.
Outcome pair_invariants() {
  Outcome o;
  pairgen::InvariantReport rep;
  std::vector<PreferencePair> pool;
  std::uint32_t s = 0;
  while (rep.pairs < 10000) {
    const auto snap = pairgen::random_snapshot(4000 + s, 6 + static_cast<int>(s % 25), "snap-" + std::to_string(s));
    const auto crit = static_cast<Criterion>(s % 3);
    const auto pairs = build_pairs(snap, crit, 50);
    pairgen::check_pairs(snap, pairs, crit, 50, rep);
    pool.insert(pool.end(), pairs.begin(), pairs.end());
    ++s;
  }
  std::size_t leaks = 0, split_orientation = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto split = split_dataset(pool, 0.8, seed);
    std::set<std::string> train_ids;
    for (const auto& p : split.train) train_ids.insert(p.snapshot_id);
    for (const auto& p : split.test) leaks += train_ids.count(p.snapshot_id);
    std::multiset<std::tuple<std::string, std::size_t, std::size_t>> keys;
    for (const auto& p : split.train) keys.insert({p.snapshot_id, p.card_a, p.card_b});
    for (const auto& p : split.train) split_orientation += keys.count({p.snapshot_id, p.card_b, p.card_a}) != 1;
  }
  o.pass = rep.pairs >= 10000 && rep.violations() == 0 && leaks == 0 && split_orientation == 0;
  o.detail = std::to_string(rep.pairs) + " pairs from " + std::to_string(s) + " snapshots, antisymmetry " +
             std::to_string(rep.antisymmetry_violations) + ", non-adjacent " + std::to_string(rep.non_adjacent) +
             ", missing " + std::to_string(rep.missing_pairs) + ", relabel mismatches " +
             std::to_string(rep.relabel_mismatches) + ", leaked " + std::to_string(leaks);
  return o;
}

// 5. Comparator on the separable set.
Outcome comparator() {
  Outcome o;
  const auto all = compgen::separable_pairs(5000, 5005);
  const std::vector<PreferencePair> train_set(all.begin(), all.begin() + 4000);
  const std::vector<PreferencePair> test_set(all.begin() + 4000, all.end());
  const Hyperparameters h;
  const auto model = train(train_set, h);
  const bool deterministic = serialize_model(model) == serialize_model(train(train_set, h));
  const auto metrics = evaluate(model, test_set);
  std::mt19937 rng(55);
  int broken = 0;
  for (int i = 0; i < 10000; ++i) {
    const auto a = compgen::filler(rng, 1 + static_cast<int>(rng() % 9)) + (rng() % 3 ? "" : " big");
    const auto b = compgen::filler(rng, 1 + static_cast<int>(rng() % 9)) + (rng() % 3 ? "" : " big");
    broken += model.predict(a, b) + model.predict(b, a) != 1.0;
  }
  o.pass = metrics.f1 >= 0.95 && broken == 0 && deterministic;
  o.detail = "held-out F1 " + fmt("%.4f", metrics.f1) + " (n=" + std::to_string(metrics.n) +
             "), antisymmetry failures " + std::to_string(broken) + "/10000, bitwise deterministic " +
             (deterministic ? "yes" : "no");
  return o;
}

// 6. Borda vs a transitive comparator, then round-robin at n = 1000.
Outcome ranking() {
  Outcome o;
  std::mt19937 rng(6006);
  int wrong = 0;
  for (int n = 1; n <= 50; ++n) {
    rankgen::ValueScorer scorer;
    std::vector<Item> items;
    std::vector<int> values(n);
    std::iota(values.begin(), values.end(), 0);
    std::shuffle(values.begin(), values.end(), rng);
    for (int i = 0; i < n; ++i) {
      items.push_back({"item" + std::to_string(i), "text" + std::to_string(i)});
      scorer.value[items.back().text] = values[i];
    }
    auto expected = items;
    std::sort(expected.begin(), expected.end(),
              [&](const Item& a, const Item& b) { return scorer.value.at(a.text) > scorer.value.at(b.text); });
    const auto ranked = sort_items(scorer, items);
    for (int i = 0; i < n; ++i) wrong += ranked.item_ids[i] != expected[i].id;
  }
  const auto model = train(compgen::separable_pairs(2000, 6007));
  std::vector<Item> big;
  for (int i = 0; i < 1000; ++i) {
    big.push_back({"a" + std::to_string(i), compgen::filler(rng, 8 + static_cast<int>(rng() % 12)) +
                                                (rng() % 4 ? "" : " big")});
  }
  RankedList r;
  const double secs = testutil::seconds([&] { r = sort_items(model, big); });
  o.pass = wrong == 0 && r.item_ids.size() == 1000 && secs < 60.0;
  o.detail = std::to_string(wrong) + " misplaced items over n = 1..50, round robin n=1000 in " + fmt("%.2f s", secs);
  return o;
}

// 7. The CLI over the bundled fixtures, twice, then a 1x1 agreement.
Outcome end_to_end() {
  Outcome o;
  testutil::TempDir dir;
  const auto cfg = clirun::quote((fs::path(NEWSDESK_FIXTURES) / "pipeline.toml").string());
  clirun::Result first, second;
  const auto s1 = clirun::quote((dir.path() / "store1").string());
  const auto s2 = clirun::quote((dir.path() / "store2").string());
  const double secs = testutil::seconds([&] { first = clirun::run("--config " + cfg + " --store-dir " + s1 + " run", dir.path()); });
  second = clirun::run("--config " + cfg + " --store-dir " + s2 + " --jobs 2 run", dir.path());
  if (first.exit_code != 0 || second.exit_code != 0) {
    o.pass = false;
    o.detail = "pipeline exited " + std::to_string(first.exit_code) + "/" + std::to_string(second.exit_code) + ": " +
               first.err + second.err;
    return o;
  }
  const auto t1 = clirun::snapshot_tree(dir.path() / "store1");
  const bool identical = t1 == clirun::snapshot_tree(dir.path() / "store2");
  int stages = 0;
  for (const char* st : {"ingest:", "extract:", "pairs:", "train:", "eval:", "rank:", "agree:", "report:"}) {
    stages += first.out.find(st) != std::string::npos;
  }
  const auto self = clirun::run("--config " + cfg + " --store-dir " + s1 + " --outlet daily-ledger agree", dir.path());
  double diag = 0;
  std::size_t dim = 0;
  if (self.exit_code == 0) {
    const auto m = pipeline::agreement_from_json(
        nlohmann::json::parse(read_file(dir.path() / "store1" / "reports" / "agreement.json")));
    dim = m.outlets.size();
    if (dim == 1) diag = m.values[0][0];
  }
  o.pass = identical && stages == 8 && secs < 120.0 && dim == 1 && diag == 1.0 && t1.size() > 30;
  o.detail = std::to_string(stages) + "/8 stages, " + std::to_string(t1.size()) + " files, identical across runs " +
             (identical ? "yes" : "no") + ", " + fmt("%.2f s", secs) + ", self-agreement " + std::to_string(dim) +
             "x" + std::to_string(dim) + " = " + fmt("%.4f", diag);
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"dom-invariants", dom_invariants}, {"failure-modes", failure_modes}, {"kendall-tau", kendall},
      {"pair-invariants", pair_invariants}, {"comparator", comparator},   {"ranking", ranking},
      {"end-to-end", end_to_end}};
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    failed += !o.pass;
    std::printf("%s [%zu] %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
