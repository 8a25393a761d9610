#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "newsdesk/comparator.hpp"
#include "newsdesk/error.hpp"
#include "newsdesk/text.hpp"

namespace newsdesk {

struct Item {
  std::string id;
  std::string text;
};

struct RankedList {
  std::vector<std::string> item_ids;
  std::vector<double> scores;  // Borda score of item_ids[i]
  std::string model_outlet;
};

// Round-robin Borda scores: one point per comparison won (p > 0.5), half a
// point each on an exact 0.5. Each unordered pair is scored once; the
// scorer is assumed antisymmetric.
template <PairScorer S>
std::vector<double> round_robin_scores(const S& scorer, const std::vector<std::string>& texts) {
  std::vector<double> scores(texts.size(), 0.0);
  for (std::size_t i = 0; i < texts.size(); ++i) {
    for (std::size_t j = i + 1; j < texts.size(); ++j) {
      const double p = scorer.predict(texts[i], texts[j]);
      if (p > 0.5) {
        scores[i] += 1;
      } else if (p < 0.5) {
        scores[j] += 1;
      } else {
        scores[i] += 0.5;
        scores[j] += 0.5;
      }
    }
  }
  return scores;
}

// Descending Borda score, ties by ascending id. Items are put in id order
// before scoring so the result does not depend on input order.
template <PairScorer S>
RankedList sort_items(const S& scorer, std::vector<Item> items, std::string model_outlet = {}) {
  std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) { return a.id < b.id; });
  std::vector<std::string> texts;
  texts.reserve(items.size());
  for (const auto& it : items) texts.push_back(it.text);
  const auto scores = round_robin_scores(scorer, texts);
  std::vector<std::size_t> order(items.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  RankedList out;
  out.model_outlet = std::move(model_outlet);
  for (std::size_t k : order) {
    out.item_ids.push_back(items[k].id);
    out.scores.push_back(scores[k]);
  }
  return out;
}

inline RankedList sort_items(const ComparatorModel& model, std::vector<Item> items) {
  return sort_items(model, std::move(items), model.outlet_id);
}

namespace detail {

// Inversions of `seq` by merge sort.
inline std::uint64_t count_inversions(std::vector<std::size_t>& seq) {
  std::vector<std::size_t> buf(seq.size());
  std::uint64_t inversions = 0;
  for (std::size_t width = 1; width < seq.size(); width *= 2) {
    for (std::size_t lo = 0; lo < seq.size(); lo += 2 * width) {
      const std::size_t mid = std::min(lo + width, seq.size());
      const std::size_t hi = std::min(lo + 2 * width, seq.size());
      std::size_t i = lo, j = mid, k = lo;
      while (i < mid && j < hi) {
        if (seq[i] <= seq[j]) {
          buf[k++] = seq[i++];
        } else {
          inversions += mid - i;
          buf[k++] = seq[j++];
        }
      }
      while (i < mid) buf[k++] = seq[i++];
      while (j < hi) buf[k++] = seq[j++];
    }
    seq.swap(buf);
  }
  return inversions;
}

}  // namespace detail

// Kendall's tau-a between two tie-free rankings of the same items, in
// O(n log n): discordant pairs are the inversions of rank_b positions read
// in rank_a order. Rankings of fewer than two items give 1.
template <class Id>
double kendall_tau(const std::vector<Id>& rank_a, const std::vector<Id>& rank_b) {
  if (rank_a.size() != rank_b.size()) throw Error(ErrorCode::kMismatchedItems, "rankings differ in length");
  const std::size_t n = rank_a.size();
  std::map<Id, std::size_t> pos_b;
  for (std::size_t i = 0; i < n; ++i) {
    if (!pos_b.emplace(rank_b[i], i).second) throw Error(ErrorCode::kMismatchedItems, "duplicate item in ranking");
  }
  std::vector<std::size_t> seq;
  seq.reserve(n);
  std::map<Id, bool> seen;
  for (const auto& id : rank_a) {
    const auto it = pos_b.find(id);
    if (it == pos_b.end()) throw Error(ErrorCode::kMismatchedItems, "rankings cover different items");
    if (!seen.emplace(id, true).second) throw Error(ErrorCode::kMismatchedItems, "duplicate item in ranking");
    seq.push_back(it->second);
  }
  if (n < 2) return 1.0;
  const std::uint64_t total = static_cast<std::uint64_t>(n) * (n - 1) / 2;
  const std::uint64_t discordant = detail::count_inversions(seq);
  const std::uint64_t concordant = total - discordant;
  return (static_cast<double>(concordant) - static_cast<double>(discordant)) / static_cast<double>(total);
}

struct AgreementMatrix {
  std::vector<std::string> outlets;
  std::vector<std::vector<double>> values;
};

// Entry (i, j) is the mean over article sets of tau between model i's and
// model j's rankings of that set. Each (model, set) ranking is computed
// once, so the matrix is exactly symmetric.
template <PairScorer S>
AgreementMatrix agreement_matrix(const std::vector<const S*>& models, const std::vector<std::string>& outlets,
                                 const std::vector<std::vector<Item>>& article_sets) {
  if (models.empty() || article_sets.empty() || outlets.size() != models.size()) {
    throw Error(ErrorCode::kEmptyInputs, "need at least one model (with an outlet name each) and one article set");
  }
  const std::size_t m = models.size();
  std::vector<std::vector<std::vector<std::string>>> ranked(m);
  for (std::size_t i = 0; i < m; ++i) {
    for (const auto& set : article_sets) ranked[i].push_back(sort_items(*models[i], set).item_ids);
  }
  AgreementMatrix out;
  out.outlets = outlets;
  out.values.assign(m, std::vector<double>(m, 0.0));
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i; j < m; ++j) {
      double sum = 0;
      for (std::size_t k = 0; k < article_sets.size(); ++k) sum += kendall_tau(ranked[i][k], ranked[j][k]);
      out.values[i][j] = out.values[j][i] = sum / static_cast<double>(article_sets.size());
    }
  }
  return out;
}

inline AgreementMatrix agreement_matrix(const std::vector<ComparatorModel>& models,
                                        const std::vector<std::vector<Item>>& article_sets) {
  std::vector<const ComparatorModel*> ptrs;
  std::vector<std::string> names;
  for (const auto& m : models) {
    ptrs.push_back(&m);
    names.push_back(m.outlet_id);
  }
  return agreement_matrix(ptrs, names, article_sets);
}

// Topical-similarity control: per outlet, the mean of L2-normalized term
// frequency vectors; entries are cosine similarities of those centroids.
inline AgreementMatrix centroid_similarity(const std::map<std::string, std::vector<std::string>>& corpora) {
  if (corpora.empty()) throw Error(ErrorCode::kEmptyCorpus, "no corpora");
  std::vector<std::unordered_map<std::string, double>> centroids;
  AgreementMatrix out;
  for (const auto& [outlet, docs] : corpora) {
    if (docs.empty()) throw Error(ErrorCode::kEmptyCorpus, "corpus for " + outlet + " is empty");
    std::unordered_map<std::string, double> centroid;
    for (const auto& doc : docs) {
      std::unordered_map<std::string, double> tf;
      for (auto& t : text::tokenize(doc)) tf[std::move(t)] += 1;
      double norm = 0;
      for (const auto& [_, v] : tf) norm += v * v;
      norm = std::sqrt(norm);
      if (norm == 0) continue;
      for (const auto& [t, v] : tf) centroid[t] += v / norm / static_cast<double>(docs.size());
    }
    out.outlets.push_back(outlet);
    centroids.push_back(std::move(centroid));
  }
  const std::size_t m = centroids.size();
  std::vector<double> norms(m);
  for (std::size_t i = 0; i < m; ++i) {
    std::vector<double> vals;
    for (const auto& [_, v] : centroids[i]) vals.push_back(v);
    std::sort(vals.begin(), vals.end());
    double s = 0;
    for (double v : vals) s += v * v;
    norms[i] = std::sqrt(s);
  }
  out.values.assign(m, std::vector<double>(m, 0.0));
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i; j < m; ++j) {
      // Accumulate in sorted-term order for a deterministic sum.
      std::map<std::string_view, double> small;
      const auto& a = centroids[i].size() <= centroids[j].size() ? centroids[i] : centroids[j];
      const auto& b = centroids[i].size() <= centroids[j].size() ? centroids[j] : centroids[i];
      for (const auto& [t, v] : a) {
        if (const auto it = b.find(t); it != b.end()) small.emplace(t, v * it->second);
      }
      double dot = 0;
      for (const auto& [_, v] : small) dot += v;
      const double denom = norms[i] * norms[j];
      const double cos = denom == 0 ? 0.0 : dot / denom;
      out.values[i][j] = out.values[j][i] = (i == j && denom != 0) ? 1.0 : cos;
    }
  }
  return out;
}

inline std::vector<std::string> top_k(const RankedList& ranked, std::size_t k) {
  const std::size_t n = std::min(k, ranked.item_ids.size());
  return {ranked.item_ids.begin(), ranked.item_ids.begin() + static_cast<std::ptrdiff_t>(n)};
}

}  // namespace newsdesk
