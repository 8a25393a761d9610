#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <map>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "newsdesk/error.hpp"
#include "newsdesk/pair_builder.hpp"
#include "newsdesk/snapshot_store.hpp"
#include "newsdesk/text.hpp"

namespace newsdesk {

inline constexpr std::uint32_t kDefaultFeatureDim = 1U << 18;

// Reserved slots ahead of the hashed n-gram range.
inline constexpr std::uint32_t kSharedTokensFeature = 0;
inline constexpr std::uint32_t kLengthDiffFeature = 1;
inline constexpr std::uint32_t kReservedFeatures = 2;

struct FeatureVector {
  std::uint32_t dim = 0;
  std::vector<std::pair<std::uint32_t, double>> values;  // sorted by index, no zeros

  double at(std::uint32_t index) const {
    const auto it = std::lower_bound(values.begin(), values.end(), index,
                                     [](const auto& kv, std::uint32_t i) { return kv.first < i; });
    return (it != values.end() && it->first == index) ? it->second : 0.0;
  }

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

namespace detail {

inline std::uint32_t hashed_slot(std::string_view key, std::uint32_t dim) {
  return kReservedFeatures + static_cast<std::uint32_t>(text::fnv1a(key) % (dim - kReservedFeatures));
}

inline void add_ngrams(const std::vector<std::string>& tokens, char side, std::uint32_t dim,
                       std::map<std::uint32_t, double>& acc) {
  std::string key;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    key.assign({side, '\x1f', '1', '\x1f'});
    key += tokens[i];
    acc[hashed_slot(key, dim)] += 1.0;
    if (i + 1 < tokens.size()) {
      key.assign({side, '\x1f', '2', '\x1f'});
      key += tokens[i];
      key.push_back(' ');
      key += tokens[i + 1];
      acc[hashed_slot(key, dim)] += 1.0;
    }
  }
}

}  // namespace detail

// Side-tagged unigrams and bigrams of both texts hashed into `dim` slots,
// plus the multiset token overlap and the signed token-count difference.
inline FeatureVector featurize_pair(std::string_view text_a, std::string_view text_b,
                                    std::uint32_t dim = kDefaultFeatureDim) {
  if (dim <= kReservedFeatures || !std::has_single_bit(dim)) {
    throw Error(ErrorCode::kInvalidThreshold, "feature dimension must be a power of two above 2");
  }
  const auto ta = text::tokenize(text_a);
  const auto tb = text::tokenize(text_b);
  std::map<std::uint32_t, double> acc;
  detail::add_ngrams(ta, 'A', dim, acc);
  detail::add_ngrams(tb, 'B', dim, acc);

  std::map<std::string_view, int> count_a;
  for (const auto& t : ta) ++count_a[t];
  double shared = 0;
  for (const auto& t : tb) {
    auto it = count_a.find(t);
    if (it != count_a.end() && it->second > 0) {
      --it->second;
      shared += 1;
    }
  }
  acc[kSharedTokensFeature] += shared;
  acc[kLengthDiffFeature] += static_cast<double>(ta.size()) - static_cast<double>(tb.size());

  FeatureVector fv;
  fv.dim = dim;
  for (const auto& [idx, v] : acc) {
    if (v != 0.0) fv.values.emplace_back(idx, v);
  }
  return fv;
}

struct Hyperparameters {
  double learning_rate = 0.1;
  std::uint32_t epochs = 5;
  double l2 = 1e-6;
  std::uint64_t seed = 0;

  friend bool operator==(const Hyperparameters&, const Hyperparameters&) = default;
};

inline constexpr std::uint8_t kModelFormatVersion = 1;

struct ComparatorModel {
  std::vector<double> weights;
  double bias = 0;
  std::uint32_t dim = kDefaultFeatureDim;
  Criterion criterion = Criterion::kSize;
  std::string outlet_id;
  Hyperparameters hyper;
  std::uint8_t version = kModelFormatVersion;

  double margin(const FeatureVector& fv) const {
    double z = bias;
    for (const auto& [idx, v] : fv.values) z += weights[idx] * v;
    return z;
  }

  // Raw, order-sensitive P(a preferred over b).
  double raw_probability(std::string_view a, std::string_view b) const {
    const double z = margin(featurize_pair(a, b, dim));
    return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
  }

  // Symmetrized preference: (s(a,b) + 1 - s(b,a)) / 2. Computed once in a
  // canonical orientation so that predict(a,b) + predict(b,a) == 1 holds in
  // floating point, not just algebraically.
  double predict(std::string_view a, std::string_view b) const {
    if (a == b) return 0.5;
    const bool swapped = b < a;
    const std::string_view first = swapped ? b : a;
    const std::string_view second = swapped ? a : b;
    const double p = 0.5 + (raw_probability(first, second) - raw_probability(second, first)) * 0.5;
    // hi in [0.5, 1] makes 1 - hi exact.
    const double hi = p >= 0.5 ? p : 1.0 - p;
    const double lo = 1.0 - hi;
    const bool first_wins = p >= 0.5;
    return (first_wins != swapped) ? hi : lo;
  }

  friend bool operator==(const ComparatorModel&, const ComparatorModel&) = default;
};

inline double predict(const ComparatorModel& model, std::string_view a, std::string_view b) {
  return model.predict(a, b);
}

// Anything that scores "a over b" in [0, 1] can rank and be evaluated.
template <class S>
concept PairScorer = requires(const S& s, std::string_view a, std::string_view b) {
  { s.predict(a, b) } -> std::convertible_to<double>;
};

namespace detail {

inline double log_loss(double z, int y) {
  // log(1 + exp(-t)) with t = z for y = 1, -z for y = 0, in a stable form.
  const double t = y == 1 ? z : -z;
  return t > 0 ? std::log1p(std::exp(-t)) : -t + std::log1p(std::exp(t));
}

inline double sigmoid(double z) {
  return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

}  // namespace detail

// Logistic-loss linear model fitted by plain SGD. Each epoch visits the
// pairs in a seeded Fisher-Yates order; L2 decay touches only the active
// coordinates of each example. When `epoch_losses` is given it receives
// the mean training loss after every epoch.
inline ComparatorModel train(const std::vector<PreferencePair>& pairs, const Hyperparameters& hyper = {},
                             std::uint32_t dim = kDefaultFeatureDim, std::vector<double>* epoch_losses = nullptr) {
  if (pairs.empty()) throw Error(ErrorCode::kEmptyTrainingSet, "no training pairs");
  if (!(hyper.learning_rate > 0) || hyper.epochs == 0 || !(hyper.l2 >= 0)) {
    throw Error(ErrorCode::kConfigError, "learning_rate and epochs must be positive, l2 non-negative");
  }
  ComparatorModel model;
  model.dim = dim;
  model.weights.assign(dim, 0.0);
  model.criterion = pairs.front().criterion;
  model.outlet_id = pairs.front().outlet_id;
  for (const auto& p : pairs) {
    if (p.outlet_id != model.outlet_id) {
      model.outlet_id = "mixed";
      break;
    }
  }
  model.hyper = hyper;

  std::vector<FeatureVector> xs;
  xs.reserve(pairs.size());
  for (const auto& p : pairs) xs.push_back(featurize_pair(p.text_a, p.text_b, dim));

  std::vector<std::size_t> order(pairs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::mt19937_64 rng(hyper.seed);
  const double lr = hyper.learning_rate;
  for (std::uint32_t epoch = 0; epoch < hyper.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[static_cast<std::size_t>(rng() % i)]);
    }
    for (std::size_t k : order) {
      const double g = detail::sigmoid(model.margin(xs[k])) - pairs[k].label;
      for (const auto& [idx, v] : xs[k].values) {
        double& w = model.weights[idx];
        w -= lr * (g * v + hyper.l2 * w);
      }
      model.bias -= lr * g;
    }
    if (epoch_losses != nullptr) {
      double total = 0;
      for (std::size_t k = 0; k < xs.size(); ++k) total += detail::log_loss(model.margin(xs[k]), pairs[k].label);
      epoch_losses->push_back(total / static_cast<double>(xs.size()));
    }
  }
  return model;
}

struct Metrics {
  double accuracy = 0;
  double f1 = 0;
  double precision = 0;
  double recall = 0;
  std::size_t n = 0;
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
};

// Label 1 is the positive class.
inline Metrics compute_metrics(std::span<const int> predicted, std::span<const int> gold) {
  if (predicted.size() != gold.size()) throw Error(ErrorCode::kEmptyTestSet, "prediction/label count mismatch");
  Metrics m;
  m.n = gold.size();
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (predicted[i] == 1) {
      (gold[i] == 1 ? m.tp : m.fp)++;
    } else {
      (gold[i] == 1 ? m.fn : m.tn)++;
    }
  }
  auto ratio = [](std::size_t num, std::size_t den) { return den == 0 ? 0.0 : static_cast<double>(num) / den; };
  m.accuracy = ratio(m.tp + m.tn, m.n);
  m.precision = ratio(m.tp, m.tp + m.fp);
  m.recall = ratio(m.tp, m.tp + m.fn);
  m.f1 = (m.precision > 0 && m.recall > 0) ? 2 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
  return m;
}

// Predicts label 1 when the scorer gives strictly more than 0.5.
template <PairScorer S>
Metrics evaluate(const S& scorer, const std::vector<PreferencePair>& test_pairs) {
  if (test_pairs.empty()) throw Error(ErrorCode::kEmptyTestSet, "no test pairs");
  std::vector<int> predicted;
  std::vector<int> gold;
  predicted.reserve(test_pairs.size());
  gold.reserve(test_pairs.size());
  for (const auto& p : test_pairs) {
    predicted.push_back(scorer.predict(p.text_a, p.text_b) > 0.5 ? 1 : 0);
    gold.push_back(p.label);
  }
  return compute_metrics(predicted, gold);
}

namespace detail {

class ByteWriter {
 public:
  void bytes(std::string_view s) { out_.append(s); }
  void u8(std::uint8_t v) { out_.push_back(static_cast<char>(v)); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

class ByteReader {
 public:
  explicit ByteReader(std::string_view data) : data_(data) {}

  std::string_view bytes(std::size_t n) {
    need(n);
    const auto s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::uint8_t u8() { return static_cast<std::uint8_t>(bytes(1)[0]); }
  std::uint32_t u32() {
    std::uint32_t v = 0;
    const auto b = bytes(4);
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<std::uint8_t>(b[i])) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    std::uint64_t v = 0;
    const auto b = bytes(8);
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<std::uint8_t>(b[i])) << (8 * i);
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::size_t remaining() const { return data_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (data_.size() - pos_ < n) throw Error(ErrorCode::kCorruptModel, "model file is truncated");
  }

  std::string_view data_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline constexpr std::string_view kModelMagic = "MHCMP";

// Layout (little-endian): magic, u8 version, u32 dim, f64 bias,
// u8 criterion, u32 outlet length + bytes, f64 learning_rate, u32 epochs,
// f64 l2, u64 seed, dim x f64 weights. See docs/model_format.md.
inline std::string serialize_model(const ComparatorModel& m) {
  if (m.weights.size() != m.dim) throw Error(ErrorCode::kCorruptModel, "weights length differs from dim");
  detail::ByteWriter w;
  w.bytes(kModelMagic);
  w.u8(kModelFormatVersion);
  w.u32(m.dim);
  w.f64(m.bias);
  w.u8(static_cast<std::uint8_t>(m.criterion));
  w.u32(static_cast<std::uint32_t>(m.outlet_id.size()));
  w.bytes(m.outlet_id);
  w.f64(m.hyper.learning_rate);
  w.u32(m.hyper.epochs);
  w.f64(m.hyper.l2);
  w.u64(m.hyper.seed);
  for (double v : m.weights) w.f64(v);
  return w.take();
}

inline ComparatorModel deserialize_model(std::string_view data) {
  if (data.size() < kModelMagic.size() || data.substr(0, kModelMagic.size()) != kModelMagic) {
    throw Error(ErrorCode::kBadMagic, "not a comparator model file");
  }
  detail::ByteReader r(data.substr(kModelMagic.size()));
  ComparatorModel m;
  m.version = r.u8();
  if (m.version != kModelFormatVersion) {
    throw Error(ErrorCode::kVersionMismatch, "unsupported model version " + std::to_string(m.version));
  }
  m.dim = r.u32();
  if (m.dim <= kReservedFeatures || !std::has_single_bit(m.dim)) {
    throw Error(ErrorCode::kCorruptModel, "model dimension is not a power of two");
  }
  m.bias = r.f64();
  const auto crit = r.u8();
  if (crit > static_cast<std::uint8_t>(Criterion::kCombined)) throw Error(ErrorCode::kCorruptModel, "bad criterion");
  m.criterion = static_cast<Criterion>(crit);
  const auto outlet_len = r.u32();
  m.outlet_id = std::string(r.bytes(outlet_len));
  m.hyper.learning_rate = r.f64();
  m.hyper.epochs = r.u32();
  m.hyper.l2 = r.f64();
  m.hyper.seed = r.u64();
  if (r.remaining() != static_cast<std::size_t>(m.dim) * 8) {
    throw Error(ErrorCode::kCorruptModel, "weight block size does not match dim");
  }
  m.weights.resize(m.dim);
  for (auto& v : m.weights) v = r.f64();
  return m;
}

inline void save_model(const ComparatorModel& model, const std::filesystem::path& path) {
  write_file(path, serialize_model(model));
}

inline ComparatorModel load_model(const std::filesystem::path& path) { return deserialize_model(read_file(path)); }

}  // namespace newsdesk
