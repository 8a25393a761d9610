#pragma once

#include <algorithm>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "newsdesk/card_extractor.hpp"
#include "newsdesk/comparator.hpp"
#include "newsdesk/config.hpp"
#include "newsdesk/error.hpp"
#include "newsdesk/geometry.hpp"
#include "newsdesk/html.hpp"
#include "newsdesk/layout.hpp"
#include "newsdesk/link_classifier.hpp"
#include "newsdesk/pair_builder.hpp"
#include "newsdesk/ranker.hpp"
#include "newsdesk/report.hpp"
#include "newsdesk/snapshot_store.hpp"

// Stage outputs live under store_dir:
//   manifest.tsv                          ingest
//   snapshots/<id>/{cards,geometry,extract}.json, articles.jsonl   extract
//   pairs/{train,test}.jsonl              pairs
//   models/<outlet>.mhcmp                 train
//   reports/metrics.json                  eval
//   rankings/<outlet>__set<k>.json        rank
//   reports/agreement.{json,csv}          agree
//   reports/similarity.<fmt>, reports/top_leads.json, reports/agreement.<fmt>   report
namespace newsdesk::pipeline {

// Runs fn(0..n-1) on up to `jobs` threads. Results come back in index
// order; if any call throws, the exception of the lowest index is rethrown.
template <class Fn>
auto parallel_map(std::size_t n, std::size_t jobs, Fn fn) -> std::vector<decltype(fn(std::size_t{0}))> {
  using R = decltype(fn(std::size_t{0}));
  std::vector<std::optional<R>> slots(n);
  std::vector<std::exception_ptr> errors(n);
  auto run = [&](std::size_t worker, std::size_t stride) {
    for (std::size_t i = worker; i < n; i += stride) {
      try {
        slots[i].emplace(fn(i));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::max<std::size_t>(1, std::min(jobs, n));
  if (threads == 1) {
    run(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < threads; ++w) pool.emplace_back(run, w, threads);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<R> out;
  out.reserve(n);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

// Runs one stage; module errors come back with the stage name prefixed.
template <class Fn>
auto with_stage(std::string_view stage, Fn fn) -> decltype(fn()) {
  const std::string prefix = std::string(stage) + ": ";
  try {
    return fn();
  } catch (const Error& e) {
    throw Error(e.code(), prefix + e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    throw Error(ErrorCode::kIoFailure, prefix + e.what());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kIoFailure, prefix + e.what());
  }
}

namespace paths {
inline fs::path snapshot_dir(const PipelineConfig& c, std::string_view id) { return c.store_dir / "snapshots" / std::string(id); }
inline fs::path articles(const PipelineConfig& c) { return c.store_dir / "articles.jsonl"; }
inline fs::path pairs_dir(const PipelineConfig& c) { return c.store_dir / "pairs"; }
inline fs::path models_dir(const PipelineConfig& c) { return c.store_dir / "models"; }
inline fs::path reports_dir(const PipelineConfig& c) { return c.store_dir / "reports"; }
inline fs::path rankings_dir(const PipelineConfig& c) { return c.store_dir / "rankings"; }

// Outlet ids become file names; anything outside [A-Za-z0-9._-] maps to '_'.
inline std::string file_stem(std::string_view outlet) {
  std::string s(outlet);
  for (char& ch : s) {
    const bool ok = (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') || (ch >= '0' && ch <= '9') || ch == '.' ||
                    ch == '_' || ch == '-';
    if (!ok) ch = '_';
  }
  if (s.empty() || s == "." || s == "..") s = "_" + s;
  return s;
}
inline fs::path model(const PipelineConfig& c, std::string_view outlet) {
  return models_dir(c) / (file_stem(outlet) + ".mhcmp");
}
}  // namespace paths

inline std::string json_text(const nlohmann::ordered_json& j) { return j.dump(2) + "\n"; }

inline nlohmann::json read_json(const fs::path& p) { return nlohmann::json::parse(read_file(p)); }

inline std::optional<std::string> outlet_filter(const PipelineConfig& c) {
  return c.outlet.empty() ? std::nullopt : std::optional<std::string>(c.outlet);
}

// ---------------------------------------------------------------- ingest

// Each input is either a bundle (has meta.json) or a directory whose
// immediate subdirectories are bundles, visited in name order.
inline std::vector<fs::path> expand_bundle_inputs(const std::vector<fs::path>& inputs) {
  std::vector<fs::path> out;
  for (const auto& in : inputs) {
    if (!fs::is_directory(in)) throw Error(ErrorCode::kMissingFile, "no such bundle directory: " + in.string());
    if (fs::exists(in / "meta.json") || fs::exists(in / "page.html")) {
      out.push_back(in);
      continue;
    }
    std::vector<fs::path> subdirs;
    for (const auto& e : fs::directory_iterator(in)) {
      if (e.is_directory()) subdirs.push_back(e.path());
    }
    std::sort(subdirs.begin(), subdirs.end());
    if (subdirs.empty()) throw Error(ErrorCode::kMissingFile, "no bundles under " + in.string());
    out.insert(out.end(), subdirs.begin(), subdirs.end());
  }
  return out;
}

inline ErrorCode bundle_issue_code(std::string_view issue) {
  if (issue == "MISSING_BUNDLE" || issue == "MISSING_PAGE" || issue == "MISSING_META" || issue == "MISSING_LINKS") {
    return ErrorCode::kMissingFile;
  }
  if (issue == "MALFORMED_META") return ErrorCode::kMalformedMeta;
  if (issue == "MALFORMED_LINKS" || issue == "EMPTY_LINKS") return ErrorCode::kMalformedLinks;
  if (issue == "MALFORMED_GEOMETRY") return ErrorCode::kMalformedGeometry;
  return ErrorCode::kInvalidBundle;
}

inline std::string run_ingest(const PipelineConfig& cfg) {
  return with_stage("ingest", [&] {
    if (cfg.bundles.empty()) throw Error(ErrorCode::kConfigError, "no bundle inputs given");
    const auto bundles = expand_bundle_inputs(cfg.bundles);
    SnapshotStore store(cfg.store_dir);
    const std::size_t before = store.list_snapshots().size();
    for (const auto& b : bundles) {
      const auto report = validate_bundle(b);
      for (const auto& issue : report.issues) {
        if (issue.severity == Severity::kFatal) {
          throw Error(bundle_issue_code(issue.code), b.string() + ": " + issue.code + ": " + issue.message);
        }
      }
      store.ingest_snapshot(b);
    }
    const std::size_t after = store.list_snapshots().size();
    return std::to_string(bundles.size()) + " bundles ingested, " + std::to_string(after - before) + " new, " +
           std::to_string(after) + " snapshots in store";
  });
}

// ---------------------------------------------------------------- extract

struct ExtractOutcome {
  std::string snapshot_id;
  std::string outlet_id;
  bool kept = false;
  std::string discard_reason;
  std::vector<ArticleCard> cards;
  std::vector<DroppedCard> dropped;
  GeometryMap geometry;
  std::size_t qualifying_links = 0;
};

inline constexpr std::string_view kDuplicateUrl = "DUPLICATE_URL";
inline constexpr std::string_view kNoGeometry = "MISSING_GEOMETRY";

// Pure per-snapshot extraction: cards, geometry, drops and the discard
// decision. Nothing is written here.
inline ExtractOutcome extract_snapshot(const Snapshot& snap, const PipelineConfig& cfg,
                                       const LinkClassifier* classifier) {
  ExtractOutcome out;
  out.snapshot_id = snap.snapshot_id;
  out.outlet_id = snap.outlet_id;
  const auto dom = html::parse_html(snap.html);
  out.qualifying_links = qualifying_urls(snap.links, classifier).size();

  ExtractOptions opts;
  opts.mode = cfg.anchor_mode;
  opts.base_url = snap.base_url;
  opts.classifier = classifier;
  std::vector<ArticleCard> cards;
  try {
    cards = extract_cards(dom, snap.links, opts);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kNoAnchors) throw;
    out.discard_reason = std::string(to_string(ErrorCode::kNoAnchors));
    return out;
  }

  if (snap.geometry) {
    out.geometry = load_geometry_sidecar(*snap.geometry);
  } else {
    out.geometry = estimate_layout(dom, cards, cfg.viewport_w);
  }

  std::vector<ArticleCard> located;
  for (auto& c : cards) {
    if (out.geometry.find(c.card_path) == nullptr) {
      out.dropped.push_back({c, std::string(kNoGeometry)});
    } else {
      located.push_back(std::move(c));
    }
  }
  const auto unique = dedup_cards(located, out.geometry);
  {
    std::set<html::NodePath> keep;
    for (const auto& c : unique) keep.insert(c.card_path);
    for (const auto& c : located) {
      if (!keep.count(c.card_path)) out.dropped.push_back({c, std::string(kDuplicateUrl)});
    }
  }
  std::vector<std::string> texts;
  texts.reserve(unique.size());
  for (const auto& c : unique) texts.push_back(c.full_text);
  auto filtered = filter_cards(unique, texts, snap.links, cfg.text_match_min);
  for (auto& d : filtered.dropped) out.dropped.push_back(std::move(d));
  out.cards = std::move(filtered.kept);

  if (!count_ratio_check(out.cards.size(), out.qualifying_links, cfg.count_ratio_min)) {
    out.discard_reason = "LOW_COUNT_RATIO";
    return out;
  }
  out.kept = true;
  return out;
}

inline nlohmann::ordered_json extract_summary_json(const ExtractOutcome& o) {
  nlohmann::ordered_json j;
  j["snapshot_id"] = o.snapshot_id;
  j["outlet_id"] = o.outlet_id;
  j["status"] = o.kept ? "kept" : "discarded";
  j["discard_reason"] = o.discard_reason;
  j["qualifying_links"] = o.qualifying_links;
  j["n_cards"] = o.cards.size();
  auto dropped = nlohmann::ordered_json::array();
  for (const auto& d : o.dropped) {
    dropped.push_back({{"card_path", d.card.card_path}, {"anchor_url", d.card.anchor_url}, {"reason", d.reason}});
  }
  j["dropped"] = std::move(dropped);
  return j;
}

inline std::optional<LinkClassifier> load_classifier(const PipelineConfig& cfg) {
  if (cfg.link_rules.empty()) return std::nullopt;
  return LinkClassifier::from_file(cfg.link_rules);
}

inline std::string run_extract(const PipelineConfig& cfg) {
  return with_stage("extract", [&] {
    const SnapshotStore store(cfg.store_dir);
    const auto ids = store.list_snapshots(outlet_filter(cfg));
    if (ids.empty()) throw Error(ErrorCode::kEmptyInput, "store has no snapshots; run ingest first");
    const auto classifier = load_classifier(cfg);
    const LinkClassifier* cls = classifier ? &*classifier : nullptr;

    const auto outcomes = parallel_map(ids.size(), cfg.jobs, [&](std::size_t i) {
      auto o = extract_snapshot(store.load(ids[i]), cfg, cls);
      const auto dir = paths::snapshot_dir(cfg, o.snapshot_id);
      write_file(dir / "cards.json", json_text(cards_to_json(o.cards)));
      write_file(dir / "geometry.json", serialize_geometry_sidecar(o.geometry));
      write_file(dir / "extract.json", json_text(extract_summary_json(o)));
      return o;
    });

    std::size_t n_cards = 0, n_dropped = 0, n_discarded = 0;
    std::string articles;
    for (const auto& o : outcomes) {
      n_dropped += o.dropped.size();
      if (!o.kept) {
        ++n_discarded;
        n_dropped += o.cards.size();
        continue;
      }
      n_cards += o.cards.size();
      for (std::size_t k = 0; k < o.cards.size(); ++k) {
        const std::string text = clean_text(o.cards[k].full_text);
        if (text.empty()) continue;
        char num[16];
        std::snprintf(num, sizeof num, "%03zu", k);
        nlohmann::ordered_json j;
        j["id"] = o.snapshot_id + "/" + num;
        j["text"] = text;
        j["outlet_id"] = o.outlet_id;
        articles += j.dump() + "\n";
      }
    }
    write_file(paths::articles(cfg), articles);
    std::string summary = std::to_string(ids.size()) + " snapshots, " + std::to_string(n_cards) + " cards, " +
                          std::to_string(n_dropped) + " dropped";
    if (n_discarded > 0) summary += " (" + std::to_string(n_discarded) + " snapshots discarded)";
    return summary;
  });
}

// ---------------------------------------------------------------- pairs

struct StoredSnapshot {
  std::string snapshot_id;
  std::string outlet_id;
  std::vector<ArticleCard> cards;
  GeometryMap geometry;
};

// Snapshots that survived extraction, in store order.
inline std::vector<StoredSnapshot> load_extracted(const PipelineConfig& cfg) {
  const SnapshotStore store(cfg.store_dir);
  std::vector<StoredSnapshot> out;
  for (const auto& id : store.list_snapshots(outlet_filter(cfg))) {
    const auto dir = paths::snapshot_dir(cfg, id);
    if (!fs::exists(dir / "extract.json")) {
      throw Error(ErrorCode::kMissingFile, "snapshot " + id + " has not been extracted");
    }
    const auto summary = read_json(dir / "extract.json");
    if (summary.at("status").get<std::string>() != "kept") continue;
    StoredSnapshot s;
    s.snapshot_id = id;
    s.outlet_id = summary.at("outlet_id").get<std::string>();
    s.cards = cards_from_json(read_json(dir / "cards.json"));
    s.geometry = load_geometry_sidecar(dir / "geometry.json");
    out.push_back(std::move(s));
  }
  return out;
}

inline SnapshotCards to_snapshot_cards(const StoredSnapshot& s, const PipelineConfig& cfg) {
  SnapshotCards sc;
  sc.outlet_id = s.outlet_id;
  sc.snapshot_id = s.snapshot_id;
  sc.features = prominence_features(s.cards, s.geometry, cfg.band_height);
  for (const auto& c : s.cards) {
    sc.texts.push_back(clean_text(c.full_text));
    sc.rects.push_back(*s.geometry.find(c.card_path));
  }
  return sc;
}

inline std::string run_pairs(const PipelineConfig& cfg) {
  return with_stage("pairs", [&] {
    const auto snaps = load_extracted(cfg);
    if (snaps.empty()) throw Error(ErrorCode::kEmptyInput, "no extracted snapshots; run extract first");
    const auto per_snapshot = parallel_map(snaps.size(), cfg.jobs, [&](std::size_t i) {
      return build_pairs(to_snapshot_cards(snaps[i], cfg), cfg.criterion, cfg.adjacency_gap);
    });
    std::map<std::string, std::vector<PreferencePair>> by_outlet;
    for (const auto& ps : per_snapshot) {
      for (const auto& p : ps) by_outlet[p.outlet_id].push_back(p);
    }
    if (by_outlet.empty()) throw Error(ErrorCode::kEmptyInput, "no labeled pairs could be built");
    std::vector<PreferencePair> train, test;
    for (const auto& [outlet, ps] : by_outlet) {
      auto split = split_dataset(ps, cfg.split_ratio, cfg.seed);
      train.insert(train.end(), split.train.begin(), split.train.end());
      test.insert(test.end(), split.test.begin(), split.test.end());
    }
    write_file(paths::pairs_dir(cfg) / "train.jsonl", pairs_to_jsonl(train));
    write_file(paths::pairs_dir(cfg) / "test.jsonl", pairs_to_jsonl(test));
    return std::to_string(train.size() + test.size()) + " pairs (" + std::to_string(train.size()) + " train, " +
           std::to_string(test.size()) + " test) from " + std::to_string(snaps.size()) + " snapshots, criterion " +
           std::string(to_string(cfg.criterion));
  });
}

// ---------------------------------------------------------------- train / eval

inline std::map<std::string, std::vector<PreferencePair>> load_pairs_by_outlet(const PipelineConfig& cfg,
                                                                              std::string_view split) {
  const auto file = paths::pairs_dir(cfg) / (std::string(split) + ".jsonl");
  std::map<std::string, std::vector<PreferencePair>> out;
  for (auto& p : pairs_from_jsonl(read_file(file))) {
    if (!cfg.outlet.empty() && p.outlet_id != cfg.outlet) continue;
    out[p.outlet_id].push_back(std::move(p));
  }
  return out;
}

inline std::string run_train(const PipelineConfig& cfg) {
  return with_stage("train", [&] {
    const auto by_outlet = load_pairs_by_outlet(cfg, "train");
    if (by_outlet.empty()) throw Error(ErrorCode::kEmptyTrainingSet, "no training pairs");
    std::vector<const std::vector<PreferencePair>*> groups;
    for (const auto& [_, ps] : by_outlet) groups.push_back(&ps);
    const auto models = parallel_map(groups.size(), cfg.jobs,
                                     [&](std::size_t i) { return train(*groups[i], cfg.hyper, cfg.feature_dim); });
    std::size_t n = 0;
    for (const auto& m : models) save_model(m, paths::model(cfg, m.outlet_id));
    for (const auto* g : groups) n += g->size();
    return std::to_string(models.size()) + " models trained on " + std::to_string(n) + " pairs -> " +
           paths::models_dir(cfg).string();
  });
}

// Models under models/, sorted by outlet id, optionally one outlet only.
inline std::vector<ComparatorModel> load_models(const PipelineConfig& cfg) {
  const auto dir = paths::models_dir(cfg);
  if (!fs::is_directory(dir)) throw Error(ErrorCode::kMissingFile, "no models directory; run train first");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".mhcmp") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<ComparatorModel> models;
  for (const auto& f : files) {
    auto m = load_model(f);
    if (!cfg.outlet.empty() && m.outlet_id != cfg.outlet) continue;
    models.push_back(std::move(m));
  }
  std::sort(models.begin(), models.end(),
            [](const ComparatorModel& a, const ComparatorModel& b) { return a.outlet_id < b.outlet_id; });
  if (models.empty()) throw Error(ErrorCode::kEmptyInputs, "no trained models found");
  return models;
}

inline std::string run_eval(const PipelineConfig& cfg) {
  return with_stage("eval", [&] {
    const auto models = load_models(cfg);
    const auto test = load_pairs_by_outlet(cfg, "test");
    nlohmann::ordered_json report = nlohmann::ordered_json::object();
    std::string summary;
    double f1_sum = 0;
    std::size_t evaluated = 0;
    for (const auto& m : models) {
      const auto it = test.find(m.outlet_id);
      if (it == test.end() || it->second.empty()) continue;
      const Metrics met = evaluate(m, it->second);
      report[m.outlet_id] = {{"n", met.n},          {"accuracy", met.accuracy}, {"precision", met.precision},
                             {"recall", met.recall}, {"f1", met.f1},             {"tp", met.tp},
                             {"fp", met.fp},         {"tn", met.tn},             {"fn", met.fn}};
      summary += (summary.empty() ? "" : "; ") + m.outlet_id + " F1 " + fixed4(met.f1) + " acc " +
                 fixed4(met.accuracy) + " (n=" + std::to_string(met.n) + ")";
      f1_sum += met.f1;
      ++evaluated;
    }
    if (evaluated == 0) throw Error(ErrorCode::kEmptyTestSet, "no test pairs for any trained model");
    write_file(paths::reports_dir(cfg) / "metrics.json", json_text(report));
    return "mean F1 " + fixed4(f1_sum / static_cast<double>(evaluated)) + " over " + std::to_string(evaluated) +
           " models: " + summary;
  });
}

// ---------------------------------------------------------------- rank / agree / report

// JSON Lines of {"id", "text"}; other keys are ignored.
inline std::vector<Item> load_article_set(const fs::path& file) {
  const std::string contents = read_file(file);
  std::vector<Item> items;
  std::set<std::string> seen;
  std::size_t start = 0, lineno = 0;
  while (start < contents.size()) {
    std::size_t end = contents.find('\n', start);
    if (end == std::string::npos) end = contents.size();
    const std::string line = contents.substr(start, end - start);
    start = end + 1;
    ++lineno;
    if (text::collapse_whitespace(line).empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      Item it{j.at("id").get<std::string>(), j.at("text").get<std::string>()};
      if (!seen.insert(it.id).second) throw std::invalid_argument("duplicate id " + it.id);
      items.push_back(std::move(it));
    } catch (const std::exception& e) {
      throw Error(ErrorCode::kEmptyInputs,
                  file.string() + " line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return items;
}

inline std::vector<fs::path> article_set_files(const PipelineConfig& cfg) {
  if (!cfg.articles.empty()) return cfg.articles;
  return {paths::articles(cfg)};
}

inline std::vector<std::vector<Item>> load_article_sets(const PipelineConfig& cfg) {
  std::vector<std::vector<Item>> sets;
  for (const auto& f : article_set_files(cfg)) {
    auto items = load_article_set(f);
    if (items.empty()) throw Error(ErrorCode::kEmptyInputs, "article set " + f.string() + " is empty");
    sets.push_back(std::move(items));
  }
  return sets;
}

inline fs::path ranking_file(const PipelineConfig& cfg, std::string_view outlet, std::size_t set_index) {
  return paths::rankings_dir(cfg) / (paths::file_stem(outlet) + "__set" + std::to_string(set_index) + ".json");
}

inline std::string run_rank(const PipelineConfig& cfg) {
  return with_stage("rank", [&] {
    const auto models = load_models(cfg);
    const auto sets = load_article_sets(cfg);
    const std::size_t jobs_n = models.size() * sets.size();
    parallel_map(jobs_n, cfg.jobs, [&](std::size_t k) {
      const auto& m = models[k / sets.size()];
      const std::size_t s = k % sets.size();
      emit_report(sort_items(m, sets[s]), ranking_file(cfg, m.outlet_id, s), ReportFormat::kJson);
      return 0;
    });
    return std::to_string(jobs_n) + " rankings (" + std::to_string(models.size()) + " models x " +
           std::to_string(sets.size()) + " sets) -> " + paths::rankings_dir(cfg).string();
  });
}

inline AgreementMatrix compute_agreement(const PipelineConfig& cfg) {
  const auto models = load_models(cfg);
  const auto sets = load_article_sets(cfg);
  return agreement_matrix(models, sets);
}

inline std::string run_agree(const PipelineConfig& cfg) {
  return with_stage("agree", [&] {
    const auto m = compute_agreement(cfg);
    const auto json_path = paths::reports_dir(cfg) / "agreement.json";
    emit_report(m, json_path, ReportFormat::kJson);
    emit_report(m, paths::reports_dir(cfg) / "agreement.csv", ReportFormat::kCsv);
    const auto n = std::to_string(m.outlets.size());
    return n + "x" + n + " agreement matrix -> " + json_path.string();
  });
}

inline AgreementMatrix agreement_from_json(const nlohmann::json& j) {
  AgreementMatrix m;
  m.outlets = j.at("outlets").get<std::vector<std::string>>();
  m.values = j.at("values").get<std::vector<std::vector<double>>>();
  return m;
}

inline std::string run_report(const PipelineConfig& cfg) {
  return with_stage("report", [&] {
    const auto dir = paths::reports_dir(cfg);
    const std::string ext = cfg.report_format == ReportFormat::kCsv ? ".csv" : ".json";

    // Topical similarity of each outlet's extracted articles.
    std::map<std::string, std::vector<std::string>> corpora;
    {
      const std::string contents = read_file(paths::articles(cfg));
      std::size_t start = 0;
      while (start < contents.size()) {
        std::size_t end = contents.find('\n', start);
        if (end == std::string::npos) end = contents.size();
        const std::string line = contents.substr(start, end - start);
        start = end + 1;
        if (line.empty()) continue;
        const auto j = nlohmann::json::parse(line);
        const auto outlet = j.at("outlet_id").get<std::string>();
        if (!cfg.outlet.empty() && outlet != cfg.outlet) continue;
        corpora[outlet].push_back(j.at("text").get<std::string>());
      }
    }
    emit_report(centroid_similarity(corpora), dir / ("similarity" + ext), cfg.report_format);

    // Top-k leads per model and article set, from the rank stage output.
    const auto models = load_models(cfg);
    const std::size_t n_sets = article_set_files(cfg).size();
    nlohmann::ordered_json leads = nlohmann::ordered_json::object();
    for (const auto& m : models) {
      auto per_set = nlohmann::ordered_json::array();
      for (std::size_t s = 0; s < n_sets; ++s) {
        const auto file = ranking_file(cfg, m.outlet_id, s);
        if (!fs::exists(file)) throw Error(ErrorCode::kMissingFile, file.string() + " missing; run rank first");
        const auto j = read_json(file);
        RankedList r;
        r.item_ids = j.at("item_ids").get<std::vector<std::string>>();
        r.model_outlet = j.at("model_outlet").get<std::string>();
        per_set.push_back(top_k(r, cfg.top_k));
      }
      leads[m.outlet_id] = std::move(per_set);
    }
    write_file(dir / "top_leads.json", json_text(leads));

    const auto agreement_json = dir / "agreement.json";
    if (!fs::exists(agreement_json)) throw Error(ErrorCode::kMissingFile, "agreement.json missing; run agree first");
    emit_report(agreement_from_json(read_json(agreement_json)), dir / ("agreement" + ext), cfg.report_format);
    return "similarity, top leads and agreement reports -> " + dir.string();
  });
}

}  // namespace newsdesk::pipeline
