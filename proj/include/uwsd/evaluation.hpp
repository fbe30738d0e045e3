#pragma once

// Accuracy reports: per word and global, with JSON, text-table and CSV output.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "uwsd/dataset.hpp"
#include "uwsd/engine.hpp"
#include "uwsd/error.hpp"
#include "uwsd/util.hpp"

namespace uwsd {

struct ReportRow {
  std::size_t instances = 0;
  double hits = 0.0;  // integral except in expected-value reports
  std::size_t errors = 0;

  // Percent; 0 for an empty row.
  double accuracy() const { return instances == 0 ? 0.0 : 100.0 * hits / static_cast<double>(instances); }

  bool operator==(const ReportRow&) const = default;
};

struct EvaluationReport {
  std::string strategy;
  std::string dataset_fingerprint;
  std::map<std::string, ReportRow> per_word;
  ReportRow global;
  bool strict = true;
  std::size_t skipped = 0;  // instances excluded in skip mode
  nlohmann::json config = nlohmann::json::object();
  std::vector<std::string> diagnostics;  // not serialized

  // Conservation and range checks.
  void validate() const {
    ReportRow sum;
    for (const auto& [word, row] : per_word) {
      if (row.hits < 0.0 || row.hits > static_cast<double>(row.instances))
        throw Error(ErrorKind::schema, "report row '" + word + "' has hits outside [0, instances]");
      sum.instances += row.instances;
      sum.hits += row.hits;
      sum.errors += row.errors;
    }
    if (sum.instances != global.instances || std::abs(sum.hits - global.hits) > 1e-6 || sum.errors != global.errors)
      throw Error(ErrorKind::schema, "report '" + strategy + "': per-word rows do not add up to the global row");
  }

  bool operator==(const EvaluationReport& o) const {
    return strategy == o.strategy && dataset_fingerprint == o.dataset_fingerprint && per_word == o.per_word &&
           global == o.global && strict == o.strict && skipped == o.skipped && config == o.config;
  }
};

struct EvalOptions {
  std::string strategy = "unnamed";
  bool strict = true;      // unscorable instances count as misses; otherwise excluded
  unsigned jobs = 0;       // 0 = hardware concurrency
  nlohmann::json config = nlohmann::json::object();
};

namespace detail {

struct Outcome {
  std::optional<int> predicted;
  std::string error;
};

inline Outcome run_one(const Predictor& predictor, const Instance& inst, const SenseInventory& inv) {
  try {
    Prediction p = predictor(inst, inv);
    if (!inv.contains(p.predicted_sense))
      return {std::nullopt, inst.id + ": predicted sense " + std::to_string(p.predicted_sense) + " is not in the inventory"};
    for (const auto& s : inv.senses)
      if (!p.per_sense_scores.count(s.id))
        return {std::nullopt, inst.id + ": no score for sense " + std::to_string(s.id)};
    return {p.predicted_sense, {}};
  } catch (const std::exception& e) {
    return {std::nullopt, e.what()};
  }
}

}  // namespace detail

// Runs the predictor over every test instance. Predictions are made in
// parallel; aggregation is a serial pass in dataset order.
inline EvaluationReport evaluate(const Dataset& dataset, const Predictor& predictor, const EvalOptions& options = {}) {
  struct Item {
    const Instance* instance;
    const SenseInventory* inventory;
  };
  std::vector<Item> items;
  for (const auto& [_, data] : dataset.words)
    for (const auto& inst : data.test) items.push_back({&inst, &data.inventory});

  std::vector<detail::Outcome> outcomes(items.size());
  unsigned jobs = options.jobs ? options.jobs : std::max(1u, std::thread::hardware_concurrency());
  jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, std::max<std::size_t>(1, items.size())));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < items.size(); i = next++)
      outcomes[i] = detail::run_one(predictor, *items[i].instance, *items[i].inventory);
  };
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < jobs; ++t) pool.emplace_back(worker);
  }

  EvaluationReport report;
  report.strategy = options.strategy;
  report.dataset_fingerprint = dataset_fingerprint(dataset);
  report.strict = options.strict;
  report.config = options.config;
  for (const auto& [word, _] : dataset.words) report.per_word[word];
  for (std::size_t i = 0; i < items.size(); ++i) {
    const Instance& inst = *items[i].instance;
    ReportRow& row = report.per_word[inst.target_word];
    auto outcome = outcomes[i];
    if (outcome.predicted && !inst.gold_sense) outcome = {std::nullopt, inst.id + ": no gold sense"};
    if (!outcome.predicted) {
      ++row.errors;
      report.diagnostics.push_back(outcome.error);
      if (!options.strict) {
        ++report.skipped;
        continue;
      }
      ++row.instances;
      continue;
    }
    ++row.instances;
    if (*outcome.predicted == *inst.gold_sense) row.hits += 1.0;
  }
  for (const auto& [_, row] : report.per_word) {
    report.global.instances += row.instances;
    report.global.hits += row.hits;
    report.global.errors += row.errors;
  }
  return report;
}

// The random-option baseline as expected values: each word contributes
// n_w / k_w hits.
inline EvaluationReport expected_random_report(const Dataset& dataset) {
  EvaluationReport report;
  report.strategy = "RO-Baseline";
  report.dataset_fingerprint = dataset_fingerprint(dataset);
  report.config = {{"method", "random-expected"}};
  for (const auto& [word, data] : dataset.words) {
    ReportRow& row = report.per_word[word];
    row.instances = data.test.size();
    row.hits = static_cast<double>(data.test.size()) / static_cast<double>(data.inventory.size());
    report.global.instances += row.instances;
    report.global.hits += row.hits;
  }
  return report;
}

// ---------------------------------------------------------------------------
// Serialization

namespace detail {

inline nlohmann::ordered_json row_to_json(const ReportRow& row) {
  nlohmann::ordered_json j;
  j["instances"] = row.instances;
  if (row.hits == std::floor(row.hits)) j["hits"] = static_cast<long long>(row.hits);
  else j["hits"] = row.hits;
  j["accuracy"] = round2(row.accuracy());
  j["errors"] = row.errors;
  return j;
}

inline ReportRow row_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("instances") || !j.contains("hits"))
    throw Error(ErrorKind::schema, "report row needs 'instances' and 'hits'");
  ReportRow row;
  row.instances = j.at("instances").get<std::size_t>();
  row.hits = j.at("hits").get<double>();
  row.errors = j.value("errors", std::size_t{0});
  return row;
}

}  // namespace detail

inline std::string report_to_json(const EvaluationReport& report) {
  nlohmann::ordered_json j;
  j["strategy"] = report.strategy;
  j["dataset_fingerprint"] = report.dataset_fingerprint;
  nlohmann::ordered_json words = nlohmann::ordered_json::object();
  for (const auto& [word, row] : report.per_word) words[word] = detail::row_to_json(row);
  j["per_word"] = words;
  j["global"] = detail::row_to_json(report.global);
  j["mode"] = report.strict ? "strict" : "skip";
  j["skipped"] = report.skipped;
  j["config"] = nlohmann::ordered_json::parse(report.config.dump());
  return j.dump(2) + "\n";
}

inline EvaluationReport report_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::parse, std::string("report is not valid JSON: ") + e.what());
  }
  try {
    EvaluationReport r;
    r.strategy = j.at("strategy").get<std::string>();
    r.dataset_fingerprint = j.at("dataset_fingerprint").get<std::string>();
    for (const auto& [word, row] : j.at("per_word").items()) r.per_word[word] = detail::row_from_json(row);
    r.global = detail::row_from_json(j.at("global"));
    r.strict = j.value("mode", std::string("strict")) == "strict";
    r.skipped = j.value("skipped", std::size_t{0});
    r.config = j.value("config", nlohmann::json::object());
    r.validate();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::schema, std::string("report JSON: ") + e.what());
  }
}

inline EvaluationReport load_report(const fs::path& file) {
  try {
    return report_from_json(detail::read_file(file));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::io) throw;
    throw file_error(e.kind(), file, 0, e.what());
  }
}

// Human-readable per-word table followed by the global row.
inline std::string format_report(const EvaluationReport& report) {
  std::ostringstream out;
  char line[160];
  out << "Strategy: " << report.strategy << "\n";
  std::snprintf(line, sizeof line, "%-10s %10s %10s %9s %7s\n", "word", "instances", "hits", "accuracy", "errors");
  out << line;
  auto emit = [&](const std::string& name, const ReportRow& row) {
    std::snprintf(line, sizeof line, "%-10s %10zu %10s %9s %7zu\n", name.c_str(), row.instances,
                  format_thousands(std::llround(row.hits)).c_str(), format_fixed2(row.accuracy()).c_str(), row.errors);
    out << line;
  };
  for (const auto& [word, row] : report.per_word) emit(word, row);
  emit("GLOBAL", report.global);
  if (!report.strict) out << "skipped: " << report.skipped << "\n";
  return out.str();
}

// ---------------------------------------------------------------------------
// Comparison and plot data

struct ComparisonRow {
  std::string strategy;
  double hits = 0.0;
  double accuracy = 0.0;
};

inline void check_same_dataset(const std::vector<const EvaluationReport*>& reports) {
  for (const auto* r : reports)
    if (r->dataset_fingerprint != reports.front()->dataset_fingerprint)
      throw Error(ErrorKind::schema, "reports '" + reports.front()->strategy + "' and '" + r->strategy +
                                         "' were computed on different datasets");
}

// Rows by global accuracy, best first; equal accuracies ordered by name.
inline std::vector<ComparisonRow> compare_reports(const std::vector<EvaluationReport>& reports) {
  std::vector<const EvaluationReport*> ptrs;
  for (const auto& r : reports) ptrs.push_back(&r);
  if (!ptrs.empty()) check_same_dataset(ptrs);
  std::vector<ComparisonRow> rows;
  for (const auto& r : reports) rows.push_back({r.strategy, r.global.hits, r.global.accuracy()});
  std::stable_sort(rows.begin(), rows.end(), [](const ComparisonRow& a, const ComparisonRow& b) {
    if (a.accuracy != b.accuracy) return a.accuracy > b.accuracy;
    return a.strategy < b.strategy;
  });
  return rows;
}

inline std::string format_comparison(const std::vector<ComparisonRow>& rows) {
  std::size_t width = 8;
  for (const auto& r : rows) width = std::max(width, r.strategy.size());
  std::ostringstream out;
  auto pad = [](std::string s, std::size_t w) {
    s.resize(std::max(s.size(), w), ' ');
    return s;
  };
  out << pad("Strategy", width) << " | " << pad("Hits", 8) << " | Accuracy\n";
  for (const auto& r : rows)
    out << pad(r.strategy, width) << " | " << pad(format_thousands(std::llround(r.hits)), 8) << " | "
        << format_fixed2(r.accuracy) << "%\n";
  return out.str();
}

// word,method_accuracy,mfs_accuracy,ro_accuracy (one row per word).
inline std::string emit_plot_data(const EvaluationReport& method, const EvaluationReport& mfs,
                                  const EvaluationReport& ro) {
  check_same_dataset({&method, &mfs, &ro});
  std::ostringstream out;
  out << "word,method_accuracy,mfs_accuracy,ro_accuracy\n";
  for (const auto& [word, row] : method.per_word) {
    auto m = mfs.per_word.find(word);
    auto r = ro.per_word.find(word);
    if (m == mfs.per_word.end() || r == ro.per_word.end())
      throw Error(ErrorKind::schema, "baseline reports have no row for '" + word + "'");
    out << word << ',' << format_compact2(row.accuracy()) << ',' << format_compact2(m->second.accuracy()) << ','
        << format_compact2(r->second.accuracy()) << '\n';
  }
  return out.str();
}

}  // namespace uwsd
