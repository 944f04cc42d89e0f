#include <algorithm>
#include <cstdio>
#include <map>
#include <sstream>

#include "pdvoice/csv.hpp"
#include "pdvoice/errors.hpp"
#include "pdvoice/eval.hpp"

namespace pdvoice::eval {

namespace {

struct MetricRow {
  const char* label;
  MetricSummary ModelCvResult::*field;
};

constexpr MetricRow kMetricRows[] = {
    {"Accuracy", &ModelCvResult::accuracy},
    {"Specificity", &ModelCvResult::specificity},
    {"Recall", &ModelCvResult::recall},
    {"Precision", &ModelCvResult::precision},
    {"F1 score", &ModelCvResult::f1},
};

// feature sets in first-appearance order; entries keyed by family inside
std::vector<std::string> feature_set_order(const CvReport& report) {
  std::vector<std::string> order;
  for (const auto& e : report.entries)
    if (std::find(order.begin(), order.end(), e.feature_set) == order.end())
      order.push_back(e.feature_set);
  return order;
}

const ModelCvResult* find_entry(const CvReport& report,
                                const std::string& feature_set,
                                ml::ModelFamily family) {
  for (const auto& e : report.entries)
    if (e.feature_set == feature_set && e.result.family == family)
      return &e.result;
  return nullptr;
}

std::vector<ml::ModelFamily> families_present(const CvReport& report) {
  std::vector<ml::ModelFamily> out;
  for (ml::ModelFamily f : ml::all_families())
    for (const auto& e : report.entries)
      if (e.result.family == f) {
        out.push_back(f);
        break;
      }
  return out;
}

}  // namespace

std::string format_pct(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", fraction * 100.0);
  return buf;
}

std::string render_report_csv(const CvReport& report) {
  if (report.entries.empty())
    throw PreconditionError("render_report: empty report");
  auto families = families_present(report);
  std::ostringstream out;

  std::vector<std::string> header = {"feature_set", "metric"};
  for (ml::ModelFamily f : families) header.emplace_back(ml::family_short_name(f));
  out << csv::format_row(header);

  for (const auto& fs : feature_set_order(report)) {
    for (const auto& row : kMetricRows) {
      std::vector<std::string> fields = {fs, row.label};
      for (ml::ModelFamily f : families) {
        const ModelCvResult* r = find_entry(report, fs, f);
        fields.push_back(r ? format_pct((r->*(row.field)).mean) : "");
      }
      out << csv::format_row(fields);
    }
  }
  return out.str();
}

std::string render_report_text(const CvReport& report) {
  if (report.entries.empty())
    throw PreconditionError("render_report: empty report");
  auto families = families_present(report);
  auto sets = feature_set_order(report);

  // cells rendered as "mean (stddev)"
  std::size_t set_width = 11;  // "feature set"
  for (const auto& fs : sets) set_width = std::max(set_width, fs.size());

  std::ostringstream out;
  auto pad = [](const std::string& s, std::size_t w) {
    std::string p = s;
    p.resize(std::max(w, s.size()), ' ');
    return p;
  };

  out << pad("feature set", set_width + 2) << pad("metric", 13);
  for (ml::ModelFamily f : families)
    out << pad(ml::family_short_name(f), 13);
  out << '\n';
  out << std::string(set_width + 2 + 13 + families.size() * 13, '-') << '\n';

  for (const auto& fs : sets) {
    for (const auto& row : kMetricRows) {
      out << pad(fs, set_width + 2) << pad(row.label, 13);
      for (ml::ModelFamily f : families) {
        const ModelCvResult* r = find_entry(report, fs, f);
        if (!r) {
          out << pad("-", 13);
          continue;
        }
        const MetricSummary& s = r->*(row.field);
        out << pad(format_pct(s.mean) + " (" + format_pct(s.stddev) + ")", 13);
      }
      out << '\n';
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace pdvoice::eval
