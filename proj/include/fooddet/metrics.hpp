#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fooddet {

struct Confusion {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  std::size_t total() const noexcept { return tp + fp + tn + fn; }
  std::size_t positives() const noexcept { return tp + fn; }
  std::size_t negatives() const noexcept { return tn + fp; }
  bool operator==(const Confusion&) const = default;
};

/// Rates are std::nullopt when their denominator is zero.
struct EvalReport {
  Confusion confusion;
  std::optional<double> acc;
  std::optional<double> tpr;
  std::optional<double> tnr;
  std::vector<std::string> fp_ids;
  std::vector<std::string> fn_ids;
};

/// Food (+1) is the positive class. FP/FN ids keep input order.
EvalReport confusion(std::span<const int> pred, std::span<const int> truth,
                     std::span<const std::string> ids);

/// Rates for given counts; id lists stay empty.
EvalReport report_from_counts(const Confusion& c);

/// Sums the confusions of several evaluations and recomputes the rates.
EvalReport weighted_merge(std::span<const EvalReport> reports);

inline constexpr const char* kUndefinedMarker = "undefined";

/// `metric,value` CSV; rates as fractions with 17 significant digits.
std::string format_report_csv(const EvalReport& r);
/// Reads back the counts of a report CSV and recomputes the rates.
EvalReport parse_report_csv(std::string_view text);
/// Human-readable one-line summary, rates as percentages with 2 decimals.
std::string format_percent(const std::optional<double>& rate);

}  // namespace fooddet
