#include "fooddet/metrics.hpp"

#include <cstdio>

#include "fooddet/error.hpp"
#include "fooddet/format.hpp"

namespace fooddet {

namespace {

std::optional<double> ratio(std::size_t num, std::size_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

void fill_rates(EvalReport& r) {
  const auto& c = r.confusion;
  r.acc = ratio(c.tp + c.tn, c.total());
  r.tpr = ratio(c.tp, c.tp + c.fn);
  r.tnr = ratio(c.tn, c.tn + c.fp);
}

}  // namespace

EvalReport confusion(std::span<const int> pred, std::span<const int> truth,
                     std::span<const std::string> ids) {
  if (pred.size() != truth.size() || pred.size() != ids.size()) {
    throw ShapeError("prediction, truth and id lengths differ");
  }
  EvalReport r;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const bool p = pred[i] == 1;
    const bool t = truth[i] == 1;
    if (p && t) {
      ++r.confusion.tp;
    } else if (!p && !t) {
      ++r.confusion.tn;
    } else if (p) {
      ++r.confusion.fp;
      r.fp_ids.push_back(ids[i]);
    } else {
      ++r.confusion.fn;
      r.fn_ids.push_back(ids[i]);
    }
  }
  fill_rates(r);
  return r;
}

EvalReport report_from_counts(const Confusion& c) {
  EvalReport r;
  r.confusion = c;
  fill_rates(r);
  return r;
}

EvalReport weighted_merge(std::span<const EvalReport> reports) {
  if (reports.empty()) throw ValidationError("cannot merge an empty list of reports");
  EvalReport out;
  for (const auto& r : reports) {
    out.confusion.tp += r.confusion.tp;
    out.confusion.fp += r.confusion.fp;
    out.confusion.tn += r.confusion.tn;
    out.confusion.fn += r.confusion.fn;
    out.fp_ids.insert(out.fp_ids.end(), r.fp_ids.begin(), r.fp_ids.end());
    out.fn_ids.insert(out.fn_ids.end(), r.fn_ids.begin(), r.fn_ids.end());
  }
  fill_rates(out);
  return out;
}

namespace {

std::string rate_text(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string(kUndefinedMarker);
}

}  // namespace

std::string format_report_csv(const EvalReport& r) {
  const auto& c = r.confusion;
  std::string out = "metric,value\n";
  out += "tp," + std::to_string(c.tp) + '\n';
  out += "fp," + std::to_string(c.fp) + '\n';
  out += "tn," + std::to_string(c.tn) + '\n';
  out += "fn," + std::to_string(c.fn) + '\n';
  out += "total," + std::to_string(c.total()) + '\n';
  out += "acc," + rate_text(r.acc) + '\n';
  out += "tpr," + rate_text(r.tpr) + '\n';
  out += "tnr," + rate_text(r.tnr) + '\n';
  return out;
}

EvalReport parse_report_csv(std::string_view text) {
  Confusion c;
  bool seen[4] = {false, false, false, false};
  std::size_t pos = 0;
  bool header = true;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const auto line = text.substr(pos, end - pos);
    pos = end + 1;
    if (header) {
      if (line != "metric,value") throw FormatError("not a report CSV (bad header)");
      header = false;
      continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string_view::npos) continue;
    const auto key = line.substr(0, comma);
    const auto value = line.substr(comma + 1);
    std::size_t* slot = nullptr;
    int which = -1;
    if (key == "tp") { slot = &c.tp; which = 0; }
    if (key == "fp") { slot = &c.fp; which = 1; }
    if (key == "tn") { slot = &c.tn; which = 2; }
    if (key == "fn") { slot = &c.fn; which = 3; }
    if (slot == nullptr) continue;
    std::uint64_t v = 0;
    if (!parse_u64(value, v)) throw FormatError("report CSV: bad count for " + std::string(key));
    *slot = static_cast<std::size_t>(v);
    seen[which] = true;
  }
  for (bool s : seen) {
    if (!s) throw FormatError("report CSV is missing a confusion count");
  }
  return report_from_counts(c);
}

std::string format_percent(const std::optional<double>& rate) {
  if (!rate) return kUndefinedMarker;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f%%", *rate * 100.0);
  return buf;
}

}  // namespace fooddet
