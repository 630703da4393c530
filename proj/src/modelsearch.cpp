#include "fooddet/modelsearch.hpp"

#include <atomic>
#include <cmath>
#include <mutex>
#include <optional>
#include <thread>

#include "fooddet/format.hpp"
#include "fooddet/random.hpp"

namespace fooddet {

std::vector<double> log_grid(double lo, double hi, std::size_t n) {
  if (!(lo > 0.0) || !std::isfinite(lo)) throw DomainError("log grid lower bound must be > 0");
  if (!(hi > lo) || !std::isfinite(hi)) throw DomainError("log grid upper bound must exceed lower");
  if (n < 2) throw DomainError("log grid needs at least 2 points");
  const double a = std::log10(lo);
  const double b = std::log10(hi);
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) {
    v[i] = std::pow(10.0, a + static_cast<double>(i) * (b - a) / static_cast<double>(n - 1));
  }
  v.front() = lo;
  v.back() = hi;
  return v;
}

GridAxis parse_grid_axis(std::string_view text) {
  const auto p1 = text.find(':');
  const auto p2 = p1 == std::string_view::npos ? p1 : text.find(':', p1 + 1);
  GridAxis axis;
  std::uint64_t n = 0;
  if (p2 == std::string_view::npos || !parse_double(text.substr(0, p1), axis.lo) ||
      !parse_double(text.substr(p1 + 1, p2 - p1 - 1), axis.hi) ||
      !parse_u64(text.substr(p2 + 1), n)) {
    throw ValidationError("grid must look like lo:hi:n, got '" + std::string(text) + "'");
  }
  axis.n = n;
  log_grid(axis.lo, axis.hi, axis.n);  // validates
  return axis;
}

SearchGrid SearchGrid::from_axes(const GridAxis& c, const GridAxis& gamma) {
  return {log_grid(c.lo, c.hi, c.n), log_grid(gamma.lo, gamma.hi, gamma.n)};
}

SearchGrid SearchGrid::standard() { return from_axes(kStandardCAxis, kStandardGammaAxis); }

FoldAssignment stratified_kfold(std::span<const int> labels, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw ValidationError("fold count must be at least 2");
  std::vector<std::size_t> pos;
  std::vector<std::size_t> neg;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == 1) {
      pos.push_back(i);
    } else if (labels[i] == -1) {
      neg.push_back(i);
    } else {
      throw ValidationError("labels must be +1 or -1");
    }
  }
  if (pos.size() < k || neg.size() < k) {
    throw ValidationError("each class needs at least " + std::to_string(k) +
                          " samples for stratified folds (have " + std::to_string(pos.size()) +
                          " food, " + std::to_string(neg.size()) + " nonfood)");
  }
  FoldAssignment folds;
  folds.k = k;
  folds.seed = seed;
  folds.fold_of.assign(labels.size(), 0);
  std::mt19937_64 rng(seed);
  std::size_t next = 0;
  for (auto* cls : {&pos, &neg}) {
    seeded_shuffle(std::span<std::size_t>(*cls), rng);
    for (std::size_t idx : *cls) {
      folds.fold_of[idx] = next;
      next = (next + 1) % k;
    }
  }
  return folds;
}

bool CellResult::converged() const {
  for (bool b : fold_converged) {
    if (!b) return false;
  }
  return true;
}

Matrix SearchResult::table() const {
  Matrix t(c_values.size(), gamma_values.size());
  for (std::size_t ci = 0; ci < c_values.size(); ++ci) {
    for (std::size_t gi = 0; gi < gamma_values.size(); ++gi) t(ci, gi) = cell(ci, gi).mean_accuracy;
  }
  return t;
}

namespace {

struct FoldData {
  Matrix train_x;
  std::vector<int> train_y;
  Matrix test_x;
  std::vector<int> test_y;
};

std::vector<FoldData> materialize_folds(const Matrix& x, std::span<const int> y,
                                        const FoldAssignment& folds) {
  if (folds.fold_of.size() != x.rows() || y.size() != x.rows()) {
    throw ShapeError("fold assignment, labels and rows disagree in length");
  }
  std::vector<FoldData> out(folds.k);
  for (std::size_t f = 0; f < folds.k; ++f) {
    std::vector<double> tr;
    std::vector<double> te;
    for (std::size_t i = 0; i < x.rows(); ++i) {
      const auto row = x.row(i);
      if (folds.fold_of[i] == f) {
        te.insert(te.end(), row.begin(), row.end());
        out[f].test_y.push_back(y[i]);
      } else {
        tr.insert(tr.end(), row.begin(), row.end());
        out[f].train_y.push_back(y[i]);
      }
    }
    out[f].train_x = Matrix(out[f].train_y.size(), x.cols(), std::move(tr));
    out[f].test_x = Matrix(out[f].test_y.size(), x.cols(), std::move(te));
  }
  return out;
}

CellResult run_cell(const std::vector<FoldData>& data, double c, double gamma,
                    const SearchSettings& settings) {
  CellResult cell;
  const KernelParams params{gamma, settings.coef0};
  for (const auto& fold : data) {
    const auto model = smo_train(fold.train_x, fold.train_y, c, params, settings.svm);
    const auto pred = predict(model, fold.test_x);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) correct += (pred[i] == fold.test_y[i]);
    cell.fold_accuracy.push_back(
        pred.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(pred.size()));
    cell.fold_converged.push_back(model.meta.converged);
  }
  double sum = 0.0;
  for (double a : cell.fold_accuracy) sum += a;
  cell.mean_accuracy = sum / static_cast<double>(cell.fold_accuracy.size());
  return cell;
}

}  // namespace

CellResult evaluate_cell(const Matrix& x, std::span<const int> y, const FoldAssignment& folds,
                         double c, double gamma, const SearchSettings& settings) {
  return run_cell(materialize_folds(x, y, folds), c, gamma, settings);
}

SearchResult grid_search(const Matrix& x, std::span<const int> y, const SearchGrid& grid,
                         const FoldAssignment& folds, const SearchSettings& settings) {
  if (grid.c_values.empty() || grid.gamma_values.empty()) {
    throw ValidationError("search grid is empty");
  }
  const auto data = materialize_folds(x, y, folds);

  SearchResult result;
  result.c_values = grid.c_values;
  result.gamma_values = grid.gamma_values;
  const std::size_t cells = grid.c_values.size() * grid.gamma_values.size();
  result.cells.resize(cells);

  // Workers write into their own cell slot, so the result does not depend on scheduling.
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::optional<SearchError> first_error;
  std::size_t first_error_cell = cells;
  auto worker = [&] {
    for (std::size_t idx = next++; idx < cells; idx = next++) {
      const double c = grid.c_values[idx / grid.gamma_values.size()];
      const double gamma = grid.gamma_values[idx % grid.gamma_values.size()];
      try {
        result.cells[idx] = run_cell(data, c, gamma, settings);
      } catch (const Error& e) {
        std::lock_guard lock(error_mutex);
        if (idx < first_error_cell) {
          first_error_cell = idx;
          first_error.emplace("grid cell C=" + format_double(c) + " gamma=" + format_double(gamma) +
                              ": " + e.what());
        }
      }
    }
  };
  const unsigned threads = std::max(1u, settings.threads);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (first_error) throw *first_error;

  for (std::size_t ci = 0; ci < grid.c_values.size(); ++ci) {
    for (std::size_t gi = 0; gi < grid.gamma_values.size(); ++gi) {
      if (result.cell(ci, gi).mean_accuracy > result.best_accuracy()) {
        result.best_c_index = ci;
        result.best_gamma_index = gi;
      }
    }
  }
  return result;
}

SvmModel train_final(const Matrix& x, std::span<const int> y, double c, double gamma,
                     const SearchSettings& settings) {
  return smo_train(x, y, c, KernelParams{gamma, settings.coef0}, settings.svm);
}

std::string format_search_csv(const SearchResult& result) {
  std::string out = "c,gamma,fold,accuracy\n";
  for (std::size_t ci = 0; ci < result.c_values.size(); ++ci) {
    for (std::size_t gi = 0; gi < result.gamma_values.size(); ++gi) {
      const auto& cell = result.cell(ci, gi);
      for (std::size_t f = 0; f < cell.fold_accuracy.size(); ++f) {
        out += format_double(result.c_values[ci]) + ',' + format_double(result.gamma_values[gi]) +
               ',' + std::to_string(f) + ',' + format_double(cell.fold_accuracy[f]) + '\n';
      }
    }
  }
  out += format_double(result.best_c()) + ',' + format_double(result.best_gamma()) + ",best," +
         format_double(result.best_accuracy()) + '\n';
  return out;
}

std::vector<SearchCsvRow> parse_search_csv(std::string_view text) {
  std::vector<SearchCsvRow> rows;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const auto line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line_no == 1) {
      if (line != "c,gamma,fold,accuracy") throw FormatError("not a search CSV (bad header)");
      continue;
    }
    if (line.empty()) continue;
    SearchCsvRow row;
    const auto a = line.find(',');
    const auto b = line.find(',', a + 1);
    const auto c = line.find(',', b + 1);
    if (a == std::string_view::npos || b == std::string_view::npos ||
        c == std::string_view::npos || !parse_double(line.substr(0, a), row.c) ||
        !parse_double(line.substr(a + 1, b - a - 1), row.gamma) ||
        !parse_double(line.substr(c + 1), row.accuracy)) {
      throw FormatError("search CSV line " + std::to_string(line_no) + " is malformed");
    }
    row.fold = std::string(line.substr(b + 1, c - b - 1));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace fooddet
