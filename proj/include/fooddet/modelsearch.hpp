#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fooddet/svm.hpp"

namespace fooddet {

/// n values spaced uniformly in log10 between lo and hi; both endpoints are exact.
std::vector<double> log_grid(double lo, double hi, std::size_t n);

struct GridAxis {
  double lo = 1.0;
  double hi = 10.0;
  std::size_t n = 2;
  bool operator==(const GridAxis&) const = default;
};

/// Parses "lo:hi:n".
GridAxis parse_grid_axis(std::string_view text);

struct SearchGrid {
  std::vector<double> c_values;
  std::vector<double> gamma_values;

  static SearchGrid from_axes(const GridAxis& c, const GridAxis& gamma);
  /// 14 x 14 log-spaced grid: C in [1e-4, 1e2], gamma in [1e-8, 1e-2].
  static SearchGrid standard();
};

inline constexpr GridAxis kStandardCAxis{1e-4, 1e2, 14};
inline constexpr GridAxis kStandardGammaAxis{1e-8, 1e-2, 14};

struct FoldAssignment {
  std::size_t k = 3;
  std::vector<std::size_t> fold_of;
  std::uint64_t seed = 42;
};

/// Seeded shuffle per class, then round-robin over folds. The fold counter runs
/// on from the positive class into the negative one so totals stay balanced.
FoldAssignment stratified_kfold(std::span<const int> labels, std::size_t k, std::uint64_t seed);

struct CellResult {
  std::vector<double> fold_accuracy;
  std::vector<bool> fold_converged;
  double mean_accuracy = 0.0;
  bool converged() const;
};

struct SearchResult {
  std::vector<double> c_values;
  std::vector<double> gamma_values;
  std::vector<CellResult> cells;  // row-major: cell(ci, gi) = cells[ci * gammas + gi]
  std::size_t best_c_index = 0;
  std::size_t best_gamma_index = 0;

  double best_c() const { return c_values[best_c_index]; }
  double best_gamma() const { return gamma_values[best_gamma_index]; }
  double best_accuracy() const { return cell(best_c_index, best_gamma_index).mean_accuracy; }
  const CellResult& cell(std::size_t ci, std::size_t gi) const {
    return cells[ci * gamma_values.size() + gi];
  }
  /// Mean CV accuracy table, C along rows.
  Matrix table() const;
};

struct SearchSettings {
  SvmSettings svm;
  double coef0 = 0.0;
  unsigned threads = 1;
};

/// Accuracy of each (C, gamma) cell on each held-out fold.
CellResult evaluate_cell(const Matrix& x, std::span<const int> y, const FoldAssignment& folds,
                         double c, double gamma, const SearchSettings& settings);

/// Exhaustive CV search. Best cell maximizes mean accuracy; ties go to the
/// smaller C, then the smaller gamma.
SearchResult grid_search(const Matrix& x, std::span<const int> y, const SearchGrid& grid,
                         const FoldAssignment& folds, const SearchSettings& settings = {});

SvmModel train_final(const Matrix& x, std::span<const int> y, double c, double gamma,
                     const SearchSettings& settings = {});

/// `c,gamma,fold,accuracy` rows, one per cell and fold, then a `best` summary row.
std::string format_search_csv(const SearchResult& result);

struct SearchCsvRow {
  double c = 0.0;
  double gamma = 0.0;
  std::string fold;
  double accuracy = 0.0;
};
std::vector<SearchCsvRow> parse_search_csv(std::string_view text);

}  // namespace fooddet
