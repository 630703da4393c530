// Command-line front end for the food/non-food pipeline.

#include <CLI11.hpp>

#include <iostream>
#include <thread>

#include "fooddet/commands.hpp"
#include "fooddet/format.hpp"
#include "fooddet/histfeat.hpp"

using namespace fooddet;

namespace {

Split to_split(const std::string& s) {
  const auto parsed = parse_split(s);
  if (!parsed) throw ValidationError("unknown split '" + s + "' (expected train, val or test)");
  return *parsed;
}

void print_report(const EvalReport& r) {
  const auto& c = r.confusion;
  std::cout << "TP=" << c.tp << " FP=" << c.fp << " TN=" << c.tn << " FN=" << c.fn << '\n'
            << "ACC=" << format_percent(r.acc) << " TPr=" << format_percent(r.tpr)
            << " TNr=" << format_percent(r.tnr) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Food/non-food detection: standardize, PCA (Kaiser), sigmoid-kernel SVM"};
  app.require_subcommand(1);

  // split
  auto* split = app.add_subcommand("split", "Assign train/val/test splits to a manifest");
  std::string split_in, split_out, protocol = "fcd";
  SplitOptions options;
  bool force = false;
  split->add_option("--in", split_in, "Input manifest CSV")->required();
  split->add_option("--out", split_out, "Output manifest CSV")->required();
  split->add_option("--protocol", protocol, "fcd | ragusa | fractional")->capture_default_str();
  split->add_option("--test-frac", options.test_fraction, "Test fraction (fractional protocol)")
      ->capture_default_str();
  split->add_option("--val-frac", options.val_fraction, "Validation fraction of the remainder")
      ->capture_default_str();
  split->add_option("--seed", options.seed, "Shuffle seed")->capture_default_str();
  split->add_flag("--force", force, "Overwrite existing split assignments");

  // extract
  auto* extract = app.add_subcommand("extract", "Color-histogram features for a manifest (PPM images)");
  std::string ex_manifest, ex_out;
  int bins = kDefaultBins;
  extract->add_option("--manifest", ex_manifest)->required();
  extract->add_option("--out", ex_out, "FVB1 output file")->required();
  extract->add_option("--bins", bins, "Histogram bins per channel")->capture_default_str();

  // curate
  auto* curate = app.add_subcommand("curate", "Keep the most color-diverse images per food category");
  std::string cu_manifest, cu_out;
  std::size_t keep = 250;
  curate->add_option("--manifest", cu_manifest)->required();
  curate->add_option("--out", cu_out)->required();
  curate->add_option("--keep", keep, "Images kept per category")->capture_default_str();
  curate->add_option("--bins", bins)->capture_default_str();

  // fit
  auto* fit = app.add_subcommand("fit", "Fit standardizer, PCA and SVM on the train split");
  FitPaths paths;
  FitConfig config;
  std::string grid_c = "1e-4:1e2:14", grid_gamma = "1e-8:1e-2:14";
  std::size_t cache_mb = 512;
  bool no_pca = false;
  config.search.threads = std::max(1u, std::thread::hardware_concurrency());
  fit->add_option("--features", paths.features)->required();
  fit->add_option("--manifest", paths.manifest)->required();
  fit->add_option("--model", paths.model_out, "Output model file")->required();
  fit->add_option("--search-csv", paths.search_csv_out, "Grid search CSV output");
  fit->add_option("--seed", config.seed, "Fold shuffle seed")->capture_default_str();
  fit->add_option("--grid-c", grid_c, "C grid lo:hi:n")->capture_default_str();
  fit->add_option("--grid-gamma", grid_gamma, "gamma grid lo:hi:n")->capture_default_str();
  fit->add_option("--folds", config.folds, "Cross-validation folds")->capture_default_str();
  fit->add_option("--coef0", config.search.coef0, "Sigmoid kernel offset")->capture_default_str();
  fit->add_flag("--no-pca", no_pca, "Skip PCA (standardized features go straight to the SVM)");
  fit->add_option("--threads", config.search.threads, "Grid search worker threads");
  fit->add_option("--tol", config.search.svm.tol, "SMO KKT tolerance")->capture_default_str();
  fit->add_option("--max-iter", config.search.svm.max_iter, "SMO pair-update cap")
      ->capture_default_str();
  fit->add_option("--cache-mb", cache_mb, "Kernel row cache budget (MiB)")->capture_default_str();

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "Score a model on one manifest split");
  std::string ev_model, ev_features, ev_manifest, ev_split = "test", ev_out;
  evaluate->add_option("--model", ev_model)->required();
  evaluate->add_option("--features", ev_features)->required();
  evaluate->add_option("--manifest", ev_manifest)->required();
  evaluate->add_option("--split", ev_split, "train | val | test")->capture_default_str();
  evaluate->add_option("--out", ev_out, "Output prefix for report CSV and FP/FN id lists")
      ->required();

  // predict
  auto* predict_cmd = app.add_subcommand("predict", "Label every row of a feature file");
  std::string pr_model, pr_features, pr_out;
  predict_cmd->add_option("--model", pr_model)->required();
  predict_cmd->add_option("--features", pr_features)->required();
  predict_cmd->add_option("--out", pr_out, "Output CSV id,label,decision_value")->required();

  // report
  auto* report = app.add_subcommand("report", "Summarize search and evaluation CSVs");
  std::string rp_search;
  std::vector<std::string> rp_evals;
  report->add_option("--search", rp_search, "Search CSV from fit");
  report->add_option("--eval", rp_evals, "Report CSV(s) from evaluate; several are also merged");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Usage errors are contract errors; --help and --version still exit 0.
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*split) {
      const auto p = parse_protocol(protocol);
      if (!p) throw ValidationError("unknown protocol '" + protocol + "'");
      options.protocol = *p;
      cmd_split(split_in, split_out, options, force);
      const auto m = read_manifest(split_out);
      std::cout << "train=" << m.count(Split::kTrain) << " val=" << m.count(Split::kVal)
                << " test=" << m.count(Split::kTest) << '\n';
    } else if (*extract) {
      cmd_extract(ex_manifest, ex_out, bins);
    } else if (*curate) {
      cmd_curate(cu_manifest, cu_out, keep, bins);
    } else if (*fit) {
      config.grid_c = parse_grid_axis(grid_c);
      config.grid_gamma = parse_grid_axis(grid_gamma);
      config.use_pca = !no_pca;
      config.search.svm.cache_bytes = cache_mb << 20;
      const auto outcome = cmd_fit(paths, config);
      const auto& m = outcome.model;
      if (m.pca) {
        std::cout << "pca: kept k=" << m.pca->k() << " of d=" << m.pca->d() << " components"
                  << (m.pca->used_fallback() ? " (no eigenvalue > 1, fallback)" : "") << '\n';
      } else {
        std::cout << "pca: disabled, d=" << m.input_dim() << '\n';
      }
      std::cout << "best C=" << format_double(m.provenance.best_c)
                << " gamma=" << format_double(m.provenance.best_gamma)
                << " mean CV accuracy=" << format_percent(m.provenance.best_cv_accuracy) << '\n'
                << "support vectors=" << m.svm.dual_coefs.size()
                << (m.svm.meta.converged ? "" : " (SMO hit max_iter)") << '\n';
    } else if (*evaluate) {
      print_report(cmd_evaluate(ev_model, ev_features, ev_manifest, to_split(ev_split), ev_out));
    } else if (*predict_cmd) {
      cmd_predict(pr_model, pr_features, pr_out);
    } else if (*report) {
      std::vector<fs::path> evals(rp_evals.begin(), rp_evals.end());
      std::cout << cmd_report(rp_search.empty() ? std::nullopt : std::optional<fs::path>(rp_search),
                              evals);
    }
  } catch (const Error& e) {
    std::cerr << "fooddet: " << to_string(e.kind()) << ": " << e.what() << '\n';
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "fooddet: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
