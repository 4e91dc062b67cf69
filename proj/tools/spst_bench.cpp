#include <cstdio>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "spst/bench.hpp"

namespace {

void add_run_flags(CLI::App* sub, spst::ExperimentConfig& cfg) {
  std::map<std::string, spst::MethodKind> methods{
      {"rsd", spst::MethodKind::Rsd},
      {"rcg", spst::MethodKind::Rcg},
      {"rtr1", spst::MethodKind::Rtr1},
      {"rtr2", spst::MethodKind::Rtr2},
      {"all", spst::MethodKind::All}};
  std::map<std::string, spst::ReportFormat> formats{
      {"csv", spst::ReportFormat::Csv}, {"json", spst::ReportFormat::Json}};
  sub->add_option("--method", cfg.method, "solver to run (default all)")
      ->transform(CLI::CheckedTransformer(methods, CLI::ignore_case));
  sub->add_option("--seed", cfg.seed, "RNG seed")->envname("SPST_SEED");
  sub->add_option("--grad-tol", cfg.stop.grad_tol,
                  "gradient-norm stopping threshold");
  sub->add_option("--min-step", cfg.stop.min_step,
                  "smallest admissible step length / trust radius");
  sub->add_option("--max-iter", cfg.stop.max_iter, "outer iteration budget");
  sub->add_option("--mu", cfg.cg.restart_period,
                  "conjugate-gradient restart period");
  sub->add_flag("--nonmonotone", cfg.linesearch.nonmonotone,
                "use the averaged Armijo reference value");
  sub->add_option("--out", cfg.out,
                  "summary file; also writes <out>.iters.<method>.csv and "
                  "<out>.instance.txt / <out>.x0.txt");
  sub->add_option("--format", cfg.format, "summary format (default csv)")
      ->transform(CLI::CheckedTransformer(formats, CLI::ignore_case));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Riemannian optimization benchmarks on the symplectic Stiefel "
               "manifold"};
  app.require_subcommand(1);

  spst::ExperimentConfig cfg;

  CLI::App* nearest =
      app.add_subcommand("nearest", "nearest-matrix projection benchmark");
  nearest->add_option("--n", cfg.n, "half row dimension (default 100)");
  nearest->add_option("--k", cfg.k, "half column dimension (default 10)");
  add_run_flags(nearest, cfg);

  CLI::App* eig = app.add_subcommand(
      "symplectic-eig", "smallest symplectic eigenvalues of an SPD matrix");
  eig->add_option("--n", cfg.n, "half matrix dimension (default 100)");
  eig->add_option("--p", cfg.p, "number of eigenvalue pairs (default 5)");
  eig->add_option("--l", cfg.l, "Gauss-transformation index (default 3)");
  eig->add_option("--c", cfg.c, "Gauss-transformation scale (default 2)");
  eig->add_option("--d", cfg.d, "Gauss-transformation shear (default 1)");
  add_run_flags(eig, cfg);

  CLI::App* psd = app.add_subcommand(
      "psd", "symplectic low-rank approximation of a PSD snapshot matrix");
  psd->add_option("--n", cfg.n, "half row dimension (default 100)");
  psd->add_option("--k", cfg.k, "half column dimension (default 10)");
  psd->add_option("--m", cfg.m, "snapshot count (default 50)");
  psd->add_option("--r", cfg.r, "half-rank of the planted solution (default 20)");
  add_run_flags(psd, cfg);

  std::size_t geo_n = 100, geo_k = 10;
  std::uint64_t geo_seed = 0;
  std::string geo_out;
  CLI::App* geo = app.add_subcommand(
      "geodesic-compare",
      "feasibility and geodesic-gap sweep of the Cayley retractions");
  geo->add_option("--n", geo_n, "half row dimension (default 100)");
  geo->add_option("--k", geo_k, "half column dimension (default 10)");
  geo->add_option("--seed", geo_seed, "RNG seed")->envname("SPST_SEED");
  geo->add_option("--out", geo_out, "CSV destination (also printed to stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);  // prints help or the parse error
    return code == 0 ? 0 : 2;
  }

  try {
    if (geo->parsed()) {
      std::vector<spst::GeoCompareRow> rows =
          spst::geodesic_compare(geo_n, geo_k, geo_seed, spst::default_t_grid());
      std::string csv = spst::emit_geo_compare_csv(rows);
      std::fputs(csv.c_str(), stdout);
      if (!geo_out.empty()) spst::write_text_file(geo_out, csv);
      return 0;
    }
    cfg.problem = nearest->parsed() ? spst::ProblemKind::Nearest
                  : eig->parsed()   ? spst::ProblemKind::SymplecticEig
                                    : spst::ProblemKind::Psd;
    spst::ExperimentResult result = spst::run_experiment(cfg);
    std::fputs(spst::emit_report(result.rows, cfg.format).c_str(), stdout);
    return spst::all_converged(result) ? 0 : 1;
  } catch (const spst::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
