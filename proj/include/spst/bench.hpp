#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "spst/manifold.hpp"
#include "spst/matrix.hpp"
#include "spst/problems.hpp"
#include "spst/random.hpp"
#include "spst/report.hpp"
#include "spst/retraction.hpp"
#include "spst/solvers.hpp"

namespace spst {

enum class ProblemKind { Nearest, SymplecticEig, Psd };
enum class MethodKind { Rsd, Rcg, Rtr1, Rtr2, All };

struct ExperimentConfig {
  ProblemKind problem = ProblemKind::Nearest;
  std::size_t n = 100;
  std::size_t k = 10;
  std::size_t p = 5;   // symplectic-eig: number of requested eigenvalue pairs
  std::size_t m = 50;  // psd: snapshot count
  std::size_t r = 20;  // psd: half-rank of the planted solution
  std::size_t l = 3;   // Gauss-transformation parameters of the SPD instance
  double c = 2.0;
  double d = 1.0;
  MethodKind method = MethodKind::All;
  std::uint64_t seed = 0;
  StoppingRule stop;
  LineSearchConfig linesearch;
  CgConfig cg;
  std::string out;  // file stem; empty keeps results on stdout only
  ReportFormat format = ReportFormat::Csv;
};

struct ExperimentResult {
  std::vector<ReportRow> rows;
  std::vector<RunReport> runs;  // same order as rows
};

inline const char* to_string(MethodKind m) {
  switch (m) {
    case MethodKind::Rsd:
      return "rsd";
    case MethodKind::Rcg:
      return "rcg";
    case MethodKind::Rtr1:
      return "rtr1";
    case MethodKind::Rtr2:
      return "rtr2";
    default:
      return "all";
  }
}

inline void validate_config(const ExperimentConfig& cfg) {
  if (cfg.n == 0) throw Error("config: n must be positive");
  switch (cfg.problem) {
    case ProblemKind::Nearest:
      if (cfg.k == 0 || cfg.k > cfg.n) throw Error("config: need 1 <= k <= n");
      break;
    case ProblemKind::SymplecticEig:
      if (cfg.p == 0 || cfg.p > cfg.n) throw Error("config: need 1 <= p <= n");
      if (cfg.l < 2 || cfg.l > cfg.n || cfg.c == 0.0)
        throw Error("config: Gauss parameters need 2 <= l <= n and c != 0");
      break;
    case ProblemKind::Psd:
      if (cfg.k == 0 || cfg.k > cfg.n) throw Error("config: need 1 <= k <= n");
      if (cfg.m == 0) throw Error("config: m must be positive");
      if (cfg.r == 0 || cfg.r > cfg.n) throw Error("config: need 1 <= r <= n");
      break;
  }
  if (cfg.stop.grad_tol <= 0.0 || cfg.stop.min_step <= 0.0 ||
      cfg.stop.max_iter == 0)
    throw Error("config: stopping thresholds must be positive");
}

namespace detail {

struct BuiltExperiment {
  ObjectiveBundle prob;
  ManifoldPoint x0;
  DenseMatrix instance;  // the matrix defining the objective, for replay
  std::size_t k;         // manifold column count actually optimized over
};

// All methods share the single initial point constructed here.
inline BuiltExperiment build_experiment(const ExperimentConfig& cfg) {
  Rng master(Seed{cfg.seed});
  Seed instance_seed = master.fork();
  Seed x0_seed = master.fork();
  switch (cfg.problem) {
    case ProblemKind::Nearest: {
      Rng rng(instance_seed);
      DenseMatrix a = gaussian_matrix(2 * cfg.n, 2 * cfg.k, rng);
      a *= 1.0 / a.frobenius_norm();
      ManifoldPoint x0 = random_point(cfg.n, cfg.k, x0_seed);
      return {nearest_problem(a), std::move(x0), std::move(a), cfg.k};
    }
    case ProblemKind::SymplecticEig: {
      WilliamsonInstance inst =
          gen_williamson(cfg.n, cfg.l, cfg.c, cfg.d, instance_seed);
      ManifoldPoint e(selector_point(cfg.n, cfg.p));
      TangentVector dir = random_tangent(e, x0_seed);
      ManifoldPoint x0(cayley_retraction(e.matrix(), dir.matrix(), 1.0));
      return {brockett_problem(inst.a), std::move(x0), std::move(inst.a), cfg.p};
    }
    default: {
      PsdInstance inst = gen_psd_instance(cfg.n, cfg.m, cfg.r, instance_seed);
      ManifoldPoint x0 = random_point(cfg.n, cfg.k, x0_seed);
      return {psd_problem(inst.s), std::move(x0), std::move(inst.s), cfg.k};
    }
  }
}

inline RunReport run_method(MethodKind method, const ObjectiveBundle& prob,
                            const ManifoldPoint& x0, const ExperimentConfig& cfg) {
  switch (method) {
    case MethodKind::Rsd:
      return solve_rsd(prob, x0, cfg.linesearch, cfg.stop);
    case MethodKind::Rcg:
      return solve_rcg(prob, x0, cfg.cg, cfg.linesearch, cfg.stop);
    case MethodKind::Rtr1:
      return solve_rtr(prob, x0, {}, HessianKind::ExactMetric, cfg.stop);
    default:
      return solve_rtr(prob, x0, {}, HessianKind::ProjectedEuclidean, cfg.stop);
  }
}

}  // namespace detail

// Runs the configured methods sequentially from one shared initial point.
// With a nonempty `out`, writes the summary there plus `<out>.iters.<method>.csv`
// per run and the instance/start matrices at `<out>.instance.txt` / `<out>.x0.txt`.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  validate_config(cfg);
  detail::BuiltExperiment built = detail::build_experiment(cfg);

  std::vector<MethodKind> methods;
  if (cfg.method == MethodKind::All) {
    methods = {MethodKind::Rsd, MethodKind::Rcg, MethodKind::Rtr1,
               MethodKind::Rtr2};
  } else {
    methods = {cfg.method};
  }

  ExperimentResult result;
  for (MethodKind m : methods) {
    RunReport rep = detail::run_method(m, built.prob, built.x0, cfg);
    result.rows.push_back(summarize(rep));
    result.runs.push_back(std::move(rep));
  }

  if (!cfg.out.empty()) {
    write_report(result.rows, cfg.format, cfg.out);
    for (const RunReport& rep : result.runs)
      write_text_file(cfg.out + ".iters." + rep.method + ".csv",
                      emit_iteration_csv(rep.iterations));
    save_matrix(cfg.out + ".instance.txt", built.instance);
    save_matrix(cfg.out + ".x0.txt", built.x0.matrix());
  }
  return result;
}

inline bool all_converged(const ExperimentResult& result) {
  for (const RunReport& rep : result.runs) {
    if (rep.reason != TerminationReason::GradTol &&
        rep.reason != TerminationReason::StepTooSmall)
      return false;
  }
  return true;
}

// --- Retraction comparison sweep ------------------------------------------------

struct GeoCompareRow {
  double t;
  double feas_geodesic;
  double feas_cay1;
  double feas_cay2;
  double err_cay1;
  double err_cay2;
};

// 21 log-spaced abscissae on [1e-2, 1].
inline std::vector<double> default_t_grid() {
  std::vector<double> grid;
  for (int i = 0; i <= 20; ++i)
    grid.push_back(std::pow(10.0, -2.0 + 2.0 * i / 20.0));
  return grid;
}

// Feasibility and geodesic-gap errors of the two Cayley retractions along one
// random unit direction, per sweep abscissa.
inline std::vector<GeoCompareRow> geodesic_compare(std::size_t n, std::size_t k,
                                                   std::uint64_t seed,
                                                   const std::vector<double>& grid) {
  if (grid.empty()) throw Error("geodesic-compare: empty grid");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] <= 0.0 || (i > 0 && grid[i] <= grid[i - 1]))
      throw Error("geodesic-compare: grid must be positive ascending");
  }
  Rng master(Seed{seed});
  Seed point_seed = master.fork();
  Seed dir_seed = master.fork();
  ManifoldPoint u = random_point(n, k, point_seed);
  DenseMatrix delta = random_tangent(u, dir_seed).matrix();

  std::vector<GeoCompareRow> rows;
  for (double t : grid) {
    DenseMatrix geo = geodesic(u.matrix(), delta, t);
    DenseMatrix cay1 = cayley_simple(u.matrix(), delta, t);
    DenseMatrix cay2 = cayley_retraction(u.matrix(), delta, t);
    rows.push_back({t, check_point(geo), check_point(cay1), check_point(cay2),
                    (cay1 - geo).frobenius_norm(),
                    (cay2 - geo).frobenius_norm()});
  }
  return rows;
}

inline constexpr const char* kGeoCompareHeader =
    "t,feas_geodesic,feas_cay1,feas_cay2,err_cay1,err_cay2";

inline std::string emit_geo_compare_csv(const std::vector<GeoCompareRow>& rows) {
  std::string out = kGeoCompareHeader;
  out += '\n';
  for (const GeoCompareRow& r : rows) {
    out += format_g17(r.t);
    out += ',' + format_g17(r.feas_geodesic);
    out += ',' + format_g17(r.feas_cay1);
    out += ',' + format_g17(r.feas_cay2);
    out += ',' + format_g17(r.err_cay1);
    out += ',' + format_g17(r.err_cay2);
    out += '\n';
  }
  return out;
}

}  // namespace spst
