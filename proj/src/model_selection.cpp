#include "sctd/model_selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sctd/parallel.hpp"

namespace sctd {
namespace {

std::vector<double> dict_times(const Dictionary& dict, std::span<const double> z) {
  const std::size_t n = dict.sample_count();
  std::vector<double> c(n, 0.0);
  for (std::size_t p = 0; p < z.size(); ++p) {
    if (z[p] == 0.0) continue;
    const double* col = dict.matrix.data() + p * n;
    for (std::size_t i = 0; i < n; ++i) c[i] += z[p] * col[i];
  }
  return c;
}

double bic_from_residual2(double residual2, std::size_t nnz, double n_elements) {
  if (residual2 <= 0.0) return -std::numeric_limits<double>::infinity();
  return std::log(residual2 / n_elements) +
         std::log(n_elements) / n_elements * static_cast<double>(nnz);
}

}  // namespace

std::size_t count_nonzeros(std::span<const double> z) {
  std::size_t n = 0;
  for (double x : z)
    if (std::abs(x) > 1e-12) ++n;
  return n;
}

double bic(const DenseTensor3& y, double lambda, std::span<const double> a,
           std::span<const double> b, std::span<const double> z, const Dictionary& dict) {
  const double y2 = dot(y.values(), y.values());
  const std::vector<double> c = dict_times(dict, z);
  const std::vector<double> w = rank_one_contract(y, 3, b, a);
  const double ym = dot(c, w);
  const double m2 = dot(a, a) * dot(b, b) * dot(c, c);
  const double residual2 = std::max(0.0, y2 - 2 * lambda * ym + lambda * lambda * m2);
  return bic_from_residual2(residual2, count_nonzeros(z),
                            static_cast<double>(y.dims().count()));
}

double tau_upper_bound(std::span<const double> f) {
  double m = 0.0;
  for (double x : f) m = std::max(m, std::abs(x));
  return m;
}

TauSelection select_tau(const DenseTensor3& y, const Dictionary& dict,
                        const TauPolicy& policy, const SolverConfig& config) {
  constexpr std::size_t kProbeSweeps = 50;
  const double n_elements = static_cast<double>(y.dims().count());
  const double y2 = dot(y.values(), y.values());

  TauSelection sel;
  BcaState warm = run_bca(y, dict, 0.0, default_init(y, dict, 0.0), kProbeSweeps,
                          config.bca_tol);
  const double hi = tau_upper_bound(warm.f);
  if (hi == 0.0) {
    sel.trace.degenerate = true;
    return sel;
  }
  // The carried-over lower bound keeps sparsity nondecreasing across rounds.
  // When it exceeds the new upper bound it is dropped entirely rather than
  // clamped: clamping would pin the whole grid to the single point hi, where
  // the soft threshold zeroes z and the round dies even though the residual
  // still holds recoverable structure.
  const double lo = policy.previous_tau > hi ? 0.0 : policy.previous_tau;

  struct Eval {
    TauEvaluation entry;
    BcaState state;
  };

  double best_bic = std::numeric_limits<double>::infinity();
  double best_tau = hi;
  BcaState incumbent = warm;
  double win_lo = lo, win_hi = hi;

  for (std::size_t round = 0; round <= policy.refine_rounds; ++round) {
    const std::size_t grid = std::max<std::size_t>(policy.grid_size, 3);
    std::vector<Eval> evals(grid);
    parallel_for(grid, [&](std::size_t g) {
      const double tau =
          grid == 1 ? win_lo
                    : win_lo + (win_hi - win_lo) * static_cast<double>(g) /
                          static_cast<double>(grid - 1);
      BcaState init = incumbent;
      init.objective_trace.clear();
      init.z = soft_threshold_normalize(init.f, tau);
      BcaState s = run_bca(y, dict, tau, std::move(init), kProbeSweeps, config.bca_tol);
      const std::vector<double> c = dict_times(dict, s.z);
      const double c2 = dot(c, c);
      double lambda = 0.0;
      if (c2 > 0.0) {
        const std::vector<double> u = rank_one_contract(y, 1, c, s.b);
        lambda = dot(u, s.a) / c2;
      }
      const double residual2 = std::max(0.0, y2 - lambda * lambda * c2);
      evals[g].entry = {tau, bic_from_residual2(residual2, count_nonzeros(s.z), n_elements),
                        count_nonzeros(s.z)};
      evals[g].state = std::move(s);
    });

    double round_lo_bic = std::numeric_limits<double>::infinity();
    double round_hi_bic = -std::numeric_limits<double>::infinity();
    std::size_t round_best = 0;
    bool have_round_best = false;
    for (std::size_t g = 0; g < grid; ++g) {
      const auto& e = evals[g].entry;
      sel.trace.evaluated.push_back(e);
      round_lo_bic = std::min(round_lo_bic, e.bic);
      round_hi_bic = std::max(round_hi_bic, e.bic);
      // Global incumbent: lowest BIC, ties to smallest tau.
      if (e.bic < best_bic || (e.bic == best_bic && e.tau < best_tau)) {
        best_bic = e.bic;
        best_tau = e.tau;
        round_best = g;
        have_round_best = true;
      }
    }
    if (have_round_best) incumbent = evals[round_best].state;
    if (round_hi_bic - round_lo_bic < policy.flat_tol) break;
    if (round + 1 > policy.refine_rounds) break;

    const double width = (win_hi - win_lo) * policy.refine_shrink;
    win_lo = std::clamp(best_tau - width / 2, lo, hi);
    win_hi = std::clamp(best_tau + width / 2, lo, hi);
  }

  sel.tau = best_tau;
  sel.trace.selected_tau = best_tau;
  sel.trace.selected_bic = best_bic;
  sel.state = std::move(incumbent);
  return sel;
}

}  // namespace sctd
