#pragma once

#include <optional>
#include <vector>

#include "sctd/solver.hpp"

namespace sctd {

struct TauPolicy {
  std::size_t grid_size = 20;
  std::size_t refine_rounds = 3;
  double refine_shrink = 0.25;
  double flat_tol = 1e-4;       // BIC flatness threshold, absolute
  double previous_tau = 0.0;    // carry-over lower bound (0 for round 1)
};

struct TauEvaluation {
  double tau = 0.0;
  double bic = 0.0;
  std::size_t nnz = 0;
};

struct TauTrace {
  std::vector<TauEvaluation> evaluated;  // in evaluation order
  double selected_tau = 0.0;
  double selected_bic = 0.0;
  bool degenerate = false;  // upper bound was 0
};

// log[ ||Y - lambda a o b o Dz||_F^2 / (I1 I2 I3) ]
//   + log(I1 I2 I3)/(I1 I2 I3) * nnz(z).
// Returns -infinity when the residual is exactly zero.
double bic(const DenseTensor3& y, double lambda, std::span<const double> a,
           std::span<const double> b, std::span<const double> z, const Dictionary& dict);

std::size_t count_nonzeros(std::span<const double> z);

// max_i |f_i|: the smallest tau at which the soft threshold zeroes all of z.
// Returns 0 (degenerate) for an all-zero f.
double tau_upper_bound(std::span<const double> f);

struct TauSelection {
  double tau = 0.0;
  TauTrace trace;
  BcaState state;  // incumbent BCA state at the selected tau, for warm starts
};

// BIC grid search on [lo, hi] with hi = tau_upper_bound from a warm-start BCA
// state and lo = previous_tau (dropped to 0 when it exceeds hi), followed by
// refine_rounds of re-gridding
// around the incumbent; stops early when the BIC curve flattens below flat_tol.
TauSelection select_tau(const DenseTensor3& y, const Dictionary& dict,
                        const TauPolicy& policy, const SolverConfig& config);

}  // namespace sctd
