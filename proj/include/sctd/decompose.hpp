#pragma once

#include <cstdint>
#include <vector>

#include "sctd/model_selection.hpp"
#include "sctd/solver.hpp"

namespace sctd {

struct RoundRecord {
  std::size_t rank_index = 0;  // 1-based deflation round
  double lambda = 0.0;
  double tau = 0.0;
  double bic = 0.0;
  std::size_t nnz = 0;
  double residual_norm = 0.0;      // after subtracting this round's component
  double relative_residual = 0.0;  // residual_norm / ||X||_F
};

struct DecompositionReport {
  std::vector<RoundRecord> rounds;
  std::vector<TauTrace> tau_traces;  // one per round, for BIC curve plots
  double input_norm = 0.0;
  std::uint64_t seed = 0;
};

struct DecompositionResult {
  KruskalModel model;
  DecompositionReport report;
};

// Greedy deflation: per round select tau by BIC, fit one rank-one component,
// subtract it from the residual. Stops at max_rank, on a degenerate round, or
// when lambda_r / lambda_1 < min_lambda.
DecompositionResult sctd_decompose(const DenseTensor3& x, const Dictionary& dict,
                                   const SolverConfig& config, const TauPolicy& tau_policy);

}  // namespace sctd
