#pragma once

#include <cstdint>
#include <vector>

#include "sctd/dictionary.hpp"
#include "sctd/tensor.hpp"

namespace sctd {

// Fitted model (lambda, A, B, Z) with the temporal factor C = D*Z implied.
// Weights stay in deflation order (round 1 first) and are never re-sorted.
struct KruskalModel {
  std::vector<double> weights;  // lambda_r >= 0
  DenseMatrix a;                // I1 x R
  DenseMatrix b;                // I2 x R
  DenseMatrix z;                // P x R
  std::uint64_t dictionary_id = 0;

  std::size_t rank() const { return weights.size(); }
};

// First k components of the model (k <= rank).
KruskalModel truncate(const KruskalModel& model, std::size_t k);

// sum_r lambda_r * a_r o b_r o (D z_r), accumulated component by component.
DenseTensor3 kruskal_to_dense(const KruskalModel& model, const Dictionary& dict);

// Same tensor via the matricized identity X_(3) = (D Z) Lambda (B kr A)^T,
// folded back. Kept as an algebraically independent route for verification.
DenseTensor3 kruskal_to_dense_matricized(const KruskalModel& model, const Dictionary& dict);

// Temporal curves D z_r, one per component (unnormalized).
std::vector<std::vector<double>> temporal_modes(const KruskalModel& model,
                                                const Dictionary& dict);

}  // namespace sctd
