#include "sctd/decompose.hpp"

#include <stdexcept>

namespace sctd {

DecompositionResult sctd_decompose(const DenseTensor3& x, const Dictionary& dict,
                                   const SolverConfig& config, const TauPolicy& tau_policy) {
  if (dict.sample_count() != x.dims().i3)
    throw std::invalid_argument("sctd_decompose: dictionary rows do not match I3");

  const auto [I1, I2, I3] = x.dims();
  const std::size_t P = dict.prototype_count();

  DecompositionResult out;
  out.model.dictionary_id = dict.id;
  out.model.a = DenseMatrix(I1, 0);
  out.model.b = DenseMatrix(I2, 0);
  out.model.z = DenseMatrix(P, 0);
  out.report.input_norm = frobenius_norm(x);
  out.report.seed = config.seed;

  DenseTensor3 residual = x;
  TauPolicy policy = tau_policy;
  const Rng root(Rng::mix(config.seed));

  std::vector<double> a_cols, b_cols, z_cols;
  double lambda1 = 0.0;

  for (std::size_t round = 0; round < config.max_rank; ++round) {
    const TauSelection sel = select_tau(residual, dict, policy, config);
    if (sel.trace.degenerate) break;

    ComponentFit fit =
        fit_rank_one(residual, dict, sel.tau, config, root.child(round), &sel.state);
    if (fit.degenerate || fit.lambda <= 0.0) break;
    if (round == 0) lambda1 = fit.lambda;
    if (fit.lambda < config.min_lambda * lambda1) break;

    fit.bic = bic(residual, fit.lambda, fit.a, fit.b, fit.z, dict);
    std::vector<double> c(I3, 0.0);
    for (std::size_t p = 0; p < P; ++p) {
      if (fit.z[p] == 0.0) continue;
      const double* col = dict.matrix.data() + p * I3;
      for (std::size_t i = 0; i < I3; ++i) c[i] += fit.z[p] * col[i];
    }
    subtract_rank_one_inplace(residual, fit.lambda, fit.a, fit.b, c);

    const double res_norm = frobenius_norm(residual);
    out.report.rounds.push_back({round + 1, fit.lambda, fit.tau, fit.bic,
                                 fit.support.size(), res_norm,
                                 out.report.input_norm > 0 ? res_norm / out.report.input_norm
                                                           : 0.0});
    out.report.tau_traces.push_back(sel.trace);

    out.model.weights.push_back(fit.lambda);
    a_cols.insert(a_cols.end(), fit.a.begin(), fit.a.end());
    b_cols.insert(b_cols.end(), fit.b.begin(), fit.b.end());
    z_cols.insert(z_cols.end(), fit.z.begin(), fit.z.end());

    policy.previous_tau = fit.tau;
  }

  const std::size_t r = out.model.weights.size();
  out.model.a = DenseMatrix(I1, r, std::move(a_cols));
  out.model.b = DenseMatrix(I2, r, std::move(b_cols));
  out.model.z = DenseMatrix(P, r, std::move(z_cols));
  return out;
}

}  // namespace sctd
