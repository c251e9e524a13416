#include <doctest.h>

#include <stdexcept>

#include "sctd/decompose.hpp"
#include "sctd/synthetic.hpp"

using namespace sctd;

TEST_CASE("decomposition of a zero tensor yields an empty model") {
  const Dictionary d = dictionary_from_config(misspecified_library_config(1000));
  const DenseTensor3 zero({6, 6, 129});
  const DecompositionResult res = sctd_decompose(zero, d, SolverConfig{}, TauPolicy{});
  CHECK(res.model.rank() == 0);
  CHECK(res.report.rounds.empty());
  CHECK(res.model.a.rows() == 6);
  CHECK(res.model.z.rows() == d.prototype_count());
}

TEST_CASE("max_rank 0 is a no-op") {
  const PlantedModel planted = make_phantom();
  SolverConfig cfg;
  cfg.max_rank = 0;
  const DecompositionResult res =
      sctd_decompose(planted.clean, planted.dictionary, cfg, TauPolicy{});
  CHECK(res.model.rank() == 0);
  CHECK(res.report.input_norm == doctest::Approx(frobenius_norm(planted.clean)));
}

TEST_CASE("dictionary length must match the temporal extent") {
  const Dictionary d = dictionary_from_config(misspecified_library_config(1000));
  CHECK_THROWS_AS(sctd_decompose(DenseTensor3({4, 4, 64}), d, SolverConfig{}, TauPolicy{}),
                  std::invalid_argument);
}

TEST_CASE("noisy phantom with the matched library is recovered accurately") {
  const PlantedModel planted = make_phantom();
  const DenseTensor3 noisy = add_spectral_noise(planted.clean, NoiseSpec{1.0, 0});
  const Dictionary dict = dictionary_from_config(matched_library_config());

  SolverConfig cfg;
  cfg.seed = 0;
  const DecompositionResult res = sctd_decompose(noisy, dict, cfg, TauPolicy{});
  REQUIRE(res.model.rank() == 3);

  const DenseTensor3 dense = kruskal_to_dense(res.model, dict);
  CHECK(relative_error(planted.clean, dense) <= 0.12);
  CHECK(factor_accuracy(planted, res.model, dict) >= 0.9);

  // Report bookkeeping: rounds align with the model, the residual is
  // nonincreasing and weights are positive.
  REQUIRE(res.report.rounds.size() == 3);
  REQUIRE(res.report.tau_traces.size() == 3);
  double prev = res.report.input_norm;
  for (std::size_t r = 0; r < 3; ++r) {
    const RoundRecord& round = res.report.rounds[r];
    CHECK(round.rank_index == r + 1);
    CHECK(round.lambda > 0.0);
    CHECK(round.lambda == res.model.weights[r]);
    CHECK(round.nnz > 0);
    CHECK(round.residual_norm <= prev + 1e-9);
    CHECK(round.relative_residual ==
          doctest::Approx(round.residual_norm / res.report.input_norm).epsilon(1e-12));
    prev = round.residual_norm;
  }
}

TEST_CASE("decomposition is deterministic for a fixed seed") {
  const PlantedModel planted = make_phantom();
  const DenseTensor3 noisy = add_spectral_noise(planted.clean, NoiseSpec{1.0, 4});
  const Dictionary dict = dictionary_from_config(misspecified_library_config(1000));

  SolverConfig cfg;
  cfg.seed = 123;
  const DecompositionResult r1 = sctd_decompose(noisy, dict, cfg, TauPolicy{});
  const DecompositionResult r2 = sctd_decompose(noisy, dict, cfg, TauPolicy{});
  REQUIRE(r1.model.rank() == r2.model.rank());
  CHECK(r1.model.weights == r2.model.weights);
  CHECK(r1.model.a.values() == r2.model.a.values());
  CHECK(r1.model.b.values() == r2.model.b.values());
  CHECK(r1.model.z.values() == r2.model.z.values());
}
