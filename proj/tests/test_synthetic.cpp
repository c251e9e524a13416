#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <limits>

#include "sctd/decompose.hpp"
#include "sctd/rng.hpp"
#include "sctd/synthetic.hpp"

using namespace sctd;

TEST_CASE("phantom structure matches its configuration") {
  const PlantedModel planted = make_phantom();
  REQUIRE(planted.model.rank() == 3);
  REQUIRE(planted.truth_specs.size() == 3);
  CHECK(planted.clean.dims() == Dims3{40, 40, 129});

  CHECK(planted.truth_specs[0].kind == PrototypeKind::windowed_cosine);
  CHECK(planted.truth_specs[0].frequency == doctest::Approx(0.0982).epsilon(1e-12));
  CHECK(planted.truth_specs[1].kind == PrototypeKind::windowed_sine);
  CHECK(planted.truth_specs[1].frequency == doctest::Approx(0.3927).epsilon(1e-12));
  CHECK(planted.truth_specs[2].frequency == doctest::Approx(0.7854).epsilon(1e-12));

  // The third temporal mode lives on [64.8, 98.1] and is zero elsewhere.
  const auto modes = temporal_modes(planted.model, planted.dictionary);
  REQUIRE(modes.size() == 3);
  const auto t = phantom_time_axis();
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < 64.8 || t[i] > 98.1) CHECK(modes[2][i] == 0.0);
  }
  double inside = 0.0;
  for (double x : modes[2]) inside += x * x;
  CHECK(inside > 0.0);

  // Temporal modes are pairwise well separated.
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t s = r + 1; s < 3; ++s) {
      const double cos_rs =
          dot(modes[r], modes[s]) / (norm2(modes[r]) * norm2(modes[s]));
      CHECK(std::abs(cos_rs) < 0.5);
    }
}

TEST_CASE("phantom fibers are sums of weighted temporal modes") {
  const PlantedModel planted = make_phantom();
  const auto modes = temporal_modes(planted.model, planted.dictionary);
  const KruskalModel& m = planted.model;
  const std::size_t i1 = 12, i2 = 30;
  for (std::size_t i3 = 0; i3 < 129; ++i3) {
    double want = 0.0;
    for (std::size_t r = 0; r < 3; ++r)
      want += m.weights[r] * m.a(i1, r) * m.b(i2, r) * modes[r][i3];
    CHECK(planted.clean.at(i1, i2, i3) == doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("spectral noise with sigma 0 is the identity") {
  const PlantedModel planted = make_phantom();
  const DenseTensor3 out = add_spectral_noise(planted.clean, NoiseSpec{0.0, 7});
  double max_diff = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i)
    max_diff = std::max(max_diff,
                        std::abs(out.values()[i] - planted.clean.values()[i]));
  CHECK(max_diff < 1e-12 * frobenius_norm(planted.clean));
}

TEST_CASE("spectral noise is deterministic in the seed and linear in sigma") {
  std::vector<double> series(33);
  Rng src(Rng::mix(88));
  for (auto& x : series) x = src.next_gaussian();

  Rng r1(Rng::mix(5)), r2(Rng::mix(5)), r3(Rng::mix(5)), r4(Rng::mix(6));
  const auto n1 = add_spectral_noise(series, 1.0, r1);
  const auto n1b = add_spectral_noise(series, 1.0, r2);
  const auto n2 = add_spectral_noise(series, 2.0, r3);
  const auto other = add_spectral_noise(series, 1.0, r4);
  CHECK(n1 == n1b);
  double diff_seed = 0.0;
  for (std::size_t i = 0; i < series.size(); ++i) {
    // Same draws scaled twice as hard: the added noise doubles exactly.
    CHECK(n2[i] - series[i] ==
          doctest::Approx(2.0 * (n1[i] - series[i])).epsilon(1e-10));
    diff_seed = std::max(diff_seed, std::abs(n1[i] - other[i]));
  }
  CHECK(diff_seed > 0.0);
  CHECK_THROWS_AS(add_spectral_noise(std::vector<double>{}, 1.0, r1),
                  std::invalid_argument);
}

TEST_CASE("per-fiber noise energy tracks sigma^2") {
  // The conjugate-symmetric spectrum carries 2n - 1 real draws of variance
  // sigma^2 (the paired bins count their conjugates too), and Parseval with
  // the 1/n inverse convention divides by n, so the expected time-domain
  // energy per fiber is (2n - 1)/n * sigma^2. Average over many fibers and
  // ask for 10%.
  const std::size_t n = 65, fibers = 400;
  std::vector<double> series(n, 0.0);
  const double sigma = 1.5;
  double total = 0.0;
  Rng rng(Rng::mix(99));
  for (std::size_t f = 0; f < fibers; ++f) {
    Rng child = rng.child(f);
    const auto noisy = add_spectral_noise(series, sigma, child);
    for (double x : noisy) total += x * x;
  }
  const double mean_energy = total / static_cast<double>(fibers);
  const double want =
      (2.0 * static_cast<double>(n) - 1.0) / static_cast<double>(n) * sigma * sigma;
  CHECK(mean_energy == doctest::Approx(want).epsilon(0.10));
}

TEST_CASE("snr identities") {
  const DenseTensor3 s({2, 2, 2}, {1, 2, 3, 4, 5, 6, 7, 8});
  const DenseTensor3 zero({2, 2, 2});
  CHECK(snr(s, zero) == std::numeric_limits<double>::infinity());
  CHECK(snr(s, s) == doctest::Approx(1.0).epsilon(1e-15));
  std::vector<double> half(s.values());
  for (auto& x : half) x *= 0.5;
  CHECK(snr(s, DenseTensor3({2, 2, 2}, std::move(half))) ==
        doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("relative_error identities") {
  const DenseTensor3 s({2, 2, 2}, {1, 2, 3, 4, 5, 6, 7, 8});
  const DenseTensor3 zero({2, 2, 2});
  CHECK(relative_error(s, s) == 0.0);
  CHECK(relative_error(s, zero) == doctest::Approx(1.0).epsilon(1e-15));
  std::vector<double> twice(s.values());
  for (auto& x : twice) x *= 2.0;
  CHECK(relative_error(s, DenseTensor3({2, 2, 2}, std::move(twice))) ==
        doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("factor_accuracy is exact on the truth and invariant to relabeling") {
  const PlantedModel planted = make_phantom();
  CHECK(factor_accuracy(planted, planted.model, planted.dictionary) ==
        doctest::Approx(1.0).epsilon(1e-12));

  // Permute the components and flip a sign pair; the score must not move.
  const KruskalModel& m = planted.model;
  KruskalModel shuffled;
  shuffled.dictionary_id = m.dictionary_id;
  const std::size_t order[3] = {2, 0, 1};
  std::vector<double> av, bv, zv;
  for (std::size_t k = 0; k < 3; ++k) {
    const std::size_t r = order[k];
    shuffled.weights.push_back(m.weights[r]);
    const double flip = k == 1 ? -1.0 : 1.0;
    for (std::size_t i = 0; i < m.a.rows(); ++i) av.push_back(flip * m.a(i, r));
    for (std::size_t i = 0; i < m.b.rows(); ++i) bv.push_back(m.b(i, r));
    for (std::size_t i = 0; i < m.z.rows(); ++i) zv.push_back(flip * m.z(i, r));
  }
  shuffled.a = DenseMatrix(m.a.rows(), 3, std::move(av));
  shuffled.b = DenseMatrix(m.b.rows(), 3, std::move(bv));
  shuffled.z = DenseMatrix(m.z.rows(), 3, std::move(zv));
  CHECK(factor_accuracy(planted, shuffled, planted.dictionary) ==
        doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("top_mode_frequency reports the dominant prototype") {
  const PlantedModel planted = make_phantom();
  std::vector<double> z(planted.dictionary.prototype_count(), 0.0);
  z[1] = -0.9;
  const TopMode top = top_mode_frequency(z, planted.dictionary);
  REQUIRE(top.present);
  CHECK(top.prototype_index == 1);
  CHECK(top.kind == planted.dictionary.specs[1].kind);
  CHECK(top.frequency == planted.dictionary.specs[1].frequency);
  CHECK(top.coefficient == -0.9);

  const TopMode none =
      top_mode_frequency(std::vector<double>(z.size(), 0.0), planted.dictionary);
  CHECK(!none.present);
}

TEST_CASE("reconstruction error curve is nonincreasing against the target") {
  const PlantedModel planted = make_phantom();
  const auto curve = reconstruction_error_curve(planted.model, planted.dictionary,
                                                planted.clean, &planted.clean);
  REQUIRE(curve.size() == 3);  // one point per retained rank
  CHECK(curve.front().rank == 1);
  CHECK(curve.front().error_vs_target < 1.0);
  for (std::size_t i = 1; i < curve.size(); ++i)
    CHECK(curve[i].error_vs_target <= curve[i - 1].error_vs_target + 1e-12);
  CHECK(curve.back().error_vs_target < 1e-10);
  REQUIRE(curve.back().error_vs_clean.has_value());
  CHECK(*curve.back().error_vs_clean ==
        doctest::Approx(curve.back().error_vs_target).epsilon(1e-9));
}

TEST_CASE("library presets hit their advertised sizes") {
  struct Tier {
    std::size_t target, want;
  };
  for (const Tier tier : {Tier{1000, 1872}, Tier{3000, 3744}}) {
    const Dictionary d = dictionary_from_config(misspecified_library_config(tier.target));
    CHECK(d.prototype_count() == tier.want);
    CHECK(d.sample_count() == 129);
  }
  const Dictionary matched = dictionary_from_config(matched_library_config());
  CHECK(matched.prototype_count() == 3747);

  // The misspecified grids never contain the exact planted prototypes.
  const PlantedModel planted = make_phantom();
  const Dictionary mis = dictionary_from_config(misspecified_library_config(3000));
  for (const auto& spec : mis.specs)
    for (const auto& truth : planted.truth_specs) CHECK(!(spec == truth));
}

TEST_CASE("run_sweep produces one row per grid point with derived seeds") {
  SweepConfig cfg;
  cfg.solver.seed = 17;
  cfg.solver.max_rank = 3;
  const std::vector<double> grid = {0.5, 1.0};
  const auto rows = run_sweep(SweepKind::noise, grid, cfg);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].param == 0.5);
  CHECK(rows[1].param == 1.0);
  CHECK(rows[0].seed != rows[1].seed);
  for (const auto& row : rows) {
    CHECK(row.relative_error_clean > 0.0);
    CHECK(row.relative_error_clean < 1.0);
    CHECK(row.factor_accuracy > 0.5);
    CHECK(row.nnz_total > 0);
    CHECK(row.snr > 0.0);
  }
  CHECK(rows[0].snr > rows[1].snr);
}
