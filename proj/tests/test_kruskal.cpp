#include <doctest.h>

#include <cmath>

#include "sctd/kruskal.hpp"
#include "sctd/rng.hpp"
#include "sctd/synthetic.hpp"

using namespace sctd;

namespace {

// One-hot z against a small gaussian dictionary makes hand calculations easy.
Dictionary small_dict() {
  std::vector<double> t(8);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<double>(i);
  return build_gaussians(t, {2.0, 5.0}, {1.5});
}

}  // namespace

TEST_CASE("rank-0 model densifies to the zero tensor") {
  const Dictionary d = small_dict();
  KruskalModel m;
  m.dictionary_id = d.id;
  m.a = DenseMatrix(3, 0);
  m.b = DenseMatrix(4, 0);
  m.z = DenseMatrix(d.prototype_count(), 0);
  const DenseTensor3 x = kruskal_to_dense(m, d);
  CHECK(x.dims() == Dims3{3, 4, 8});
  CHECK(frobenius_norm(x) == 0.0);
}

TEST_CASE("single component with basis spatial factors fills one fiber") {
  const Dictionary d = small_dict();
  KruskalModel m;
  m.dictionary_id = d.id;
  m.weights = {2.0};
  m.a = DenseMatrix(3, 1, {0, 1, 0});
  m.b = DenseMatrix(4, 1, {0, 0, 1, 0});
  m.z = DenseMatrix(2, 1, {1, 0});
  const DenseTensor3 x = kruskal_to_dense(m, d);
  for (std::size_t i1 = 0; i1 < 3; ++i1)
    for (std::size_t i2 = 0; i2 < 4; ++i2)
      for (std::size_t i3 = 0; i3 < 8; ++i3) {
        const double want = (i1 == 1 && i2 == 2) ? 2.0 * d.matrix(i3, 0) : 0.0;
        CHECK(x.at(i1, i2, i3) == doctest::Approx(want).epsilon(1e-15));
      }
}

TEST_CASE("phantom model densifies back to the generated clean tensor") {
  const PlantedModel planted = make_phantom();
  const DenseTensor3 rebuilt = kruskal_to_dense(planted.model, planted.dictionary);
  REQUIRE(rebuilt.dims() == planted.clean.dims());
  double max_abs_diff = 0.0;
  for (std::size_t i = 0; i < rebuilt.size(); ++i)
    max_abs_diff = std::max(max_abs_diff,
                            std::abs(rebuilt.values()[i] - planted.clean.values()[i]));
  CHECK(max_abs_diff < 1e-12 * frobenius_norm(planted.clean));
}

TEST_CASE("component-wise and matricized densification agree") {
  const Dictionary d = small_dict();
  Rng rng(Rng::mix(9));
  KruskalModel m;
  m.dictionary_id = d.id;
  m.weights = {1.5, 0.7, 0.2};
  std::vector<double> av, bv, zv;
  for (std::size_t r = 0; r < 3; ++r) {
    for (double x : rng.unit_sphere(5)) av.push_back(x);
    for (double x : rng.unit_sphere(6)) bv.push_back(x);
    for (double x : rng.unit_sphere(2)) zv.push_back(x);
  }
  m.a = DenseMatrix(5, 3, std::move(av));
  m.b = DenseMatrix(6, 3, std::move(bv));
  m.z = DenseMatrix(2, 3, std::move(zv));

  const DenseTensor3 x1 = kruskal_to_dense(m, d);
  const DenseTensor3 x2 = kruskal_to_dense_matricized(m, d);
  REQUIRE(x1.dims() == x2.dims());
  const double scale = frobenius_norm(x1);
  for (std::size_t i = 0; i < x1.size(); ++i)
    CHECK(std::abs(x1.values()[i] - x2.values()[i]) < 1e-10 * scale);
}

TEST_CASE("truncate keeps the leading components in order") {
  const PlantedModel planted = make_phantom();
  const KruskalModel& m = planted.model;
  REQUIRE(m.rank() == 3);
  const KruskalModel t2 = truncate(m, 2);
  CHECK(t2.rank() == 2);
  CHECK(t2.weights[0] == m.weights[0]);
  CHECK(t2.weights[1] == m.weights[1]);
  CHECK(t2.a.cols() == 2);
  CHECK(t2.dictionary_id == m.dictionary_id);
  for (std::size_t i = 0; i < m.a.rows(); ++i) {
    CHECK(t2.a(i, 0) == m.a(i, 0));
    CHECK(t2.a(i, 1) == m.a(i, 1));
  }
  const KruskalModel t0 = truncate(m, 0);
  CHECK(t0.rank() == 0);
  CHECK(frobenius_norm(kruskal_to_dense(t0, planted.dictionary)) == 0.0);
  CHECK(truncate(m, 4).rank() == 3);  // k past the rank is the identity
}

TEST_CASE("temporal modes are the dictionary combinations per component") {
  const Dictionary d = small_dict();
  KruskalModel m;
  m.dictionary_id = d.id;
  m.weights = {1.0};
  m.a = DenseMatrix(2, 1, {1, 0});
  m.b = DenseMatrix(2, 1, {1, 0});
  m.z = DenseMatrix(2, 1, {0.6, -0.8});
  const auto modes = temporal_modes(m, d);
  REQUIRE(modes.size() == 1);
  REQUIRE(modes[0].size() == 8);
  for (std::size_t i = 0; i < 8; ++i)
    CHECK(modes[0][i] ==
          doctest::Approx(0.6 * d.matrix(i, 0) - 0.8 * d.matrix(i, 1)).epsilon(1e-14));
}
