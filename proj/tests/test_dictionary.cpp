#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <numbers>

#include "sctd/dictionary.hpp"
#include "sctd/synthetic.hpp"

using namespace sctd;

namespace {

std::vector<double> axis129() { return phantom_time_axis(); }

}  // namespace

TEST_CASE("all dictionary columns are unit-normalized") {
  const Dictionary d = build_windowed_sinusoids(axis129(), {0.1, 0.4, 0.8}, {32, 64, 96},
                                                {34, 66}, true, true);
  REQUIRE(d.prototype_count() > 0);
  for (std::size_t p = 0; p < d.prototype_count(); ++p)
    CHECK(norm2(d.matrix.column(p)) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("zero-frequency windowed cosine over the full span is constant") {
  const auto t = axis129();
  const Dictionary d = build_windowed_sinusoids(t, {0.0}, {64.0}, {200.0}, false, true);
  REQUIRE(d.prototype_count() == 1);
  const double want = 1.0 / std::sqrt(static_cast<double>(t.size()));
  for (std::size_t i = 0; i < t.size(); ++i)
    CHECK(d.matrix(i, 0) == doctest::Approx(want).epsilon(1e-14));
}

TEST_CASE("zero-frequency sine columns are dropped, not kept as zeros") {
  const Dictionary d = build_windowed_sinusoids(axis129(), {0.0, 0.5}, {64.0}, {66.0},
                                                true, false);
  CHECK(d.prototype_count() == 1);
  CHECK(d.dropped_zero_columns == 1);
  CHECK(d.specs[0].frequency == 0.5);
}

TEST_CASE("windowed sinusoid vanishes outside its window") {
  const auto t = axis129();
  const Dictionary d = build_windowed_sinusoids(t, {0.3927}, {32.0}, {64.0}, true, false);
  REQUIRE(d.prototype_count() == 1);
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] > 64.0) CHECK(d.matrix(i, 0) == 0.0);
  }
  // Inside the window the samples track sin(omega t) up to the normalization.
  const auto col = d.matrix.column(0);
  const double scale = col[1] / std::sin(0.3927 * t[1]);
  for (std::size_t i = 0; i <= 64; ++i)
    CHECK(col[i] == doctest::Approx(scale * std::sin(0.3927 * t[i])).epsilon(1e-12));
}

TEST_CASE("gaussian columns are symmetric and flatten as sigma grows") {
  const auto t = axis129();
  const Dictionary d = build_gaussians(t, {64.0}, {8.0, 1e6});
  REQUIRE(d.prototype_count() == 2);
  for (std::size_t i = 0; i < t.size(); ++i)
    CHECK(d.matrix(i, 0) == doctest::Approx(d.matrix(t.size() - 1 - i, 0)).epsilon(1e-12));
  // Huge sigma: the bump degenerates to the constant unit vector.
  const double flat = 1.0 / std::sqrt(static_cast<double>(t.size()));
  for (std::size_t i = 0; i < t.size(); ++i)
    CHECK(d.matrix(i, 1) == doctest::Approx(flat).epsilon(1e-6));
}

TEST_CASE("gaussian pair correlation follows exp(-delta^2 / (4 sigma^2))") {
  // For two unit Gaussians with equal sigma and mean gap delta, far from the
  // boundary, the continuous inner product is exp(-delta^2 / (4 sigma^2)).
  std::vector<double> t(1025);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<double>(i);
  const double sigma = 20.0, delta = 30.0;
  const Dictionary d = build_gaussians(t, {480.0, 480.0 + delta}, {sigma});
  REQUIRE(d.prototype_count() == 2);
  const double got = dot(d.matrix.column(0), d.matrix.column(1));
  const double want = std::exp(-delta * delta / (4 * sigma * sigma));
  CHECK(got == doctest::Approx(want).epsilon(0.02));
}

TEST_CASE("wrapped cosine basics") {
  const auto t = axis129();
  const double span = (t.back() - t.front()) * 129.0 / 128.0;

  const Dictionary dk0 = build_wrapped_cosines(t, {0.0}, {0.0});
  const double flat = 1.0 / std::sqrt(static_cast<double>(t.size()));
  for (std::size_t i = 0; i < t.size(); ++i)
    CHECK(dk0.matrix(i, 0) == doctest::Approx(flat).epsilon(1e-14));

  // Odd period count: a half-span phase shift negates the column.
  const Dictionary d = build_wrapped_cosines(t, {3.0}, {0.0, span / 2});
  REQUIRE(d.prototype_count() == 2);
  for (std::size_t i = 0; i < t.size(); ++i)
    CHECK(d.matrix(i, 1) == doctest::Approx(-d.matrix(i, 0)).epsilon(1e-12));

  // Periodicity: sampling one full span past the start reproduces the start.
  const Dictionary dp = build_wrapped_cosines(t, {5.0}, {7.0});
  const double w = 2 * std::numbers::pi * 5.0 / span;
  CHECK(std::cos(w * (t.front() + span - 7.0)) ==
        doctest::Approx(std::cos(w * (t.front() - 7.0))).epsilon(1e-12));
  CHECK(dp.prototype_count() == 1);
}

TEST_CASE("reconstruct regenerates any built column from its spec") {
  const auto t = axis129();
  const Dictionary d = concat({build_windowed_sinusoids(t, {0.2, 0.6}, {40, 90}, {50}, true, true),
                               build_gaussians(t, {30, 100}, {12}),
                               build_wrapped_cosines(t, {1, 4}, {0, 10})});
  for (std::size_t p = 0; p < d.prototype_count(); ++p) {
    const auto col = reconstruct(d.specs[p], t);
    REQUIRE(col.has_value());
    for (std::size_t i = 0; i < t.size(); ++i)
      CHECK((*col)[i] == doctest::Approx(d.matrix(i, p)).epsilon(1e-14));
  }
  PrototypeSpec dead;
  dead.kind = PrototypeKind::windowed_sine;
  dead.frequency = 0.0;
  dead.window_center = 64;
  dead.window_width = 20;
  CHECK(!reconstruct(dead, t).has_value());
}

TEST_CASE("concat stacks columns and validates axes") {
  const auto t = axis129();
  const Dictionary g = build_gaussians(t, {20, 60, 100}, {10});
  const Dictionary both = concat({g, g});
  CHECK(both.prototype_count() == 2 * g.prototype_count());
  CHECK(both.sample_count() == g.sample_count());
  for (std::size_t p = 0; p < g.prototype_count(); ++p)
    for (std::size_t i = 0; i < t.size(); ++i)
      CHECK(both.matrix(i, p + g.prototype_count()) == g.matrix(i, p));

  CHECK_THROWS_AS(concat({}), std::invalid_argument);
  std::vector<double> other(64);
  for (std::size_t i = 0; i < other.size(); ++i) other[i] = static_cast<double>(i);
  CHECK_THROWS_AS(concat({g, build_gaussians(other, {20}, {10})}), std::invalid_argument);
}

TEST_CASE("content hash distinguishes dictionaries and is reproducible") {
  const auto t = axis129();
  const Dictionary a = build_gaussians(t, {20, 60}, {10});
  const Dictionary b = build_gaussians(t, {20, 60}, {10});
  const Dictionary c = build_gaussians(t, {20, 61}, {10});
  CHECK(a.id == b.id);
  CHECK(a.id != c.id);
  CHECK(a.id != 0);
}

TEST_CASE("dictionary_from_config parses ranges and families") {
  const std::string cfg = R"({
    "time_axis": {"start": 0, "step": 1, "count": 129},
    "families": [
      {"kind": "windowed_sinusoid",
       "frequencies": [0.1, 0.2],
       "centers": {"start": 16, "step": 32, "count": 3},
       "widths": [34]},
      {"kind": "gaussian", "mus": [40, 80], "sigmas": [12]}
    ]
  })";
  const Dictionary d = dictionary_from_config(cfg);
  CHECK(d.sample_count() == 129);
  CHECK(d.prototype_count() == 2 * 2 * 3 + 2);
  CHECK(d.time_axis == axis129());

  CHECK_THROWS(dictionary_from_config("{\"time_axis\": []}"));
  CHECK_THROWS(dictionary_from_config(R"({
    "time_axis": {"start": 0, "step": 1, "count": 8},
    "families": [{"kind": "mystery"}]
  })"));
}

TEST_CASE("builders reject empty or invalid parameter grids") {
  const auto t = axis129();
  CHECK_THROWS_AS(build_windowed_sinusoids(t, {}, {64}, {34}, true, true),
                  std::invalid_argument);
  CHECK_THROWS_AS(build_windowed_sinusoids(t, {0.1}, {64}, {34}, false, false),
                  std::invalid_argument);
  CHECK_THROWS_AS(build_windowed_sinusoids(t, {-0.1}, {64}, {34}, true, true),
                  std::invalid_argument);
  CHECK_THROWS_AS(build_gaussians(t, {64}, {0.0}), std::invalid_argument);
  CHECK_THROWS_AS(build_gaussians({}, {64}, {1.0}), std::invalid_argument);
  CHECK_THROWS_AS(build_wrapped_cosines(t, {-1}, {0}), std::invalid_argument);
}
