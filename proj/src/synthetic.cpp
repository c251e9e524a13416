#include "sctd/synthetic.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace sctd {
namespace {

std::vector<double> gaussian_bump(std::size_t n, double center, double sigma) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double d = static_cast<double>(i) - center;
    v[i] = std::exp(-d * d / (2 * sigma * sigma));
  }
  const double norm = norm2(v);
  for (auto& x : v) x /= norm;
  return v;
}

using Cplx = std::complex<double>;

std::vector<Cplx> dft_twiddles(std::size_t n) {
  std::vector<Cplx> w(n * n);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t t = 0; t < n; ++t) {
      const double phi = -2.0 * std::numbers::pi * static_cast<double>(k * t % n) /
                         static_cast<double>(n);
      w[k * n + t] = {std::cos(phi), std::sin(phi)};
    }
  return w;
}

// Conjugate-symmetric frequency-domain noise: bin 0 (and the Nyquist bin for
// even n) gets a real draw, bins k and n-k get a complex draw and its
// conjugate. Draw order is fixed so a fiber's noise depends only on its RNG.
std::vector<double> noisy_fiber(const std::vector<double>& series, double sigma, Rng& rng,
                                const std::vector<Cplx>& w) {
  const std::size_t n = series.size();
  std::vector<Cplx> spectrum(n);
  for (std::size_t k = 0; k < n; ++k) {
    Cplx acc{0, 0};
    for (std::size_t t = 0; t < n; ++t) acc += series[t] * w[k * n + t];
    spectrum[k] = acc;
  }
  spectrum[0] += sigma * rng.next_gaussian();
  const std::size_t half = n / 2;
  for (std::size_t k = 1; k <= (n - 1) / 2; ++k) {
    const Cplx g{sigma * rng.next_gaussian(), sigma * rng.next_gaussian()};
    spectrum[k] += g;
    spectrum[n - k] += std::conj(g);
  }
  if (n % 2 == 0 && half >= 1) spectrum[half] += sigma * rng.next_gaussian();

  std::vector<double> out(n);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t t = 0; t < n; ++t) {
    Cplx acc{0, 0};
    for (std::size_t k = 0; k < n; ++k) acc += spectrum[k] * std::conj(w[k * n + t]);
    out[t] = acc.real() * inv_n;
  }
  return out;
}

std::vector<double> linear_grid(double start, double step, std::size_t count) {
  std::vector<double> v(count);
  for (std::size_t i = 0; i < count; ++i) v[i] = start + step * static_cast<double>(i);
  return v;
}

nlohmann::json sinusoid_family(std::vector<double> freqs, std::vector<double> centers,
                               std::vector<double> widths) {
  return {{"kind", "windowed_sinusoid"},
          {"frequencies", freqs},
          {"centers", centers},
          {"widths", widths},
          {"include_sine", true},
          {"include_cosine", true}};
}

}  // namespace

std::vector<double> phantom_time_axis() { return linear_grid(0.0, 1.0, 129); }

PhantomConfig default_phantom_config() {
  // Weight calibrated so that sigma=3 frequency-domain noise on the 40x40x129
  // phantom gives SNR ~ 0.1374 (and sigma=0.1 gives ~123.8).
  constexpr double kLambda = 36.2481;
  const auto windowed = [](PrototypeKind kind, double freq, double center, double width) {
    PrototypeSpec s;
    s.kind = kind;
    s.frequency = freq;
    s.window_center = center;
    s.window_width = width;
    return s;
  };
  PhantomConfig cfg;
  cfg.components = {
      {10, 10, 4, 4, windowed(PrototypeKind::windowed_cosine, 0.0982, 64.0, 128.0), kLambda},
      {28, 13, 5, 5, windowed(PrototypeKind::windowed_sine, 0.3927, 31.75, 63.5), kLambda},
      {16, 30, 4, 4, windowed(PrototypeKind::windowed_sine, 0.7854, 81.45, 33.3), kLambda},
  };
  return cfg;
}

PlantedModel make_phantom(Dims3 spatial_dims, const std::vector<double>& time_axis,
                          const PhantomConfig& config) {
  if (time_axis.empty() || time_axis.front() > 0.0 || time_axis.back() < 128.0)
    throw std::invalid_argument("make_phantom: time axis must span at least [0, 128]");
  const std::size_t r = config.components.size();

  PlantedModel out;
  // Dictionary holding exactly the planted prototypes, one per component.
  {
    std::vector<double> cols;
    std::vector<PrototypeSpec> specs;
    for (const auto& comp : config.components) {
      auto col = reconstruct(comp.temporal, time_axis);
      if (!col) throw std::invalid_argument("make_phantom: temporal prototype is zero");
      cols.insert(cols.end(), col->begin(), col->end());
      specs.push_back(comp.temporal);
    }
    out.dictionary.matrix = DenseMatrix(time_axis.size(), r, std::move(cols));
    out.dictionary.specs = specs;
    out.dictionary.time_axis = time_axis;
    out.dictionary.id = dictionary_content_hash(out.dictionary.matrix, specs);
    out.truth_specs = std::move(specs);
  }

  KruskalModel& m = out.model;
  m.dictionary_id = out.dictionary.id;
  m.a = DenseMatrix(spatial_dims.i1, r);
  m.b = DenseMatrix(spatial_dims.i2, r);
  m.z = DenseMatrix(r, r);
  for (std::size_t k = 0; k < r; ++k) {
    const auto& comp = config.components[k];
    const auto a = gaussian_bump(spatial_dims.i1, comp.center_x, comp.sigma_x);
    const auto b = gaussian_bump(spatial_dims.i2, comp.center_y, comp.sigma_y);
    for (std::size_t i = 0; i < a.size(); ++i) m.a(i, k) = a[i];
    for (std::size_t i = 0; i < b.size(); ++i) m.b(i, k) = b[i];
    m.z(k, k) = 1.0;
    m.weights.push_back(comp.lambda);
  }
  out.clean = kruskal_to_dense(m, out.dictionary);
  return out;
}

PlantedModel make_phantom() {
  return make_phantom({40, 40, 129}, phantom_time_axis(), default_phantom_config());
}

std::vector<double> add_spectral_noise(const std::vector<double>& series, double sigma,
                                       Rng& rng) {
  if (series.empty()) throw std::invalid_argument("add_spectral_noise: empty series");
  return noisy_fiber(series, sigma, rng, dft_twiddles(series.size()));
}

DenseTensor3 add_spectral_noise(const DenseTensor3& t, const NoiseSpec& spec) {
  // sigma 0 must be an exact no-op; the transform round trip would otherwise
  // perturb the low-order bits.
  if (spec.sigma == 0.0) return t;
  const auto [I1, I2, I3] = t.dims();
  const auto w = dft_twiddles(I3);
  const Rng base(Rng::mix(spec.seed ^ 0x6e6f697365ULL));
  DenseTensor3 out(t.dims());
  std::vector<double> fiber(I3);
  for (std::size_t i2 = 0; i2 < I2; ++i2)
    for (std::size_t i1 = 0; i1 < I1; ++i1) {
      for (std::size_t i3 = 0; i3 < I3; ++i3) fiber[i3] = t.at(i1, i2, i3);
      Rng rng = base.child(i1 + I1 * i2);
      const auto noisy = noisy_fiber(fiber, spec.sigma, rng, w);
      for (std::size_t i3 = 0; i3 < I3; ++i3) out.at(i1, i2, i3) = noisy[i3];
    }
  return out;
}

double snr(const DenseTensor3& signal, const DenseTensor3& noise) {
  if (!(signal.dims() == noise.dims())) throw std::invalid_argument("snr: dim mismatch");
  const double n2 = dot(noise.values(), noise.values());
  if (n2 == 0.0) return std::numeric_limits<double>::infinity();
  return dot(signal.values(), signal.values()) / n2;
}

double relative_error(const DenseTensor3& ref, const DenseTensor3& model_dense) {
  if (!(ref.dims() == model_dense.dims()))
    throw std::invalid_argument("relative_error: dim mismatch");
  const double ref_norm = frobenius_norm(ref);
  if (ref_norm == 0.0) throw std::invalid_argument("relative_error: zero reference tensor");
  std::vector<double> diff(ref.size());
  for (std::size_t i = 0; i < diff.size(); ++i)
    diff[i] = ref.values()[i] - model_dense.values()[i];
  return norm2(diff) / ref_norm;
}

namespace {

double abs_cosine(std::span<const double> x, std::span<const double> y) {
  const double nx = norm2(x), ny = norm2(y);
  if (nx == 0.0 || ny == 0.0) return 0.0;
  return std::abs(dot(x, y)) / (nx * ny);
}

}  // namespace

double factor_accuracy(const PlantedModel& truth, const KruskalModel& fitted,
                       const Dictionary& fitted_dict) {
  const std::size_t rt = truth.model.rank();
  if (rt == 0 || fitted.rank() == 0) return 0.0;
  const KruskalModel trimmed = truncate(fitted, rt);
  const auto truth_c = temporal_modes(truth.model, truth.dictionary);
  const auto fit_c = temporal_modes(trimmed, fitted_dict);

  std::vector<bool> used_truth(rt, false), used_fit(trimmed.rank(), false);
  double total = 0.0;
  std::size_t matched = 0;
  for (std::size_t step = 0; step < std::min(rt, trimmed.rank()); ++step) {
    double best = -1.0;
    std::size_t bi = 0, bj = 0;
    for (std::size_t i = 0; i < rt; ++i) {
      if (used_truth[i]) continue;
      for (std::size_t j = 0; j < trimmed.rank(); ++j) {
        if (used_fit[j]) continue;
        const double s = abs_cosine(truth_c[i], fit_c[j]);
        if (s > best) {
          best = s;
          bi = i;
          bj = j;
        }
      }
    }
    used_truth[bi] = true;
    used_fit[bj] = true;
    const double sa = abs_cosine(truth.model.a.column(bi), trimmed.a.column(bj));
    const double sb = abs_cosine(truth.model.b.column(bi), trimmed.b.column(bj));
    const double sc = abs_cosine(truth_c[bi], fit_c[bj]);
    total += (sa + sb + sc) / 3.0;
    ++matched;
  }
  (void)matched;
  // Unmatched true components (fitted rank below truth) count as zero.
  return total / static_cast<double>(rt);
}

TopMode top_mode_frequency(std::span<const double> z, const Dictionary& dict) {
  TopMode out;
  double best = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (std::abs(z[i]) > best) {
      best = std::abs(z[i]);
      out.prototype_index = i;
      out.coefficient = z[i];
    }
  }
  if (best == 0.0) return out;
  out.present = true;
  const PrototypeSpec& spec = dict.specs[out.prototype_index];
  out.kind = spec.kind;
  switch (spec.kind) {
    case PrototypeKind::windowed_sine:
    case PrototypeKind::windowed_cosine:
      out.frequency = spec.frequency;
      break;
    case PrototypeKind::wrapped_cosine: {
      const std::size_t n = dict.time_axis.size();
      const double span = n < 2 ? 1.0
                                : (dict.time_axis.back() - dict.time_axis.front()) *
                                      static_cast<double>(n) / static_cast<double>(n - 1);
      out.frequency = 2 * std::numbers::pi * spec.period_count / span;
      break;
    }
    case PrototypeKind::gaussian:
      out.frequency = std::numeric_limits<double>::quiet_NaN();
      break;
  }
  return out;
}

std::vector<ErrorCurvePoint> reconstruction_error_curve(const KruskalModel& model,
                                                        const Dictionary& dict,
                                                        const DenseTensor3& fit_target,
                                                        const DenseTensor3* clean) {
  std::vector<ErrorCurvePoint> curve;
  DenseTensor3 partial(fit_target.dims());
  const auto cs = temporal_modes(model, dict);
  const double target_norm = frobenius_norm(fit_target);
  for (std::size_t k = 0; k < model.rank(); ++k) {
    subtract_rank_one_inplace(partial, -model.weights[k], model.a.column(k),
                              model.b.column(k), cs[k]);
    ErrorCurvePoint pt;
    pt.rank = k + 1;
    pt.error_vs_target = target_norm > 0 ? relative_error(fit_target, partial) : 0.0;
    if (clean) pt.error_vs_clean = relative_error(*clean, partial);
    curve.push_back(pt);
  }
  return curve;
}

std::string misspecified_library_config(std::size_t target_p) {
  const std::vector<double> freqs = linear_grid(1.0 / 39.0, 1.0 / 39.0, 39);
  std::vector<double> centers, widths;
  if (target_p <= 2000) {
    centers = linear_grid(1, 16, 8);
    widths = {34, 66, 130};
  } else if (target_p <= 6000) {
    centers = linear_grid(1, 8, 16);
    widths = {34, 66, 130};
  } else if (target_p <= 20000) {
    centers = linear_grid(1, 4, 32);
    widths = {34, 66, 98, 130};
  } else {
    centers = linear_grid(1, 2, 64);
    widths = {10, 18, 26, 34, 42, 50, 66, 82, 98, 130};
  }
  nlohmann::json cfg = {
      {"time_axis", {{"start", 0.0}, {"step", 1.0}, {"count", 129}}},
      {"families", {sinusoid_family(freqs, centers, widths)}}};
  return cfg.dump(2);
}

std::string matched_library_config() {
  nlohmann::json cfg = nlohmann::json::parse(misspecified_library_config(3000));
  // The three planted temporal modes, appended as single-point families.
  cfg["families"].push_back({{"kind", "windowed_cosine"},
                             {"frequencies", {0.0982}},
                             {"centers", {64.0}},
                             {"widths", {128.0}}});
  cfg["families"].push_back({{"kind", "windowed_sine"},
                             {"frequencies", {0.3927}},
                             {"centers", {31.75}},
                             {"widths", {63.5}}});
  cfg["families"].push_back({{"kind", "windowed_sine"},
                             {"frequencies", {0.7854}},
                             {"centers", {81.45}},
                             {"widths", {33.3}}});
  return cfg.dump(2);
}

std::vector<SweepRow> run_sweep(SweepKind kind, const std::vector<double>& grid,
                                const SweepConfig& config) {
  if (grid.empty()) throw std::invalid_argument("run_sweep: empty grid");
  std::vector<SweepRow> rows(grid.size());
  const PlantedModel truth = make_phantom();
  Dictionary shared_dict;
  if (kind == SweepKind::noise)
    shared_dict = dictionary_from_config(misspecified_library_config(config.library_size));

  for (std::size_t g = 0; g < grid.size(); ++g) {
    const double param = grid[g];
    const std::uint64_t point_seed = config.solver.seed ^ static_cast<std::uint64_t>(g);

    const Dictionary& dict =
        kind == SweepKind::noise
            ? shared_dict
            : (shared_dict = dictionary_from_config(
                   misspecified_library_config(static_cast<std::size_t>(param))));
    const double sigma = kind == SweepKind::noise ? param : config.noise_sigma;

    DenseTensor3 noisy =
        sigma > 0 ? add_spectral_noise(truth.clean, {sigma, point_seed}) : truth.clean;

    SolverConfig solver = config.solver;
    solver.seed = point_seed;
    const DecompositionResult res = sctd_decompose(noisy, dict, solver, config.tau_policy);
    const DenseTensor3 dense = kruskal_to_dense(res.model, dict);

    SweepRow& row = rows[g];
    row.param = param;
    row.relative_error_clean = relative_error(truth.clean, dense);
    row.relative_error_noisy = relative_error(noisy, dense);
    row.factor_accuracy = factor_accuracy(truth, res.model, dict);
    for (const auto& round : res.report.rounds) row.nnz_total += round.nnz;
    if (sigma > 0) {
      std::vector<double> noise_vals(noisy.size());
      for (std::size_t i = 0; i < noise_vals.size(); ++i)
        noise_vals[i] = noisy.values()[i] - truth.clean.values()[i];
      row.snr = snr(truth.clean, DenseTensor3(noisy.dims(), std::move(noise_vals)));
    } else {
      row.snr = std::numeric_limits<double>::infinity();
    }
    row.seed = point_seed;
  }
  return rows;
}

}  // namespace sctd
