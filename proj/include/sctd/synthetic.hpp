#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sctd/decompose.hpp"
#include "sctd/dictionary.hpp"
#include "sctd/kruskal.hpp"
#include "sctd/rng.hpp"
#include "sctd/tensor.hpp"

namespace sctd {

// One planted rank-one component of the phantom: a separable spatial Gaussian
// bump combined with a windowed sinusoid.
struct PhantomComponent {
  double center_x = 0, center_y = 0;
  double sigma_x = 1, sigma_y = 1;
  PrototypeSpec temporal;
  double lambda = 1.0;
};

struct PhantomConfig {
  std::vector<PhantomComponent> components;
};

// Rank-3 phantom defaults: three Gaussian bumps on a 40x40 grid with the
// windowed sinusoids cos(.0982 t) on [0,128], sin(.3927 t) on [0,63.5] and
// sin(.7854 t) on [64.8,98.1]; weights calibrated so sigma=3 spectral noise
// lands at SNR ~ 0.137.
PhantomConfig default_phantom_config();

std::vector<double> phantom_time_axis();  // t = 0, 1, ..., 128

struct PlantedModel {
  KruskalModel model;
  Dictionary dictionary;  // exactly the planted prototypes, one per component
  DenseTensor3 clean;
  std::vector<PrototypeSpec> truth_specs;
};

PlantedModel make_phantom(Dims3 spatial_dims, const std::vector<double>& time_axis,
                          const PhantomConfig& config);
PlantedModel make_phantom();  // 40x40x129 defaults

struct NoiseSpec {
  double sigma = 0.0;  // standard deviation in the frequency domain
  std::uint64_t seed = 0;
};

// Adds white Gaussian noise in the frequency domain: forward DFT, add
// sigma-scaled complex Gaussian draws arranged conjugate-symmetrically so the
// inverse transform is real, inverse DFT, return the real part.
std::vector<double> add_spectral_noise(const std::vector<double>& series, double sigma,
                                       Rng& rng);

// Applies add_spectral_noise independently to every (i1, i2) temporal fiber,
// with a per-fiber child RNG so results do not depend on traversal order.
DenseTensor3 add_spectral_noise(const DenseTensor3& t, const NoiseSpec& spec);

// ||signal||_F^2 / ||noise||_F^2; +infinity for a zero noise tensor.
double snr(const DenseTensor3& signal, const DenseTensor3& noise);

// ||ref - m||_F / ||ref||_F.
double relative_error(const DenseTensor3& ref, const DenseTensor3& model_dense);

// Matched mean absolute cosine similarity over (a, b, c) factors, with fitted
// components greedily matched to true components by temporal similarity.
double factor_accuracy(const PlantedModel& truth, const KruskalModel& fitted,
                       const Dictionary& fitted_dict);

struct TopMode {
  bool present = false;
  PrototypeKind kind = PrototypeKind::windowed_cosine;
  double frequency = 0.0;  // radians per time unit; wrapped cosines report 2*pi*k/span
  std::size_t prototype_index = 0;
  double coefficient = 0.0;
};

TopMode top_mode_frequency(std::span<const double> z, const Dictionary& dict);

struct ErrorCurvePoint {
  std::size_t rank = 0;
  double error_vs_target = 0.0;            // against the tensor that was fit
  std::optional<double> error_vs_clean;    // when ground truth is available
};

std::vector<ErrorCurvePoint> reconstruction_error_curve(const KruskalModel& model,
                                                        const Dictionary& dict,
                                                        const DenseTensor3& fit_target,
                                                        const DenseTensor3* clean);

struct EvalReport {
  std::optional<double> relative_error_clean;
  double relative_error_noisy = 0.0;  // against the fit target
  double factor_accuracy = 0.0;
  std::size_t prototypes_chosen = 0;
  std::vector<TopMode> top_modes;
  std::optional<double> snr;
};

// Misspecified library presets (frequency grid k/39): target_p picks the
// window-grid tier; none contains the true phantom prototypes.
std::string misspecified_library_config(std::size_t target_p);

// Case (a) library: the ~3k misspecified tier plus the true prototypes.
std::string matched_library_config();

enum class SweepKind { noise, library_size };

struct SweepRow {
  double param = 0.0;
  double relative_error_clean = 0.0;
  double relative_error_noisy = 0.0;
  double factor_accuracy = 0.0;
  std::size_t nnz_total = 0;
  double snr = 0.0;
  std::uint64_t seed = 0;
};

struct SweepConfig {
  SolverConfig solver;
  TauPolicy tau_policy;
  double noise_sigma = 0.0;          // fixed sigma for library sweeps
  std::size_t library_size = 50000;  // fixed tier for noise sweeps
};

// Full pipeline per grid point with per-point seeds derived from the base
// seed, one row per point.
std::vector<SweepRow> run_sweep(SweepKind kind, const std::vector<double>& grid,
                                const SweepConfig& config);

}  // namespace sctd
