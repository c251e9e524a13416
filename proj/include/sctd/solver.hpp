#pragma once

#include <cstdint>
#include <vector>

#include "sctd/dictionary.hpp"
#include "sctd/kruskal.hpp"
#include "sctd/rng.hpp"
#include "sctd/tensor.hpp"

namespace sctd {

struct SolverConfig {
  std::size_t max_rank = 3;
  double bca_tol = 1e-6;
  std::size_t bca_max_iters = 500;
  std::size_t restarts = 5;
  std::uint64_t seed = 0;
  double min_lambda = 1e-3;  // deflation early stop on lambda_r / lambda_1
};

// One block-coordinate-ascent iterate: unit vectors a, b; z on or inside the
// unit sphere (exactly zero when fully shrunk); f holds the dictionary
// correlations D^T Y_(3) (b kron a) for the current (a, b).
struct BcaState {
  std::vector<double> a, b, z;
  std::vector<double> f;
  std::vector<double> objective_trace;  // one entry per block update, nondecreasing
  bool degenerate = false;
};

struct ComponentFit {
  double lambda = 0.0;
  std::vector<double> a, b, z;
  double tau = 0.0;
  double bic = 0.0;
  std::vector<std::size_t> support;
  std::vector<double> objective_trace;
  std::size_t restarts_tried = 0;
  bool degenerate = false;
};

struct UpdateResult {
  std::vector<double> value;
  bool degenerate = false;
};

// <Y, a o b o (D z)> - tau * ||z||_1, computed via contractions only.
double objective(const DenseTensor3& y, std::span<const double> a, std::span<const double> b,
                 std::span<const double> z, const Dictionary& dict, double tau);

// Closed-form block maximizers. On a zero contraction the result is flagged
// degenerate and falls back to the uniform unit vector (BCA instead keeps the
// previous iterate; the fallback only matters for direct calls).
UpdateResult update_a(const DenseTensor3& y, std::span<const double> b,
                      std::span<const double> c);
UpdateResult update_b(const DenseTensor3& y, std::span<const double> a,
                      std::span<const double> c);

// f = D^T Y_(3) (b kron a).
std::vector<double> compute_correlation(const DenseTensor3& y, std::span<const double> a,
                                        std::span<const double> b, const Dictionary& dict);

// Soft-threshold at tau, then project to the unit sphere (exactly 0 when the
// thresholded vector vanishes).
std::vector<double> soft_threshold_normalize(std::span<const double> f, double tau);

std::vector<double> update_z(const DenseTensor3& y, std::span<const double> a,
                             std::span<const double> b, const Dictionary& dict, double tau);

// KKT certificate for the z update (stationarity, feasibility, complementary
// slackness) within 1e-8.
bool verify_z_kkt(std::span<const double> f, double tau, std::span<const double> z);

// Least-squares scale: <Y, a o b o c> / ||a o b o c||_F^2; 0 for a zero model.
double compute_lambda(const DenseTensor3& y, std::span<const double> a,
                      std::span<const double> b, std::span<const double> c);

// Power-iteration warm start (deterministic) and seeded random start.
BcaState default_init(const DenseTensor3& y, const Dictionary& dict, double tau);
BcaState random_init(const DenseTensor3& y, const Dictionary& dict, double tau, Rng rng);

// BCA sweeps (a -> b -> z) from a given state; stops on relative objective
// change below tol, the sweep cap, or two consecutive fully degenerate sweeps.
BcaState run_bca(const DenseTensor3& y, const Dictionary& dict, double tau, BcaState state,
                 std::size_t max_sweeps, double tol);

// Full single-round fit: multiple restarts, best final objective wins (ties to
// the lowest restart index), lambda computed once at convergence, signs
// canonicalized (lambda >= 0, largest-magnitude entry of D z positive).
// A warm state (typically the incumbent from tau selection) joins the restart
// pool at index 0; cold starts at large tau often shrink z to zero before the
// spatial factors can sharpen, so the warm entry is what keeps high-tau fits
// alive.
ComponentFit fit_rank_one(const DenseTensor3& y, const Dictionary& dict, double tau,
                          const SolverConfig& config, Rng rng,
                          const BcaState* warm = nullptr);

// Unconstrained CP via alternating least squares, the comparison baseline.
struct CpAlsModel {
  std::vector<double> weights;
  DenseMatrix a, b, c;
  double fit = 0.0;  // 1 - ||X - M||_F / ||X||_F at convergence
  std::vector<double> fit_trace;
};

CpAlsModel cp_als_baseline(const DenseTensor3& x, std::size_t rank, double tol,
                           std::size_t max_iters, std::uint64_t seed);

}  // namespace sctd
