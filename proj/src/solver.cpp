#include "sctd/solver.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "sctd/parallel.hpp"

namespace sctd {
namespace {

const auto eidx = [](std::size_t s) { return static_cast<Eigen::Index>(s); };

std::vector<double> dict_times_z(const Dictionary& dict, std::span<const double> z) {
  const std::size_t n = dict.sample_count();
  std::vector<double> c(n, 0.0);
  for (std::size_t p = 0; p < z.size(); ++p) {
    if (z[p] == 0.0) continue;
    const double* col = dict.matrix.data() + p * n;
    for (std::size_t i = 0; i < n; ++i) c[i] += z[p] * col[i];
  }
  return c;
}

std::vector<double> dict_transpose_times(const Dictionary& dict, std::span<const double> w) {
  Eigen::Map<const Eigen::MatrixXd> d(dict.matrix.data(), eidx(dict.sample_count()),
                                      eidx(dict.prototype_count()));
  Eigen::Map<const Eigen::VectorXd> wv(w.data(), eidx(w.size()));
  Eigen::VectorXd f = d.transpose() * wv;
  return {f.data(), f.data() + f.size()};
}

double l1_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += std::abs(x);
  return s;
}

std::vector<double> uniform_unit(std::size_t n) {
  return std::vector<double>(n, 1.0 / std::sqrt(static_cast<double>(n)));
}

// Normalizes in place; returns the pre-normalization Euclidean norm.
double normalize(std::vector<double>& v) {
  const double n = norm2(v);
  if (n > 0.0)
    for (auto& x : v) x /= n;
  return n;
}

// Dominant left singular vector of unfold(y, mode) by 50 power iterations on
// the Gram matrix, started from the all-ones direction.
std::vector<double> power_iteration_factor(const DenseTensor3& y, int mode) {
  const DenseMatrix m = unfold(y, mode);
  Eigen::Map<const Eigen::MatrixXd> em(m.data(), eidx(m.rows()), eidx(m.cols()));
  Eigen::VectorXd x = Eigen::VectorXd::Ones(em.rows());
  x.normalize();
  for (int it = 0; it < 50; ++it) {
    Eigen::VectorXd next = em * (em.transpose() * x);
    const double n = next.norm();
    if (n == 0.0) break;
    x = next / n;
  }
  return {x.data(), x.data() + x.size()};
}

struct SweepOutcome {
  bool fully_degenerate = true;
};

// One a -> b -> z sweep; appends one objective value per block update.
SweepOutcome bca_sweep(const DenseTensor3& y, const Dictionary& dict, double tau,
                       BcaState& s) {
  SweepOutcome out;
  const double z_l1 = l1_norm(s.z);

  std::vector<double> c = dict_times_z(dict, s.z);
  std::vector<double> u = rank_one_contract(y, 1, c, s.b);
  const double un = norm2(u);
  if (un > 0.0) {
    for (std::size_t i = 0; i < u.size(); ++i) s.a[i] = u[i] / un;
    out.fully_degenerate = false;
  }
  s.objective_trace.push_back(un - tau * z_l1);

  std::vector<double> v = rank_one_contract(y, 2, c, s.a);
  const double vn = norm2(v);
  if (vn > 0.0) {
    for (std::size_t i = 0; i < v.size(); ++i) s.b[i] = v[i] / vn;
    out.fully_degenerate = false;
  }
  s.objective_trace.push_back(vn - tau * z_l1);

  s.f = compute_correlation(y, s.a, s.b, dict);
  s.z = soft_threshold_normalize(s.f, tau);
  if (norm2(s.z) == 0.0) {
    s.objective_trace.push_back(0.0);
  } else {
    s.objective_trace.push_back(dot(s.f, s.z) - tau * l1_norm(s.z));
    out.fully_degenerate = false;
  }
  return out;
}

}  // namespace

double objective(const DenseTensor3& y, std::span<const double> a, std::span<const double> b,
                 std::span<const double> z, const Dictionary& dict, double tau) {
  if (a.size() != y.dims().i1 || b.size() != y.dims().i2 ||
      z.size() != dict.prototype_count() || dict.sample_count() != y.dims().i3)
    throw std::invalid_argument("objective: shape mismatch");
  const std::vector<double> c = dict_times_z(dict, z);
  const std::vector<double> w = rank_one_contract(y, 3, b, a);
  return dot(c, w) - tau * l1_norm(z);
}

UpdateResult update_a(const DenseTensor3& y, std::span<const double> b,
                      std::span<const double> c) {
  std::vector<double> u = rank_one_contract(y, 1, c, b);
  const double n = normalize(u);
  if (n == 0.0) return {uniform_unit(y.dims().i1), true};
  return {std::move(u), false};
}

UpdateResult update_b(const DenseTensor3& y, std::span<const double> a,
                      std::span<const double> c) {
  std::vector<double> v = rank_one_contract(y, 2, c, a);
  const double n = normalize(v);
  if (n == 0.0) return {uniform_unit(y.dims().i2), true};
  return {std::move(v), false};
}

std::vector<double> compute_correlation(const DenseTensor3& y, std::span<const double> a,
                                        std::span<const double> b, const Dictionary& dict) {
  if (dict.sample_count() != y.dims().i3)
    throw std::invalid_argument("compute_correlation: dictionary rows do not match I3");
  const std::vector<double> w = rank_one_contract(y, 3, b, a);
  return dict_transpose_times(dict, w);
}

std::vector<double> soft_threshold_normalize(std::span<const double> f, double tau) {
  if (tau < 0) throw std::invalid_argument("tau must be nonnegative");
  std::vector<double> z(f.size(), 0.0);
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double m = std::abs(f[i]) - tau;
    if (m > 0.0) z[i] = f[i] > 0 ? m : -m;
  }
  normalize(z);
  return z;
}

std::vector<double> update_z(const DenseTensor3& y, std::span<const double> a,
                             std::span<const double> b, const Dictionary& dict, double tau) {
  return soft_threshold_normalize(compute_correlation(y, a, b, dict), tau);
}

bool verify_z_kkt(std::span<const double> f, double tau, std::span<const double> z) {
  constexpr double kTol = 1e-8;
  std::vector<double> shrunk(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double m = std::abs(f[i]) - tau;
    shrunk[i] = m > 0.0 ? (f[i] > 0 ? m : -m) : 0.0;
  }
  const double shrunk_norm = norm2(shrunk);
  const double zn2 = dot(z, z);
  const double gamma = shrunk_norm / 2.0;

  if (shrunk_norm == 0.0) {
    // Total shrinkage: z must be exactly 0, f inside the subdifferential.
    if (zn2 != 0.0) return false;
    for (double fi : f)
      if (std::abs(fi) > tau + kTol) return false;
    return true;
  }
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (z[i] != 0.0) {
      const double sign = z[i] > 0 ? 1.0 : -1.0;
      if (std::abs(f[i] - 2 * gamma * z[i] - tau * sign) > kTol) return false;
    } else {
      if (std::abs(f[i]) > tau + kTol) return false;
    }
  }
  if (zn2 > 1.0 + kTol) return false;
  if (gamma * std::abs(zn2 - 1.0) > kTol) return false;
  return true;
}

double compute_lambda(const DenseTensor3& y, std::span<const double> a,
                      std::span<const double> b, std::span<const double> c) {
  const double m2 = dot(a, a) * dot(b, b) * dot(c, c);
  if (m2 == 0.0) return 0.0;
  const std::vector<double> u = rank_one_contract(y, 1, c, b);
  return dot(u, a) / m2;
}

BcaState default_init(const DenseTensor3& y, const Dictionary& dict, double tau) {
  BcaState s;
  s.a = power_iteration_factor(y, 1);
  s.b = power_iteration_factor(y, 2);
  s.f = compute_correlation(y, s.a, s.b, dict);
  s.z = soft_threshold_normalize(s.f, tau);
  return s;
}

BcaState random_init(const DenseTensor3& y, const Dictionary& dict, double tau, Rng rng) {
  BcaState s;
  s.a = rng.unit_sphere(y.dims().i1);
  s.b = rng.unit_sphere(y.dims().i2);
  s.f = compute_correlation(y, s.a, s.b, dict);
  s.z = soft_threshold_normalize(s.f, tau);
  return s;
}

BcaState run_bca(const DenseTensor3& y, const Dictionary& dict, double tau, BcaState state,
                 std::size_t max_sweeps, double tol) {
  if (state.f.empty()) state.f = compute_correlation(y, state.a, state.b, dict);
  double prev = state.objective_trace.empty() ? -std::numeric_limits<double>::infinity()
                                              : state.objective_trace.back();
  std::size_t degenerate_streak = 0;
  for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
    const SweepOutcome out = bca_sweep(y, dict, tau, state);
    if (out.fully_degenerate) {
      if (++degenerate_streak >= 2) {
        state.degenerate = true;
        break;
      }
    } else {
      degenerate_streak = 0;
    }
    const double obj = state.objective_trace.back();
    if (sweep > 0 && std::abs(obj - prev) / std::max(1.0, std::abs(obj)) < tol) break;
    prev = obj;
  }
  return state;
}

ComponentFit fit_rank_one(const DenseTensor3& y, const Dictionary& dict, double tau,
                          const SolverConfig& config, Rng rng, const BcaState* warm) {
  const std::size_t restarts = std::max<std::size_t>(1, config.restarts) + (warm ? 1 : 0);
  std::vector<BcaState> results(restarts);
  parallel_for(restarts, [&](std::size_t i) {
    BcaState init;
    if (warm && i == 0) {
      init = *warm;
      init.objective_trace.clear();
      init.degenerate = false;
      init.z = soft_threshold_normalize(init.f, tau);
    } else {
      const std::size_t j = warm ? i - 1 : i;
      init = j == 0 ? default_init(y, dict, tau) : random_init(y, dict, tau, rng.child(j));
    }
    results[i] = run_bca(y, dict, tau, std::move(init), config.bca_max_iters, config.bca_tol);
  });

  std::size_t best = 0;
  for (std::size_t i = 1; i < restarts; ++i) {
    const double cur = results[i].objective_trace.back();
    if (cur > results[best].objective_trace.back()) best = i;
  }
  BcaState& s = results[best];

  ComponentFit fit;
  fit.tau = tau;
  fit.restarts_tried = restarts;
  fit.objective_trace = s.objective_trace;

  std::vector<double> c = dict_times_z(dict, s.z);
  const double c_norm2 = dot(c, c);
  if (c_norm2 == 0.0) {
    fit.degenerate = true;
    fit.a.assign(y.dims().i1, 0.0);
    fit.b.assign(y.dims().i2, 0.0);
    fit.z.assign(dict.prototype_count(), 0.0);
    return fit;
  }
  const std::vector<double> u = rank_one_contract(y, 1, c, s.b);
  double lambda = dot(u, s.a) / c_norm2;

  // Sign canonicalization: lambda >= 0 and the largest-magnitude entry of
  // D z positive, compensating flips on a so the component is unchanged.
  if (lambda < 0) {
    lambda = -lambda;
    for (auto& x : s.a) x = -x;
  }
  std::size_t imax = 0;
  for (std::size_t i = 1; i < c.size(); ++i)
    if (std::abs(c[i]) > std::abs(c[imax])) imax = i;
  if (c[imax] < 0) {
    for (auto& x : s.z) x = -x;
    for (auto& x : s.a) x = -x;
  }

  fit.lambda = lambda;
  fit.a = std::move(s.a);
  fit.b = std::move(s.b);
  fit.z = std::move(s.z);
  for (std::size_t i = 0; i < fit.z.size(); ++i)
    if (std::abs(fit.z[i]) > 1e-12) fit.support.push_back(i);
  return fit;
}

CpAlsModel cp_als_baseline(const DenseTensor3& x, std::size_t rank, double tol,
                           std::size_t max_iters, std::uint64_t seed) {
  if (rank < 1) throw std::invalid_argument("cp_als_baseline: rank must be >= 1");
  const auto [I1, I2, I3] = x.dims();
  const double x_norm = frobenius_norm(x);
  Rng rng(Rng::mix(seed ^ 0x636f5f616c73ULL));

  const auto rand_factor = [&rng](std::size_t rows, std::size_t r) {
    DenseMatrix m(rows, r);
    for (std::size_t c = 0; c < r; ++c) {
      auto col = rng.unit_sphere(rows);
      for (std::size_t i = 0; i < rows; ++i) m(i, c) = col[i];
    }
    return m;
  };
  DenseMatrix a = rand_factor(I1, rank), b = rand_factor(I2, rank), c = rand_factor(I3, rank);

  const DenseMatrix x1 = unfold(x, 1), x2 = unfold(x, 2), x3 = unfold(x, 3);
  const auto map = [](const DenseMatrix& m) {
    return Eigen::Map<const Eigen::MatrixXd>(m.data(), eidx(m.rows()), eidx(m.cols()));
  };

  // Solves F = Xn * (P kr Q) * pinv(P'P .* Q'Q) with a tiny ridge.
  const auto als_step = [&](const DenseMatrix& xn, const DenseMatrix& p, const DenseMatrix& q,
                            DenseMatrix& out) {
    const DenseMatrix kr = khatri_rao(p, q);
    Eigen::MatrixXd gram =
        (map(p).transpose() * map(p)).cwiseProduct(map(q).transpose() * map(q));
    gram.diagonal().array() += 1e-10;
    Eigen::MatrixXd rhs = map(xn) * map(kr);  // I_n x R
    Eigen::MatrixXd sol = gram.ldlt().solve(rhs.transpose()).transpose();
    out = DenseMatrix(xn.rows(), rank, {sol.data(), sol.data() + sol.size()});
  };

  CpAlsModel model;
  model.weights.assign(rank, 0.0);
  double prev_fit = -1.0;
  for (std::size_t it = 0; it < max_iters; ++it) {
    als_step(x1, c, b, a);
    als_step(x2, c, a, b);
    als_step(x3, b, a, c);

    // Normalize columns into weights.
    for (std::size_t r = 0; r < rank; ++r) {
      auto na = norm2(a.column(r)), nb = norm2(b.column(r)), nc = norm2(c.column(r));
      model.weights[r] = na * nb * nc;
      if (na > 0)
        for (std::size_t i = 0; i < I1; ++i) a(i, r) /= na;
      if (nb > 0)
        for (std::size_t i = 0; i < I2; ++i) b(i, r) /= nb;
      if (nc > 0)
        for (std::size_t i = 0; i < I3; ++i) c(i, r) /= nc;
    }

    // Fit via the mode-3 matricized reconstruction.
    Eigen::Map<const Eigen::VectorXd> lambda(model.weights.data(), eidx(rank));
    const DenseMatrix kr = khatri_rao(b, a);
    Eigen::MatrixXd m3 = map(c) * lambda.asDiagonal() * map(kr).transpose();
    const double err = (map(x3) - m3).norm();
    const double fit = x_norm > 0 ? 1.0 - err / x_norm : 1.0;
    model.fit_trace.push_back(fit);
    model.fit = fit;
    if (it > 0 && std::abs(fit - prev_fit) < tol) break;
    prev_fit = fit;
  }
  model.a = std::move(a);
  model.b = std::move(b);
  model.c = std::move(c);
  return model;
}

}  // namespace sctd
