#include "sctd/tensor.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

namespace sctd {
namespace {

using EMap = Eigen::Map<const Eigen::MatrixXd>;
using EVecMap = Eigen::Map<const Eigen::VectorXd>;

void check_mode(int mode) {
  if (mode < 1 || mode > 3) throw std::invalid_argument("mode must be 1, 2, or 3");
}

}  // namespace

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), values_(rows * cols, 0.0) {}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (values_.size() != rows_ * cols_)
    throw std::invalid_argument("DenseMatrix: value count does not match rows*cols");
}

std::vector<double> DenseMatrix::column(std::size_t c) const {
  return {values_.begin() + static_cast<std::ptrdiff_t>(c * rows_),
          values_.begin() + static_cast<std::ptrdiff_t>((c + 1) * rows_)};
}

bool DenseMatrix::all_finite() const {
  for (double v : values_)
    if (!std::isfinite(v)) return false;
  return true;
}

DenseTensor3::DenseTensor3(Dims3 dims) : dims_(dims), values_(dims.count(), 0.0) {}

DenseTensor3::DenseTensor3(Dims3 dims, std::vector<double> values)
    : dims_(dims), values_(std::move(values)) {
  if (values_.size() != dims_.count())
    throw std::invalid_argument("DenseTensor3: value count does not match extents");
}

bool DenseTensor3::all_finite() const {
  for (double v : values_)
    if (!std::isfinite(v)) return false;
  return true;
}

double pairwise_sum(std::span<const double> xs) {
  constexpr std::size_t kBlock = 32;
  const std::size_t n = xs.size();
  if (n <= kBlock) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

namespace {

double pairwise_dot(std::span<const double> a, std::span<const double> b) {
  constexpr std::size_t kBlock = 32;
  const std::size_t n = a.size();
  if (n <= kBlock) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_dot(a.first(half), b.first(half)) +
         pairwise_dot(a.subspan(half), b.subspan(half));
}

}  // namespace

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("dot: length mismatch");
  return pairwise_dot(a, b);
}

double norm2(std::span<const double> xs) { return std::sqrt(pairwise_dot(xs, xs)); }

DenseMatrix unfold(const DenseTensor3& t, int mode) {
  check_mode(mode);
  const auto [I1, I2, I3] = t.dims();
  const double* src = t.data();
  if (mode == 1) {
    // First-index-fastest layout already is the mode-1 unfolding.
    return DenseMatrix(I1, I2 * I3, t.values());
  }
  if (mode == 2) {
    DenseMatrix m(I2, I1 * I3);
    double* dst = m.data();
    for (std::size_t i3 = 0; i3 < I3; ++i3)
      for (std::size_t i2 = 0; i2 < I2; ++i2)
        for (std::size_t i1 = 0; i1 < I1; ++i1)
          dst[i2 + I2 * (i1 + I1 * i3)] = src[i1 + I1 * (i2 + I2 * i3)];
    return m;
  }
  DenseMatrix m(I3, I1 * I2);
  double* dst = m.data();
  for (std::size_t i3 = 0; i3 < I3; ++i3)
    for (std::size_t i2 = 0; i2 < I2; ++i2)
      for (std::size_t i1 = 0; i1 < I1; ++i1)
        dst[i3 + I3 * (i1 + I1 * i2)] = src[i1 + I1 * (i2 + I2 * i3)];
  return m;
}

DenseTensor3 fold(const DenseMatrix& m, int mode, Dims3 dims) {
  check_mode(mode);
  const auto [I1, I2, I3] = dims;
  const std::size_t expect_rows = mode == 1 ? I1 : mode == 2 ? I2 : I3;
  if (m.rows() != expect_rows || m.rows() * m.cols() != dims.count())
    throw std::invalid_argument("fold: matrix shape does not match mode/dims");
  if (mode == 1) return DenseTensor3(dims, m.values());
  DenseTensor3 t(dims);
  double* dst = t.data();
  const double* src = m.data();
  if (mode == 2) {
    for (std::size_t i3 = 0; i3 < I3; ++i3)
      for (std::size_t i2 = 0; i2 < I2; ++i2)
        for (std::size_t i1 = 0; i1 < I1; ++i1)
          dst[i1 + I1 * (i2 + I2 * i3)] = src[i2 + I2 * (i1 + I1 * i3)];
  } else {
    for (std::size_t i3 = 0; i3 < I3; ++i3)
      for (std::size_t i2 = 0; i2 < I2; ++i2)
        for (std::size_t i1 = 0; i1 < I1; ++i1)
          dst[i1 + I1 * (i2 + I2 * i3)] = src[i3 + I3 * (i1 + I1 * i2)];
  }
  return t;
}

DenseMatrix khatri_rao(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.cols()) throw std::invalid_argument("khatri_rao: column-count mismatch");
  const std::size_t I = a.rows(), J = b.rows(), K = a.cols();
  DenseMatrix out(I * J, K);
  double* dst = out.data();
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t i = 0; i < I; ++i)
      for (std::size_t j = 0; j < J; ++j)
        dst[(i * J + j) + k * I * J] = a(i, k) * b(j, k);
  return out;
}

double inner_product(const DenseTensor3& s, const DenseTensor3& t) {
  if (!(s.dims() == t.dims())) throw std::invalid_argument("inner_product: dim mismatch");
  return pairwise_dot(s.values(), t.values());
}

double frobenius_norm(const DenseTensor3& t) { return norm2(t.values()); }

std::vector<double> rank_one_contract(const DenseTensor3& t, int mode,
                                      std::span<const double> u,
                                      std::span<const double> v) {
  check_mode(mode);
  const auto [I1, I2, I3] = t.dims();
  const auto eidx = [](std::size_t s) { return static_cast<Eigen::Index>(s); };
  const EVecMap uv(u.data(), eidx(u.size()));
  const EVecMap vv(v.data(), eidx(v.size()));
  std::vector<double> out;
  if (mode == 1) {
    if (u.size() != I3 || v.size() != I2)
      throw std::invalid_argument("rank_one_contract: length mismatch (mode 1 takes c, b)");
    // X viewed as I1 x (I2*I3); contract i3 then i2.
    EMap x(t.data(), eidx(I1), eidx(I2 * I3));
    Eigen::MatrixXd partial = Eigen::Map<const Eigen::MatrixXd>(x.data(), eidx(I1 * I2), eidx(I3)) * uv;
    EMap pm(partial.data(), eidx(I1), eidx(I2));
    Eigen::VectorXd r = pm * vv;
    out.assign(r.data(), r.data() + r.size());
  } else if (mode == 2) {
    if (u.size() != I3 || v.size() != I1)
      throw std::invalid_argument("rank_one_contract: length mismatch (mode 2 takes c, a)");
    EMap x(t.data(), eidx(I1 * I2), eidx(I3));
    Eigen::MatrixXd partial = x * uv;  // length I1*I2
    EMap pm(partial.data(), eidx(I1), eidx(I2));
    Eigen::VectorXd r = pm.transpose() * vv;
    out.assign(r.data(), r.data() + r.size());
  } else {
    if (u.size() != I2 || v.size() != I1)
      throw std::invalid_argument("rank_one_contract: length mismatch (mode 3 takes b, a)");
    EMap x(t.data(), eidx(I1), eidx(I2 * I3));
    Eigen::RowVectorXd partial = vv.transpose() * x;  // length I2*I3
    EMap pm(partial.data(), eidx(I2), eidx(I3));
    Eigen::VectorXd r = pm.transpose() * uv;
    out.assign(r.data(), r.data() + r.size());
  }
  return out;
}

void subtract_rank_one_inplace(DenseTensor3& t, double scale,
                               std::span<const double> u,
                               std::span<const double> v,
                               std::span<const double> w) {
  const auto [I1, I2, I3] = t.dims();
  if (u.size() != I1 || v.size() != I2 || w.size() != I3)
    throw std::invalid_argument("subtract_rank_one_inplace: factor length mismatch");
  double* dst = t.data();
  for (std::size_t i3 = 0; i3 < I3; ++i3) {
    const double sw = scale * w[i3];
    if (sw == 0.0) continue;
    for (std::size_t i2 = 0; i2 < I2; ++i2) {
      const double swv = sw * v[i2];
      double* fiber = dst + I1 * (i2 + I2 * i3);
      for (std::size_t i1 = 0; i1 < I1; ++i1) fiber[i1] -= swv * u[i1];
    }
  }
}

}  // namespace sctd
