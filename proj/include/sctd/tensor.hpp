#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace sctd {

struct Dims3 {
  std::size_t i1 = 0, i2 = 0, i3 = 0;

  std::size_t count() const { return i1 * i2 * i3; }
  bool operator==(const Dims3&) const = default;
};

// Column-major dense matrix: element (r, c) at flat offset r + c*rows.
class DenseMatrix {
public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols);
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> values);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double operator()(std::size_t r, std::size_t c) const { return values_[r + c * rows_]; }
  double& operator()(std::size_t r, std::size_t c) { return values_[r + c * rows_]; }

  const double* data() const { return values_.data(); }
  double* data() { return values_.data(); }
  const std::vector<double>& values() const { return values_; }

  std::vector<double> column(std::size_t c) const;
  bool all_finite() const;

private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<double> values_;
};

// Dense 3-way tensor. Flat layout is first-index-fastest: the element with
// 0-based index (i1, i2, i3) sits at i1 + i2*I1 + i3*I1*I2. Documentation and
// formulas elsewhere are 1-based; the conversion lives only here.
class DenseTensor3 {
public:
  DenseTensor3() = default;
  explicit DenseTensor3(Dims3 dims);  // zero-filled
  DenseTensor3(Dims3 dims, std::vector<double> values);

  const Dims3& dims() const { return dims_; }
  std::size_t size() const { return values_.size(); }

  double at(std::size_t i1, std::size_t i2, std::size_t i3) const {
    return values_[i1 + dims_.i1 * (i2 + dims_.i2 * i3)];
  }
  double& at(std::size_t i1, std::size_t i2, std::size_t i3) {
    return values_[i1 + dims_.i1 * (i2 + dims_.i2 * i3)];
  }

  const std::vector<double>& values() const { return values_; }
  const double* data() const { return values_.data(); }
  double* data() { return values_.data(); }

  bool all_finite() const;

private:
  Dims3 dims_;
  std::vector<double> values_;
};

// Pairwise (cascade) summation; keeps accumulated values reproducible and
// accurate enough to compare against golden values at 1e-12 relative.
double pairwise_sum(std::span<const double> xs);
double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> xs);

// Mode-n unfolding, tensor element (i1,i2,i3) -> matrix element (i_n, j) with
// 1-based j = 1 + sum_{k != n} (i_k - 1) * prod_{m < k, m != n} I_m.
DenseMatrix unfold(const DenseTensor3& t, int mode);

// Exact inverse of unfold: fold(unfold(t, n), n, t.dims()) == t bit-for-bit.
DenseTensor3 fold(const DenseMatrix& m, int mode, Dims3 dims);

// Column-wise Kronecker product; entry ((i-1)*J + j, k) = A(i,k) * B(j,k).
DenseMatrix khatri_rao(const DenseMatrix& a, const DenseMatrix& b);

double inner_product(const DenseTensor3& s, const DenseTensor3& t);
double frobenius_norm(const DenseTensor3& t);

// unfold(t, mode) * (u kron v) without materializing the unfolding.
// For mode 1 pass (u, v) = (c, b); mode 2: (c, a); mode 3: (b, a).
std::vector<double> rank_one_contract(const DenseTensor3& t, int mode,
                                      std::span<const double> u,
                                      std::span<const double> v);

// t -= scale * u o v o w  (explicit in-place residual update).
void subtract_rank_one_inplace(DenseTensor3& t, double scale,
                               std::span<const double> u,
                               std::span<const double> v,
                               std::span<const double> w);

}  // namespace sctd
