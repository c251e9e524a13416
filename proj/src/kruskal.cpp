#include "sctd/kruskal.hpp"

#include <Eigen/Dense>

#include <stdexcept>

namespace sctd {
namespace {

void check_compat(const KruskalModel& model, const Dictionary& dict) {
  if (model.dictionary_id != dict.id)
    throw std::invalid_argument("kruskal model does not match dictionary (id mismatch)");
  if (model.rank() > 0 && model.z.rows() != dict.prototype_count())
    throw std::invalid_argument("kruskal model Z rows do not match dictionary size");
}

}  // namespace

KruskalModel truncate(const KruskalModel& model, std::size_t k) {
  if (k >= model.rank()) return model;
  KruskalModel out;
  out.dictionary_id = model.dictionary_id;
  out.weights.assign(model.weights.begin(), model.weights.begin() + static_cast<std::ptrdiff_t>(k));
  const auto take = [k](const DenseMatrix& m) {
    std::vector<double> v(m.values().begin(),
                          m.values().begin() + static_cast<std::ptrdiff_t>(k * m.rows()));
    return DenseMatrix(m.rows(), k, std::move(v));
  };
  out.a = take(model.a);
  out.b = take(model.b);
  out.z = take(model.z);
  return out;
}

std::vector<std::vector<double>> temporal_modes(const KruskalModel& model,
                                                const Dictionary& dict) {
  check_compat(model, dict);
  const std::size_t n = dict.sample_count();
  std::vector<std::vector<double>> out(model.rank());
  for (std::size_t r = 0; r < model.rank(); ++r) {
    std::vector<double> c(n, 0.0);
    for (std::size_t p = 0; p < model.z.rows(); ++p) {
      const double zp = model.z(p, r);
      if (zp == 0.0) continue;
      const double* col = dict.matrix.data() + p * n;
      for (std::size_t i = 0; i < n; ++i) c[i] += zp * col[i];
    }
    out[r] = std::move(c);
  }
  return out;
}

DenseTensor3 kruskal_to_dense(const KruskalModel& model, const Dictionary& dict) {
  check_compat(model, dict);
  const Dims3 dims{model.a.rows(), model.b.rows(), dict.sample_count()};
  DenseTensor3 out(dims);
  const auto cs = temporal_modes(model, dict);
  for (std::size_t r = 0; r < model.rank(); ++r) {
    subtract_rank_one_inplace(out, -model.weights[r], model.a.column(r), model.b.column(r),
                              cs[r]);
  }
  return out;
}

DenseTensor3 kruskal_to_dense_matricized(const KruskalModel& model, const Dictionary& dict) {
  check_compat(model, dict);
  const Dims3 dims{model.a.rows(), model.b.rows(), dict.sample_count()};
  const std::size_t R = model.rank();
  if (R == 0) return DenseTensor3(dims);
  const auto eidx = [](std::size_t s) { return static_cast<Eigen::Index>(s); };
  Eigen::Map<const Eigen::MatrixXd> d(dict.matrix.data(), eidx(dims.i3),
                                      eidx(dict.prototype_count()));
  Eigen::Map<const Eigen::MatrixXd> z(model.z.data(), eidx(model.z.rows()), eidx(R));
  Eigen::Map<const Eigen::VectorXd> lambda(model.weights.data(), eidx(R));
  const DenseMatrix kr = khatri_rao(model.b, model.a);
  Eigen::Map<const Eigen::MatrixXd> krm(kr.data(), eidx(kr.rows()), eidx(R));
  Eigen::MatrixXd x3 = (d * z) * lambda.asDiagonal() * krm.transpose();
  std::vector<double> values(x3.data(), x3.data() + x3.size());
  return fold(DenseMatrix(dims.i3, dims.i1 * dims.i2, std::move(values)), 3, dims);
}

}  // namespace sctd
