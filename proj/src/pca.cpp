#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "scimap/analysis.hpp"
#include "scimap/error.hpp"

namespace scimap {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

PcaModel fit_matrix(const RowMatrix& x, std::size_t k) {
  const auto n = static_cast<std::size_t>(x.rows());
  const auto dim = static_cast<std::size_t>(x.cols());
  if (n < 2) throw Error(ErrorKind::Validation, "pca_fit: need at least 2 rows");
  if (k < 1 || k > std::min(n - 1, dim))
    throw Error(ErrorKind::Config, "pca_fit: k=" + std::to_string(k) + " outside [1, " +
                                       std::to_string(std::min(n - 1, dim)) + "]");

  const Eigen::RowVectorXd mean = x.colwise().mean();
  const RowMatrix centered = x.rowwise() - mean;
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  cov.selfadjointView<Eigen::Lower>().rankUpdate(centered.transpose());
  cov = cov.selfadjointView<Eigen::Lower>();
  cov /= static_cast<double>(n - 1);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) throw Error(ErrorKind::Validation, "pca_fit: eigendecomposition failed");

  PcaModel model;
  model.dim = dim;
  model.mean.assign(mean.data(), mean.data() + dim);
  model.total_variance = std::max(0.0, cov.trace());
  const auto& values = solver.eigenvalues();  // ascending
  const auto& vectors = solver.eigenvectors();
  for (std::size_t c = 0; c < k; ++c) {
    const auto col = static_cast<Eigen::Index>(dim - 1 - c);
    const double lambda = std::max(0.0, values(col));
    std::vector<double> axis(vectors.col(col).data(), vectors.col(col).data() + dim);
    const auto peak = std::max_element(axis.begin(), axis.end(),
                                       [](double a, double b) { return std::abs(a) < std::abs(b); });
    if (*peak < 0.0)
      for (auto& v : axis) v = -v;
    model.eigenvalues.push_back(lambda);
    model.explained_variance_ratios.push_back(model.total_variance > 0.0 ? lambda / model.total_variance : 0.0);
    model.components.push_back(std::move(axis));
  }
  return model;
}

}  // namespace

PcaModel pca_fit(std::span<const double> data, std::size_t dim, std::size_t k) {
  if (dim == 0 || data.size() % dim != 0)
    throw Error(ErrorKind::DimensionMismatch, "pca_fit: data length is not a multiple of dim");
  const auto n = static_cast<Eigen::Index>(data.size() / dim);
  RowMatrix x = Eigen::Map<const RowMatrix>(data.data(), n, static_cast<Eigen::Index>(dim));
  return fit_matrix(x, k);
}

PcaModel pca_fit(const EmbeddingStore& store, std::size_t k) {
  if (store.dim() == 0) throw Error(ErrorKind::DimensionMismatch, "pca_fit: store has dim 0");
  using FloatRows = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  RowMatrix x = Eigen::Map<const FloatRows>(store.data().data(), static_cast<Eigen::Index>(store.size()),
                                            static_cast<Eigen::Index>(store.dim()))
                    .cast<double>();
  return fit_matrix(x, k);
}

namespace {
std::vector<double> prefix_sums(const std::vector<double>& ratios) {
  std::vector<double> curve;
  curve.reserve(ratios.size());
  double acc = 0.0;
  for (double r : ratios) curve.push_back(acc += r);
  return curve;
}
}  // namespace

std::vector<double> explained_variance_curve(std::span<const double> data, std::size_t dim, std::size_t up_to) {
  return prefix_sums(pca_fit(data, dim, up_to).explained_variance_ratios);
}

std::vector<double> explained_variance_curve(const EmbeddingStore& store, std::size_t up_to) {
  return prefix_sums(pca_fit(store, up_to).explained_variance_ratios);
}

namespace {
template <typename T>
Point2 project_impl(const PcaModel& model, std::span<const T> v) {
  if (v.size() != model.dim)
    throw Error(ErrorKind::DimensionMismatch, "project_2d: vector dim " + std::to_string(v.size()) +
                                                  " does not match model dim " + std::to_string(model.dim));
  if (model.components.size() < 2) throw Error(ErrorKind::Config, "project_2d: model has fewer than 2 components");
  Point2 p;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double c = static_cast<double>(v[i]) - model.mean[i];
    p.x += model.components[0][i] * c;
    p.y += model.components[1][i] * c;
  }
  return p;
}
}  // namespace

Point2 project_2d(const PcaModel& model, std::span<const double> v) { return project_impl(model, v); }
Point2 project_2d(const PcaModel& model, std::span<const float> v) { return project_impl(model, v); }

std::vector<ProjectedPoint> project_2d(const PcaModel& model, const EmbeddingStore& store) {
  std::vector<ProjectedPoint> out;
  out.reserve(store.size());
  for (std::size_t i = 0; i < store.size(); ++i) out.push_back({store.ids()[i], project_2d(model, store.vector(i))});
  return out;
}

}  // namespace scimap
