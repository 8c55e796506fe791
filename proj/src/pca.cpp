#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "songlm/analysis.hpp"
#include "songlm/io.hpp"

namespace songlm {

double PcaResult::total_variance() const {
  double s = 0.0;
  for (double e : eigenvalues) s += e;
  return s;
}

std::vector<double> PcaResult::project(std::span<const double> x) const {
  if (x.size() != mean.size()) throw std::invalid_argument("vector dimension differs from the PCA fit");
  std::vector<double> out(components.rows, 0.0);
  for (std::size_t c = 0; c < components.rows; ++c)
    for (std::size_t i = 0; i < x.size(); ++i) out[c] += (x[i] - mean[i]) * components(c, i);
  return out;
}

PcaResult pca_fit(const Matrix& x, std::size_t dims) {
  if (dims == 0 || dims > x.cols) throw std::invalid_argument("PCA dimension out of range");
  if (x.rows < dims + 1)
    throw std::invalid_argument("PCA needs at least " + std::to_string(dims + 1) + " vectors, got " +
                                std::to_string(x.rows));
  const auto n = static_cast<Eigen::Index>(x.rows), h = static_cast<Eigen::Index>(x.cols);
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> X(x.data.data(), n, h);
  const Eigen::RowVectorXd mu = X.colwise().mean();
  const Eigen::MatrixXd centered = X.rowwise() - mu;
  const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) throw std::runtime_error("eigendecomposition failed");

  PcaResult r;
  r.mean.assign(mu.data(), mu.data() + h);
  // Eigen returns ascending order.
  for (Eigen::Index i = h - 1; i >= 0; --i) r.eigenvalues.push_back(std::max(0.0, solver.eigenvalues()(i)));
  r.components = Matrix(dims, x.cols);
  const double total = r.total_variance();
  for (std::size_t c = 0; c < dims; ++c) {
    const auto v = solver.eigenvectors().col(h - 1 - static_cast<Eigen::Index>(c));
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    const double sign = v(arg) < 0 ? -1.0 : 1.0;
    for (Eigen::Index i = 0; i < h; ++i) r.components(c, static_cast<std::size_t>(i)) = sign * v(i);
    r.explained.push_back(total > 0.0 ? r.eigenvalues[c] / total : 0.0);
  }
  return r;
}

std::vector<ProjectedTrace> pca_project(const std::vector<EmbeddingTrace>& traces, std::size_t dims, PcaResult* fit) {
  std::size_t rows = 0, h = 0;
  for (const auto& t : traces)
    for (const auto& s : t.states) {
      rows += s.rows;
      if (h == 0) h = s.cols;
      else if (s.cols != h) throw std::invalid_argument("traces disagree in state width");
    }
  Matrix pooled(rows, h);
  std::size_t r = 0;
  for (const auto& t : traces)
    for (const auto& s : t.states) {
      std::copy(s.data.begin(), s.data.end(), pooled.data.begin() + static_cast<std::ptrdiff_t>(r * h));
      r += s.rows;
    }
  auto pca = pca_fit(pooled, dims);

  std::vector<ProjectedTrace> out;
  for (const auto& t : traces) {
    ProjectedTrace p{t.song, t.tokens, {}};
    for (const auto& s : t.states) {
      Matrix m(s.rows, dims);
      for (std::size_t i = 0; i < s.rows; ++i) {
        auto v = pca.project(s.row(i));
        std::copy(v.begin(), v.end(), m.row(i).begin());
      }
      p.coords.push_back(std::move(m));
    }
    out.push_back(std::move(p));
  }
  if (fit) *fit = std::move(pca);
  return out;
}

std::string trajectories_csv(const std::vector<ProjectedTrace>& traces, const Vocab& vocab) {
  const std::size_t dims = traces.empty() || traces.front().coords.empty() ? 0 : traces.front().coords.front().cols;
  std::vector<std::string> header{"song", "layer", "position", "token"};
  for (std::size_t d = 0; d < dims; ++d) header.push_back("pc" + std::to_string(d + 1));
  CsvWriter csv(header);
  for (const auto& t : traces)
    for (std::size_t l = 0; l < t.coords.size(); ++l)
      for (std::size_t i = 0; i < t.tokens.size(); ++i) {
        csv.field(t.song).field(l).field(i).field(std::string_view(vocab.token(t.tokens[i])));
        for (std::size_t d = 0; d < dims; ++d) csv.field(t.coords[l](i, d));
        csv.end_row();
      }
  return csv.str();
}

}  // namespace songlm
