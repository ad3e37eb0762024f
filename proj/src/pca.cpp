#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <string>

#include "djd/error.hpp"
#include "djd/learning.hpp"

namespace djd {

namespace {

// Two passes of classical Gram-Schmidt of row `r` against rows [0, r); returns the residual norm.
double reorthogonalize(Matrix& basis, Eigen::Index r) {
  for (int pass = 0; pass < 2; ++pass) {
    for (Eigen::Index k = 0; k < r; ++k) {
      const double proj = basis.row(k).dot(basis.row(r));
      basis.row(r) -= proj * basis.row(k);
    }
  }
  return basis.row(r).norm();
}

}  // namespace

PcaModel pca_fit(const Matrix& x, int target_dim) {
  const Eigen::Index n = x.rows(), d = x.cols();
  if (n < 2) throw Error(ErrorCode::DegenerateData, "PCA needs at least two rows");
  const Eigen::Index max_dim = std::min<Eigen::Index>(d, n - 1);
  if (target_dim < 1 || target_dim > max_dim) {
    throw Error(ErrorCode::TargetDimTooLarge,
                "target " + std::to_string(target_dim) + " outside [1, " + std::to_string(max_dim) + "]");
  }

  PcaModel model;
  model.input_dim = static_cast<int>(d);
  model.output_dim = target_dim;
  model.mean = x.colwise().mean().transpose();
  const Matrix centered = x.rowwise() - model.mean.transpose();
  if (centered.cwiseAbs().maxCoeff() == 0.0) throw Error(ErrorCode::DegenerateData, "all rows identical");

  model.basis.resize(target_dim, d);
  model.explained_variance.resize(target_dim);
  const double denom = static_cast<double>(n - 1);

  Vector eigenvalues;
  if (d <= n) {
    const Matrix cov = (centered.transpose() * centered) / denom;
    Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
    eigenvalues = eig.eigenvalues();
    for (int k = 0; k < target_dim; ++k) {
      const Eigen::Index src = d - 1 - k;
      model.basis.row(k) = eig.eigenvectors().col(src).transpose();
      model.explained_variance[k] = std::max(0.0, eigenvalues[src]);
    }
  } else {
    const Matrix gram = centered * centered.transpose();
    Eigen::SelfAdjointEigenSolver<Matrix> eig(gram);
    eigenvalues = eig.eigenvalues();
    const double top = std::max(eigenvalues[n - 1], 0.0);
    for (int k = 0; k < target_dim; ++k) {
      const Eigen::Index src = n - 1 - k;
      const double lambda = eigenvalues[src];
      model.explained_variance[k] = std::max(0.0, lambda) / denom;
      if (lambda > 1e-12 * top) {
        model.basis.row(k) = (centered.transpose() * eig.eigenvectors().col(src)).transpose() / std::sqrt(lambda);
      } else {
        model.basis.row(k).setZero();
      }
    }
  }

  // Weak or null components lose orthogonality through round-off; repair them and fill null
  // directions with an orthonormal completion drawn from the coordinate axes.
  const double top_var = model.explained_variance[0];
  Eigen::Index next_axis = 0;
  for (Eigen::Index k = 0; k < target_dim; ++k) {
    if (model.explained_variance[k] > 1e-6 * top_var) continue;
    double norm = model.basis.row(k).norm() > 0.5 ? reorthogonalize(model.basis, k) : 0.0;
    while (norm < 1e-6) {
      if (next_axis >= d) throw Error(ErrorCode::DegenerateData, "cannot complete PCA basis");
      model.basis.row(k).setZero();
      model.basis(k, next_axis++) = 1.0;
      norm = reorthogonalize(model.basis, k);
    }
    model.basis.row(k) /= norm;
  }

  for (Eigen::Index k = 0; k < target_dim; ++k) {
    Eigen::Index arg = 0;
    model.basis.row(k).cwiseAbs().maxCoeff(&arg);
    if (model.basis(k, arg) < 0) model.basis.row(k) *= -1.0;
  }
  return model;
}

Vector pca_project(const PcaModel& model, const Vector& x) {
  if (x.size() != model.input_dim) {
    throw Error(ErrorCode::DimensionMismatch,
                "expected " + std::to_string(model.input_dim) + " inputs, got " + std::to_string(x.size()));
  }
  return model.basis * (x - model.mean);
}

Matrix pca_project_rows(const PcaModel& model, const Matrix& x) {
  if (x.cols() != model.input_dim) {
    throw Error(ErrorCode::DimensionMismatch,
                "expected " + std::to_string(model.input_dim) + " columns, got " + std::to_string(x.cols()));
  }
  return (x.rowwise() - model.mean.transpose()) * model.basis.transpose();
}

Standardizer Standardizer::fit(const Matrix& x) {
  Standardizer s;
  const Eigen::Index n = x.rows();
  s.mean = x.colwise().mean().transpose();
  s.scale = Vector::Zero(x.cols());
  if (n < 2) return s;
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    const double var = (x.col(c).array() - s.mean[c]).square().sum() / static_cast<double>(n - 1);
    const double sd = std::sqrt(var);
    s.scale[c] = sd > 1e-12 * std::max(1.0, std::abs(s.mean[c])) ? sd : 0.0;
  }
  return s;
}

Vector Standardizer::apply(const Vector& x) const {
  if (x.size() != mean.size()) throw Error(ErrorCode::DimensionMismatch, "standardizer dimension mismatch");
  Vector out(x.size());
  for (Eigen::Index c = 0; c < x.size(); ++c) out[c] = scale[c] > 0 ? (x[c] - mean[c]) / scale[c] : 0.0;
  return out;
}

Matrix Standardizer::apply_rows(const Matrix& x) const {
  if (x.cols() != mean.size()) throw Error(ErrorCode::DimensionMismatch, "standardizer dimension mismatch");
  Matrix out(x.rows(), x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) out.row(r) = apply(x.row(r).transpose()).transpose();
  return out;
}

}  // namespace djd
