#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>

namespace djd {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// Principal axes of a training matrix; `basis` rows are orthonormal, largest |entry| positive.
struct PcaModel {
  int input_dim = 0;
  int output_dim = 0;
  Vector mean;
  Matrix basis;  // output_dim x input_dim
  Vector explained_variance;
};

/// Top `target_dim` components of the sample covariance. When d > n the eigenproblem is solved
/// on the n x n Gram matrix of centered rows instead.
PcaModel pca_fit(const Matrix& x, int target_dim);
Vector pca_project(const PcaModel& model, const Vector& x);
Matrix pca_project_rows(const PcaModel& model, const Matrix& x);

/// Per-coordinate z-scoring with training statistics (sample standard deviation).
struct Standardizer {
  Vector mean;
  Vector scale;  // 0 marks a constant coordinate, which maps to 0

  static Standardizer fit(const Matrix& x);
  Vector apply(const Vector& x) const;
  Matrix apply_rows(const Matrix& x) const;
};

struct PolyKernel {
  double gamma = 1.0;
  double coef0 = 1.0;
  static constexpr int degree = 2;

  double operator()(double dot) const {
    const double base = gamma * dot + coef0;
    return base * base;
  }
};

struct SvmParams {
  double c = 1.0;
  double gamma = 0.0;  // <= 0 selects 1 / dim
  double coef0 = 1.0;
  std::uint64_t seed = 0;
  double tolerance = 1e-3;
  long max_iterations = 10'000'000;
};

struct SvmModel {
  Matrix support_vectors;  // n_sv x dim
  Vector coef;             // alpha_i * y_i
  double bias = 0.0;
  PolyKernel kernel;
  double c_param = 1.0;

  int dim() const { return static_cast<int>(support_vectors.cols()); }
};

/// Full solver state, for callers that want to audit the dual solution.
struct SvmFit {
  SvmModel model;
  Vector alpha;  // non-negative multipliers for every training row
  long iterations = 0;
  double final_gap = 0.0;  // maximal violating pair gap at exit
};

/// Soft-margin SVM by SMO with maximal-violating-pair selection. Labels are -1 (single) / +1 (double).
SvmFit svm_fit(const Matrix& x, std::span<const int> labels, const SvmParams& params);
SvmModel svm_train(const Matrix& x, std::span<const int> labels, const SvmParams& params);
double svm_decision(const SvmModel& model, const Vector& x);

}  // namespace djd
