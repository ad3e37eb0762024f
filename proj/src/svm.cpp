#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "djd/error.hpp"
#include "djd/learning.hpp"
#include "djd/rng.hpp"

namespace djd {

namespace {

constexpr double kTau = 1e-12;
constexpr double kSupportEps = 1e-8;

void check_inputs(const Matrix& x, std::span<const int> labels) {
  if (static_cast<std::size_t>(x.rows()) != labels.size()) {
    throw Error(ErrorCode::DimensionMismatch, "row count differs from label count");
  }
  if (!x.allFinite()) throw Error(ErrorCode::NonFiniteFeature, "training matrix contains NaN or Inf");
  bool pos = false, neg = false;
  for (int y : labels) {
    if (y == 1) {
      pos = true;
    } else if (y == -1) {
      neg = true;
    } else {
      throw Error(ErrorCode::DimensionMismatch, "labels must be -1 or +1");
    }
  }
  if (!pos || !neg) throw Error(ErrorCode::SingleClassData, "training data contains a single class");
}

}  // namespace

SvmFit svm_fit(const Matrix& x, std::span<const int> labels, const SvmParams& params) {
  check_inputs(x, labels);
  if (!(params.c > 0)) throw Error(ErrorCode::BadConfig, "C must be positive");
  const Eigen::Index n = x.rows();
  const double c = params.c;

  PolyKernel kernel;
  kernel.gamma = params.gamma > 0 ? params.gamma : 1.0 / static_cast<double>(std::max<Eigen::Index>(1, x.cols()));
  kernel.coef0 = params.coef0;

  // Q_ij = y_i y_j K(x_i, x_j), kept whole: training sets here stay in the low thousands.
  Matrix q = x * x.transpose();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) q(i, j) = labels[i] * labels[j] * kernel(q(i, j));

  Vector alpha = Vector::Zero(n);
  Vector grad = Vector::Constant(n, -1.0);
  const std::vector<std::size_t> order = permutation(static_cast<std::size_t>(n), params.seed);

  auto in_up = [&](Eigen::Index t) { return labels[t] == 1 ? alpha[t] < c : alpha[t] > 0; };
  auto in_low = [&](Eigen::Index t) { return labels[t] == 1 ? alpha[t] > 0 : alpha[t] < c; };

  SvmFit fit;
  long iter = 0;
  double gap = 0.0;
  for (; iter < params.max_iterations; ++iter) {
    Eigen::Index i = -1, j = -1;
    double gmax = -std::numeric_limits<double>::infinity();
    double gmin = std::numeric_limits<double>::infinity();
    for (std::size_t t_ : order) {
      const auto t = static_cast<Eigen::Index>(t_);
      const double v = -labels[t] * grad[t];
      if (in_up(t) && v > gmax) {
        gmax = v;
        i = t;
      }
      if (in_low(t) && v < gmin) {
        gmin = v;
        j = t;
      }
    }
    gap = gmax - gmin;
    if (i < 0 || j < 0 || gap < params.tolerance) break;

    const double old_ai = alpha[i], old_aj = alpha[j];
    if (labels[i] != labels[j]) {
      double quad = q(i, i) + q(j, j) + 2.0 * q(i, j);
      if (quad <= 0) quad = kTau;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0) {
        if (alpha[j] < 0) {
          alpha[j] = 0;
          alpha[i] = diff;
        }
      } else if (alpha[i] < 0) {
        alpha[i] = 0;
        alpha[j] = -diff;
      }
      if (diff > 0) {
        if (alpha[i] > c) {
          alpha[i] = c;
          alpha[j] = c - diff;
        }
      } else if (alpha[j] > c) {
        alpha[j] = c;
        alpha[i] = c + diff;
      }
    } else {
      double quad = q(i, i) + q(j, j) - 2.0 * q(i, j);
      if (quad <= 0) quad = kTau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > c) {
        if (alpha[i] > c) {
          alpha[i] = c;
          alpha[j] = sum - c;
        }
        if (alpha[j] > c) {
          alpha[j] = c;
          alpha[i] = sum - c;
        }
      } else {
        if (alpha[j] < 0) {
          alpha[j] = 0;
          alpha[i] = sum;
        }
        if (alpha[i] < 0) {
          alpha[i] = 0;
          alpha[j] = sum;
        }
      }
    }

    const double dai = alpha[i] - old_ai, daj = alpha[j] - old_aj;
    for (Eigen::Index k = 0; k < n; ++k) grad[k] += q(i, k) * dai + q(j, k) * daj;
  }

  // Bias from free multipliers, else the midpoint of the feasible interval.
  double free_sum = 0.0;
  int free_count = 0;
  double ub = std::numeric_limits<double>::infinity(), lb = -std::numeric_limits<double>::infinity();
  for (Eigen::Index t = 0; t < n; ++t) {
    const double yg = labels[t] * grad[t];
    if (alpha[t] >= c) {
      if (labels[t] == -1) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else if (alpha[t] <= 0) {
      if (labels[t] == 1) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else {
      free_sum += yg;
      ++free_count;
    }
  }
  const double rho = free_count > 0 ? free_sum / free_count : (ub + lb) / 2.0;

  SvmModel& m = fit.model;
  m.kernel = kernel;
  m.c_param = c;
  m.bias = -rho;
  std::vector<Eigen::Index> sv;
  for (Eigen::Index t = 0; t < n; ++t)
    if (alpha[t] > kSupportEps) sv.push_back(t);
  m.support_vectors.resize(static_cast<Eigen::Index>(sv.size()), x.cols());
  m.coef.resize(static_cast<Eigen::Index>(sv.size()));
  for (std::size_t k = 0; k < sv.size(); ++k) {
    m.support_vectors.row(static_cast<Eigen::Index>(k)) = x.row(sv[k]);
    m.coef[static_cast<Eigen::Index>(k)] = alpha[sv[k]] * labels[sv[k]];
  }
  fit.alpha = std::move(alpha);
  fit.iterations = iter;
  fit.final_gap = gap;
  return fit;
}

SvmModel svm_train(const Matrix& x, std::span<const int> labels, const SvmParams& params) {
  return svm_fit(x, labels, params).model;
}

double svm_decision(const SvmModel& model, const Vector& x) {
  if (model.support_vectors.rows() > 0 && x.size() != model.support_vectors.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "expected " + std::to_string(model.support_vectors.cols()) +
                                                  " inputs, got " + std::to_string(x.size()));
  }
  double acc = model.bias;
  for (Eigen::Index k = 0; k < model.support_vectors.rows(); ++k) {
    acc += model.coef[k] * model.kernel(model.support_vectors.row(k).dot(x));
  }
  return acc;
}

}  // namespace djd
