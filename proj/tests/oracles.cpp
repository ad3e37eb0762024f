#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace oracle {

std::array<std::pair<int, int>, 12> template_offsets() {
  // Indicator index at each template cell; -1 marks the center, 0 an empty cell.
  constexpr int kTemplate[5][5] = {
      {0, 0, 0, 0, 0}, {0, 0, 0, 0, 0}, {0, 0, -1, 1, 5}, {12, 4, 2, 3, 7}, {11, 10, 6, 9, 8}};
  std::array<std::pair<int, int>, 12> out{};
  for (int r = 0; r < 5; ++r)
    for (int c = 0; c < 5; ++c)
      if (kTemplate[r][c] > 0) out[kTemplate[r][c] - 1] = {r - 2, c - 2};
  return out;
}

void brute_force_counts(const djd::IntMatrix& d, int dr, int dc, int t, std::vector<long>& num, std::vector<long>& den) {
  const int side = 2 * t + 1;
  num.assign(static_cast<std::size_t>(side) * side, 0);
  den.assign(side, 0);
  auto inside = [&](int r, int c) { return r >= 0 && r < d.rows && c >= 0 && c < d.cols; };
  for (int p = -t; p <= t; ++p) {
    for (int m = 0; m < d.rows; ++m)
      for (int n = 0; n < d.cols; ++n)
        if (d.at(m, n) == p && inside(m + dr, n + dc)) ++den[p + t];
    for (int q = -t; q <= t; ++q)
      for (int m = 0; m < d.rows; ++m)
        for (int n = 0; n < d.cols; ++n)
          if (inside(m + dr, n + dc) && d.at(m, n) == p && d.at(m + dr, n + dc) == q) {
            ++num[static_cast<std::size_t>(p + t) * side + (q + t)];
          }
  }
}

std::vector<double> brute_force_tpm(const djd::IntMatrix& d, int dr, int dc, int t) {
  std::vector<long> num, den;
  brute_force_counts(d, dr, dc, t, num, den);
  const int side = 2 * t + 1;
  std::vector<double> out(num.size(), 0.0);
  for (int p = 0; p < side; ++p)
    for (int q = 0; q < side; ++q)
      if (den[p] > 0) out[static_cast<std::size_t>(p) * side + q] = static_cast<double>(num[static_cast<std::size_t>(p) * side + q]) / static_cast<double>(den[p]);
  return out;
}

std::vector<double> monolithic_global_feature(const djd::CoefficientPlane& plane) {
  constexpr int t = 4, side = 9;
  const int rows = plane.rows(), cols = plane.cols();
  const auto offsets = template_offsets();
  std::vector<std::vector<double>> tpm(12, std::vector<double>(side * side, 0.0));
  for (int i = 0; i < 12; ++i) {
    const auto [dr, dc] = offsets[i];
    // D is defined where both the position and its neighbor exist in |I_Q|.
    auto dval = [&](int r, int c) {
      const int a = std::abs(plane.at(r, c)), b = std::abs(plane.at(r + dr, c + dc));
      return std::max(-t, std::min(t, a - b));
    };
    auto in_d = [&](int r, int c) { return r >= 0 && r + dr < rows && c >= 0 && c < cols && c + dc >= 0 && c + dc < cols; };
    std::vector<long> counts(side * side, 0);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c)
        if (in_d(r, c) && in_d(r + dr, c + dc)) counts[(dval(r, c) + t) * side + dval(r + dr, c + dc) + t]++;
    for (int p = 0; p < side; ++p) {
      long total = 0;
      for (int q = 0; q < side; ++q) total += counts[p * side + q];
      for (int q = 0; q < side && total > 0; ++q) tpm[i][p * side + q] = static_cast<double>(counts[p * side + q]) / total;
    }
  }
  std::vector<std::vector<double>> groups;
  auto avg = [&](int a, int b) {
    std::vector<double> g(side * side);
    for (int k = 0; k < side * side; ++k) g[k] = (tpm[a][k] + tpm[b][k]) / 2.0;
    return g;
  };
  groups.push_back(avg(0, 1));
  groups.push_back(tpm[2]);
  groups.push_back(tpm[3]);
  groups.push_back(avg(4, 5));
  for (int i = 6; i < 12; ++i) groups.push_back(tpm[i]);
  std::vector<double> out;
  for (const auto& g : groups)
    for (int p = -t; p <= t; ++p)
      for (int q = -t; q <= t; ++q)
        if (p > 0 || (p == 0 && q >= 0)) out.push_back((g[(p + t) * side + q + t] + g[(-p + t) * side + (-q + t)]) / 2.0);
  return out;
}

djd::Block direct_dct(const djd::Block& s) {
  djd::Block out{};
  for (int u = 0; u < 8; ++u)
    for (int v = 0; v < 8; ++v) {
      double acc = 0.0;
      for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x)
          acc += s[y * 8 + x] * std::cos((2 * y + 1) * u * std::numbers::pi / 16) * std::cos((2 * x + 1) * v * std::numbers::pi / 16);
      const double cu = u == 0 ? std::sqrt(0.125) : 0.5, cv = v == 0 ? std::sqrt(0.125) : 0.5;
      out[u * 8 + v] = cu * cv * acc;
    }
  return out;
}

void jacobi_eigen(const djd::Matrix& sym, djd::Vector& values, djd::Matrix& vectors) {
  const int n = static_cast<int>(sym.rows());
  djd::Matrix a = sym;
  djd::Matrix v = djd::Matrix::Identity(n, n);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (off < 1e-30) break;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) {
        if (std::abs(a(p, q)) < 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double tt = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(tt * tt + 1.0), s = tt * c;
        for (int k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (int k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
  }
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int x, int y) { return a(x, x) > a(y, y); });
  values.resize(n);
  vectors.resize(n, n);
  for (int i = 0; i < n; ++i) {
    values[i] = a(order[i], order[i]);
    vectors.col(i) = v.col(order[i]);
  }
}

djd::CoefficientPlane random_plane(djd::Rng& rng, int block_rows, int block_cols, int quality) {
  djd::CoefficientPlane plane(block_rows, block_cols, djd::quant_table_for_quality(quality));
  for (int br = 0; br < block_rows; ++br)
    for (int bc = 0; bc < block_cols; ++bc) {
      plane.coeff(br, bc, 0, 0) = static_cast<int>(rng.below(2048)) - 1024;
      for (int k = 1; k < 64; ++k) {
        const double u = rng.uniform();
        int v = 0;
        if (u < 0.02) {
          v = static_cast<int>(rng.below(2047)) - 1023;  // full AC range
        } else if (u < 0.45) {
          v = static_cast<int>(rng.below(21)) - 10;
        }
        plane.at(br * 8 + djd::kZigZag[k] / 8, bc * 8 + djd::kZigZag[k] % 8) = v;
      }
    }
  return plane;
}

djd::IntMatrix random_int_matrix(djd::Rng& rng, int rows, int cols, int lo, int hi) {
  djd::IntMatrix m(rows, cols);
  for (auto& v : m.values) v = lo + static_cast<int>(rng.below(static_cast<std::uint64_t>(hi - lo + 1)));
  return m;
}

std::filesystem::path data_dir() { return DJD_TEST_DATA_DIR; }

}  // namespace oracle
