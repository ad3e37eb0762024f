#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>

#include "djd/codestream.hpp"
#include "djd/error.hpp"
#include "djd/feature_io.hpp"
#include "djd/features.hpp"
#include "djd/io_util.hpp"
#include "oracles.hpp"

using namespace djd;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected djd::Error");
  return ErrorCode::BadConfig;
}

IntMatrix matrix(int rows, int cols, std::initializer_list<int> v) {
  IntMatrix m(rows, cols);
  std::copy(v.begin(), v.end(), m.values.begin());
  return m;
}

DiffMatrix as_diff(IntMatrix values, Direction d) {
  DiffMatrix out;
  out.values = std::move(values);
  out.direction = d;
  return out;
}

long count_equal(const std::vector<double>& v, double x) { return std::count(v.begin(), v.end(), x); }

// A plane with small coefficients, roughly like a compressed natural image.
CoefficientPlane small_plane(Rng& rng, int br, int bc) {
  CoefficientPlane p(br, bc, quant_table_for_quality(75));
  for (auto& c : p.coeffs) c = static_cast<int>(rng.below(13)) - 6;
  return p;
}

}  // namespace

TEST_CASE("directions follow the filter template") {
  const auto offsets = oracle::template_offsets();
  for (int i = 0; i < 12; ++i) {
    CHECK(kDirections[i].index == i + 1);
    CHECK(kDirections[i].dr == offsets[i].first);
    CHECK(kDirections[i].dc == offsets[i].second);
  }
}

TEST_CASE("mode positions") {
  const int expected[20][2] = {{0, 1}, {1, 0}, {2, 0}, {1, 1}, {0, 2}, {0, 3}, {1, 2}, {2, 1}, {3, 0}, {4, 0},
                               {3, 1}, {2, 2}, {1, 3}, {0, 4}, {0, 5}, {1, 4}, {2, 3}, {3, 2}, {4, 1}, {5, 0}};
  for (int k = 1; k <= 20; ++k) CHECK(mode_position(k) == expected[k - 1][0] * 8 + expected[k - 1][1]);
  CHECK(code_of([] { mode_position(0); }) == ErrorCode::DimensionMismatch);
  CHECK(code_of([] { mode_position(21); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("magnitude") {
  CoefficientPlane p(1, 1, quant_table_for_quality(50));
  p.at(0, 0) = -3;
  p.at(0, 1) = 2;
  p.at(1, 1) = -1;
  const auto m = magnitude(p);
  CHECK(m.at(0, 0) == 3);
  CHECK(m.at(0, 1) == 2);
  CHECK(m.at(1, 0) == 0);
  CHECK(m.at(1, 1) == 1);
  CHECK(m.rows == 8);
  const auto z = magnitude(CoefficientPlane(2, 2, p.table));
  CHECK(std::all_of(z.values.begin(), z.values.end(), [](int v) { return v == 0; }));
}

TEST_CASE("diff_matrix") {
  const auto d = diff_matrix(matrix(2, 2, {5, 3, 2, 0}), kDirections[0]);
  CHECK(d.values == matrix(2, 1, {2, 2}));
  CHECK(diff_matrix(matrix(1, 2, {9, 0}), kDirections[0]).values == matrix(1, 1, {4}));
  CHECK(diff_matrix(matrix(1, 2, {0, 9}), kDirections[0]).values == matrix(1, 1, {-4}));

  const IntMatrix flat(5, 6, 7);
  for (const auto& dir : kDirections) {
    const auto dm = diff_matrix(flat, dir);
    CHECK(dm.values.rows == 5 - dir.dr);
    CHECK(dm.values.cols == 6 - std::abs(dir.dc));
    CHECK(std::all_of(dm.values.values.begin(), dm.values.values.end(), [](int v) { return v == 0; }));
  }

  // negative column offsets read the neighbor to the lower left
  const auto m = matrix(2, 3, {1, 2, 3, 4, 5, 6});
  CHECK(diff_matrix(m, kDirections[3]).values == matrix(1, 2, {2 - 4, 3 - 5}));
  CHECK(diff_matrix(m, kDirections[11]).values == matrix(1, 1, {3 - 4}));

  CHECK(code_of([] { diff_matrix(IntMatrix(1, 5), kDirections[1]); }) == ErrorCode::MatrixTooSmall);
  CHECK(code_of([] { diff_matrix(IntMatrix(5, 2), kDirections[4]); }) == ErrorCode::MatrixTooSmall);

  Rng rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    const auto r = oracle::random_int_matrix(rng, 12, 12, 0, 40);
    for (int t : {1, 2, 4, 7}) {
      const auto dm = diff_matrix(r, kDirections[rng.below(12)], t);
      CHECK(std::all_of(dm.values.values.begin(), dm.values.values.end(), [t](int v) { return std::abs(v) <= t; }));
    }
  }
}

TEST_CASE("transition_matrix") {
  const auto zero = transition_matrix(as_diff(IntMatrix(3, 3), kDirections[2]));
  CHECK(zero.at(0, 0) == 1.0);
  CHECK(std::accumulate(zero.probs.begin(), zero.probs.end(), 0.0) == 1.0);

  const auto p = transition_matrix(as_diff(matrix(1, 3, {0, 0, 1}), kDirections[0]));
  CHECK(p.at(0, 0) == 0.5);
  CHECK(p.at(0, 1) == 0.5);
  for (int q = -4; q <= 4; ++q) CHECK(p.at(1, q) == 0.0);

  CHECK(code_of([] { transition_matrix(as_diff(IntMatrix(1, 3), kDirections[1])); }) == ErrorCode::MatrixTooSmall);
  CHECK(code_of([] { transition_matrix(as_diff(IntMatrix(4, 1), kDirections[0])); }) == ErrorCode::MatrixTooSmall);

  Rng rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    const auto& dir = kDirections[trial % 12];
    const auto d = oracle::random_int_matrix(rng, 16, 16, -4, 4);
    const auto tpm = transition_matrix(as_diff(d, dir));
    CHECK(tpm.probs == oracle::brute_force_tpm(d, dir.dr, dir.dc, 4));
    for (int a = -4; a <= 4; ++a) {
      double sum = 0;
      for (int b = -4; b <= 4; ++b) {
        CHECK(tpm.at(a, b) >= 0.0);
        CHECK(tpm.at(a, b) <= 1.0);
        sum += tpm.at(a, b);
      }
      CHECK((std::abs(sum - 1.0) < 1e-12 || sum == 0.0));
    }
  }
}

TEST_CASE("merge_pairs") {
  std::vector<TransitionMatrix> twelve(12, TransitionMatrix(4));
  for (int i = 0; i < 12; ++i) twelve[i].at(0, 0) = i / 12.0;
  twelve[1] = twelve[0];
  twelve[4] = TransitionMatrix(4);
  twelve[5].at(0, 0) = 1.0;
  const auto ten = merge_pairs(twelve);
  REQUIRE(ten.size() == 10);
  CHECK(ten[0] == twelve[0]);
  CHECK(ten[3].at(0, 0) == 0.5);
  CHECK(ten[1] == twelve[2]);
  CHECK(ten[9] == twelve[11]);

  const std::vector<TransitionMatrix> same(12, twelve[7]);
  for (const auto& m : merge_pairs(same)) CHECK(m == twelve[7]);

  CHECK(code_of([] { merge_pairs(std::vector<TransitionMatrix>(11, TransitionMatrix(4))); }) == ErrorCode::DimensionMismatch);
  auto mixed = same;
  mixed[3] = TransitionMatrix(3);
  CHECK(code_of([&] { merge_pairs(mixed); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("sign_fold") {
  int classes = 0;
  for (int a = -4; a <= 4; ++a)
    for (int b = -4; b <= 4; ++b) classes += a > 0 || (a == 0 && b >= 0);
  CHECK(classes == 41);
  CHECK(kFoldedClasses == classes);

  TransitionMatrix p(4);
  p.at(1, 2) = 0.4;
  p.at(-1, -2) = 0.2;
  const auto f = sign_fold(p);
  CHECK(f[5 + 6] == doctest::Approx(0.3));  // p=1 row starts after the five p=0 classes

  TransitionMatrix sym(4);
  Rng rng(4);
  for (int a = -4; a <= 4; ++a)
    for (int b = -4; b <= 4; ++b) sym.at(a, b) = sym.at(-a, -b) = rng.uniform();
  const auto g = sign_fold(sym);
  for (int i = 0; i < 41; ++i) {
    const auto info = describe_coordinate(FeatureKind::Global, i);
    CHECK(g[i] == sym.at(info.p, info.q));
  }

  CHECK(code_of([] { sign_fold(TransitionMatrix(3)); }) == ErrorCode::ThresholdMismatch);
}

TEST_CASE("global_feature") {
  const CoefficientPlane zero(4, 4, quant_table_for_quality(75));
  const auto z = global_feature(zero);
  CHECK(z.kind == FeatureKind::Global);
  REQUIRE(z.values.size() == 410);
  CHECK(count_equal(z.values, 1.0) == 10);
  CHECK(count_equal(z.values, 0.0) == 400);
  for (int g = 0; g < 10; ++g) CHECK(z.values[g * 41] == 1.0);

  Rng rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    const auto p = oracle::random_plane(rng, 2 + trial % 4, 3 + trial % 3, 60);
    const auto f = global_feature(p);
    CHECK(f.values == oracle::monolithic_global_feature(p));
    CHECK(std::all_of(f.values.begin(), f.values.end(), [](double v) { return v >= 0 && v <= 1; }));

    auto negated = p;
    for (auto& c : negated.coeffs) c = -c;
    CHECK(global_feature(negated).values == f.values);
    CHECK(global_feature(parse_baseline(write_baseline(p))).values == f.values);

    const auto four = global_feature(p, 4, DirectionSet::Four);
    REQUIRE(four.values.size() == 123);
    CHECK(std::equal(four.values.begin(), four.values.end(), f.values.begin()));
  }

  CHECK(global_feature(CoefficientPlane(1, 1, zero.table)).values.size() == 410);
  CHECK(code_of([&] { global_feature(CoefficientPlane(0, 0, zero.table)); }) == ErrorCode::MatrixTooSmall);
  CHECK(code_of([&] { global_feature(zero, 3); }) == ErrorCode::ThresholdMismatch);
}

TEST_CASE("mode_submatrix") {
  CoefficientPlane p(3, 4, quant_table_for_quality(50));
  p.coeff(0, 0, 0, 1) = -7;
  p.coeff(2, 3, 0, 1) = 2;
  const auto m = mode_submatrix(p, 1);
  CHECK(m.rows == 3);
  CHECK(m.cols == 4);
  CHECK(m.at(0, 0) == 7);
  CHECK(m.at(2, 3) == 2);
  CHECK(std::accumulate(m.values.begin(), m.values.end(), 0) == 9);
  CHECK(mode_submatrix(p, 2) == IntMatrix(3, 4));

  const auto small = mode_submatrix(CoefficientPlane(2, 2, p.table), 5);
  CHECK(small.rows == 2);
  CHECK(small.cols == 2);
  CHECK(code_of([&] { mode_submatrix(CoefficientPlane(0, 2, p.table), 1); }) == ErrorCode::MatrixTooSmall);
}

TEST_CASE("unit_feature") {
  const auto z = unit_feature(IntMatrix(5, 5));
  CHECK(z.kind == FeatureKind::Unit);
  REQUIRE(z.values.size() == 810);
  CHECK(count_equal(z.values, 1.0) == 10);
  for (int g = 0; g < 10; ++g) CHECK(z.values[g * 81 + 40] == 1.0);

  // at 3x3 the two-step directions have no in-bounds pairs, so only groups 1+2, 3 and 4 carry mass
  const auto tiny = unit_feature(IntMatrix(3, 3));
  REQUIRE(tiny.values.size() == 810);
  CHECK(count_equal(tiny.values, 1.0) == 3);
  CHECK(tiny.values[40] == 1.0);
  CHECK(tiny.values[81 + 40] == 1.0);
  CHECK(tiny.values[2 * 81 + 40] == 1.0);

  Rng rng(12);
  for (int trial = 0; trial < 5; ++trial) {
    const auto p = small_plane(rng, 3, 3);
    const auto unit = unit_feature(magnitude(p));
    const auto global = global_feature(p);
    for (int g = 0; g < 10; ++g) {
      TransitionMatrix t(4);
      std::copy(unit.values.begin() + g * 81, unit.values.begin() + (g + 1) * 81, t.probs.begin());
      const auto folded = sign_fold(t);
      for (int i = 0; i < 41; ++i) CHECK(folded[i] == global.values[g * 41 + i]);
    }
  }
  CHECK(code_of([] { unit_feature(IntMatrix(2, 5)); }) == ErrorCode::MatrixTooSmall);
  CHECK(code_of([] { unit_feature(IntMatrix(3, 3), 5); }) == ErrorCode::ThresholdMismatch);
}

TEST_CASE("combined_feature") {
  const CoefficientPlane zero(5, 5, quant_table_for_quality(75));
  const auto z = combined_feature(zero);
  CHECK(z.kind == FeatureKind::Combined);
  REQUIRE(z.values.size() == 17010);
  CHECK(count_equal(z.values, 1.0) == 210);
  CHECK(combined_feature(CoefficientPlane(3, 3, zero.table)).values.size() == 17010);

  Rng rng(14);
  const auto p = small_plane(rng, 5, 6);
  const auto base = combined_feature(p);
  CHECK(std::all_of(base.values.begin(), base.values.end(), [](double v) { return v >= 0 && v <= 1; }));
  CHECK(std::equal(base.values.begin(), base.values.begin() + 810, unit_feature(magnitude(p)).values.begin()));

  auto bumped = p;
  const int pos = mode_position(5);
  bumped.coeff(2, 3, pos / 8, pos % 8) = 40;
  const auto after = combined_feature(bumped);
  auto unit_changed = [&](int u) {
    return !std::equal(base.values.begin() + u * 810, base.values.begin() + (u + 1) * 810, after.values.begin() + u * 810);
  };
  CHECK(unit_changed(0));
  CHECK(unit_changed(5));
  for (int u = 1; u <= 20; ++u)
    if (u != 5) CHECK_FALSE(unit_changed(u));

  auto negated = p;
  for (auto& c : negated.coeffs) c = -c;
  CHECK(combined_feature(negated).values == base.values);

  CHECK(code_of([] { combined_feature(CoefficientPlane(2, 2, quant_table_for_quality(75))); }) == ErrorCode::MatrixTooSmall);
}

TEST_CASE("coordinate layout") {
  auto g = describe_coordinate(FeatureKind::Global, 0);
  CHECK((g.unit == 0 && g.group == 0 && g.p == 0 && g.q == 0));
  g = describe_coordinate(FeatureKind::Global, 409);
  CHECK((g.group == 9 && g.p == 4 && g.q == 4));
  g = describe_coordinate(FeatureKind::Global, 41 + 5);
  CHECK((g.group == 1 && g.p == 1 && g.q == -4));
  auto c = describe_coordinate(FeatureKind::Combined, 810 * 7 + 81 * 3 + 40);
  CHECK((c.unit == 7 && c.group == 3 && c.p == 0 && c.q == 0));
  c = describe_coordinate(FeatureKind::Unit, 0);
  CHECK((c.unit == 0 && c.group == 0 && c.p == -4 && c.q == -4));
  CHECK(code_of([] { describe_coordinate(FeatureKind::Global, 410); }) == ErrorCode::DimensionMismatch);
  CHECK(code_of([] { describe_coordinate(FeatureKind::Unit, 810); }) == ErrorCode::DimensionMismatch);
  CHECK(code_of([] { describe_coordinate(FeatureKind::Projected, 0); }) == ErrorCode::DimensionMismatch);
  CHECK(std::string(to_string(FeatureKind::Combined)) == "combined");
}

TEST_CASE("feature and label files") {
  Rng rng(5);
  FeatureMatrix fm;
  fm.kind = FeatureKind::Global;
  for (int i = 0; i < 3; ++i) fm.append(global_feature(small_plane(rng, 3, 4)));
  CHECK(fm.rows == 3);
  CHECK(fm.cols == 410);

  const auto bytes = encode_djfm(fm);
  REQUIRE(bytes.size() == 4 + 1 + 4 + 4 + 1 + 3 * 410 * 4);
  CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "DJFM");
  CHECK(bytes[4] == 1);
  CHECK(bytes[5] == 3);
  CHECK(bytes[6] == 0);
  CHECK(bytes[9] == 0x9A);  // 410 = 0x019A little-endian
  CHECK(bytes[10] == 0x01);
  CHECK(bytes[13] == 0);
  const auto back = decode_djfm(bytes);
  CHECK(back == fm);
  // the kind tag keeps coordinate semantics across the file
  CHECK(describe_coordinate(back.kind, 100).group == describe_coordinate(fm.kind, 100).group);

  auto bad = bytes;
  bad[0] = 'X';
  CHECK(code_of([&] { decode_djfm(bad); }) == ErrorCode::BadFeatureFile);
  bad = bytes;
  bad[4] = 2;
  CHECK(code_of([&] { decode_djfm(bad); }) == ErrorCode::BadFeatureFile);
  bad = bytes;
  bad.pop_back();
  CHECK(code_of([&] { decode_djfm(bad); }) == ErrorCode::BadFeatureFile);
  bad = bytes;
  bad[13] = 2;  // combined kind with 410 columns
  CHECK(code_of([&] { decode_djfm(bad); }) == ErrorCode::BadFeatureFile);

  const std::vector<Label> labels = {Label::Single, Label::Double, Label::Double};
  const auto lb = encode_djlb(labels);
  CHECK(lb == std::vector<std::uint8_t>{'D', 'J', 'L', 'B', 1, 3, 0, 0, 0, 0, 1, 1});
  CHECK(decode_djlb(lb) == labels);
  auto badlb = lb;
  badlb.back() = 2;
  CHECK(code_of([&] { decode_djlb(badlb); }) == ErrorCode::BadFeatureFile);

  const auto dir = std::filesystem::temp_directory_path() / "djd_feature_io_test";
  std::filesystem::create_directories(dir);
  save_features(dir / "f.djfm", fm);
  save_labels(dir / "l.djlb", labels);
  CHECK(load_features(dir / "f.djfm") == fm);
  CHECK(load_labels(dir / "l.djlb") == labels);
  CHECK(code_of([&] { load_features(dir / "missing.djfm"); }) != ErrorCode::BadConfig);
  std::filesystem::remove_all(dir);
}
