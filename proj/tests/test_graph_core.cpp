#include <catch2/catch_amalgamated.hpp>

#include "brwcrit/genfun.hpp"
#include "brwcrit/kernel.hpp"
#include "brwcrit/local_iso.hpp"
#include "brwcrit/paths.hpp"
#include "brwcrit/scc.hpp"
#include "test_helpers.hpp"

using namespace brwcrit;
using testutil::single_site;
using testutil::two_cycle;

TEST_CASE("kernel construction validates rows", "[kernel]") {
  CHECK_THROWS_AS(WeightedKernel::finite({{{0, -1.0}}}, 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(WeightedKernel::finite({{{0, 2.0}}}, 1.0),
                  std::invalid_argument);  // row sum above bound
  // zero weights are dropped from the edge set
  auto k = WeightedKernel::finite({{{0, 0.0}, {1, 1.0}}, {}}, 1.0);
  CHECK(k.row(0).size() == 1);
  CHECK(k.row(0)[0].to == 1);
}

TEST_CASE("generated kernel rows are audited on enumeration", "[kernel]") {
  auto k = WeightedKernel::generated(
      [](Site x) -> std::vector<Edge> { return {{x + 1, double(x + 1)}}; },
      3.0);
  CHECK(k.row_sum(1) == 2.0);
  CHECK_THROWS_AS(k.row(5), std::invalid_argument);  // sum 6 > bound 3
}

TEST_CASE("kernel_power_row basics", "[paths]") {
  auto k1 = single_site(1.5);
  Window w(1);
  CHECK(kernel_power_row(k1, 0, 3, w).at(0) == Catch::Approx(1.5 * 1.5 * 1.5));

  // n = 0 is the indicator row
  auto k2 = two_cycle(2.0, 2.0);
  auto row0 = kernel_power_row(k2, 0, 0, Window(2));
  CHECK(row0.at(0) == 1.0);
  CHECK(row0.at(1) == 0.0);

  auto row2 = kernel_power_row(k2, 0, 2, Window(2));
  CHECK(row2.at(0) == Catch::Approx(4.0));
  CHECK(row2.at(1) == 0.0);
}

TEST_CASE("total_weight on shift kernel and example 4 rates", "[paths]") {
  auto shift = WeightedKernel::generated(
      [](Site x) -> std::vector<Edge> { return {{x + 1, 2.0}}; }, 2.0);
  CHECK(total_weight(shift, 0, 5, Window(8)) == Catch::Approx(32.0));
  CHECK(total_weight(shift, 0, 0, Window(8)) == 1.0);

  // forward (1+1/n)^2, backward 3^-(m+1) from site m
  auto ex4 = WeightedKernel::generated(
      [](Site x) -> std::vector<Edge> {
        std::vector<Edge> r;
        if (x == 0) {
          r.push_back({1, 2.0});
        } else {
          double fwd = (1.0 + 1.0 / double(x)) * (1.0 + 1.0 / double(x));
          r.push_back({x + 1, fwd});
          r.push_back({x - 1, std::pow(3.0, -double(x + 1))});
        }
        return r;
      },
      37.0 / 9.0);
  // T^2_0 = k01 k12 + k01 k10 = 2*4 + 2*(1/9)
  CHECK(total_weight(ex4, 0, 2, Window(4)) ==
        Catch::Approx(8.0 + 2.0 / 9.0).epsilon(1e-12));
}

TEST_CASE("first passage basics", "[paths]") {
  auto k1 = single_site(0.7);
  CHECK(first_passage_row(k1, 0, 0, 1, Window(1)) == Catch::Approx(0.7));
  CHECK(first_passage_row(k1, 0, 0, 2, Window(1)) == 0.0);
  CHECK(first_passage_row(k1, 0, 0, 0, Window(1)) == 0.0);

  auto k2 = two_cycle(0.5, 3.0);
  CHECK(first_passage_row(k2, 0, 0, 2, Window(2)) == Catch::Approx(1.5));
  CHECK(first_passage_row(k2, 0, 0, 3, Window(2)) == 0.0);
}

TEST_CASE("path quantities match brute-force enumeration", "[paths][oracle]") {
  auto rng = Prng::for_stream(2024, 7);
  auto k = testutil::random_irreducible(rng, 4);
  auto m = testutil::dense(k);
  Window w(4);
  for (int n = 0; n <= 8; ++n) {
    for (Site x = 0; x < 4; ++x) {
      auto row = kernel_power_row(k, x, n, w);
      for (Site y = 0; y < 4; ++y) {
        double expect = testutil::path_weight_oracle(m, x, y, n);
        CHECK(row.at(y) == Catch::Approx(expect).margin(1e-12));
      }
      double phi = first_passage_row(k, x, 0, n, w);
      CHECK(phi ==
            Catch::Approx(testutil::first_passage_oracle(m, x, 0, n)).margin(1e-12));
    }
  }
}

TEST_CASE("first-passage decomposition k^n = sum phi^i k^{n-i}", "[paths]") {
  auto rng = Prng::for_stream(99, 3);
  auto k = testutil::random_irreducible(rng, 4);
  Window w(4);
  for (Site x = 0; x < 4; ++x) {
    for (Site y = 0; y < 4; ++y) {
      auto phis = first_passage_log_sequence(k, x, y, 12, w);
      auto kyy = power_entry_log_sequence(k, y, y, 12, w);
      auto kxy = power_entry_log_sequence(k, x, y, 12, w);
      for (int n = 1; n <= 12; ++n) {
        double sum = 0.0;
        for (int i = 0; i <= n; ++i)
          sum += std::exp(phis[i]) * std::exp(kyy[n - i]);
        double expect = std::exp(kxy[n]);
        CHECK(sum == Catch::Approx(expect).epsilon(1e-10));
      }
    }
  }
}

TEST_CASE("semigroup property of power rows", "[paths]") {
  auto rng = Prng::for_stream(5, 5);
  auto k = testutil::random_irreducible(rng, 5);
  Window w(5);
  auto r7 = kernel_power_row(k, 2, 7, w);
  // push r4 three more steps by composing with rows of K^3
  auto r4 = kernel_power_row(k, 2, 4, w);
  SiteVector composed(w, 0.0);
  for (Site u = 0; u < 5; ++u) {
    auto ru = kernel_power_row(k, u, 3, w);
    for (Site y = 0; y < 5; ++y) composed.at(y) += r4.at(u) * ru.at(y);
  }
  for (Site y = 0; y < 5; ++y)
    CHECK(composed.at(y) == Catch::Approx(r7.at(y)).epsilon(1e-12));
}

TEST_CASE("window monotonicity of path weights", "[paths]") {
  auto ex4 = WeightedKernel::generated(
      [](Site x) -> std::vector<Edge> {
        std::vector<Edge> r;
        if (x == 0) {
          r.push_back({1, 2.0});
        } else {
          double fwd = (1.0 + 1.0 / double(x)) * (1.0 + 1.0 / double(x));
          r.push_back({x + 1, fwd});
          r.push_back({x - 1, std::pow(3.0, -double(x + 1))});
        }
        return r;
      },
      37.0 / 9.0);
  double prev_t = -1.0, prev_k = -1.0, prev_phi = -1.0;
  for (Site n : {8, 16, 32}) {
    Window w(n);
    double t = total_weight(ex4, 0, 12, w);
    double kp = kernel_power_row(ex4, 0, 12, w).at(2);
    double phi = first_passage_row(ex4, 0, 3, 12, w);
    CHECK(t >= prev_t);
    CHECK(kp >= prev_k);
    CHECK(phi >= prev_phi);
    prev_t = t;
    prev_k = kp;
    prev_phi = phi;
  }
}

TEST_CASE("overflow switches to scaled representation", "[paths]") {
  auto hot = single_site(1e80);
  auto row = kernel_power_row(hot, 0, 16, Window(1));  // 1e1280, overflows
  CHECK(std::isfinite(row.at(0)));
  CHECK(row.log_value(0) == Catch::Approx(16.0 * std::log(1e80)));
  CHECK(std::exp(row.log_value(0) / 16.0) == Catch::Approx(1e80));
}

TEST_CASE("irreducible classes", "[scc]") {
  auto shift5 = WeightedKernel::finite(
      {{{1, 1.0}}, {{2, 1.0}}, {{3, 1.0}}, {{4, 1.0}}, {}}, 1.0);
  auto dec = irreducible_classes(shift5, Window(5));
  CHECK(dec.class_count() == 5);
  for (int c = 0; c < 5; ++c) CHECK_FALSE(dec.class_has_cycle(c));
  CHECK(dec.reaches(0, 4));
  CHECK_FALSE(dec.reaches(4, 0));

  auto rng = Prng::for_stream(1, 1);
  auto irr = testutil::random_irreducible(rng, 6);
  CHECK(irreducible_classes(irr, Window(6)).irreducible());

  // block triangular: two 2-cycles, one bridge
  auto block = WeightedKernel::finite(
      {{{1, 1.0}}, {{0, 1.0}, {2, 0.5}}, {{3, 1.0}}, {{2, 1.0}}}, 2.0);
  auto bd = irreducible_classes(block, Window(4));
  CHECK(bd.class_count() == 2);
  CHECK(bd.reaches(0, 3));
  CHECK_FALSE(bd.reaches(2, 0));
}

TEST_CASE("local isomorphism of the homogeneous tree line", "[iso]") {
  const double m = 5.0;
  auto line = WeightedKernel::generated(
      [m](Site x) -> std::vector<Edge> {
        if (x == 0) return {{1, m}};
        return {{x - 1, 1.0}, {x + 1, m - 1.0}};
      },
      m);
  auto singleton = WeightedKernel::finite({{{0, m}}}, m);
  auto res = check_local_isomorphism(
      line, singleton, [](Site) { return Site(0); }, Window(64));
  CHECK(res.verified);

  // identity map onto itself
  auto rng = Prng::for_stream(3, 3);
  auto k = testutil::random_irreducible(rng, 4);
  auto self = check_local_isomorphism(k, k, [](Site x) { return x; }, Window(4));
  CHECK(self.verified);

  // perturb one existing weight by 2 * tol: the violating row is reported
  auto rows = testutil::dense(k);
  Site py = k.row(2)[0].to;
  std::vector<std::vector<Edge>> pert(4);
  for (Site x = 0; x < 4; ++x)
    for (Site y = 0; y < 4; ++y)
      if (rows[x][y] > 0.0)
        pert[x].push_back({y, rows[x][y] + ((x == 2 && y == py) ? 2e-9 : 0.0)});
  auto kp = WeightedKernel::finite(std::move(pert), k.row_bound() + 1e-8);
  auto bad = check_local_isomorphism(kp, k, [](Site x) { return x; }, Window(4));
  CHECK_FALSE(bad.verified);
  CHECK(bad.bad_x == 2);
  CHECK(bad.bad_y == py);

  // non-surjective map is a structural failure
  auto ns = check_local_isomorphism(k, k, [](Site) { return Site(0); }, Window(4));
  CHECK(ns.structural_failure);
}
