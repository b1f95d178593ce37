#include <catch2/catch_amalgamated.hpp>
#include <map>

#include "brwcrit/genfun.hpp"
#include "brwcrit/spectral.hpp"
#include "test_helpers.hpp"

using namespace brwcrit;
using testutil::single_site;
using testutil::two_cycle;

TEST_CASE("parameter estimates on elementary kernels", "[genfun]") {
  auto k = single_site(0.8);
  Window w(1);
  auto ms = estimate_Ms(k, 0, 0, 32, w);
  auto mw = estimate_Mw(k, 0, 32, w);
  CHECK(ms.limsup_est == Catch::Approx(0.8));
  CHECK(ms.liminf_est == Catch::Approx(0.8));
  CHECK(mw.limsup_est == Catch::Approx(0.8));
  CHECK(mw.liminf_est == Catch::Approx(0.8));

  // bipartite two-cycle: odd powers vanish, roots run along the support
  auto k2 = two_cycle(2.0, 2.0);
  auto ms2 = estimate_Ms(k2, 0, 0, 64, Window(2));
  CHECK(ms2.limsup_est == Catch::Approx(2.0));
  CHECK(ms2.liminf_est == Catch::Approx(2.0));

  // unreachable target
  auto shift = WeightedKernel::finite({{{1, 1.0}}, {}}, 1.0);
  auto un = estimate_Ms(shift, 1, 0, 16, Window(2));
  CHECK(un.unreachable);
  CHECK(un.limsup_est == 0.0);
}

TEST_CASE("parameter ordering Ms <= Mw- <= Mw", "[genfun]") {
  // The limit ordering holds termwise at every finite n: k^n_xx <= T^n_x.
  // (On finite irreducible kernels all three limits coincide, so the
  // aggregated estimates only reproduce the ordering up to O(1/n) wobble;
  // the termwise roots are the exact finite-n statement.)
  auto rng = Prng::for_stream(11, 4);
  for (int rep = 0; rep < 10; ++rep) {
    auto k = testutil::random_irreducible(rng, 5);
    Window w(5);
    auto ms = estimate_Ms(k, 0, 0, 64, w);
    auto mw = estimate_Mw(k, 0, 64, w);
    std::map<int, double> t_root(mw.roots.begin(), mw.roots.end());
    for (const auto& [n, r] : ms.roots)
      CHECK(r <= t_root.at(n) * (1.0 + 1e-12));
    CHECK(mw.liminf_est <= mw.limsup_est);
    CHECK(ms.limsup_est <= mw.limsup_est * (1.0 + 1e-12));
    CHECK(mw.limsup_est <= k.row_bound() * (1.0 + 1e-12));
  }

  // On a kernel whose parameters genuinely differ the estimates separate:
  // oscillating shift rates give Ms = 0 (no returns), Mw- near 1, Mw near 2.
  auto osc = WeightedKernel::generated(
      [](Site i) -> std::vector<Edge> {
        return {{i + 1, (i >= 2 && i < 8) || i >= 32 ? 2.0 : 1.0}};
      },
      2.0);
  auto mw = estimate_Mw(osc, 0, 64, Window(80));
  CHECK(mw.liminf_est >= 1.0 - 1e-12);
  CHECK(mw.limsup_est <= 2.0 + 1e-12);
  CHECK(mw.liminf_est <= mw.limsup_est);
}

TEST_CASE("Ms agrees across an irreducible class within 5%", "[genfun]") {
  auto rng = Prng::for_stream(21, 8);
  auto k = testutil::random_irreducible(rng, 5);
  Window w(5);
  std::vector<double> est;
  for (Site x = 0; x < 5; ++x)
    est.push_back(estimate_Ms(k, x, x, 64, w).limsup_est);
  double lo = *std::min_element(est.begin(), est.end());
  double hi = *std::max_element(est.begin(), est.end());
  CHECK((hi - lo) / hi < 0.05);
}

TEST_CASE("series closed forms on a single site", "[genfun]") {
  auto k = single_site(1.0);
  Window w(1);
  // Gamma is geometric: 1/(1 - c lambda) at c lambda = 0.5
  auto g = series(k, SeriesKind::Gamma, 0, 0, 0.5, 64, w);
  CHECK(g.partial_sum == Catch::Approx(2.0).epsilon(1e-10));
  CHECK(g.tail == TailFlag::converged);

  // Phi has exactly one term: c lambda
  auto p = series(k, SeriesKind::Phi, 0, 0, 0.5, 64, w);
  CHECK(p.partial_sum == Catch::Approx(0.5).epsilon(1e-14));

  auto diverging = series(k, SeriesKind::Gamma, 0, 0, 1.5, 64, w);
  CHECK(diverging.tail == TailFlag::diverging);
}

TEST_CASE("series partial sums are nondecreasing in n_max", "[genfun]") {
  auto rng = Prng::for_stream(31, 2);
  auto k = testutil::random_irreducible(rng, 4);
  double lambda = 0.4 / spectral_radius(k, Window(4));
  double prev = -1.0;
  for (int n_max : {8, 16, 32, 64}) {
    auto sv = series(k, SeriesKind::Theta, 0, 0, lambda, n_max, Window(4));
    CHECK(sv.partial_sum >= prev);
    prev = sv.partial_sum;
  }
}

TEST_CASE("Theta dominates Gamma termwise", "[genfun]") {
  auto rng = Prng::for_stream(31, 3);
  auto k = testutil::random_irreducible(rng, 4);
  double lambda = 0.4 / spectral_radius(k, Window(4));
  auto th = series(k, SeriesKind::Theta, 0, 0, lambda, 64, Window(4));
  for (Site y = 0; y < 4; ++y) {
    auto ga = series(k, SeriesKind::Gamma, 0, y, lambda, 64, Window(4));
    CHECK(th.partial_sum >= ga.partial_sum);
  }
}

TEST_CASE("Gamma = Phi Gamma + delta identity", "[genfun][oracle]") {
  auto rng = Prng::for_stream(41, 6);
  auto k = testutil::random_irreducible(rng, 4);
  double lambda = 0.5 / spectral_radius(k, Window(4));
  Window w(4);
  for (Site x = 0; x < 4; ++x) {
    for (Site y = 0; y < 4; ++y) {
      double gxy = series(k, SeriesKind::Gamma, x, y, lambda, 128, w).partial_sum;
      double gyy = series(k, SeriesKind::Gamma, y, y, lambda, 128, w).partial_sum;
      double pxy = series(k, SeriesKind::Phi, x, y, lambda, 128, w).partial_sum;
      double expect = pxy * gyy + (x == y ? 1.0 : 0.0);
      CHECK(gxy == Catch::Approx(expect).epsilon(1e-8));
    }
  }
}

TEST_CASE("lambda_s via Phi bisection", "[genfun]") {
  // single site: lambda_s = 1/c
  auto k = single_site(2.0);
  CHECK(lambda_s_via_phi(k, 0, 64, Window(1), 1e-9) ==
        Catch::Approx(0.5).margin(1e-8));

  // two-cycle: Phi = a b lambda^2, root at 1/sqrt(ab)
  auto k2 = two_cycle(3.0, 0.75);
  CHECK(lambda_s_via_phi(k2, 0, 64, Window(2), 1e-9) ==
        Catch::Approx(1.0 / 1.5).margin(1e-8));

  // acyclic class: +infinity sentinel
  auto shift = WeightedKernel::finite({{{1, 1.0}}, {}}, 1.0);
  CHECK(lambda_s_via_phi(shift, 0, 32, Window(2)) == kInfinity);

  // random irreducible kernel against the spectral oracle
  auto rng = Prng::for_stream(51, 9);
  auto kr = testutil::random_irreducible(rng, 5);
  double rho = testutil::power_iteration_rho(testutil::dense(kr));
  double ls = lambda_s_via_phi(kr, 0, 1024, Window(5), 1e-8);
  CHECK(ls == Catch::Approx(1.0 / rho).margin(1e-4));
}

TEST_CASE("spectral radius power iteration", "[genfun][critical]") {
  CHECK(spectral_radius(single_site(0.3), Window(1)) == Catch::Approx(0.3));
  CHECK(spectral_radius(two_cycle(2.0, 2.0), Window(2)) == Catch::Approx(2.0));
  // 2x2 closed form: rho = (a+d)/2 + sqrt(((a-d)/2)^2 + bc)
  auto k = WeightedKernel::finite({{{0, 0.6}, {1, 1.1}}, {{0, 0.4}, {1, 0.2}}},
                                  2.0);
  double expect = 0.4 + std::sqrt(0.04 + 1.1 * 0.4);
  CHECK(spectral_radius(k, Window(2)) == Catch::Approx(expect).epsilon(1e-11));

  // reducible: max over blocks
  auto blocks = WeightedKernel::finite(
      {{{1, 1.0}}, {{0, 1.0}, {2, 0.1}}, {{3, 3.0}}, {{2, 3.0}}}, 4.0);
  CHECK(spectral_radius(blocks, Window(4)) == Catch::Approx(3.0).epsilon(1e-11));
}
