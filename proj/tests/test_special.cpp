#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "e2oal/dirichlet.hpp"
#include "e2oal/rng.hpp"
#include "e2oal/special_functions.hpp"
#include "kl_quadrature.hpp"

using namespace e2oal;
using Catch::Approx;

TEST_CASE("log gamma, digamma, trigamma reference values") {
  // Columns: x, lgamma, digamma, trigamma (precomputed references).
  const double table[][4] = {
      {0.1, 2.252712651734206, -10.423754940411078, 101.43329915079276},
      {0.5, 0.5723649429247001, -1.9635100260214235, 4.934802200544679},
      {1.0, 0.0, -0.5772156649015329, 1.6449340668482264},
      {1.5, -0.12078223763524522, 0.03648997397857652, 0.9348022005446793},
      {2.0, 0.0, 0.42278433509846713, 0.6449340668482264},
      {3.7, 1.4280723266653879, 1.1671535393615113, 0.31003785767003833},
      {10.0, 12.801827480081469, 2.251752589066721, 0.10516633568168575},
      {123.456, 469.60554712992945, 4.811829323828985, 0.008132945834278198},
      {9999.5, 82095.11236375764, 9.210240367392599, 0.00010001000091674167},
  };
  for (const auto& row : table) {
    CHECK(special_log_gamma(row[0]) == Approx(row[1]).margin(1e-10).epsilon(1e-12));
    CHECK(special_digamma(row[0]) == Approx(row[2]).epsilon(1e-12).margin(1e-12));
    CHECK(special_trigamma(row[0]) == Approx(row[3]).epsilon(1e-12).margin(1e-12));
  }
}

TEST_CASE("special function domain errors") {
  CHECK_THROWS_AS(special_log_gamma(0.0), std::domain_error);
  CHECK_THROWS_AS(special_digamma(-1.0), std::domain_error);
  CHECK_THROWS_AS(special_trigamma(0.0), std::domain_error);
}

TEST_CASE("digamma and trigamma satisfy recurrences") {
  RngStream rng(3);
  for (int i = 0; i < 200; ++i) {
    double x = rng.uniform(0.05, 50.0);
    CHECK(special_digamma(x + 1.0) - special_digamma(x) == Approx(1.0 / x).epsilon(1e-10));
    CHECK(special_trigamma(x + 1.0) - special_trigamma(x) ==
          Approx(-1.0 / (x * x)).epsilon(1e-9).margin(1e-14));
  }
}

TEST_CASE("calibrated softmax reference values") {
  auto p = calibrated_softmax(std::vector<double>{0, 5, 0, 0}, 1.0);
  CHECK(p[0] == Approx(0.01286892314363129).epsilon(1e-13));
  CHECK(p[1] == Approx(0.9613932305691061).epsilon(1e-13));
  CHECK(p[2] == p[0]);

  auto q = calibrated_softmax(std::vector<double>{-5, 0, -5, -5}, 1.0);
  CHECK(q[0] == Approx(0.20053686533781173).epsilon(1e-13));
  CHECK(q[1] == Approx(0.39838940398656475).epsilon(1e-13));
}

TEST_CASE("calibrated softmax is a shift-sensitive distribution") {
  RngStream rng(17);
  for (int i = 0; i < 100; ++i) {
    std::vector<double> o(4);
    for (double& v : o) v = rng.uniform(-6.0, 6.0);
    auto p = calibrated_softmax(o, 0.5 + rng.uniform() * 3.0);
    double sum = 0.0;
    for (double v : p) {
      CHECK(v > 0.0);
      sum += v;
    }
    CHECK(sum == Approx(1.0).epsilon(1e-12));

    std::vector<double> shifted = o;
    for (double& v : shifted) v += 2.0;
    auto ps = calibrated_softmax(shifted, 1.0);
    auto p1 = calibrated_softmax(o, 1.0);
    // Adding a constant changes the result; plain softmax would not.
    bool moved = false;
    for (std::size_t c = 0; c < o.size(); ++c)
      if (std::abs(ps[c] - p1[c]) > 1e-9) moved = true;
    CHECK(moved);
  }
  CHECK_THROWS_WITH(calibrated_softmax(std::vector<double>{1.0}, 0.0),
                    "gamma must be positive");
  CHECK_THROWS_WITH(calibrated_softmax(std::vector<double>{}, 1.0),
                    "empty logit vector");
}

TEST_CASE("larger gamma pulls the calibrated softmax toward uniform") {
  std::vector<double> o{2.0, -1.0, 0.5};
  auto tight = calibrated_softmax(o, 0.1);
  auto loose = calibrated_softmax(o, 50.0);
  for (double v : loose) CHECK(std::abs(v - 1.0 / 3.0) < 0.05);
  CHECK(tight[0] > loose[0]);
}

TEST_CASE("calibrated softmax equals the Dirichlet expected probability") {
  RngStream rng(23);
  for (int i = 0; i < 300; ++i) {
    std::size_t n = 2 + rng.below(6);
    double gamma = 0.1 + rng.uniform() * 5.0;
    std::vector<double> o(n);
    for (double& v : o) v = rng.uniform(-8.0, 8.0);
    auto direct = calibrated_softmax(o, gamma);
    auto via_alpha = dirichlet_expected_prob(alpha_from_logits(o, gamma));
    for (std::size_t c = 0; c < n; ++c)
      CHECK(std::abs(direct[c] - via_alpha[c]) < 1e-12);
  }
}

TEST_CASE("alpha stays above one") {
  RngStream rng(29);
  for (int i = 0; i < 50; ++i) {
    std::vector<double> o{rng.uniform(-40.0, 40.0), rng.uniform(-40.0, 40.0)};
    for (double a : alpha_from_logits(o, 2.0)) CHECK(a > 1.0);
  }
  CHECK_THROWS_WITH(alpha_from_logits(std::vector<double>{0.0}, -1.0),
                    "gamma must be positive");
}

TEST_CASE("dirichlet nll matches the log ratio") {
  std::vector<double> alpha{2.0, 1.0};
  CHECK(loss_nll(alpha, 0) == Approx(std::log(3.0) - std::log(2.0)).epsilon(1e-14));
  CHECK(loss_nll(alpha, 1) == Approx(std::log(3.0)).epsilon(1e-14));
  CHECK_THROWS_WITH(loss_nll(alpha, 2), "class out of range");
}

TEST_CASE("KL to the flat Dirichlet: pinned values") {
  CHECK(kl_dirichlet_uniform(std::vector<double>{1.0, 1.0}) == Approx(0.0).margin(1e-14));
  CHECK(kl_dirichlet_uniform(std::vector<double>{1.0, 1.0, 1.0}) ==
        Approx(0.0).margin(1e-14));
  // ln 2 - 1/2
  CHECK(kl_dirichlet_uniform(std::vector<double>{2.0, 1.0}) ==
        Approx(0.19314718055994531).margin(1e-9));
}

TEST_CASE("KL closed form matches quadrature") {
  RngStream rng(31);
  for (int i = 0; i < 12; ++i) {
    double a = rng.uniform(0.6, 6.0), b = rng.uniform(0.6, 6.0);
    double closed = kl_dirichlet_uniform(std::vector<double>{a, b});
    CHECK(closed == Approx(klq::kl_dir2(a, b)).margin(2e-7));
  }
  for (int i = 0; i < 6; ++i) {
    double a = rng.uniform(1.0, 6.0), b = rng.uniform(1.0, 6.0),
           c = rng.uniform(1.0, 6.0);
    double closed = kl_dirichlet_uniform(std::vector<double>{a, b, c});
    CHECK(closed == Approx(klq::kl_dir3(a, b, c)).margin(2e-6));
  }
}

TEST_CASE("KL is nonnegative and zero only at the prior") {
  RngStream rng(37);
  for (int i = 0; i < 500; ++i) {
    std::size_t n = 2 + rng.below(8);
    std::vector<double> at(n);
    for (double& v : at) v = std::exp(rng.uniform(-1.5, 2.5));
    CHECK(kl_dirichlet_uniform(at) >= -1e-12);
  }
  CHECK_THROWS_WITH(kl_dirichlet_uniform(std::vector<double>{}),
                    "invalid concentration");
  CHECK_THROWS_WITH(kl_dirichlet_uniform(std::vector<double>{1.0, -2.0}),
                    "invalid concentration");
}

TEST_CASE("deflating pins the true class to one") {
  std::vector<double> alpha{3.0, 4.0, 5.0};
  auto at = deflated_alpha(alpha, 1);
  CHECK(at == std::vector<double>{3.0, 1.0, 5.0});
  CHECK(loss_kl(alpha, 1) == Approx(kl_dirichlet_uniform(at)).epsilon(1e-14));
}

TEST_CASE("evidence loss gradient matches finite differences") {
  RngStream rng(41);
  for (int trial = 0; trial < 60; ++trial) {
    std::size_t n = 2 + rng.below(6);
    double gamma = 0.3 + rng.uniform() * 3.0;
    std::size_t y = rng.below(n);
    std::vector<double> o(n);
    for (double& v : o) v = rng.uniform(-4.0, 4.0);

    EdlGrad g = edl_loss_grad(o, y, gamma);
    CHECK(g.loss ==
          Approx(loss_nll(alpha_from_logits(o, gamma), y) +
                 loss_kl(alpha_from_logits(o, gamma), y))
              .epsilon(1e-12));
    const double h = 1e-6;
    for (std::size_t c = 0; c < n; ++c) {
      std::vector<double> hi = o, lo = o;
      hi[c] += h;
      lo[c] -= h;
      double fd = (edl_loss_grad(hi, y, gamma).loss - edl_loss_grad(lo, y, gamma).loss) /
                  (2.0 * h);
      CHECK(g.d_logits[c] == Approx(fd).epsilon(5e-5).margin(1e-8));
    }
  }
}

TEST_CASE("clamped logits carry no gradient") {
  std::vector<double> o{40.0, 0.0};
  EdlGrad g = edl_loss_grad(o, 1, 1.0, 30.0);
  CHECK(g.d_logits[0] == 0.0);
  CHECK(g.d_logits[1] != 0.0);
}
