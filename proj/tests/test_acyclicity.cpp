#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "dagma/acyclicity.hpp"
#include "dagma/datagen.hpp"
#include "dagma/error.hpp"
#include "support.hpp"

using namespace dagma;
using test::cycle_matrix;
using test::scaled_into_domain;

namespace {

const Acyclicity kAllKinds[] = {Acyclicity::ldet(1.0), Acyclicity::ldet(2.5), Acyclicity::expm(),
                                Acyclicity::poly(), Acyclicity::tinv()};

// Tr((I - B)^{-1}) - d as sum_{k >= 1} Tr(B^k), for rho(B) well below 1.
double neumann_tinv(const Matrix& b) {
  double total = 0.0;
  Matrix p = b;
  for (int k = 1; k < 400; ++k) {
    total += p.trace();
    p = p * b;
  }
  return total;
}

Matrix random_dag_weights(std::uint64_t seed, Index d) {
  return assign_weights(sample_er_dag(d, d < 4 ? 1.0 : 1.5, seed), seed);
}

}  // namespace

TEST_CASE("every characterization vanishes exactly on DAGs") {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const Index d = 2 + static_cast<Index>(seed % 14);
    const Matrix w = random_dag_weights(seed, d);
    for (const Acyclicity& kind : kAllKinds) {
      const HEvaluation e = h_value_and_gradient(w, kind);
      CHECK(e.value == 0.0);
      CHECK(max_abs(e.gradient) == 0.0);
    }
  }
}

TEST_CASE("closed forms on the unit cycle") {
  for (Index d : {2, 3, 5, 8, 13, 40}) {
    const Matrix c = cycle_matrix(d);
    for (double s : {1.001, 1.5, 3.0}) {
      // det(sI - C) = s^d - 1.
      const double expected = -std::log(std::pow(s, static_cast<double>(d)) - 1.0) +
                              static_cast<double>(d) * std::log(s);
      CHECK(h_value(c, Acyclicity::ldet(s)) == doctest::Approx(expected).epsilon(1e-10));
    }
  }
  // Tr(C^k) = d iff d | k.
  const Matrix c13 = cycle_matrix(13);
  CHECK(h_value(c13, Acyclicity::expm()) ==
        doctest::Approx(13.0 * (1.0 / std::tgamma(14.0) + 1.0 / std::tgamma(27.0))).epsilon(1e-12));
  // (I + C/d)^d has trace d + d * d^-d.
  CHECK(h_value(c13, Acyclicity::poly()) == doctest::Approx(std::pow(13.0, -12.0)).epsilon(1e-10));
  CHECK(h_value(cycle_matrix(4, 0.5), Acyclicity::tinv()) ==
        doctest::Approx(4.0 * (1.0 / (1.0 - std::pow(0.25, 4.0)) - 1.0)).epsilon(1e-12));
}

TEST_CASE("h_ldet against the cofactor determinant and h_tinv against a Neumann series") {
  Rng rng = Rng(21).child(Stream::test);
  for (int trial = 0; trial < 30; ++trial) {
    const Index d = 2 + static_cast<Index>(rng.below(6));
    const Matrix w = scaled_into_domain(rng, d, 0.6);
    const double s = 1.0 + rng.uniform();
    Matrix m = -w.cwiseAbs2();
    m.diagonal().array() += s;
    const double oracle = -std::log(static_cast<double>(test::cofactor_det(m))) +
                          static_cast<double>(d) * std::log(s);
    CHECK(h_value(w, Acyclicity::ldet(s)) == doctest::Approx(oracle).epsilon(1e-10));
    CHECK(h_value(w, Acyclicity::tinv()) == doctest::Approx(neumann_tinv(w.cwiseAbs2())).epsilon(1e-10));
  }
}

TEST_CASE("outside the domain") {
  const Matrix c = cycle_matrix(5);
  CHECK_THROWS_AS(h_value(c, Acyclicity::ldet(1.0)), Error);
  CHECK_THROWS_AS(h_value(1.1 * c, Acyclicity::ldet(1.2)), Error);
  try {
    h_gradient(c, Acyclicity::tinv());
    FAIL("expected OutOfDomain");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::out_of_domain);
  }
  // expm and poly are defined everywhere.
  CHECK(std::isfinite(h_value(3.0 * c, Acyclicity::expm())));
  CHECK(std::isfinite(h_value(3.0 * c, Acyclicity::poly())));
}

TEST_CASE("domain tests") {
  Rng rng = Rng(22).child(Stream::test);
  for (int trial = 0; trial < 20; ++trial) {
    const Index d = 3 + static_cast<Index>(rng.below(12));
    const Matrix w = scaled_into_domain(rng, d, 1.0);
    for (DomainCheck mode : {DomainCheck::fast, DomainCheck::exact}) {
      CHECK(in_domain(w * std::sqrt(0.99), 1.0, mode));
    }
    CHECK_FALSE(in_domain(w * std::sqrt(1.01), 1.0, DomainCheck::exact));
    CHECK_FALSE(in_domain(w * std::sqrt(3.0), 1.0, DomainCheck::exact));
    CHECK(in_domain(w, 1.01, DomainCheck::exact));
  }
  CHECK(in_domain(random_dag_weights(3, 10) * 100.0, 1e-3, DomainCheck::exact));
  CHECK_FALSE(in_domain(cycle_matrix(6), 1.0, DomainCheck::exact));
  CHECK(in_domain(cycle_matrix(6), 1.0 + 1e-6, DomainCheck::exact));

  SUBCASE("barrier factor agrees with h_value") {
    const Matrix w = scaled_into_domain(rng, 9, 0.7);
    const auto barrier = LogDetBarrier::factor(w.cwiseAbs2(), 0.9);
    REQUIRE(barrier);
    CHECK(barrier->value() == doctest::Approx(h_value(w, Acyclicity::ldet(0.9))).epsilon(1e-14));
    CHECK_FALSE(LogDetBarrier::factor(w.cwiseAbs2(), 0.69));
  }
}

TEST_CASE("gradients match central finite differences") {
  Rng rng = Rng(23).child(Stream::test);
  for (int trial = 0; trial < 25; ++trial) {
    const Index d = 2 + static_cast<Index>(rng.below(7));
    const Matrix w = scaled_into_domain(rng, d, 0.5);
    for (const Acyclicity& kind : kAllKinds) {
      const Matrix g = h_gradient(w, kind);
      const Matrix fd = test::fd_gradient([&](const Matrix& x) { return h_value(x, kind); }, w);
      CHECK(test::rel_error(g, fd) < 1e-6);
    }
  }
}

TEST_CASE("Hessian: Kronecker form against finite-differenced gradients") {
  Rng rng = Rng(24).child(Stream::test);
  for (int trial = 0; trial < 10; ++trial) {
    const Index d = 2 + static_cast<Index>(rng.below(5));
    const double s = 1.0 + 0.5 * rng.uniform();
    const Matrix w = scaled_into_domain(rng, d, 0.5);
    const Matrix h = h_hessian_full(w, s);
    REQUIRE(h.rows() == d * d);
    CHECK((h - h.transpose()).cwiseAbs().maxCoeff() < 1e-12);

    const double step = 1e-6;
    for (Index p = 0; p < d; ++p)
      for (Index q = 0; q < d; ++q) {
        Matrix wp = w, wm = w;
        wp(p, q) += step;
        wm(p, q) -= step;
        // Column-stacked: column p + q d of H is d(grad)/dW(p, q).
        const Vector column = vec((h_gradient(wp, Acyclicity::ldet(s)) - h_gradient(wm, Acyclicity::ldet(s))) /
                                  (2.0 * step));
        CHECK((h.col(p + q * d) - column).cwiseAbs().maxCoeff() < 1e-6);
      }
  }
}

TEST_CASE("Hessian: entrywise form is the Kronecker form with transposed labels") {
  Rng rng = Rng(25).child(Stream::test);
  for (int trial = 0; trial < 5; ++trial) {
    const Index d = 2 + static_cast<Index>(rng.below(5));
    const Matrix w = scaled_into_domain(rng, d, 0.6);
    const Matrix h = h_hessian_full(w, 1.2);
    double worst = 0.0;
    for (Index k = 0; k < d; ++k)
      for (Index l = 0; l < d; ++l)
        for (Index p = 0; p < d; ++p)
          for (Index q = 0; q < d; ++q)
            worst = std::max(worst, std::abs(h_hessian_entry(w, 1.2, k, l, p, q) - h(l + k * d, q + p * d)));
    CHECK(worst < 1e-12);
  }
  CHECK_THROWS_AS(h_hessian_full(Matrix::Zero(65, 65), 1.0), Error);
}

TEST_CASE("ordering of the characterizations inside the unit domain") {
  Rng rng = Rng(26).child(Stream::test);
  for (int trial = 0; trial < 100; ++trial) {
    const Index d = 2 + static_cast<Index>(rng.below(19));
    const Matrix w = scaled_into_domain(rng, d, 0.95 * rng.uniform());
    const HEvaluation poly = h_value_and_gradient(w, Acyclicity::poly());
    const HEvaluation expm = h_value_and_gradient(w, Acyclicity::expm());
    const HEvaluation ldet = h_value_and_gradient(w, Acyclicity::ldet(1.0));
    CHECK(poly.value <= expm.value + 1e-10);
    CHECK(expm.value <= ldet.value + 1e-10);
    CHECK(((poly.gradient.cwiseAbs() - expm.gradient.cwiseAbs()).array() <= 1e-10).all());
    CHECK(((expm.gradient.cwiseAbs() - ldet.gradient.cwiseAbs()).array() <= 1e-10).all());
  }
}
