#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "qpr/errors.hpp"
#include "qpr/series.hpp"

using namespace qpr;

namespace {
const Complex I(0.0, 1.0);
const Momentum kNu{-1, 0};
const Momentum kZero{0, 0};

FormalSeries golden_series(int K, double lambda0 = 1.0) {
    return solve_series(testing::load_fixture("golden_sparse.jsonl"),
                        testing::golden_omega(), lambda0, K);
}
} // namespace

TEST_CASE("first order on the sparse fixture") {
    FormalSeries fs = golden_series(1);
    const OrderSlice& s1 = fs.order(1);
    CHECK(std::abs(s1.c.at(kNu) - (-I)) < 1e-14); // -i/( -1 + 2 )
    CHECK(std::abs(s1.mu) < 1e-15);
    CHECK(std::abs(s1.c0) < 1e-15);
    CHECK(s1.a0 == 0.0);
    // a-component has no source
    for (const auto& [nu, v] : s1.a) CHECK(std::abs(v) < 1e-15);
}

TEST_CASE("zero field gives zero slices at every order") {
    MatrixField g;
    g.dim = 2;
    FormalSeries fs = solve_series(g, testing::golden_omega(), 1.0, 4);
    for (int k = 1; k <= 4; ++k) {
        CHECK(order_scale(fs, k) == 0.0);
        CHECK(fs.order(k).a0 == 0.0);
    }
}

TEST_CASE("second order: counterterm and zero-mode normalisation") {
    FormalSeries fs = golden_series(2);
    CHECK(std::abs(fs.order(2).mu - Complex(1.0)) <= 1e-12); // 1/(2 lambda0 - 1)
    CHECK(fs.order(2).a0 == doctest::Approx(0.5).epsilon(1e-12));

    // general lambda0: mu_2 = 1/(2 lambda0 - 1)
    FormalSeries fs2 = golden_series(2, 1.3);
    CHECK(fs2.order(2).mu.real() == doctest::Approx(1.0 / (2 * 1.3 - 1.0)).epsilon(1e-12));
}

TEST_CASE("higher orders of the sparse fixture agree with hand recursion") {
    FormalSeries fs = golden_series(4);
    CHECK(std::abs(fs.order(3).mu) < 1e-14);
    CHECK(std::abs(fs.order(3).c.at(kNu) - Complex(0.0, 0.5)) < 1e-12);
    CHECK(std::abs(fs.order(4).mu - Complex(-1.0)) < 1e-12);
    CHECK(fs.order(4).a0 == doctest::Approx(-0.5).epsilon(1e-11));
    CHECK(fs.order(1).dropped_mass == 0.0);
    CHECK(fs.order(4).dropped_mass == 0.0);
}

TEST_CASE("counterterm coefficients stay real") {
    for (const char* name : {"golden_sparse.jsonl", "mixed.jsonl"}) {
        FormalSeries fs = solve_series(testing::load_fixture(name),
                                       testing::golden_omega(), 1.0, 6);
        for (int k = 1; k <= 6; ++k) {
            double mu_abs = std::abs(fs.order(k).mu);
            CHECK(std::abs(fs.order(k).mu.imag()) <= 1e-10 * std::max(1.0, mu_abs));
        }
    }
}

TEST_CASE("first-order counterterm of the mixed fixture") {
    FormalSeries fs = solve_series(testing::load_fixture("mixed.jsonl"),
                                   testing::golden_omega(), 1.0, 1);
    CHECK(fs.order(1).mu.real() == doctest::Approx(-0.3).epsilon(1e-14));
}

TEST_CASE("first integral vanishes order by order") {
    for (const char* name : {"golden_sparse.jsonl", "mixed.jsonl"}) {
        FormalSeries fs = solve_series(testing::load_fixture(name),
                                       testing::golden_omega(), 1.0, 6);
        for (int k = 1; k <= 6; ++k) {
            ScalarField H = first_integral_order(fs, k);
            double scale = std::max(1e-30, order_scale(fs, k));
            CHECK(max_abs(H) <= 1e-10 * scale);
        }
    }
}

TEST_CASE("perturbing the zero mode shows up linearly in the first integral") {
    FormalSeries fs = golden_series(3);
    const double delta = 1e-3;
    fs.slices[2].a0 += delta;
    fs.slices[2].a[kZero] += delta;
    ScalarField H = first_integral_order(fs, 3);
    CHECK(H.at(kZero).real() == doctest::Approx(2.0 * delta).epsilon(1e-9));
}

TEST_CASE("divisors below the floor raise with the offending mode") {
    // 2*lambda0 = omega.(1,0) makes the (-1,0) divisor vanish
    CHECK_THROWS_AS(golden_series(1, 0.5), SmallDivisorViolation);
}

TEST_CASE("orders must be solved in sequence") {
    FormalSeries fs = golden_series(1);
    CHECK_THROWS_AS(solve_order_k(fs, testing::load_fixture("golden_sparse.jsonl"), 3),
                    UsageError);
}

TEST_CASE("support stays inside the order-k sumset") {
    FormalSeries fs = solve_series(testing::load_fixture("mixed.jsonl"),
                                   testing::golden_omega(), 1.0, 5);
    int Nf = fs.N_f;
    for (int k = 1; k <= 5; ++k) {
        for (const auto& [nu, v] : fs.order(k).a) CHECK(l1_norm(nu) <= k * Nf);
        for (const auto& [nu, v] : fs.order(k).c) CHECK(l1_norm(nu) <= k * Nf);
    }
}

TEST_CASE("beta assembly") {
    FormalSeries fs = golden_series(3);
    std::vector<double> psi{0.3, 0.7};

    Mat2 B0 = evaluate_beta(fs, 0.0, psi);
    CHECK(max_abs_entry(B0 - Mat2::identity()) == 0.0);

    // hand-built series with a single a-mode
    FormalSeries hand;
    hand.omega = testing::golden_omega();
    hand.lambda0 = 1.0;
    OrderSlice s;
    Complex z(0.4, -0.2);
    Momentum nu0{1, 0};
    s.a[nu0] = z;
    hand.slices.push_back(s);
    double eps = 0.1;
    Mat2 B = evaluate_beta(hand, eps, psi);
    Complex ph = std::polar(1.0, psi[0]);
    CHECK(std::abs(B(0, 0) - (1.0 + eps * z * ph)) < 1e-15);
    CHECK(std::abs(B(1, 1) - (1.0 + eps * std::conj(z * ph))) < 1e-15);

    // det B = 1 + O(eps^{K+1}) on a grid
    auto det_defect = [&](double e) {
        double worst = 0.0;
        for (double t1 = 0; t1 < 6.3; t1 += 0.7)
            for (double t2 = 0; t2 < 6.3; t2 += 0.7) {
                Mat2 Bv = evaluate_beta(fs, e, {t1, t2});
                worst = std::max(worst, std::abs(Bv.det() - 1.0));
            }
        return worst;
    };
    double r = det_defect(1e-2) / det_defect(5e-3);
    CHECK(r > 8.0);  // order >= 4 remainder
    CHECK(r < 40.0);
}

TEST_CASE("counterterm assembly") {
    FormalSeries fs = golden_series(2);
    CHECK(evaluate_mu(fs, 0.0) == 0.0);
    CHECK(evaluate_mu(fs, 0.1) == doctest::Approx(0.01).epsilon(1e-12));

    FormalSeries mixed = solve_series(testing::load_fixture("mixed.jsonl"),
                                      testing::golden_omega(), 1.0, 1);
    CHECK(evaluate_mu(mixed, 0.1) == doctest::Approx(-0.03).epsilon(1e-12));
}
