#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "qpr/errors.hpp"
#include "qpr/model.hpp"

using namespace qpr;

namespace {
const Complex I(0.0, 1.0);

MatrixField constant_field(const Mat2& m) {
    MatrixField f;
    f.dim = 2;
    f.coeffs[{0, 0}] = m;
    return f;
}
} // namespace

TEST_CASE("complex_reduce maps the rotation generator to diag(i,-i)") {
    Mat2 A;
    A(0, 1) = 1.0;
    A(1, 0) = -1.0;
    MatrixField g = complex_reduce(constant_field(A));
    const Mat2& m = g.coeffs.at({0, 0});
    CHECK(std::abs(m(0, 0) - I) < 1e-15);
    CHECK(std::abs(m(1, 1) + I) < 1e-15);
    CHECK(std::abs(m(0, 1)) < 1e-15);
    CHECK(std::abs(m(1, 0)) < 1e-15);
}

TEST_CASE("complex_reduce of the zero field is zero") {
    MatrixField f;
    f.dim = 2;
    CHECK(complex_reduce(f).empty());
}

TEST_CASE("complex_reduce of diag(1,-1)") {
    Mat2 m;
    m(0, 0) = 1.0;
    m(1, 1) = -1.0;
    MatrixField g = complex_reduce(constant_field(m));
    const Mat2& r = g.coeffs.at({0, 0});
    CHECK(std::abs(r(0, 0)) < 1e-15);
    CHECK(std::abs(r(0, 1) - 1.0) < 1e-15);
    CHECK(std::abs(r(1, 0) - 1.0) < 1e-15);
    CHECK(std::abs(r(1, 1)) < 1e-15);
}

TEST_CASE("complex_reduce rejects non-traceless input naming the mode") {
    Mat2 m;
    m(0, 0) = 1.0; // trace 1
    CHECK_THROWS_WITH_AS(complex_reduce(constant_field(m)), doctest::Contains("(0,0)"),
                         ValidationError);
}

TEST_CASE("reduced fixture satisfies the complex-field symmetry to 1e-14") {
    MatrixField f = testing::load_fixture("real_rotation.jsonl");
    MatrixField g = complex_reduce(f);
    validate_complex_field(g, 1e-14);
    for (const auto& [nu, m] : g.coeffs) CHECK(std::abs(m.trace()) < 1e-14);

    // frame change is invertible
    MatrixField back = real_reduce(g);
    for (const auto& [nu, m] : f.coeffs) {
        const Mat2* b = back.at(nu);
        REQUIRE(b != nullptr);
        for (int i = 0; i < 4; ++i) CHECK(std::abs(m.m[i] - b->m[i]) < 1e-14);
    }
}

TEST_CASE("base_solution values and determinant") {
    Mat2 y0 = base_solution(1.0, 0.0);
    CHECK(std::abs(y0(0, 0) - 1.0) < 1e-15);
    CHECK(std::abs(y0(1, 1) - 1.0) < 1e-15);

    Mat2 ypi = base_solution(1.0, M_PI);
    CHECK(std::abs(ypi(0, 0) + 1.0) < 1e-14);
    CHECK(std::abs(ypi(1, 1) + 1.0) < 1e-14);

    Mat2 yhalf = base_solution(0.5, M_PI);
    CHECK(std::abs(yhalf(0, 0) - I) < 1e-14);
    CHECK(std::abs(yhalf(1, 1) + I) < 1e-14);

    for (double t : {1.0, 10.0, 333.3, 1000.0}) {
        CHECK(std::abs(base_solution(1.0, t).det() - 1.0) <= 1e-13);
        CHECK(std::abs(base_solution(0.37, t).det() - 1.0) <= 1e-13);
    }
}

TEST_CASE("auxiliary_rhs hand values") {
    MatrixField g = testing::load_fixture("golden_sparse.jsonl");
    auto omega = testing::golden_omega();

    AuxiliaryState s0{0.0, 0.0, 0.3};
    auto r0 = auxiliary_rhs(s0, 0.0, 0.0, 1.0, g, omega);
    CHECK(std::abs(r0.da) < 1e-15);
    CHECK(std::abs(r0.dc) < 1e-15);

    AuxiliaryState s1{0.0, 1.0, 0.0};
    auto r1 = auxiliary_rhs(s1, 0.0, 0.0, 1.0, g, omega);
    CHECK(std::abs(r1.da) < 1e-15);
    CHECK(std::abs(r1.dc - Complex(0.0, -2.0)) < 1e-15);

    AuxiliaryState s2{1.0, 0.0, 0.0};
    auto r2 = auxiliary_rhs(s2, 0.0, 0.5, 1.0, g, omega);
    CHECK(std::abs(r2.da - I) < 1e-15);
    CHECK(std::abs(r2.dc) < 1e-15);
}

TEST_CASE("first integral hand values") {
    CHECK(first_integral(0.0, 0.0) == 0.0);
    CHECK(first_integral(I, 0.0) == doctest::Approx(1.0));
    CHECK(first_integral(0.0, Complex(1.0, 1.0)) == doctest::Approx(-2.0));
}
