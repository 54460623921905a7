#include "qpr/model.hpp"

#include <cmath>

#include "qpr/errors.hpp"

namespace qpr {

MatrixField complex_reduce(const MatrixField& f_real) {
    validate_real_field(f_real);
    const Complex I(0.0, 1.0);
    MatrixField g;
    g.dim = f_real.dim;
    for (const auto& [nu, f] : f_real.coeffs) {
        Mat2 m;
        // entrywise conjugation by M, written out
        m(0, 0) = 0.5 * (f(0, 0) + f(1, 1) + I * (f(0, 1) - f(1, 0)));
        m(0, 1) = 0.5 * (f(0, 0) - f(1, 1) - I * (f(0, 1) + f(1, 0)));
        m(1, 0) = 0.5 * (f(0, 0) - f(1, 1) + I * (f(0, 1) + f(1, 0)));
        m(1, 1) = 0.5 * (f(0, 0) + f(1, 1) - I * (f(0, 1) - f(1, 0)));
        g.coeffs[nu] = m;
    }
    return g;
}

MatrixField real_reduce(const MatrixField& g_complex) {
    validate_complex_field(g_complex);
    const Complex I(0.0, 1.0);
    MatrixField f;
    f.dim = g_complex.dim;
    for (const auto& [nu, g] : g_complex.coeffs) {
        Mat2 m;
        m(0, 0) = 0.5 * (g(0, 0) + g(1, 1) + g(0, 1) + g(1, 0));
        m(0, 1) = 0.5 * (-I * (g(0, 0) - g(1, 1)) + I * (g(0, 1) - g(1, 0)));
        m(1, 0) = 0.5 * (I * (g(0, 0) - g(1, 1)) + I * (g(0, 1) - g(1, 0)));
        m(1, 1) = 0.5 * (g(0, 0) + g(1, 1) - g(0, 1) - g(1, 0));
        f.coeffs[nu] = m;
    }
    return f;
}

Mat2 base_solution(double lambda0, double t) {
    Mat2 y;
    y(0, 0) = std::polar(1.0, lambda0 * t);
    y(1, 1) = std::polar(1.0, -lambda0 * t);
    return y;
}

AuxiliaryRhs auxiliary_rhs(const AuxiliaryState& s, double eps, double mu,
                           double lambda0, const MatrixField& g,
                           const std::vector<double>& omega) {
    const Complex I(0.0, 1.0);
    std::vector<double> psi(omega.size());
    for (std::size_t i = 0; i < omega.size(); ++i) psi[i] = omega[i] * s.t;
    Mat2 gv = g.eval(psi);
    AuxiliaryRhs r;
    r.da = eps * gv(0, 0) + I * mu + eps * (gv(0, 0) * s.a + gv(0, 1) * s.c) + I * mu * s.a;
    r.dc = -2.0 * I * lambda0 * s.c + eps * gv(1, 0) +
           eps * (gv(1, 0) * s.a + gv(1, 1) * s.c) - I * mu * s.c;
    return r;
}

double first_integral(Complex a, Complex c) {
    return 2.0 * a.real() + std::norm(a) - std::norm(c);
}

} // namespace qpr
