#pragma once

#include "qpr/fourier.hpp"

namespace qpr {

// Reduction of the real sl(2,R) problem to the complexified auxiliary
// system. The change of frame uses M = (1/2)[[1,-i],[1,i]], which maps the
// rotation generator [[0,1],[-1,0]] to diag(i,-i).

// State of the auxiliary two-component system.
struct AuxiliaryState {
    Complex a{};
    Complex c{};
    double t = 0.0;
};

// g = M f M^{-1} coefficientwise. Input must satisfy the real-field
// invariants; the output satisfies the complex-field ones.
MatrixField complex_reduce(const MatrixField& f_real);

// Inverse frame change, f = M^{-1} g M coefficientwise.
MatrixField real_reduce(const MatrixField& g_complex);

// Unperturbed flow diag(e^{i lambda0 t}, e^{-i lambda0 t}).
Mat2 base_solution(double lambda0, double t);

// Right-hand sides for (a,c) at torus angle psi = omega*t:
//   da = eps*g11 + i*mu + eps*(g11 a + g12 c) + i*mu*a
//   dc = -2i*lambda0*c + eps*g21 + eps*(g21 a + g22 c) - i*mu*c
struct AuxiliaryRhs {
    Complex da{};
    Complex dc{};
};

AuxiliaryRhs auxiliary_rhs(const AuxiliaryState& s, double eps, double mu,
                           double lambda0, const MatrixField& g,
                           const std::vector<double>& omega);

// First integral H = a + a* + |a|^2 - |c|^2, conserved by the auxiliary flow.
double first_integral(Complex a, Complex c);

} // namespace qpr
