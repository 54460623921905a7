#pragma once

#include <vector>

#include "qpr/fourier.hpp"

namespace qpr {

// Order-by-order construction of the formal conjugation series. Per order k
// the unknowns are the scalar fields a_k, c_k, the counterterm coefficient
// mu_k and the zero modes; mu_k and c_k(0) are forced by the zero-mode
// equations, a_k(0) is fixed so the first integral vanishes order by order.

struct OrderSlice {
    ScalarField a; // includes the nu=0 entry, equal to a0
    ScalarField c; // includes the nu=0 entry, equal to c0
    Complex mu{};
    Complex c0{};
    double a0 = 0.0;
    double dropped_mass = 0.0; // convolution mass outside the truncation
};

struct FormalSeries {
    std::vector<double> omega;
    double lambda0 = 0.0;
    int N_f = 0;       // support radius of the source field
    double divisor_floor = 1e-8;
    std::vector<OrderSlice> slices; // slices[k-1] holds order k

    int K() const { return static_cast<int>(slices.size()); }
    const OrderSlice& order(int k) const; // 1-based, throws on range
};

// First order: a_nu = -i g11_nu/(omega.nu), c_nu = -i g21_nu/(omega.nu+2 l0),
// mu = i g11_0, c0 = -i g21_0 / (2 l0), a0 = 0.
OrderSlice solve_order_1(const MatrixField& g, const std::vector<double>& omega,
                         double lambda0, double divisor_floor = 1e-8);

// Order k >= 2 from the completed orders below it. Throws UsageError unless
// k == series.K() + 1.
OrderSlice solve_order_k(const FormalSeries& series, const MatrixField& g, int k);

// Convenience driver: orders 1..K.
FormalSeries solve_series(const MatrixField& g, const std::vector<double>& omega,
                          double lambda0, int K, double divisor_floor = 1e-8);

// Fourier coefficients of the order-k piece of the first integral,
//   H_k = a_k + a_k^* + sum_{k1+k2=k} (a_k1 a_k2^* - c_k1 c_k2^*).
// All coefficients vanish (to roundoff) with the shipped zero-mode fixing.
ScalarField first_integral_order(const FormalSeries& series, int k);

// B(psi) = 1 + sum_k eps^k beta_k(psi) with the conjugate entries assembled
// from (a, c).
Mat2 evaluate_beta(const FormalSeries& series, double eps,
                   const std::vector<double>& psi);

// sum_k eps^k Re(mu_k).
double evaluate_mu(const FormalSeries& series, double eps);

// Largest coefficient magnitude appearing at order k (used to scale
// tolerance checks).
double order_scale(const FormalSeries& series, int k);

} // namespace qpr
