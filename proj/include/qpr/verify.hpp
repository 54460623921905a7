#pragma once

#include <utility>
#include <vector>

#include "qpr/model.hpp"
#include "qpr/series.hpp"

namespace qpr {

// Numerical ground truth: classical fixed-step 4th order integration of the
// full linear flow and of the auxiliary system, plus the residuals that
// quantify how well a truncated series conjugates the two.

struct MatrixTrajectory {
    std::vector<double> times;
    std::vector<Mat2> states;
    double h = 0.0;
    const char* method = "rk4";
};

struct AuxTrajectory {
    std::vector<double> times;
    std::vector<std::pair<Complex, Complex>> states; // (a, c)
    double h = 0.0;
    const char* method = "rk4";
};

// d x/dt = (lambda A + eps f(omega t)) x with the rotation generator
// A = [[0,1],[-1,0]] and f in real form. Step budget T/h <= 1e7.
MatrixTrajectory integrate_full(double lambda, double eps, const MatrixField& f_real,
                                const std::vector<double>& omega, const Mat2& x0,
                                double T, double h);

// Auxiliary flow for (a, c) at fixed mu.
AuxTrajectory integrate_aux(double eps, double mu, double lambda0, const MatrixField& g,
                            const std::vector<double>& omega, Complex a0, Complex c0,
                            double T, double h);

// max_t |H(a,c) - H(a(0),c(0))| along an auxiliary trajectory.
double conservation_drift(const AuxTrajectory& traj);

// max_t |det x(t) - det x(0)| along a full trajectory.
double det_drift(const MatrixTrajectory& traj);

// Max-entry norm over the grid of  dB/dt + lambda0 [B,A] - (eps g + mu A) B
// with A = diag(i,-i), B assembled from the series and dB/dt computed
// spectrally (term-by-term frequency multipliers, no differencing noise).
double conjugation_residual(const FormalSeries& series, double eps, const MatrixField& g,
                            const std::vector<double>& t_grid);

// Per-mode defect of the fixed-point form of the Fourier equations at the
// assembled series: components (1,2) for nu != 0, (counterterm equation,
// zero-mode c equation) for nu = 0.
std::pair<Complex, Complex> fixed_point_residual(const FormalSeries& series, double eps,
                                                 const MatrixField& g, const Momentum& nu);

// Largest per-mode defect of the order-k recursion identities; vanishes to
// roundoff for every retained order by construction.
double fixed_point_order_defect(const FormalSeries& series, const MatrixField& g, int k);

struct ReducibilityReport {
    double lambda = 0.0;    // lambda0 + mu(eps)
    double deviation = 0.0; // max entry of x(t) - B(omega t) y(t) B(0)^{-1}
    double sup_norm = 0.0;  // boundedness indicator sup_t max-entry of x(t)
    double drift_det = 0.0;
};

// Integrates the full system at lambda = lambda0 + mu and compares against
// the quasi-periodic conjugation prediction.
ReducibilityReport reducibility_check(const FormalSeries& series, double eps,
                                      const MatrixField& g, double T, double h);

// Least-squares slope of log(values) against log(epsilons).
double fit_log_slope(const std::vector<double>& epsilons,
                     const std::vector<double>& values);

} // namespace qpr
