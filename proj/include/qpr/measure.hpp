#pragma once

#include <vector>

#include "qpr/series.hpp"
#include "qpr/smalldiv.hpp"

namespace qpr {

// Parameter-space scan: which lambda0 pass the non-resonance gate, how much
// measure the rejected set carries, and where the accepted points land under
// lambda = lambda0 + mu(lambda0).

struct ScanReport {
    std::vector<double> grid;
    std::vector<char> accepted;
    std::vector<Momentum> worst_nu;
    std::vector<double> worst_margin;
    double C1 = 0.0;
    double excluded_measure = 0.0;    // grid spacing x rejected count
    double theoretical_ceiling = 0.0; // C1 x sum of gate widths over the catalogue
    std::vector<double> lambda_image; // NaN where not computed / rejected
};

// Gate every grid point of [a0, b0] against the resonance catalogue
// |nu|_1 <= N_check. jobs > 1 splits the grid across threads; the result is
// identical for any job count.
ScanReport scan_lambda0(double a0, double b0, int grid_size, const ScaleSystem& scales,
                        int N_check, int jobs = 1);

// lambda = lambda0 + mu(lambda0) for one accepted point.
double lambda_map(double lambda0, const MatrixField& g, const std::vector<double>& omega,
                  double eps, int K, double divisor_floor = 1e-8);

// Fills lambda_image for every stride-th accepted point and returns the
// largest |d mu / d lambda0| estimated by central differences across
// neighbouring mapped points.
double fill_lambda_images(ScanReport& report, const MatrixField& g,
                          const std::vector<double>& omega, double eps, int K,
                          int stride = 1, double divisor_floor = 1e-8);

struct IntervalSetup {
    double a0 = 0.0;
    double b0 = 0.0;
    bool has_origin_gap = false;
    double gap_half_width = 0.0; // |eps|^sigma neighbourhood removed around 0
};

// Shrinks [a, b] so accepted lambda0 map back into [a, b]:
// a0 = a - eps*mu1 + A eps^2 / C1, b0 = b - eps*mu1 - A eps^2 / C1, with mu1
// the first-order counterterm coefficient. If 0 lies inside, a neighbourhood
// of width ~ |eps|^sigma is flagged for exclusion.
IntervalSetup interval_setup(double a, double b, double eps, double A_margin, double C1,
                             double mu1, double sigma = 0.5);

// A-margin estimate: max of |mu - eps*mu1| * C1 / eps^2 over a coarse
// pre-scan of accepted points.
double estimate_A_margin(double a0, double b0, int coarse_grid, const ScaleSystem& scales,
                         int N_check, const MatrixField& g, double eps, int K);

} // namespace qpr
