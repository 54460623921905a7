#pragma once

#include <array>
#include <complex>
#include <map>
#include <string>

#include "qpr/momentum.hpp"

namespace qpr {

using Complex = std::complex<double>;

// Complex 2x2 matrix, row-major.
struct Mat2 {
    std::array<Complex, 4> m{}; // m11 m12 m21 m22

    Complex& operator()(int r, int c) { return m[2 * r + c]; }
    const Complex& operator()(int r, int c) const { return m[2 * r + c]; }

    Complex trace() const { return m[0] + m[3]; }
    Complex det() const { return m[0] * m[3] - m[1] * m[2]; }

    Mat2 operator+(const Mat2& o) const;
    Mat2 operator-(const Mat2& o) const;
    Mat2 operator*(const Mat2& o) const;
    Mat2 operator*(Complex s) const;
    static Mat2 identity();
};

double max_abs_entry(const Mat2& a);

// Sparse scalar Fourier series: nu -> coefficient. std::map keeps the
// canonical lexicographic order, so every sum over a field is ordered
// deterministically.
using ScalarField = std::map<Momentum, Complex>;

// f(psi) = sum_nu e^{i nu.psi} f_nu
Complex eval_scalar(const ScalarField& f, const std::vector<double>& psi);

ScalarField conj_reflect(const ScalarField& f); // nu -> conj(f_{-nu})

// Convolution (f*g)_nu = sum_{nu1+nu2=nu} f_{nu1} g_{nu2}, lexicographic
// summation order. Products with |nu|_1 > cutoff are dropped and their
// absolute mass accumulated into *dropped (cutoff < 0 keeps everything).
ScalarField convolve(const ScalarField& f, const ScalarField& g,
                     int cutoff = -1, double* dropped = nullptr);

double max_abs(const ScalarField& f);
void prune_zeros(ScalarField& f, double eps = 0.0);

// Sparse matrix-valued Fourier series with the entry layout of Mat2.
struct MatrixField {
    std::map<Momentum, Mat2> coeffs;
    std::size_t dim = 0; // lattice dimension d

    bool empty() const { return coeffs.empty(); }
    int support_radius() const; // max |nu|_1 over stored modes
    const Mat2* at(const Momentum& nu) const;
    Complex entry(int r, int c, const Momentum& nu) const;
    ScalarField entry_field(int r, int c) const;
    Mat2 eval(const std::vector<double>& psi) const;
    void insert(const Momentum& nu, const Mat2& v);
};

// Coefficients of a real-valued sl(2,R) function: traceless at every mode
// and f_{-nu} = conj(f_nu) entrywise.
void validate_real_field(const MatrixField& f, double tol = 1e-12);

// Coefficients of a complexified field in the algebra
// { g : g11 = g22^*, g12 = g21^* } (pointwise on the torus), which in
// Fourier space reads g11_nu = conj(g22_{-nu}), g12_nu = conj(g21_{-nu});
// traceless at every mode.
void validate_complex_field(const MatrixField& f, double tol = 1e-12);

// JSON-lines serialization. First record is a header {"form":"real"|"complex"},
// then one record {"nu":[...],"m":[8 floats]} per mode in canonical order.
enum class FieldForm { Real, Complex };

struct LoadedField {
    MatrixField field;
    FieldForm form = FieldForm::Complex;
};

LoadedField load_field(const std::string& path);
void save_field(const std::string& path, const MatrixField& f, FieldForm form);

} // namespace qpr
