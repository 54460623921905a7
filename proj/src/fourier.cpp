#include "qpr/fourier.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "qpr/errors.hpp"

namespace qpr {

Mat2 Mat2::operator+(const Mat2& o) const {
    Mat2 r;
    for (int i = 0; i < 4; ++i) r.m[i] = m[i] + o.m[i];
    return r;
}

Mat2 Mat2::operator-(const Mat2& o) const {
    Mat2 r;
    for (int i = 0; i < 4; ++i) r.m[i] = m[i] - o.m[i];
    return r;
}

Mat2 Mat2::operator*(const Mat2& o) const {
    Mat2 r;
    r.m[0] = m[0] * o.m[0] + m[1] * o.m[2];
    r.m[1] = m[0] * o.m[1] + m[1] * o.m[3];
    r.m[2] = m[2] * o.m[0] + m[3] * o.m[2];
    r.m[3] = m[2] * o.m[1] + m[3] * o.m[3];
    return r;
}

Mat2 Mat2::operator*(Complex s) const {
    Mat2 r;
    for (int i = 0; i < 4; ++i) r.m[i] = m[i] * s;
    return r;
}

Mat2 Mat2::identity() {
    Mat2 r;
    r.m[0] = 1.0;
    r.m[3] = 1.0;
    return r;
}

double max_abs_entry(const Mat2& a) {
    double r = 0.0;
    for (const auto& z : a.m) r = std::max(r, std::abs(z));
    return r;
}

Complex eval_scalar(const ScalarField& f, const std::vector<double>& psi) {
    Complex s = 0.0;
    for (const auto& [nu, v] : f) {
        double ph = 0.0;
        for (std::size_t i = 0; i < nu.size(); ++i) ph += nu[i] * psi[i];
        s += v * std::polar(1.0, ph);
    }
    return s;
}

ScalarField conj_reflect(const ScalarField& f) {
    ScalarField r;
    for (const auto& [nu, v] : f) r[negate(nu)] = std::conj(v);
    return r;
}

ScalarField convolve(const ScalarField& f, const ScalarField& g,
                     int cutoff, double* dropped) {
    ScalarField r;
    for (const auto& [nu1, v1] : f) {
        for (const auto& [nu2, v2] : g) {
            Momentum nu = nu1 + nu2;
            Complex prod = v1 * v2;
            if (cutoff >= 0 && l1_norm(nu) > cutoff) {
                if (dropped) *dropped += std::abs(prod);
                continue;
            }
            r[nu] += prod;
        }
    }
    return r;
}

double max_abs(const ScalarField& f) {
    double r = 0.0;
    for (const auto& [nu, v] : f) r = std::max(r, std::abs(v));
    return r;
}

void prune_zeros(ScalarField& f, double eps) {
    for (auto it = f.begin(); it != f.end();) {
        if (std::abs(it->second) <= eps)
            it = f.erase(it);
        else
            ++it;
    }
}

int MatrixField::support_radius() const {
    int r = 0;
    for (const auto& [nu, v] : coeffs) r = std::max(r, l1_norm(nu));
    return r;
}

const Mat2* MatrixField::at(const Momentum& nu) const {
    auto it = coeffs.find(nu);
    return it == coeffs.end() ? nullptr : &it->second;
}

Complex MatrixField::entry(int r, int c, const Momentum& nu) const {
    const Mat2* m = at(nu);
    return m ? (*m)(r, c) : Complex(0.0);
}

ScalarField MatrixField::entry_field(int r, int c) const {
    ScalarField out;
    for (const auto& [nu, m] : coeffs) {
        Complex v = m(r, c);
        if (v != Complex(0.0)) out[nu] = v;
    }
    return out;
}

Mat2 MatrixField::eval(const std::vector<double>& psi) const {
    Mat2 s;
    for (const auto& [nu, m] : coeffs) {
        double ph = 0.0;
        for (std::size_t i = 0; i < nu.size(); ++i) ph += nu[i] * psi[i];
        s = s + m * std::polar(1.0, ph);
    }
    return s;
}

void MatrixField::insert(const Momentum& nu, const Mat2& v) {
    if (dim == 0) dim = nu.size();
    if (nu.size() != dim)
        throw ValidationError("mode " + to_string(nu) + " has dimension " +
                              std::to_string(nu.size()) + ", field has " +
                              std::to_string(dim));
    coeffs[nu] = v;
}

static void check_traceless(const MatrixField& f, double tol) {
    for (const auto& [nu, m] : f.coeffs) {
        if (std::abs(m.trace()) > tol)
            throw ValidationError("non-traceless coefficient at nu=" + to_string(nu) +
                                  ", |tr|=" + std::to_string(std::abs(m.trace())));
    }
}

void validate_real_field(const MatrixField& f, double tol) {
    check_traceless(f, tol);
    for (const auto& [nu, m] : f.coeffs) {
        Mat2 other;
        if (const Mat2* p = f.at(negate(nu))) other = *p;
        for (int i = 0; i < 4; ++i) {
            if (std::abs(m.m[i] - std::conj(other.m[i])) > tol)
                throw ValidationError("reality violated at nu=" + to_string(nu) +
                                      ": f(-nu) != conj(f(nu))");
        }
    }
}

void validate_complex_field(const MatrixField& f, double tol) {
    check_traceless(f, tol);
    for (const auto& [nu, m] : f.coeffs) {
        Mat2 other;
        if (const Mat2* p = f.at(negate(nu))) other = *p;
        if (std::abs(m(0, 0) - std::conj(other(1, 1))) > tol)
            throw ValidationError("algebra symmetry violated at nu=" + to_string(nu) +
                                  ": g11(nu) != conj(g22(-nu))");
        if (std::abs(m(0, 1) - std::conj(other(1, 0))) > tol)
            throw ValidationError("algebra symmetry violated at nu=" + to_string(nu) +
                                  ": g12(nu) != conj(g21(-nu))");
    }
}

static std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

LoadedField load_field(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open field file: " + path);

    LoadedField out;
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const std::exception& e) {
            throw ValidationError("bad JSON record in " + path + ": " + e.what());
        }
        if (!have_header) {
            if (!j.contains("form"))
                throw ValidationError("first record of " + path +
                                      " must be a header {\"form\":...}");
            std::string form = j["form"].get<std::string>();
            if (form == "real")
                out.form = FieldForm::Real;
            else if (form == "complex")
                out.form = FieldForm::Complex;
            else
                throw ValidationError("unknown field form '" + form + "' in " + path);
            have_header = true;
            continue;
        }
        if (!j.contains("nu") || !j.contains("m"))
            throw ValidationError("field record missing nu/m in " + path);
        Momentum nu = j["nu"].get<std::vector<int>>();
        auto vals = j["m"].get<std::vector<double>>();
        if (vals.size() != 8)
            throw ValidationError("field record at nu=" + to_string(nu) +
                                  " needs 8 floats, got " + std::to_string(vals.size()));
        Mat2 m;
        for (int i = 0; i < 4; ++i) m.m[i] = Complex(vals[2 * i], vals[2 * i + 1]);
        out.field.insert(nu, m);
    }
    // An empty file is an empty (identically zero) field.
    if (out.form == FieldForm::Real)
        validate_real_field(out.field);
    else
        validate_complex_field(out.field);
    return out;
}

void save_field(const std::string& path, const MatrixField& f, FieldForm form) {
    std::ofstream outf(path);
    if (!outf) throw ConfigError("cannot write field file: " + path);
    outf << "{\"form\":\"" << (form == FieldForm::Real ? "real" : "complex") << "\"}\n";
    for (const auto& [nu, m] : f.coeffs) {
        outf << "{\"nu\":[";
        for (std::size_t i = 0; i < nu.size(); ++i) {
            if (i) outf << ",";
            outf << nu[i];
        }
        outf << "],\"m\":[";
        for (int i = 0; i < 4; ++i) {
            if (i) outf << ",";
            outf << fmt_double(m.m[i].real()) << "," << fmt_double(m.m[i].imag());
        }
        outf << "]}\n";
    }
}

} // namespace qpr
