#pragma once

#include <cstdlib>
#include <numeric>
#include <string>
#include <vector>

namespace qpr {

// Fourier lattice index nu in Z^d. The momentum norm |nu| is the l1 norm
// everywhere: truncation radii, the dyadic scale map and the alpha_n
// searches all use it.
using Momentum = std::vector<int>;

inline int l1_norm(const Momentum& nu) {
    int s = 0;
    for (int c : nu) s += std::abs(c);
    return s;
}

inline bool is_zero(const Momentum& nu) {
    for (int c : nu)
        if (c != 0) return false;
    return true;
}

inline Momentum zero_momentum(std::size_t d) { return Momentum(d, 0); }

inline Momentum operator+(const Momentum& a, const Momentum& b) {
    Momentum r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
    return r;
}

inline Momentum operator-(const Momentum& a, const Momentum& b) {
    Momentum r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
    return r;
}

inline Momentum negate(const Momentum& nu) {
    Momentum r(nu.size());
    for (std::size_t i = 0; i < nu.size(); ++i) r[i] = -nu[i];
    return r;
}

inline double dot(const std::vector<double>& omega, const Momentum& nu) {
    double s = 0.0;
    for (std::size_t i = 0; i < nu.size(); ++i) s += omega[i] * nu[i];
    return s;
}

inline std::string to_string(const Momentum& nu) {
    std::string s = "(";
    for (std::size_t i = 0; i < nu.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(nu[i]);
    }
    s += ")";
    return s;
}

} // namespace qpr
