#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "qpr/fourier.hpp"

namespace testing {

inline std::string data_dir() {
    if (const char* env = std::getenv("QPR_DATA_DIR")) return env;
    return QPR_DATA_DIR;
}

inline std::vector<double> golden_omega() {
    return {1.0, (std::sqrt(5.0) - 1.0) / 2.0};
}

inline qpr::MatrixField load_fixture(const std::string& name) {
    return qpr::load_field(data_dir() + "/" + name).field;
}

} // namespace testing
