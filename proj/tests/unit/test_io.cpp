#include <cstdio>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "qpr/errors.hpp"
#include "qpr/fourier.hpp"

using namespace qpr;

namespace {
std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}
std::string tmp_path(const std::string& name) {
    return std::string("/tmp/qpr_test_") + name;
}
} // namespace

TEST_CASE("field fixtures load and validate") {
    auto golden = load_field(testing::data_dir() + "/golden_sparse.jsonl");
    CHECK(golden.form == FieldForm::Complex);
    CHECK(golden.field.coeffs.size() == 2);
    CHECK(golden.field.entry(0, 1, {1, 0}) == Complex(1.0));
    CHECK(golden.field.entry(1, 0, {-1, 0}) == Complex(1.0));

    auto mixed = load_field(testing::data_dir() + "/mixed.jsonl");
    CHECK(mixed.field.entry(0, 0, {0, 0}) == Complex(0.0, 0.3));

    auto rot = load_field(testing::data_dir() + "/real_rotation.jsonl");
    CHECK(rot.form == FieldForm::Real);
}

TEST_CASE("non-traceless record is rejected with the offending mode") {
    std::string p = tmp_path("badtrace.jsonl");
    {
        std::ofstream out(p);
        out << "{\"form\":\"complex\"}\n";
        out << "{\"nu\":[2,0],\"m\":[1,0,0,0,0,0,1,0]}\n";
    }
    CHECK_THROWS_WITH_AS(load_field(p), doctest::Contains("(2,0)"), ValidationError);
    std::remove(p.c_str());
}

TEST_CASE("algebra symmetry violations are rejected") {
    std::string p = tmp_path("badsym.jsonl");
    {
        std::ofstream out(p);
        out << "{\"form\":\"complex\"}\n";
        out << "{\"nu\":[1,0],\"m\":[0,0,1,0,0,0,0,0]}\n"; // g12 without partner g21
    }
    CHECK_THROWS_AS(load_field(p), ValidationError);
    std::remove(p.c_str());
}

TEST_CASE("empty file is the zero field") {
    std::string p = tmp_path("empty.jsonl");
    {
        std::ofstream out(p);
    }
    auto f = load_field(p);
    CHECK(f.field.empty());
    std::remove(p.c_str());
}

TEST_CASE("save/load round trip is byte-identical on canonical files") {
    auto golden = load_field(testing::data_dir() + "/golden_sparse.jsonl");
    std::string p1 = tmp_path("rt1.jsonl"), p2 = tmp_path("rt2.jsonl");
    save_field(p1, golden.field, golden.form);
    auto again = load_field(p1);
    save_field(p2, again.field, again.form);
    CHECK(slurp(p1) == slurp(p2));
    std::remove(p1.c_str());
    std::remove(p2.c_str());
}

TEST_CASE("missing file raises a config error") {
    CHECK_THROWS_AS(load_field("/nonexistent/field.jsonl"), ConfigError);
}

TEST_CASE("dimension mismatch across records is rejected") {
    std::string p = tmp_path("baddim.jsonl");
    {
        std::ofstream out(p);
        out << "{\"form\":\"complex\"}\n";
        out << "{\"nu\":[1,0],\"m\":[0,0,0,0,0,0,0,0]}\n";
        out << "{\"nu\":[1],\"m\":[0,0,0,0,0,0,0,0]}\n";
    }
    CHECK_THROWS_AS(load_field(p), ValidationError);
    std::remove(p.c_str());
}

TEST_CASE("convolution drops mass outside an explicit cutoff") {
    ScalarField f{{{2, 0}, 1.0}};
    ScalarField g{{{2, 0}, 2.0}, {{-2, 0}, 3.0}};
    double dropped = 0.0;
    ScalarField r = convolve(f, g, 2, &dropped);
    CHECK(r.count({0, 0}) == 1);
    CHECK(r.at({0, 0}) == Complex(3.0));
    CHECK(r.count({4, 0}) == 0);
    CHECK(dropped == doctest::Approx(2.0));
}
