#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "doctest.h"
#include "helpers.hpp"
#include "qpr/errors.hpp"
#include "qpr/series.hpp"
#include "qpr/trees.hpp"

using namespace qpr;

namespace {
const Complex I(0.0, 1.0);
const Momentum kNu{-1, 0};
const Momentum kZero{0, 0};

TreeEnumerator golden_enum(double lambda0 = 1.0, int kmax = 5) {
    return TreeEnumerator(testing::load_fixture("golden_sparse.jsonl"),
                          testing::golden_omega(), lambda0, kmax);
}

// recursive copy with all mode labels negated, for the conjugation check
SubTreePtr negate_modes(const SubTreePtr& t) {
    auto r = std::make_shared<SubTree>(*t);
    r->nu_exit = negate(t->nu_exit);
    r->mode = negate(t->mode);
    r->children.clear();
    for (const auto& c : t->children) r->children.push_back(negate_modes(c));
    return r;
}
} // namespace

TEST_CASE("propagator cases") {
    auto omega = testing::golden_omega();
    CHECK(propagator(3, kZero, omega, 1.0) == I);
    CHECK(propagator(1, kZero, omega, 1.0) == Complex(1.0));
    CHECK(std::abs(propagator(2, kZero, omega, 1.0) - (-I / 2.0)) < 1e-15);
    CHECK(std::abs(propagator(2, kNu, omega, 1.0) - (-I)) < 1e-15);
    CHECK(std::abs(propagator(1, {1, 0}, omega, 1.0) - (-I)) < 1e-15);
    CHECK_THROWS_AS(propagator(3, kNu, omega, 1.0), UsageError);
    CHECK_THROWS_AS(propagator(2, kNu, omega, 0.5), SmallDivisorViolation);
}

TEST_CASE("tree counts on the sparse fixture match hand enumeration") {
    TreeEnumerator en = golden_enum();
    CHECK(en.trees(1, 2, kNu).size() == 1);
    CHECK(en.trees(1, 1, kZero).empty());
    CHECK(en.trees(1, 3, kZero).empty()); // f11(0) = 0 here

    auto labels2 = en.active_labels(2);
    CHECK(labels2.size() == 2);
    CHECK(en.trees(2, 3, kZero).size() == 1);
    CHECK(en.trees(2, 1, kZero).size() == 1);

    auto labels3 = en.active_labels(3);
    CHECK(labels3.size() == 1);
    CHECK(en.trees(3, 2, kNu).size() == 3);

    CHECK(en.trees(4, 3, kZero).size() == 5);
    CHECK(en.trees(4, 1, kZero).size() == 6);
    auto labels4 = en.active_labels(4);
    CHECK(labels4.size() == 2);
}

TEST_CASE("node factors") {
    MatrixField g = testing::load_fixture("golden_sparse.jsonl");

    SubTree pair;
    pair.kind = NodeKind::Branch2Pair;
    pair.j_exit = 1;
    pair.nu_exit = kZero;
    pair.mode = kZero;
    auto child = std::make_shared<SubTree>();
    child->kind = NodeKind::EndpointBlack;
    child->j_exit = 1; // entering component 1
    child->nu_exit = {1, 0};
    child->mode = {1, 0};
    pair.children = {child, child};
    CHECK(node_factor(pair, g) == Complex(-0.5)); // (1/2)(-1)^1

    SubTree b1;
    b1.kind = NodeKind::Branch1;
    b1.j_exit = 3;
    b1.nu_exit = kZero;
    b1.mode = {1, 0};
    auto cc = std::make_shared<SubTree>();
    cc->kind = NodeKind::EndpointBlack;
    cc->j_exit = 2;
    cc->nu_exit = kNu;
    cc->mode = kNu;
    b1.children = {cc};
    CHECK(node_factor(b1, g) == g.entry(0, 1, {1, 0})); // row 1 via the j=3 rule

    SubTree ep;
    ep.kind = NodeKind::EndpointBlack;
    ep.j_exit = 2;
    ep.nu_exit = kNu;
    ep.mode = kNu;
    CHECK(node_factor(ep, g) == g.entry(1, 0, kNu));
}

TEST_CASE("order-1 tree value reproduces the first-order coefficient") {
    TreeEnumerator en = golden_enum();
    MatrixField g = testing::load_fixture("golden_sparse.jsonl");
    const auto& list = en.trees(1, 2, kNu);
    REQUIRE(list.size() == 1);
    Complex v = tree_value(*list[0], g, en.omega(), 1.0);
    CHECK(std::abs(v - (-I)) < 1e-14);
}

TEST_CASE("a tree evaluated on a field that lacks its modes vanishes") {
    MatrixField empty;
    empty.dim = 2;
    SubTree ep;
    ep.kind = NodeKind::EndpointBlack;
    ep.j_exit = 2;
    ep.nu_exit = kNu;
    ep.mode = kNu;
    CHECK(tree_value(ep, empty, testing::golden_omega(), 1.0) == Complex(0.0));
}

TEST_CASE("tree sums match the recursive series order by order") {
    for (const char* name : {"golden_sparse.jsonl", "mixed.jsonl"}) {
        MatrixField g = testing::load_fixture(name);
        int kmax = std::string(name) == "mixed.jsonl" ? 3 : 5;
        TreeEnumerator en(g, testing::golden_omega(), 1.0, kmax);
        FormalSeries fs = solve_series(g, testing::golden_omega(), 1.0, kmax);
        for (int k = 1; k <= kmax; ++k) {
            std::set<std::pair<int, Momentum>> labels;
            for (auto& l : en.active_labels(k)) labels.insert(l);
            for (const auto& [nu, v] : fs.order(k).a)
                if (std::abs(v) > 0) labels.insert({1, nu});
            for (const auto& [nu, v] : fs.order(k).c)
                if (std::abs(v) > 0) labels.insert({2, nu});
            labels.insert({3, kZero});
            for (const auto& [j, nu] : labels) {
                Complex tree = en.tree_sum(k, j, nu);
                Complex ref;
                if (j == 3)
                    ref = fs.order(k).mu;
                else {
                    const ScalarField& u = j == 1 ? fs.order(k).a : fs.order(k).c;
                    auto it = u.find(nu);
                    ref = it == u.end() ? Complex(0.0) : it->second;
                }
                CHECK(std::abs(tree - ref) <= 1e-10 * std::max(1.0, std::abs(ref)));
            }
        }
    }
}

TEST_CASE("counterterm trees close under mode negation with conjugate values") {
    MatrixField g = testing::load_fixture("mixed.jsonl");
    TreeEnumerator en(g, testing::golden_omega(), 1.0, 3);
    for (int k = 1; k <= 3; ++k) {
        std::vector<double> vals, neg_vals;
        for (const auto& t : en.trees(k, 3, kZero)) {
            Complex v = tree_value(*t, g, en.omega(), 1.0);
            Complex w = tree_value(*negate_modes(t), g, en.omega(), 1.0);
            vals.push_back(v.real());
            vals.push_back(v.imag());
            neg_vals.push_back(std::conj(w).real());
            neg_vals.push_back(std::conj(w).imag());
        }
        std::sort(vals.begin(), vals.end());
        std::sort(neg_vals.begin(), neg_vals.end());
        REQUIRE(vals.size() == neg_vals.size());
        for (std::size_t i = 0; i < vals.size(); ++i)
            CHECK(vals[i] == doctest::Approx(neg_vals[i]).epsilon(1e-12));
    }
}

TEST_CASE("shape ceiling per fixed mode assignment") {
    MatrixField g = testing::load_fixture("mixed.jsonl");
    TreeEnumerator en(g, testing::golden_omega(), 1.0, 4);
    for (int k = 1; k <= 4; ++k) {
        std::map<std::string, long> groups;
        for (const auto& [j, nu] : en.active_labels(k)) {
            for (const auto& t : en.trees(k, j, nu)) {
                // multiset of mode labels over the points of the tree
                std::vector<std::string> modes;
                std::function<void(const SubTree&)> walk = [&](const SubTree& s) {
                    modes.push_back(to_string(s.mode));
                    for (const auto& c : s.children) walk(*c);
                };
                walk(*t);
                std::sort(modes.begin(), modes.end());
                std::string key = std::to_string(j) + to_string(nu) + "|";
                for (auto& m : modes) key += m;
                ++groups[key];
            }
        }
        double ceiling = std::pow(2.0, 4.0 * k);
        for (const auto& [key, count] : groups) CHECK(double(count) <= ceiling);
    }
}

TEST_CASE("canonical serialization is injective on the enumerated set") {
    TreeEnumerator en = golden_enum();
    for (int k = 1; k <= 5; ++k) {
        for (const auto& [j, nu] : en.active_labels(k)) {
            std::set<std::string> seen;
            for (const auto& t : en.trees(k, j, nu)) CHECK(seen.insert(t->canon).second);
        }
    }
}

TEST_CASE("conservation holds at every node of every enumerated tree") {
    MatrixField g = testing::load_fixture("mixed.jsonl");
    TreeEnumerator en(g, testing::golden_omega(), 1.0, 4);
    long total = 0;
    for (int k = 1; k <= 4; ++k)
        for (const auto& [j, nu] : en.active_labels(k))
            for (const auto& t : en.trees(k, j, nu)) {
                TreeDiagram d = to_diagram(t);
                CHECK_NOTHROW(validate_conservation(d));
                CHECK(d.order == k);
                ++total;
            }
    CHECK(total > 0);
}

TEST_CASE("dot rendering emits a digraph") {
    TreeEnumerator en = golden_enum();
    TreeDiagram d = to_diagram(en.trees(2, 3, kZero)[0]);
    std::string dot = to_dot(d);
    CHECK(dot.find("digraph") != std::string::npos);
    CHECK(dot.find("j3") != std::string::npos);
}

TEST_CASE("enumeration budget is enforced") {
    MatrixField g = testing::load_fixture("mixed.jsonl");
    TreeEnumerator en(g, testing::golden_omega(), 1.0, 5, /*budget=*/50);
    CHECK_THROWS_AS(en.trees(5, 3, kZero), ResourceError);
}
