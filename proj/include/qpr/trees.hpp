#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "qpr/fourier.hpp"

namespace qpr {

// Decorated rooted trees. Every coefficient of the formal series equals a
// sum of tree values: a product of one propagator per line and one factor
// per node or endpoint. Component labels j: 1 and 2 select the two scalar
// unknowns, 3 marks counterterm lines (always zero momentum).

enum class NodeKind {
    EndpointBlack, // order-1 source insertion, nonzero mode
    EndpointWhite, // order-1 source insertion at mode zero
    Branch1,       // one entering line, factor from the source field
    Branch2Pair,   // two entering lines of equal labels, second one conjugated
    Branch2MuA,    // counterterm insertion, mu line in the first slot
    Branch2MuB,    // counterterm insertion, mu line in the second slot
    Port           // stand-in for an external attachment in cluster graphs
};

// Shared immutable subtree: the point at the lower end of a line plus
// everything below it. Children sit in fixed slots:
//   Branch2Pair: [plain, starred]; Branch2MuA: [mu, through];
//   Branch2MuB:  [through, mu]; Branch1: [through].
struct SubTree {
    NodeKind kind;
    int j_exit = 0;
    Momentum nu_exit;
    Momentum mode;
    int order = 0;
    std::vector<std::shared_ptr<const SubTree>> children;
    std::string canon; // canonical serialization, injective on distinct trees
};
using SubTreePtr = std::shared_ptr<const SubTree>;

// Flat form used for structural operations (scale labels, cluster
// detection, rendering).
struct TreeNode {
    int id = 0;
    NodeKind kind{};
    Momentum mode;
    int k_v = 0; // 1 for endpoints and single-entry nodes, 0 for double-entry
};

struct TreeLine {
    int id = 0;
    int from = 0; // node at the lower end
    int to = -1;  // node at the upper end, -1 for the root line
    int j = 0;
    Momentum nu;
    bool conj = false; // subtree below this line is evaluated conjugated
    int scale = -2;    // -2 before assignment, -1 for zero-momentum lines
};

struct TreeDiagram {
    std::vector<TreeNode> nodes;
    std::vector<TreeLine> lines;
    int root_line = 0;
    int order = 0;
    double weight = 1.0; // window weight after scale assignment
};

TreeDiagram to_diagram(const SubTreePtr& t);

// Conservation law at every node: exiting momentum = node mode + sum of
// entering momenta, with starred entering lines counted with reversed sign.
// Throws ValidationError on violation.
void validate_conservation(const TreeDiagram& t);

std::string to_dot(const TreeDiagram& t);

// Bare propagator attached to a line.
Complex propagator(int j, const Momentum& nu, const std::vector<double>& omega,
                   double lambda0, double divisor_floor = 1e-8);

// Factor attached to the point at the lower end of a line. For endpoints
// and single-entry nodes it is a source coefficient (component label 3
// selects row 1); double-entry nodes carry the constant combinatorial
// factors.
Complex node_factor(const SubTree& t, const MatrixField& g);

// Value of a tree: product of propagators over lines and factors over
// points, conjugating starred subtrees.
Complex tree_value(const SubTree& t, const MatrixField& g,
                   const std::vector<double>& omega, double lambda0,
                   double divisor_floor = 1e-8);

// Enumerates inequivalent decorated trees per root label (j, nu) and order,
// with mode labels drawn from the support of g; productions whose source
// coefficient vanishes identically are pruned. Tables are built order by
// order and memoized.
class TreeEnumerator {
  public:
    TreeEnumerator(const MatrixField& g, std::vector<double> omega, double lambda0,
                   int k_max_enum = 5, long budget = 4000000);

    // Complete list for root labels (j, nu), canonically ordered.
    const std::vector<SubTreePtr>& trees(int k, int j, const Momentum& nu);

    // All root labels with a nonempty tree list at order k.
    std::vector<std::pair<int, Momentum>> active_labels(int k);

    // Sum of tree values in canonical order; (j=3, nu=0) yields the
    // counterterm coefficient.
    Complex tree_sum(int k, int j, const Momentum& nu,
                     double divisor_floor = 1e-8);

    const MatrixField& field() const { return g_; }
    const std::vector<double>& omega() const { return omega_; }
    double lambda0() const { return lambda0_; }
    long total_enumerated() const { return total_; }

  private:
    using Key = std::pair<int, Momentum>;
    using Table = std::map<Key, std::vector<SubTreePtr>>;

    void build_order(int k);
    void add_tree(Table& tab, const Key& key, SubTreePtr t);

    MatrixField g_;
    std::vector<double> omega_;
    double lambda0_;
    int k_max_;
    long budget_;
    long total_ = 0;
    std::vector<Table> tables_; // tables_[k-1]
    int built_ = 0;
    std::vector<Momentum> support_; // modes of g, canonical order
    Momentum zero_;
    std::vector<SubTreePtr> empty_;
};

} // namespace qpr
