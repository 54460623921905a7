#include "qpr/trees.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "qpr/errors.hpp"

namespace qpr {

namespace {

const Complex I(0.0, 1.0);

int factor_row(int j) { return j == 3 ? 1 : j; } // component 3 reads row 1

SubTreePtr make_subtree(NodeKind kind, int j_exit, Momentum nu_exit, Momentum mode,
                        int order, std::vector<SubTreePtr> children) {
    auto t = std::make_shared<SubTree>();
    t->kind = kind;
    t->j_exit = j_exit;
    t->nu_exit = std::move(nu_exit);
    t->mode = std::move(mode);
    t->order = order;
    t->children = std::move(children);
    std::string s;
    s += 'A' + static_cast<int>(kind);
    s += 'j';
    s += '0' + j_exit;
    s += to_string(t->nu_exit);
    s += 'm';
    s += to_string(t->mode);
    s += '[';
    for (const auto& c : t->children) {
        s += c->canon;
        s += ';';
    }
    s += ']';
    t->canon = std::move(s);
    return t;
}

int point_order(NodeKind k) {
    switch (k) {
        case NodeKind::EndpointBlack:
        case NodeKind::EndpointWhite:
        case NodeKind::Branch1:
            return 1;
        default:
            return 0; // double-entry nodes and port markers
    }
}

} // namespace

TreeDiagram to_diagram(const SubTreePtr& t) {
    TreeDiagram d;
    d.order = t->order;

    // depth-first flatten; the root line gets id 0
    struct Rec {
        TreeDiagram& d;
        void operator()(const SubTree& s, int parent_node, bool conj) {
            int node_id = static_cast<int>(d.nodes.size());
            d.nodes.push_back({node_id, s.kind, s.mode, point_order(s.kind)});
            int line_id = static_cast<int>(d.lines.size());
            d.lines.push_back({line_id, node_id, parent_node, s.j_exit, s.nu_exit, conj,
                               is_zero(s.nu_exit) ? -1 : -2});
            if (s.kind == NodeKind::Branch2Pair) {
                (*this)(*s.children[0], node_id, false);
                (*this)(*s.children[1], node_id, true);
            } else {
                for (const auto& c : s.children) (*this)(*c, node_id, false);
            }
        }
    } rec{d};
    rec(*t, -1, false);
    d.root_line = 0;
    return d;
}

void validate_conservation(const TreeDiagram& t) {
    for (const auto& node : t.nodes) {
        const TreeLine* exit = nullptr;
        Momentum entering = zero_momentum(node.mode.size());
        for (const auto& line : t.lines) {
            if (line.from == node.id) exit = &line;
            if (line.to == node.id)
                entering = entering + (line.conj ? negate(line.nu) : line.nu);
        }
        if (!exit) throw ValidationError("node without exiting line");
        Momentum expect = node.mode + entering;
        if (exit->nu != expect)
            throw ValidationError("conservation violated at node " + std::to_string(node.id) +
                                  ": exit " + to_string(exit->nu) + " != mode+entering " +
                                  to_string(expect));
    }
}

std::string to_dot(const TreeDiagram& t) {
    std::string s = "digraph tree {\n  rankdir=RL;\n  root [shape=point];\n";
    for (const auto& n : t.nodes) {
        const char* shape = "circle";
        std::string label = to_string(n.mode);
        switch (n.kind) {
            case NodeKind::EndpointBlack: shape = "circle"; break;
            case NodeKind::EndpointWhite: shape = "doublecircle"; break;
            case NodeKind::Branch1: shape = "point"; label = to_string(n.mode); break;
            case NodeKind::Branch2Pair: shape = "square"; break;
            case NodeKind::Branch2MuA:
            case NodeKind::Branch2MuB: shape = "diamond"; break;
            case NodeKind::Port: shape = "none"; label = "ext"; break;
        }
        s += "  n" + std::to_string(n.id) + " [shape=" + shape + ",label=\"" + label + "\"];\n";
    }
    for (const auto& l : t.lines) {
        std::string head = l.to < 0 ? "root" : ("n" + std::to_string(l.to));
        s += "  n" + std::to_string(l.from) + " -> " + head + " [label=\"j" +
             std::to_string(l.j) + " " + to_string(l.nu) +
             (l.scale >= -1 ? " s" + std::to_string(l.scale) : "") +
             (l.conj ? " *" : "") + "\"];\n";
    }
    s += "}\n";
    return s;
}

Complex propagator(int j, const Momentum& nu, const std::vector<double>& omega,
                   double lambda0, double divisor_floor) {
    if (is_zero(nu)) {
        switch (j) {
            case 1: return 1.0;
            case 2: {
                if (std::abs(2.0 * lambda0) < divisor_floor)
                    throw SmallDivisorViolation("2 lambda0 below divisor floor");
                return -I / (2.0 * lambda0);
            }
            case 3: return I;
            default: throw UsageError("propagator: bad component label");
        }
    }
    if (j == 3) throw UsageError("propagator: component 3 carries zero momentum only");
    double div = dot(omega, nu) + (j == 2 ? 2.0 * lambda0 : 0.0);
    if (std::abs(div) < divisor_floor)
        throw SmallDivisorViolation("divisor below floor at nu=" + to_string(nu));
    return -I / div;
}

Complex node_factor(const SubTree& t, const MatrixField& g) {
    switch (t.kind) {
        case NodeKind::EndpointBlack:
        case NodeKind::EndpointWhite:
            return g.entry(factor_row(t.j_exit) - 1, 0, t.nu_exit);
        case NodeKind::Branch1:
            return g.entry(factor_row(t.j_exit) - 1, t.children[0]->j_exit - 1, t.mode);
        case NodeKind::Branch2Pair: {
            int jc = t.children[0]->j_exit;
            return 0.5 * ((jc % 2 == 0) ? 1.0 : -1.0); // (1/2)(-1)^jc
        }
        case NodeKind::Branch2MuA:
        case NodeKind::Branch2MuB: {
            int je = factor_row(t.j_exit);
            return 0.5 * I * ((je % 2 == 0) ? -1.0 : 1.0); // (1/2)(-1)^{je+1} i
        }
        case NodeKind::Port:
            return 1.0;
    }
    throw UsageError("node_factor: unknown node kind");
}

Complex tree_value(const SubTree& t, const MatrixField& g,
                   const std::vector<double>& omega, double lambda0,
                   double divisor_floor) {
    Complex val = propagator(t.j_exit, t.nu_exit, omega, lambda0, divisor_floor) *
                  node_factor(t, g);
    if (t.kind == NodeKind::Branch2Pair) {
        val *= tree_value(*t.children[0], g, omega, lambda0, divisor_floor);
        val *= std::conj(tree_value(*t.children[1], g, omega, lambda0, divisor_floor));
    } else {
        for (const auto& c : t.children)
            val *= tree_value(*c, g, omega, lambda0, divisor_floor);
    }
    return val;
}

TreeEnumerator::TreeEnumerator(const MatrixField& g, std::vector<double> omega,
                               double lambda0, int k_max_enum, long budget)
    : g_(g), omega_(std::move(omega)), lambda0_(lambda0), k_max_(k_max_enum),
      budget_(budget), zero_(zero_momentum(omega_.size())) {
    validate_complex_field(g_);
    for (const auto& [nu, m] : g_.coeffs) support_.push_back(nu);
}

void TreeEnumerator::add_tree(Table& tab, const Key& key, SubTreePtr t) {
    auto& list = tab[key];
    for (const auto& e : list)
        if (e->canon == t->canon) return; // already present
    list.push_back(std::move(t));
    if (++total_ > budget_)
        throw ResourceError("tree enumeration budget exceeded at " +
                            std::to_string(total_) + " trees");
}

const std::vector<SubTreePtr>& TreeEnumerator::trees(int k, int j, const Momentum& nu) {
    if (k < 1 || k > k_max_)
        throw UsageError("tree order " + std::to_string(k) + " outside enumerator range");
    while (built_ < k) build_order(built_ + 1);
    const Table& tab = tables_[k - 1];
    auto it = tab.find({j, nu});
    return it == tab.end() ? empty_ : it->second;
}

std::vector<std::pair<int, Momentum>> TreeEnumerator::active_labels(int k) {
    trees(k, 1, zero_); // force build
    std::vector<Key> keys;
    for (const auto& [key, list] : tables_[k - 1])
        if (!list.empty()) keys.push_back(key);
    return keys;
}

void TreeEnumerator::build_order(int k) {
    if (static_cast<int>(tables_.size()) < k) tables_.resize(k);
    Table& tab = tables_[k - 1];

    if (k == 1) {
        for (const auto& nu : support_) {
            if (is_zero(nu)) {
                // mode-zero insertions: component 2 (row 2) and the
                // counterterm root (row 1); component 1 has none
                if (g_.entry(1, 0, nu) != Complex(0.0))
                    add_tree(tab, {2, nu},
                             make_subtree(NodeKind::EndpointWhite, 2, nu, nu, 1, {}));
                if (g_.entry(0, 0, nu) != Complex(0.0))
                    add_tree(tab, {3, nu},
                             make_subtree(NodeKind::EndpointWhite, 3, nu, nu, 1, {}));
            } else {
                for (int j : {1, 2})
                    if (g_.entry(j - 1, 0, nu) != Complex(0.0))
                        add_tree(tab, {j, nu},
                                 make_subtree(NodeKind::EndpointBlack, j, nu, nu, 1, {}));
            }
        }
        built_ = std::max(built_, 1);
        return;
    }

    // single-entry nodes: factor f_{row(j), j_child, m}, child at order k-1
    for (const auto& [key, children] : tables_[k - 2]) {
        auto [j_child, nu_child] = key;
        if (j_child == 3) continue; // counterterm lines enter double nodes only
        for (const auto& m : support_) {
            Momentum nu = m + nu_child;
            for (int j_exit : {1, 2, 3}) {
                if (j_exit == 1 && is_zero(nu)) continue; // no single-entry route to a_0
                if (j_exit == 3 && !is_zero(nu)) continue;
                Complex coeff = g_.entry(factor_row(j_exit) - 1, j_child - 1, m);
                if (coeff == Complex(0.0)) continue;
                for (const auto& c : children)
                    add_tree(tab, {j_exit, nu},
                             make_subtree(NodeKind::Branch1, j_exit, nu, m, k, {c}));
            }
        }
    }

    // counterterm insertions: mu subtree of order k1 plus a through subtree
    // carrying the exit labels (component-3 exits read the row-1 slot)
    for (int k1 = 1; k1 <= k - 1; ++k1) {
        auto mu_it = tables_[k1 - 1].find({3, zero_});
        if (mu_it == tables_[k1 - 1].end() || mu_it->second.empty()) continue;
        const auto& mu_trees = mu_it->second;
        for (const auto& [key, through] : tables_[k - k1 - 1]) {
            auto [j_t, nu_t] = key;
            if (j_t == 3) continue;
            int j_exit;
            Momentum nu_exit;
            if (j_t == 1 && is_zero(nu_t)) {
                j_exit = 3;
                nu_exit = zero_;
            } else {
                j_exit = j_t;
                nu_exit = nu_t;
            }
            for (const auto& mu : mu_trees)
                for (const auto& th : through) {
                    add_tree(tab, {j_exit, nu_exit},
                             make_subtree(NodeKind::Branch2MuA, j_exit, nu_exit, zero_, k,
                                          {mu, th}));
                    add_tree(tab, {j_exit, nu_exit},
                             make_subtree(NodeKind::Branch2MuB, j_exit, nu_exit, zero_, k,
                                          {th, mu}));
                }
        }
    }

    // paired nodes feeding a_0: ordered pairs of equal-label subtrees, the
    // second one conjugated
    for (int k1 = 1; k1 <= k - 1; ++k1) {
        int k2 = k - k1;
        for (const auto& [key1, list1] : tables_[k1 - 1]) {
            auto [j1, nu1] = key1;
            if (j1 == 3) continue;
            auto it2 = tables_[k2 - 1].find(key1);
            if (it2 == tables_[k2 - 1].end()) continue;
            for (const auto& t1 : list1)
                for (const auto& t2 : it2->second)
                    add_tree(tab, {1, zero_},
                             make_subtree(NodeKind::Branch2Pair, 1, zero_, zero_, k,
                                          {t1, t2}));
        }
    }

    // canonical order inside each list
    for (auto& [key, list] : tab)
        std::sort(list.begin(), list.end(),
                  [](const SubTreePtr& a, const SubTreePtr& b) { return a->canon < b->canon; });
    built_ = std::max(built_, k);
}

Complex TreeEnumerator::tree_sum(int k, int j, const Momentum& nu, double divisor_floor) {
    Complex s = 0.0;
    for (const auto& t : trees(k, j, nu))
        s += tree_value(*t, g_, omega_, lambda0_, divisor_floor);
    return s;
}

} // namespace qpr
