#include "qpr/renorm.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <functional>
#include <set>

#include "qpr/errors.hpp"

namespace qpr {

namespace {

const Complex I(0.0, 1.0);
constexpr int kExternalScale = 1000; // stands for "strictly above every window"

int factor_row(int j) { return j == 3 ? 1 : j; }

// ---------------------------------------------------------------------------
// flat-diagram helpers

struct DiagramIndex {
    std::vector<int> exit_line;             // by node id
    std::vector<std::vector<int>> entering; // by node id, in line-id order
    std::vector<int> up_line;               // by line id, -1 at the root
    std::vector<bool> conj_parity;          // by line id, cumulative star flags
};

DiagramIndex index_diagram(const TreeDiagram& d) {
    DiagramIndex ix;
    ix.exit_line.assign(d.nodes.size(), -1);
    ix.entering.assign(d.nodes.size(), {});
    for (const auto& l : d.lines) {
        ix.exit_line[l.from] = l.id;
        if (l.to >= 0) ix.entering[l.to].push_back(l.id);
    }
    ix.up_line.assign(d.lines.size(), -1);
    for (const auto& l : d.lines)
        if (l.to >= 0) ix.up_line[l.id] = ix.exit_line[l.to];
    ix.conj_parity.assign(d.lines.size(), false);
    std::vector<char> done(d.lines.size(), 0);
    std::function<bool(int)> parity = [&](int lid) -> bool {
        if (done[lid]) return ix.conj_parity[lid];
        int up = ix.up_line[lid];
        bool p = d.lines[lid].conj ^ (up >= 0 && parity(up));
        ix.conj_parity[lid] = p;
        done[lid] = 1;
        return p;
    };
    for (const auto& l : d.lines) parity(l.id);
    return ix;
}

// Momentum stored in a cluster diagram may carry a trailing sigma component.
Momentum strip_to_dim(const Momentum& m, std::size_t dim) {
    if (m.size() == dim) return m;
    Momentum r(m.begin(), m.begin() + dim);
    return r;
}

Complex flat_node_factor(const TreeDiagram& d, const DiagramIndex& ix, int node_id,
                         const MatrixField& g) {
    const TreeNode& n = d.nodes[node_id];
    int jex = d.lines[ix.exit_line[node_id]].j;
    switch (n.kind) {
        case NodeKind::EndpointBlack:
        case NodeKind::EndpointWhite:
            return g.entry(factor_row(jex) - 1, 0, strip_to_dim(n.mode, g.dim));
        case NodeKind::Branch1: {
            int jc = d.lines[ix.entering[node_id][0]].j;
            return g.entry(factor_row(jex) - 1, jc - 1, strip_to_dim(n.mode, g.dim));
        }
        case NodeKind::Branch2Pair: {
            int jc = d.lines[ix.entering[node_id][0]].j;
            return 0.5 * ((jc % 2 == 0) ? 1.0 : -1.0);
        }
        case NodeKind::Branch2MuA:
        case NodeKind::Branch2MuB: {
            int je = factor_row(jex);
            return 0.5 * I * ((je % 2 == 0) ? -1.0 : 1.0);
        }
        case NodeKind::Port:
            return 1.0;
    }
    throw UsageError("flat_node_factor: unknown node kind");
}

Complex bare_zero_propagator(int j, double lambda0) {
    switch (j) {
        case 1: return 1.0;
        case 2: return -I / (2.0 * lambda0);
        case 3: return I;
    }
    throw UsageError("bare_zero_propagator: bad component");
}

} // namespace

// ---------------------------------------------------------------------------
// scale assignment

std::vector<int> scale_options(const ScaleSystem& scales, double lambda0, double x) {
    std::vector<int> opts;
    for (int n = 0; n <= scales.n_max(); ++n)
        if (scales.support_product(x, n, lambda0) > 0.0) opts.push_back(n);
    return opts;
}

std::vector<TreeDiagram> assign_scales(const TreeDiagram& t, const ScaleSystem& scales,
                                       double lambda0) {
    std::vector<int> var_lines;
    std::vector<std::vector<int>> options;
    TreeDiagram base = t;
    for (auto& l : base.lines) {
        if (is_zero(l.nu)) {
            l.scale = -1;
            continue;
        }
        double x = dot(scales.omega(), l.nu);
        auto opts = scale_options(scales, lambda0, x);
        if (opts.empty())
            throw ResourceError("line at nu=" + to_string(l.nu) +
                                " falls below the deepest resolved scale");
        var_lines.push_back(l.id);
        options.push_back(std::move(opts));
    }
    std::vector<TreeDiagram> out;
    std::vector<std::size_t> pick(var_lines.size(), 0);
    while (true) {
        TreeDiagram d = base;
        double w = 1.0;
        for (std::size_t i = 0; i < var_lines.size(); ++i) {
            int n = options[i][pick[i]];
            d.lines[var_lines[i]].scale = n;
            w *= scales.support_product(dot(scales.omega(), d.lines[var_lines[i]].nu), n,
                                        lambda0);
        }
        d.weight = t.weight * w;
        out.push_back(std::move(d));
        if (out.size() > (1u << 20))
            throw ResourceError("scale assignment combinatorics exceeded the budget");
        std::size_t i = 0;
        while (i < pick.size() && ++pick[i] == options[i].size()) pick[i++] = 0;
        if (i == pick.size()) break;
        if (pick.empty()) break;
    }
    return out;
}

// ---------------------------------------------------------------------------
// cluster detection

namespace {

struct PairScan {
    const TreeDiagram& d;
    const DiagramIndex& ix;

    bool below(int li, int lo) const { // li strictly below lo
        for (int cur = ix.up_line[li]; cur >= 0; cur = ix.up_line[cur])
            if (cur == lo) return true;
        return false;
    }

    // nodes/lines of the candidate between lo and li (li excluded subtree)
    void members(int lo, int li, std::vector<int>& nodes, std::vector<int>& lines) const {
        std::function<void(int)> down = [&](int node) {
            nodes.push_back(node);
            for (int e : ix.entering[node]) {
                if (e == li) continue;
                lines.push_back(e);
                down(d.lines[e].from);
            }
        };
        down(d.lines[lo].from);
        std::sort(nodes.begin(), nodes.end());
        std::sort(lines.begin(), lines.end());
    }

    bool zero_free_path(int lo, int li) const {
        // lines strictly between li and lo must all carry nonzero momentum
        for (int cur = ix.up_line[li]; cur != lo; cur = ix.up_line[cur]) {
            if (cur < 0) throw UsageError("path scan left the tree");
            if (is_zero(d.lines[cur].nu)) return false;
        }
        return true;
    }
};

} // namespace

std::vector<DetectedCluster> detect_self_energy(const TreeDiagram& t) {
    for (const auto& l : t.lines)
        if (l.scale == -2)
            throw UsageError("detect_self_energy: scales not assigned");
    DiagramIndex ix = index_diagram(t);
    PairScan scan{t, ix};
    std::vector<DetectedCluster> found;
    for (const auto& lo : t.lines) {
        for (const auto& li : t.lines) {
            if (li.id == lo.id) continue;
            if (li.j != lo.j || li.nu != lo.nu) continue;
            if (!scan.below(li.id, lo.id)) continue;
            DetectedCluster c;
            c.line_out = lo.id;
            c.line_in = li.id;
            scan.members(lo.id, li.id, c.member_nodes, c.member_lines);
            c.n_T = -1;
            for (int l : c.member_lines) c.n_T = std::max(c.n_T, t.lines[l].scale);
            if (!(lo.scale > c.n_T && li.scale > c.n_T)) continue;
            if (!scan.zero_free_path(lo.id, li.id)) continue;
            c.k_T = 0;
            for (int n : c.member_nodes) c.k_T += t.nodes[n].k_v;
            c.second_kind = (t.lines[lo.id].from != t.lines[li.id].to);
            found.push_back(std::move(c));
        }
    }
    // a cluster is renormalised when it contains no other detected cluster
    for (auto& a : found) {
        for (const auto& b : found) {
            if (&a == &b) continue;
            if (b.member_nodes.size() >= a.member_nodes.size()) continue;
            if (std::includes(a.member_nodes.begin(), a.member_nodes.end(),
                              b.member_nodes.begin(), b.member_nodes.end())) {
                a.renormalized = false;
                break;
            }
        }
    }
    return found;
}

bool has_self_energy_cluster(const TreeDiagram& t, int skip_out, int skip_in) {
    DiagramIndex ix = index_diagram(t);
    PairScan scan{t, ix};
    for (const auto& lo : t.lines) {
        for (const auto& li : t.lines) {
            if (li.id == lo.id) continue;
            if (lo.id == skip_out && li.id == skip_in) continue;
            if (li.j != lo.j || li.nu != lo.nu) continue;
            if (!scan.below(li.id, lo.id)) continue;
            std::vector<int> nodes, lines;
            scan.members(lo.id, li.id, nodes, lines);
            int n_T = -1;
            for (int l : lines) n_T = std::max(n_T, t.lines[l].scale);
            if (!(lo.scale > n_T && li.scale > n_T)) continue;
            if (!scan.zero_free_path(lo.id, li.id)) continue;
            return true;
        }
    }
    return false;
}

CountingBoundReport counting_bound_check(const TreeDiagram& t) {
    CountingBoundReport rep;
    for (const auto& n : t.nodes)
        if (n.kind != NodeKind::Port) rep.M += l1_norm(n.mode);
    std::map<int, int> counts;
    for (const auto& l : t.lines)
        if (l.scale >= 0) counts[l.scale]++;
    for (auto [n, N] : counts) {
        double bound = 2.0 * std::ldexp(double(rep.M), -n) - 1.0;
        rep.entries.push_back({n, N, bound});
        if (N > bound) rep.ok = false;
    }
    return rep;
}

// ---------------------------------------------------------------------------
// standalone clusters

int cluster_line_sigma(const TreeLine& l) { return l.nu.back(); }

Momentum cluster_line_offset(const TreeLine& l) {
    return Momentum(l.nu.begin(), l.nu.end() - 1);
}

namespace {

Momentum pad(const Momentum& m, int sigma) {
    Momentum r = m;
    r.push_back(sigma);
    return r;
}

struct GutsBuilder {
    TreeDiagram d;
    std::size_t dim;

    int add_node(NodeKind k, const Momentum& mode_unpadded, int k_v) {
        int id = static_cast<int>(d.nodes.size());
        d.nodes.push_back({id, k, pad(mode_unpadded, 0), k_v});
        return id;
    }
    int add_line(int from, int to, int j, const Momentum& nu0, int sigma, bool conj,
                 int scale) {
        int id = static_cast<int>(d.lines.size());
        d.lines.push_back({id, from, to, j, pad(nu0, sigma), conj, scale});
        return id;
    }
    // flatten a mu-subtree below `parent`; all its lines carry sigma = 0
    void attach_subtree(const SubTree& s, int parent, bool conj) {
        int node = add_node(s.kind, s.kind == NodeKind::Branch2Pair ||
                                            s.kind == NodeKind::Branch2MuA ||
                                            s.kind == NodeKind::Branch2MuB
                                        ? zero_momentum(dim)
                                        : s.mode,
                            (s.kind == NodeKind::EndpointBlack ||
                             s.kind == NodeKind::EndpointWhite || s.kind == NodeKind::Branch1)
                                ? 1
                                : 0);
        add_line(node, parent, s.j_exit, s.nu_exit, 0, conj,
                 is_zero(s.nu_exit) ? -1 : -2);
        if (s.kind == NodeKind::Branch2Pair) {
            attach_subtree(*s.children[0], node, false);
            attach_subtree(*s.children[1], node, true);
        } else {
            for (const auto& c : s.children) attach_subtree(*c, node, false);
        }
    }
};

std::string cluster_canon(const TreeDiagram& d) {
    std::string s;
    for (const auto& n : d.nodes) {
        s += 'A' + static_cast<int>(n.kind);
        s += to_string(n.mode);
    }
    s += '/';
    for (const auto& l : d.lines) {
        s += std::to_string(l.from) + ">" + std::to_string(l.to) + "j" +
             std::to_string(l.j) + to_string(l.nu) + (l.conj ? "*" : "") + ";";
    }
    return s;
}

void finish_cluster(ClusterTopology& T) { T.canon = cluster_canon(T.guts); }

// one path node of a second-kind cluster under construction
struct PathStep {
    bool is_mu = false;
    Momentum mode;     // single-entry node mode
    int j_below = 0;   // component of the line entering from below
    NodeKind mu_kind{}; // Branch2MuA or Branch2MuB
    SubTreePtr mu;
};

} // namespace

std::vector<ClusterTopology> enumerate_clusters(TreeEnumerator& trees, int j, int K_SE) {
    const MatrixField& g = trees.field();
    const std::size_t dim = trees.omega().size();
    const Momentum zero = zero_momentum(dim);
    std::vector<ClusterTopology> out;
    std::set<std::string> seen;

    auto push = [&](ClusterTopology&& T) {
        finish_cluster(T);
        if (seen.insert(T.canon).second) out.push_back(std::move(T));
    };

    // single node between the external lines (order 1, mode zero)
    if (g.entry(j - 1, j - 1, zero) != Complex(0.0)) {
        ClusterTopology T;
        T.j_ext = j;
        T.order = 1;
        T.second_kind = false;
        GutsBuilder b{{}, dim};
        int v = b.add_node(NodeKind::Branch1, zero, 1);
        b.add_line(v, -1, j, zero, 1, false, kExternalScale);
        int port = static_cast<int>(b.d.nodes.size());
        b.d.nodes.push_back({port, NodeKind::Port, pad(zero, 1), 0});
        T.ext_in_line = b.add_line(port, v, j, zero, 1, false, kExternalScale);
        b.d.root_line = 0;
        b.d.order = 1;
        T.guts = std::move(b.d);
        push(std::move(T));
    }

    // first kind: counterterm insertion at a single node
    for (int k = 1; k <= K_SE; ++k) {
        for (const auto& mu : trees.trees(k, 3, zero)) {
            for (NodeKind kind : {NodeKind::Branch2MuA, NodeKind::Branch2MuB}) {
                ClusterTopology T;
                T.j_ext = j;
                T.order = k;
                T.second_kind = false;
                GutsBuilder b{{}, dim};
                int v0 = b.add_node(kind, zero, 0);
                b.add_line(v0, -1, j, zero, 1, false, kExternalScale);
                b.attach_subtree(*mu, v0, false);
                int port = static_cast<int>(b.d.nodes.size());
                b.d.nodes.push_back({port, NodeKind::Port, pad(zero, 1), 0});
                T.ext_in_line = b.add_line(port, v0, j, zero, 1, false, kExternalScale);
                b.d.root_line = 0;
                b.d.order = k;
                T.guts = std::move(b.d);
                push(std::move(T));
            }
        }
    }

    // second kind: a path of at least two nodes; single-entry nodes carry the
    // modes (summing to zero), counterterm insertions preserve the component
    std::vector<Momentum> support;
    for (const auto& [nu, m] : g.coeffs) support.push_back(nu);

    std::vector<PathStep> steps;
    std::function<void(int, int)> extend = [&](int j_above, int used) {
        // close the path at the current last node: its entering line is the
        // external one, so the component below the last step must match j
        if (steps.size() >= 2 && j_above == j) {
            Momentum total = zero;
            for (const auto& st : steps)
                if (!st.is_mu) total = total + st.mode;
            if (is_zero(total) && used >= 2) {
                ClusterTopology T;
                T.j_ext = j;
                T.order = used;
                T.second_kind = true;
                GutsBuilder b{{}, dim};
                // offsets: nu0 of the line exiting step i = sum of modes from i on
                int p = static_cast<int>(steps.size());
                std::vector<Momentum> nu0(p + 1, zero);
                for (int i = p - 1; i >= 0; --i)
                    nu0[i] = nu0[i + 1] + (steps[i].is_mu ? zero : steps[i].mode);
                // nu0[0] == 0 (total), line exiting step i carries nu0[i]
                int prev = -1;
                int line_scale = kExternalScale;
                int comp = j;
                for (int i = 0; i < p; ++i) {
                    const PathStep& st = steps[i];
                    int node;
                    if (st.is_mu) {
                        node = b.add_node(st.mu_kind, zero, 0);
                    } else {
                        node = b.add_node(NodeKind::Branch1, st.mode, 1);
                    }
                    b.add_line(node, prev, comp, nu0[i], 1, false, line_scale);
                    if (st.is_mu) b.attach_subtree(*st.mu, node, false);
                    prev = node;
                    comp = st.is_mu ? comp : st.j_below;
                    line_scale = -2;
                }
                int port = static_cast<int>(b.d.nodes.size());
                b.d.nodes.push_back({port, NodeKind::Port, pad(zero, 1), 0});
                T.ext_in_line = b.add_line(port, prev, j, zero, 1, false, kExternalScale);
                b.d.root_line = 0;
                b.d.order = used;
                T.guts = std::move(b.d);
                push(std::move(T));
            }
        }
        if (static_cast<int>(steps.size()) > K_SE) return;
        // grow by one node
        for (const auto& m : support) {
            for (int jb : {1, 2}) {
                if (used + 1 > K_SE) continue;
                if (g.entry(j_above - 1, jb - 1, m) == Complex(0.0)) continue;
                steps.push_back({false, m, jb, NodeKind::Branch1, nullptr});
                extend(jb, used + 1);
                steps.pop_back();
            }
        }
        for (int km = 1; km + used <= K_SE; ++km) {
            for (const auto& mu : trees.trees(km, 3, zero)) {
                for (NodeKind kind : {NodeKind::Branch2MuA, NodeKind::Branch2MuB}) {
                    steps.push_back({true, zero, j_above, kind, mu});
                    extend(j_above, used + km);
                    steps.pop_back();
                }
            }
        }
    };
    extend(j, 0);

    std::sort(out.begin(), out.end(),
              [](const ClusterTopology& a, const ClusterTopology& b) {
                  return a.canon < b.canon;
              });
    return out;
}

std::pair<ClusterTopology, ClusterTopology> shift_partners(const ClusterTopology& T) {
    if (!T.second_kind)
        throw UsageError("shift_partners: input must be a second-kind cluster");
    const TreeDiagram& g = T.guts;
    int v_out = g.lines[g.root_line].from;
    int v_in = g.lines[T.ext_in_line].to;
    if (g.nodes[v_out].kind != NodeKind::Branch1 || g.nodes[v_in].kind != NodeKind::Branch1)
        throw UsageError("shift_partners: end nodes carrying counterterm insertions "
                         "have no first-kind partners");

    auto build = [&](NodeKind v0_kind) {
        ClusterTopology P;
        P.j_ext = T.j_ext;
        P.order = T.order;
        P.second_kind = false;
        TreeDiagram d = g;
        // internal lines lose the external-momentum dependence
        for (auto& l : d.lines) {
            if (l.id == d.root_line || l.id == T.ext_in_line) continue;
            l.nu.back() = 0;
            if (is_zero(l.nu)) l.scale = -1;
        }
        // the stripped entering node becomes an endpoint
        d.nodes[v_in].kind = is_zero(d.nodes[v_in].mode) ? NodeKind::EndpointWhite
                                                         : NodeKind::EndpointBlack;
        // new counterterm node takes over both external lines
        int v0 = static_cast<int>(d.nodes.size());
        std::size_t dim = g.nodes[v_in].mode.size() - 1;
        d.nodes.push_back({v0, v0_kind, pad(zero_momentum(dim), 0), 0});
        d.lines[d.root_line].from = v0;
        d.lines[T.ext_in_line].to = v0;
        int l0 = static_cast<int>(d.lines.size());
        d.lines.push_back({l0, v_out, v0, 3, pad(zero_momentum(dim), 0), false, -1});
        P.ext_in_line = T.ext_in_line;
        P.guts = std::move(d);
        finish_cluster(P);
        return P;
    };
    return {build(NodeKind::Branch2MuA), build(NodeKind::Branch2MuB)};
}

// ---------------------------------------------------------------------------
// self-energy table

SelfEnergyTable::SelfEnergyTable(TreeEnumerator& trees, const ScaleSystem& scales,
                                 double eps, int K_SE, double divisor_floor)
    : trees_(trees), scales_(scales), eps_(eps), K_SE_(K_SE),
      divisor_floor_(divisor_floor) {
    for (int j : {1, 2}) clusters_[j - 1] = enumerate_clusters(trees_, j, K_SE_);
}

Complex SelfEnergyTable::M_le(int n, int j, double x) {
    if (n == 0) return j == 1 ? Complex(0.0) : Complex(lambda0());
    unsigned long long bits;
    static_assert(sizeof(bits) == sizeof(x));
    std::memcpy(&bits, &x, sizeof(bits));
    auto key = std::make_tuple(n, j, bits);
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
    Complex v = M_le(n - 1, j, x) + M_dressed(n, j, x);
    memo_[key] = v;
    return v;
}

Complex SelfEnergyTable::M_dressed(int n, int j, double x) {
    double y = delta0(x, lambda0());
    double chain = 1.0;
    for (int p = 0; p < n; ++p) {
        chain *= scales_.chi_n(p, y);
        if (chain == 0.0) return 0.0;
    }
    return chain * M_scale(n, j, x);
}

Complex SelfEnergyTable::M_scale(int n, int j, double x) {
    if (n < 1) throw UsageError("M_scale: needs n >= 1");
    Complex sum = 0.0;
    for (const auto& T : clusters_[j - 1]) sum += cluster_value(T, x, false, n - 1);
    return 0.5 * I * sum;
}

Complex SelfEnergyTable::propagator(int n, int j, double x) {
    double psi = scales_.support_product(x, n, lambda0());
    if (psi == 0.0) return 0.0;
    Complex den = x + 2.0 * M_le(n, j, x);
    if (std::abs(den) < 0.5 * delta0(x, lambda0())) ++diag_.denominator_flags;
    return -I * psi / den;
}

Complex SelfEnergyTable::propagator_full(int j, double x) {
    Complex s = 0.0;
    double mass = 0.0;
    for (int n = 0; n <= scales_.n_max(); ++n) {
        double psi = scales_.support_product(x, n, lambda0());
        if (psi == 0.0) continue;
        mass += psi;
        s += propagator(n, j, x);
    }
    if (mass < 1.0 - 1e-9) ++diag_.deep_lines;
    return s;
}

Complex SelfEnergyTable::line_propagator(int n, int j, const Momentum& nu) {
    if (is_zero(nu)) return bare_zero_propagator(j, lambda0());
    return propagator(n, j, dot(scales_.omega(), nu));
}

Complex SelfEnergyTable::cluster_value(const ClusterTopology& T, double x, bool sum_full,
                                       int n_T) {
    const TreeDiagram& d = T.guts;
    DiagramIndex ix = index_diagram(d);

    Complex constant = 1.0;
    for (const auto& node : d.nodes) {
        Complex f = flat_node_factor(d, ix, node.id, trees_.field());
        if (ix.conj_parity[ix.exit_line[node.id]]) f = std::conj(f);
        constant *= f;
    }
    struct VarLine {
        int id;
        int j;
        double arg;
        bool conj;
    };
    std::vector<VarLine> vars;
    for (const auto& l : d.lines) {
        if (l.id == d.root_line || l.id == T.ext_in_line) continue;
        Momentum nu0 = cluster_line_offset(l);
        int sigma = cluster_line_sigma(l);
        if (sigma == 0 && is_zero(nu0)) {
            Complex p = bare_zero_propagator(l.j, lambda0());
            constant *= ix.conj_parity[l.id] ? std::conj(p) : p;
            continue;
        }
        vars.push_back({l.id, l.j, dot(scales_.omega(), nu0) + sigma * x,
                        ix.conj_parity[l.id]});
    }
    constant *= std::pow(eps_, T.order);

    if (sum_full) {
        Complex prod = constant;
        for (const auto& v : vars) {
            Complex p = propagator_full(v.j, v.arg);
            prod *= v.conj ? std::conj(p) : p;
        }
        return prod;
    }

    if (n_T < 0) throw UsageError("cluster_value: target scale required");
    // per-line admissible windows up to the target scale
    std::vector<std::vector<std::pair<int, Complex>>> options(vars.size());
    bool reaches = vars.empty() ? false : true;
    int best = -1;
    for (std::size_t i = 0; i < vars.size(); ++i) {
        for (int p = 0; p <= n_T; ++p) {
            Complex val = propagator(p, vars[i].j, vars[i].arg);
            if (val != Complex(0.0))
                options[i].push_back({p, vars[i].conj ? std::conj(val) : val});
        }
        if (options[i].empty()) return 0.0;
        best = std::max(best, options[i].back().first);
    }
    if (!reaches || best != n_T) return 0.0;

    TreeDiagram work = d;
    Complex sum = 0.0;
    std::vector<std::size_t> pick(vars.size(), 0);
    while (true) {
        int maxscale = -1;
        Complex prod = constant;
        for (std::size_t i = 0; i < vars.size(); ++i) {
            const auto& [scale, val] = options[i][pick[i]];
            maxscale = std::max(maxscale, scale);
            prod *= val;
        }
        if (maxscale == n_T) {
            for (std::size_t i = 0; i < vars.size(); ++i)
                work.lines[vars[i].id].scale = options[i][pick[i]].first;
            if (!has_self_energy_cluster(work, work.root_line, T.ext_in_line)) sum += prod;
        }
        std::size_t i = 0;
        while (i < pick.size() && ++pick[i] == options[i].size()) pick[i++] = 0;
        if (i == pick.size()) break;
    }
    return sum;
}

Complex renorm_coefficient(int k, int j, const Momentum& nu, TreeEnumerator& trees,
                           SelfEnergyTable& table) {
    Complex total = 0.0;
    const auto& omega = trees.omega();
    for (const auto& t : trees.trees(k, j, nu)) {
        TreeDiagram d = to_diagram(t);
        DiagramIndex ix = index_diagram(d);
        Complex constant = 1.0;
        for (const auto& node : d.nodes) {
            Complex f = flat_node_factor(d, ix, node.id, trees.field());
            if (ix.conj_parity[ix.exit_line[node.id]]) f = std::conj(f);
            constant *= f;
        }
        struct VarLine {
            int id;
            int j;
            double x;
            bool conj;
        };
        std::vector<VarLine> vars;
        bool dead = false;
        for (const auto& l : d.lines) {
            if (is_zero(l.nu)) {
                Complex p = bare_zero_propagator(l.j, table.lambda0());
                constant *= ix.conj_parity[l.id] ? std::conj(p) : p;
                continue;
            }
            vars.push_back({l.id, l.j, dot(omega, l.nu), ix.conj_parity[l.id]});
        }
        std::vector<std::vector<std::pair<int, Complex>>> options(vars.size());
        for (std::size_t i = 0; i < vars.size() && !dead; ++i) {
            for (int p = 0; p <= table.scales().n_max(); ++p) {
                Complex val = table.propagator(p, vars[i].j, vars[i].x);
                if (val != Complex(0.0))
                    options[i].push_back({p, vars[i].conj ? std::conj(val) : val});
            }
            if (options[i].empty()) dead = true;
        }
        if (dead) continue;
        std::vector<std::size_t> pick(vars.size(), 0);
        while (true) {
            Complex prod = constant;
            for (std::size_t i = 0; i < vars.size(); ++i) {
                d.lines[vars[i].id].scale = options[i][pick[i]].first;
                prod *= options[i][pick[i]].second;
            }
            if (!has_self_energy_cluster(d)) total += prod;
            std::size_t i = 0;
            while (i < pick.size() && ++pick[i] == options[i].size()) pick[i++] = 0;
            if (i == pick.size()) break;
            if (pick.empty()) break;
        }
    }
    return total;
}

} // namespace qpr
