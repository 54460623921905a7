#pragma once

#include <map>
#include <vector>

#include "qpr/smalldiv.hpp"
#include "qpr/trees.hpp"

namespace qpr {

// Multiscale resummation. Lines with nonzero momentum carry a scale label
// selecting a cutoff window around their divisor size; subdiagrams with one
// entering and one exiting line of equal labels and no zero-momentum line
// between them (self-energy clusters) are summed into correction tables
// M[n]_j that shift the propagator denominators.

// ---------------------------------------------------------------------------
// scale labels on trees

// Scale options for a divisor-proxy argument: every n <= n_max whose window
// function Psi_n is nonzero there (one value, or two where windows overlap).
std::vector<int> scale_options(const ScaleSystem& scales, double lambda0, double x);

// Labels every line of the tree: zero-momentum lines get -1, the others get
// each admissible window, one output copy per combination. The copy weight
// is the product of window values (informational; renormalised propagators
// already carry their window factor).
std::vector<TreeDiagram> assign_scales(const TreeDiagram& t, const ScaleSystem& scales,
                                       double lambda0);

// ---------------------------------------------------------------------------
// cluster detection on scaled diagrams

struct DetectedCluster {
    int line_out = -1;
    int line_in = -1;
    std::vector<int> member_nodes;
    std::vector<int> member_lines;
    int n_T = -1;
    int k_T = 0;
    bool second_kind = false; // nontrivial path between the external lines
    bool renormalized = true; // contains no other self-energy cluster
};

// All self-energy clusters of a scaled diagram. A tree is renormalised iff
// this list is empty.
std::vector<DetectedCluster> detect_self_energy(const TreeDiagram& t);

// Fast check; skip_out/skip_in exclude one designated pair of external
// lines (a standalone cluster is not its own sub-cluster).
bool has_self_energy_cluster(const TreeDiagram& t, int skip_out = -1, int skip_in = -1);

// N_n(theta) <= 2*2^{-n} M(theta) - 1 for every scale n >= 0 present, with
// M(theta) the l1 mass of the mode labels.
struct CountingBoundReport {
    bool ok = true;
    int M = 0;
    struct Entry {
        int n;
        int N_n;
        double bound;
    };
    std::vector<Entry> entries;
};
CountingBoundReport counting_bound_check(const TreeDiagram& t);

// ---------------------------------------------------------------------------
// standalone self-energy clusters
//
// Cluster guts are stored as a pseudo-tree whose root line is the exiting
// external line and whose entering external line ends at a Port marker
// node. Line momenta carry one extra trailing component: the multiplier
// sigma of the external momentum (1 on the path, 0 elsewhere), so label
// comparisons and the conservation law extend verbatim.

struct ClusterTopology {
    int j_ext = 1;
    int order = 0; // k_T
    bool second_kind = false;
    TreeDiagram guts;
    int ext_in_line = -1; // line id of the entering external line
    std::string canon;
};

// sigma and bare offset of a guts line (strips the padding component).
int cluster_line_sigma(const TreeLine& l);
Momentum cluster_line_offset(const TreeLine& l);

// All self-energy cluster topologies with external component j and order
// k_T <= K_SE (both kinds, including the order-1 mode-zero pair whose summed
// value cancels), canonically ordered.
std::vector<ClusterTopology> enumerate_clusters(TreeEnumerator& trees, int j, int K_SE);

// First-kind partners of a second-kind cluster under the detach/reattach
// construction; their common value at external argument 0 is -V_T(0)/2.
// Throws UsageError for first-kind input or when an end node carries a
// counterterm insertion (no partner exists).
std::pair<ClusterTopology, ClusterTopology> shift_partners(const ClusterTopology& T);

// ---------------------------------------------------------------------------
// self-energy tables and renormalised values

struct TruncationDiagnostics {
    long deep_lines = 0;        // lines with window mass below the deepest scale
    long denominator_flags = 0; // |x + 2 M| < delta0(x)/2 while the window is open
};

class SelfEnergyTable {
  public:
    SelfEnergyTable(TreeEnumerator& trees, const ScaleSystem& scales, double eps,
                    int K_SE, double divisor_floor = 1e-8);

    // accumulated correction through scale n at argument x (recursive).
    Complex M_le(int n, int j, double x);
    // bare scale-n correction (i/2 sum of cluster values on scale n-1).
    Complex M_scale(int n, int j, double x);
    // chi-chain dressed scale-n correction.
    Complex M_dressed(int n, int j, double x);

    // windowed renormalised propagator at scale n.
    Complex propagator(int n, int j, double x);
    // sum over all windows up to n_max (the full renormalised propagator).
    Complex propagator_full(int j, double x);
    // per-line value: bare for zero momentum, windowed at x = omega.nu else.
    Complex line_propagator(int n, int j, const Momentum& nu);

    // self-energy value of a cluster at external argument x:
    //   sum_full = true : every internal line summed over all windows;
    //   otherwise only scale assignments with max = n_T and no internal
    //   self-energy cluster contribute.
    Complex cluster_value(const ClusterTopology& T, double x, bool sum_full,
                          int n_T = -1);

    const ScaleSystem& scales() const { return scales_; }
    double eps() const { return eps_; }
    int K_SE() const { return K_SE_; }
    double lambda0() const { return trees_.lambda0(); }
    const TruncationDiagnostics& diagnostics() const { return diag_; }

  private:
    TreeEnumerator& trees_;
    const ScaleSystem& scales_;
    double eps_;
    int K_SE_;
    double divisor_floor_;
    std::vector<ClusterTopology> clusters_[2]; // per external component index j-1
    std::map<std::tuple<int, int, unsigned long long>, Complex> memo_;
    TruncationDiagnostics diag_;
};

// Renormalised coefficient u^[k]_{j,nu}: sum over self-energy-free scale
// assignments of all order-k trees, with windowed propagators.
Complex renorm_coefficient(int k, int j, const Momentum& nu, TreeEnumerator& trees,
                           SelfEnergyTable& table);

} // namespace qpr
