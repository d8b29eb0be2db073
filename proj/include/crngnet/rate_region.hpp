#ifndef CRNGNET_RATE_REGION_HPP
#define CRNGNET_RATE_REGION_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "crngnet/access_structure.hpp"
#include "crngnet/hash_ensemble.hpp"
#include "crngnet/prob.hpp"

namespace crngnet {

enum class Rel { le, lt, ge, gt };

std::string rel_text(Rel r);

struct Inequality {
    std::vector<double> coeff;
    Rel rel = Rel::le;
    double bound = 0.0;
    std::string label;
};

struct LinearSystem {
    std::vector<std::string> vars;
    std::vector<Inequality> rows;

    int var_index(const std::string& name) const;  // -1 when absent
};

// conditional entropies H(Z_subset | Z_upper(group k)), keyed by (k, subset)
struct SourceEntropies {
    std::map<std::pair<int, MessageSet>, double> h;
};

// conditional entropies H(Z_subset | Y_j, Z_rest-of-demand), keyed by (j, subset)
struct ChannelEntropies {
    std::map<std::pair<int, MessageSet>, double> h;
};

SourceEntropies compute_source_entropies(const FiniteDist& letter_joint_z,
                                         const SortedFamily& fam);
ChannelEntropies compute_channel_entropies(const std::vector<FiniteDist>& decoder_joints,
                                           const AccessStructure& a);

// The rate system over variables [R_s..., r_s...]: nonnegativity, one
// sum constraint per (group, message subset), one per (decoder, demand
// subset).  `strict` switches the sum constraints to the open form.
LinearSystem build_constraints(const AccessStructure& a, const SortedFamily& fam,
                               const SourceEntropies& se, const ChannelEntropies& ce,
                               bool strict);

struct Feasibility {
    bool feasible = false;
    std::vector<double> assignment;  // value per free variable
};

// Fixes the R block and decides whether some r block satisfies the system;
// strict rows are closed with margin delta.  Any returned assignment is
// re-substituted into every row before being reported feasible.
Feasibility lp_feasible(const LinearSystem& sys, const std::vector<double>& fixed_R,
                        double delta = 1e-9);

// Projection by pairwise combination; strict flags propagate (strict with
// non-strict gives strict).  Output rows mention only the kept variables;
// redundant rows are removed by pairwise dominance.
LinearSystem fourier_motzkin_project(const LinearSystem& sys,
                                     const std::vector<std::string>& eliminate);

// true when the point satisfies every row (strictness honored, tol slack)
bool satisfies(const LinearSystem& sys, const std::vector<double>& point, double tol = 1e-9);

struct ExponentEntry {
    int index;          // group k or decoder j
    MessageSet subset;  // S' or D'
    double gamma;
    double term;  // contribution before the outer sqrt / factor 2
};

struct TailEntry {
    int index;
    double mass = 0.0;
    bool exact = true;
    double std_error = 0.0;
};

struct BoundReport {
    std::vector<ExponentEntry> encoder_exponents;
    std::vector<ExponentEntry> decoder_exponents;
    std::vector<TailEntry> encoder_tails;
    std::vector<TailEntry> decoder_tails;
    double encoder_sqrt_sum = 0.0;
    double encoder_tail_sum = 0.0;
    double decoder_term_sum = 0.0;
    double decoder_beta_sum = 0.0;
    double decoder_tail_sum = 0.0;
    double rhs_total = 0.0;
    bool all_exponents_positive = true;
};

struct BoundInputs {
    const AccessStructure* a = nullptr;
    const SortedFamily* fam = nullptr;
    const FiniteDist* letter_joint_z = nullptr;
    const std::vector<FiniteDist>* decoder_joints = nullptr;  // per decoder
    std::vector<double> r, R;                                 // per message, bits per letter
    unsigned n = 1;
    double epsilon = 0.05;
    std::vector<AlphaBeta> f_params, g_params;  // per message
    std::uint64_t mc_seed = 1;                  // tail fallback sampling
};

// Assembles the averaged error bound: per-group exponents with their
// square-root terms, per-decoder exponents, and the typical-set tail masses
// (exact by convolution when the support stays small, sampled otherwise).
BoundReport evaluate_error_bound(const BoundInputs& in);

struct LemmaCheck {
    double lhs = 0.0;
    double rhs = 0.0;
    bool holds(double tol = 1e-12) const { return lhs <= rhs + tol; }
};

// Exact expectation of the bin-mass imbalance of a product ensemble against
// its analytic bound.  Q is a weight over the product space (message 0 least
// significant); T flags the subset it is measured on.
LemmaCheck mbcp_lhs_exact(const std::vector<HashEnsembleSpec>& specs,
                          const std::vector<double>& Q, const std::vector<std::uint8_t>& T);

// Exact probability that some other member of T lands in the bin of z,
// against its analytic bound.
LemmaCheck mcrp_lhs_exact(const std::vector<HashEnsembleSpec>& specs,
                          const std::vector<std::uint8_t>& T, const std::vector<Word>& z);

struct DiffProd {
    double lhs = 0.0;
    double rhs = 0.0;
};

// |prod(theta) - 1| against the telescoping bound.
DiffProd diff_prod_check(const std::vector<double>& theta);

}  // namespace crngnet

#endif  // CRNGNET_RATE_REGION_HPP
