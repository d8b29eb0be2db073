#ifndef CRNGNET_PROB_HPP
#define CRNGNET_PROB_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "crngnet/access_structure.hpp"
#include "crngnet/errors.hpp"

namespace crngnet {

// Product of finite alphabets.  Outcomes are mixed-radix indices with factor 0
// least significant.
struct FactorSpace {
    std::vector<unsigned> sizes;

    std::uint64_t total(std::uint64_t guard = 1ULL << 22) const;
    std::uint64_t index(std::span<const unsigned> digits) const;
    void digits(std::uint64_t idx, std::span<unsigned> out) const;
    FactorSpace project(const std::vector<int>& keep) const;

    bool operator==(const FactorSpace&) const = default;
};

// Distribution over a FactorSpace.
struct FiniteDist {
    FactorSpace space;
    std::vector<double> p;

    void validate(double tol = 1e-9) const;  // nonnegative, sums to 1 within tol
    void normalize();

    // marginal over the factors listed in `keep` (ascending)
    FiniteDist marginal(const std::vector<int>& keep) const;
    FiniteDist marginal_mask(std::uint64_t keep_mask) const;
};

double entropy_bits(const FiniteDist& d);

// H(target | given) in bits; factor masks refer to d's factor indices.
// Empty `given` reduces to plain entropy; empty `target` is an input error.
double conditional_entropy_bits(const FiniteDist& d, std::uint64_t target_mask,
                                std::uint64_t given_mask);

// Row-stochastic kernel from one factor space to another.
struct ConditionalKernel {
    FactorSpace given;
    FactorSpace out;
    std::vector<double> table;  // [given_index * out_total + out_index]

    double at(std::uint64_t g, std::uint64_t o) const { return table[g * out_count_ + o]; }
    void finalize();                              // caches sizes, checks shape
    void validate_rows(double tol = 1e-9) const;  // every row sums to 1

    std::uint64_t given_count() const { return given_count_; }
    std::uint64_t out_count() const { return out_count_; }

    static ConditionalKernel uniform(FactorSpace given, FactorSpace out);

  private:
    std::uint64_t given_count_ = 0, out_count_ = 0;
};

// Per-letter source model: one kernel per group, conditioned on the group's
// upper-closure messages.  Group order follows the sorted family.
struct JointSourceSpec {
    std::vector<unsigned> letter_sizes;            // per message
    std::vector<ConditionalKernel> group_kernels;  // aligned with SortedFamily

    void check_against(const SortedFamily& fam) const;
};

// The per-letter joint over all messages: the product of the group kernels in
// linear-extension order.
FiniteDist build_joint_z(const JointSourceSpec& spec, const SortedFamily& fam);

struct MarkovEntry {
    EncoderSet group;
    bool pass;
    double max_violation;
    std::string witness;
};

struct MarkovReport {
    std::vector<MarkovEntry> entries;
    bool all_pass() const;
};

// For every group: private messages must decouple from irrelevant ones given
// the public (upper-closure) messages.  Exact factorization check within tol.
MarkovReport check_markov(const FiniteDist& joint, const AccessStructure& a,
                          const SortedFamily& fam, double tol);

// Group kernels recovered from a joint by conditioning; zero-mass rows get a
// uniform filler.
JointSourceSpec extract_group_kernels(const FiniteDist& joint, const SortedFamily& fam);

// n-fold memoryless extension, evaluated lazily.
struct IidExtension {
    const FiniteDist* base;
    unsigned n;

    double log2_prob(std::span<const std::uint32_t> letters) const;
    double prob(std::span<const std::uint32_t> letters) const;
};

struct IidKernelExtension {
    const ConditionalKernel* base;
    unsigned n;

    double log2_prob(std::span<const std::uint32_t> given,
                     std::span<const std::uint32_t> out) const;
    double prob(std::span<const std::uint32_t> given, std::span<const std::uint32_t> out) const;
};

IidExtension extend_iid(const FiniteDist& d, unsigned n);
IidKernelExtension extend_iid(const ConditionalKernel& k, unsigned n);

}  // namespace crngnet

#endif  // CRNGNET_PROB_HPP
