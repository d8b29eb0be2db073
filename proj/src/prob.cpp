#include "crngnet/prob.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace crngnet {

namespace {

constexpr double kLog2e = 1.4426950408889634;

double xlog2x(double p) { return p > 0 ? p * std::log(p) * kLog2e : 0.0; }

std::vector<int> mask_to_factors(std::uint64_t m) { return mask::bits(m); }

}  // namespace

std::uint64_t FactorSpace::total(std::uint64_t guard) const {
    std::uint64_t t = 1;
    for (unsigned s : sizes) {
        if (s == 0) throw std::invalid_argument("factor with empty alphabet");
        if (t > guard / s)
            throw ResourceError("product alphabet exceeds enumeration guard (" +
                                std::to_string(guard) + ")");
        t *= s;
    }
    return t;
}

std::uint64_t FactorSpace::index(std::span<const unsigned> digits) const {
    if (digits.size() != sizes.size()) throw std::invalid_argument("digit count mismatch");
    std::uint64_t idx = 0;
    for (std::size_t i = sizes.size(); i-- > 0;) {
        if (digits[i] >= sizes[i]) throw std::invalid_argument("digit out of range");
        idx = idx * sizes[i] + digits[i];
    }
    return idx;
}

void FactorSpace::digits(std::uint64_t idx, std::span<unsigned> out) const {
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        out[i] = static_cast<unsigned>(idx % sizes[i]);
        idx /= sizes[i];
    }
}

FactorSpace FactorSpace::project(const std::vector<int>& keep) const {
    FactorSpace out;
    out.sizes.reserve(keep.size());
    for (int f : keep) {
        if (f < 0 || static_cast<std::size_t>(f) >= sizes.size())
            throw std::invalid_argument("projected factor out of range");
        out.sizes.push_back(sizes[f]);
    }
    return out;
}

void FiniteDist::validate(double tol) const {
    if (p.size() != space.total()) throw std::invalid_argument("distribution size mismatch");
    double sum = 0;
    for (double v : p) {
        if (v < 0) throw std::invalid_argument("negative probability");
        sum += v;
    }
    if (std::abs(sum - 1.0) > tol)
        throw std::invalid_argument("probabilities sum to " + std::to_string(sum));
}

void FiniteDist::normalize() {
    double sum = 0;
    for (double v : p) sum += v;
    if (sum <= 0) throw std::invalid_argument("cannot normalize zero mass");
    for (double& v : p) v /= sum;
}

FiniteDist FiniteDist::marginal(const std::vector<int>& keep) const {
    FiniteDist out;
    out.space = space.project(keep);
    out.p.assign(out.space.total(), 0.0);

    const std::uint64_t n = space.total();
    std::vector<unsigned> digits(space.sizes.size());
    std::vector<unsigned> kept(keep.size());
    for (std::uint64_t idx = 0; idx < n; ++idx) {
        if (p[idx] == 0) continue;
        space.digits(idx, digits);
        for (std::size_t i = 0; i < keep.size(); ++i) kept[i] = digits[keep[i]];
        out.p[out.space.index(kept)] += p[idx];
    }
    return out;
}

FiniteDist FiniteDist::marginal_mask(std::uint64_t keep_mask) const {
    return marginal(mask_to_factors(keep_mask));
}

double entropy_bits(const FiniteDist& d) {
    double h = 0;
    for (double v : d.p) h -= xlog2x(v);
    return h;
}

double conditional_entropy_bits(const FiniteDist& d, std::uint64_t target_mask,
                                std::uint64_t given_mask) {
    if (target_mask == 0) throw std::invalid_argument("conditional entropy of empty target");
    if (target_mask & given_mask)
        throw std::invalid_argument("target and conditioning factors overlap");
    const double joint = entropy_bits(d.marginal_mask(target_mask | given_mask));
    if (given_mask == 0) return joint;
    return joint - entropy_bits(d.marginal_mask(given_mask));
}

void ConditionalKernel::finalize() {
    given_count_ = given.total();
    out_count_ = out.total();
    if (table.size() != given_count_ * out_count_)
        throw std::invalid_argument("kernel table size mismatch");
}

void ConditionalKernel::validate_rows(double tol) const {
    for (std::uint64_t g = 0; g < given_count_; ++g) {
        double sum = 0;
        for (std::uint64_t o = 0; o < out_count_; ++o) {
            const double v = at(g, o);
            if (v < 0)
                throw std::invalid_argument("kernel row " + std::to_string(g) +
                                            " has a negative entry");
            sum += v;
        }
        if (std::abs(sum - 1.0) > tol)
            throw std::invalid_argument("kernel row " + std::to_string(g) + " sums to " +
                                        std::to_string(sum));
    }
}

ConditionalKernel ConditionalKernel::uniform(FactorSpace given, FactorSpace out) {
    ConditionalKernel k;
    k.given = std::move(given);
    k.out = std::move(out);
    const std::uint64_t g = k.given.total(), o = k.out.total();
    k.table.assign(g * o, 1.0 / static_cast<double>(o));
    k.finalize();
    return k;
}

void JointSourceSpec::check_against(const SortedFamily& fam) const {
    if (group_kernels.size() != static_cast<std::size_t>(fam.size()))
        throw std::invalid_argument("one kernel per group required");
    for (int k = 0; k < fam.size(); ++k) {
        const auto upper = mask::bits(fam.upper_closure[k]);
        const auto own = mask::bits(fam.group_messages[k]);
        const ConditionalKernel& kern = group_kernels[k];
        if (kern.given.sizes.size() != upper.size() || kern.out.sizes.size() != own.size())
            throw std::invalid_argument("kernel factor count mismatch for group " +
                                        std::to_string(k));
        for (std::size_t i = 0; i < upper.size(); ++i)
            if (kern.given.sizes[i] != letter_sizes[upper[i]])
                throw std::invalid_argument("kernel conditioning alphabet mismatch for group " +
                                            std::to_string(k));
        for (std::size_t i = 0; i < own.size(); ++i)
            if (kern.out.sizes[i] != letter_sizes[own[i]])
                throw std::invalid_argument("kernel output alphabet mismatch for group " +
                                            std::to_string(k));
    }
}

FiniteDist build_joint_z(const JointSourceSpec& spec, const SortedFamily& fam) {
    spec.check_against(fam);
    FiniteDist joint;
    joint.space.sizes = spec.letter_sizes;
    const std::uint64_t n = joint.space.total();
    joint.p.assign(n, 1.0);

    std::vector<unsigned> digits(spec.letter_sizes.size());
    std::vector<unsigned> sub;
    for (std::uint64_t idx = 0; idx < n; ++idx) {
        joint.space.digits(idx, digits);
        double prob = 1.0;
        for (int k = 0; k < fam.size() && prob > 0; ++k) {
            const ConditionalKernel& kern = spec.group_kernels[k];
            sub.clear();
            for (int s : mask::bits(fam.upper_closure[k])) sub.push_back(digits[s]);
            const std::uint64_t g = kern.given.index(sub);
            sub.clear();
            for (int s : mask::bits(fam.group_messages[k])) sub.push_back(digits[s]);
            prob *= kern.at(g, kern.out.index(sub));
        }
        joint.p[idx] = prob;
    }
    joint.normalize();
    return joint;
}

bool MarkovReport::all_pass() const {
    return std::all_of(entries.begin(), entries.end(),
                       [](const MarkovEntry& e) { return e.pass; });
}

MarkovReport check_markov(const FiniteDist& joint, const AccessStructure& a,
                          const SortedFamily& fam, double tol) {
    if (joint.space.sizes.size() != static_cast<std::size_t>(a.message_count()))
        throw std::invalid_argument("joint factor count differs from message count");
    MarkovReport rep;
    const MessageSet all =
        a.message_count() == 64 ? ~MessageSet{0} : (MessageSet{1} << a.message_count()) - 1;

    for (int k = 0; k < fam.size(); ++k) {
        const MessageSet priv = fam.group_messages[k];
        const MessageSet pub = fam.upper_closure[k];
        const MessageSet irrelevant = all & ~(fam.upper_closure[k] | fam.lower_closure[k]);

        MarkovEntry entry{fam.groups[k], true, 0.0, ""};
        if (irrelevant != 0) {
            // factor order inside the marginal: ascending over priv|pub|irrelevant
            const auto kept = mask::bits(priv | pub | irrelevant);
            FiniteDist tri = joint.marginal(kept);
            std::vector<int> p_f, u_f, w_f;
            for (std::size_t i = 0; i < kept.size(); ++i) {
                const MessageSet bit = MessageSet{1} << kept[i];
                if (bit & priv) p_f.push_back(static_cast<int>(i));
                else if (bit & pub) u_f.push_back(static_cast<int>(i));
                else w_f.push_back(static_cast<int>(i));
            }
            auto to_mask = [](const std::vector<int>& v) {
                std::uint64_t m = 0;
                for (int b : v) m |= std::uint64_t{1} << b;
                return m;
            };
            const FiniteDist mu_pu = tri.marginal_mask(to_mask(p_f) | to_mask(u_f));
            const FiniteDist mu_uw = tri.marginal_mask(to_mask(u_f) | to_mask(w_f));
            const FiniteDist mu_u = tri.marginal_mask(to_mask(u_f));

            // mu(p,u,w) * mu(u) must equal mu(p,u) * mu(u,w)
            const std::uint64_t n = tri.space.total();
            std::vector<unsigned> digits(tri.space.sizes.size());
            std::vector<unsigned> sub;
            auto project_index = [&](const FiniteDist& d, const std::vector<int>& factors_a,
                                     const std::vector<int>& factors_b) {
                sub.clear();
                // factors of d are the selected ones in ascending original order
                std::vector<int> sel = factors_a;
                sel.insert(sel.end(), factors_b.begin(), factors_b.end());
                std::sort(sel.begin(), sel.end());
                for (int f : sel) sub.push_back(digits[f]);
                return d.space.index(sub);
            };
            for (std::uint64_t idx = 0; idx < n; ++idx) {
                tri.space.digits(idx, digits);
                const double lhs = tri.p[idx] * mu_u.p[project_index(mu_u, u_f, {})];
                const double rhs = mu_pu.p[project_index(mu_pu, p_f, u_f)] *
                                   mu_uw.p[project_index(mu_uw, u_f, w_f)];
                const double viol = std::abs(lhs - rhs);
                if (viol > entry.max_violation) {
                    entry.max_violation = viol;
                    if (viol > tol) {
                        entry.pass = false;
                        entry.witness = "group " + a.encoder_set_labels(fam.groups[k]) +
                                        " violates factorization by " + std::to_string(viol);
                    }
                }
            }
        }
        rep.entries.push_back(std::move(entry));
    }
    return rep;
}

JointSourceSpec extract_group_kernels(const FiniteDist& joint, const SortedFamily& fam) {
    JointSourceSpec spec;
    spec.letter_sizes = joint.space.sizes;
    for (int k = 0; k < fam.size(); ++k) {
        const auto upper = mask::bits(fam.upper_closure[k]);
        const auto own = mask::bits(fam.group_messages[k]);

        ConditionalKernel kern;
        for (int s : upper) kern.given.sizes.push_back(joint.space.sizes[s]);
        for (int s : own) kern.out.sizes.push_back(joint.space.sizes[s]);

        const FiniteDist both = joint.marginal_mask(fam.upper_closure[k] | fam.group_messages[k]);
        const FiniteDist cond = joint.marginal_mask(fam.upper_closure[k]);
        const std::uint64_t g_total = kern.given.total(), o_total = kern.out.total();
        kern.table.assign(g_total * o_total, 0.0);

        // map (given,out) digit blocks onto the ascending factor order of `both`
        const auto kept = mask::bits(fam.upper_closure[k] | fam.group_messages[k]);
        std::vector<unsigned> digits(kept.size());
        std::vector<unsigned> g_digits(upper.size()), o_digits(own.size());
        for (std::uint64_t idx = 0; idx < both.p.size(); ++idx) {
            both.space.digits(idx, digits);
            std::size_t gi = 0, oi = 0;
            for (std::size_t i = 0; i < kept.size(); ++i) {
                if (fam.upper_closure[k] & (MessageSet{1} << kept[i])) g_digits[gi++] = digits[i];
                else o_digits[oi++] = digits[i];
            }
            const std::uint64_t g = kern.given.index(g_digits);
            const std::uint64_t o = kern.out.index(o_digits);
            const double denom = cond.p.empty() ? 1.0 : cond.p[g];
            if (denom > 0) kern.table[g * o_total + o] = both.p[idx] / denom;
        }
        // uniform filler on zero-mass conditioning rows
        for (std::uint64_t g = 0; g < g_total; ++g) {
            double sum = 0;
            for (std::uint64_t o = 0; o < o_total; ++o) sum += kern.table[g * o_total + o];
            if (sum <= 0) {
                for (std::uint64_t o = 0; o < o_total; ++o)
                    kern.table[g * o_total + o] = 1.0 / static_cast<double>(o_total);
            } else {
                for (std::uint64_t o = 0; o < o_total; ++o) kern.table[g * o_total + o] /= sum;
            }
        }
        kern.finalize();
        spec.group_kernels.push_back(std::move(kern));
    }
    return spec;
}

double IidExtension::log2_prob(std::span<const std::uint32_t> letters) const {
    if (letters.size() != n) throw std::invalid_argument("block length mismatch");
    double acc = 0;
    for (std::uint32_t v : letters) {
        const double p = base->p[v];
        if (p <= 0) return -std::numeric_limits<double>::infinity();
        acc += std::log2(p);
    }
    return acc;
}

double IidExtension::prob(std::span<const std::uint32_t> letters) const {
    const double l = log2_prob(letters);
    return std::isinf(l) ? 0.0 : std::exp2(l);
}

double IidKernelExtension::log2_prob(std::span<const std::uint32_t> given,
                                     std::span<const std::uint32_t> out) const {
    if (given.size() != n || out.size() != n) throw std::invalid_argument("block length mismatch");
    double acc = 0;
    for (unsigned t = 0; t < n; ++t) {
        const double p = base->at(given[t], out[t]);
        if (p <= 0) return -std::numeric_limits<double>::infinity();
        acc += std::log2(p);
    }
    return acc;
}

double IidKernelExtension::prob(std::span<const std::uint32_t> given,
                                std::span<const std::uint32_t> out) const {
    const double l = log2_prob(given, out);
    return std::isinf(l) ? 0.0 : std::exp2(l);
}

IidExtension extend_iid(const FiniteDist& d, unsigned n) {
    if (n < 1) throw std::invalid_argument("block length must be at least 1");
    return IidExtension{&d, n};
}

IidKernelExtension extend_iid(const ConditionalKernel& k, unsigned n) {
    if (n < 1) throw std::invalid_argument("block length must be at least 1");
    return IidKernelExtension{&k, n};
}

}  // namespace crngnet
