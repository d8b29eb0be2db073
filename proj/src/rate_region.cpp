#include "crngnet/rate_region.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "crngnet/rng.hpp"

namespace crngnet {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::uint64_t kTailSupportCap = 1ULL << 17;
constexpr std::uint64_t kTailMcSamples = 20000;
constexpr std::uint64_t kLemmaWorkGuard = 1ULL << 27;

// canonical row: coeff . v <= bound (strict flag for <)
struct CanonRow {
    std::vector<double> c;
    bool strict = false;
    double b = 0.0;
};

CanonRow canonicalize(const Inequality& in) {
    CanonRow r{in.coeff, in.rel == Rel::lt || in.rel == Rel::gt, in.bound};
    if (in.rel == Rel::ge || in.rel == Rel::gt) {
        for (auto& x : r.c) x = -x;
        r.b = -r.b;
    }
    return r;
}

bool is_constant(const CanonRow& r) {
    for (double x : r.c)
        if (std::abs(x) > 1e-12) return false;
    return true;
}

bool constant_satisfiable(const CanonRow& r) { return r.strict ? r.b > 0 : r.b >= 0; }

// drop duplicates and dominated rows; keep one unsatisfiable constant if any
void prune(std::vector<CanonRow>& rows) {
    std::map<std::vector<long long>, CanonRow> best;
    std::optional<CanonRow> falsity;
    for (auto& r : rows) {
        if (is_constant(r)) {
            if (!constant_satisfiable(r) && !falsity) falsity = r;
            continue;
        }
        double scale = 0;
        for (double x : r.c) scale = std::max(scale, std::abs(x));
        CanonRow n = r;
        for (double& x : n.c) x /= scale;
        n.b /= scale;
        std::vector<long long> sig(n.c.size());
        for (std::size_t i = 0; i < n.c.size(); ++i) sig[i] = std::llround(n.c[i] * 1e9);
        auto it = best.find(sig);
        if (it == best.end()) {
            best.emplace(std::move(sig), std::move(n));
        } else {
            const CanonRow& old = it->second;
            const bool tighter =
                n.b < old.b - 1e-15 || (std::abs(n.b - old.b) <= 1e-15 && n.strict && !old.strict);
            if (tighter) it->second = std::move(n);
        }
    }
    rows.clear();
    if (falsity) rows.push_back(*falsity);
    for (auto& [sig, r] : best) rows.push_back(std::move(r));
}

std::vector<CanonRow> eliminate_var(const std::vector<CanonRow>& rows, std::size_t v) {
    std::vector<const CanonRow*> uppers, lowers;
    std::vector<CanonRow> out;
    for (const auto& r : rows) {
        if (std::abs(r.c[v]) <= 1e-12) {
            out.push_back(r);
            out.back().c[v] = 0.0;
        } else if (r.c[v] > 0) {
            uppers.push_back(&r);
        } else {
            lowers.push_back(&r);
        }
    }
    for (const CanonRow* u : uppers)
        for (const CanonRow* l : lowers) {
            const double su = 1.0 / u->c[v], sl = 1.0 / -l->c[v];
            CanonRow n;
            n.c.resize(u->c.size());
            for (std::size_t i = 0; i < n.c.size(); ++i) n.c[i] = su * u->c[i] + sl * l->c[i];
            n.c[v] = 0.0;
            n.b = su * u->b + sl * l->b;
            n.strict = u->strict || l->strict;
            out.push_back(std::move(n));
        }
    prune(out);
    return out;
}

}  // namespace

std::string rel_text(Rel r) {
    switch (r) {
        case Rel::le: return "<=";
        case Rel::lt: return "<";
        case Rel::ge: return ">=";
        case Rel::gt: return ">";
    }
    return "?";
}

int LinearSystem::var_index(const std::string& name) const {
    for (std::size_t i = 0; i < vars.size(); ++i)
        if (vars[i] == name) return static_cast<int>(i);
    return -1;
}

SourceEntropies compute_source_entropies(const FiniteDist& letter_joint_z,
                                         const SortedFamily& fam) {
    SourceEntropies se;
    for (int k = 0; k < fam.size(); ++k) {
        const MessageSet group = fam.group_messages[k];
        const MessageSet upper = fam.upper_closure[k];
        for (MessageSet sub = group; sub != 0; sub = (sub - 1) & group)
            se.h[{k, sub}] = conditional_entropy_bits(letter_joint_z, sub, upper);
    }
    return se;
}

ChannelEntropies compute_channel_entropies(const std::vector<FiniteDist>& decoder_joints,
                                           const AccessStructure& a) {
    ChannelEntropies ce;
    for (int j = 0; j < a.decoder_count(); ++j) {
        const auto demanded = mask::bits(a.demand(j));
        const FiniteDist& dj = decoder_joints[j];
        const std::uint64_t y_factor = std::uint64_t{1} << demanded.size();
        for (MessageSet sub = a.demand(j); sub != 0; sub = (sub - 1) & a.demand(j)) {
            std::uint64_t target = 0, given = y_factor;
            for (std::size_t t = 0; t < demanded.size(); ++t) {
                const MessageSet bit = MessageSet{1} << demanded[t];
                if (sub & bit) target |= std::uint64_t{1} << t;
                else given |= std::uint64_t{1} << t;
            }
            ce.h[{j, sub}] = conditional_entropy_bits(dj, target, given);
        }
    }
    return ce;
}

LinearSystem build_constraints(const AccessStructure& a, const SortedFamily& fam,
                               const SourceEntropies& se, const ChannelEntropies& ce,
                               bool strict) {
    LinearSystem sys;
    const int S = a.message_count();
    for (int s = 0; s < S; ++s) sys.vars.push_back("R_" + a.message_labels()[s]);
    for (int s = 0; s < S; ++s) sys.vars.push_back("r_" + a.message_labels()[s]);

    for (int s = 0; s < S; ++s) {
        Inequality row;
        row.coeff.assign(2 * S, 0.0);
        row.coeff[s] = 1.0;
        row.rel = Rel::ge;
        row.bound = 0.0;
        row.label = "nonneg[" + a.message_labels()[s] + "]";
        sys.rows.push_back(std::move(row));
    }

    for (int k = 0; k < fam.size(); ++k) {
        const MessageSet group = fam.group_messages[k];
        for (MessageSet sub = group; sub != 0; sub = (sub - 1) & group) {
            auto it = se.h.find({k, sub});
            if (it == se.h.end())
                throw std::invalid_argument("missing source entropy for group " +
                                            a.encoder_set_labels(fam.groups[k]) + " subset " +
                                            a.message_set_labels(sub));
            Inequality row;
            row.coeff.assign(2 * S, 0.0);
            for (int s : mask::bits(sub)) {
                row.coeff[s] = 1.0;
                row.coeff[S + s] = 1.0;
            }
            row.rel = strict ? Rel::lt : Rel::le;
            row.bound = it->second;
            row.label = "enc[" + a.encoder_set_labels(fam.groups[k]) + "|" +
                        a.message_set_labels(sub) + "]";
            sys.rows.push_back(std::move(row));
        }
    }

    for (int j = 0; j < a.decoder_count(); ++j) {
        for (MessageSet sub = a.demand(j); sub != 0; sub = (sub - 1) & a.demand(j)) {
            auto it = ce.h.find({j, sub});
            if (it == ce.h.end())
                throw std::invalid_argument("missing channel entropy for decoder " +
                                            a.decoder_labels()[j] + " subset " +
                                            a.message_set_labels(sub));
            Inequality row;
            row.coeff.assign(2 * S, 0.0);
            for (int s : mask::bits(sub)) row.coeff[S + s] = 1.0;
            row.rel = strict ? Rel::gt : Rel::ge;
            row.bound = it->second;
            row.label =
                "dec[" + a.decoder_labels()[j] + "|" + a.message_set_labels(sub) + "]";
            sys.rows.push_back(std::move(row));
        }
    }
    return sys;
}

Feasibility lp_feasible(const LinearSystem& sys, const std::vector<double>& fixed_R,
                        double delta) {
    const std::size_t n_fixed = fixed_R.size();
    if (n_fixed > sys.vars.size())
        throw std::invalid_argument("more fixed values than variables");
    const std::size_t n_free = sys.vars.size() - n_fixed;

    // substitute the fixed block, close strict rows with the delta margin
    std::vector<CanonRow> rows;
    for (const auto& in : sys.rows) {
        CanonRow r = canonicalize(in);
        double shift = 0;
        for (std::size_t i = 0; i < n_fixed; ++i) shift += r.c[i] * fixed_R[i];
        CanonRow sub;
        sub.c.assign(r.c.begin() + static_cast<std::ptrdiff_t>(n_fixed), r.c.end());
        sub.b = r.b - shift - (r.strict ? delta : 0.0);
        sub.strict = false;
        rows.push_back(std::move(sub));
    }

    std::vector<std::vector<CanonRow>> stages;  // stages[t]: vars t..n_free-1 remain
    stages.push_back(rows);
    for (std::size_t v = 0; v < n_free; ++v) stages.push_back(eliminate_var(stages.back(), v));

    for (const auto& r : stages.back())
        if (is_constant(r) && !constant_satisfiable(r)) return Feasibility{};

    // back-substitution, last variable first
    Feasibility res;
    res.assignment.assign(n_free, 0.0);
    for (std::size_t v = n_free; v-- > 0;) {
        double lo = -kInf, hi = kInf;
        for (const auto& r : stages[v]) {
            if (std::abs(r.c[v]) <= 1e-12) continue;
            double rest = r.b;
            for (std::size_t w = v + 1; w < n_free; ++w) rest -= r.c[w] * res.assignment[w];
            const double bound = rest / r.c[v];
            if (r.c[v] > 0) hi = std::min(hi, bound);
            else lo = std::max(lo, bound);
        }
        double pick = 0.0;
        if (lo > -kInf && hi < kInf) pick = 0.5 * (lo + hi);
        else if (lo > -kInf) pick = lo;
        else if (hi < kInf) pick = hi;
        if (lo > hi + 1e-9) return Feasibility{};
        res.assignment[v] = pick;
    }

    // certify against the original rows
    std::vector<double> point(fixed_R);
    point.insert(point.end(), res.assignment.begin(), res.assignment.end());
    for (const auto& in : sys.rows) {
        const CanonRow r = canonicalize(in);
        double lhs = 0;
        for (std::size_t i = 0; i < point.size(); ++i) lhs += r.c[i] * point[i];
        const double margin = r.b - lhs;
        if (r.strict ? margin < delta / 2 : margin < -1e-9) return Feasibility{};
    }
    res.feasible = true;
    return res;
}

LinearSystem fourier_motzkin_project(const LinearSystem& sys,
                                     const std::vector<std::string>& eliminate) {
    std::vector<std::size_t> elim_idx;
    for (const auto& name : eliminate) {
        const int i = sys.var_index(name);
        if (i < 0) throw std::invalid_argument("unknown variable: " + name);
        elim_idx.push_back(static_cast<std::size_t>(i));
    }
    std::vector<CanonRow> rows;
    for (const auto& in : sys.rows) rows.push_back(canonicalize(in));
    prune(rows);
    for (std::size_t v : elim_idx) rows = eliminate_var(rows, v);

    std::vector<std::size_t> kept;
    for (std::size_t i = 0; i < sys.vars.size(); ++i)
        if (std::find(elim_idx.begin(), elim_idx.end(), i) == elim_idx.end()) kept.push_back(i);

    LinearSystem out;
    for (std::size_t i : kept) out.vars.push_back(sys.vars[i]);
    for (const auto& r : rows) {
        Inequality in;
        in.coeff.reserve(kept.size());
        for (std::size_t i : kept) in.coeff.push_back(r.c[i]);
        in.rel = r.strict ? Rel::lt : Rel::le;
        in.bound = r.b;
        out.rows.push_back(std::move(in));
    }
    return out;
}

bool satisfies(const LinearSystem& sys, const std::vector<double>& point, double tol) {
    if (point.size() != sys.vars.size()) throw std::invalid_argument("point dimension mismatch");
    for (const auto& in : sys.rows) {
        const CanonRow r = canonicalize(in);
        double lhs = 0;
        for (std::size_t i = 0; i < point.size(); ++i) lhs += r.c[i] * point[i];
        if (r.strict ? lhs > r.b - tol : lhs > r.b + tol) return false;
    }
    return true;
}

namespace {

struct TailSpec {
    const FiniteDist* letter = nullptr;
    std::vector<std::vector<double>> stats;  // [constraint][outcome]
    std::vector<double> thresholds;          // per constraint
    bool fail_low = true;                    // fail when sum < n*thr (else when sum > n*thr)
    unsigned n = 1;
};

TailEntry tail_mass(const TailSpec& spec, int index, std::uint64_t mc_seed) {
    TailEntry out;
    out.index = index;
    const std::size_t n_con = spec.stats.size();
    const std::uint64_t outcomes = spec.letter->p.size();

    // support outcomes only
    std::vector<std::uint64_t> live;
    for (std::uint64_t o = 0; o < outcomes; ++o)
        if (spec.letter->p[o] > 0) live.push_back(o);

    // exact multi-dimensional convolution over quantized statistic sums
    const double scale = 0x1p40;
    std::map<std::vector<long long>, double> state;
    state[std::vector<long long>(n_con, 0)] = 1.0;
    bool exact_ok = true;
    for (unsigned step = 0; step < spec.n && exact_ok; ++step) {
        std::map<std::vector<long long>, double> next;
        for (const auto& [key, p] : state) {
            for (std::uint64_t o : live) {
                std::vector<long long> nk(key);
                for (std::size_t c = 0; c < n_con; ++c)
                    nk[c] += std::llround(spec.stats[c][o] * scale);
                next[std::move(nk)] += p * spec.letter->p[o];
            }
            if (next.size() > kTailSupportCap) {
                exact_ok = false;
                break;
            }
        }
        state = std::move(next);
    }
    if (exact_ok) {
        double fail = 0;
        for (const auto& [key, p] : state) {
            bool bad = false;
            for (std::size_t c = 0; c < n_con && !bad; ++c) {
                const double sum = static_cast<double>(key[c]) / scale;
                const double thr = spec.n * spec.thresholds[c];
                bad = spec.fail_low ? sum < thr - 1e-9 : sum > thr + 1e-9;
            }
            if (bad) fail += p;
        }
        out.mass = fail;
        out.exact = true;
        return out;
    }

    // sampled fallback
    RngStream rng(mc_seed, {0x7461696cULL, static_cast<std::uint64_t>(index)});
    std::vector<double> cum(live.size());
    double acc = 0;
    for (std::size_t i = 0; i < live.size(); ++i) {
        acc += spec.letter->p[live[i]];
        cum[i] = acc;
    }
    std::uint64_t fails = 0;
    std::vector<double> sums(n_con);
    for (std::uint64_t t = 0; t < kTailMcSamples; ++t) {
        std::fill(sums.begin(), sums.end(), 0.0);
        for (unsigned step = 0; step < spec.n; ++step) {
            const double u = rng.uniform01() * acc;
            const std::size_t pick = static_cast<std::size_t>(
                std::lower_bound(cum.begin(), cum.end(), u) - cum.begin());
            const std::uint64_t o = live[std::min(pick, live.size() - 1)];
            for (std::size_t c = 0; c < n_con; ++c) sums[c] += spec.stats[c][o];
        }
        bool bad = false;
        for (std::size_t c = 0; c < n_con && !bad; ++c) {
            const double thr = spec.n * spec.thresholds[c];
            bad = spec.fail_low ? sums[c] < thr - 1e-9 : sums[c] > thr + 1e-9;
        }
        if (bad) ++fails;
    }
    out.mass = static_cast<double>(fails) / static_cast<double>(kTailMcSamples);
    out.exact = false;
    out.std_error = std::sqrt(std::max(0.0, out.mass * (1 - out.mass) / kTailMcSamples));
    return out;
}

double product_alpha(const std::vector<AlphaBeta>& params, MessageSet subset) {
    double a = 1.0;
    for (int s : mask::bits(subset)) a *= params[s].alpha;
    return a;
}

double product_beta_plus1(const std::vector<AlphaBeta>& params, MessageSet subset) {
    double b = 1.0;
    for (int s : mask::bits(subset)) b *= params[s].beta + 1.0;
    return b;
}

}  // namespace

BoundReport evaluate_error_bound(const BoundInputs& in) {
    if (!in.a || !in.fam || !in.letter_joint_z || !in.decoder_joints)
        throw std::invalid_argument("incomplete bound inputs");
    const AccessStructure& a = *in.a;
    const SortedFamily& fam = *in.fam;
    const int S = a.message_count();
    if (static_cast<int>(in.r.size()) != S || static_cast<int>(in.R.size()) != S ||
        static_cast<int>(in.f_params.size()) != S || static_cast<int>(in.g_params.size()) != S)
        throw std::invalid_argument("per-message bound inputs missing");

    std::vector<AlphaBeta> fg_params(S);
    for (int s = 0; s < S; ++s)
        fg_params[s] = joint_ensemble_alpha_beta(in.f_params[s], in.g_params[s]);

    BoundReport rep;

    const SourceEntropies se = compute_source_entropies(*in.letter_joint_z, fam);
    for (int k = 0; k < fam.size(); ++k) {
        const MessageSet group = fam.group_messages[k];
        double inner = product_alpha(fg_params, group) - 1.0;
        for (MessageSet sub = group; sub != 0; sub = (sub - 1) & group) {
            double rate_sum = 0;
            for (int s : mask::bits(sub)) rate_sum += in.r[s] + in.R[s];
            const double gamma = se.h.at({k, sub}) - rate_sum - in.epsilon;
            const double term = product_alpha(fg_params, group & ~sub) *
                                product_beta_plus1(fg_params, sub) *
                                std::exp2(-double(in.n) * gamma);
            inner += term;
            rep.encoder_exponents.push_back({k, sub, gamma, term});
            if (gamma <= 0) rep.all_exponents_positive = false;
        }
        rep.encoder_sqrt_sum += std::sqrt(std::max(0.0, inner));

        // typical-set tail for this group
        const MessageSet both = group | fam.upper_closure[k];
        const FiniteDist marg = in.letter_joint_z->marginal_mask(both);
        const auto kept = mask::bits(both);
        std::uint64_t local_upper = 0, local_group = 0;
        for (std::size_t t = 0; t < kept.size(); ++t) {
            if (fam.upper_closure[k] & (MessageSet{1} << kept[t]))
                local_upper |= std::uint64_t{1} << t;
            else local_group |= std::uint64_t{1} << t;
        }
        TailSpec spec;
        spec.letter = &marg;
        spec.n = in.n;
        spec.fail_low = true;
        for (MessageSet sub = group; sub != 0; sub = (sub - 1) & group) {
            std::uint64_t local_sub = 0;
            for (std::size_t t = 0; t < kept.size(); ++t)
                if (sub & (MessageSet{1} << kept[t])) local_sub |= std::uint64_t{1} << t;
            const FiniteDist m_num = marg.marginal_mask(local_sub | local_upper);
            const FiniteDist m_den = marg.marginal_mask(local_upper);
            std::vector<double> stat(marg.p.size(), 0.0);
            std::vector<unsigned> digits(marg.space.sizes.size());
            std::vector<unsigned> subdig;
            for (std::uint64_t o = 0; o < marg.p.size(); ++o) {
                if (marg.p[o] == 0) continue;
                marg.space.digits(o, digits);
                auto proj = [&](const FiniteDist& d, std::uint64_t m) {
                    subdig.clear();
                    for (int b : mask::bits(m)) subdig.push_back(digits[b]);
                    return d.space.index(subdig);
                };
                const double num = m_num.p[proj(m_num, local_sub | local_upper)];
                const double den = local_upper ? m_den.p[proj(m_den, local_upper)] : 1.0;
                stat[o] = -std::log2(num / den);
            }
            spec.stats.push_back(std::move(stat));
            spec.thresholds.push_back(se.h.at({k, sub}) - in.epsilon);
        }
        rep.encoder_tails.push_back(tail_mass(spec, k, in.mc_seed));
        rep.encoder_tail_sum += rep.encoder_tails.back().mass;
    }

    const ChannelEntropies ce = compute_channel_entropies(*in.decoder_joints, a);
    for (int j = 0; j < a.decoder_count(); ++j) {
        const MessageSet demand = a.demand(j);
        for (MessageSet sub = demand; sub != 0; sub = (sub - 1) & demand) {
            double rate_sum = 0;
            for (int s : mask::bits(sub)) rate_sum += in.r[s];
            const double gamma = rate_sum - ce.h.at({j, sub}) - in.epsilon;
            const double term = product_alpha(in.f_params, sub) *
                                product_beta_plus1(in.f_params, demand & ~sub) *
                                std::exp2(-double(in.n) * gamma);
            rep.decoder_term_sum += term;
            rep.decoder_exponents.push_back({j, sub, gamma, term});
            if (gamma <= 0) rep.all_exponents_positive = false;
        }
        rep.decoder_beta_sum += product_beta_plus1(in.f_params, demand) - 1.0;

        const FiniteDist& dj = (*in.decoder_joints)[j];
        const auto demanded = mask::bits(demand);
        const std::uint64_t y_factor = std::uint64_t{1} << demanded.size();
        TailSpec spec;
        spec.letter = &dj;
        spec.n = in.n;
        spec.fail_low = false;
        for (MessageSet sub = demand; sub != 0; sub = (sub - 1) & demand) {
            std::uint64_t target = 0, given = y_factor;
            for (std::size_t t = 0; t < demanded.size(); ++t) {
                const MessageSet bit = MessageSet{1} << demanded[t];
                if (sub & bit) target |= std::uint64_t{1} << t;
                else given |= std::uint64_t{1} << t;
            }
            const FiniteDist m_num = dj.marginal_mask(target | given);
            const FiniteDist m_den = dj.marginal_mask(given);
            std::vector<double> stat(dj.p.size(), 0.0);
            std::vector<unsigned> digits(dj.space.sizes.size());
            std::vector<unsigned> subdig;
            for (std::uint64_t o = 0; o < dj.p.size(); ++o) {
                if (dj.p[o] == 0) continue;
                dj.space.digits(o, digits);
                auto proj = [&](const FiniteDist& d, std::uint64_t m) {
                    subdig.clear();
                    for (int b : mask::bits(m)) subdig.push_back(digits[b]);
                    return d.space.index(subdig);
                };
                const double num = m_num.p[proj(m_num, target | given)];
                const double den = m_den.p[proj(m_den, given)];
                stat[o] = -std::log2(num / den);
            }
            spec.stats.push_back(std::move(stat));
            spec.thresholds.push_back(ce.h.at({j, sub}) + in.epsilon);
        }
        rep.decoder_tails.push_back(tail_mass(spec, j, in.mc_seed + 0x9e37));
        rep.decoder_tail_sum += rep.decoder_tails.back().mass;
    }

    rep.rhs_total = rep.encoder_sqrt_sum + 2 * rep.encoder_tail_sum + 2 * rep.decoder_term_sum +
                    2 * rep.decoder_beta_sum + 2 * rep.decoder_tail_sum;
    return rep;
}

namespace {

// shared scaffolding for the two hash-lemma verifiers
struct ProductEnsemble {
    std::vector<HashEnsembleSpec> specs;
    std::vector<EnsembleEnumerator> ens;
    std::vector<HashProperty> props;
    std::vector<std::uint64_t> spaces;      // q^cols per message
    std::vector<std::uint64_t> im_sizes;    // union image sizes
    std::vector<std::vector<std::uint32_t>> bin_of;  // [msg][member * space + z] -> image idx
    std::uint64_t joint_size = 1;
    std::uint64_t joint_space = 1;

    explicit ProductEnsemble(const std::vector<HashEnsembleSpec>& s) : specs(s) {
        if (specs.empty()) throw std::invalid_argument("at least one ensemble required");
        std::uint64_t work = 1;
        for (const auto& spec : specs) {
            spec.check();
            ens.emplace_back(spec, 1ULL << 22);
            props.push_back(hash_alpha_beta(spec));
            const Field f(spec.field_order);
            spaces.push_back(checked_pow(f.order(), spec.cols, 1ULL << 20));
            im_sizes.push_back(props.back().image_size);
            if (joint_size > (1ULL << 22) / ens.back().size())
                throw ResourceError("product ensemble exceeds enumeration guard");
            joint_size *= ens.back().size();
            if (joint_space > (1ULL << 20) / spaces.back())
                throw ResourceError("product space exceeds enumeration guard");
            joint_space *= spaces.back();
            work *= ens.back().size();
        }
        if (work > kLemmaWorkGuard) throw ResourceError("lemma verification exceeds work guard");

        // per message: bin index of every point under every member
        for (std::size_t s = 0; s < specs.size(); ++s) {
            const Field f(specs[s].field_order);
            const std::uint64_t im_space = checked_pow(f.order(), specs[s].rows, 1ULL << 20);
            std::vector<std::uint32_t> image_index(im_space, UINT32_MAX);
            std::uint32_t next = 0;
            std::vector<std::uint32_t> table(ens[s].size() * spaces[s]);
            for (std::uint64_t m = 0; m < ens[s].size(); ++m) {
                const LinearMap f_m = ens[s].materialize(m);
                for (std::uint64_t z = 0; z < spaces[s]; ++z) {
                    const std::uint64_t out =
                        word_to_index(f_m.apply(index_to_word(z, f.order(), specs[s].cols)),
                                      f.order());
                    if (image_index[out] == UINT32_MAX) image_index[out] = next++;
                    table[m * spaces[s] + z] = image_index[out];
                }
            }
            if (next != im_sizes[s]) throw std::logic_error("image size bookkeeping mismatch");
            bin_of.push_back(std::move(table));
        }
    }

    std::vector<std::uint64_t> split(std::uint64_t joint_z) const {
        std::vector<std::uint64_t> out(specs.size());
        for (std::size_t s = 0; s < specs.size(); ++s) {
            out[s] = joint_z % spaces[s];
            joint_z /= spaces[s];
        }
        return out;
    }
};

}  // namespace

LemmaCheck mbcp_lhs_exact(const std::vector<HashEnsembleSpec>& specs,
                          const std::vector<double>& Q, const std::vector<std::uint8_t>& T) {
    ProductEnsemble pe(specs);
    if (Q.size() != pe.joint_space || T.size() != pe.joint_space)
        throw std::invalid_argument("Q and T must cover the product space");

    std::vector<std::uint64_t> members;  // points of T
    double q_total = 0;
    for (std::uint64_t z = 0; z < pe.joint_space; ++z) {
        if (!T[z]) continue;
        if (Q[z] < 0) throw std::invalid_argument("negative weight");
        members.push_back(z);
        q_total += Q[z];
    }
    if (q_total <= 0) throw std::invalid_argument("weight of T must be positive");

    std::vector<std::vector<std::uint64_t>> member_digits;
    member_digits.reserve(members.size());
    for (std::uint64_t z : members) member_digits.push_back(pe.split(z));

    std::uint64_t slot_count = 1;
    for (std::uint64_t im : pe.im_sizes) slot_count *= im;
    const double uniform_slot = 1.0 / static_cast<double>(slot_count);

    double lhs = 0;
    std::vector<std::uint64_t> f_digits(specs.size());
    std::vector<double> slots(slot_count);
    for (std::uint64_t fj = 0; fj < pe.joint_size; ++fj) {
        std::uint64_t rest = fj;
        for (std::size_t s = 0; s < specs.size(); ++s) {
            f_digits[s] = rest % pe.ens[s].size();
            rest /= pe.ens[s].size();
        }
        std::fill(slots.begin(), slots.end(), 0.0);
        for (std::size_t t = 0; t < members.size(); ++t) {
            std::uint64_t slot = 0;
            for (std::size_t s = specs.size(); s-- > 0;)
                slot = slot * pe.im_sizes[s] +
                       pe.bin_of[s][f_digits[s] * pe.spaces[s] + member_digits[t][s]];
            slots[slot] += Q[members[t]];
        }
        double sum = 0;
        for (double m : slots) sum += std::abs(m / q_total - uniform_slot);
        lhs += sum;
    }
    lhs /= static_cast<double>(pe.joint_size);

    // analytic side
    const MessageSet full = (MessageSet{1} << specs.size()) - 1;
    double alpha_full = 1.0, beta_plus1_full = 1.0;
    for (const auto& hp : pe.props) {
        alpha_full *= hp.alpha;
        beta_plus1_full *= hp.beta + 1.0;
    }
    double inner = alpha_full - 1.0;
    for (MessageSet sub = full; sub != 0; sub = (sub - 1) & full) {
        double alpha_rest = 1.0, im_prod = 1.0;
        for (int s = 0; s < static_cast<int>(specs.size()); ++s) {
            if (sub & (MessageSet{1} << s)) im_prod *= static_cast<double>(pe.im_sizes[s]);
            else alpha_rest *= pe.props[s].alpha;
        }
        // max over the fixed coordinates of the sliced weight
        std::map<std::vector<std::uint64_t>, double> slices;
        double q_bar = 0;
        if (sub == full) {
            for (std::size_t t = 0; t < members.size(); ++t)
                q_bar = std::max(q_bar, Q[members[t]]);
        } else {
            for (std::size_t t = 0; t < members.size(); ++t) {
                std::vector<std::uint64_t> key;
                for (int s : mask::bits(sub)) key.push_back(member_digits[t][s]);
                slices[key] += Q[members[t]];
            }
            for (const auto& [key, v] : slices) q_bar = std::max(q_bar, v);
        }
        inner += alpha_rest * beta_plus1_full * im_prod * q_bar / q_total;
    }
    return LemmaCheck{lhs, std::sqrt(std::max(0.0, inner))};
}

LemmaCheck mcrp_lhs_exact(const std::vector<HashEnsembleSpec>& specs,
                          const std::vector<std::uint8_t>& T, const std::vector<Word>& z) {
    ProductEnsemble pe(specs);
    if (T.size() != pe.joint_space) throw std::invalid_argument("T must cover the product space");
    if (z.size() != specs.size()) throw std::invalid_argument("one base word per message required");

    std::vector<std::uint64_t> z_digits(specs.size());
    for (std::size_t s = 0; s < specs.size(); ++s) {
        if (z[s].size() != specs[s].cols) throw std::invalid_argument("base word length mismatch");
        z_digits[s] = word_to_index(z[s], specs[s].field_order);
    }
    std::uint64_t z_joint = 0;
    for (std::size_t s = specs.size(); s-- > 0;) z_joint = z_joint * pe.spaces[s] + z_digits[s];

    std::vector<std::vector<std::uint64_t>> member_digits;
    std::uint64_t t_count = 0;
    for (std::uint64_t zz = 0; zz < pe.joint_space; ++zz) {
        if (!T[zz]) continue;
        ++t_count;
        if (zz == z_joint) continue;
        member_digits.push_back(pe.split(zz));
    }

    std::uint64_t hits = 0;
    std::vector<std::uint64_t> f_digits(specs.size());
    for (std::uint64_t fj = 0; fj < pe.joint_size; ++fj) {
        std::uint64_t rest = fj;
        for (std::size_t s = 0; s < specs.size(); ++s) {
            f_digits[s] = rest % pe.ens[s].size();
            rest /= pe.ens[s].size();
        }
        bool collision = false;
        for (const auto& md : member_digits) {
            bool all_equal = true;
            for (std::size_t s = 0; s < specs.size() && all_equal; ++s)
                all_equal = pe.bin_of[s][f_digits[s] * pe.spaces[s] + md[s]] ==
                            pe.bin_of[s][f_digits[s] * pe.spaces[s] + z_digits[s]];
            if (all_equal) {
                collision = true;
                break;
            }
        }
        if (collision) ++hits;
    }
    const double lhs = static_cast<double>(hits) / static_cast<double>(pe.joint_size);

    const MessageSet full = (MessageSet{1} << specs.size()) - 1;
    double beta_full_plus1 = 1.0;
    for (const auto& hp : pe.props) beta_full_plus1 *= hp.beta + 1.0;
    double rhs = beta_full_plus1 - 1.0;
    for (MessageSet sub = full; sub != 0; sub = (sub - 1) & full) {
        double alpha_sub = 1.0, beta_rest_plus1 = 1.0, im_prod = 1.0;
        for (int s = 0; s < static_cast<int>(specs.size()); ++s) {
            if (sub & (MessageSet{1} << s)) {
                alpha_sub *= pe.props[s].alpha;
                im_prod *= static_cast<double>(pe.im_sizes[s]);
            } else {
                beta_rest_plus1 *= pe.props[s].beta + 1.0;
            }
        }
        double o_bar = 0;
        if (sub == full) {
            o_bar = static_cast<double>(t_count);
        } else {
            std::map<std::vector<std::uint64_t>, std::uint64_t> slices;
            for (std::uint64_t zz = 0; zz < pe.joint_space; ++zz) {
                if (!T[zz]) continue;
                const auto digits = pe.split(zz);
                std::vector<std::uint64_t> key;
                for (int s = 0; s < static_cast<int>(specs.size()); ++s)
                    if (!(sub & (MessageSet{1} << s))) key.push_back(digits[s]);
                ++slices[key];
            }
            for (const auto& [key, v] : slices) o_bar = std::max<double>(o_bar, double(v));
        }
        rhs += alpha_sub * beta_rest_plus1 * o_bar / im_prod;
    }
    return LemmaCheck{lhs, rhs};
}

DiffProd diff_prod_check(const std::vector<double>& theta) {
    for (double t : theta)
        if (t <= 0) throw std::invalid_argument("sequence entries must be positive");
    DiffProd dp;
    double prod = 1.0;
    for (double t : theta) prod *= t;
    dp.lhs = std::abs(prod - 1.0);
    for (std::size_t k = 0; k < theta.size(); ++k) {
        double suffix = 1.0;
        for (std::size_t kp = k + 1; kp < theta.size(); ++kp) suffix *= theta[kp];
        dp.rhs += std::abs(theta[k] - 1.0) * suffix;
    }
    return dp;
}

}  // namespace crngnet
