#include "crngnet/hash_ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace crngnet {

namespace {

constexpr std::uint64_t kSpaceGuard = 1ULL << 26;   // full space sweeps
constexpr std::uint64_t kExactWorkGuard = 1ULL << 27;  // ensemble x space sweeps
constexpr std::uint64_t kMcSamples = 200000;

std::uint64_t binom(unsigned n, unsigned k) {
    if (k > n) return 0;
    k = std::min(k, n - k);
    std::uint64_t r = 1;
    for (unsigned i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

// lexicographic rank -> k-combination of {0,...,m-1}
std::vector<unsigned> unrank_combination(unsigned m, unsigned k, std::uint64_t r) {
    std::vector<unsigned> out;
    out.reserve(k);
    unsigned next = 0;
    for (unsigned chosen = 0; chosen < k; ++chosen) {
        for (unsigned v = next;; ++v) {
            const std::uint64_t c = binom(m - v - 1, k - chosen - 1);
            if (r < c) {
                out.push_back(v);
                next = v + 1;
                break;
            }
            r -= c;
        }
    }
    return out;
}

Word difference(const Field& f, const Word& z, const Word& z_prime) {
    Word d(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) d[i] = f.sub(z[i], z_prime[i]);
    return d;
}

bool is_zero(const Word& w) {
    return std::all_of(w.begin(), w.end(), [](Symbol s) { return s == 0; });
}

}  // namespace

Rational Rational::of(std::uint64_t n, std::uint64_t d) {
    if (d == 0) throw std::invalid_argument("rational with zero denominator");
    const std::uint64_t g = std::gcd(n, d);
    return Rational{n / g, d / g};
}

FunctionPair::FunctionPair(LinearMap f_, LinearMap g_) : f(std::move(f_)), g(std::move(g_)) {
    if (!(f.field() == g.field())) throw std::invalid_argument("function pair fields differ");
    if (f.cols() != g.cols()) throw std::invalid_argument("function pair column counts differ");
}

Coset Coset::of(const LinearMap& f, const Word& c) {
    checked_pow(f.field().order(), f.cols(), kSpaceGuard);
    AffineSolver solver(f);
    auto particular = solver.solve(c);
    return Coset(f.field(), std::move(particular), solver.null_basis());
}

Coset Coset::joint(const FunctionPair& pair, const Word& c, const Word& m) {
    checked_pow(pair.f.field().order(), pair.f.cols(), kSpaceGuard);
    AffineSolver solver = AffineSolver::stacked(pair.f, pair.g);
    Word rhs = c;
    rhs.insert(rhs.end(), m.begin(), m.end());
    auto particular = solver.solve(rhs);
    return Coset(pair.f.field(), std::move(particular), solver.null_basis());
}

std::uint64_t Coset::size(std::uint64_t limit) const {
    if (empty()) return 0;
    return checked_pow(field_.order(), static_cast<unsigned>(basis_.size()), limit);
}

Word Coset::member(std::uint64_t idx) const {
    if (empty()) throw std::invalid_argument("member of an empty coset");
    CosetEnumerator en(field_, *particular_, &basis_);
    return en.member(idx);
}

std::vector<Word> Coset::members(std::uint64_t limit) const {
    std::vector<Word> out;
    if (empty()) return out;
    const std::uint64_t n = size(limit ? limit : kSpaceGuard);
    out.reserve(n);
    CosetEnumerator en(field_, *particular_, &basis_);
    for (std::uint64_t i = 0; i < n; ++i) out.push_back(en.member(i));
    return out;
}

unsigned HashEnsembleSpec::default_degree(unsigned cols) {
    unsigned d = 1;
    while ((1u << d) < cols) ++d;  // ceil(log2(cols))
    return std::max(1u, cols <= 1 ? 1u : d);
}

void HashEnsembleSpec::check() const {
    Field f(field_order);
    if (rows > cols) throw std::invalid_argument("ensemble rows exceed cols");
    if (kind == Kind::sparse_matrix) {
        if (rows == 0) throw std::invalid_argument("sparse ensemble needs at least one row");
        if (degree() > rows)
            throw std::invalid_argument("column degree " + std::to_string(degree()) +
                                        " exceeds rows " + std::to_string(rows));
    }
}

LinearMap sample_map(const HashEnsembleSpec& spec, RngStream& rng) {
    spec.check();
    const Field f(spec.field_order);
    if (spec.kind == HashEnsembleSpec::Kind::uniform_matrix) {
        std::vector<Symbol> entries(static_cast<std::size_t>(spec.rows) * spec.cols);
        for (auto& e : entries) e = static_cast<Symbol>(rng.below(f.order()));
        return LinearMap::dense(f, spec.rows, spec.cols, std::move(entries));
    }
    const unsigned d = spec.degree();
    std::vector<std::vector<SparseEntry>> columns(spec.cols);
    std::vector<unsigned> rows_pool(spec.rows);
    for (unsigned c = 0; c < spec.cols; ++c) {
        std::iota(rows_pool.begin(), rows_pool.end(), 0u);
        for (unsigned k = 0; k < d; ++k) {
            const auto pick = k + rng.below(spec.rows - k);
            std::swap(rows_pool[k], rows_pool[pick]);
            const Symbol value = static_cast<Symbol>(1 + rng.below(f.order() - 1));
            columns[c].push_back({rows_pool[k], value});
        }
        std::sort(columns[c].begin(), columns[c].end(),
                  [](const SparseEntry& a, const SparseEntry& b) { return a.row < b.row; });
    }
    return LinearMap::sparse(f, spec.rows, spec.cols, std::move(columns));
}

EnsembleEnumerator::EnsembleEnumerator(const HashEnsembleSpec& spec, std::uint64_t limit)
    : spec_(spec) {
    spec.check();
    const Field f(spec.field_order);
    if (spec.kind == HashEnsembleSpec::Kind::uniform_matrix) {
        size_ = checked_pow(f.order(), spec.rows * spec.cols, limit);
        return;
    }
    const unsigned d = spec.degree();
    value_combos_ = checked_pow(f.order() - 1, d, limit);
    per_column_ = binom(spec.rows, d) * value_combos_;
    size_ = 1;
    for (unsigned c = 0; c < spec.cols; ++c) {
        if (per_column_ != 0 && size_ > limit / per_column_)
            throw ResourceError("sparse ensemble support exceeds enumeration guard");
        size_ *= per_column_;
    }
}

LinearMap EnsembleEnumerator::materialize(std::uint64_t index) const {
    const Field f(spec_.field_order);
    if (spec_.kind == HashEnsembleSpec::Kind::uniform_matrix) {
        std::vector<Symbol> entries(static_cast<std::size_t>(spec_.rows) * spec_.cols);
        for (auto& e : entries) {
            e = static_cast<Symbol>(index % f.order());
            index /= f.order();
        }
        return LinearMap::dense(f, spec_.rows, spec_.cols, std::move(entries));
    }
    const unsigned d = spec_.degree();
    std::vector<std::vector<SparseEntry>> columns(spec_.cols);
    for (unsigned c = 0; c < spec_.cols; ++c) {
        std::uint64_t col_idx = index % per_column_;
        index /= per_column_;
        const std::uint64_t subset_rank = col_idx / value_combos_;
        std::uint64_t value_rank = col_idx % value_combos_;
        const auto rows_chosen = unrank_combination(spec_.rows, d, subset_rank);
        for (unsigned r : rows_chosen) {
            const Symbol v = static_cast<Symbol>(1 + value_rank % (f.order() - 1));
            value_rank /= (f.order() - 1);
            columns[c].push_back({r, v});
        }
    }
    return LinearMap::sparse(f, spec_.rows, spec_.cols, std::move(columns));
}

ProbEstimate collision_spectrum(const HashEnsembleSpec& spec, const Word& z,
                                const Word& z_prime) {
    spec.check();
    const Field f(spec.field_order);
    if (z.size() != spec.cols || z_prime.size() != spec.cols)
        throw std::invalid_argument("collision arguments must have length cols");
    const Word d = difference(f, z, z_prime);
    if (is_zero(d)) throw std::invalid_argument("collision probability of identical points is 1");

    ProbEstimate est;
    try {
        EnsembleEnumerator en(spec, kExactWorkGuard / std::max<std::uint64_t>(1, spec.cols));
        std::uint64_t hits = 0;
        for (std::uint64_t i = 0; i < en.size(); ++i)
            if (is_zero(en.materialize(i).apply(d))) ++hits;
        est.exact = Rational::of(hits, en.size());
        est.value = est.exact->value();
        return est;
    } catch (const ResourceError&) {
        // fall through to sampling
    }
    RngStream rng(spec.seed, {0x636f6c6cULL});
    std::uint64_t hits = 0;
    for (std::uint64_t i = 0; i < kMcSamples; ++i)
        if (is_zero(sample_map(spec, rng).apply(d))) ++hits;
    est.samples = kMcSamples;
    est.value = static_cast<double>(hits) / static_cast<double>(kMcSamples);
    est.std_error = std::sqrt(std::max(0.0, est.value * (1.0 - est.value) / kMcSamples));
    return est;
}

HashProperty hash_alpha_beta(const HashEnsembleSpec& spec) {
    spec.check();
    const Field f(spec.field_order);
    const std::uint64_t space = checked_pow(f.order(), spec.cols, kSpaceGuard >> 6);
    EnsembleEnumerator en(spec, 1ULL << 22);
    if (en.size() > kExactWorkGuard / std::max<std::uint64_t>(1, space))
        throw ResourceError("hash parameter measurement exceeds work guard");

    // collision counts per nonzero difference, plus the union image
    std::vector<std::uint64_t> kernel_hits(space, 0);
    std::vector<std::uint8_t> in_image(checked_pow(f.order(), spec.rows, kSpaceGuard), 0);
    for (std::uint64_t i = 0; i < en.size(); ++i) {
        const LinearMap m = en.materialize(i);
        for (std::uint64_t x = 0; x < space; ++x) {
            const Word out = m.apply(index_to_word(x, f.order(), spec.cols));
            in_image[word_to_index(out, f.order())] = 1;
            if (x != 0 && is_zero(out)) ++kernel_hits[x];
        }
    }
    HashProperty hp;
    hp.image_size = static_cast<std::uint64_t>(
        std::count(in_image.begin(), in_image.end(), std::uint8_t{1}));

    // mass of collision probabilities strictly above alpha/|image| at alpha=1;
    // linearity makes the excess mass the same from every base point
    std::uint64_t excess_num = 0;
    for (std::uint64_t x = 1; x < space; ++x) {
        // kernel_hits[x]/size > 1/image  <=>  kernel_hits[x]*image > size
        if (kernel_hits[x] * hp.image_size > en.size()) excess_num += kernel_hits[x];
    }
    hp.alpha = 1.0;
    hp.beta_exact = Rational::of(excess_num, en.size());
    hp.beta = hp.beta_exact.value();
    return hp;
}

AlphaBeta joint_ensemble_alpha_beta(const AlphaBeta& a, const AlphaBeta& b) {
    if (a.alpha < 1.0 || b.alpha < 1.0 || a.beta < 0.0 || b.beta < 0.0)
        throw std::invalid_argument("hash parameters need alpha >= 1 and beta >= 0");
    return AlphaBeta{a.alpha * b.alpha, a.beta + b.beta};
}

}  // namespace crngnet
