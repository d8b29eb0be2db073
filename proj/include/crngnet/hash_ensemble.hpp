#ifndef CRNGNET_HASH_ENSEMBLE_HPP
#define CRNGNET_HASH_ENSEMBLE_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "crngnet/gf.hpp"
#include "crngnet/rng.hpp"

namespace crngnet {

// exact probability carried alongside its double value
struct Rational {
    std::uint64_t num = 0;
    std::uint64_t den = 1;

    static Rational of(std::uint64_t n, std::uint64_t d);
    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
    bool operator==(const Rational&) const = default;
};

// Codeword-side and message-side maps drawn for one message; both act on the
// same block space GF(q)^n.
struct FunctionPair {
    LinearMap f;  // block -> codeword symbols
    LinearMap g;  // block -> message symbols

    FunctionPair(LinearMap f_, LinearMap g_);
};

// The set {z : f z = c}; members reconstructed on demand.
class Coset {
  public:
    static Coset of(const LinearMap& f, const Word& c);
    static Coset joint(const FunctionPair& pair, const Word& c, const Word& m);

    bool empty() const { return !particular_.has_value(); }
    std::uint64_t size(std::uint64_t limit = 0) const;
    Word member(std::uint64_t idx) const;
    std::vector<Word> members(std::uint64_t limit = 0) const;

  private:
    Coset(Field f, std::optional<Word> particular, std::vector<Word> basis)
        : field_(f), particular_(std::move(particular)), basis_(std::move(basis)) {}

    Field field_;
    std::optional<Word> particular_;
    std::vector<Word> basis_;
};

struct HashEnsembleSpec {
    enum class Kind { uniform_matrix, sparse_matrix };

    Kind kind = Kind::uniform_matrix;
    unsigned rows = 0;
    unsigned cols = 0;
    unsigned field_order = 2;
    unsigned column_degree = 0;  // sparse kind; 0 = default_degree(cols)
    std::uint64_t seed = 0;

    static unsigned default_degree(unsigned cols);
    unsigned degree() const { return column_degree ? column_degree : default_degree(cols); }
    void check() const;  // throws invalid_argument on bad dimensions
};

// One draw from the ensemble.  Uniform kind: i.i.d. uniform entries.  Sparse
// kind: every column gets exactly `degree` distinct rows with uniform nonzero
// values.
LinearMap sample_map(const HashEnsembleSpec& spec, RngStream& rng);

// Walks the full support of an ensemble; every member has probability
// 1/size().  Throws ResourceError when the support exceeds `limit`.
class EnsembleEnumerator {
  public:
    explicit EnsembleEnumerator(const HashEnsembleSpec& spec, std::uint64_t limit = 1ULL << 22);

    std::uint64_t size() const { return size_; }
    LinearMap materialize(std::uint64_t index) const;

  private:
    HashEnsembleSpec spec_;
    std::uint64_t size_ = 0;
    std::uint64_t per_column_ = 0;  // sparse: outcomes per column
    std::uint64_t value_combos_ = 0;
};

struct ProbEstimate {
    double value = 0.0;
    std::optional<Rational> exact;  // present when fully enumerated
    std::uint64_t samples = 0;      // Monte Carlo sample count, 0 when exact
    double std_error = 0.0;
};

// Probability over the ensemble that f(z) = f(z'); exact by enumeration when
// the support is small, Monte Carlo otherwise.
ProbEstimate collision_spectrum(const HashEnsembleSpec& spec, const Word& z, const Word& z_prime);

struct HashProperty {
    double alpha = 1.0;
    double beta = 0.0;
    Rational beta_exact;
    std::uint64_t image_size = 1;  // union of member images
};

// Exact collision-spread parameters of an ensemble: alpha pinned to its
// minimum 1, beta the worst-case collision mass above the 1/|image| level.
HashProperty hash_alpha_beta(const HashEnsembleSpec& spec);

struct AlphaBeta {
    double alpha = 1.0;
    double beta = 0.0;
};

// Parameters of the stacked ensemble {(f,g)} from those of the parts.
AlphaBeta joint_ensemble_alpha_beta(const AlphaBeta& a, const AlphaBeta& b);

}  // namespace crngnet

#endif  // CRNGNET_HASH_ENSEMBLE_HPP
