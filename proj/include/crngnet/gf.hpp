#ifndef CRNGNET_GF_HPP
#define CRNGNET_GF_HPP

#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "crngnet/errors.hpp"

namespace crngnet {

using Symbol = std::uint16_t;
using Word = std::vector<Symbol>;  // vector over GF(q)

bool is_prime(unsigned n);

// Prime field GF(q), q <= 257.
class Field {
  public:
    explicit Field(unsigned order);
    unsigned order() const { return q_; }

    Symbol add(Symbol a, Symbol b) const { return static_cast<Symbol>((a + b) % q_); }
    Symbol sub(Symbol a, Symbol b) const { return static_cast<Symbol>((a + q_ - b % q_) % q_); }
    Symbol mul(Symbol a, Symbol b) const {
        return static_cast<Symbol>((static_cast<std::uint32_t>(a) * b) % q_);
    }
    Symbol neg(Symbol a) const { return static_cast<Symbol>((q_ - a % q_) % q_); }
    Symbol inv(Symbol a) const;

    bool operator==(const Field& other) const { return q_ == other.q_; }

  private:
    unsigned q_;
};

// Mixed-radix packing of a word into an enumeration index, symbol 0 least
// significant.  Used wherever a small space GF(q)^n is swept.
std::uint64_t word_to_index(const Word& w, unsigned q);
Word index_to_word(std::uint64_t idx, unsigned q, unsigned len);

// q^e with overflow guard; throws ResourceError when the result would not fit
// or exceeds `limit` (0 = only the uint64 check).
std::uint64_t checked_pow(unsigned q, unsigned e, std::uint64_t limit = 0);

struct SparseEntry {
    unsigned row;
    Symbol value;
};

// Linear map GF(q)^cols -> GF(q)^rows.  Dense maps store a row-major table;
// sparse maps store per-column nonzero lists.
class LinearMap {
  public:
    enum class Kind { dense, sparse };

    static LinearMap dense(const Field& f, unsigned rows, unsigned cols,
                           std::vector<Symbol> row_major);
    static LinearMap sparse(const Field& f, unsigned rows, unsigned cols,
                            std::vector<std::vector<SparseEntry>> columns);
    static LinearMap zero(const Field& f, unsigned rows, unsigned cols);
    static LinearMap identity(const Field& f, unsigned n);

    Kind kind() const { return kind_; }
    unsigned rows() const { return rows_; }
    unsigned cols() const { return cols_; }
    const Field& field() const { return field_; }

    Symbol at(unsigned r, unsigned c) const;
    Word apply(const Word& v) const;
    unsigned rank() const;  // Gaussian elimination, cached

    // text form: header line + entries; round-trips exactly
    std::string to_text() const;
    static LinearMap from_text(const std::string& text);

    bool operator==(const LinearMap& other) const;

  private:
    LinearMap(const Field& f, Kind k, unsigned rows, unsigned cols)
        : field_(f), kind_(k), rows_(rows), cols_(cols) {}

    Field field_;
    Kind kind_;
    unsigned rows_, cols_;
    std::vector<Symbol> dense_;                      // rows*cols, row-major
    std::vector<std::vector<SparseEntry>> columns_;  // sparse storage
    mutable int rank_ = -1;
};

// Row reduction of a (possibly stacked) matrix prepared once, then solved
// against many right-hand sides.  Tracks the elimination transform so
// consistency of A z = b is decided exactly.
class AffineSolver {
  public:
    AffineSolver(const Field& f, unsigned rows, unsigned cols, std::vector<Symbol> row_major);
    explicit AffineSolver(const LinearMap& m);
    static AffineSolver stacked(const LinearMap& top, const LinearMap& bottom);

    unsigned rank() const { return rank_; }
    unsigned rows() const { return rows_; }
    unsigned cols() const { return cols_; }
    const Field& field() const { return field_; }
    const std::vector<Word>& null_basis() const { return null_basis_; }

    // q^(cols - rank); throws ResourceError past `limit` when limit > 0
    std::uint64_t coset_size(std::uint64_t limit = 0) const;

    // one solution of A z = rhs, or nullopt when inconsistent
    std::optional<Word> solve(const Word& rhs) const;

  private:
    void reduce(std::vector<Symbol> mat);

    Field field_;
    unsigned rows_, cols_, rank_ = 0;
    std::vector<Symbol> rref_;       // rank_ x cols_
    std::vector<Symbol> transform_;  // rows_ x rows_, transform * A = [rref; 0]
    std::vector<unsigned> pivot_col_;
    std::vector<Word> null_basis_;
};

// The affine set {z : A z = b} given one member and the null-space basis.
// Members are reconstructed on demand; nothing is materialized.
class CosetEnumerator {
  public:
    CosetEnumerator(const Field& f, Word particular, const std::vector<Word>* basis)
        : field_(f), particular_(std::move(particular)), basis_(basis) {}

    std::uint64_t size(std::uint64_t limit = 0) const {
        return checked_pow(field_.order(), static_cast<unsigned>(basis_->size()), limit);
    }
    Word member(std::uint64_t idx) const;

  private:
    Field field_;
    Word particular_;
    const std::vector<Word>* basis_;
};

}  // namespace crngnet

#endif  // CRNGNET_GF_HPP
