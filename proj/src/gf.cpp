#include "crngnet/gf.hpp"

#include <algorithm>
#include <sstream>

namespace crngnet {

bool is_prime(unsigned n) {
    if (n < 2) return false;
    for (unsigned d = 2; d * d <= n; ++d)
        if (n % d == 0) return false;
    return true;
}

Field::Field(unsigned order) : q_(order) {
    if (!is_prime(order) || order > 257)
        throw std::invalid_argument("field order must be prime and <= 257, got " +
                                    std::to_string(order));
}

Symbol Field::inv(Symbol a) const {
    a = static_cast<Symbol>(a % q_);
    if (a == 0) throw std::invalid_argument("inverse of zero");
    // Fermat: a^(q-2)
    std::uint32_t res = 1, base = a, e = q_ - 2;
    while (e) {
        if (e & 1) res = res * base % q_;
        base = base * base % q_;
        e >>= 1;
    }
    return static_cast<Symbol>(res);
}

std::uint64_t word_to_index(const Word& w, unsigned q) {
    std::uint64_t idx = 0;
    for (std::size_t i = w.size(); i-- > 0;) idx = idx * q + w[i];
    return idx;
}

Word index_to_word(std::uint64_t idx, unsigned q, unsigned len) {
    Word w(len);
    for (unsigned i = 0; i < len; ++i) {
        w[i] = static_cast<Symbol>(idx % q);
        idx /= q;
    }
    return w;
}

std::uint64_t checked_pow(unsigned q, unsigned e, std::uint64_t limit) {
    std::uint64_t r = 1;
    for (unsigned i = 0; i < e; ++i) {
        if (r > UINT64_MAX / q) throw ResourceError("enumeration size overflows 64 bits");
        r *= q;
        if (limit && r > limit)
            throw ResourceError("enumeration guard exceeded: " + std::to_string(q) + "^" +
                                std::to_string(e) + " > " + std::to_string(limit));
    }
    return r;
}

LinearMap LinearMap::dense(const Field& f, unsigned rows, unsigned cols,
                           std::vector<Symbol> row_major) {
    if (row_major.size() != static_cast<std::size_t>(rows) * cols)
        throw std::invalid_argument("dense map entry count mismatch");
    LinearMap m(f, Kind::dense, rows, cols);
    for (auto& e : row_major) e = static_cast<Symbol>(e % f.order());
    m.dense_ = std::move(row_major);
    return m;
}

LinearMap LinearMap::sparse(const Field& f, unsigned rows, unsigned cols,
                            std::vector<std::vector<SparseEntry>> columns) {
    if (columns.size() != cols) throw std::invalid_argument("sparse map column count mismatch");
    for (const auto& col : columns)
        for (const auto& e : col) {
            if (e.row >= rows) throw std::invalid_argument("sparse entry row out of range");
            if (e.value % f.order() == 0) throw std::invalid_argument("sparse entry value is zero");
        }
    LinearMap m(f, Kind::sparse, rows, cols);
    m.columns_ = std::move(columns);
    return m;
}

LinearMap LinearMap::zero(const Field& f, unsigned rows, unsigned cols) {
    LinearMap m(f, Kind::dense, rows, cols);
    m.dense_.assign(static_cast<std::size_t>(rows) * cols, 0);
    return m;
}

LinearMap LinearMap::identity(const Field& f, unsigned n) {
    LinearMap m = zero(f, n, n);
    for (unsigned i = 0; i < n; ++i) m.dense_[static_cast<std::size_t>(i) * n + i] = 1;
    return m;
}

Symbol LinearMap::at(unsigned r, unsigned c) const {
    if (r >= rows_ || c >= cols_) throw std::invalid_argument("matrix index out of range");
    if (kind_ == Kind::dense) return dense_[static_cast<std::size_t>(r) * cols_ + c];
    for (const auto& e : columns_[c])
        if (e.row == r) return e.value;
    return 0;
}

Word LinearMap::apply(const Word& v) const {
    if (v.size() != cols_)
        throw std::invalid_argument("apply: vector length " + std::to_string(v.size()) +
                                    " != cols " + std::to_string(cols_));
    Word out(rows_, 0);
    if (kind_ == Kind::dense) {
        for (unsigned r = 0; r < rows_; ++r) {
            std::uint32_t acc = 0;
            const Symbol* row = dense_.data() + static_cast<std::size_t>(r) * cols_;
            for (unsigned c = 0; c < cols_; ++c) acc += static_cast<std::uint32_t>(row[c]) * v[c];
            out[r] = static_cast<Symbol>(acc % field_.order());
        }
    } else {
        std::vector<std::uint32_t> acc(rows_, 0);
        for (unsigned c = 0; c < cols_; ++c) {
            if (v[c] == 0) continue;
            for (const auto& e : columns_[c]) acc[e.row] += static_cast<std::uint32_t>(e.value) * v[c];
        }
        for (unsigned r = 0; r < rows_; ++r) out[r] = static_cast<Symbol>(acc[r] % field_.order());
    }
    return out;
}

unsigned LinearMap::rank() const {
    if (rank_ >= 0) return static_cast<unsigned>(rank_);
    std::vector<Symbol> mat(static_cast<std::size_t>(rows_) * cols_);
    for (unsigned r = 0; r < rows_; ++r)
        for (unsigned c = 0; c < cols_; ++c) mat[static_cast<std::size_t>(r) * cols_ + c] = at(r, c);
    AffineSolver solver(field_, rows_, cols_, std::move(mat));
    rank_ = static_cast<int>(solver.rank());
    return static_cast<unsigned>(rank_);
}

std::string LinearMap::to_text() const {
    std::ostringstream os;
    os << "gfmat q=" << field_.order() << " rows=" << rows_ << " cols=" << cols_
       << " kind=" << (kind_ == Kind::dense ? "dense" : "sparse") << "\n";
    if (kind_ == Kind::dense) {
        for (unsigned r = 0; r < rows_; ++r) {
            for (unsigned c = 0; c < cols_; ++c)
                os << (c ? " " : "") << dense_[static_cast<std::size_t>(r) * cols_ + c];
            os << "\n";
        }
    } else {
        for (unsigned c = 0; c < cols_; ++c)
            for (const auto& e : columns_[c]) os << e.row << " " << c << " " << e.value << "\n";
    }
    return os.str();
}

LinearMap LinearMap::from_text(const std::string& text) {
    std::istringstream is(text);
    std::string tag, qs, rs, cs, ks;
    is >> tag >> qs >> rs >> cs >> ks;
    auto val = [](const std::string& kv) {
        auto p = kv.find('=');
        if (p == std::string::npos) throw std::invalid_argument("bad gfmat header field: " + kv);
        return kv.substr(p + 1);
    };
    if (tag != "gfmat") throw std::invalid_argument("not a gfmat text block");
    Field f(static_cast<unsigned>(std::stoul(val(qs))));
    unsigned rows = static_cast<unsigned>(std::stoul(val(rs)));
    unsigned cols = static_cast<unsigned>(std::stoul(val(cs)));
    if (val(ks) == "dense") {
        std::vector<Symbol> entries(static_cast<std::size_t>(rows) * cols);
        for (auto& e : entries) {
            unsigned v;
            if (!(is >> v)) throw std::invalid_argument("gfmat dense body truncated");
            e = static_cast<Symbol>(v);
        }
        return dense(f, rows, cols, std::move(entries));
    }
    std::vector<std::vector<SparseEntry>> columns(cols);
    unsigned r, c, v;
    while (is >> r >> c >> v) {
        if (c >= cols) throw std::invalid_argument("gfmat sparse column out of range");
        columns[c].push_back({r, static_cast<Symbol>(v)});
    }
    return sparse(f, rows, cols, std::move(columns));
}

bool LinearMap::operator==(const LinearMap& other) const {
    if (!(field_ == other.field_) || rows_ != other.rows_ || cols_ != other.cols_) return false;
    for (unsigned r = 0; r < rows_; ++r)
        for (unsigned c = 0; c < cols_; ++c)
            if (at(r, c) != other.at(r, c)) return false;
    return true;
}

AffineSolver::AffineSolver(const Field& f, unsigned rows, unsigned cols,
                           std::vector<Symbol> row_major)
    : field_(f), rows_(rows), cols_(cols) {
    if (row_major.size() != static_cast<std::size_t>(rows) * cols)
        throw std::invalid_argument("solver entry count mismatch");
    reduce(std::move(row_major));
}

AffineSolver::AffineSolver(const LinearMap& m)
    : field_(m.field()), rows_(m.rows()), cols_(m.cols()) {
    std::vector<Symbol> mat(static_cast<std::size_t>(rows_) * cols_);
    for (unsigned r = 0; r < rows_; ++r)
        for (unsigned c = 0; c < cols_; ++c) mat[static_cast<std::size_t>(r) * cols_ + c] = m.at(r, c);
    reduce(std::move(mat));
}

AffineSolver AffineSolver::stacked(const LinearMap& top, const LinearMap& bottom) {
    if (!(top.field() == bottom.field()) || top.cols() != bottom.cols())
        throw std::invalid_argument("stacked maps must share field and column count");
    const unsigned rows = top.rows() + bottom.rows(), cols = top.cols();
    std::vector<Symbol> mat(static_cast<std::size_t>(rows) * cols);
    for (unsigned r = 0; r < top.rows(); ++r)
        for (unsigned c = 0; c < cols; ++c) mat[static_cast<std::size_t>(r) * cols + c] = top.at(r, c);
    for (unsigned r = 0; r < bottom.rows(); ++r)
        for (unsigned c = 0; c < cols; ++c)
            mat[static_cast<std::size_t>(top.rows() + r) * cols + c] = bottom.at(r, c);
    return AffineSolver(top.field(), rows, cols, std::move(mat));
}

void AffineSolver::reduce(std::vector<Symbol> mat) {
    transform_.assign(static_cast<std::size_t>(rows_) * rows_, 0);
    for (unsigned r = 0; r < rows_; ++r) transform_[static_cast<std::size_t>(r) * rows_ + r] = 1;

    auto m_at = [&](unsigned r, unsigned c) -> Symbol& {
        return mat[static_cast<std::size_t>(r) * cols_ + c];
    };
    auto t_at = [&](unsigned r, unsigned c) -> Symbol& {
        return transform_[static_cast<std::size_t>(r) * rows_ + c];
    };

    rank_ = 0;
    pivot_col_.clear();
    for (unsigned c = 0; c < cols_ && rank_ < rows_; ++c) {
        unsigned pivot = rank_;
        while (pivot < rows_ && m_at(pivot, c) == 0) ++pivot;
        if (pivot == rows_) continue;
        if (pivot != rank_) {
            for (unsigned j = 0; j < cols_; ++j) std::swap(m_at(pivot, j), m_at(rank_, j));
            for (unsigned j = 0; j < rows_; ++j) std::swap(t_at(pivot, j), t_at(rank_, j));
        }
        const Symbol piv_inv = field_.inv(m_at(rank_, c));
        for (unsigned j = 0; j < cols_; ++j) m_at(rank_, j) = field_.mul(m_at(rank_, j), piv_inv);
        for (unsigned j = 0; j < rows_; ++j) t_at(rank_, j) = field_.mul(t_at(rank_, j), piv_inv);
        for (unsigned r = 0; r < rows_; ++r) {
            if (r == rank_ || m_at(r, c) == 0) continue;
            const Symbol factor = m_at(r, c);
            for (unsigned j = 0; j < cols_; ++j)
                m_at(r, j) = field_.sub(m_at(r, j), field_.mul(factor, m_at(rank_, j)));
            for (unsigned j = 0; j < rows_; ++j)
                t_at(r, j) = field_.sub(t_at(r, j), field_.mul(factor, t_at(rank_, j)));
        }
        pivot_col_.push_back(c);
        ++rank_;
    }
    rref_.assign(mat.begin(), mat.begin() + static_cast<std::size_t>(rank_) * cols_);

    // null-space basis: one vector per free column
    std::vector<bool> is_pivot(cols_, false);
    for (unsigned p : pivot_col_) is_pivot[p] = true;
    null_basis_.clear();
    for (unsigned c = 0; c < cols_; ++c) {
        if (is_pivot[c]) continue;
        Word v(cols_, 0);
        v[c] = 1;
        for (unsigned r = 0; r < rank_; ++r)
            v[pivot_col_[r]] = field_.neg(rref_[static_cast<std::size_t>(r) * cols_ + c]);
        null_basis_.push_back(std::move(v));
    }
}

std::uint64_t AffineSolver::coset_size(std::uint64_t limit) const {
    return checked_pow(field_.order(), cols_ - rank_, limit);
}

std::optional<Word> AffineSolver::solve(const Word& rhs) const {
    if (rhs.size() != rows_) throw std::invalid_argument("solve: rhs length mismatch");
    Word y(rows_, 0);
    for (unsigned r = 0; r < rows_; ++r) {
        std::uint32_t acc = 0;
        for (unsigned j = 0; j < rows_; ++j)
            acc += static_cast<std::uint32_t>(transform_[static_cast<std::size_t>(r) * rows_ + j]) *
                   rhs[j];
        y[r] = static_cast<Symbol>(acc % field_.order());
    }
    for (unsigned r = rank_; r < rows_; ++r)
        if (y[r] != 0) return std::nullopt;
    Word x(cols_, 0);
    for (unsigned r = 0; r < rank_; ++r) x[pivot_col_[r]] = y[r];
    return x;
}

Word CosetEnumerator::member(std::uint64_t idx) const {
    const unsigned q = field_.order();
    Word w = particular_;
    for (const Word& b : *basis_) {
        const Symbol t = static_cast<Symbol>(idx % q);
        idx /= q;
        if (t == 0) continue;
        for (std::size_t i = 0; i < w.size(); ++i) w[i] = field_.add(w[i], field_.mul(t, b[i]));
    }
    return w;
}

}  // namespace crngnet
