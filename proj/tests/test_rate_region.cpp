#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "crngnet/rate_region.hpp"
#include "test_support.hpp"

using namespace crngnet;
using namespace crngnet::testing;

namespace {

constexpr double kH01 = 0.4689955935892812;  // entropy of a 0.1 coin in bits

AccessStructure p2p_structure() {
    return AccessStructure::make({"m"}, {"1"}, {"1"}, {{"m", "1"}}, {{"1", {"m"}}});
}

// single-message system with H(Z) = hz and H(Z|Y) = hzy
LinearSystem p2p_system(double hz, double hzy, bool strict) {
    const AccessStructure a = p2p_structure();
    const SortedFamily fam = SortedFamily::build(a);
    SourceEntropies se;
    se.h[{0, 1}] = hz;
    ChannelEntropies ce;
    ce.h[{0, 1}] = hzy;
    return build_constraints(a, fam, se, ce, strict);
}

}  // namespace

TEST_CASE("point-to-point constraint system has exactly three rows") {
    const LinearSystem sys = p2p_system(1.0, 0.0, false);
    REQUIRE(sys.vars.size() == 2);
    CHECK(sys.vars[0] == "R_m");
    CHECK(sys.vars[1] == "r_m");
    REQUIRE(sys.rows.size() == 3);
    // R >= 0; R + r <= H(Z); r >= H(Z|Y)
    CHECK(sys.rows[0].rel == Rel::ge);
    CHECK(sys.rows[1].rel == Rel::le);
    CHECK(sys.rows[1].coeff == std::vector<double>{1.0, 1.0});
    CHECK(sys.rows[1].bound == doctest::Approx(1.0));
    CHECK(sys.rows[2].rel == Rel::ge);
    CHECK(sys.rows[2].coeff == std::vector<double>{0.0, 1.0});
}

TEST_CASE("two-decoder demands enumerate every nonempty subset") {
    const AccessStructure a = mac_common();
    const SortedFamily fam = SortedFamily::build(a);
    SourceEntropies se;
    for (int k = 0; k < fam.size(); ++k)
        for (MessageSet sub = fam.group_messages[k]; sub; sub = (sub - 1) & fam.group_messages[k])
            se.h[{k, sub}] = 1.0;
    ChannelEntropies ce;
    for (int j = 0; j < 2; ++j)
        for (MessageSet sub = a.demand(j); sub; sub = (sub - 1) & a.demand(j))
            ce.h[{j, sub}] = 0.25;
    const LinearSystem sys = build_constraints(a, fam, se, ce, false);
    int dec_rows = 0, enc_rows = 0, nonneg = 0;
    for (const auto& r : sys.rows) {
        if (r.label.rfind("dec", 0) == 0) ++dec_rows;
        if (r.label.rfind("enc", 0) == 0) ++enc_rows;
        if (r.label.rfind("nonneg", 0) == 0) ++nonneg;
    }
    CHECK(nonneg == 3);
    CHECK(enc_rows == 3);  // three singleton groups
    CHECK(dec_rows == 6);  // 2^2 - 1 subsets per decoder

    // missing entropy entry is an input error
    ChannelEntropies missing;
    CHECK_THROWS_AS(build_constraints(a, fam, se, missing, false), std::invalid_argument);
}

TEST_CASE("feasibility over the auxiliary rate interval") {
    const LinearSystem strict = p2p_system(1.0, 0.0, true);

    const Feasibility f1 = lp_feasible(strict, {0.9});
    REQUIRE(f1.feasible);
    CHECK(f1.assignment[0] > 0.0);
    CHECK(f1.assignment[0] < 0.1);

    CHECK(!lp_feasible(strict, {1.1}).feasible);

    const LinearSystem bsc = p2p_system(1.0, kH01, true);
    const Feasibility f2 = lp_feasible(bsc, {0.25});
    REQUIRE(f2.feasible);
    CHECK(f2.assignment[0] > kH01);
    CHECK(f2.assignment[0] < 0.75);
}

TEST_CASE("projection eliminates the auxiliary rate") {
    LinearSystem sys;
    sys.vars = {"R", "r"};
    sys.rows.push_back({{1, 1}, Rel::le, 1.0, "sum"});
    sys.rows.push_back({{0, 1}, Rel::ge, kH01, "dec"});
    sys.rows.push_back({{0, 1}, Rel::ge, 0.0, "pos"});
    const LinearSystem proj = fourier_motzkin_project(sys, {"r"});
    REQUIRE(proj.vars == std::vector<std::string>{"R"});
    REQUIRE(proj.rows.size() == 1);
    CHECK(proj.rows[0].rel == Rel::le);
    CHECK(proj.rows[0].coeff[0] == doctest::Approx(1.0));
    CHECK(proj.rows[0].bound == doctest::Approx(1.0 - kH01).epsilon(1e-12));
}

TEST_CASE("projecting away an unbounded variable leaves nothing") {
    LinearSystem sys;
    sys.vars = {"r"};
    sys.rows.push_back({{1}, Rel::ge, 0.0, "pos"});
    const LinearSystem proj = fourier_motzkin_project(sys, {"r"});
    CHECK(proj.rows.empty());
}

TEST_CASE("strictness propagates through combinations") {
    LinearSystem sys;
    sys.vars = {"R", "r"};
    sys.rows.push_back({{1, 1}, Rel::lt, 1.0, "sum"});
    sys.rows.push_back({{0, 1}, Rel::ge, 0.25, "dec"});
    const LinearSystem proj = fourier_motzkin_project(sys, {"r"});
    REQUIRE(proj.rows.size() == 1);
    CHECK(proj.rows[0].rel == Rel::lt);
    CHECK(proj.rows[0].bound == doctest::Approx(0.75));
}

TEST_CASE("projection agrees with direct feasibility on random systems") {
    RngStream rng(271);
    for (int t = 0; t < 40; ++t) {
        // random rows over (x, r1, r2); project away r1, r2
        LinearSystem sys;
        sys.vars = {"x", "r1", "r2"};
        const int rows = 2 + static_cast<int>(rng.below(5));
        for (int i = 0; i < rows; ++i) {
            Inequality in;
            in.coeff = {std::floor(rng.uniform01() * 5) - 2, std::floor(rng.uniform01() * 5) - 2,
                        std::floor(rng.uniform01() * 5) - 2};
            in.rel = Rel::le;
            in.bound = std::floor(rng.uniform01() * 9) - 4;
            in.label = "row" + std::to_string(i);
            sys.rows.push_back(std::move(in));
        }
        sys.rows.push_back({{0, 1, 0}, Rel::ge, 0.0, "r1pos"});
        sys.rows.push_back({{0, 0, 1}, Rel::ge, 0.0, "r2pos"});

        const LinearSystem proj = fourier_motzkin_project(sys, {"r1", "r2"});
        for (double x = -3.0; x <= 3.0 + 1e-9; x += 0.5) {
            const bool direct = lp_feasible(sys, {x}).feasible;
            const bool via_projection = satisfies(proj, {x});
            CHECK(direct == via_projection);
        }
    }
}

TEST_CASE("product deviation bound holds for random positive sequences") {
    RngStream rng(37);
    for (int t = 0; t < 1000; ++t) {
        const unsigned k = 1 + rng.below(6);
        std::vector<double> theta(k);
        for (auto& x : theta) x = 0.1 + 2.0 * rng.uniform01();
        const DiffProd dp = diff_prod_check(theta);
        CHECK(dp.lhs <= dp.rhs + 1e-12);
    }
    CHECK_THROWS_AS(diff_prod_check({1.0, -0.5}), std::invalid_argument);
}

TEST_CASE("bin-balance verifier on a single uniform ensemble") {
    HashEnsembleSpec spec{HashEnsembleSpec::Kind::uniform_matrix, 1, 2, 2, 0, 0};
    std::vector<double> Q(4, 1.0);
    std::vector<std::uint8_t> T(4, 1);
    const LemmaCheck chk = mbcp_lhs_exact({spec}, Q, T);
    CHECK(chk.holds());
    // only the zero map misbalances (everything lands in one of the two
    // bins, deviation 1); the other three members split the space evenly
    CHECK(chk.lhs == doctest::Approx(0.25).epsilon(1e-12));

    // single-point target: the deviation is computable by hand
    std::vector<std::uint8_t> point(4, 0);
    point[2] = 1;
    const LemmaCheck chk2 = mbcp_lhs_exact({spec}, Q, point);
    CHECK(chk2.holds());
    // one bin holds everything: |1 - 1/2| + |0 - 1/2| = 1 for every member
    CHECK(chk2.lhs == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("bin-balance verifier accepts the empty map") {
    HashEnsembleSpec spec{HashEnsembleSpec::Kind::uniform_matrix, 0, 2, 2, 0, 0};
    std::vector<double> Q(4, 0.25);
    std::vector<std::uint8_t> T(4, 1);
    const LemmaCheck chk = mbcp_lhs_exact({spec}, Q, T);
    CHECK(chk.lhs == doctest::Approx(0.0));
    CHECK(chk.holds());
}

TEST_CASE("bin-balance verifier on random product instances") {
    RngStream rng(5150);
    for (int t = 0; t < 20; ++t) {
        std::vector<HashEnsembleSpec> specs;
        const int messages = 1 + rng.below(2);
        std::uint64_t space = 1;
        for (int s = 0; s < messages; ++s) {
            HashEnsembleSpec spec;
            spec.kind = rng.below(2) ? HashEnsembleSpec::Kind::sparse_matrix
                                     : HashEnsembleSpec::Kind::uniform_matrix;
            spec.cols = 2;
            spec.rows = 1 + rng.below(2);
            spec.field_order = 2;
            spec.column_degree = spec.kind == HashEnsembleSpec::Kind::sparse_matrix ? 1 : 0;
            specs.push_back(spec);
            space *= 4;
        }
        std::vector<double> Q(space);
        std::vector<std::uint8_t> T(space);
        bool any = false;
        for (std::uint64_t z = 0; z < space; ++z) {
            Q[z] = rng.uniform01();
            T[z] = rng.below(2) ? 1 : 0;
            any = any || T[z];
        }
        if (!any) T[0] = 1;
        const LemmaCheck chk = mbcp_lhs_exact(specs, Q, T);
        CHECK(chk.holds());
    }
}

TEST_CASE("collision-resistance verifier basics") {
    HashEnsembleSpec spec{HashEnsembleSpec::Kind::uniform_matrix, 2, 3, 2, 0, 0};

    // target containing only the base point never collides
    std::vector<std::uint8_t> T(8, 0);
    T[3] = 1;
    const LemmaCheck solo = mcrp_lhs_exact({spec}, T, {index_to_word(3, 2, 3)});
    CHECK(solo.lhs == doctest::Approx(0.0));
    CHECK(solo.holds());

    // three-point target measured exactly over all 64 matrices
    std::vector<std::uint8_t> T3(8, 0);
    T3[1] = T3[2] = T3[5] = 1;
    const LemmaCheck chk = mcrp_lhs_exact({spec}, T3, {index_to_word(1, 2, 3)});
    CHECK(chk.lhs > 0.0);
    CHECK(chk.holds());
}

TEST_CASE("collision-resistance verifier on random two-message instances") {
    RngStream rng(616);
    for (int t = 0; t < 20; ++t) {
        std::vector<HashEnsembleSpec> specs(
            2, HashEnsembleSpec{HashEnsembleSpec::Kind::uniform_matrix, 1, 2, 2, 0, 0});
        std::vector<std::uint8_t> T(16, 0);
        for (auto& b : T) b = rng.below(2) ? 1 : 0;
        const std::uint64_t zi = rng.below(4), zj = rng.below(4);
        const LemmaCheck chk =
            mcrp_lhs_exact(specs, T, {index_to_word(zi, 2, 2), index_to_word(zj, 2, 2)});
        CHECK(chk.holds());
    }
}

TEST_CASE("error bound exponents for the clean point-to-point code") {
    const AccessStructure a = p2p_structure();
    const SortedFamily fam = SortedFamily::build(a);

    FiniteDist joint_z;
    joint_z.space.sizes = {2};
    joint_z.p = {0.5, 0.5};
    std::vector<FiniteDist> dec_joints(1);
    dec_joints[0].space.sizes = {2, 2};
    dec_joints[0].p = {0.5, 0.0, 0.0, 0.5};  // y copies z

    BoundInputs in;
    in.a = &a;
    in.fam = &fam;
    in.letter_joint_z = &joint_z;
    in.decoder_joints = &dec_joints;
    in.r = {0.25};
    in.R = {0.5};
    in.n = 12;
    in.epsilon = 0.05;
    in.f_params = {{1.0, 0.0}};
    in.g_params = {{1.0, 0.0}};

    const BoundReport rep = evaluate_error_bound(in);
    REQUIRE(rep.encoder_exponents.size() == 1);
    REQUIRE(rep.decoder_exponents.size() == 1);
    CHECK(rep.encoder_exponents[0].gamma == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(rep.decoder_exponents[0].gamma == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(rep.all_exponents_positive);
    CHECK(rep.encoder_tails[0].mass == doctest::Approx(0.0));
    CHECK(rep.decoder_tails[0].mass == doctest::Approx(0.0));
    CHECK(rep.rhs_total > 0.0);

    // pushing the message rate past the entropy flips the sign flag
    BoundInputs hot = in;
    hot.R = {0.9};
    const BoundReport rep2 = evaluate_error_bound(hot);
    CHECK(!rep2.all_exponents_positive);
    CHECK(rep2.rhs_total >= 1.0);
}
