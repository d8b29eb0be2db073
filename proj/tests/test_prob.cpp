#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "crngnet/prob.hpp"
#include "test_support.hpp"

using namespace crngnet;
using namespace crngnet::testing;

namespace {

ConditionalKernel kernel_from(FactorSpace given, FactorSpace out, std::vector<double> rows) {
    ConditionalKernel k;
    k.given = std::move(given);
    k.out = std::move(out);
    k.table = std::move(rows);
    k.finalize();
    k.validate_rows();
    return k;
}

JointSourceSpec uniform_source(const AccessStructure& a, const SortedFamily& fam, unsigned q) {
    JointSourceSpec spec;
    spec.letter_sizes.assign(a.message_count(), q);
    for (int k = 0; k < fam.size(); ++k) {
        FactorSpace given, out;
        given.sizes.assign(mask::count(fam.upper_closure[k]), q);
        out.sizes.assign(mask::count(fam.group_messages[k]), q);
        spec.group_kernels.push_back(ConditionalKernel::uniform(given, out));
    }
    return spec;
}

// random correlated source for a structure: random rows per group kernel
JointSourceSpec random_source(const AccessStructure& a, const SortedFamily& fam, RngStream& rng,
                              unsigned q = 2) {
    JointSourceSpec spec;
    spec.letter_sizes.assign(a.message_count(), q);
    for (int k = 0; k < fam.size(); ++k) {
        FactorSpace given, out;
        given.sizes.assign(mask::count(fam.upper_closure[k]), q);
        out.sizes.assign(mask::count(fam.group_messages[k]), q);
        ConditionalKernel kern;
        kern.given = given;
        kern.out = out;
        const std::uint64_t g = given.total(), o = out.total();
        kern.table.resize(g * o);
        for (std::uint64_t gi = 0; gi < g; ++gi) {
            double sum = 0;
            for (std::uint64_t oi = 0; oi < o; ++oi) {
                const double v = 0.05 + rng.uniform01();
                kern.table[gi * o + oi] = v;
                sum += v;
            }
            for (std::uint64_t oi = 0; oi < o; ++oi) kern.table[gi * o + oi] /= sum;
        }
        kern.finalize();
        spec.group_kernels.push_back(std::move(kern));
    }
    return spec;
}

double total_variation(const FiniteDist& a, const FiniteDist& b) {
    double tv = 0;
    for (std::size_t i = 0; i < a.p.size(); ++i) tv += std::abs(a.p[i] - b.p[i]);
    return 0.5 * tv;
}

}  // namespace

TEST_CASE("factor space indexing round trips") {
    FactorSpace sp{{2, 3, 2}};
    CHECK(sp.total() == 12);
    std::vector<unsigned> digits(3);
    for (std::uint64_t i = 0; i < 12; ++i) {
        sp.digits(i, digits);
        CHECK(sp.index(digits) == i);
    }
    FactorSpace big{{1u << 12, 1u << 12}};
    CHECK_THROWS_AS(big.total(1ULL << 22), ResourceError);
}

TEST_CASE("independent uniform groups give the uniform joint") {
    const AccessStructure a = mac_common();
    const SortedFamily fam = SortedFamily::build(a);
    const FiniteDist joint = build_joint_z(uniform_source(a, fam, 2), fam);
    for (double p : joint.p) CHECK(p == doctest::Approx(1.0 / 8).epsilon(1e-12));
}

TEST_CASE("single message source is the plain distribution") {
    const AccessStructure a =
        AccessStructure::make({"m"}, {"1"}, {"1"}, {{"m", "1"}}, {{"1", {"m"}}});
    const SortedFamily fam = SortedFamily::build(a);
    JointSourceSpec spec;
    spec.letter_sizes = {3};
    spec.group_kernels.push_back(kernel_from(FactorSpace{}, FactorSpace{{3}}, {0.5, 0.2, 0.3}));
    const FiniteDist joint = build_joint_z(spec, fam);
    CHECK(joint.p[0] == doctest::Approx(0.5));
    CHECK(joint.p[1] == doctest::Approx(0.2));
    CHECK(joint.p[2] == doctest::Approx(0.3));
}

TEST_CASE("correlated common-message source matches the closed form") {
    // private message of encoder 1 copies the common one through a noisy flip
    const AccessStructure a = mac_common();
    const SortedFamily fam = SortedFamily::build(a);
    REQUIRE(fam.groups[0] == 0b11);  // common group first

    JointSourceSpec spec;
    spec.letter_sizes = {2, 2, 2};
    spec.group_kernels.push_back(ConditionalKernel::uniform(FactorSpace{}, FactorSpace{{2}}));
    spec.group_kernels.push_back(
        kernel_from(FactorSpace{{2}}, FactorSpace{{2}}, {0.9, 0.1, 0.1, 0.9}));
    spec.group_kernels.push_back(ConditionalKernel::uniform(FactorSpace{{2}}, FactorSpace{{2}}));

    const FiniteDist joint = build_joint_z(spec, fam);
    // factors: (z1, z2, z12); closed form 0.25 * (0.9 if z1 == z12 else 0.1)
    std::vector<unsigned> d(3);
    for (std::uint64_t i = 0; i < 8; ++i) {
        joint.space.digits(i, d);
        const double expect = 0.25 * (d[0] == d[2] ? 0.9 : 0.1);
        CHECK(joint.p[i] == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("joint is invariant under a different valid group order") {
    const AccessStructure a = mac_three();
    SortedFamily fam = SortedFamily::build(a);
    RngStream rng(42);
    JointSourceSpec spec = random_source(a, fam, rng);
    const FiniteDist joint = build_joint_z(spec, fam);

    // swap the two 2-element groups (both orders are valid linear extensions)
    SortedFamily swapped = fam;
    std::swap(swapped.groups[1], swapped.groups[2]);
    std::swap(swapped.group_messages[1], swapped.group_messages[2]);
    std::swap(swapped.upper_closure[1], swapped.upper_closure[2]);
    std::swap(swapped.lower_closure[1], swapped.lower_closure[2]);
    JointSourceSpec spec2 = spec;
    std::swap(spec2.group_kernels[1], spec2.group_kernels[2]);

    const FiniteDist joint2 = build_joint_z(spec2, swapped);
    REQUIRE(joint.p.size() == joint2.p.size());
    for (std::size_t i = 0; i < joint.p.size(); ++i)
        CHECK(joint.p[i] == doctest::Approx(joint2.p[i]).epsilon(1e-12));
}

TEST_CASE("factorized sources satisfy the group independence relations") {
    RngStream rng(7);
    for (int t = 0; t < 50; ++t) {
        const AccessStructure a = random_structure(rng, 4, 3);
        const SortedFamily fam = SortedFamily::build(a);
        JointSourceSpec spec = random_source(a, fam, rng);
        const FiniteDist joint = build_joint_z(spec, fam);
        const MarkovReport rep = check_markov(joint, a, fam, 1e-9);
        CHECK(rep.all_pass());
    }
}

TEST_CASE("fully independent joint passes the independence checks") {
    const AccessStructure a = mac_common();
    const SortedFamily fam = SortedFamily::build(a);
    const FiniteDist joint = build_joint_z(uniform_source(a, fam, 2), fam);
    CHECK(check_markov(joint, a, fam, 1e-9).all_pass());
}

TEST_CASE("direct private-irrelevant correlation fails with the group named") {
    // two private messages on different encoders, then glue them together
    const AccessStructure a = AccessStructure::make(
        {"a", "b"}, {"1", "2"}, {"1"}, {{"a", "1"}, {"b", "2"}}, {{"1", {"a", "b"}}});
    const SortedFamily fam = SortedFamily::build(a);
    FiniteDist joint;
    joint.space.sizes = {2, 2};
    joint.p = {0.5, 0.0, 0.0, 0.5};  // z_a always equals z_b
    const MarkovReport rep = check_markov(joint, a, fam, 1e-9);
    CHECK(!rep.all_pass());
    bool witnessed = false;
    for (const auto& e : rep.entries)
        if (!e.pass && e.witness.find("group") != std::string::npos) witnessed = true;
    CHECK(witnessed);
}

TEST_CASE("independence-passing joints refactorize to the same joint") {
    RngStream rng(13);
    for (int t = 0; t < 50; ++t) {
        const AccessStructure a = random_structure(rng, 4, 3);
        const SortedFamily fam = SortedFamily::build(a);
        const FiniteDist joint = build_joint_z(random_source(a, fam, rng), fam);
        const JointSourceSpec back = extract_group_kernels(joint, fam);
        const FiniteDist joint2 = build_joint_z(back, fam);
        CHECK(total_variation(joint, joint2) <= 1e-9);
    }
}

TEST_CASE("entropy of a fair coin is one bit") {
    FiniteDist d;
    d.space.sizes = {2};
    d.p = {0.5, 0.5};
    CHECK(conditional_entropy_bits(d, 0b1, 0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("conditional entropy of a noisy observation matches the binary entropy") {
    // uniform input bit observed through a 0.1 flip
    FiniteDist d;
    d.space.sizes = {2, 2};  // (z, y)
    d.p = {0.45, 0.05, 0.05, 0.45};
    const double h = -0.1 * std::log2(0.1) - 0.9 * std::log2(0.9);
    CHECK(conditional_entropy_bits(d, 0b01, 0b10) == doctest::Approx(h).epsilon(1e-12));
}

TEST_CASE("entropy of a variable given itself vanishes") {
    FiniteDist d;
    d.space.sizes = {2, 2};
    d.p = {0.25, 0.25, 0.25, 0.25};
    // duplicate factor: correlate them perfectly instead
    d.p = {0.5, 0.0, 0.0, 0.5};
    CHECK(conditional_entropy_bits(d, 0b01, 0b10) == doctest::Approx(0.0));
    CHECK_THROWS_AS(conditional_entropy_bits(d, 0, 0b10), std::invalid_argument);
    CHECK_THROWS_AS(conditional_entropy_bits(d, 0b01, 0b01), std::invalid_argument);
}

TEST_CASE("chain rule holds on random joints") {
    RngStream rng(31);
    for (int t = 0; t < 100; ++t) {
        FiniteDist d;
        d.space.sizes = {2, 3, 2};
        d.p.resize(12);
        double sum = 0;
        for (auto& p : d.p) {
            p = rng.uniform01() + 1e-3;
            sum += p;
        }
        for (auto& p : d.p) p /= sum;
        const double lhs = conditional_entropy_bits(d, 0b011, 0b100);
        const double rhs =
            conditional_entropy_bits(d, 0b001, 0b100) + conditional_entropy_bits(d, 0b010, 0b101);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
    }
}

TEST_CASE("memoryless extension multiplies letter probabilities") {
    FiniteDist d;
    d.space.sizes = {2};
    d.p = {0.5, 0.5};

    const IidExtension one = extend_iid(d, 1);
    const std::uint32_t w1[] = {1};
    CHECK(one.prob(w1) == doctest::Approx(0.5));

    const IidExtension three = extend_iid(d, 3);
    const std::uint32_t w3[] = {0, 1, 1};
    CHECK(three.prob(w3) == doctest::Approx(1.0 / 8).epsilon(1e-12));

    ConditionalKernel flip =
        kernel_from(FactorSpace{{2}}, FactorSpace{{2}}, {0.9, 0.1, 0.1, 0.9});
    const IidKernelExtension two = extend_iid(flip, 2);
    const std::uint32_t given[] = {0, 0}, out[] = {0, 1};
    CHECK(two.prob(given, out) == doctest::Approx(0.09).epsilon(1e-12));

    CHECK_THROWS_AS(extend_iid(d, 0), std::invalid_argument);
}
