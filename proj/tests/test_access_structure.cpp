#include <doctest.h>

#include <set>
#include <stdexcept>

#include "crngnet/access_structure.hpp"
#include "test_support.hpp"

using namespace crngnet;
using namespace crngnet::testing;

namespace {

std::set<std::string> labels(const AccessStructure& a, MessageSet m) {
    std::set<std::string> out;
    for (int s : mask::bits(m)) out.insert(a.message_labels()[s]);
    return out;
}

std::set<std::set<std::string>> family_sets(const AccessStructure& a, const SortedFamily& fam) {
    std::set<std::set<std::string>> out;
    for (EncoderSet g : fam.groups) {
        std::set<std::string> one;
        for (int i : mask::bits(g)) one.insert(a.encoder_labels()[i]);
        out.insert(one);
    }
    return out;
}

}  // namespace

TEST_CASE("reader sets of the worked structures") {
    const AccessStructure ex1 = broadcast_common();
    CHECK(ex1.encoders_of_message("2") == std::set<std::string>{"1"});

    const AccessStructure ex2 = mac_common();
    CHECK(ex2.encoders_of_message("12") == std::set<std::string>{"1", "2"});
    CHECK(ex2.messages_of_encoder("1") == std::set<std::string>{"1", "12"});

    const AccessStructure single = AccessStructure::make(
        {"a"}, {"1"}, {"1"}, {{"a", "1"}}, {{"1", {"a"}}});
    CHECK(single.encoders_of_message("a") == std::set<std::string>{"1"});
}

TEST_CASE("per-encoder message sets of the three-input structure") {
    const AccessStructure ex3 = mac_three();
    CHECK(ex3.messages_of_encoder("2") == std::set<std::string>{"12", "23", "123"});
    CHECK(ex3.messages_of_encoder("1") == std::set<std::string>{"1", "12", "123"});
    CHECK(ex3.messages_of_encoder("3") == std::set<std::string>{"3", "23", "123"});
    CHECK_THROWS_AS(ex3.messages_of_encoder("9"), std::invalid_argument);
    CHECK_THROWS_AS(ex3.encoders_of_message("77"), std::invalid_argument);
}

TEST_CASE("construction rejects broken structures") {
    // message without any arc
    CHECK_THROWS_AS(AccessStructure::make({"a", "b"}, {"1"}, {"1"}, {{"a", "1"}},
                                          {{"1", {"a"}}}),
                    std::invalid_argument);
    // arc referencing unknown encoder
    CHECK_THROWS_AS(AccessStructure::make({"a"}, {"1"}, {"1"}, {{"a", "2"}}, {{"1", {"a"}}}),
                    std::invalid_argument);
    // demand referencing unknown message
    CHECK_THROWS_AS(AccessStructure::make({"a"}, {"1"}, {"1"}, {{"a", "1"}}, {{"1", {"zz"}}}),
                    std::invalid_argument);
    // decoder with empty demand
    CHECK_THROWS_AS(AccessStructure::make({"a"}, {"1"}, {"1"}, {{"a", "1"}}, {}),
                    std::invalid_argument);
}

TEST_CASE("message groups partition the worked structures") {
    const AccessStructure ex3 = mac_three();
    const auto groups = message_groups(ex3);
    CHECK(groups.size() == 5);
    const EncoderSet enc12 =
        (EncoderSet{1} << ex3.encoder_index("1")) | (EncoderSet{1} << ex3.encoder_index("2"));
    CHECK(labels(ex3, groups.at(enc12)) == std::set<std::string>{"12"});

    const AccessStructure ex1 = broadcast_common();
    const auto groups1 = message_groups(ex1);
    CHECK(groups1.size() == 1);
    CHECK(labels(ex1, groups1.begin()->second) == std::set<std::string>{"1", "2", "12"});

    const AccessStructure single = AccessStructure::make(
        {"m"}, {"1"}, {"1"}, {{"m", "1"}}, {{"1", {"m"}}});
    CHECK(message_groups(single).size() == 1);
}

TEST_CASE("family of the three-input structure") {
    const AccessStructure ex3 = mac_three();
    const SortedFamily fam = SortedFamily::build(ex3);
    CHECK(family_sets(ex3, fam) ==
          std::set<std::set<std::string>>{
              {"1", "2", "3"}, {"1", "2"}, {"2", "3"}, {"1"}, {"3"}});
    // cardinality buckets: the full set first, singletons last
    CHECK(mask::count(fam.groups.front()) == 3);
    CHECK(mask::count(fam.groups.back()) == 1);
}

TEST_CASE("linear extension orders subsets before their supersets never") {
    // singleton family maps to itself
    CHECK(linear_extension({EncoderSet{0b101}}, 3) == std::vector<EncoderSet>{0b101});

    RngStream rng(2024);
    for (int trial = 0; trial < 1000; ++trial) {
        const unsigned universe = 1 + rng.below(6);
        const std::uint64_t all = (std::uint64_t{1} << universe);
        std::set<EncoderSet> fam_set;
        const unsigned count = 1 + rng.below(all);
        for (unsigned c = 0; c < count; ++c)
            fam_set.insert(static_cast<EncoderSet>(rng.below(all)));
        std::vector<EncoderSet> family(fam_set.begin(), fam_set.end());
        const auto sorted = linear_extension(family, universe);
        REQUIRE(sorted.size() == family.size());
        // pairwise scan: a proper subset must come strictly later
        for (std::size_t k = 0; k < sorted.size(); ++k)
            for (std::size_t kp = 0; kp < sorted.size(); ++kp)
                if (mask::proper_subset(sorted[k], sorted[kp])) CHECK(kp < k);
    }
}

TEST_CASE("upper closures match their set definition") {
    const AccessStructure ex3 = mac_three();
    const SortedFamily fam = SortedFamily::build(ex3);

    for (int k = 0; k < fam.size(); ++k) {
        // independent route: union the groups of strict supersets directly
        MessageSet expected = 0;
        for (int kp = 0; kp < fam.size(); ++kp)
            if (mask::proper_subset(fam.groups[k], fam.groups[kp]))
                expected |= fam.group_messages[kp];
        CHECK(fam.upper_closure[k] == expected);
    }
    const int k12 = [&] {
        for (int k = 0; k < fam.size(); ++k)
            if (mask::count(fam.groups[k]) == 2 &&
                labels(ex3, fam.group_messages[k]) == std::set<std::string>{"12"})
                return k;
        return -1;
    }();
    REQUIRE(k12 >= 0);
    CHECK(labels(ex3, fam.upper_closure[k12]) == std::set<std::string>{"123"});
    CHECK(labels(ex3, fam.upper_closure[0]) == std::set<std::string>{});  // maximal group

    const AccessStructure ex2 = mac_common();
    const SortedFamily fam2 = SortedFamily::build(ex2);
    for (int k = 0; k < fam2.size(); ++k)
        if (fam2.groups[k] == (EncoderSet{1} << ex2.encoder_index("1")))
            CHECK(labels(ex2, fam2.upper_closure[k]) == std::set<std::string>{"12"});
}

TEST_CASE("lower closures match their set definition") {
    const AccessStructure ex3 = mac_three();
    const SortedFamily fam = SortedFamily::build(ex3);
    for (int k = 0; k < fam.size(); ++k) {
        MessageSet expected = 0;
        for (int kp = 0; kp < fam.size(); ++kp)
            if (mask::subset(fam.groups[kp], fam.groups[k])) expected |= fam.group_messages[kp];
        CHECK(fam.lower_closure[k] == expected);
        CHECK((fam.lower_closure[k] & fam.group_messages[k]) == fam.group_messages[k]);
    }
    for (int k = 0; k < fam.size(); ++k) {
        if (mask::count(fam.groups[k]) == 2 &&
            labels(ex3, fam.group_messages[k]) == std::set<std::string>{"12"})
            CHECK(labels(ex3, fam.lower_closure[k]) == std::set<std::string>{"12", "1"});
        if (fam.groups[k] == (EncoderSet{1} << ex3.encoder_index("1")))
            CHECK(labels(ex3, fam.lower_closure[k]) == std::set<std::string>{"1"});
    }

    const AccessStructure ex2 = mac_common();
    const SortedFamily fam2 = SortedFamily::build(ex2);
    CHECK(labels(ex2, fam2.lower_closure[0]) == std::set<std::string>{"12", "1", "2"});
}

TEST_CASE("validation passes on the worked structures and catches corruption") {
    for (const AccessStructure& a : {broadcast_common(), mac_common(), mac_three()}) {
        const SortedFamily fam = SortedFamily::build(a);
        const ValidationReport rep = validate(fam, a);
        CHECK(rep.all_pass());
    }

    // move one message between groups: the partition identities must fail
    const AccessStructure ex3 = mac_three();
    SortedFamily broken = SortedFamily::build(ex3);
    const int victim = mask::bits(broken.group_messages[0])[0];
    broken.group_messages[0] &= ~(MessageSet{1} << victim);
    broken.group_messages[1] |= MessageSet{1} << victim;
    const ValidationReport rep = validate(broken, ex3);
    CHECK(!rep.all_pass());
    bool witnessed = false;
    for (const auto& e : rep.entries)
        if (!e.pass && !e.witness.empty()) witnessed = true;
    CHECK(witnessed);
}

TEST_CASE("set identities hold on random structures") {
    RngStream rng(99);
    const MessageSet one = 1;
    for (int trial = 0; trial < 1000; ++trial) {
        const AccessStructure a = random_structure(rng);
        const SortedFamily fam = SortedFamily::build(a);
        CHECK(validate(fam, a).all_pass());

        // groups partition the message set (independent recomputation)
        MessageSet covered = 0;
        for (int k = 0; k < fam.size(); ++k) {
            CHECK((covered & fam.group_messages[k]) == 0);
            covered |= fam.group_messages[k];
        }
        const MessageSet all = (one << a.message_count()) - 1;
        CHECK(covered == all);

        // common-message identity per group, computed from scratch
        for (int k = 0; k < fam.size(); ++k) {
            MessageSet common = all;
            for (int i : mask::bits(fam.groups[k])) common &= a.messages_of_encoder(i);
            CHECK(common == (fam.group_messages[k] | fam.upper_closure[k]));
        }
        // per-encoder union identity
        for (int i = 0; i < a.encoder_count(); ++i) {
            MessageSet acc = 0;
            for (int k = 0; k < fam.size(); ++k)
                if (fam.groups[k] & (EncoderSet{1} << i)) acc |= fam.group_messages[k];
            CHECK(acc == a.messages_of_encoder(i));
        }
        // earlier groups avoid later lower closures
        for (int k = 0; k < fam.size(); ++k)
            for (int kp = 0; kp < k; ++kp)
                CHECK((fam.group_messages[kp] & fam.lower_closure[k]) == 0);
    }
}
