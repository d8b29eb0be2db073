#ifndef CRNGNET_TEST_SUPPORT_HPP
#define CRNGNET_TEST_SUPPORT_HPP

#include <string>
#include <vector>

#include "crngnet/access_structure.hpp"
#include "crngnet/rng.hpp"

namespace crngnet::testing {

// broadcast channel with a common message: one encoder reads everything
inline AccessStructure broadcast_common() {
    return AccessStructure::make(
        {"1", "2", "12"}, {"1"}, {"1", "2"},
        {{"1", "1"}, {"2", "1"}, {"12", "1"}},
        {{"1", {"1", "12"}}, {"2", {"2", "12"}}});
}

// two-input multiple access with a common message
inline AccessStructure mac_common() {
    return AccessStructure::make(
        {"1", "2", "12"}, {"1", "2"}, {"1", "2"},
        {{"1", "1"}, {"2", "2"}, {"12", "1"}, {"12", "2"}},
        {{"1", {"1", "12"}}, {"2", {"2", "12"}}});
}

// three-input multiple access with partially common messages
inline AccessStructure mac_three() {
    return AccessStructure::make(
        {"1", "3", "12", "23", "123"}, {"1", "2", "3"}, {"1"},
        {{"1", "1"},
         {"3", "3"},
         {"12", "1"},
         {"12", "2"},
         {"23", "2"},
         {"23", "3"},
         {"123", "1"},
         {"123", "2"},
         {"123", "3"}},
        {{"1", {"1", "3", "12", "23", "123"}}});
}

// random structure with every message readable by someone
inline AccessStructure random_structure(RngStream& rng, int max_messages = 6,
                                        int max_encoders = 4) {
    const int n_msg = 1 + static_cast<int>(rng.below(max_messages));
    const int n_enc = 1 + static_cast<int>(rng.below(max_encoders));
    std::vector<std::string> messages, encoders;
    for (int s = 0; s < n_msg; ++s) messages.push_back("m" + std::to_string(s));
    for (int i = 0; i < n_enc; ++i) encoders.push_back("e" + std::to_string(i));

    std::vector<std::pair<std::string, std::string>> arcs;
    for (int s = 0; s < n_msg; ++s) {
        bool any = false;
        for (int i = 0; i < n_enc; ++i) {
            if (rng.below(100) < 45) {
                arcs.emplace_back(messages[s], encoders[i]);
                any = true;
            }
        }
        if (!any) arcs.emplace_back(messages[s], encoders[rng.below(n_enc)]);
    }

    // one decoder demanding a random nonempty subset
    std::vector<std::string> demand;
    for (int s = 0; s < n_msg; ++s)
        if (rng.below(2)) demand.push_back(messages[s]);
    if (demand.empty()) demand.push_back(messages[rng.below(n_msg)]);
    return AccessStructure::make(messages, encoders, {"d0"}, arcs, {{"d0", demand}});
}

}  // namespace crngnet::testing

#endif  // CRNGNET_TEST_SUPPORT_HPP
