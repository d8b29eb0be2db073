#include "crngnet/access_structure.hpp"

#include <algorithm>
#include <stdexcept>

namespace crngnet {

namespace mask {

std::vector<int> bits(std::uint64_t m) {
    std::vector<int> out;
    while (m) {
        const int b = std::countr_zero(m);
        out.push_back(b);
        m &= m - 1;
    }
    return out;
}

}  // namespace mask

namespace {

std::map<std::string, int> index_labels(const std::vector<std::string>& labels,
                                        const char* what) {
    std::map<std::string, int> idx;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i].empty()) throw std::invalid_argument(std::string(what) + " label is empty");
        if (!idx.emplace(labels[i], static_cast<int>(i)).second)
            throw std::invalid_argument(std::string(what) + " label repeated: " + labels[i]);
    }
    return idx;
}

}  // namespace

AccessStructure AccessStructure::make(
    std::vector<std::string> messages, std::vector<std::string> encoders,
    std::vector<std::string> decoders,
    const std::vector<std::pair<std::string, std::string>>& arcs,
    const std::map<std::string, std::vector<std::string>>& demands) {
    AccessStructure a;
    if (messages.empty()) throw std::invalid_argument("message set is empty");
    if (encoders.empty()) throw std::invalid_argument("encoder set is empty");
    if (messages.size() > 64) throw std::invalid_argument("at most 64 messages supported");
    if (encoders.size() > 32) throw std::invalid_argument("at most 32 encoders supported");

    a.messages_ = std::move(messages);
    a.encoders_ = std::move(encoders);
    a.decoders_ = std::move(decoders);
    a.message_idx_ = index_labels(a.messages_, "message");
    a.encoder_idx_ = index_labels(a.encoders_, "encoder");
    a.decoder_idx_ = index_labels(a.decoders_, "decoder");

    a.reader_sets_.assign(a.messages_.size(), 0);
    a.message_sets_.assign(a.encoders_.size(), 0);
    for (const auto& [s_label, i_label] : arcs) {
        auto si = a.message_idx_.find(s_label);
        if (si == a.message_idx_.end())
            throw std::invalid_argument("arc references unknown message: " + s_label);
        auto ii = a.encoder_idx_.find(i_label);
        if (ii == a.encoder_idx_.end())
            throw std::invalid_argument("arc (" + s_label + ", " + i_label +
                                        ") references unknown encoder: " + i_label);
        a.reader_sets_[si->second] |= EncoderSet{1} << ii->second;
        a.message_sets_[ii->second] |= MessageSet{1} << si->second;
    }
    for (std::size_t s = 0; s < a.messages_.size(); ++s)
        if (a.reader_sets_[s] == 0)
            throw std::invalid_argument("message has no encoder arc and cannot be encoded: " +
                                        a.messages_[s]);

    a.demands_.assign(a.decoders_.size(), 0);
    for (const auto& [j_label, wanted] : demands) {
        auto ji = a.decoder_idx_.find(j_label);
        if (ji == a.decoder_idx_.end())
            throw std::invalid_argument("demand references unknown decoder: " + j_label);
        for (const auto& s_label : wanted) {
            auto si = a.message_idx_.find(s_label);
            if (si == a.message_idx_.end())
                throw std::invalid_argument("decoder " + j_label +
                                            " demands unknown message: " + s_label);
            a.demands_[ji->second] |= MessageSet{1} << si->second;
        }
    }
    for (std::size_t j = 0; j < a.decoders_.size(); ++j)
        if (a.demands_[j] == 0)
            throw std::invalid_argument("decoder has an empty demand: " + a.decoders_[j]);
    return a;
}

int AccessStructure::message_index(const std::string& label) const {
    auto it = message_idx_.find(label);
    if (it == message_idx_.end()) throw std::invalid_argument("unknown message id: " + label);
    return it->second;
}

int AccessStructure::encoder_index(const std::string& label) const {
    auto it = encoder_idx_.find(label);
    if (it == encoder_idx_.end()) throw std::invalid_argument("unknown encoder id: " + label);
    return it->second;
}

int AccessStructure::decoder_index(const std::string& label) const {
    auto it = decoder_idx_.find(label);
    if (it == decoder_idx_.end()) throw std::invalid_argument("unknown decoder id: " + label);
    return it->second;
}

EncoderSet AccessStructure::encoders_of_message(int s) const {
    if (s < 0 || s >= message_count()) throw std::invalid_argument("message index out of range");
    return reader_sets_[s];
}

MessageSet AccessStructure::messages_of_encoder(int i) const {
    if (i < 0 || i >= encoder_count()) throw std::invalid_argument("encoder index out of range");
    return message_sets_[i];
}

std::set<std::string> AccessStructure::encoders_of_message(const std::string& s) const {
    std::set<std::string> out;
    for (int i : mask::bits(encoders_of_message(message_index(s)))) out.insert(encoders_[i]);
    return out;
}

std::set<std::string> AccessStructure::messages_of_encoder(const std::string& i) const {
    std::set<std::string> out;
    for (int s : mask::bits(messages_of_encoder(encoder_index(i)))) out.insert(messages_[s]);
    return out;
}

std::string AccessStructure::message_set_labels(MessageSet m) const {
    std::string out = "{";
    bool first = true;
    for (int s : mask::bits(m)) {
        if (!first) out += ",";
        out += messages_[s];
        first = false;
    }
    return out + "}";
}

std::string AccessStructure::encoder_set_labels(EncoderSet e) const {
    std::string out = "{";
    bool first = true;
    for (int i : mask::bits(e)) {
        if (!first) out += ",";
        out += encoders_[i];
        first = false;
    }
    return out + "}";
}

std::map<EncoderSet, MessageSet> message_groups(const AccessStructure& a) {
    std::map<EncoderSet, MessageSet> groups;
    for (int s = 0; s < a.message_count(); ++s)
        groups[a.encoders_of_message(s)] |= MessageSet{1} << s;
    return groups;
}

std::vector<EncoderSet> linear_extension(const std::vector<EncoderSet>& family,
                                         unsigned universe_size) {
    // bucket by cardinality, then concatenate largest-cardinality bucket first
    std::vector<std::vector<EncoderSet>> buckets(universe_size + 1);
    for (EncoderSet m : family) {
        const unsigned c = mask::count(m);
        if (c > universe_size) throw std::invalid_argument("family member exceeds universe");
        buckets[c].push_back(m);
    }
    std::vector<EncoderSet> out;
    out.reserve(family.size());
    for (unsigned c = universe_size + 1; c-- > 0;)
        out.insert(out.end(), buckets[c].begin(), buckets[c].end());
    return out;
}

SortedFamily SortedFamily::build(const AccessStructure& a) {
    const auto groups = message_groups(a);
    std::vector<EncoderSet> family;
    family.reserve(groups.size());
    for (const auto& [enc, _] : groups) family.push_back(enc);

    SortedFamily fam;
    fam.groups = linear_extension(family, static_cast<unsigned>(a.encoder_count()));
    fam.group_messages.reserve(fam.groups.size());
    for (EncoderSet g : fam.groups) fam.group_messages.push_back(groups.at(g));

    // upper closures by the forward double loop over the sorted list
    const int n = fam.size();
    fam.upper_closure.assign(n, 0);
    for (int k = 0; k < n; ++k)
        for (int kp = 0; kp < k; ++kp)
            if (mask::proper_subset(fam.groups[k], fam.groups[kp]))
                fam.upper_closure[k] |= fam.group_messages[kp];

    fam.lower_closure.assign(n, 0);
    for (int k = 0; k < n; ++k)
        for (int kp = 0; kp < n; ++kp)
            if (mask::subset(fam.groups[kp], fam.groups[k]))
                fam.lower_closure[k] |= fam.group_messages[kp];
    return fam;
}

int SortedFamily::group_of_message(int s) const {
    const MessageSet bit = MessageSet{1} << s;
    for (int k = 0; k < size(); ++k)
        if (group_messages[k] & bit) return k;
    throw std::invalid_argument("message belongs to no group");
}

bool ValidationReport::all_pass() const {
    return std::all_of(entries.begin(), entries.end(),
                       [](const ValidationEntry& e) { return e.pass; });
}

ValidationReport validate(const SortedFamily& fam, const AccessStructure& a) {
    ValidationReport rep;
    auto record = [&rep](std::string check, bool pass, std::string witness) {
        rep.entries.push_back({std::move(check), pass, pass ? "" : std::move(witness)});
    };

    const MessageSet all_messages =
        a.message_count() == 64 ? ~MessageSet{0} : (MessageSet{1} << a.message_count()) - 1;

    // groups cover every message
    MessageSet covered = 0;
    for (MessageSet g : fam.group_messages) covered |= g;
    record("group-union-covers-messages", covered == all_messages,
           "uncovered " + a.message_set_labels(all_messages & ~covered));

    // groups are pairwise disjoint
    {
        bool pass = true;
        std::string witness;
        for (int k = 0; k < fam.size() && pass; ++k)
            for (int kp = k + 1; kp < fam.size(); ++kp)
                if (fam.group_messages[k] & fam.group_messages[kp]) {
                    pass = false;
                    witness = "groups " + a.encoder_set_labels(fam.groups[k]) + " and " +
                              a.encoder_set_labels(fam.groups[kp]) + " share " +
                              a.message_set_labels(fam.group_messages[k] & fam.group_messages[kp]);
                    break;
                }
        record("groups-pairwise-disjoint", pass, witness);
    }

    // each group is disjoint from its upper closure
    {
        bool pass = true;
        std::string witness;
        for (int k = 0; k < fam.size(); ++k)
            if (fam.group_messages[k] & fam.upper_closure[k]) {
                pass = false;
                witness = "group " + a.encoder_set_labels(fam.groups[k]);
                break;
            }
        record("group-disjoint-from-upper-closure", pass, witness);
    }

    // common messages of the encoders in I_k equal group + upper closure
    {
        bool pass = true;
        std::string witness;
        for (int k = 0; k < fam.size(); ++k) {
            MessageSet common = all_messages;
            for (int i : mask::bits(fam.groups[k])) common &= a.messages_of_encoder(i);
            if (common != (fam.group_messages[k] | fam.upper_closure[k])) {
                pass = false;
                witness = "group " + a.encoder_set_labels(fam.groups[k]) + ": common " +
                          a.message_set_labels(common) + " != " +
                          a.message_set_labels(fam.group_messages[k] | fam.upper_closure[k]);
                break;
            }
        }
        record("common-messages-identity", pass, witness);
    }

    // every encoder's message set is the union of its groups
    {
        bool pass = true;
        std::string witness;
        for (int i = 0; i < a.encoder_count(); ++i) {
            MessageSet from_groups = 0;
            for (int k = 0; k < fam.size(); ++k)
                if (fam.groups[k] & (EncoderSet{1} << i)) from_groups |= fam.group_messages[k];
            if (from_groups != a.messages_of_encoder(i)) {
                pass = false;
                witness = "encoder " + a.encoder_labels()[i];
                break;
            }
        }
        record("encoder-union-identity", pass, witness);
    }

    // order property: a proper subset never precedes its superset
    {
        bool pass = true;
        std::string witness;
        for (int k = 0; k < fam.size() && pass; ++k)
            for (int kp = 0; kp < fam.size(); ++kp)
                if (mask::proper_subset(fam.groups[k], fam.groups[kp]) && kp >= k) {
                    pass = false;
                    witness = a.encoder_set_labels(fam.groups[k]) + " at position " +
                              std::to_string(k) + " precedes superset " +
                              a.encoder_set_labels(fam.groups[kp]) + " at " + std::to_string(kp);
                    break;
                }
        record("linear-extension-order", pass, witness);
    }

    // earlier groups stay clear of later lower closures
    {
        bool pass = true;
        std::string witness;
        for (int k = 0; k < fam.size() && pass; ++k)
            for (int kp = 0; kp < k; ++kp)
                if (fam.group_messages[kp] & fam.lower_closure[k]) {
                    pass = false;
                    witness = "group " + a.encoder_set_labels(fam.groups[kp]) +
                              " intersects lower closure of " +
                              a.encoder_set_labels(fam.groups[k]);
                    break;
                }
        record("predecessor-outside-lower-closure", pass, witness);
    }
    return rep;
}

}  // namespace crngnet
