#ifndef CRNGNET_ACCESS_STRUCTURE_HPP
#define CRNGNET_ACCESS_STRUCTURE_HPP

#include <bit>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace crngnet {

// Bitmask sets: encoder subsets in 32 bits, message subsets in 64.
using EncoderSet = std::uint32_t;
using MessageSet = std::uint64_t;

namespace mask {

inline bool subset(std::uint64_t a, std::uint64_t b) { return (a & ~b) == 0; }
inline bool proper_subset(std::uint64_t a, std::uint64_t b) { return a != b && subset(a, b); }
inline unsigned count(std::uint64_t a) { return static_cast<unsigned>(std::popcount(a)); }

// dense indices of the set bits, ascending
std::vector<int> bits(std::uint64_t m);

}  // namespace mask

// Which encoder reads which message, plus what each decoder must reproduce.
// Labels are opaque strings; all set algebra runs on dense indices.
class AccessStructure {
  public:
    static AccessStructure make(std::vector<std::string> messages,
                                std::vector<std::string> encoders,
                                std::vector<std::string> decoders,
                                const std::vector<std::pair<std::string, std::string>>& arcs,
                                const std::map<std::string, std::vector<std::string>>& demands);

    int message_count() const { return static_cast<int>(messages_.size()); }
    int encoder_count() const { return static_cast<int>(encoders_.size()); }
    int decoder_count() const { return static_cast<int>(decoders_.size()); }

    const std::vector<std::string>& message_labels() const { return messages_; }
    const std::vector<std::string>& encoder_labels() const { return encoders_; }
    const std::vector<std::string>& decoder_labels() const { return decoders_; }

    int message_index(const std::string& label) const;  // throws on unknown label
    int encoder_index(const std::string& label) const;
    int decoder_index(const std::string& label) const;

    // the encoders reading message s / the messages read by encoder i
    EncoderSet encoders_of_message(int s) const;
    MessageSet messages_of_encoder(int i) const;
    MessageSet demand(int j) const { return demands_[j]; }

    // label-level views of the same
    std::set<std::string> encoders_of_message(const std::string& s) const;
    std::set<std::string> messages_of_encoder(const std::string& i) const;

    std::string message_set_labels(MessageSet m) const;  // "{a,b}" for reports
    std::string encoder_set_labels(EncoderSet e) const;

  private:
    std::vector<std::string> messages_, encoders_, decoders_;
    std::map<std::string, int> message_idx_, encoder_idx_, decoder_idx_;
    std::vector<EncoderSet> reader_sets_;   // per message
    std::vector<MessageSet> message_sets_;  // per encoder
    std::vector<MessageSet> demands_;       // per decoder
};

// Encoder subsets with a nonempty message group, mapped to those groups.
// Keys partition the message set.
std::map<EncoderSet, MessageSet> message_groups(const AccessStructure& a);

// Orders `family` so that no set ever precedes a proper superset: buckets by
// cardinality, largest first; ties keep bucket insertion order.
std::vector<EncoderSet> linear_extension(const std::vector<EncoderSet>& family,
                                         unsigned universe_size);

// The group family in linear-extension order together with the derived
// message sets each downstream stage needs.
struct SortedFamily {
    std::vector<EncoderSet> groups;           // I_k
    std::vector<MessageSet> group_messages;   // messages whose reader set is exactly I_k
    std::vector<MessageSet> upper_closure;    // messages of strict supersets of I_k
    std::vector<MessageSet> lower_closure;    // messages of subsets of I_k (incl. I_k)

    static SortedFamily build(const AccessStructure& a);

    int size() const { return static_cast<int>(groups.size()); }
    int group_of_message(int s) const;  // index k with message s in group k
};

struct ValidationEntry {
    std::string check;
    bool pass;
    std::string witness;  // empty when passing
};

struct ValidationReport {
    std::vector<ValidationEntry> entries;
    bool all_pass() const;
};

// Exact recheck of every structural identity the family is built on.
ValidationReport validate(const SortedFamily& fam, const AccessStructure& a);

}  // namespace crngnet

#endif  // CRNGNET_ACCESS_STRUCTURE_HPP
