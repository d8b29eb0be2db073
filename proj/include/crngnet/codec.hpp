#ifndef CRNGNET_CODEC_HPP
#define CRNGNET_CODEC_HPP

#include <memory>
#include <optional>
#include <variant>
#include <vector>

#include "crngnet/access_structure.hpp"
#include "crngnet/gf.hpp"
#include "crngnet/hash_ensemble.hpp"
#include "crngnet/prob.hpp"
#include "crngnet/rng.hpp"

namespace crngnet {

// Per-letter channel from all encoder inputs to all decoder outputs.
struct ChannelModel {
    enum class Preset { table, noiseless, bsc, bec, adder };

    Preset preset = Preset::table;
    double p = 0.0;                 // bsc / bec flip or erasure probability
    std::vector<unsigned> x_sizes;  // per encoder
    std::vector<unsigned> y_sizes;  // per decoder
    std::vector<double> table;      // [x_index * y_total + y_index], table preset only

    void finalize();
    FactorSpace x_space() const { return FactorSpace{x_sizes}; }
    FactorSpace y_space() const { return FactorSpace{y_sizes}; }

    // marginal law of decoder j's letter given the input tuple
    double y_marginal_prob(int j, std::uint64_t x_idx, unsigned yj) const;
    // one letter for every decoder, drawn jointly
    std::vector<unsigned> sample(std::uint64_t x_idx, RngStream& rng) const;

  private:
    std::vector<std::vector<double>> marginals_;  // table preset: per decoder [x][yj]
};

// The maps, coset point and prepared solvers for one message.
struct MessageCode {
    LinearMap f;  // block -> codeword side, rows l_f
    LinearMap g;  // block -> message side, rows l_g
    Word coset_value;

    std::shared_ptr<const AffineSolver> f_solver;   // for decoding cosets
    std::shared_ptr<const AffineSolver> fg_solver;  // stacked, for encoding cosets

    MessageCode(LinearMap f_, LinearMap g_, Word c);
};

struct CodeConfig {
    unsigned n = 1;
    Field field{2};
    std::uint64_t seed = 0;
    std::vector<MessageCode> per_message;

    double rate_r(int s) const;  // codeword-side bits per letter
    double rate_R(int s) const;  // message-side bits per letter
};

enum class DecodeMode { stochastic, map };

struct EncoderError {
    int group = -1;  // restriction had zero mass at this group
};

// Exact restricted distribution of one group's blocks.
struct CrngDist {
    std::vector<std::vector<Word>> support;  // candidate -> word per group message
    std::vector<double> prob;
};

struct DecoderDegenerate {};

struct DecoderDist {
    std::vector<std::vector<Word>> support;  // candidate -> word per demanded message
    std::vector<double> prob;
};

struct EncoderRealization {
    std::vector<Word> z;                          // per message
    std::vector<std::vector<std::uint32_t>> x;    // per encoder, n letters
    bool error = false;
    int error_group = -1;
};

struct DecodeResult {
    bool degenerate = false;
    std::vector<Word> z_hat;  // per demanded message
    std::vector<Word> m_hat;  // g applied to z_hat
};

struct TrialOutcome {
    bool error = false;
    bool encoder_error = false;
    int encoder_error_group = -1;
    bool decoder_degenerate = false;
    std::vector<std::uint8_t> decoder_ok;  // per decoder
};

struct SimResult {
    std::uint64_t trials = 0;
    std::uint64_t errors = 0;
    std::uint64_t encoder_errors = 0;
    std::uint64_t degenerate = 0;
    double p_hat = 0.0;
    double wilson_lo = 0.0;
    double wilson_hi = 1.0;
};

SimResult wilson_summary(std::uint64_t errors, std::uint64_t trials);

// Per-letter distributions induced by source, encoder inputs and channel:
// the joint over all message letters, and per decoder the joint over its
// demanded message letters and its channel output letter.
struct LetterModel {
    FiniteDist joint_z;
    std::vector<FiniteDist> decoder_joints;
};

LetterModel build_letter_model(const AccessStructure& a, const SortedFamily& fam,
                               const JointSourceSpec& source,
                               const std::vector<ConditionalKernel>& encoder_inputs,
                               const ChannelModel& channel);

// The full coding pipeline for one experiment: group samplers in
// linear-extension order, per-encoder channel inputs, per-decoder coset
// posteriors.  Immutable after construction; trials are independent.
class Codec {
  public:
    Codec(AccessStructure a, SortedFamily fam, JointSourceSpec source,
          std::vector<ConditionalKernel> encoder_inputs,  // per encoder
          ChannelModel channel, CodeConfig config);

    const AccessStructure& access() const { return a_; }
    const SortedFamily& family() const { return fam_; }
    const CodeConfig& config() const { return config_; }
    const FiniteDist& letter_joint_z() const { return letter_joint_z_; }
    // per decoder: letter joint over [demanded messages ascending..., y_j]
    const FiniteDist& decoder_letter_joint(int j) const { return decoder_joints_[j]; }

    // Restricted group distribution given realized upper-closure blocks
    // (ascending message order).  Coset values and message words are per group
    // message, ascending.
    std::variant<CrngDist, EncoderError> encoder_group_dist(
        int k, const std::vector<Word>& z_upper, const std::vector<Word>& coset_values,
        const std::vector<Word>& message_words) const;

    // Runs every group in order with the configured coset values, then draws
    // the channel inputs.  Shared groups are sampled once.
    EncoderRealization generate_encoder_inputs(const std::vector<Word>& messages,
                                               std::uint64_t trial_index) const;

    // Exact restricted posterior of decoder j given its channel output block.
    std::variant<DecoderDist, DecoderDegenerate> decoder_posterior(
        int j, const std::vector<std::uint32_t>& y) const;

    DecodeResult decode(int j, const std::vector<std::uint32_t>& y, DecodeMode mode,
                        RngStream& rng) const;

    TrialOutcome run_trial(std::uint64_t trial_index, DecodeMode mode) const;

    SimResult simulate(std::uint64_t trials, unsigned threads, DecodeMode mode,
                       std::vector<TrialOutcome>* log = nullptr) const;

  private:
    struct GroupWeights {
        std::vector<double> w;
        double total = 0.0;
        std::vector<CosetEnumerator> cosets;     // per group message
        std::vector<std::uint64_t> coset_sizes;  // per group message
        std::uint64_t candidates = 0;
    };

    std::optional<GroupWeights> group_weights(int k, const std::vector<std::uint32_t>& upper_idx,
                                              const std::vector<Word>& coset_values,
                                              const std::vector<Word>& message_words) const;
    std::vector<Word> group_member(const GroupWeights& gw, std::uint64_t idx) const;

    AccessStructure a_;
    SortedFamily fam_;
    JointSourceSpec source_;
    std::vector<ConditionalKernel> encoder_inputs_;
    ChannelModel channel_;
    CodeConfig config_;

    FiniteDist letter_joint_z_;
    std::vector<FiniteDist> decoder_joints_;      // per decoder
    std::vector<std::vector<double>> posterior_;  // per decoder: [y][zD] = mu(zD | y)
    std::vector<std::uint64_t> zd_counts_;        // per decoder: product of demanded alphabets
};

struct DecisionComparison {
    double stochastic_error = 0.0;
    double map_error = 0.0;
    double ratio = 1.0;
};

// Error of the posterior-sampling rule vs the maximum-posterior rule under a
// common observation law; the ratio never exceeds 2.
DecisionComparison stochastic_vs_map_ratio(const ConditionalKernel& posterior,
                                           const FiniteDist& prior);

}  // namespace crngnet

#endif  // CRNGNET_CODEC_HPP
