#ifndef CRNGNET_EXPERIMENT_HPP
#define CRNGNET_EXPERIMENT_HPP

#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "crngnet/access_structure.hpp"
#include "crngnet/codec.hpp"
#include "crngnet/rate_region.hpp"

namespace crngnet {

struct RunSpec {
    std::uint64_t trials = 100;
    std::uint64_t seed = 1;
    unsigned threads = 1;
    DecodeMode mode = DecodeMode::stochastic;
    double epsilon = 0.05;
    double tolerance = 1e-9;
    bool trial_log = false;
    // region command: R value per message label, one entry per tested point
    std::vector<std::map<std::string, double>> rate_points;
};

struct CodeSpec {
    unsigned n = 1;
    unsigned q = 2;
    std::vector<unsigned> l_f, l_g;  // per message index
    HashEnsembleSpec::Kind ensemble_kind = HashEnsembleSpec::Kind::uniform_matrix;
    unsigned column_degree = 0;                  // sparse kind, 0 = default
    std::optional<std::vector<Word>> cosets;     // explicit per message, else seeded
    std::optional<std::vector<AlphaBeta>> hash_params;  // per message override
};

struct ExperimentSpec {
    AccessStructure access;
    SortedFamily fam;
    std::optional<JointSourceSpec> source;
    std::optional<ChannelModel> channel;
    std::vector<ConditionalKernel> encoder_inputs;  // present iff channel present
    std::optional<CodeSpec> code;
    RunSpec run;
    std::string canonical_text;
    std::string config_hash;
};

struct SpecParse {
    std::optional<ExperimentSpec> spec;
    std::vector<std::string> errors;
};

// Full referential and numeric validation; errors are collected, not thrown.
SpecParse validate_spec(const std::string& config_text);

// Overrides from the command line merged into the run block before hashing.
std::string apply_overrides(const std::string& config_text,
                            std::optional<std::uint64_t> trials,
                            std::optional<std::uint64_t> seed, std::optional<unsigned> threads);

enum class Command { verify, region, simulate, bounds };
Command parse_command(const std::string& name);

struct ResultRecord {
    std::string config_hash;
    std::string command;
    std::string timestamp;  // kept out of the payload so reruns compare equal
    nlohmann::json payload;
    std::vector<std::vector<std::string>> csv;  // first row is the header
    std::vector<std::string> trial_log;
};

ResultRecord run(Command cmd, const ExperimentSpec& spec);

// Samples the per-message maps and coset values for this spec.
Codec build_codec(const ExperimentSpec& spec);

std::string format_csv(const std::vector<std::vector<std::string>>& rows);
std::string fnv1a_hex(const std::string& text);
std::string format_sig(double v);  // 12 significant digits

}  // namespace crngnet

#endif  // CRNGNET_EXPERIMENT_HPP
