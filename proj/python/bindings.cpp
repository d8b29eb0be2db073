#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "crngnet/experiment.hpp"

namespace py = pybind11;
using namespace crngnet;

namespace {

// commands return the full result record as a JSON string; the python
// package turns it into plain dicts
std::string run_command(const std::string& command, const std::string& config_text) {
    const SpecParse parsed = validate_spec(config_text);
    if (!parsed.spec) {
        std::string all = "config rejected:";
        for (const auto& e : parsed.errors) all += "\n  " + e;
        throw std::invalid_argument(all);
    }
    const ResultRecord rec = run(parse_command(command), *parsed.spec);
    nlohmann::json out;
    out["config_hash"] = rec.config_hash;
    out["command"] = rec.command;
    out["timestamp"] = rec.timestamp;
    out["payload"] = rec.payload;
    out["csv"] = format_csv(rec.csv);
    if (!rec.trial_log.empty()) out["trial_log"] = rec.trial_log;
    return out.dump();
}

std::vector<std::string> validate_config(const std::string& config_text) {
    return validate_spec(config_text).errors;
}

py::tuple hash_parameters(const std::string& kind, unsigned rows, unsigned cols, unsigned q,
                          unsigned column_degree) {
    HashEnsembleSpec spec;
    if (kind == "uniform") spec.kind = HashEnsembleSpec::Kind::uniform_matrix;
    else if (kind == "sparse") spec.kind = HashEnsembleSpec::Kind::sparse_matrix;
    else throw std::invalid_argument("kind must be uniform or sparse");
    spec.rows = rows;
    spec.cols = cols;
    spec.field_order = q;
    spec.column_degree = column_degree;
    const HashProperty hp = hash_alpha_beta(spec);
    return py::make_tuple(hp.alpha, hp.beta);
}

double conditional_entropy(const std::vector<double>& probs, const std::vector<unsigned>& sizes,
                           const std::vector<int>& target, const std::vector<int>& given) {
    FiniteDist d;
    d.space.sizes = sizes;
    d.p = probs;
    d.validate(1e-6);
    std::uint64_t t = 0, g = 0;
    for (int f : target) t |= std::uint64_t{1} << f;
    for (int f : given) g |= std::uint64_t{1} << f;
    return conditional_entropy_bits(d, t, g);
}

std::vector<std::vector<int>> linear_extension_py(const std::vector<std::vector<int>>& family,
                                                  unsigned universe) {
    std::vector<EncoderSet> masks;
    for (const auto& members : family) {
        EncoderSet m = 0;
        for (int b : members) {
            if (b < 0 || b >= static_cast<int>(universe))
                throw std::invalid_argument("family member outside the universe");
            m |= EncoderSet{1} << b;
        }
        masks.push_back(m);
    }
    std::vector<std::vector<int>> out;
    for (EncoderSet m : linear_extension(masks, universe)) out.push_back(mask::bits(m));
    return out;
}

py::tuple decision_comparison(const std::vector<std::vector<double>>& posterior_rows,
                              const std::vector<double>& prior) {
    if (posterior_rows.empty()) throw std::invalid_argument("posterior must have rows");
    ConditionalKernel k;
    k.given.sizes = {static_cast<unsigned>(posterior_rows.size())};
    k.out.sizes = {static_cast<unsigned>(posterior_rows[0].size())};
    for (const auto& row : posterior_rows) {
        if (row.size() != posterior_rows[0].size())
            throw std::invalid_argument("posterior rows must have equal width");
        k.table.insert(k.table.end(), row.begin(), row.end());
    }
    k.finalize();
    k.validate_rows(1e-6);
    FiniteDist pv;
    pv.space.sizes = {static_cast<unsigned>(prior.size())};
    pv.p = prior;
    pv.validate(1e-6);
    const DecisionComparison cmp = stochastic_vs_map_ratio(k, pv);
    return py::make_tuple(cmp.stochastic_error, cmp.map_error, cmp.ratio);
}

}  // namespace

PYBIND11_MODULE(_crngnet, m) {
    m.doc() = "channel codes for relayless networks with general message access";

    m.def("run_command", &run_command, py::arg("command"), py::arg("config"),
          "run verify/region/simulate/bounds on a JSON config; returns a JSON string");
    m.def("validate_config", &validate_config, py::arg("config"),
          "list of validation errors, empty when the config is well formed");
    m.def("hash_parameters", &hash_parameters, py::arg("kind"), py::arg("rows"), py::arg("cols"),
          py::arg("q") = 2, py::arg("column_degree") = 0,
          "exact (alpha, beta) of a matrix ensemble by full enumeration");
    m.def("conditional_entropy", &conditional_entropy, py::arg("probs"), py::arg("sizes"),
          py::arg("target"), py::arg("given"),
          "Shannon conditional entropy in bits over a product-alphabet joint");
    m.def("linear_extension", &linear_extension_py, py::arg("family"), py::arg("universe"),
          "order subsets so that none precedes a proper superset");
    m.def("decision_comparison", &decision_comparison, py::arg("posterior"), py::arg("prior"),
          "(sampling error, maximum-posterior error, ratio) of the two decision rules");
}
