#include "crngnet/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace crngnet {

using nlohmann::json;

namespace {

// ---- parsing helpers ----------------------------------------------------

struct Errors {
    std::vector<std::string> list;
    void add(const std::string& msg) { list.push_back(msg); }
    bool ok() const { return list.empty(); }
};

std::vector<std::string> string_list(const json& j, const std::string& where, Errors& errs) {
    std::vector<std::string> out;
    if (!j.is_array()) {
        errs.add(where + " must be an array of strings");
        return out;
    }
    for (const auto& e : j) {
        if (e.is_string()) out.push_back(e.get<std::string>());
        else errs.add(where + " contains a non-string entry");
    }
    return out;
}

bool want_unsigned(const json& j, const std::string& where, std::uint64_t& out, Errors& errs) {
    if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0)) {
        errs.add(where + " must be a nonnegative integer");
        return false;
    }
    out = j.get<std::uint64_t>();
    return true;
}

bool want_double(const json& j, const std::string& where, double& out, Errors& errs) {
    if (!j.is_number()) {
        errs.add(where + " must be a number");
        return false;
    }
    out = j.get<double>();
    return true;
}

std::optional<AccessStructure> parse_access(const json& root, Errors& errs) {
    if (!root.contains("access_structure")) {
        errs.add("missing access_structure block");
        return std::nullopt;
    }
    const json& a = root["access_structure"];
    auto messages = string_list(a.value("messages", json::array()), "access_structure.messages", errs);
    auto encoders = string_list(a.value("encoders", json::array()), "access_structure.encoders", errs);
    auto decoders = string_list(a.value("decoders", json::array()), "access_structure.decoders", errs);

    std::vector<std::pair<std::string, std::string>> arcs;
    if (!a.contains("arcs") || !a["arcs"].is_array()) {
        errs.add("access_structure.arcs must be an array of [message, encoder] pairs");
    } else {
        for (const auto& e : a["arcs"]) {
            if (!e.is_array() || e.size() != 2 || !e[0].is_string() || !e[1].is_string())
                errs.add("access_structure.arcs entry is not a [message, encoder] pair");
            else arcs.emplace_back(e[0].get<std::string>(), e[1].get<std::string>());
        }
    }
    std::map<std::string, std::vector<std::string>> demands;
    if (a.contains("demands")) {
        if (!a["demands"].is_object()) {
            errs.add("access_structure.demands must map decoders to message lists");
        } else {
            for (const auto& [dec, lst] : a["demands"].items())
                demands[dec] = string_list(lst, "demands[" + dec + "]", errs);
        }
    }
    if (!errs.ok()) return std::nullopt;
    try {
        return AccessStructure::make(messages, encoders, decoders, arcs, demands);
    } catch (const std::invalid_argument& e) {
        errs.add(std::string("access_structure: ") + e.what());
        return std::nullopt;
    }
}

std::optional<JointSourceSpec> parse_source(const json& root, const AccessStructure& access,
                                            const SortedFamily& fam, unsigned default_q,
                                            Errors& errs) {
    JointSourceSpec spec;
    spec.letter_sizes.assign(access.message_count(), default_q);
    if (!root.contains("source")) {
        // all groups uniform over the default alphabets
        for (int k = 0; k < fam.size(); ++k) {
            FactorSpace given, out;
            for (int s : mask::bits(fam.upper_closure[k])) given.sizes.push_back(spec.letter_sizes[s]);
            for (int s : mask::bits(fam.group_messages[k])) out.sizes.push_back(spec.letter_sizes[s]);
            spec.group_kernels.push_back(ConditionalKernel::uniform(given, out));
        }
        return spec;
    }
    const json& src = root["source"];
    if (src.contains("alphabets")) {
        if (!src["alphabets"].is_object()) {
            errs.add("source.alphabets must map messages to alphabet sizes");
            return std::nullopt;
        }
        for (const auto& [msg, size] : src["alphabets"].items()) {
            std::uint64_t v = 0;
            if (!want_unsigned(size, "source.alphabets[" + msg + "]", v, errs)) continue;
            try {
                spec.letter_sizes[access.message_index(msg)] = static_cast<unsigned>(v);
            } catch (const std::invalid_argument& e) {
                errs.add(std::string("source.alphabets: ") + e.what());
            }
        }
    }

    // collect group entries; unspecified groups default to uniform
    std::vector<std::optional<json>> per_group(fam.size());
    if (src.contains("groups")) {
        if (src["groups"].is_string() && src["groups"].get<std::string>() == "uniform") {
            // keep defaults
        } else if (!src["groups"].is_array()) {
            errs.add("source.groups must be an array or \"uniform\"");
        } else {
            for (const auto& g : src["groups"]) {
                auto encs = string_list(g.value("encoders", json::array()),
                                        "source.groups[].encoders", errs);
                EncoderSet m = 0;
                bool bad = false;
                for (const auto& e : encs) {
                    try {
                        m |= EncoderSet{1} << access.encoder_index(e);
                    } catch (const std::invalid_argument& ex) {
                        errs.add(std::string("source.groups: ") + ex.what());
                        bad = true;
                    }
                }
                if (bad) continue;
                int found = -1;
                for (int k = 0; k < fam.size(); ++k)
                    if (fam.groups[k] == m) found = k;
                if (found < 0) {
                    errs.add("source.groups: encoder set " + access.encoder_set_labels(m) +
                             " is not a group of this access structure");
                    continue;
                }
                if (per_group[found])
                    errs.add("source.groups: duplicate entry for " + access.encoder_set_labels(m));
                per_group[found] = g;
            }
        }
    }
    if (!errs.ok()) return std::nullopt;

    for (int k = 0; k < fam.size(); ++k) {
        FactorSpace given, out;
        for (int s : mask::bits(fam.upper_closure[k])) given.sizes.push_back(spec.letter_sizes[s]);
        for (int s : mask::bits(fam.group_messages[k])) out.sizes.push_back(spec.letter_sizes[s]);
        if (!per_group[k] || !per_group[k]->contains("table")) {
            if (per_group[k] && per_group[k]->contains("dist") &&
                (*per_group[k])["dist"].get<std::string>() != "uniform") {
                errs.add("source.groups: unknown dist for group " +
                         access.encoder_set_labels(fam.groups[k]));
                continue;
            }
            spec.group_kernels.push_back(ConditionalKernel::uniform(given, out));
            continue;
        }
        const json& tbl = (*per_group[k])["table"];
        ConditionalKernel kern;
        kern.given = given;
        kern.out = out;
        const std::uint64_t rows = given.total(), cols = out.total();
        if (!tbl.is_array() || tbl.size() != rows) {
            errs.add("source.groups table for " + access.encoder_set_labels(fam.groups[k]) +
                     " needs " + std::to_string(rows) + " rows");
            continue;
        }
        bool bad = false;
        for (const auto& row : tbl) {
            if (!row.is_array() || row.size() != cols) {
                errs.add("source.groups table row width must be " + std::to_string(cols));
                bad = true;
                break;
            }
            for (const auto& v : row) kern.table.push_back(v.get<double>());
        }
        if (bad) continue;
        kern.finalize();
        try {
            kern.validate_rows(1e-6);
        } catch (const std::invalid_argument& e) {
            errs.add("source group " + access.encoder_set_labels(fam.groups[k]) + ": " + e.what());
            continue;
        }
        // renormalize rows exactly
        for (std::uint64_t g = 0; g < kern.given_count(); ++g) {
            double sum = 0;
            for (std::uint64_t o = 0; o < kern.out_count(); ++o) sum += kern.at(g, o);
            for (std::uint64_t o = 0; o < kern.out_count(); ++o)
                kern.table[g * kern.out_count() + o] /= sum;
        }
        spec.group_kernels.push_back(std::move(kern));
    }
    if (!errs.ok()) return std::nullopt;
    return spec;
}

std::vector<ConditionalKernel> parse_encoder_inputs(const json& root,
                                                    const AccessStructure& access,
                                                    const std::vector<unsigned>& letter_sizes,
                                                    std::vector<unsigned>& x_sizes, Errors& errs) {
    std::vector<ConditionalKernel> kernels;
    x_sizes.assign(access.encoder_count(), 0);
    for (int i = 0; i < access.encoder_count(); ++i) {
        const std::string label = access.encoder_labels()[i];
        FactorSpace given;
        for (int s : mask::bits(access.messages_of_encoder(i)))
            given.sizes.push_back(letter_sizes[s]);
        json cfg;
        if (root.contains("encoder_inputs") && root["encoder_inputs"].contains(label))
            cfg = root["encoder_inputs"][label];
        else cfg = json{{"preset", "identity"}};

        const std::string preset = cfg.value("preset", cfg.contains("table") ? "table" : "identity");
        if (preset == "identity") {
            const std::uint64_t xt = given.total();
            ConditionalKernel k;
            k.given = given;
            k.out.sizes = {static_cast<unsigned>(xt)};
            k.table.assign(xt * xt, 0.0);
            for (std::uint64_t g = 0; g < xt; ++g) k.table[g * xt + g] = 1.0;
            k.finalize();
            x_sizes[i] = static_cast<unsigned>(xt);
            kernels.push_back(std::move(k));
        } else if (preset == "gf-add") {
            const unsigned q = given.sizes.empty() ? 2 : given.sizes[0];
            for (unsigned ls : given.sizes)
                if (ls != q) errs.add("encoder_inputs[" + label + "]: gf-add needs equal alphabets");
            ConditionalKernel k;
            k.given = given;
            k.out.sizes = {q};
            const std::uint64_t gt = given.total();
            k.table.assign(gt * q, 0.0);
            std::vector<unsigned> dig(given.sizes.size());
            for (std::uint64_t g = 0; g < gt; ++g) {
                given.digits(g, dig);
                unsigned sum = 0;
                for (unsigned d : dig) sum = (sum + d) % q;
                k.table[g * q + sum] = 1.0;
            }
            k.finalize();
            x_sizes[i] = q;
            kernels.push_back(std::move(k));
        } else if (preset == "table") {
            std::uint64_t alphabet = 0;
            if (!cfg.contains("alphabet") ||
                !want_unsigned(cfg["alphabet"], "encoder_inputs[" + label + "].alphabet", alphabet,
                               errs)) {
                errs.add("encoder_inputs[" + label + "]: table preset needs an alphabet size");
                continue;
            }
            ConditionalKernel k;
            k.given = given;
            k.out.sizes = {static_cast<unsigned>(alphabet)};
            const std::uint64_t gt = given.total();
            const json& tbl = cfg.value("table", json::array());
            if (!tbl.is_array() || tbl.size() != gt) {
                errs.add("encoder_inputs[" + label + "]: table needs " + std::to_string(gt) +
                         " rows");
                continue;
            }
            bool bad = false;
            for (const auto& row : tbl) {
                if (!row.is_array() || row.size() != alphabet) {
                    errs.add("encoder_inputs[" + label + "]: table row width must be " +
                             std::to_string(alphabet));
                    bad = true;
                    break;
                }
                for (const auto& v : row) k.table.push_back(v.get<double>());
            }
            if (bad) continue;
            k.finalize();
            try {
                k.validate_rows(1e-6);
            } catch (const std::invalid_argument& e) {
                errs.add("encoder_inputs[" + label + "]: " + e.what());
                continue;
            }
            x_sizes[i] = static_cast<unsigned>(alphabet);
            kernels.push_back(std::move(k));
        } else {
            errs.add("encoder_inputs[" + label + "]: unknown preset " + preset);
        }
    }
    return kernels;
}

std::optional<ChannelModel> parse_channel(const json& root, const AccessStructure& access,
                                          const std::vector<unsigned>& x_sizes, Errors& errs) {
    if (!root.contains("channel")) return std::nullopt;
    const json& ch = root["channel"];
    ChannelModel m;
    m.x_sizes = x_sizes;
    const std::string preset = ch.value("preset", ch.contains("table") ? "table" : "");
    if (preset == "noiseless") {
        m.preset = ChannelModel::Preset::noiseless;
        std::uint64_t xt = 1;
        for (unsigned xs : x_sizes) xt *= xs;
        m.y_sizes.assign(access.decoder_count(), static_cast<unsigned>(xt));
    } else if (preset == "bsc" || preset == "bec") {
        m.preset = preset == "bsc" ? ChannelModel::Preset::bsc : ChannelModel::Preset::bec;
        double p = 0;
        if (!want_double(ch.value("p", json(0.0)), "channel.p", p, errs)) return std::nullopt;
        m.p = p;
        m.y_sizes.assign(access.decoder_count(), preset == "bsc" ? 2u : 3u);
    } else if (preset == "binary-adder") {
        m.preset = ChannelModel::Preset::adder;
        m.y_sizes.assign(access.decoder_count(), static_cast<unsigned>(x_sizes.size()) + 1);
    } else if (preset == "table") {
        m.preset = ChannelModel::Preset::table;
        if (!ch.contains("outputs") || !ch["outputs"].is_object()) {
            errs.add("channel.outputs must map decoders to alphabet sizes");
            return std::nullopt;
        }
        m.y_sizes.assign(access.decoder_count(), 0);
        for (const auto& [dec, size] : ch["outputs"].items()) {
            std::uint64_t v = 0;
            if (!want_unsigned(size, "channel.outputs[" + dec + "]", v, errs)) continue;
            try {
                m.y_sizes[access.decoder_index(dec)] = static_cast<unsigned>(v);
            } catch (const std::invalid_argument& e) {
                errs.add(std::string("channel.outputs: ") + e.what());
            }
        }
        for (unsigned ys : m.y_sizes)
            if (ys == 0) errs.add("channel.outputs must cover every decoder");
        if (!errs.ok()) return std::nullopt;
        std::uint64_t xt = 1, yt = 1;
        for (unsigned xs : x_sizes) xt *= xs;
        for (unsigned ys : m.y_sizes) yt *= ys;
        const json& tbl = ch.value("table", json::array());
        if (!tbl.is_array() || tbl.size() != xt) {
            errs.add("channel.table needs " + std::to_string(xt) + " rows");
            return std::nullopt;
        }
        for (const auto& row : tbl) {
            if (!row.is_array() || row.size() != yt) {
                errs.add("channel.table row width must be " + std::to_string(yt));
                return std::nullopt;
            }
            for (const auto& v : row) m.table.push_back(v.get<double>());
        }
    } else {
        errs.add("channel: unknown preset " + preset);
        return std::nullopt;
    }
    try {
        m.finalize();
    } catch (const std::invalid_argument& e) {
        errs.add(std::string("channel: ") + e.what());
        return std::nullopt;
    }
    return m;
}

std::optional<CodeSpec> parse_code(const json& root, const AccessStructure& access, Errors& errs) {
    if (!root.contains("code")) return std::nullopt;
    const json& c = root["code"];
    CodeSpec spec;
    std::uint64_t n = 0, q = 2;
    if (!c.contains("n") || !want_unsigned(c["n"], "code.n", n, errs)) return std::nullopt;
    if (c.contains("q") && !want_unsigned(c["q"], "code.q", q, errs)) return std::nullopt;
    spec.n = static_cast<unsigned>(n);
    spec.q = static_cast<unsigned>(q);
    if (spec.n < 1) {
        errs.add("code.n must be at least 1");
        return std::nullopt;
    }
    if (!is_prime(spec.q) || spec.q > 257) {
        errs.add("code.q must be a prime at most 257");
        return std::nullopt;
    }
    const double log2q = std::log2(static_cast<double>(spec.q));

    spec.l_f.assign(access.message_count(), 0);
    spec.l_g.assign(access.message_count(), 0);
    if (!c.contains("per_message") || !c["per_message"].is_object()) {
        errs.add("code.per_message must map every message to dimensions or rates");
        return std::nullopt;
    }
    std::vector<bool> seen(access.message_count(), false);
    for (const auto& [msg, entry] : c["per_message"].items()) {
        int s = -1;
        try {
            s = access.message_index(msg);
        } catch (const std::invalid_argument& e) {
            errs.add(std::string("code.per_message: ") + e.what());
            continue;
        }
        seen[s] = true;
        auto dim_from_rate = [&](double rate) {
            return static_cast<unsigned>(std::llround(rate * spec.n / log2q));
        };
        if (entry.contains("l_f") || entry.contains("l_g")) {
            std::uint64_t lf = 0, lg = 0;
            want_unsigned(entry.value("l_f", json(0)), "code.per_message[" + msg + "].l_f", lf, errs);
            want_unsigned(entry.value("l_g", json(0)), "code.per_message[" + msg + "].l_g", lg, errs);
            spec.l_f[s] = static_cast<unsigned>(lf);
            spec.l_g[s] = static_cast<unsigned>(lg);
        } else {
            double r = 0, R = 0;
            want_double(entry.value("r", json(0.0)), "code.per_message[" + msg + "].r", r, errs);
            want_double(entry.value("R", json(0.0)), "code.per_message[" + msg + "].R", R, errs);
            if (r < 0 || R < 0) errs.add("code.per_message[" + msg + "]: rates must be nonnegative");
            spec.l_f[s] = dim_from_rate(r);
            spec.l_g[s] = dim_from_rate(R);
        }
        if (spec.l_f[s] > spec.n || spec.l_g[s] > spec.n)
            errs.add("code.per_message[" + msg + "]: map rows exceed the block length");
    }
    for (int s = 0; s < access.message_count(); ++s)
        if (!seen[s])
            errs.add("code.per_message missing entry for message " + access.message_labels()[s]);

    if (c.contains("ensemble")) {
        const json& en = c["ensemble"];
        const std::string kind = en.value("kind", "uniform");
        if (kind == "uniform") {
            spec.ensemble_kind = HashEnsembleSpec::Kind::uniform_matrix;
        } else if (kind == "sparse") {
            spec.ensemble_kind = HashEnsembleSpec::Kind::sparse_matrix;
            std::uint64_t d = 0;
            if (en.contains("column_degree") &&
                want_unsigned(en["column_degree"], "code.ensemble.column_degree", d, errs))
                spec.column_degree = static_cast<unsigned>(d);
        } else {
            errs.add("code.ensemble.kind must be uniform or sparse");
        }
    }
    if (c.contains("coset") && c["coset"].is_object()) {
        std::vector<Word> cosets(access.message_count());
        std::vector<bool> have(access.message_count(), false);
        for (const auto& [msg, arr] : c["coset"].items()) {
            int s = -1;
            try {
                s = access.message_index(msg);
            } catch (const std::invalid_argument& e) {
                errs.add(std::string("code.coset: ") + e.what());
                continue;
            }
            if (!arr.is_array() || arr.size() != spec.l_f[s]) {
                errs.add("code.coset[" + msg + "] must list " + std::to_string(spec.l_f[s]) +
                         " symbols");
                continue;
            }
            have[s] = true;
            for (const auto& v : arr)
                cosets[s].push_back(static_cast<Symbol>(v.get<unsigned>() % spec.q));
        }
        for (int s = 0; s < access.message_count(); ++s)
            if (!have[s] && spec.l_f[s] > 0)
                errs.add("code.coset missing entry for message " + access.message_labels()[s]);
        spec.cosets = std::move(cosets);
    }
    if (c.contains("hash_params") && c["hash_params"].is_object()) {
        std::vector<AlphaBeta> hp(access.message_count());
        for (const auto& [msg, entry] : c["hash_params"].items()) {
            try {
                const int s = access.message_index(msg);
                hp[s].alpha = entry.value("alpha", 1.0);
                hp[s].beta = entry.value("beta", 0.0);
            } catch (const std::invalid_argument& e) {
                errs.add(std::string("code.hash_params: ") + e.what());
            }
        }
        spec.hash_params = std::move(hp);
    }
    if (!errs.ok()) return std::nullopt;
    return spec;
}

RunSpec parse_run(const json& root, const AccessStructure& access, Errors& errs) {
    RunSpec run;
    if (!root.contains("run")) return run;
    const json& r = root["run"];
    std::uint64_t v = 0;
    if (r.contains("trials") && want_unsigned(r["trials"], "run.trials", v, errs)) run.trials = v;
    if (r.contains("seed") && want_unsigned(r["seed"], "run.seed", v, errs)) run.seed = v;
    if (r.contains("threads") && want_unsigned(r["threads"], "run.threads", v, errs))
        run.threads = static_cast<unsigned>(std::max<std::uint64_t>(1, v));
    if (r.contains("mode")) {
        const std::string m = r["mode"].get<std::string>();
        if (m == "stochastic") run.mode = DecodeMode::stochastic;
        else if (m == "map") run.mode = DecodeMode::map;
        else errs.add("run.mode must be stochastic or map");
    }
    if (r.contains("epsilon")) want_double(r["epsilon"], "run.epsilon", run.epsilon, errs);
    if (r.contains("tolerance")) want_double(r["tolerance"], "run.tolerance", run.tolerance, errs);
    if (r.contains("trial_log")) run.trial_log = r["trial_log"].get<bool>();
    if (r.contains("rate_points")) {
        if (!r["rate_points"].is_array()) {
            errs.add("run.rate_points must be an array of {message: R} objects");
        } else {
            for (const auto& pt : r["rate_points"]) {
                std::map<std::string, double> point;
                for (const auto& [msg, val] : pt.items()) {
                    try {
                        access.message_index(msg);
                    } catch (const std::invalid_argument& e) {
                        errs.add(std::string("run.rate_points: ") + e.what());
                        continue;
                    }
                    point[msg] = val.get<double>();
                }
                run.rate_points.push_back(std::move(point));
            }
        }
    }
    if (run.trials < 1) errs.add("run.trials must be at least 1");
    return run;
}

json family_json(const AccessStructure& a, const SortedFamily& fam) {
    json out = json::array();
    auto labels = [&](MessageSet m) {
        json arr = json::array();
        for (int s : mask::bits(m)) arr.push_back(a.message_labels()[s]);
        return arr;
    };
    for (int k = 0; k < fam.size(); ++k) {
        json g;
        json encs = json::array();
        for (int i : mask::bits(fam.groups[k])) encs.push_back(a.encoder_labels()[i]);
        g["encoders"] = encs;
        g["messages"] = labels(fam.group_messages[k]);
        g["upper_closure"] = labels(fam.upper_closure[k]);
        g["lower_closure"] = labels(fam.lower_closure[k]);
        out.push_back(std::move(g));
    }
    return out;
}

json system_json(const LinearSystem& sys) {
    json rows = json::array();
    for (const auto& r : sys.rows) {
        json row;
        row["label"] = r.label;
        row["relation"] = rel_text(r.rel);
        row["bound"] = r.bound;
        json coeffs = json::object();
        for (std::size_t i = 0; i < sys.vars.size(); ++i)
            if (std::abs(r.coeff[i]) > 1e-12) coeffs[sys.vars[i]] = r.coeff[i];
        row["coeffs"] = std::move(coeffs);
        rows.push_back(std::move(row));
    }
    return json{{"variables", sys.vars}, {"rows", rows}};
}

std::string coeff_text(const LinearSystem& sys, const Inequality& r) {
    std::string out;
    for (std::size_t i = 0; i < sys.vars.size(); ++i) {
        if (std::abs(r.coeff[i]) <= 1e-12) continue;
        if (!out.empty()) out += " ";
        out += sys.vars[i] + "=" + format_sig(r.coeff[i]);
    }
    return out;
}

}  // namespace

std::string format_sig(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

std::string fnv1a_hex(const std::string& text) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string format_csv(const std::vector<std::vector<std::string>>& rows) {
    std::string out;
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ",";
            const bool quote = row[i].find_first_of(",\"\n") != std::string::npos;
            if (!quote) {
                out += row[i];
            } else {
                out += '"';
                for (char c : row[i]) {
                    if (c == '"') out += '"';
                    out += c;
                }
                out += '"';
            }
        }
        out += "\n";
    }
    return out;
}

Command parse_command(const std::string& name) {
    if (name == "verify") return Command::verify;
    if (name == "region") return Command::region;
    if (name == "simulate") return Command::simulate;
    if (name == "bounds") return Command::bounds;
    throw std::invalid_argument("unknown command: " + name);
}

std::string apply_overrides(const std::string& config_text,
                            std::optional<std::uint64_t> trials,
                            std::optional<std::uint64_t> seed, std::optional<unsigned> threads) {
    json root = json::parse(config_text);
    if (trials) root["run"]["trials"] = *trials;
    if (seed) root["run"]["seed"] = *seed;
    if (threads) root["run"]["threads"] = *threads;
    return root.dump();
}

SpecParse validate_spec(const std::string& config_text) {
    SpecParse out;
    Errors errs;
    json root;
    try {
        root = json::parse(config_text);
    } catch (const json::parse_error& e) {
        out.errors.push_back(std::string("config is not valid JSON: ") + e.what());
        return out;
    }
    if (!root.is_object()) {
        out.errors.push_back("config root must be an object");
        return out;
    }

    auto access = parse_access(root, errs);
    if (!access) {
        out.errors = errs.list;
        return out;
    }
    SortedFamily fam = SortedFamily::build(*access);

    auto code = parse_code(root, *access, errs);
    const unsigned default_q = code ? code->q : 2;

    auto source = parse_source(root, *access, fam, default_q, errs);
    std::vector<unsigned> x_sizes;
    std::vector<ConditionalKernel> enc_inputs;
    std::optional<ChannelModel> channel;
    if (root.contains("channel")) {
        if (source) {
            enc_inputs = parse_encoder_inputs(root, *access, source->letter_sizes, x_sizes, errs);
            if (errs.ok()) channel = parse_channel(root, *access, x_sizes, errs);
        }
    }
    RunSpec run = parse_run(root, *access, errs);

    if (code && source) {
        for (int s = 0; s < access->message_count(); ++s)
            if (source->letter_sizes[s] != code->q)
                errs.add("message " + access->message_labels()[s] +
                         " letter alphabet must equal code.q for coding runs");
    }

    if (!errs.ok()) {
        out.errors = errs.list;
        return out;
    }

    ExperimentSpec spec{std::move(*access), std::move(fam), std::move(source),
                        std::move(channel), std::move(enc_inputs), std::move(code),
                        std::move(run), "", ""};
    spec.canonical_text = root.dump();
    spec.config_hash = fnv1a_hex(spec.canonical_text);
    out.spec = std::move(spec);
    return out;
}

Codec build_codec(const ExperimentSpec& spec) {
    if (!spec.source || !spec.channel || !spec.code)
        throw std::invalid_argument("simulation requires source, channel and code blocks");
    const CodeSpec& cs = *spec.code;
    const Field field(cs.q);

    CodeConfig config;
    config.n = cs.n;
    config.field = field;
    config.seed = spec.run.seed;
    for (int s = 0; s < spec.access.message_count(); ++s) {
        HashEnsembleSpec fspec{cs.ensemble_kind, cs.l_f[s], cs.n, cs.q, cs.column_degree,
                               spec.run.seed};
        HashEnsembleSpec gspec = fspec;
        gspec.rows = cs.l_g[s];
        RngStream rng(spec.run.seed, {0xa11ceULL, static_cast<std::uint64_t>(s)});
        LinearMap f = cs.l_f[s] == 0 ? LinearMap::zero(field, 0, cs.n) : sample_map(fspec, rng);
        LinearMap g = cs.l_g[s] == 0 ? LinearMap::zero(field, 0, cs.n) : sample_map(gspec, rng);
        Word coset;
        if (cs.cosets) {
            coset = (*cs.cosets)[s];
        } else {
            RngStream crng(spec.run.seed, {0xc05e7ULL, static_cast<std::uint64_t>(s)});
            coset.resize(cs.l_f[s]);
            for (auto& sym : coset) sym = static_cast<Symbol>(crng.below(cs.q));
        }
        config.per_message.emplace_back(std::move(f), std::move(g), std::move(coset));
    }
    return Codec(spec.access, spec.fam, *spec.source, spec.encoder_inputs, *spec.channel,
                 std::move(config));
}

namespace {

ResultRecord make_record(const ExperimentSpec& spec, const std::string& command) {
    ResultRecord rec;
    rec.config_hash = spec.config_hash;
    rec.command = command;
    const auto now = std::chrono::system_clock::now();
    const std::time_t tt = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&tt));
    rec.timestamp = buf;
    return rec;
}

ResultRecord run_verify(const ExperimentSpec& spec) {
    ResultRecord rec = make_record(spec, "verify");
    const AccessStructure& a = spec.access;

    json sets;
    json readers = json::object(), encoder_msgs = json::object();
    for (int s = 0; s < a.message_count(); ++s) {
        json arr = json::array();
        for (int i : mask::bits(a.encoders_of_message(s))) arr.push_back(a.encoder_labels()[i]);
        readers[a.message_labels()[s]] = arr;
    }
    for (int i = 0; i < a.encoder_count(); ++i) {
        json arr = json::array();
        for (int s : mask::bits(a.messages_of_encoder(i))) arr.push_back(a.message_labels()[s]);
        encoder_msgs[a.encoder_labels()[i]] = arr;
    }
    sets["reader_sets"] = readers;
    sets["encoder_messages"] = encoder_msgs;
    sets["family"] = family_json(a, spec.fam);
    rec.payload["sets"] = sets;

    const ValidationReport report = validate(spec.fam, a);
    json checks = json::array();
    rec.csv.push_back({"check", "pass", "witness"});
    for (const auto& e : report.entries) {
        checks.push_back(json{{"check", e.check}, {"pass", e.pass}, {"witness", e.witness}});
        rec.csv.push_back({e.check, e.pass ? "1" : "0", e.witness});
    }
    rec.payload["structure_checks"] = checks;
    bool all_pass = report.all_pass();

    if (spec.source) {
        const FiniteDist joint = build_joint_z(*spec.source, spec.fam);
        const MarkovReport mk = check_markov(joint, a, spec.fam, spec.run.tolerance);
        json entries = json::array();
        for (const auto& e : mk.entries) {
            entries.push_back(json{{"group", a.encoder_set_labels(e.group)},
                                   {"pass", e.pass},
                                   {"max_violation", e.max_violation},
                                   {"witness", e.witness}});
            rec.csv.push_back({"markov " + a.encoder_set_labels(e.group), e.pass ? "1" : "0",
                               e.witness});
        }
        rec.payload["markov"] = entries;
        all_pass = all_pass && mk.all_pass();
    }

    if (spec.code) {
        json hash = json::object();
        for (int s = 0; s < a.message_count(); ++s) {
            HashEnsembleSpec hs{spec.code->ensemble_kind, spec.code->l_f[s], spec.code->n,
                                spec.code->q, spec.code->column_degree, spec.run.seed};
            json entry;
            try {
                const HashProperty hp = hash_alpha_beta(hs);
                entry = json{{"alpha", hp.alpha}, {"beta", hp.beta}};
            } catch (const ResourceError&) {
                entry = json{{"skipped", "ensemble too large for exact measurement"}};
            }
            hash[a.message_labels()[s]] = entry;
        }
        rec.payload["hash"] = hash;
    }
    rec.payload["all_pass"] = all_pass;
    return rec;
}

ResultRecord run_region(const ExperimentSpec& spec) {
    if (!spec.source || !spec.channel)
        throw std::invalid_argument("region requires source and channel blocks");
    ResultRecord rec = make_record(spec, "region");
    const AccessStructure& a = spec.access;

    const LetterModel lm =
        build_letter_model(a, spec.fam, *spec.source, spec.encoder_inputs, *spec.channel);
    const SourceEntropies se = compute_source_entropies(lm.joint_z, spec.fam);
    const ChannelEntropies ce = compute_channel_entropies(lm.decoder_joints, a);

    const LinearSystem closure = build_constraints(a, spec.fam, se, ce, false);
    const LinearSystem interior = build_constraints(a, spec.fam, se, ce, true);

    std::vector<std::string> r_vars;
    for (int s = 0; s < a.message_count(); ++s) r_vars.push_back("r_" + a.message_labels()[s]);
    const LinearSystem projected = fourier_motzkin_project(closure, r_vars);

    rec.payload["constraints"] = system_json(closure);
    rec.payload["projected"] = system_json(projected);

    rec.csv.push_back({"row_type", "label", "relation", "bound", "coefficients"});
    for (const auto& r : closure.rows)
        rec.csv.push_back({"constraint", r.label, rel_text(r.rel), format_sig(r.bound),
                           coeff_text(closure, r)});
    for (const auto& r : projected.rows)
        rec.csv.push_back({"projected", r.label, rel_text(r.rel), format_sig(r.bound),
                           coeff_text(projected, r)});

    // the strict system answers achievability in the interior; the closed
    // system answers membership in the region closure -- both are reported
    json points = json::array();
    int idx = 0;
    for (const auto& pt : spec.run.rate_points) {
        std::vector<double> fixed(a.message_count(), 0.0);
        for (const auto& [msg, val] : pt) fixed[a.message_index(msg)] = val;
        const Feasibility fz = lp_feasible(interior, fixed);
        const Feasibility fc = lp_feasible(closure, fixed);
        json p;
        json rv = json::object();
        for (const auto& [msg, val] : pt) rv[msg] = val;
        p["R"] = rv;
        p["feasible"] = fz.feasible;
        p["feasible_closure"] = fc.feasible;
        std::string cert;
        if (fz.feasible) {
            json c = json::object();
            for (int s = 0; s < a.message_count(); ++s) {
                c["r_" + a.message_labels()[s]] = fz.assignment[s];
                if (!cert.empty()) cert += " ";
                cert += "r_" + a.message_labels()[s] + "=" + format_sig(fz.assignment[s]);
            }
            p["certificate"] = c;
        }
        points.push_back(std::move(p));
        std::string rtxt;
        for (const auto& [msg, val] : pt)
            rtxt += (rtxt.empty() ? "" : " ") + ("R_" + msg + "=" + format_sig(val));
        rec.csv.push_back({"point", "rate_point[" + std::to_string(idx) + "]",
                           fz.feasible ? "feasible" : "infeasible", "",
                           rtxt + (cert.empty() ? "" : "; " + cert)});
        ++idx;
    }
    rec.payload["rate_points"] = points;
    return rec;
}

json matrices_json(const ExperimentSpec& spec, const Codec& codec) {
    json out = json::object();
    for (int s = 0; s < spec.access.message_count(); ++s) {
        const MessageCode& mc = codec.config().per_message[s];
        json entry;
        entry["f"] = mc.f.to_text();
        entry["g"] = mc.g.to_text();
        json cos = json::array();
        for (Symbol v : mc.coset_value) cos.push_back(v);
        entry["coset"] = cos;
        entry["r"] = codec.config().rate_r(s);
        entry["R"] = codec.config().rate_R(s);
        out[spec.access.message_labels()[s]] = entry;
    }
    return out;
}

ResultRecord run_simulate(const ExperimentSpec& spec) {
    ResultRecord rec = make_record(spec, "simulate");
    const Codec codec = build_codec(spec);

    std::vector<TrialOutcome> log;
    const SimResult res = codec.simulate(spec.run.trials, spec.run.threads, spec.run.mode,
                                         spec.run.trial_log ? &log : nullptr);

    rec.payload["trials"] = res.trials;
    rec.payload["errors"] = res.errors;
    rec.payload["p_hat"] = res.p_hat;
    rec.payload["wilson_lo"] = res.wilson_lo;
    rec.payload["wilson_hi"] = res.wilson_hi;
    rec.payload["encoder_errors"] = res.encoder_errors;
    rec.payload["decoder_degenerate"] = res.degenerate;
    rec.payload["mode"] = spec.run.mode == DecodeMode::map ? "map" : "stochastic";
    rec.payload["seed"] = spec.run.seed;
    rec.payload["matrices"] = matrices_json(spec, codec);

    rec.csv.push_back({"trials", "errors", "p_hat", "wilson_lo", "wilson_hi", "encoder_errors",
                       "decoder_degenerate", "seed", "mode", "threads"});
    rec.csv.push_back({std::to_string(res.trials), std::to_string(res.errors),
                       format_sig(res.p_hat), format_sig(res.wilson_lo),
                       format_sig(res.wilson_hi), std::to_string(res.encoder_errors),
                       std::to_string(res.degenerate), std::to_string(spec.run.seed),
                       spec.run.mode == DecodeMode::map ? "map" : "stochastic",
                       std::to_string(spec.run.threads)});

    if (spec.run.trial_log) {
        for (std::size_t t = 0; t < log.size(); ++t) {
            std::string line = std::to_string(t);
            line += log[t].encoder_error
                        ? " enc=err@" + std::to_string(log[t].encoder_error_group)
                        : " enc=ok";
            line += " dec=";
            for (auto ok : log[t].decoder_ok) line += ok ? '1' : '0';
            rec.trial_log.push_back(std::move(line));
        }
    }
    return rec;
}

ResultRecord run_bounds(const ExperimentSpec& spec) {
    if (!spec.source || !spec.channel || !spec.code)
        throw std::invalid_argument("bounds requires source, channel and code blocks");
    ResultRecord rec = make_record(spec, "bounds");
    const AccessStructure& a = spec.access;
    const Codec codec = build_codec(spec);

    BoundInputs in;
    in.a = &a;
    in.fam = &spec.fam;
    in.letter_joint_z = &codec.letter_joint_z();
    std::vector<FiniteDist> dec_joints;
    for (int j = 0; j < a.decoder_count(); ++j) dec_joints.push_back(codec.decoder_letter_joint(j));
    in.decoder_joints = &dec_joints;
    in.n = spec.code->n;
    in.epsilon = spec.run.epsilon;
    in.mc_seed = spec.run.seed;
    for (int s = 0; s < a.message_count(); ++s) {
        in.r.push_back(codec.config().rate_r(s));
        in.R.push_back(codec.config().rate_R(s));
    }
    if (spec.code->hash_params) {
        in.f_params = *spec.code->hash_params;
        in.g_params = *spec.code->hash_params;
    } else if (spec.code->ensemble_kind == HashEnsembleSpec::Kind::uniform_matrix) {
        in.f_params.assign(a.message_count(), AlphaBeta{1.0, 0.0});
        in.g_params.assign(a.message_count(), AlphaBeta{1.0, 0.0});
    } else {
        for (int s = 0; s < a.message_count(); ++s) {
            HashEnsembleSpec fs{spec.code->ensemble_kind, spec.code->l_f[s], spec.code->n,
                                spec.code->q, spec.code->column_degree, spec.run.seed};
            HashEnsembleSpec gs = fs;
            gs.rows = spec.code->l_g[s];
            const HashProperty fh = hash_alpha_beta(fs);
            const HashProperty gh = hash_alpha_beta(gs);
            in.f_params.push_back({fh.alpha, fh.beta});
            in.g_params.push_back({gh.alpha, gh.beta});
        }
    }

    const BoundReport rep = evaluate_error_bound(in);

    json enc = json::array(), dec = json::array();
    rec.csv.push_back({"kind", "index", "subset", "gamma", "value"});
    for (const auto& e : rep.encoder_exponents) {
        enc.push_back(json{{"group", a.encoder_set_labels(spec.fam.groups[e.index])},
                           {"subset", a.message_set_labels(e.subset)},
                           {"gamma", e.gamma},
                           {"term", e.term}});
        rec.csv.push_back({"enc_exponent", a.encoder_set_labels(spec.fam.groups[e.index]),
                           a.message_set_labels(e.subset), format_sig(e.gamma),
                           format_sig(e.term)});
    }
    for (const auto& e : rep.decoder_exponents) {
        dec.push_back(json{{"decoder", a.decoder_labels()[e.index]},
                           {"subset", a.message_set_labels(e.subset)},
                           {"gamma", e.gamma},
                           {"term", e.term}});
        rec.csv.push_back({"dec_exponent", a.decoder_labels()[e.index],
                           a.message_set_labels(e.subset), format_sig(e.gamma),
                           format_sig(e.term)});
    }
    json enc_tails = json::array(), dec_tails = json::array();
    for (const auto& t : rep.encoder_tails) {
        enc_tails.push_back(json{{"group", a.encoder_set_labels(spec.fam.groups[t.index])},
                                 {"mass", t.mass},
                                 {"exact", t.exact},
                                 {"std_error", t.std_error}});
        rec.csv.push_back({"enc_tail", a.encoder_set_labels(spec.fam.groups[t.index]), "",
                           "", format_sig(t.mass)});
    }
    for (const auto& t : rep.decoder_tails) {
        dec_tails.push_back(json{{"decoder", a.decoder_labels()[t.index]},
                                 {"mass", t.mass},
                                 {"exact", t.exact},
                                 {"std_error", t.std_error}});
        rec.csv.push_back({"dec_tail", a.decoder_labels()[t.index], "", "",
                           format_sig(t.mass)});
    }
    rec.csv.push_back({"total", "", "", "", format_sig(rep.rhs_total)});

    rec.payload["encoder_exponents"] = enc;
    rec.payload["decoder_exponents"] = dec;
    rec.payload["encoder_tails"] = enc_tails;
    rec.payload["decoder_tails"] = dec_tails;
    rec.payload["encoder_sqrt_sum"] = rep.encoder_sqrt_sum;
    rec.payload["decoder_term_sum"] = rep.decoder_term_sum;
    rec.payload["decoder_beta_sum"] = rep.decoder_beta_sum;
    rec.payload["rhs_total"] = rep.rhs_total;
    rec.payload["all_exponents_positive"] = rep.all_exponents_positive;
    rec.payload["epsilon"] = spec.run.epsilon;
    rec.payload["matrices"] = matrices_json(spec, codec);
    return rec;
}

}  // namespace

ResultRecord run(Command cmd, const ExperimentSpec& spec) {
    switch (cmd) {
        case Command::verify: return run_verify(spec);
        case Command::region: return run_region(spec);
        case Command::simulate: return run_simulate(spec);
        case Command::bounds: return run_bounds(spec);
    }
    throw std::logic_error("unreachable command");
}

}  // namespace crngnet
