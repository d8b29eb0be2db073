#include "crngnet/codec.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

namespace crngnet {

namespace {

constexpr std::uint64_t kCosetGuard = 1ULL << 22;
constexpr std::uint64_t kJointWorkGuard = 1ULL << 24;

// stream purposes inside one trial
enum : std::uint64_t { kTrialTag = 0x7472696cULL, kMsgStream = 1, kGroupStream = 2, kXStream = 3,
                       kChannelStream = 4, kDecoderStream = 5 };

}  // namespace

void ChannelModel::finalize() {
    if (x_sizes.empty()) throw std::invalid_argument("channel needs at least one input");
    if (y_sizes.empty()) throw std::invalid_argument("channel needs at least one output");
    const std::uint64_t xt = x_space().total();
    switch (preset) {
        case Preset::noiseless:
            for (unsigned ys : y_sizes)
                if (ys != xt)
                    throw std::invalid_argument(
                        "noiseless channel output alphabet must equal the input tuple space");
            break;
        case Preset::bsc:
        case Preset::bec: {
            if (x_sizes.size() != 1 || x_sizes[0] != 2)
                throw std::invalid_argument("bsc/bec channels take a single binary input");
            const unsigned want = preset == Preset::bsc ? 2u : 3u;
            for (unsigned ys : y_sizes)
                if (ys != want) throw std::invalid_argument("bsc/bec output alphabet mismatch");
            if (p < 0 || p > 1) throw std::invalid_argument("channel parameter must be in [0,1]");
            break;
        }
        case Preset::adder: {
            for (unsigned xs : x_sizes)
                if (xs != 2) throw std::invalid_argument("adder channel takes binary inputs");
            for (unsigned ys : y_sizes)
                if (ys != x_sizes.size() + 1)
                    throw std::invalid_argument("adder output alphabet must be |inputs|+1");
            break;
        }
        case Preset::table: {
            const std::uint64_t yt = y_space().total();
            if (table.size() != xt * yt)
                throw std::invalid_argument("channel table size mismatch");
            marginals_.assign(y_sizes.size(), {});
            std::vector<unsigned> ydig(y_sizes.size());
            const FactorSpace ys = y_space();
            for (std::size_t j = 0; j < y_sizes.size(); ++j)
                marginals_[j].assign(xt * y_sizes[j], 0.0);
            for (std::uint64_t x = 0; x < xt; ++x) {
                double sum = 0;
                for (std::uint64_t y = 0; y < yt; ++y) {
                    const double v = table[x * yt + y];
                    if (v < 0) throw std::invalid_argument("negative channel probability");
                    sum += v;
                    ys.digits(y, ydig);
                    for (std::size_t j = 0; j < y_sizes.size(); ++j)
                        marginals_[j][x * y_sizes[j] + ydig[j]] += v;
                }
                if (std::abs(sum - 1.0) > 1e-9)
                    throw std::invalid_argument("channel row " + std::to_string(x) + " sums to " +
                                                std::to_string(sum));
            }
            break;
        }
    }
}

double ChannelModel::y_marginal_prob(int j, std::uint64_t x_idx, unsigned yj) const {
    switch (preset) {
        case Preset::noiseless:
            return yj == x_idx ? 1.0 : 0.0;
        case Preset::bsc:
            return (yj == x_idx) ? 1.0 - p : p;
        case Preset::bec:
            if (yj == 2) return p;
            return yj == x_idx ? 1.0 - p : 0.0;
        case Preset::adder: {
            const unsigned ones = static_cast<unsigned>(std::popcount(x_idx));
            return yj == ones ? 1.0 : 0.0;
        }
        case Preset::table:
            return marginals_[static_cast<std::size_t>(j)][x_idx * y_sizes[j] + yj];
    }
    return 0.0;
}

std::vector<unsigned> ChannelModel::sample(std::uint64_t x_idx, RngStream& rng) const {
    std::vector<unsigned> out(y_sizes.size());
    switch (preset) {
        case Preset::noiseless:
            for (auto& y : out) y = static_cast<unsigned>(x_idx);
            break;
        case Preset::bsc:
            for (auto& y : out)
                y = rng.uniform01() < p ? static_cast<unsigned>(1 - x_idx)
                                        : static_cast<unsigned>(x_idx);
            break;
        case Preset::bec:
            for (auto& y : out)
                y = rng.uniform01() < p ? 2u : static_cast<unsigned>(x_idx);
            break;
        case Preset::adder:
            for (auto& y : out) y = static_cast<unsigned>(std::popcount(x_idx));
            break;
        case Preset::table: {
            const std::uint64_t yt = y_space().total();
            double u = rng.uniform01();
            std::uint64_t pick = yt - 1;
            for (std::uint64_t y = 0; y < yt; ++y) {
                u -= table[x_idx * yt + y];
                if (u < 0) {
                    pick = y;
                    break;
                }
            }
            std::vector<unsigned> ydig(y_sizes.size());
            y_space().digits(pick, ydig);
            for (std::size_t j = 0; j < out.size(); ++j) out[j] = ydig[j];
            break;
        }
    }
    return out;
}

MessageCode::MessageCode(LinearMap f_, LinearMap g_, Word c)
    : f(std::move(f_)), g(std::move(g_)), coset_value(std::move(c)) {
    if (!(f.field() == g.field())) throw std::invalid_argument("message code fields differ");
    if (f.cols() != g.cols()) throw std::invalid_argument("message code block lengths differ");
    if (coset_value.size() != f.rows())
        throw std::invalid_argument("coset value length differs from codeword side");
    f_solver = std::make_shared<AffineSolver>(f);
    fg_solver = std::make_shared<AffineSolver>(AffineSolver::stacked(f, g));
}

double CodeConfig::rate_r(int s) const {
    return per_message[s].f.rows() * std::log2(double(field.order())) / n;
}

double CodeConfig::rate_R(int s) const {
    return per_message[s].g.rows() * std::log2(double(field.order())) / n;
}

SimResult wilson_summary(std::uint64_t errors, std::uint64_t trials) {
    SimResult r;
    r.trials = trials;
    r.errors = errors;
    if (trials == 0) return r;
    const double n = static_cast<double>(trials);
    const double ph = static_cast<double>(errors) / n;
    const double z = 1.959963984540054;
    const double denom = 1.0 + z * z / n;
    const double center = (ph + z * z / (2 * n)) / denom;
    const double half = z * std::sqrt(ph * (1 - ph) / n + z * z / (4 * n * n)) / denom;
    r.p_hat = ph;
    r.wilson_lo = errors == 0 ? 0.0 : std::max(0.0, center - half);
    r.wilson_hi = errors == trials ? 1.0 : std::min(1.0, center + half);
    return r;
}

Codec::Codec(AccessStructure a, SortedFamily fam, JointSourceSpec source,
             std::vector<ConditionalKernel> encoder_inputs, ChannelModel channel,
             CodeConfig config)
    : a_(std::move(a)),
      fam_(std::move(fam)),
      source_(std::move(source)),
      encoder_inputs_(std::move(encoder_inputs)),
      channel_(std::move(channel)),
      config_(std::move(config)) {
    source_.check_against(fam_);
    const unsigned q = config_.field.order();
    if (source_.letter_sizes.size() != static_cast<std::size_t>(a_.message_count()))
        throw std::invalid_argument("one letter alphabet per message required");
    for (unsigned ls : source_.letter_sizes)
        if (ls != q)
            throw std::invalid_argument("code blocks live in GF(q)^n: letter alphabets must be q");
    if (config_.per_message.size() != static_cast<std::size_t>(a_.message_count()))
        throw std::invalid_argument("one message code per message required");
    for (const auto& mc : config_.per_message)
        if (mc.f.cols() != config_.n || !(mc.f.field() == config_.field))
            throw std::invalid_argument("message code dimensions disagree with the block length");
    if (encoder_inputs_.size() != static_cast<std::size_t>(a_.encoder_count()))
        throw std::invalid_argument("one input kernel per encoder required");
    if (channel_.x_sizes.size() != static_cast<std::size_t>(a_.encoder_count()) ||
        channel_.y_sizes.size() != static_cast<std::size_t>(a_.decoder_count()))
        throw std::invalid_argument("channel shape disagrees with the access structure");
    for (int i = 0; i < a_.encoder_count(); ++i) {
        const auto read = mask::bits(a_.messages_of_encoder(i));
        const ConditionalKernel& k = encoder_inputs_[i];
        if (k.given.sizes.size() != read.size())
            throw std::invalid_argument("encoder input kernel conditioning mismatch");
        for (std::size_t t = 0; t < read.size(); ++t)
            if (k.given.sizes[t] != source_.letter_sizes[read[t]])
                throw std::invalid_argument("encoder input kernel alphabet mismatch");
        if (k.out.sizes.size() != 1 || k.out.sizes[0] != channel_.x_sizes[i])
            throw std::invalid_argument("encoder input kernel output must be the channel input");
    }

    LetterModel lm = build_letter_model(a_, fam_, source_, encoder_inputs_, channel_);
    letter_joint_z_ = std::move(lm.joint_z);
    decoder_joints_ = std::move(lm.decoder_joints);

    posterior_.resize(a_.decoder_count());
    zd_counts_.resize(a_.decoder_count());
    for (int j = 0; j < a_.decoder_count(); ++j) {
        std::uint64_t zd = 1;
        for (int s : mask::bits(a_.demand(j))) zd *= source_.letter_sizes[s];
        zd_counts_[j] = zd;
    }

    for (int j = 0; j < a_.decoder_count(); ++j) {
        const std::uint64_t zd_n = zd_counts_[j];
        const unsigned y_n = channel_.y_sizes[j];
        posterior_[j].assign(static_cast<std::uint64_t>(y_n) * zd_n, 0.0);
        for (unsigned y = 0; y < y_n; ++y) {
            double ymass = 0;
            for (std::uint64_t zd = 0; zd < zd_n; ++zd)
                ymass += decoder_joints_[j].p[static_cast<std::uint64_t>(y) * zd_n + zd];
            for (std::uint64_t zd = 0; zd < zd_n; ++zd) {
                const double v = decoder_joints_[j].p[static_cast<std::uint64_t>(y) * zd_n + zd];
                posterior_[j][static_cast<std::uint64_t>(y) * zd_n + zd] =
                    ymass > 0 ? v / ymass : 1.0 / static_cast<double>(zd_n);
            }
        }
    }
}

std::optional<Codec::GroupWeights> Codec::group_weights(
    int k, const std::vector<std::uint32_t>& upper_idx, const std::vector<Word>& coset_values,
    const std::vector<Word>& message_words) const {
    const auto own = mask::bits(fam_.group_messages[k]);
    GroupWeights gw;
    gw.candidates = 1;
    for (std::size_t t = 0; t < own.size(); ++t) {
        const MessageCode& mc = config_.per_message[own[t]];
        Word rhs = coset_values[t];
        rhs.insert(rhs.end(), message_words[t].begin(), message_words[t].end());
        auto particular = mc.fg_solver->solve(rhs);
        if (!particular) return std::nullopt;  // empty coset, zero mass
        CosetEnumerator en(config_.field, std::move(*particular), &mc.fg_solver->null_basis());
        const std::uint64_t sz = en.size();
        if (gw.candidates > kCosetGuard / std::max<std::uint64_t>(1, sz))
            throw ResourceError("group coset enumeration exceeds guard");
        gw.candidates *= sz;
        gw.coset_sizes.push_back(sz);
        gw.cosets.push_back(std::move(en));
    }

    const ConditionalKernel& kern = source_.group_kernels[k];
    const unsigned n = config_.n;
    const unsigned q = config_.field.order();

    gw.w.assign(gw.candidates, 0.0);
    std::vector<Word> words(own.size());
    std::vector<unsigned> out_digits(own.size());
    for (std::uint64_t c = 0; c < gw.candidates; ++c) {
        std::uint64_t rest = c;
        for (std::size_t t = 0; t < own.size(); ++t) {
            words[t] = gw.cosets[t].member(rest % gw.coset_sizes[t]);
            rest /= gw.coset_sizes[t];
        }
        double wgt = 1.0;
        for (unsigned letter = 0; letter < n && wgt > 0; ++letter) {
            for (std::size_t t = 0; t < own.size(); ++t) out_digits[t] = words[t][letter];
            std::uint64_t oidx = 0;
            for (std::size_t t = own.size(); t-- > 0;) oidx = oidx * q + out_digits[t];
            wgt *= kern.at(upper_idx[letter], oidx);
        }
        gw.w[c] = wgt;
        gw.total += wgt;
    }
    return gw;
}

std::vector<Word> Codec::group_member(const GroupWeights& gw, std::uint64_t idx) const {
    std::vector<Word> words(gw.cosets.size());
    for (std::size_t t = 0; t < gw.cosets.size(); ++t) {
        words[t] = gw.cosets[t].member(idx % gw.coset_sizes[t]);
        idx /= gw.coset_sizes[t];
    }
    return words;
}

std::variant<CrngDist, EncoderError> Codec::encoder_group_dist(
    int k, const std::vector<Word>& z_upper, const std::vector<Word>& coset_values,
    const std::vector<Word>& message_words) const {
    const auto upper = mask::bits(fam_.upper_closure[k]);
    if (z_upper.size() != upper.size())
        throw std::invalid_argument("one realized block per upper-closure message required");
    const unsigned q = config_.field.order();
    std::vector<std::uint32_t> upper_idx(config_.n, 0);
    for (unsigned letter = 0; letter < config_.n; ++letter) {
        std::uint64_t gidx = 0;
        for (std::size_t t = upper.size(); t-- > 0;) gidx = gidx * q + z_upper[t][letter];
        upper_idx[letter] = static_cast<std::uint32_t>(gidx);
    }
    auto gw = group_weights(k, upper_idx, coset_values, message_words);
    if (!gw || gw->total <= 0) return EncoderError{k};

    CrngDist dist;
    dist.support.reserve(gw->candidates);
    dist.prob.reserve(gw->candidates);
    for (std::uint64_t c = 0; c < gw->candidates; ++c) {
        if (gw->w[c] <= 0) continue;
        dist.support.push_back(group_member(*gw, c));
        dist.prob.push_back(gw->w[c] / gw->total);
    }
    return dist;
}

EncoderRealization Codec::generate_encoder_inputs(const std::vector<Word>& messages,
                                                  std::uint64_t trial_index) const {
    if (messages.size() != static_cast<std::size_t>(a_.message_count()))
        throw std::invalid_argument("one message word per message required");
    EncoderRealization out;
    out.z.assign(a_.message_count(), Word{});

    const unsigned q = config_.field.order();
    for (int k = 0; k < fam_.size(); ++k) {
        const auto upper = mask::bits(fam_.upper_closure[k]);
        const auto own = mask::bits(fam_.group_messages[k]);
        std::vector<std::uint32_t> upper_idx(config_.n, 0);
        for (unsigned letter = 0; letter < config_.n; ++letter) {
            std::uint64_t gidx = 0;
            for (std::size_t t = upper.size(); t-- > 0;) gidx = gidx * q + out.z[upper[t]][letter];
            upper_idx[letter] = static_cast<std::uint32_t>(gidx);
        }
        std::vector<Word> cs, ms;
        for (int s : own) {
            cs.push_back(config_.per_message[s].coset_value);
            ms.push_back(messages[s]);
        }
        auto gw = group_weights(k, upper_idx, cs, ms);
        if (!gw || gw->total <= 0) {
            out.error = true;
            out.error_group = k;
            return out;
        }
        RngStream rng(config_.seed, {kTrialTag, trial_index, kGroupStream, static_cast<std::uint64_t>(k)});
        const std::uint64_t pick = rng.weighted(gw->w, gw->total);
        auto words = group_member(*gw, pick);
        for (std::size_t t = 0; t < own.size(); ++t) out.z[own[t]] = std::move(words[t]);
    }

    // channel inputs, one letter at a time
    out.x.assign(a_.encoder_count(), {});
    for (int i = 0; i < a_.encoder_count(); ++i) {
        const auto read = mask::bits(a_.messages_of_encoder(i));
        const ConditionalKernel& kern = encoder_inputs_[i];
        RngStream rng(config_.seed, {kTrialTag, trial_index, kXStream, static_cast<std::uint64_t>(i)});
        out.x[i].resize(config_.n);
        std::vector<unsigned> sub(read.size());
        for (unsigned letter = 0; letter < config_.n; ++letter) {
            for (std::size_t t = 0; t < read.size(); ++t) sub[t] = out.z[read[t]][letter];
            const std::uint64_t g = kern.given.index(sub);
            double u = rng.uniform01();
            std::uint64_t pick = kern.out_count() - 1;
            for (std::uint64_t o = 0; o < kern.out_count(); ++o) {
                u -= kern.at(g, o);
                if (u < 0) {
                    pick = o;
                    break;
                }
            }
            out.x[i][letter] = static_cast<std::uint32_t>(pick);
        }
    }
    return out;
}

std::variant<DecoderDist, DecoderDegenerate> Codec::decoder_posterior(
    int j, const std::vector<std::uint32_t>& y) const {
    if (y.size() != config_.n) throw std::invalid_argument("channel output block length mismatch");
    const auto demanded = mask::bits(a_.demand(j));
    const unsigned q = config_.field.order();

    std::vector<CosetEnumerator> cosets;
    std::vector<std::uint64_t> sizes;
    std::uint64_t candidates = 1;
    for (int s : demanded) {
        const MessageCode& mc = config_.per_message[s];
        auto particular = mc.f_solver->solve(mc.coset_value);
        if (!particular) return DecoderDegenerate{};
        CosetEnumerator en(config_.field, std::move(*particular), &mc.f_solver->null_basis());
        const std::uint64_t sz = en.size();
        if (candidates > kCosetGuard / std::max<std::uint64_t>(1, sz))
            throw ResourceError("decoder coset enumeration exceeds guard");
        candidates *= sz;
        sizes.push_back(sz);
        cosets.push_back(std::move(en));
    }

    const std::vector<double>& post = posterior_[j];
    const std::uint64_t zd_n = zd_counts_[j];

    DecoderDist dist;
    double total = 0;
    std::vector<Word> words(demanded.size());
    for (std::uint64_t c = 0; c < candidates; ++c) {
        std::uint64_t rest = c;
        for (std::size_t t = 0; t < demanded.size(); ++t) {
            words[t] = cosets[t].member(rest % sizes[t]);
            rest /= sizes[t];
        }
        double wgt = 1.0;
        for (unsigned letter = 0; letter < config_.n && wgt > 0; ++letter) {
            std::uint64_t zd = 0;
            for (std::size_t t = demanded.size(); t-- > 0;) zd = zd * q + words[t][letter];
            wgt *= post[static_cast<std::uint64_t>(y[letter]) * zd_n + zd];
        }
        total += wgt;
        if (wgt > 0) {
            dist.support.push_back(words);
            dist.prob.push_back(wgt);
        }
    }
    if (total <= 0) return DecoderDegenerate{};
    for (double& v : dist.prob) v /= total;
    return dist;
}

DecodeResult Codec::decode(int j, const std::vector<std::uint32_t>& y, DecodeMode mode,
                           RngStream& rng) const {
    auto posterior = decoder_posterior(j, y);
    DecodeResult res;
    if (std::holds_alternative<DecoderDegenerate>(posterior)) {
        res.degenerate = true;
        return res;
    }
    const DecoderDist& dist = std::get<DecoderDist>(posterior);
    std::size_t pick = 0;
    if (mode == DecodeMode::stochastic) {
        pick = rng.weighted(dist.prob, 1.0);
    } else {
        double best = -1.0;
        for (std::size_t c = 0; c < dist.prob.size(); ++c) {
            if (dist.prob[c] > best ||
                (dist.prob[c] == best && dist.support[c] < dist.support[pick])) {
                best = dist.prob[c];
                pick = c;
            }
        }
    }
    res.z_hat = dist.support[pick];
    const auto demanded = mask::bits(a_.demand(j));
    for (std::size_t t = 0; t < demanded.size(); ++t)
        res.m_hat.push_back(config_.per_message[demanded[t]].g.apply(res.z_hat[t]));
    return res;
}

TrialOutcome Codec::run_trial(std::uint64_t trial_index, DecodeMode mode) const {
    TrialOutcome out;
    out.decoder_ok.assign(a_.decoder_count(), 0);

    // draw messages uniformly
    RngStream mrng(config_.seed, {kTrialTag, trial_index, kMsgStream});
    const unsigned q = config_.field.order();
    std::vector<Word> messages(a_.message_count());
    for (int s = 0; s < a_.message_count(); ++s) {
        messages[s].resize(config_.per_message[s].g.rows());
        for (auto& sym : messages[s]) sym = static_cast<Symbol>(mrng.below(q));
    }

    EncoderRealization enc = generate_encoder_inputs(messages, trial_index);
    if (enc.error) {
        out.error = true;
        out.encoder_error = true;
        out.encoder_error_group = enc.error_group;
        return out;
    }

    // channel letters
    RngStream crng(config_.seed, {kTrialTag, trial_index, kChannelStream});
    const FactorSpace xs = channel_.x_space();
    std::vector<std::vector<std::uint32_t>> y(a_.decoder_count(),
                                              std::vector<std::uint32_t>(config_.n));
    std::vector<unsigned> xdig(a_.encoder_count());
    for (unsigned letter = 0; letter < config_.n; ++letter) {
        for (int i = 0; i < a_.encoder_count(); ++i) xdig[i] = enc.x[i][letter];
        const auto ys = channel_.sample(xs.index(xdig), crng);
        for (int j = 0; j < a_.decoder_count(); ++j) y[j][letter] = ys[j];
    }

    bool any_wrong = false;
    for (int j = 0; j < a_.decoder_count(); ++j) {
        RngStream drng(config_.seed, {kTrialTag, trial_index, kDecoderStream, static_cast<std::uint64_t>(j)});
        const DecodeResult dec = decode(j, y[j], mode, drng);
        if (dec.degenerate) {
            out.decoder_degenerate = true;
            any_wrong = true;
            continue;
        }
        const auto demanded = mask::bits(a_.demand(j));
        bool ok = true;
        for (std::size_t t = 0; t < demanded.size(); ++t)
            if (dec.m_hat[t] != messages[demanded[t]]) ok = false;
        out.decoder_ok[j] = ok ? 1 : 0;
        if (!ok) any_wrong = true;
    }
    out.error = any_wrong;
    return out;
}

SimResult Codec::simulate(std::uint64_t trials, unsigned threads, DecodeMode mode,
                          std::vector<TrialOutcome>* log) const {
    if (trials < 1) throw std::invalid_argument("at least one trial required");
    threads = std::max(1u, threads);
    threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, trials));
    if (log) log->assign(trials, TrialOutcome{});

    std::vector<std::uint64_t> errors(threads, 0), enc_errors(threads, 0), degen(threads, 0);
    std::vector<std::exception_ptr> failures(threads);
    auto worker = [&](unsigned w) {
        try {
            for (std::uint64_t t = w; t < trials; t += threads) {
                const TrialOutcome out = run_trial(t, mode);
                if (out.error) ++errors[w];
                if (out.encoder_error) ++enc_errors[w];
                if (out.decoder_degenerate) ++degen[w];
                if (log) (*log)[t] = out;
            }
        } catch (...) {
            failures[w] = std::current_exception();
        }
    };
    if (threads == 1) {
        worker(0);
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < threads; ++w) pool.emplace_back(worker, w);
        for (auto& th : pool) th.join();
    }
    for (const auto& f : failures)
        if (f) std::rethrow_exception(f);

    SimResult res = wilson_summary(std::accumulate(errors.begin(), errors.end(), 0ULL), trials);
    res.encoder_errors = std::accumulate(enc_errors.begin(), enc_errors.end(), 0ULL);
    res.degenerate = std::accumulate(degen.begin(), degen.end(), 0ULL);
    return res;
}

LetterModel build_letter_model(const AccessStructure& a, const SortedFamily& fam,
                               const JointSourceSpec& source,
                               const std::vector<ConditionalKernel>& encoder_inputs,
                               const ChannelModel& channel) {
    LetterModel lm;
    lm.joint_z = build_joint_z(source, fam);

    const std::uint64_t z_total = lm.joint_z.space.total();
    const std::uint64_t x_total = channel.x_space().total();
    if (z_total > kJointWorkGuard / std::max<std::uint64_t>(1, x_total))
        throw ResourceError("per-letter system joint exceeds enumeration guard");

    std::vector<unsigned> zdig(a.message_count()), xdig(a.encoder_count());
    std::vector<std::vector<int>> enc_reads(a.encoder_count());
    for (int i = 0; i < a.encoder_count(); ++i) enc_reads[i] = mask::bits(a.messages_of_encoder(i));

    lm.decoder_joints.resize(a.decoder_count());
    std::vector<std::vector<int>> demanded(a.decoder_count());
    std::vector<std::uint64_t> zd_counts(a.decoder_count());
    for (int j = 0; j < a.decoder_count(); ++j) {
        demanded[j] = mask::bits(a.demand(j));
        FiniteDist& dj = lm.decoder_joints[j];
        for (int s : demanded[j]) dj.space.sizes.push_back(source.letter_sizes[s]);
        zd_counts[j] = dj.space.total();
        dj.space.sizes.push_back(channel.y_sizes[j]);
        dj.p.assign(dj.space.total(), 0.0);
    }

    std::vector<unsigned> sub;
    const FactorSpace xs = channel.x_space();
    for (std::uint64_t z = 0; z < z_total; ++z) {
        const double pz = lm.joint_z.p[z];
        if (pz == 0) continue;
        lm.joint_z.space.digits(z, zdig);
        for (std::uint64_t x = 0; x < x_total; ++x) {
            xs.digits(x, xdig);
            double px = pz;
            for (int i = 0; i < a.encoder_count() && px > 0; ++i) {
                sub.clear();
                for (int s : enc_reads[i]) sub.push_back(zdig[s]);
                px *= encoder_inputs[i].at(encoder_inputs[i].given.index(sub), xdig[i]);
            }
            if (px == 0) continue;
            for (int j = 0; j < a.decoder_count(); ++j) {
                std::uint64_t zd = 0;
                for (std::size_t t = demanded[j].size(); t-- > 0;)
                    zd = zd * source.letter_sizes[demanded[j][t]] + zdig[demanded[j][t]];
                FiniteDist& dj = lm.decoder_joints[j];
                for (unsigned yj = 0; yj < channel.y_sizes[j]; ++yj) {
                    const double py = channel.y_marginal_prob(j, x, yj);
                    if (py > 0)
                        dj.p[static_cast<std::uint64_t>(yj) * zd_counts[j] + zd] += px * py;
                }
            }
        }
    }
    return lm;
}

DecisionComparison stochastic_vs_map_ratio(const ConditionalKernel& posterior,
                                           const FiniteDist& prior) {
    if (posterior.given_count() != prior.p.size())
        throw std::invalid_argument("posterior conditioning space must match the prior");
    DecisionComparison cmp;
    for (std::uint64_t v = 0; v < posterior.given_count(); ++v) {
        double sq = 0, mx = 0;
        for (std::uint64_t u = 0; u < posterior.out_count(); ++u) {
            const double p = posterior.at(v, u);
            sq += p * p;
            mx = std::max(mx, p);
        }
        cmp.stochastic_error += prior.p[v] * (1.0 - sq);
        cmp.map_error += prior.p[v] * (1.0 - mx);
    }
    cmp.ratio = cmp.map_error > 0 ? cmp.stochastic_error / cmp.map_error
                                  : (cmp.stochastic_error > 0 ? 2.0 : 1.0);
    return cmp;
}

}  // namespace crngnet
