#include "ghrem/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "ghrem/design.hpp"
#include "ghrem/estimation.hpp"
#include "ghrem/history.hpp"
#include "ghrem/sampling.hpp"

namespace ghrem {

namespace {

double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Draws an index from non-negative weights; weights need not be normalized.
std::size_t draw_categorical(std::mt19937_64& rng, std::span<const double> weights) {
    double total = 0;
    for (double w : weights) total += w;
    if (!(total > 0)) throw std::runtime_error("categorical draw over empty support");
    double u = uniform01(rng) * total;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        u -= weights[i];
        if (u <= 0) return i;
    }
    return weights.size() - 1;
}

std::uint32_t draw_size(std::mt19937_64& rng, std::span<const double> pmf) {
    return static_cast<std::uint32_t>(draw_categorical(rng, pmf));
}

void validate_pmf(std::span<const double> pmf, bool forbid_zero, const char* which) {
    double total = 0;
    for (double w : pmf) {
        if (w < 0) throw std::invalid_argument(std::string(which) + " size weights must be >= 0");
        total += w;
    }
    if (!(total > 0)) throw std::invalid_argument(std::string(which) + " size weights are empty");
    if (forbid_zero && !pmf.empty() && pmf[0] != 0)
        throw std::invalid_argument(std::string(which) + " sets cannot be empty");
}

// Exact draw: enumerate all k-subsets of [0, n), weight by exp(score), pick one.
template <typename Id, typename Eval>
std::vector<Id> draw_exact(std::mt19937_64& rng, std::uint32_t n, std::uint32_t k,
                           std::size_t limit, Eval&& eval) {
    BigInt count = risk_set_size(n, k);
    if (count > BigInt(limit))
        throw std::runtime_error(
            "candidate space too large for exact enumeration; use the chain sampler");

    std::vector<std::vector<Id>> sets;
    sets.reserve(static_cast<std::size_t>(count));
    std::vector<double> scores;
    scores.reserve(static_cast<std::size_t>(count));

    std::vector<std::uint32_t> pick(k);
    for (std::uint32_t i = 0; i < k; ++i) pick[i] = i;
    for (;;) {
        std::vector<Id> set(k);
        for (std::uint32_t i = 0; i < k; ++i) set[i] = Id{pick[i]};
        scores.push_back(eval(std::span<const Id>(set)));
        sets.push_back(std::move(set));
        std::uint32_t i = k;
        while (i > 0 && pick[i - 1] == n - k + (i - 1)) --i;
        if (i == 0) break;
        ++pick[i - 1];
        for (std::uint32_t j = i; j < k; ++j) pick[j] = pick[j - 1] + 1;
    }

    const double shift = *std::max_element(scores.begin(), scores.end());
    std::vector<double> weights(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) weights[i] = std::exp(scores[i] - shift);
    return sets[draw_categorical(rng, weights)];
}

// Approximate draw: uniform start, then swap-one-element Metropolis steps.
template <typename Id, typename Eval>
std::vector<Id> draw_chain(std::mt19937_64& rng, std::uint32_t n, std::uint32_t k,
                           std::size_t sweeps, Eval&& eval) {
    std::vector<std::uint32_t> raw = draw_subset(rng, n, k);
    std::vector<Id> state(k);
    for (std::uint32_t i = 0; i < k; ++i) state[i] = Id{raw[i]};
    if (k == n) return state;

    double score = eval(std::span<const Id>(state));
    const std::size_t steps = sweeps * k;
    for (std::size_t step = 0; step < steps; ++step) {
        const auto pos = static_cast<std::size_t>(draw_below(rng, k));
        std::uint32_t candidate;
        do {
            candidate = static_cast<std::uint32_t>(draw_below(rng, n));
        } while (std::any_of(state.begin(), state.end(),
                             [&](Id x) { return x.v == candidate; }));

        std::vector<Id> proposal = state;
        proposal[pos] = Id{candidate};
        std::sort(proposal.begin(), proposal.end());
        double new_score = eval(std::span<const Id>(proposal));
        if (new_score >= score || uniform01(rng) < std::exp(new_score - score)) {
            state = std::move(proposal);
            score = new_score;
        }
    }
    return state;
}

std::string padded_name(char prefix, std::uint32_t i) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%c%05u", prefix, i);
    return buf;
}

}  // namespace

EventStream simulate(const SimulationConfig& config) {
    if (config.n_actors == 0) throw std::invalid_argument("need at least one actor");
    validate_pmf(config.author_size_pmf, true, "author");
    validate_pmf(config.citation_size_pmf, false, "citation");
    for (std::size_t s = config.n_actors + 1; s < config.author_size_pmf.size(); ++s)
        if (config.author_size_pmf[s] > 0)
            throw std::invalid_argument("author set size exceeds the actor count");

    EventStream stream;
    const auto n_chilean = static_cast<std::uint32_t>(
        std::lround(config.chilean_fraction * config.n_actors));
    for (std::uint32_t i = 0; i < config.n_actors; ++i)
        stream.registry.add(padded_name('a', i), i < n_chilean);

    std::vector<AuthorStat> author_kinds;
    Eigen::VectorXd theta(static_cast<Eigen::Index>(config.author_effects.size()));
    for (std::size_t j = 0; j < config.author_effects.size(); ++j) {
        author_kinds.push_back(config.author_effects[j].first);
        theta(static_cast<Eigen::Index>(j)) = config.author_effects[j].second;
    }
    std::vector<CitationStat> citation_kinds;
    Eigen::VectorXd gamma(static_cast<Eigen::Index>(config.citation_effects.size()));
    for (std::size_t j = 0; j < config.citation_effects.size(); ++j) {
        citation_kinds.push_back(config.citation_effects[j].first);
        gamma(static_cast<Eigen::Index>(j)) = config.citation_effects[j].second;
    }

    HistoryIndex history(config.n_actors);
    std::mt19937_64 rng(mix64(config.seed ^ 0x5851f42d4c957f2dull));

    auto author_score = [&](std::span<const ActorId> set) {
        double v = 0;
        for (std::size_t j = 0; j < author_kinds.size(); ++j)
            v += theta(static_cast<Eigen::Index>(j)) *
                 eval_author_stat(author_kinds[j], history, stream.registry, set);
        return v;
    };

    for (std::uint32_t e = 0; e < config.n_events; ++e) {
        const std::uint32_t ka = draw_size(rng, config.author_size_pmf);

        std::vector<ActorId> authors;
        if (author_kinds.empty()) {
            std::vector<std::uint32_t> raw = draw_subset(rng, config.n_actors, ka);
            for (std::uint32_t v : raw) authors.push_back(ActorId{v});
        } else if (config.mode == ProposalMode::Exact) {
            authors = draw_exact<ActorId>(rng, config.n_actors, ka,
                                          config.exact_enumeration_limit, author_score);
        } else {
            authors = draw_chain<ActorId>(rng, config.n_actors, ka, config.chain_sweeps,
                                          author_score);
        }

        const std::uint32_t kc_wanted = draw_size(rng, config.citation_size_pmf);
        const std::uint32_t kc = std::min(kc_wanted, e);

        std::vector<WorkId> citations;
        if (kc > 0) {
            if (citation_kinds.empty()) {
                std::vector<std::uint32_t> raw = draw_subset(rng, e, kc);
                for (std::uint32_t v : raw) citations.push_back(WorkId{v});
            } else {
                auto citation_score = [&](std::span<const WorkId> set) {
                    double v = 0;
                    for (std::size_t j = 0; j < citation_kinds.size(); ++j)
                        v += gamma(static_cast<Eigen::Index>(j)) *
                             eval_citation_stat(citation_kinds[j], history, authors, set);
                    return v;
                };
                if (config.mode == ProposalMode::Exact)
                    citations = draw_exact<WorkId>(rng, e, kc, config.exact_enumeration_limit,
                                                   citation_score);
                else
                    citations = draw_chain<WorkId>(rng, e, kc, config.chain_sweeps,
                                                   citation_score);
            }
        }

        Publication pub;
        pub.work = WorkId{e};
        pub.seq = e;
        pub.source_seq = e;
        pub.authors = std::move(authors);
        pub.citations = std::move(citations);

        std::string name = padded_name('w', e);
        stream.work_by_name.emplace(name, pub.work);
        stream.work_names.push_back(std::move(name));
        history.apply_event(pub);
        stream.publications.push_back(std::move(pub));
    }
    return stream;
}

RecoveryReport run_recovery(const RecoveryConfig& config) {
    RecoveryReport report;
    bool found = false;
    for (const auto& [kind, value] : config.simulation.author_effects)
        if (kind == config.focal) {
            report.theta_true = value;
            found = true;
        }
    if (!found) throw std::invalid_argument("focal statistic has no configured coefficient");

    const std::vector<AuthorStat> kinds{config.focal};
    DesignOptions design_options;
    design_options.sqrt_transform = false;  // the generator works on the raw scale
    design_options.standardize = true;

    for (std::size_t r = 0; r < config.replicates; ++r) {
        SimulationConfig sim = config.simulation;
        sim.seed = mix64(config.simulation.seed + 0x9e3779b97f4a7c15ull * (r + 1));
        EventStream stream = simulate(sim);

        SamplingConfig sampling;
        sampling.m_authors = config.m_controls;
        sampling.seed = mix64(config.fit_seed + 0x9e3779b97f4a7c15ull * (r + 1));
        DesignResult design = build_author_design(stream, kinds, sampling, design_options);
        FitResult fitted = fit(design.data);

        RecoveryReplicate rep;
        rep.converged = fitted.converged;
        rep.beta = fitted.beta(0);
        rep.se = fitted.se_robust(0);
        rep.scale = design.transform.sd[0];
        rep.theta_hat = rep.beta / rep.scale;
        rep.theta_se = rep.se / rep.scale;
        const double lo = rep.theta_hat - 1.959963984540054 * rep.theta_se;
        const double hi = rep.theta_hat + 1.959963984540054 * rep.theta_se;
        rep.covered = lo <= report.theta_true && report.theta_true <= hi;
        report.replicates.push_back(rep);
    }

    double sum = 0;
    for (const auto& rep : report.replicates) {
        report.n_covered += rep.covered ? 1 : 0;
        sum += rep.theta_hat;
    }
    const auto R = static_cast<double>(report.replicates.size());
    report.mean_theta = sum / R;
    report.mean_bias = report.mean_theta - report.theta_true;
    double ss = 0;
    for (const auto& rep : report.replicates) {
        const double d = rep.theta_hat - report.mean_theta;
        ss += d * d;
    }
    report.mc_se = R > 1 ? std::sqrt(ss / (R - 1.0) / R) : 0.0;
    return report;
}

}  // namespace ghrem
