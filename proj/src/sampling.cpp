#include "ghrem/sampling.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_set>

namespace ghrem {

BigInt risk_set_size(std::uint64_t n, std::uint64_t k) {
    if (k > n) return 0;
    if (k > n - k) k = n - k;
    BigInt r = 1;
    // Multiplying before dividing keeps every intermediate quotient integral.
    for (std::uint64_t i = 0; i < k; ++i) {
        r *= n - i;
        r /= i + 1;
    }
    return r;
}

std::uint64_t draw_below(std::mt19937_64& rng, std::uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("draw_below requires bound > 0");
    const std::uint64_t threshold = (0 - bound) % bound;  // 2^64 mod bound
    for (;;) {
        std::uint64_t r = rng();
        if (r >= threshold) return r % bound;
    }
}

std::vector<std::uint32_t> draw_subset(std::mt19937_64& rng, std::uint32_t n, std::uint32_t k) {
    if (k > n) throw std::invalid_argument("subset size exceeds ground set");
    // Floyd's sampler: each k-subset equally likely.
    std::vector<std::uint32_t> out;
    out.reserve(k);
    for (std::uint32_t j = n - k; j < n; ++j) {
        auto t = static_cast<std::uint32_t>(draw_below(rng, j + 1));
        if (std::find(out.begin(), out.end(), t) != out.end())
            out.push_back(j);
        else
            out.push_back(t);
    }
    std::sort(out.begin(), out.end());
    return out;
}

namespace {

struct VecHash {
    std::size_t operator()(const std::vector<std::uint32_t>& v) const noexcept {
        std::uint64_t h = 0x9e3779b97f4a7c15ull;
        for (std::uint32_t x : v) h = mix64(h ^ x);
        return static_cast<std::size_t>(h);
    }
};

// Visits all k-subsets of [0, n) in lexicographic order.
template <typename Fn>
void enumerate_subsets(std::uint32_t n, std::uint32_t k, Fn&& fn) {
    if (k > n) return;
    std::vector<std::uint32_t> pick(k);
    for (std::uint32_t i = 0; i < k; ++i) pick[i] = i;
    for (;;) {
        fn(pick);
        std::uint32_t i = k;
        while (i > 0 && pick[i - 1] == n - k + (i - 1)) --i;
        if (i == 0) break;
        ++pick[i - 1];
        for (std::uint32_t j = i; j < k; ++j) pick[j] = pick[j - 1] + 1;
    }
}

// Shared body of the two samplers: observed is a sorted k-subset of [0, n).
// Enumerates when the alternative count fits in m, otherwise rejection-samples
// m distinct subsets, each alternative equally likely.
template <typename Id>
void fill_stratum(Stratum<Id>& stratum, std::uint32_t n, std::size_t m, std::uint64_t seed) {
    const std::uint32_t k = stratum.set_size;
    std::vector<std::uint32_t> observed(k);
    for (std::uint32_t i = 0; i < k; ++i) observed[i] = stratum.observed[i].v;

    stratum.n_alternatives = risk_set_size(n, k) - 1;
    if (stratum.n_alternatives <= 0) return;

    if (stratum.n_alternatives <= BigInt(m)) {
        stratum.full_enumeration = true;
        stratum.controls.reserve(static_cast<std::size_t>(stratum.n_alternatives) * k);
        enumerate_subsets(n, k, [&](const std::vector<std::uint32_t>& pick) {
            if (pick == observed) return;
            for (std::uint32_t x : pick) stratum.controls.push_back(Id{x});
        });
        return;
    }

    std::mt19937_64 rng(seed);
    std::unordered_set<std::vector<std::uint32_t>, VecHash> seen;
    seen.reserve(m * 2);
    seen.insert(observed);
    stratum.controls.reserve(m * k);
    std::size_t accepted = 0;
    while (accepted < m) {
        std::vector<std::uint32_t> pick = draw_subset(rng, n, k);
        if (!seen.insert(pick).second) continue;
        for (std::uint32_t x : pick) stratum.controls.push_back(Id{x});
        ++accepted;
    }
}

}  // namespace

AuthorStratum sample_author_stratum(const EventStream& stream, std::uint32_t event_index,
                                    std::size_t m, std::uint64_t seed) {
    const Publication& pub = stream.publications.at(event_index);
    AuthorStratum stratum;
    stratum.event_index = event_index;
    stratum.set_size = static_cast<std::uint32_t>(pub.authors.size());
    stratum.observed = pub.authors;
    fill_stratum(stratum, stream.registry.size(), m,
                 stratum_seed(seed, event_index, kAuthorModelTag));
    return stratum;
}

CitationStratum sample_citation_stratum(const EventStream& stream, std::uint32_t event_index,
                                        std::size_t m, std::uint64_t seed) {
    const Publication& pub = stream.publications.at(event_index);
    CitationStratum stratum;
    stratum.event_index = event_index;
    stratum.set_size = static_cast<std::uint32_t>(pub.citations.size());
    stratum.observed = pub.citations;
    // Works published before this event form the candidate pool.
    fill_stratum(stratum, event_index, m, stratum_seed(seed, event_index, kCitationModelTag));
    return stratum;
}

AuthorStrata build_author_strata(const EventStream& stream, const SamplingConfig& config) {
    AuthorStrata out;
    out.strata.reserve(stream.publications.size());
    for (std::uint32_t e = 0; e < stream.publications.size(); ++e) {
        AuthorStratum s = sample_author_stratum(stream, e, config.m_authors, config.seed);
        if (s.n_controls() == 0) {
            ++out.skipped_no_alternatives;
            continue;
        }
        out.strata.push_back(std::move(s));
    }
    return out;
}

CitationStrata build_citation_strata(const EventStream& stream, const SamplingConfig& config) {
    CitationStrata out;
    out.strata.reserve(stream.publications.size());
    for (std::uint32_t e = 0; e < stream.publications.size(); ++e) {
        if (stream.publications[e].citations.empty()) {
            ++out.skipped_no_citations;
            continue;
        }
        CitationStratum s = sample_citation_stratum(stream, e, config.m_citations, config.seed);
        if (s.n_controls() == 0) {
            ++out.skipped_no_alternatives;
            continue;
        }
        out.strata.push_back(std::move(s));
    }
    return out;
}

}  // namespace ghrem
