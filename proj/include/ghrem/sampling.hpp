#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "ghrem/core.hpp"
#include "ghrem/ids.hpp"

namespace ghrem {

using BigInt = boost::multiprecision::cpp_int;

/// Exact binomial coefficient.
BigInt risk_set_size(std::uint64_t n, std::uint64_t k);

/// Stream position and model identity pin down an independent generator per
/// stratum, so results do not depend on evaluation order or thread count.
inline constexpr std::uint64_t kAuthorModelTag = 1;
inline constexpr std::uint64_t kCitationModelTag = 2;

inline std::uint64_t stratum_seed(std::uint64_t master, std::uint64_t event_index,
                                  std::uint64_t model_tag) {
    std::uint64_t h = mix64(master ^ 0x243f6a8885a308d3ull);
    h = mix64(h ^ event_index);
    h = mix64(h ^ (model_tag * 0x452821e638d01377ull));
    return h;
}

/// Uniform draw from [0, bound) by rejection; identical across platforms.
std::uint64_t draw_below(std::mt19937_64& rng, std::uint64_t bound);

/// Uniform k-subset of [0, n), returned sorted.
std::vector<std::uint32_t> draw_subset(std::mt19937_64& rng, std::uint32_t n, std::uint32_t k);

/// One comparison stratum: the observed set plus size-matched control sets,
/// all distinct and none equal to the observed set. Controls are stored flat
/// with stride set_size.
template <typename Id>
struct Stratum {
    std::uint32_t event_index = 0;
    std::uint32_t set_size = 0;
    std::vector<Id> observed;
    std::vector<Id> controls;
    bool full_enumeration = false;
    BigInt n_alternatives;  // total candidate sets minus the observed one

    std::size_t n_controls() const { return set_size == 0 ? 0 : controls.size() / set_size; }
    std::span<const Id> control(std::size_t r) const {
        return {controls.data() + r * set_size, set_size};
    }
};

using AuthorStratum = Stratum<ActorId>;
using CitationStratum = Stratum<WorkId>;

struct SamplingConfig {
    std::size_t m_authors = 30000;
    std::size_t m_citations = 10000;
    std::uint64_t seed = 0;
};

/// Controls for the author set of one event: |A|-subsets of the registry.
/// Enumerates every alternative when there are at most m of them, otherwise
/// samples m distinct alternatives uniformly.
AuthorStratum sample_author_stratum(const EventStream& stream, std::uint32_t event_index,
                                    std::size_t m, std::uint64_t seed);

/// Controls for the reference list of one event: |C|-subsets of the works
/// published before it.
CitationStratum sample_citation_stratum(const EventStream& stream, std::uint32_t event_index,
                                        std::size_t m, std::uint64_t seed);

struct AuthorStrata {
    std::vector<AuthorStratum> strata;
    std::size_t skipped_no_alternatives = 0;
};

struct CitationStrata {
    std::vector<CitationStratum> strata;
    std::size_t skipped_no_citations = 0;
    std::size_t skipped_no_alternatives = 0;
};

AuthorStrata build_author_strata(const EventStream& stream, const SamplingConfig& config);
CitationStrata build_citation_strata(const EventStream& stream, const SamplingConfig& config);

}  // namespace ghrem
