#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ghrem/core.hpp"
#include "ghrem/estimation.hpp"
#include "ghrem/sampling.hpp"
#include "ghrem/statistics.hpp"

namespace ghrem {

struct DesignOptions {
    bool sqrt_transform = true;
    bool standardize = true;
    /// Repetition of own past citations is transformed like the other history
    /// statistics by default; turning this off keeps it on the raw scale for
    /// sensitivity runs.
    bool sqrt_citation_repetition = true;
    bool keep_raw = false;
    int threads = 0;
};

struct DesignStratumInfo {
    std::uint32_t event_index = 0;
    std::size_t n_controls = 0;
    bool full_enumeration = false;
    std::string n_alternatives;  // exact count of candidate sets minus the observed one
};

struct DesignResult {
    ChoiceData data;        // transformed covariates, observed row first per stratum
    Eigen::MatrixXd raw;    // untransformed rows, kept only with keep_raw
    TransformSpec transform;
    std::vector<DesignStratumInfo> info;
    std::size_t skipped_no_citations = 0;
    std::size_t skipped_no_alternatives = 0;
};

DesignResult build_author_design(const EventStream& stream, std::span<const AuthorStat> kinds,
                                 const SamplingConfig& sampling, const DesignOptions& options = {});

DesignResult build_citation_design(const EventStream& stream, std::span<const CitationStat> kinds,
                                   const SamplingConfig& sampling,
                                   const DesignOptions& options = {});

/// Raw statistic values of the observed sets, one row per publication, history
/// advanced along the stream. Used by the descriptive output path.
Eigen::MatrixXd observed_author_stats(const EventStream& stream, std::span<const AuthorStat> kinds);
Eigen::MatrixXd observed_citation_stats(const EventStream& stream,
                                        std::span<const CitationStat> kinds);

namespace reference {
/// Serial builder evaluating every row through the single-set entry points,
/// with no per-stratum precomputation. Must agree exactly with the parallel
/// builder; kept for tests and the benchmark.
DesignResult build_author_design(const EventStream& stream, std::span<const AuthorStat> kinds,
                                 const SamplingConfig& sampling, const DesignOptions& options = {});
DesignResult build_citation_design(const EventStream& stream, std::span<const CitationStat> kinds,
                                   const SamplingConfig& sampling,
                                   const DesignOptions& options = {});
}  // namespace reference

}  // namespace ghrem
