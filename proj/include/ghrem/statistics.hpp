#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ghrem/core.hpp"
#include "ghrem/history.hpp"

namespace ghrem {

/// Covariates of a candidate author set. The two chilean kinds read the actor
/// attribute table; everything else reads the accumulated history.
enum class AuthorStat : std::uint8_t {
    ratio_chilean,
    heterogeneity_chilean,
    citation_pop_author,
    publication_activity,
    coauthor_pair_rep,
    coauthor_triple_rep,
    coauthor_quartet_rep,
    collab_with_citing_author,
    closure_by_coauthor,
    closure_by_citing_same_work,
};
inline constexpr std::size_t kAuthorStatCount = 10;

/// Covariates of a candidate reference list, given the publishing author set.
enum class CitationStat : std::uint8_t {
    citation_pop_work,
    cocitation_pop_pair,
    cocitation_pop_triple,
    citation_repetition,
    outdegree_pop,
    cite_work_and_its_citations,
    self_citation,
    adopt_citation_of_coauthor,
    cite_work_of_coauthor,
    author_cites_author_rep,
    author_cites_author_rec,
    cite_much_cited_authors,
    cocite_coauthor_pairs,
    author_cocitation,
};
inline constexpr std::size_t kCitationStatCount = 14;

std::string_view to_string(AuthorStat s);
std::string_view to_string(CitationStat s);
AuthorStat author_stat_from_string(std::string_view name);
CitationStat citation_stat_from_string(std::string_view name);

/// Kinds that read fixed actor attributes rather than the history. These are
/// never square-root transformed.
bool is_exogenous(AuthorStat s);
inline constexpr bool is_exogenous(CitationStat) { return false; }

double eval_author_stat(AuthorStat s, const HistoryIndex& history, const ActorRegistry& registry,
                        std::span<const ActorId> authors);

void eval_author_stats(std::span<const AuthorStat> kinds, const HistoryIndex& history,
                       const ActorRegistry& registry, std::span<const ActorId> authors,
                       std::span<double> out);

/// Per-stratum precomputation for reference-list covariates. The author set is
/// fixed within a stratum, so every per-cited-work contribution g(l) that only
/// depends on (A, l) is tabulated once and row evaluation reduces to sums over
/// the candidate list.
class CitationStatContext {
   public:
    CitationStatContext(const HistoryIndex& history, std::span<const ActorId> authors,
                        std::span<const CitationStat> kinds);

    void eval(std::span<const WorkId> cited, std::span<double> out) const;

    const HistoryIndex& history() const { return *history_; }
    std::span<const ActorId> authors() const { return authors_; }
    std::span<const CitationStat> kinds() const { return kinds_; }

   private:
    const HistoryIndex* history_;
    std::vector<ActorId> authors_;
    std::vector<CitationStat> kinds_;

    bool need_per_work_ = false;
    // Indexed by work id; each slot holds the per-work term of one statistic.
    std::vector<double> rep_;        // citation_repetition: mean over i of count(i cited l)
    std::vector<double> self_;       // self_citation: sum over i of 1(i authored l)
    std::vector<double> adopt_;      // adopt_citation_of_coauthor
    std::vector<double> work_co_;    // cite_work_of_coauthor
    std::vector<double> aa_rep_;     // author_cites_author_rep
    std::vector<double> aa_rec_;     // author_cites_author_rec
    std::vector<double> max_pop_;    // cite_much_cited_authors: max author popularity of l
};

double eval_citation_stat(CitationStat s, const HistoryIndex& history,
                          std::span<const ActorId> authors, std::span<const WorkId> cited);

void eval_citation_stats(std::span<const CitationStat> kinds, const HistoryIndex& history,
                         std::span<const ActorId> authors, std::span<const WorkId> cited,
                         std::span<double> out);

/// Column transform applied before estimation: square root, then shift to zero
/// mean and scale to unit sample standard deviation (n-1 denominator).
/// Columns listed in skip_sqrt keep their raw scale before standardizing;
/// the model layer puts the exogenous kinds there. Columns with zero variance
/// are zeroed out and flagged.
struct TransformSpec {
    bool sqrt_first = true;
    bool standardize = true;
    std::vector<bool> skip_sqrt;   // per column
    std::vector<double> mean;      // fitted, post-sqrt
    std::vector<double> sd;        // fitted, post-sqrt; 0 marks a degenerate column
    std::vector<bool> degenerate;  // fitted

    /// Computes per-column mean and sd over all rows of `columns` (column-major:
    /// columns[j][r]). Marks sd == 0 columns degenerate.
    void fit(std::span<const std::vector<double>> columns);

    /// Same fit through raw column pointers, for column-major matrix storage.
    void fit_columns(std::size_t n_rows, const double* const* columns, std::size_t n_cols);

    /// In-place transform of one row laid out in column order.
    void apply_row(std::span<double> row) const;

    bool any_degenerate() const;
};

}  // namespace ghrem
