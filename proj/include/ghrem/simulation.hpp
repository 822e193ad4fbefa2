#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "ghrem/core.hpp"
#include "ghrem/statistics.hpp"

namespace ghrem {

/// How candidate sets are drawn from the model distribution. Exact mode
/// enumerates every size-matched set and draws from the normalized weights;
/// chain mode runs a swap-one-element Metropolis walk and is approximate.
enum class ProposalMode { Exact, Chain };

struct SimulationConfig {
    std::uint32_t n_actors = 30;
    std::uint32_t n_events = 500;
    std::uint64_t seed = 1;
    double chilean_fraction = 0.0;  // leading fraction of actors gets the attribute
    std::vector<double> author_size_pmf;    // index s = weight of |A| == s; index 0 must be 0
    std::vector<double> citation_size_pmf;  // index s = weight of |C| == s, truncated to history
    std::vector<std::pair<AuthorStat, double>> author_effects;      // raw-scale coefficients
    std::vector<std::pair<CitationStat, double>> citation_effects;  // raw-scale coefficients
    ProposalMode mode = ProposalMode::Exact;
    std::size_t chain_sweeps = 40;  // proposals per element in chain mode
    /// Exact mode refuses to enumerate more candidate sets than this.
    std::size_t exact_enumeration_limit = 2'000'000;
};

/// Sequentially generates a stream: at each step the author set and then the
/// reference list are drawn with probability proportional to exp(effects ·
/// raw statistics) given the history so far.
EventStream simulate(const SimulationConfig& config);

struct RecoveryConfig {
    SimulationConfig simulation;
    std::size_t replicates = 20;
    std::size_t m_controls = 500;
    std::uint64_t fit_seed = 99;  // control-sampling seed; varied per replicate
    AuthorStat focal = AuthorStat::coauthor_pair_rep;
};

struct RecoveryReplicate {
    double beta = 0.0;      // standardized scale
    double se = 0.0;
    double scale = 0.0;     // fitted sd of the focal column
    double theta_hat = 0.0;  // raw scale: beta / scale
    double theta_se = 0.0;
    bool covered = false;   // true coefficient inside the 95% interval
    bool converged = false;
};

struct RecoveryReport {
    double theta_true = 0.0;
    std::vector<RecoveryReplicate> replicates;
    std::size_t n_covered = 0;
    double mean_theta = 0.0;
    double mean_bias = 0.0;
    double mc_se = 0.0;  // standard error of the replicate mean
};

/// Simulate-and-refit study for one author-model coefficient. Each replicate
/// simulates a fresh stream, rebuilds a design with standardization only (the
/// generator works on the raw scale, so the square root stays off), fits, and
/// maps the estimate back to the raw scale through the fitted column sd.
RecoveryReport run_recovery(const RecoveryConfig& config);

}  // namespace ghrem
