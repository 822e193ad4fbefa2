#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "ghrem/core.hpp"
#include "ghrem/ids.hpp"

namespace ghrem {

/// Hash for small fixed-size index tuples (coauthor triples, quartets, cocited triples).
template <std::size_t N>
struct ArrayKeyHash {
    std::size_t operator()(const std::array<std::uint32_t, N>& key) const noexcept {
        std::uint64_t h = 0x9e3779b97f4a7c15ull;
        for (std::uint32_t v : key) h = mix64(h ^ v);
        return static_cast<std::size_t>(h);
    }
};

using PairCountMap = std::unordered_map<std::uint64_t, std::uint32_t>;
using TripleCountMap =
    std::unordered_map<std::array<std::uint32_t, 3>, std::uint32_t, ArrayKeyHash<3>>;
using QuadCountMap =
    std::unordered_map<std::array<std::uint32_t, 4>, std::uint32_t, ArrayKeyHash<4>>;

/// Incrementally maintained view of the publication history up to a point in
/// the event order. One call to apply_event per publication, in stream order.
///
/// The general counts cite_aw and subrep are defined for arbitrary author and
/// work sets; the named accessors below are the special cases the model's
/// statistics actually need, each maintained as a running tally so that
/// evaluation never rescans past events.
class HistoryIndex {
   public:
    HistoryIndex() = default;
    explicit HistoryIndex(std::uint32_t n_actors) { reset(n_actors); }

    void reset(std::uint32_t n_actors);

    std::uint32_t n_actors() const { return static_cast<std::uint32_t>(pub_count_.size()); }
    std::uint32_t n_works() const { return static_cast<std::uint32_t>(works_.size()); }

    /// Appends one publication. pub.work.v must equal n_works().
    void apply_event(const Publication& pub);

    // Count of past works whose author set contains all of `authors` and whose
    // reference set contains all of `cited`. Both arguments must be sorted and
    // duplicate-free. Empty/empty counts every past work.
    std::uint32_t cite_aw(std::span<const ActorId> authors, std::span<const WorkId> cited) const;

    // Mean of cite_aw over all k-subsets of `authors` crossed with all
    // kstar-subsets of `cited`. Zero when either set is too small; k and kstar
    // must not both be zero.
    double subrep(std::span<const ActorId> authors, std::span<const WorkId> cited, std::size_t k,
                  std::size_t kstar) const;

    // Directed: number of past works authored by i that cite at least one work of j.
    std::uint32_t cite_aa(ActorId i, ActorId j) const;

    // Number of past works citing at least one work authored by i.
    std::uint32_t citation_popularity(ActorId i) const { return cite_pop_.at(i.v); }

    // Number of past works authored jointly by i and j.
    std::uint32_t coauth(ActorId i, ActorId j) const;

    // Whether past work k cites work h.
    bool cite_ww(WorkId k, WorkId h) const;

    // Number of past works citing at least one work of i and at least one of j, i != j.
    std::uint32_t cocite_aa(ActorId i, ActorId j) const;

    // Named running tallies.
    std::uint32_t publication_count(ActorId i) const { return pub_count_.at(i.v); }
    std::uint32_t in_citations(WorkId w) const { return in_cit_.at(w.v); }
    std::uint32_t cocited_pair(WorkId a, WorkId b) const;
    std::uint32_t cocited_triple(WorkId a, WorkId b, WorkId c) const;
    std::uint32_t actor_cited_work(ActorId i, WorkId l) const;
    std::uint32_t coauthor_triple(ActorId a, ActorId b, ActorId c) const;
    std::uint32_t coauthor_quad(ActorId a, ActorId b, ActorId c, ActorId d) const;

    const std::unordered_map<std::uint32_t, std::uint32_t>& coauthors_of(ActorId i) const {
        return coauth_adj_.at(i.v);
    }
    const std::unordered_map<std::uint32_t, std::uint32_t>& works_cited_by(ActorId i) const {
        return cited_works_.at(i.v);
    }
    std::span<const ActorId> authors_of(WorkId w) const { return works_.at(w.v).authors; }
    std::span<const WorkId> citations_of(WorkId w) const { return works_.at(w.v).citations; }

    /// Versioned, checksummed binary snapshot of the applied event sequence.
    /// Load rebuilds all tallies by replay, so snapshots stay valid across
    /// internal layout changes.
    void save(const std::string& path) const;
    static HistoryIndex load(const std::string& path);

   private:
    struct WorkRecord {
        std::vector<ActorId> authors;
        std::vector<WorkId> citations;
    };

    std::vector<WorkRecord> works_;
    std::vector<std::uint32_t> pub_count_;  // works authored, per actor
    std::vector<std::uint32_t> cite_pop_;   // works citing >=1 work of actor
    std::vector<std::uint32_t> in_cit_;     // citations received, per work

    // coauth_adj_[i][j] = joint works of i and j, stored both directions
    std::vector<std::unordered_map<std::uint32_t, std::uint32_t>> coauth_adj_;
    // cite_aa_out_[i][j] = works of i citing >=1 work of j
    std::vector<std::unordered_map<std::uint32_t, std::uint32_t>> cite_aa_out_;
    // cited_works_[i][l] = works of i citing work l
    std::vector<std::unordered_map<std::uint32_t, std::uint32_t>> cited_works_;

    PairCountMap cocite_aa_;        // key pair_key(i,j), works citing both actors
    PairCountMap cocited_pairs_;    // key pair_key(k,h), works citing both works
    TripleCountMap cocited_triples_;
    TripleCountMap coauth_triples_;
    QuadCountMap coauth_quads_;
};

}  // namespace ghrem
