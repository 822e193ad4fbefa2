#include "ghrem/history.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace ghrem {

void HistoryIndex::reset(std::uint32_t n_actors) {
    works_.clear();
    pub_count_.assign(n_actors, 0);
    cite_pop_.assign(n_actors, 0);
    in_cit_.clear();
    coauth_adj_.assign(n_actors, {});
    cite_aa_out_.assign(n_actors, {});
    cited_works_.assign(n_actors, {});
    cocite_aa_.clear();
    cocited_pairs_.clear();
    cocited_triples_.clear();
    coauth_triples_.clear();
    coauth_quads_.clear();
}

namespace {

template <typename Id>
bool sorted_unique(std::span<const Id> v) {
    for (std::size_t i = 1; i < v.size(); ++i)
        if (!(v[i - 1] < v[i])) return false;
    return true;
}

}  // namespace

void HistoryIndex::apply_event(const Publication& pub) {
    if (pub.work.v != n_works())
        throw std::logic_error("events must be applied in stream order");
    if (!sorted_unique<ActorId>(pub.authors) || !sorted_unique<WorkId>(pub.citations))
        throw std::logic_error("publication member sets must be sorted and duplicate-free");
    const auto& A = pub.authors;
    const auto& C = pub.citations;
    for (ActorId a : A)
        if (a.v >= n_actors()) throw std::out_of_range("author index out of range");
    for (WorkId c : C)
        if (c.v >= n_works()) throw std::logic_error("citation of a work not yet published");

    for (ActorId a : A) ++pub_count_[a.v];

    for (std::size_t i = 0; i < A.size(); ++i)
        for (std::size_t j = i + 1; j < A.size(); ++j) {
            ++coauth_adj_[A[i].v][A[j].v];
            ++coauth_adj_[A[j].v][A[i].v];
        }
    for (std::size_t i = 0; i < A.size(); ++i)
        for (std::size_t j = i + 1; j < A.size(); ++j)
            for (std::size_t k = j + 1; k < A.size(); ++k)
                ++coauth_triples_[{A[i].v, A[j].v, A[k].v}];
    for (std::size_t i = 0; i < A.size(); ++i)
        for (std::size_t j = i + 1; j < A.size(); ++j)
            for (std::size_t k = j + 1; k < A.size(); ++k)
                for (std::size_t l = k + 1; l < A.size(); ++l)
                    ++coauth_quads_[{A[i].v, A[j].v, A[k].v, A[l].v}];

    for (WorkId c : C) ++in_cit_[c.v];
    for (std::size_t i = 0; i < C.size(); ++i)
        for (std::size_t j = i + 1; j < C.size(); ++j)
            ++cocited_pairs_[pair_key(C[i].v, C[j].v)];
    for (std::size_t i = 0; i < C.size(); ++i)
        for (std::size_t j = i + 1; j < C.size(); ++j)
            for (std::size_t k = j + 1; k < C.size(); ++k)
                ++cocited_triples_[{C[i].v, C[j].v, C[k].v}];

    for (ActorId a : A)
        for (WorkId c : C) ++cited_works_[a.v][c.v];

    // Actors reached through the cited works, each counted once per event.
    std::vector<std::uint32_t> cited_authors;
    for (WorkId c : C)
        for (ActorId j : works_[c.v].authors) cited_authors.push_back(j.v);
    std::sort(cited_authors.begin(), cited_authors.end());
    cited_authors.erase(std::unique(cited_authors.begin(), cited_authors.end()),
                        cited_authors.end());

    for (std::uint32_t j : cited_authors) ++cite_pop_[j];
    for (ActorId a : A)
        for (std::uint32_t j : cited_authors) ++cite_aa_out_[a.v][j];
    for (std::size_t i = 0; i < cited_authors.size(); ++i)
        for (std::size_t j = i + 1; j < cited_authors.size(); ++j)
            ++cocite_aa_[pair_key(cited_authors[i], cited_authors[j])];

    in_cit_.push_back(0);
    works_.push_back(WorkRecord{A, C});
}

std::uint32_t HistoryIndex::cite_aw(std::span<const ActorId> authors,
                                    std::span<const WorkId> cited) const {
    if (!sorted_unique(authors) || !sorted_unique(cited))
        throw std::invalid_argument("cite_aw arguments must be sorted and duplicate-free");

    // Named-tally special cases; the general scan below covers the rest.
    if (cited.empty()) {
        switch (authors.size()) {
            case 0: return n_works();
            case 1: return pub_count_[authors[0].v];
            case 2: return coauth(authors[0], authors[1]);
            case 3: return coauthor_triple(authors[0], authors[1], authors[2]);
            case 4: return coauthor_quad(authors[0], authors[1], authors[2], authors[3]);
            default: break;
        }
    } else if (authors.empty()) {
        switch (cited.size()) {
            case 1: return in_cit_[cited[0].v];
            case 2: return cocited_pair(cited[0], cited[1]);
            case 3: return cocited_triple(cited[0], cited[1], cited[2]);
            default: break;
        }
    } else if (authors.size() == 1 && cited.size() == 1) {
        return actor_cited_work(authors[0], cited[0]);
    }

    std::uint32_t count = 0;
    for (const WorkRecord& w : works_) {
        if (!std::includes(w.authors.begin(), w.authors.end(), authors.begin(), authors.end()))
            continue;
        if (!std::includes(w.citations.begin(), w.citations.end(), cited.begin(), cited.end()))
            continue;
        ++count;
    }
    return count;
}

namespace {

double binom(std::size_t n, std::size_t k) {
    if (k > n) return 0.0;
    double r = 1.0;
    for (std::size_t i = 0; i < k; ++i) r = r * static_cast<double>(n - i) / static_cast<double>(i + 1);
    return r;
}

// Visits every k-subset of indices [0, n), writing it into `pick`.
template <typename Fn>
void for_each_subset(std::size_t n, std::size_t k, std::vector<std::size_t>& pick, Fn&& fn) {
    if (k == 0) {
        fn();
        return;
    }
    pick.assign(k, 0);
    for (std::size_t i = 0; i < k; ++i) pick[i] = i;
    while (true) {
        fn();
        std::size_t i = k;
        while (i > 0 && pick[i - 1] == n - k + (i - 1)) --i;
        if (i == 0) break;
        ++pick[i - 1];
        for (std::size_t j = i; j < k; ++j) pick[j] = pick[j - 1] + 1;
    }
}

}  // namespace

double HistoryIndex::subrep(std::span<const ActorId> authors, std::span<const WorkId> cited,
                            std::size_t k, std::size_t kstar) const {
    if (k == 0 && kstar == 0) throw std::invalid_argument("subrep requires k + kstar > 0");
    if (authors.size() < k || cited.size() < kstar) return 0.0;

    std::vector<ActorId> sub_a(k);
    std::vector<WorkId> sub_c(kstar);
    std::vector<std::size_t> pick_a, pick_c;
    std::uint64_t total = 0;
    for_each_subset(authors.size(), k, pick_a, [&] {
        for (std::size_t i = 0; i < k; ++i) sub_a[i] = authors[pick_a[i]];
        for_each_subset(cited.size(), kstar, pick_c, [&] {
            for (std::size_t i = 0; i < kstar; ++i) sub_c[i] = cited[pick_c[i]];
            total += cite_aw(sub_a, sub_c);
        });
    });
    return static_cast<double>(total) / (binom(authors.size(), k) * binom(cited.size(), kstar));
}

std::uint32_t HistoryIndex::cite_aa(ActorId i, ActorId j) const {
    if (i == j) throw std::invalid_argument("cite_aa requires distinct actors");
    const auto& out = cite_aa_out_.at(i.v);
    auto it = out.find(j.v);
    return it == out.end() ? 0 : it->second;
}

std::uint32_t HistoryIndex::coauth(ActorId i, ActorId j) const {
    if (i == j) throw std::invalid_argument("coauth requires distinct actors");
    const auto& adj = coauth_adj_.at(i.v);
    auto it = adj.find(j.v);
    return it == adj.end() ? 0 : it->second;
}

bool HistoryIndex::cite_ww(WorkId k, WorkId h) const {
    const auto& c = works_.at(k.v).citations;
    return std::binary_search(c.begin(), c.end(), h);
}

std::uint32_t HistoryIndex::cocite_aa(ActorId i, ActorId j) const {
    if (i == j) throw std::invalid_argument("cocite_aa requires distinct actors");
    auto it = cocite_aa_.find(pair_key(i.v, j.v));
    return it == cocite_aa_.end() ? 0 : it->second;
}

std::uint32_t HistoryIndex::cocited_pair(WorkId a, WorkId b) const {
    if (a == b) throw std::invalid_argument("cocited_pair requires distinct works");
    auto it = cocited_pairs_.find(pair_key(a.v, b.v));
    return it == cocited_pairs_.end() ? 0 : it->second;
}

std::uint32_t HistoryIndex::cocited_triple(WorkId a, WorkId b, WorkId c) const {
    std::array<std::uint32_t, 3> key{a.v, b.v, c.v};
    std::sort(key.begin(), key.end());
    if (key[0] == key[1] || key[1] == key[2])
        throw std::invalid_argument("cocited_triple requires distinct works");
    auto it = cocited_triples_.find(key);
    return it == cocited_triples_.end() ? 0 : it->second;
}

std::uint32_t HistoryIndex::actor_cited_work(ActorId i, WorkId l) const {
    const auto& m = cited_works_.at(i.v);
    auto it = m.find(l.v);
    return it == m.end() ? 0 : it->second;
}

std::uint32_t HistoryIndex::coauthor_triple(ActorId a, ActorId b, ActorId c) const {
    std::array<std::uint32_t, 3> key{a.v, b.v, c.v};
    std::sort(key.begin(), key.end());
    if (key[0] == key[1] || key[1] == key[2])
        throw std::invalid_argument("coauthor_triple requires distinct actors");
    auto it = coauth_triples_.find(key);
    return it == coauth_triples_.end() ? 0 : it->second;
}

std::uint32_t HistoryIndex::coauthor_quad(ActorId a, ActorId b, ActorId c, ActorId d) const {
    std::array<std::uint32_t, 4> key{a.v, b.v, c.v, d.v};
    std::sort(key.begin(), key.end());
    for (std::size_t i = 1; i < 4; ++i)
        if (key[i - 1] == key[i]) throw std::invalid_argument("coauthor_quad requires distinct actors");
    auto it = coauth_quads_.find(key);
    return it == coauth_quads_.end() ? 0 : it->second;
}

namespace {

constexpr std::uint32_t kSnapshotMagic = 0x47485249;  // "GHRI"
constexpr std::uint32_t kSnapshotVersion = 1;

std::uint64_t fnv1a(const unsigned char* data, std::size_t n) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (std::size_t i = 0; i < n; ++i) {
        h ^= data[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

void put_u32(std::string& buf, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint32_t get_u32(const std::string& buf, std::size_t& pos) {
    if (pos + 4 > buf.size()) throw std::runtime_error("snapshot truncated");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
        v |= static_cast<std::uint32_t>(static_cast<unsigned char>(buf[pos + i])) << (8 * i);
    pos += 4;
    return v;
}

}  // namespace

void HistoryIndex::save(const std::string& path) const {
    std::string body;
    put_u32(body, n_actors());
    put_u32(body, n_works());
    for (const WorkRecord& w : works_) {
        put_u32(body, static_cast<std::uint32_t>(w.authors.size()));
        for (ActorId a : w.authors) put_u32(body, a.v);
        put_u32(body, static_cast<std::uint32_t>(w.citations.size()));
        for (WorkId c : w.citations) put_u32(body, c.v);
    }

    std::string out;
    put_u32(out, kSnapshotMagic);
    put_u32(out, kSnapshotVersion);
    std::uint64_t checksum = fnv1a(reinterpret_cast<const unsigned char*>(body.data()), body.size());
    put_u32(out, static_cast<std::uint32_t>(checksum & 0xffffffffull));
    put_u32(out, static_cast<std::uint32_t>(checksum >> 32));
    out += body;

    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write snapshot: " + path);
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw std::runtime_error("short write on snapshot: " + path);
}

HistoryIndex HistoryIndex::load(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open snapshot: " + path);
    std::string buf((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());

    std::size_t pos = 0;
    if (get_u32(buf, pos) != kSnapshotMagic) throw std::runtime_error("not a history snapshot");
    std::uint32_t version = get_u32(buf, pos);
    if (version != kSnapshotVersion)
        throw std::runtime_error("unsupported snapshot version " + std::to_string(version));
    std::uint64_t lo = get_u32(buf, pos);
    std::uint64_t hi = get_u32(buf, pos);
    std::uint64_t expected = lo | (hi << 32);
    std::uint64_t actual =
        fnv1a(reinterpret_cast<const unsigned char*>(buf.data()) + pos, buf.size() - pos);
    if (expected != actual) throw std::runtime_error("snapshot checksum mismatch");

    std::uint32_t n_actors = get_u32(buf, pos);
    std::uint32_t n_works = get_u32(buf, pos);
    HistoryIndex index(n_actors);
    for (std::uint32_t w = 0; w < n_works; ++w) {
        Publication pub;
        pub.work = WorkId{w};
        std::uint32_t na = get_u32(buf, pos);
        pub.authors.reserve(na);
        for (std::uint32_t i = 0; i < na; ++i) pub.authors.push_back(ActorId{get_u32(buf, pos)});
        std::uint32_t nc = get_u32(buf, pos);
        pub.citations.reserve(nc);
        for (std::uint32_t i = 0; i < nc; ++i) pub.citations.push_back(WorkId{get_u32(buf, pos)});
        index.apply_event(pub);
    }
    if (pos != buf.size()) throw std::runtime_error("snapshot has trailing bytes");
    return index;
}

}  // namespace ghrem
