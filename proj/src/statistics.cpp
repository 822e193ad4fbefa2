#include "ghrem/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ghrem {

namespace {

double choose2(std::size_t n) { return 0.5 * static_cast<double>(n) * static_cast<double>(n - 1); }

double binom(std::size_t n, std::size_t k) {
    if (k > n) return 0.0;
    double r = 1.0;
    for (std::size_t i = 0; i < k; ++i)
        r = r * static_cast<double>(n - i) / static_cast<double>(i + 1);
    return r;
}

bool contains(std::span<const ActorId> sorted, ActorId a) {
    return std::binary_search(sorted.begin(), sorted.end(), a);
}

}  // namespace

std::string_view to_string(AuthorStat s) {
    switch (s) {
        case AuthorStat::ratio_chilean: return "ratio_chilean";
        case AuthorStat::heterogeneity_chilean: return "heterogeneity_chilean";
        case AuthorStat::citation_pop_author: return "citation_pop_author";
        case AuthorStat::publication_activity: return "publication_activity";
        case AuthorStat::coauthor_pair_rep: return "coauthor_pair_rep";
        case AuthorStat::coauthor_triple_rep: return "coauthor_triple_rep";
        case AuthorStat::coauthor_quartet_rep: return "coauthor_quartet_rep";
        case AuthorStat::collab_with_citing_author: return "collab_with_citing_author";
        case AuthorStat::closure_by_coauthor: return "closure_by_coauthor";
        case AuthorStat::closure_by_citing_same_work: return "closure_by_citing_same_work";
    }
    return "unknown";
}

std::string_view to_string(CitationStat s) {
    switch (s) {
        case CitationStat::citation_pop_work: return "citation_pop_work";
        case CitationStat::cocitation_pop_pair: return "cocitation_pop_pair";
        case CitationStat::cocitation_pop_triple: return "cocitation_pop_triple";
        case CitationStat::citation_repetition: return "citation_repetition";
        case CitationStat::outdegree_pop: return "outdegree_pop";
        case CitationStat::cite_work_and_its_citations: return "cite_work_and_its_citations";
        case CitationStat::self_citation: return "self_citation";
        case CitationStat::adopt_citation_of_coauthor: return "adopt_citation_of_coauthor";
        case CitationStat::cite_work_of_coauthor: return "cite_work_of_coauthor";
        case CitationStat::author_cites_author_rep: return "author_cites_author_rep";
        case CitationStat::author_cites_author_rec: return "author_cites_author_rec";
        case CitationStat::cite_much_cited_authors: return "cite_much_cited_authors";
        case CitationStat::cocite_coauthor_pairs: return "cocite_coauthor_pairs";
        case CitationStat::author_cocitation: return "author_cocitation";
    }
    return "unknown";
}

AuthorStat author_stat_from_string(std::string_view name) {
    for (std::size_t i = 0; i < kAuthorStatCount; ++i) {
        auto s = static_cast<AuthorStat>(i);
        if (to_string(s) == name) return s;
    }
    throw std::invalid_argument("unknown author statistic: " + std::string(name));
}

CitationStat citation_stat_from_string(std::string_view name) {
    for (std::size_t i = 0; i < kCitationStatCount; ++i) {
        auto s = static_cast<CitationStat>(i);
        if (to_string(s) == name) return s;
    }
    throw std::invalid_argument("unknown citation statistic: " + std::string(name));
}

bool is_exogenous(AuthorStat s) {
    return s == AuthorStat::ratio_chilean || s == AuthorStat::heterogeneity_chilean;
}

double eval_author_stat(AuthorStat s, const HistoryIndex& history, const ActorRegistry& registry,
                        std::span<const ActorId> A) {
    if (A.empty()) throw std::invalid_argument("author set must be non-empty");
    const double n = static_cast<double>(A.size());

    switch (s) {
        case AuthorStat::ratio_chilean: {
            double sum = 0;
            for (ActorId i : A) sum += registry.is_chilean(i) ? 1.0 : 0.0;
            return sum / n;
        }
        case AuthorStat::heterogeneity_chilean: {
            if (A.size() < 2) return 0.0;
            double sum = 0;
            for (std::size_t i = 0; i < A.size(); ++i)
                for (std::size_t j = i + 1; j < A.size(); ++j)
                    sum += registry.is_chilean(A[i]) != registry.is_chilean(A[j]) ? 1.0 : 0.0;
            return sum / choose2(A.size());
        }
        case AuthorStat::citation_pop_author: {
            double sum = 0;
            for (ActorId i : A) sum += history.citation_popularity(i);
            return sum / n;
        }
        case AuthorStat::publication_activity: {
            double sum = 0;
            for (ActorId i : A) sum += history.publication_count(i);
            return sum / n;
        }
        case AuthorStat::coauthor_pair_rep: {
            if (A.size() < 2) return 0.0;
            double sum = 0;
            for (std::size_t i = 0; i < A.size(); ++i)
                for (std::size_t j = i + 1; j < A.size(); ++j) sum += history.coauth(A[i], A[j]);
            return sum / choose2(A.size());
        }
        case AuthorStat::coauthor_triple_rep: {
            if (A.size() < 3) return 0.0;
            double sum = 0;
            for (std::size_t i = 0; i < A.size(); ++i)
                for (std::size_t j = i + 1; j < A.size(); ++j)
                    for (std::size_t k = j + 1; k < A.size(); ++k)
                        sum += history.coauthor_triple(A[i], A[j], A[k]);
            return sum / binom(A.size(), 3);
        }
        case AuthorStat::coauthor_quartet_rep: {
            if (A.size() < 4) return 0.0;
            double sum = 0;
            for (std::size_t i = 0; i < A.size(); ++i)
                for (std::size_t j = i + 1; j < A.size(); ++j)
                    for (std::size_t k = j + 1; k < A.size(); ++k)
                        for (std::size_t l = k + 1; l < A.size(); ++l)
                            sum += history.coauthor_quad(A[i], A[j], A[k], A[l]);
            return sum / binom(A.size(), 4);
        }
        case AuthorStat::collab_with_citing_author: {
            if (A.size() < 2) return 0.0;
            double sum = 0;
            for (std::size_t i = 0; i < A.size(); ++i)
                for (std::size_t j = i + 1; j < A.size(); ++j)
                    sum += history.cite_aa(A[i], A[j]) + history.cite_aa(A[j], A[i]);
            return sum / (2.0 * choose2(A.size()));
        }
        case AuthorStat::closure_by_coauthor: {
            if (A.size() < 2) return 0.0;
            double sum = 0;
            for (std::size_t i = 0; i < A.size(); ++i)
                for (std::size_t j = i + 1; j < A.size(); ++j) {
                    const auto& mi = history.coauthors_of(A[i]);
                    const auto& mj = history.coauthors_of(A[j]);
                    const auto& small = mi.size() <= mj.size() ? mi : mj;
                    const auto& large = mi.size() <= mj.size() ? mj : mi;
                    for (const auto& [k, ck] : small) {
                        if (k == A[i].v || k == A[j].v) continue;
                        auto it = large.find(k);
                        if (it != large.end()) sum += std::min(ck, it->second);
                    }
                }
            return sum / choose2(A.size());
        }
        case AuthorStat::closure_by_citing_same_work: {
            if (A.size() < 2) return 0.0;
            double sum = 0;
            for (std::size_t i = 0; i < A.size(); ++i)
                for (std::size_t j = i + 1; j < A.size(); ++j) {
                    const auto& mi = history.works_cited_by(A[i]);
                    const auto& mj = history.works_cited_by(A[j]);
                    const auto& small = mi.size() <= mj.size() ? mi : mj;
                    const auto& large = mi.size() <= mj.size() ? mj : mi;
                    for (const auto& [l, cl] : small) {
                        auto it = large.find(l);
                        if (it != large.end()) sum += std::min(cl, it->second);
                    }
                }
            return sum / choose2(A.size());
        }
    }
    throw std::logic_error("unhandled author statistic");
}

void eval_author_stats(std::span<const AuthorStat> kinds, const HistoryIndex& history,
                       const ActorRegistry& registry, std::span<const ActorId> authors,
                       std::span<double> out) {
    if (out.size() != kinds.size()) throw std::invalid_argument("output span size mismatch");
    for (std::size_t k = 0; k < kinds.size(); ++k)
        out[k] = eval_author_stat(kinds[k], history, registry, authors);
}

double eval_citation_stat(CitationStat s, const HistoryIndex& history,
                          std::span<const ActorId> A, std::span<const WorkId> C) {
    if (A.empty()) throw std::invalid_argument("author set must be non-empty");
    if (C.empty()) return 0.0;
    const double na = static_cast<double>(A.size());
    const double nc = static_cast<double>(C.size());

    switch (s) {
        case CitationStat::citation_pop_work: {
            double sum = 0;
            for (WorkId l : C) sum += history.in_citations(l);
            return sum / nc;
        }
        case CitationStat::cocitation_pop_pair: {
            if (C.size() < 2) return 0.0;
            double sum = 0;
            for (std::size_t i = 0; i < C.size(); ++i)
                for (std::size_t j = i + 1; j < C.size(); ++j)
                    sum += history.cocited_pair(C[i], C[j]);
            return sum / choose2(C.size());
        }
        case CitationStat::cocitation_pop_triple: {
            if (C.size() < 3) return 0.0;
            double sum = 0;
            for (std::size_t i = 0; i < C.size(); ++i)
                for (std::size_t j = i + 1; j < C.size(); ++j)
                    for (std::size_t k = j + 1; k < C.size(); ++k)
                        sum += history.cocited_triple(C[i], C[j], C[k]);
            return sum / binom(C.size(), 3);
        }
        case CitationStat::citation_repetition: {
            double sum = 0;
            for (ActorId i : A)
                for (WorkId l : C) sum += history.actor_cited_work(i, l);
            return sum / (na * nc);
        }
        case CitationStat::outdegree_pop: {
            double sum = 0;
            for (WorkId l : C) sum += static_cast<double>(history.citations_of(l).size());
            return sum / nc;
        }
        case CitationStat::cite_work_and_its_citations: {
            if (C.size() < 2) return 0.0;
            double sum = 0;
            for (std::size_t i = 0; i < C.size(); ++i)
                for (std::size_t j = i + 1; j < C.size(); ++j)
                    sum += (history.cite_ww(C[i], C[j]) ? 1.0 : 0.0) +
                           (history.cite_ww(C[j], C[i]) ? 1.0 : 0.0);
            return sum / choose2(C.size());
        }
        case CitationStat::self_citation: {
            double sum = 0;
            for (WorkId l : C) {
                auto al = history.authors_of(l);
                for (ActorId i : A) sum += contains(al, i) ? 1.0 : 0.0;
            }
            return sum / (na * nc);
        }
        case CitationStat::adopt_citation_of_coauthor: {
            double sum = 0;
            for (ActorId i : A) {
                for (const auto& [j, co] : history.coauthors_of(i)) {
                    const auto& wj = history.works_cited_by(ActorId{j});
                    for (WorkId l : C) {
                        auto it = wj.find(l.v);
                        if (it != wj.end()) sum += std::min(co, it->second);
                    }
                }
            }
            return sum / (na * nc);
        }
        case CitationStat::cite_work_of_coauthor: {
            double sum = 0;
            for (WorkId l : C) {
                auto al = history.authors_of(l);
                for (ActorId i : A)
                    for (ActorId j : al)
                        if (j != i && history.coauth(i, j) > 0) sum += 1.0;
            }
            return sum / (na * nc);
        }
        case CitationStat::author_cites_author_rep: {
            double sum = 0;
            for (WorkId l : C) {
                auto al = history.authors_of(l);
                for (ActorId i : A)
                    for (ActorId j : al)
                        if (j != i && history.cite_aa(i, j) > 0) sum += 1.0;
            }
            return sum / (na * nc);
        }
        case CitationStat::author_cites_author_rec: {
            double sum = 0;
            for (WorkId l : C) {
                auto al = history.authors_of(l);
                for (ActorId i : A)
                    for (ActorId j : al)
                        if (j != i && history.cite_aa(j, i) > 0) sum += 1.0;
            }
            return sum / (na * nc);
        }
        case CitationStat::cite_much_cited_authors: {
            double sum = 0;
            for (WorkId l : C) {
                std::uint32_t best = 0;
                for (ActorId i : history.authors_of(l))
                    best = std::max(best, history.citation_popularity(i));
                sum += best;
            }
            return sum / nc;
        }
        case CitationStat::cocite_coauthor_pairs: {
            if (C.size() < 2) return 0.0;
            double sum = 0;
            for (std::size_t a = 0; a < C.size(); ++a)
                for (std::size_t b = a + 1; b < C.size(); ++b) {
                    auto ak = history.authors_of(C[a]);
                    auto al = history.authors_of(C[b]);
                    bool hit = false;
                    for (ActorId i : ak) {
                        for (ActorId j : al) {
                            if (i == j) continue;
                            if (history.coauth(i, j) > 0) {
                                hit = true;
                                break;
                            }
                        }
                        if (hit) break;
                    }
                    sum += hit ? 1.0 : 0.0;
                }
            return sum / choose2(C.size());
        }
        case CitationStat::author_cocitation: {
            if (C.size() < 2) return 0.0;
            double sum = 0;
            for (std::size_t a = 0; a < C.size(); ++a)
                for (std::size_t b = a + 1; b < C.size(); ++b) {
                    auto ak = history.authors_of(C[a]);
                    auto al = history.authors_of(C[b]);
                    bool hit = false;
                    for (ActorId i : ak) {
                        for (ActorId j : al) {
                            if (i == j) continue;
                            if (history.cocite_aa(i, j) > 0) {
                                hit = true;
                                break;
                            }
                        }
                        if (hit) break;
                    }
                    sum += hit ? 1.0 : 0.0;
                }
            return sum / choose2(C.size());
        }
    }
    throw std::logic_error("unhandled citation statistic");
}

void eval_citation_stats(std::span<const CitationStat> kinds, const HistoryIndex& history,
                         std::span<const ActorId> authors, std::span<const WorkId> cited,
                         std::span<double> out) {
    if (out.size() != kinds.size()) throw std::invalid_argument("output span size mismatch");
    for (std::size_t k = 0; k < kinds.size(); ++k)
        out[k] = eval_citation_stat(kinds[k], history, authors, cited);
}

CitationStatContext::CitationStatContext(const HistoryIndex& history,
                                         std::span<const ActorId> authors,
                                         std::span<const CitationStat> kinds)
    : history_(&history), authors_(authors.begin(), authors.end()),
      kinds_(kinds.begin(), kinds.end()) {
    if (authors_.empty()) throw std::invalid_argument("author set must be non-empty");

    bool need_rep = false, need_self = false, need_adopt = false, need_work_co = false;
    bool need_aa_rep = false, need_aa_rec = false, need_max_pop = false;
    for (CitationStat s : kinds_) {
        switch (s) {
            case CitationStat::citation_repetition: need_rep = true; break;
            case CitationStat::self_citation: need_self = true; break;
            case CitationStat::adopt_citation_of_coauthor: need_adopt = true; break;
            case CitationStat::cite_work_of_coauthor: need_work_co = true; break;
            case CitationStat::author_cites_author_rep: need_aa_rep = true; break;
            case CitationStat::author_cites_author_rec: need_aa_rec = true; break;
            case CitationStat::cite_much_cited_authors: need_max_pop = true; break;
            default: break;
        }
    }
    need_per_work_ = need_rep || need_self || need_adopt || need_work_co || need_aa_rep ||
                     need_aa_rec || need_max_pop;
    if (!need_per_work_) return;

    const std::uint32_t n_works = history.n_works();
    if (need_rep) rep_.assign(n_works, 0.0);
    if (need_self) self_.assign(n_works, 0.0);
    if (need_adopt) adopt_.assign(n_works, 0.0);
    if (need_work_co) work_co_.assign(n_works, 0.0);
    if (need_aa_rep) aa_rep_.assign(n_works, 0.0);
    if (need_aa_rec) aa_rec_.assign(n_works, 0.0);
    if (need_max_pop) max_pop_.assign(n_works, 0.0);

    if (need_rep)
        for (ActorId i : authors_)
            for (const auto& [l, cnt] : history.works_cited_by(i)) rep_[l] += cnt;

    if (need_adopt)
        for (ActorId i : authors_)
            for (const auto& [j, co] : history.coauthors_of(i))
                for (const auto& [l, cnt] : history.works_cited_by(ActorId{j}))
                    adopt_[l] += std::min(co, cnt);

    if (need_self || need_work_co || need_aa_rep || need_aa_rec || need_max_pop) {
        for (std::uint32_t l = 0; l < n_works; ++l) {
            for (ActorId j : history.authors_of(WorkId{l})) {
                if (need_max_pop)
                    max_pop_[l] =
                        std::max(max_pop_[l], static_cast<double>(history.citation_popularity(j)));
                for (ActorId i : authors_) {
                    if (i == j) {
                        if (need_self) self_[l] += 1.0;
                        continue;
                    }
                    if (need_work_co && history.coauth(i, j) > 0) work_co_[l] += 1.0;
                    if (need_aa_rep && history.cite_aa(i, j) > 0) aa_rep_[l] += 1.0;
                    if (need_aa_rec && history.cite_aa(j, i) > 0) aa_rec_[l] += 1.0;
                }
            }
        }
    }
}

void CitationStatContext::eval(std::span<const WorkId> C, std::span<double> out) const {
    if (out.size() != kinds_.size()) throw std::invalid_argument("output span size mismatch");
    const HistoryIndex& h = *history_;
    const double na = static_cast<double>(authors_.size());
    const double nc = static_cast<double>(C.size());

    for (std::size_t k = 0; k < kinds_.size(); ++k) {
        if (C.empty()) {
            out[k] = 0.0;
            continue;
        }
        switch (kinds_[k]) {
            case CitationStat::citation_repetition: {
                double sum = 0;
                for (WorkId l : C) sum += rep_[l.v];
                out[k] = sum / (na * nc);
                break;
            }
            case CitationStat::self_citation: {
                double sum = 0;
                for (WorkId l : C) sum += self_[l.v];
                out[k] = sum / (na * nc);
                break;
            }
            case CitationStat::adopt_citation_of_coauthor: {
                double sum = 0;
                for (WorkId l : C) sum += adopt_[l.v];
                out[k] = sum / (na * nc);
                break;
            }
            case CitationStat::cite_work_of_coauthor: {
                double sum = 0;
                for (WorkId l : C) sum += work_co_[l.v];
                out[k] = sum / (na * nc);
                break;
            }
            case CitationStat::author_cites_author_rep: {
                double sum = 0;
                for (WorkId l : C) sum += aa_rep_[l.v];
                out[k] = sum / (na * nc);
                break;
            }
            case CitationStat::author_cites_author_rec: {
                double sum = 0;
                for (WorkId l : C) sum += aa_rec_[l.v];
                out[k] = sum / (na * nc);
                break;
            }
            case CitationStat::cite_much_cited_authors: {
                double sum = 0;
                for (WorkId l : C) sum += max_pop_[l.v];
                out[k] = sum / nc;
                break;
            }
            default:
                out[k] = eval_citation_stat(kinds_[k], h, authors_, C);
                break;
        }
    }
}

void TransformSpec::fit(std::span<const std::vector<double>> columns) {
    std::vector<const double*> ptrs;
    ptrs.reserve(columns.size());
    std::size_t n = columns.empty() ? 0 : columns.front().size();
    for (const auto& col : columns) {
        if (col.size() != n) throw std::invalid_argument("ragged columns");
        ptrs.push_back(col.data());
    }
    fit_columns(n, ptrs.data(), ptrs.size());
}

void TransformSpec::fit_columns(std::size_t n_rows, const double* const* columns,
                                std::size_t n_cols) {
    if (skip_sqrt.empty()) skip_sqrt.assign(n_cols, false);
    if (skip_sqrt.size() != n_cols) throw std::invalid_argument("skip_sqrt size mismatch");
    if (n_rows == 0) throw std::invalid_argument("cannot fit transform on empty columns");
    mean.assign(n_cols, 0.0);
    sd.assign(n_cols, 0.0);
    degenerate.assign(n_cols, false);

    for (std::size_t j = 0; j < n_cols; ++j) {
        const double* col = columns[j];
        const bool take_sqrt = sqrt_first && !skip_sqrt[j];

        double m = 0;
        for (std::size_t r = 0; r < n_rows; ++r) {
            double v = col[r];
            if (take_sqrt) {
                if (v < 0) throw std::domain_error("negative value under square-root transform");
                v = std::sqrt(v);
            }
            m += v;
        }
        m /= static_cast<double>(n_rows);

        double ss = 0;
        for (std::size_t r = 0; r < n_rows; ++r) {
            double v = col[r];
            if (take_sqrt) v = std::sqrt(v);
            ss += (v - m) * (v - m);
        }
        mean[j] = m;
        sd[j] = n_rows > 1 ? std::sqrt(ss / static_cast<double>(n_rows - 1)) : 0.0;
        if (sd[j] == 0.0) degenerate[j] = true;
    }
}

void TransformSpec::apply_row(std::span<double> row) const {
    if (row.size() != mean.size()) throw std::invalid_argument("row width mismatch");
    for (std::size_t j = 0; j < row.size(); ++j) {
        double v = row[j];
        if (sqrt_first && !skip_sqrt[j]) {
            if (v < 0) throw std::domain_error("negative value under square-root transform");
            v = std::sqrt(v);
        }
        if (!standardize) {
            row[j] = v;
            continue;
        }
        row[j] = degenerate[j] ? 0.0 : (v - mean[j]) / sd[j];
    }
}

bool TransformSpec::any_degenerate() const {
    for (bool d : degenerate)
        if (d) return true;
    return false;
}

}  // namespace ghrem
