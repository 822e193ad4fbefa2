#include "ghrem/design.hpp"

#include <array>
#include <stdexcept>

#include "ghrem/history.hpp"
#include "ghrem/threading.hpp"

namespace ghrem {

namespace {

constexpr std::size_t kMaxColumns = 32;

template <typename St>
void layout_strata(const std::vector<St>& strata, std::vector<std::size_t>& offsets,
                   std::vector<DesignStratumInfo>& info) {
    offsets.clear();
    offsets.push_back(0);
    info.clear();
    info.reserve(strata.size());
    for (const St& s : strata) {
        offsets.push_back(offsets.back() + 1 + s.n_controls());
        info.push_back({s.event_index, s.n_controls(), s.full_enumeration, s.n_alternatives.str()});
    }
}

// Fits the column transform on the raw matrix held in res.data.x and applies
// it column by column (same scalar operations as TransformSpec::apply_row).
void apply_transform(DesignResult& res, const DesignOptions& options,
                     std::vector<bool> skip_sqrt) {
    if (options.keep_raw) res.raw = res.data.x;
    Eigen::MatrixXd& x = res.data.x;
    TransformSpec& t = res.transform;
    t.sqrt_first = options.sqrt_transform;
    t.standardize = options.standardize;
    t.skip_sqrt = std::move(skip_sqrt);

    std::vector<const double*> cols;
    cols.reserve(static_cast<std::size_t>(x.cols()));
    for (Eigen::Index j = 0; j < x.cols(); ++j) cols.push_back(x.col(j).data());
    t.fit_columns(static_cast<std::size_t>(x.rows()), cols.data(), cols.size());

    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        const auto J = static_cast<std::size_t>(j);
        if (t.sqrt_first && !t.skip_sqrt[J]) {
            if ((x.col(j).array() < 0).any())
                throw std::domain_error("negative value under square-root transform");
            x.col(j) = x.col(j).array().sqrt();
        }
        if (!t.standardize) continue;
        if (t.degenerate[J])
            x.col(j).setZero();
        else
            x.col(j) = (x.col(j).array() - t.mean[J]) / t.sd[J];
    }
}

std::vector<bool> author_skip_sqrt(std::span<const AuthorStat> kinds, const DesignOptions&) {
    std::vector<bool> skip(kinds.size());
    for (std::size_t j = 0; j < kinds.size(); ++j) skip[j] = is_exogenous(kinds[j]);
    return skip;
}

std::vector<bool> citation_skip_sqrt(std::span<const CitationStat> kinds,
                                     const DesignOptions& options) {
    std::vector<bool> skip(kinds.size(), false);
    for (std::size_t j = 0; j < kinds.size(); ++j)
        if (kinds[j] == CitationStat::citation_repetition && !options.sqrt_citation_repetition)
            skip[j] = true;
    return skip;
}

template <typename Kind>
std::vector<std::string> column_names(std::span<const Kind> kinds) {
    std::vector<std::string> names;
    names.reserve(kinds.size());
    for (Kind k : kinds) names.emplace_back(to_string(k));
    return names;
}

}  // namespace

DesignResult build_author_design(const EventStream& stream, std::span<const AuthorStat> kinds,
                                 const SamplingConfig& sampling, const DesignOptions& options) {
    if (kinds.empty() || kinds.size() > kMaxColumns)
        throw std::invalid_argument("author design needs between 1 and 32 columns");
    AuthorStrata as = build_author_strata(stream, sampling);

    DesignResult res;
    res.skipped_no_alternatives = as.skipped_no_alternatives;
    layout_strata(as.strata, res.data.offsets, res.info);
    const std::size_t rows = res.data.offsets.back();
    const auto P = static_cast<Eigen::Index>(kinds.size());
    res.data.x.resize(static_cast<Eigen::Index>(rows), P);
    res.data.names = column_names(kinds);

    HistoryIndex history(stream.registry.size());
    std::uint32_t applied = 0;
    const int nt = resolve_threads(options.threads);

    for (std::size_t si = 0; si < as.strata.size(); ++si) {
        const AuthorStratum& st = as.strata[si];
        while (applied < st.event_index) history.apply_event(stream.publications[applied++]);
        const auto base = static_cast<Eigen::Index>(res.data.offsets[si]);

        std::array<double, kMaxColumns> row{};
        eval_author_stats(kinds, history, stream.registry, st.observed,
                          {row.data(), kinds.size()});
        for (Eigen::Index j = 0; j < P; ++j) res.data.x(base, j) = row[static_cast<std::size_t>(j)];

        const auto m = static_cast<std::int64_t>(st.n_controls());
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(nt)
#endif
        for (std::int64_t r = 0; r < m; ++r) {
            std::array<double, kMaxColumns> buf{};
            eval_author_stats(kinds, history, stream.registry,
                              st.control(static_cast<std::size_t>(r)),
                              {buf.data(), kinds.size()});
            for (Eigen::Index j = 0; j < P; ++j)
                res.data.x(base + 1 + static_cast<Eigen::Index>(r), j) =
                    buf[static_cast<std::size_t>(j)];
        }
    }
    (void)nt;
    apply_transform(res, options, author_skip_sqrt(kinds, options));
    return res;
}

DesignResult build_citation_design(const EventStream& stream, std::span<const CitationStat> kinds,
                                   const SamplingConfig& sampling, const DesignOptions& options) {
    if (kinds.empty() || kinds.size() > kMaxColumns)
        throw std::invalid_argument("citation design needs between 1 and 32 columns");
    CitationStrata cs = build_citation_strata(stream, sampling);

    DesignResult res;
    res.skipped_no_citations = cs.skipped_no_citations;
    res.skipped_no_alternatives = cs.skipped_no_alternatives;
    layout_strata(cs.strata, res.data.offsets, res.info);
    const std::size_t rows = res.data.offsets.back();
    const auto P = static_cast<Eigen::Index>(kinds.size());
    res.data.x.resize(static_cast<Eigen::Index>(rows), P);
    res.data.names = column_names(kinds);

    HistoryIndex history(stream.registry.size());
    std::uint32_t applied = 0;
    const int nt = resolve_threads(options.threads);

    for (std::size_t si = 0; si < cs.strata.size(); ++si) {
        const CitationStratum& st = cs.strata[si];
        while (applied < st.event_index) history.apply_event(stream.publications[applied++]);
        const auto base = static_cast<Eigen::Index>(res.data.offsets[si]);
        const Publication& pub = stream.publications[st.event_index];

        CitationStatContext ctx(history, pub.authors, kinds);

        std::array<double, kMaxColumns> row{};
        ctx.eval(st.observed, {row.data(), kinds.size()});
        for (Eigen::Index j = 0; j < P; ++j) res.data.x(base, j) = row[static_cast<std::size_t>(j)];

        const auto m = static_cast<std::int64_t>(st.n_controls());
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(nt)
#endif
        for (std::int64_t r = 0; r < m; ++r) {
            std::array<double, kMaxColumns> buf{};
            ctx.eval(st.control(static_cast<std::size_t>(r)), {buf.data(), kinds.size()});
            for (Eigen::Index j = 0; j < P; ++j)
                res.data.x(base + 1 + static_cast<Eigen::Index>(r), j) =
                    buf[static_cast<std::size_t>(j)];
        }
    }
    (void)nt;
    apply_transform(res, options, citation_skip_sqrt(kinds, options));
    return res;
}

Eigen::MatrixXd observed_author_stats(const EventStream& stream,
                                      std::span<const AuthorStat> kinds) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(stream.publications.size()),
                        static_cast<Eigen::Index>(kinds.size()));
    HistoryIndex history(stream.registry.size());
    for (std::size_t e = 0; e < stream.publications.size(); ++e) {
        const Publication& pub = stream.publications[e];
        for (std::size_t j = 0; j < kinds.size(); ++j)
            out(static_cast<Eigen::Index>(e), static_cast<Eigen::Index>(j)) =
                eval_author_stat(kinds[j], history, stream.registry, pub.authors);
        history.apply_event(pub);
    }
    return out;
}

Eigen::MatrixXd observed_citation_stats(const EventStream& stream,
                                        std::span<const CitationStat> kinds) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(stream.publications.size()),
                        static_cast<Eigen::Index>(kinds.size()));
    HistoryIndex history(stream.registry.size());
    for (std::size_t e = 0; e < stream.publications.size(); ++e) {
        const Publication& pub = stream.publications[e];
        for (std::size_t j = 0; j < kinds.size(); ++j)
            out(static_cast<Eigen::Index>(e), static_cast<Eigen::Index>(j)) =
                eval_citation_stat(kinds[j], history, pub.authors, pub.citations);
        history.apply_event(pub);
    }
    return out;
}

namespace reference {

DesignResult build_author_design(const EventStream& stream, std::span<const AuthorStat> kinds,
                                 const SamplingConfig& sampling, const DesignOptions& options) {
    if (kinds.empty() || kinds.size() > kMaxColumns)
        throw std::invalid_argument("author design needs between 1 and 32 columns");
    AuthorStrata as = build_author_strata(stream, sampling);

    DesignResult res;
    res.skipped_no_alternatives = as.skipped_no_alternatives;
    layout_strata(as.strata, res.data.offsets, res.info);
    res.data.x.resize(static_cast<Eigen::Index>(res.data.offsets.back()),
                      static_cast<Eigen::Index>(kinds.size()));
    res.data.names = column_names(kinds);

    HistoryIndex history(stream.registry.size());
    std::uint32_t applied = 0;
    for (std::size_t si = 0; si < as.strata.size(); ++si) {
        const AuthorStratum& st = as.strata[si];
        while (applied < st.event_index) history.apply_event(stream.publications[applied++]);
        Eigen::Index r = static_cast<Eigen::Index>(res.data.offsets[si]);
        for (std::size_t j = 0; j < kinds.size(); ++j)
            res.data.x(r, static_cast<Eigen::Index>(j)) =
                eval_author_stat(kinds[j], history, stream.registry, st.observed);
        for (std::size_t c = 0; c < st.n_controls(); ++c) {
            ++r;
            for (std::size_t j = 0; j < kinds.size(); ++j)
                res.data.x(r, static_cast<Eigen::Index>(j)) =
                    eval_author_stat(kinds[j], history, stream.registry, st.control(c));
        }
    }
    apply_transform(res, options, author_skip_sqrt(kinds, options));
    return res;
}

DesignResult build_citation_design(const EventStream& stream, std::span<const CitationStat> kinds,
                                   const SamplingConfig& sampling, const DesignOptions& options) {
    if (kinds.empty() || kinds.size() > kMaxColumns)
        throw std::invalid_argument("citation design needs between 1 and 32 columns");
    CitationStrata cs = build_citation_strata(stream, sampling);

    DesignResult res;
    res.skipped_no_citations = cs.skipped_no_citations;
    res.skipped_no_alternatives = cs.skipped_no_alternatives;
    layout_strata(cs.strata, res.data.offsets, res.info);
    res.data.x.resize(static_cast<Eigen::Index>(res.data.offsets.back()),
                      static_cast<Eigen::Index>(kinds.size()));
    res.data.names = column_names(kinds);

    HistoryIndex history(stream.registry.size());
    std::uint32_t applied = 0;
    for (std::size_t si = 0; si < cs.strata.size(); ++si) {
        const CitationStratum& st = cs.strata[si];
        while (applied < st.event_index) history.apply_event(stream.publications[applied++]);
        const Publication& pub = stream.publications[st.event_index];
        Eigen::Index r = static_cast<Eigen::Index>(res.data.offsets[si]);
        for (std::size_t j = 0; j < kinds.size(); ++j)
            res.data.x(r, static_cast<Eigen::Index>(j)) =
                eval_citation_stat(kinds[j], history, pub.authors, st.observed);
        for (std::size_t c = 0; c < st.n_controls(); ++c) {
            ++r;
            for (std::size_t j = 0; j < kinds.size(); ++j)
                res.data.x(r, static_cast<Eigen::Index>(j)) =
                    eval_citation_stat(kinds[j], history, pub.authors, st.control(c));
        }
    }
    apply_transform(res, options, citation_skip_sqrt(kinds, options));
    return res;
}

}  // namespace reference

}  // namespace ghrem
