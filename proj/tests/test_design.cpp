#include <cmath>
#include <random>
#include <vector>

#include <doctest.h>

#include "ghrem/design.hpp"
#include "support/fixtures.hpp"

using namespace ghrem;

namespace {

const std::vector<AuthorStat> kAllAuthor{
    AuthorStat::ratio_chilean,        AuthorStat::heterogeneity_chilean,
    AuthorStat::citation_pop_author,  AuthorStat::publication_activity,
    AuthorStat::coauthor_pair_rep,    AuthorStat::coauthor_triple_rep,
    AuthorStat::coauthor_quartet_rep, AuthorStat::collab_with_citing_author,
    AuthorStat::closure_by_coauthor,  AuthorStat::closure_by_citing_same_work,
};

const std::vector<CitationStat> kAllCitation{
    CitationStat::citation_pop_work,
    CitationStat::cocitation_pop_pair,
    CitationStat::cocitation_pop_triple,
    CitationStat::citation_repetition,
    CitationStat::outdegree_pop,
    CitationStat::cite_work_and_its_citations,
    CitationStat::self_citation,
    CitationStat::adopt_citation_of_coauthor,
    CitationStat::cite_work_of_coauthor,
    CitationStat::author_cites_author_rep,
    CitationStat::author_cites_author_rec,
    CitationStat::cite_much_cited_authors,
    CitationStat::cocite_coauthor_pairs,
    CitationStat::author_cocitation,
};

}  // namespace

TEST_CASE("parallel and reference design builders agree exactly") {
    std::mt19937_64 rng(808);
    SamplingConfig sampling;
    sampling.m_authors = 12;
    sampling.m_citations = 12;
    sampling.seed = 99;
    DesignOptions options;
    options.keep_raw = true;
    options.threads = 4;
    DesignOptions serial = options;
    serial.threads = 1;

    for (int rep = 0; rep < 4; ++rep) {
        auto stream = fixtures::random_stream(rng, 12, 25);

        auto fast_a = build_author_design(stream, kAllAuthor, sampling, options);
        auto ref_a = reference::build_author_design(stream, kAllAuthor, sampling, serial);
        CHECK(fast_a.data.offsets == ref_a.data.offsets);
        CHECK(fast_a.raw == ref_a.raw);
        CHECK(fast_a.data.x == ref_a.data.x);
        CHECK(fast_a.data.names == ref_a.data.names);

        auto fast_c = build_citation_design(stream, kAllCitation, sampling, options);
        auto ref_c = reference::build_citation_design(stream, kAllCitation, sampling, serial);
        CHECK(fast_c.data.offsets == ref_c.data.offsets);
        CHECK(fast_c.raw == ref_c.raw);
        CHECK(fast_c.data.x == ref_c.data.x);
        CHECK(fast_c.skipped_no_citations == ref_c.skipped_no_citations);
        CHECK(fast_c.skipped_no_alternatives == ref_c.skipped_no_alternatives);
    }
}

TEST_CASE("transform stages act column-wise on the design") {
    std::mt19937_64 rng(909);
    auto stream = fixtures::random_stream(rng, 10, 20);
    SamplingConfig sampling;
    sampling.m_authors = 8;
    sampling.seed = 5;

    DesignOptions raw_opts;
    raw_opts.sqrt_transform = false;
    raw_opts.standardize = false;
    raw_opts.keep_raw = true;
    auto plain = build_author_design(stream, kAllAuthor, sampling, raw_opts);
    CHECK(plain.data.x == plain.raw);

    DesignOptions full_opts;
    full_opts.keep_raw = true;
    auto moved = build_author_design(stream, kAllAuthor, sampling, full_opts);
    REQUIRE(moved.raw == plain.raw);

    // reproduce the pipeline by hand for one endogenous and one share column
    const auto& spec = moved.transform;
    for (std::size_t col : {std::size_t{0}, std::size_t{4}}) {
        bool take_root = !spec.skip_sqrt[col];
        for (Eigen::Index r = 0; r < moved.raw.rows(); ++r) {
            double v = moved.raw(r, static_cast<Eigen::Index>(col));
            if (take_root) v = std::sqrt(v);
            double expected = spec.degenerate[col] ? 0.0 : (v - spec.mean[col]) / spec.sd[col];
            CHECK(moved.data.x(r, static_cast<Eigen::Index>(col)) ==
                  doctest::Approx(expected).epsilon(1e-14));
        }
    }

    // shares stay on their own scale: no square root for the two mix columns
    CHECK(spec.skip_sqrt[0]);
    CHECK(spec.skip_sqrt[1]);
    for (std::size_t col = 2; col < kAllAuthor.size(); ++col) CHECK(!spec.skip_sqrt[col]);
}

TEST_CASE("repetition column can opt out of the square root") {
    std::mt19937_64 rng(111);
    auto stream = fixtures::random_stream(rng, 10, 22);
    SamplingConfig sampling;
    sampling.m_citations = 8;
    sampling.seed = 7;

    std::vector<CitationStat> kinds{CitationStat::citation_repetition,
                                    CitationStat::citation_pop_work};

    DesignOptions on;
    auto with_root = build_citation_design(stream, kinds, sampling, on);
    CHECK(!with_root.transform.skip_sqrt[0]);
    CHECK(!with_root.transform.skip_sqrt[1]);

    DesignOptions off;
    off.sqrt_citation_repetition = false;
    auto without = build_citation_design(stream, kinds, sampling, off);
    CHECK(without.transform.skip_sqrt[0]);
    CHECK(!without.transform.skip_sqrt[1]);
}

TEST_CASE("design rows line up with the sampled strata") {
    std::mt19937_64 rng(222);
    auto stream = fixtures::random_stream(rng, 14, 18);
    SamplingConfig sampling;
    sampling.m_authors = 6;
    sampling.seed = 13;
    DesignOptions options;
    options.keep_raw = true;

    auto design = build_author_design(stream, kAllAuthor, sampling, options);
    auto strata = build_author_strata(stream, sampling);
    REQUIRE(design.info.size() == strata.strata.size());
    REQUIRE(design.data.n_strata() == strata.strata.size());

    for (std::size_t s = 0; s < design.info.size(); ++s) {
        const auto& info = design.info[s];
        const auto& stratum = strata.strata[s];
        CHECK(info.event_index == stratum.event_index);
        CHECK(info.n_controls == stratum.n_controls());
        CHECK(info.full_enumeration == stratum.full_enumeration);
        CHECK(info.n_alternatives == stratum.n_alternatives.str());
        CHECK(design.data.stratum_rows(s) == stratum.n_controls() + 1);
    }

    // observed rows of the raw matrix match the per-publication descriptives
    auto observed = observed_author_stats(stream, kAllAuthor);
    for (std::size_t s = 0; s < design.info.size(); ++s) {
        Eigen::Index obs_row = static_cast<Eigen::Index>(design.data.offsets[s]);
        CHECK(design.raw.row(obs_row) ==
              observed.row(static_cast<Eigen::Index>(design.info[s].event_index)));
    }
}

TEST_CASE("descriptive tables cover every publication") {
    std::mt19937_64 rng(333);
    auto stream = fixtures::random_stream(rng, 9, 15);

    auto authors = observed_author_stats(stream, kAllAuthor);
    CHECK(authors.rows() == static_cast<Eigen::Index>(stream.publications.size()));
    CHECK(authors.cols() == static_cast<Eigen::Index>(kAllAuthor.size()));

    auto citations = observed_citation_stats(stream, kAllCitation);
    CHECK(citations.rows() == static_cast<Eigen::Index>(stream.publications.size()));
    CHECK(citations.cols() == static_cast<Eigen::Index>(kAllCitation.size()));

    // a first event has no history: every endogenous statistic starts at zero
    for (std::size_t col = 2; col < kAllAuthor.size(); ++col)
        CHECK(authors(0, static_cast<Eigen::Index>(col)) == 0.0);
    for (Eigen::Index col = 0; col < citations.cols(); ++col)
        CHECK(citations(0, col) == 0.0);
}
