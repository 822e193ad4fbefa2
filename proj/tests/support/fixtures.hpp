#pragma once

// Shared generators for randomized tests. Streams built here satisfy the
// event-stream invariants by construction (sorted sets, backward citations,
// position-keyed work ids).

#include <random>
#include <string>
#include <vector>

#include "ghrem/core.hpp"
#include "ghrem/estimation.hpp"
#include "ghrem/sampling.hpp"
#include "naive_stats.hpp"

namespace fixtures {

inline std::vector<std::uint32_t> random_subset(std::mt19937_64& rng, std::uint32_t n,
                                                std::uint32_t k) {
    return ghrem::draw_subset(rng, n, k);
}

inline ghrem::EventStream random_stream(std::mt19937_64& rng, std::uint32_t n_actors,
                                        std::uint32_t n_works) {
    ghrem::EventStream stream;
    for (std::uint32_t i = 0; i < n_actors; ++i)
        stream.registry.add("a" + std::to_string(i), ghrem::draw_below(rng, 2) == 1);

    for (std::uint32_t w = 0; w < n_works; ++w) {
        ghrem::Publication pub;
        pub.work = ghrem::WorkId{w};
        pub.seq = w;
        pub.source_seq = w;

        const auto ka = static_cast<std::uint32_t>(
            1 + ghrem::draw_below(rng, std::min<std::uint32_t>(5, n_actors)));
        for (std::uint32_t v : random_subset(rng, n_actors, ka))
            pub.authors.push_back(ghrem::ActorId{v});

        const auto kc_max = std::min<std::uint32_t>(6, w);
        const auto kc = static_cast<std::uint32_t>(ghrem::draw_below(rng, kc_max + 1));
        for (std::uint32_t v : random_subset(rng, w, kc))
            pub.citations.push_back(ghrem::WorkId{v});

        std::string name = "w" + std::to_string(w);
        stream.work_by_name.emplace(name, pub.work);
        stream.work_names.push_back(std::move(name));
        stream.publications.push_back(std::move(pub));
    }
    return stream;
}

inline naive::History prefix_history(const ghrem::EventStream& stream, std::size_t n) {
    naive::History h;
    for (std::size_t w = 0; w < n; ++w) {
        naive::Work work;
        for (ghrem::ActorId a : stream.publications[w].authors) work.authors.push_back(a.v);
        for (ghrem::WorkId c : stream.publications[w].citations) work.citations.push_back(c.v);
        h.push_back(std::move(work));
    }
    return h;
}

inline std::vector<char> chilean_flags(const ghrem::ActorRegistry& registry) {
    std::vector<char> flags(registry.size());
    for (std::uint32_t i = 0; i < registry.size(); ++i)
        flags[i] = registry.is_chilean(ghrem::ActorId{i}) ? 1 : 0;
    return flags;
}

inline ghrem::ChoiceData random_choice_data(std::mt19937_64& rng, std::size_t n_strata,
                                            std::size_t n_cols, std::size_t max_controls = 5) {
    std::normal_distribution<double> normal(0.0, 1.0);
    ghrem::ChoiceData data;
    data.offsets.push_back(0);
    std::vector<std::vector<double>> rows;
    for (std::size_t s = 0; s < n_strata; ++s) {
        const std::size_t n = 2 + ghrem::draw_below(rng, max_controls);
        for (std::size_t r = 0; r < n; ++r) {
            std::vector<double> row(n_cols);
            for (double& v : row) v = normal(rng);
            rows.push_back(std::move(row));
        }
        data.offsets.push_back(rows.size());
    }
    data.x.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(n_cols));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t j = 0; j < n_cols; ++j)
            data.x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = rows[r][j];
    for (std::size_t j = 0; j < n_cols; ++j) data.names.push_back("x" + std::to_string(j));
    return data;
}

}  // namespace fixtures
