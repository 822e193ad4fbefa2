// Command-line front end: validate | stats | fit | aic | simulate | recover |
// interpret. One JSON config drives every subcommand, flags override the
// config, and the merged config is echoed next to the artifacts. Exit codes:
// 0 success, 1 data or configuration problem, 2 numerical failure.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ghrem/core.hpp"
#include "ghrem/design.hpp"
#include "ghrem/estimation.hpp"
#include "ghrem/sampling.hpp"
#include "ghrem/simulation.hpp"
#include "ghrem/statistics.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ghrem;

namespace {

const std::vector<AuthorStat> kAllAuthorKinds{
    AuthorStat::ratio_chilean,        AuthorStat::heterogeneity_chilean,
    AuthorStat::citation_pop_author,  AuthorStat::publication_activity,
    AuthorStat::coauthor_pair_rep,    AuthorStat::coauthor_triple_rep,
    AuthorStat::coauthor_quartet_rep, AuthorStat::collab_with_citing_author,
    AuthorStat::closure_by_coauthor,  AuthorStat::closure_by_citing_same_work,
};

const std::vector<CitationStat> kAllCitationKinds{
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

std::string fmt(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string quoted = "\"";
    for (char c : s) {
        if (c == '"') quoted += '"';
        quoted += c;
    }
    quoted += '"';
    return quoted;
}

void check_keys(const json& j, const std::vector<std::string>& allowed,
                const std::string& where) {
    for (const auto& [key, value] : j.items()) {
        bool known = false;
        for (const auto& a : allowed)
            if (key == a) known = true;
        if (!known) throw std::invalid_argument("unknown config key '" + where + key + "'");
    }
}

// Fills every omitted field with its default so the echoed config is complete.
json effective_config(json cfg) {
    if (!cfg.is_object()) throw std::invalid_argument("config root must be an object");
    check_keys(cfg,
               {"paths", "input", "model", "transform", "sampling", "estimation", "threads",
                "simulation", "recovery"},
               "");

    json author_names = json::array();
    for (auto k : kAllAuthorKinds) author_names.push_back(std::string(to_string(k)));
    json citation_names = json::array();
    for (auto k : kAllCitationKinds) citation_names.push_back(std::string(to_string(k)));

    const json defaults = {
        {"paths", {{"events", ""}, {"actors", ""}, {"output", "out"}}},
        {"input", {{"citation_policy", "strict"}}},
        {"model",
         {{"which", "both"}, {"author_kinds", author_names}, {"citation_kinds", citation_names}}},
        {"transform",
         {{"sqrt", true}, {"standardize", true}, {"sqrt_citation_repetition", true}}},
        {"sampling", {{"m_authors", 30000}, {"m_citations", 10000}, {"seed", nullptr}}},
        {"estimation",
         {{"max_iterations", 200},
          {"grad_tol", 1e-8},
          {"rel_tol", 1e-10},
          {"separation_threshold", 50.0},
          {"ridge", 1e-8}}},
        {"threads", 0},
        {"simulation",
         {{"n_actors", 30},
          {"n_events", 500},
          {"seed", nullptr},
          {"chilean_fraction", 0.0},
          {"author_size_pmf", {0.0, 0.35, 0.35, 0.2, 0.1}},
          {"citation_size_pmf", {0.25, 0.35, 0.25, 0.15}},
          {"author_effects", json::object()},
          {"citation_effects", json::object()},
          {"mode", "exact"},
          {"chain_sweeps", 40},
          {"exact_enumeration_limit", 2000000}}},
        {"recovery",
         {{"replicates", 20},
          {"m_controls", 500},
          {"fit_seed", 99},
          {"focal", "coauthor_pair_rep"}}},
    };

    for (const auto& [section, body] : defaults.items()) {
        if (!cfg.contains(section)) {
            cfg[section] = body;
            continue;
        }
        if (!body.is_object()) continue;
        if (!cfg[section].is_object())
            throw std::invalid_argument("config section '" + section + "' must be an object");
        std::vector<std::string> names;
        for (const auto& [key, value] : body.items()) names.push_back(key);
        check_keys(cfg[section], names, section + ".");
        for (const auto& [key, value] : body.items())
            if (!cfg[section].contains(key)) cfg[section][key] = value;
    }
    return cfg;
}

struct Run {
    json cfg;
    fs::path out;

    std::string events_path() const { return cfg["paths"]["events"].get<std::string>(); }
    std::string actors_path() const { return cfg["paths"]["actors"].get<std::string>(); }
    std::string which() const { return cfg["model"]["which"].get<std::string>(); }
    bool run_author() const { return which() == "author" || which() == "both"; }
    bool run_citation() const { return which() == "citation" || which() == "both"; }

    std::vector<AuthorStat> author_kinds() const {
        std::vector<AuthorStat> kinds;
        for (const auto& name : cfg["model"]["author_kinds"])
            kinds.push_back(author_stat_from_string(name.get<std::string>()));
        if (kinds.empty()) throw std::invalid_argument("model.author_kinds is empty");
        return kinds;
    }
    std::vector<CitationStat> citation_kinds() const {
        std::vector<CitationStat> kinds;
        for (const auto& name : cfg["model"]["citation_kinds"])
            kinds.push_back(citation_stat_from_string(name.get<std::string>()));
        if (kinds.empty()) throw std::invalid_argument("model.citation_kinds is empty");
        return kinds;
    }

    SamplingConfig sampling(bool seed_required) const {
        SamplingConfig s;
        s.m_authors = cfg["sampling"]["m_authors"].get<std::size_t>();
        s.m_citations = cfg["sampling"]["m_citations"].get<std::size_t>();
        const auto& seed = cfg["sampling"]["seed"];
        if (seed.is_null()) {
            if (seed_required)
                throw std::invalid_argument("sampling.seed is required (set it or pass --seed)");
        } else {
            s.seed = seed.get<std::uint64_t>();
        }
        return s;
    }

    DesignOptions design_options() const {
        DesignOptions d;
        d.sqrt_transform = cfg["transform"]["sqrt"].get<bool>();
        d.standardize = cfg["transform"]["standardize"].get<bool>();
        d.sqrt_citation_repetition = cfg["transform"]["sqrt_citation_repetition"].get<bool>();
        d.threads = cfg["threads"].get<int>();
        return d;
    }

    FitOptions fit_options() const {
        FitOptions f;
        f.max_iterations = cfg["estimation"]["max_iterations"].get<std::size_t>();
        f.grad_tol = cfg["estimation"]["grad_tol"].get<double>();
        f.rel_tol = cfg["estimation"]["rel_tol"].get<double>();
        f.separation_threshold = cfg["estimation"]["separation_threshold"].get<double>();
        f.ridge = cfg["estimation"]["ridge"].get<double>();
        f.threads = cfg["threads"].get<int>();
        return f;
    }

    SimulationConfig simulation() const {
        const json& s = cfg["simulation"];
        SimulationConfig c;
        c.n_actors = s["n_actors"].get<std::uint32_t>();
        c.n_events = s["n_events"].get<std::uint32_t>();
        if (s["seed"].is_null())
            throw std::invalid_argument("simulation.seed is required (set it or pass --seed)");
        c.seed = s["seed"].get<std::uint64_t>();
        c.chilean_fraction = s["chilean_fraction"].get<double>();
        c.author_size_pmf = s["author_size_pmf"].get<std::vector<double>>();
        c.citation_size_pmf = s["citation_size_pmf"].get<std::vector<double>>();
        for (const auto& [name, value] : s["author_effects"].items())
            c.author_effects.emplace_back(author_stat_from_string(name), value.get<double>());
        for (const auto& [name, value] : s["citation_effects"].items())
            c.citation_effects.emplace_back(citation_stat_from_string(name), value.get<double>());
        const std::string mode = s["mode"].get<std::string>();
        if (mode == "exact")
            c.mode = ProposalMode::Exact;
        else if (mode == "chain")
            c.mode = ProposalMode::Chain;
        else
            throw std::invalid_argument("simulation.mode must be 'exact' or 'chain'");
        c.chain_sweeps = s["chain_sweeps"].get<std::size_t>();
        c.exact_enumeration_limit = s["exact_enumeration_limit"].get<std::size_t>();
        return c;
    }

    EventStream load_stream() const {
        if (events_path().empty() || actors_path().empty())
            throw std::invalid_argument("paths.events and paths.actors are required");
        for (const auto& p : {events_path(), actors_path()})
            if (!fs::exists(p)) throw std::invalid_argument("no such file: " + p);
        ParseOptions options;
        const std::string policy = cfg["input"]["citation_policy"].get<std::string>();
        if (policy == "strict")
            options.citation_policy = CitationPolicy::Strict;
        else if (policy == "drop")
            options.citation_policy = CitationPolicy::DropWithWarning;
        else
            throw std::invalid_argument("input.citation_policy must be 'strict' or 'drop'");
        return load_event_stream(events_path(), actors_path(), options);
    }

    void prepare_output() const { fs::create_directories(out); }

    void echo_config() const {
        std::ofstream file(out / "config_used.json");
        file << cfg.dump(2) << '\n';
    }
};

void write_table(const fs::path& base, const std::vector<std::string>& header,
                 const std::vector<std::vector<json>>& rows) {
    for (int digits : {6, 17}) {
        fs::path path = base;
        path += digits == 6 ? ".csv" : ".full.csv";
        std::ofstream file(path);
        for (std::size_t c = 0; c < header.size(); ++c)
            file << (c ? "," : "") << csv_field(header[c]);
        file << '\n';
        for (const auto& row : rows) {
            for (std::size_t c = 0; c < row.size(); ++c) {
                if (c) file << ',';
                const json& cell = row[c];
                if (cell.is_string())
                    file << csv_field(cell.get<std::string>());
                else if (cell.is_number_float())
                    file << fmt(cell.get<double>(), digits);
                else
                    file << cell.dump();
            }
            file << '\n';
        }
    }
}

void write_json(const fs::path& path, const json& j) {
    std::ofstream file(path);
    file << j.dump(2) << '\n';
}

json finite_or_null(double v) {
    if (std::isfinite(v)) return v;
    return nullptr;
}

// ---------------------------------------------------------------- validate

int cmd_validate(const Run& run) {
    run.prepare_output();
    run.echo_config();
    EventStream stream = run.load_stream();
    ValidationReport report = validate_stream(stream);

    json violations = json::array();
    for (const auto& v : report.violations)
        violations.push_back({{"kind", std::string(to_string(v.kind))},
                              {"seq", v.seq},
                              {"message", v.message}});
    json doc = {
        {"ok", report.ok()},
        {"n_publications", stream.publications.size()},
        {"n_actors", stream.registry.size()},
        {"parse_stats",
         {{"dropped_unknown_citations", stream.parse_stats.dropped_unknown_citations},
          {"dropped_forward_citations", stream.parse_stats.dropped_forward_citations},
          {"tie_broken_records", stream.parse_stats.tie_broken_records}}},
        {"violations", violations},
        {"notes", report.notes},
    };
    write_json(run.out / "validation.json", doc);

    if (report.ok()) {
        std::cout << "ok: " << stream.publications.size() << " events, "
                  << stream.registry.size() << " actors\n";
        for (const auto& note : report.notes) std::cout << "note: " << note << '\n';
        return 0;
    }
    for (const auto& v : report.violations)
        std::cerr << to_string(v.kind) << " (seq " << v.seq << "): " << v.message << '\n';
    return 1;
}

// ------------------------------------------------------------------- stats

void write_design_table(const fs::path& base, const std::vector<std::string>& kind_names,
                        const Eigen::MatrixXd& values,
                        const std::vector<std::vector<std::string>>& candidates,
                        const std::vector<std::size_t>& offsets) {
    std::vector<std::string> header{"stratum", "is_event", "candidate"};
    header.insert(header.end(), kind_names.begin(), kind_names.end());

    std::vector<std::vector<json>> rows;
    rows.reserve(static_cast<std::size_t>(values.rows()));
    std::size_t stratum = 0;
    for (std::size_t r = 0; r < static_cast<std::size_t>(values.rows()); ++r) {
        while (stratum + 1 < offsets.size() && r >= offsets[stratum + 1]) ++stratum;
        std::vector<json> row;
        row.push_back(stratum);
        row.push_back(r == offsets[stratum] ? 1 : 0);
        std::string joined;
        for (const auto& name : candidates[r]) {
            if (!joined.empty()) joined += '|';
            joined += name;
        }
        row.push_back(joined);
        for (Eigen::Index c = 0; c < values.cols(); ++c)
            row.push_back(values(static_cast<Eigen::Index>(r), c));
        rows.push_back(std::move(row));
    }
    write_table(base, header, rows);
}

json design_info_json(const DesignResult& design) {
    json strata = json::array();
    for (const auto& info : design.info)
        strata.push_back({{"event", info.event_index},
                          {"n_controls", info.n_controls},
                          {"full_enumeration", info.full_enumeration},
                          {"n_alternatives", info.n_alternatives}});
    return {{"strata", strata},
            {"skipped_no_citations", design.skipped_no_citations},
            {"skipped_no_alternatives", design.skipped_no_alternatives}};
}

int cmd_stats(const Run& run, bool raw) {
    run.prepare_output();
    run.echo_config();
    EventStream stream = run.load_stream();
    SamplingConfig sampling = run.sampling(true);
    DesignOptions options = run.design_options();
    options.keep_raw = raw;

    json info;
    if (run.run_author()) {
        auto kinds = run.author_kinds();
        auto design = build_author_design(stream, kinds, sampling, options);
        auto strata = build_author_strata(stream, sampling);

        std::vector<std::vector<std::string>> candidates;
        for (const auto& stratum : strata.strata) {
            std::vector<std::string> observed;
            for (auto a : stream.publications[stratum.event_index].authors)
                observed.push_back(stream.registry.name(a));
            candidates.push_back(std::move(observed));
            for (std::size_t r = 0; r < stratum.n_controls(); ++r) {
                std::vector<std::string> names;
                for (auto a : stratum.control(r)) names.push_back(stream.registry.name(a));
                candidates.push_back(std::move(names));
            }
        }
        std::vector<std::string> kind_names;
        for (auto k : kinds) kind_names.emplace_back(to_string(k));
        write_design_table(run.out / "author_design", kind_names,
                           raw ? design.raw : design.data.x, candidates, design.data.offsets);
        info["author"] = design_info_json(design);
    }
    if (run.run_citation()) {
        auto kinds = run.citation_kinds();
        auto design = build_citation_design(stream, kinds, sampling, options);
        auto strata = build_citation_strata(stream, sampling);

        std::vector<std::vector<std::string>> candidates;
        for (const auto& stratum : strata.strata) {
            std::vector<std::string> observed;
            for (auto w : stream.publications[stratum.event_index].citations)
                observed.push_back(stream.work_name(w));
            candidates.push_back(std::move(observed));
            for (std::size_t r = 0; r < stratum.n_controls(); ++r) {
                std::vector<std::string> names;
                for (auto w : stratum.control(r)) names.push_back(stream.work_name(w));
                candidates.push_back(std::move(names));
            }
        }
        std::vector<std::string> kind_names;
        for (auto k : kinds) kind_names.emplace_back(to_string(k));
        write_design_table(run.out / "citation_design", kind_names,
                           raw ? design.raw : design.data.x, candidates, design.data.offsets);
        info["citation"] = design_info_json(design);
    }
    write_json(run.out / "design_info.json", info);
    std::cout << (raw ? "raw" : "transformed") << " design matrices written to " << run.out.string()
              << '\n';
    return 0;
}

// --------------------------------------------------------------------- fit

json fit_to_json(const FitResult& fit, const TransformSpec& transform,
                 const DesignResult& design) {
    json cols = json::array();
    for (std::size_t j = 0; j < fit.names.size(); ++j) {
        cols.push_back({{"kind", fit.names[j]},
                        {"estimate", finite_or_null(fit.beta[static_cast<Eigen::Index>(j)])},
                        {"se_robust", finite_or_null(fit.se_robust[static_cast<Eigen::Index>(j)])},
                        {"se_naive", finite_or_null(fit.se_naive[static_cast<Eigen::Index>(j)])},
                        {"z", finite_or_null(fit.z[static_cast<Eigen::Index>(j)])},
                        {"p", finite_or_null(fit.p_value[static_cast<Eigen::Index>(j)])},
                        {"dropped", static_cast<bool>(fit.dropped[j])},
                        {"separation", static_cast<bool>(fit.separation[j])},
                        {"transform_mean", transform.mean[j]},
                        {"transform_sd", transform.sd[j]},
                        {"sqrt_applied", !transform.skip_sqrt[j]}});
    }
    return {{"coefficients", cols},
            {"logpl", fit.log_likelihood},
            {"logpl_null", fit.null_log_likelihood},
            {"aic", fit.aic},
            {"aic_null", 2.0 * 0.0 - 2.0 * fit.null_log_likelihood},
            {"iterations", fit.iterations},
            {"converged", fit.converged},
            {"used_ridge", fit.used_ridge},
            {"n_strata", fit.n_strata},
            {"n_rows", fit.n_rows},
            {"n_parameters", fit.n_active()},
            {"skipped_no_citations", design.skipped_no_citations},
            {"skipped_no_alternatives", design.skipped_no_alternatives}};
}

struct FittedModel {
    std::string model;
    DesignResult design;
    FitResult fit;
};

// Builds the selected designs and fits them. Models whose design has no
// strata are skipped with a warning.
std::vector<FittedModel> fit_selected(const Run& run, EventStream& stream) {
    SamplingConfig sampling = run.sampling(true);
    DesignOptions options = run.design_options();
    FitOptions fit_options = run.fit_options();

    std::vector<FittedModel> fitted;
    if (run.run_author()) {
        auto kinds = run.author_kinds();
        auto design = build_author_design(stream, kinds, sampling, options);
        if (design.data.n_strata() == 0) {
            std::cerr << "author model skipped: no stratum has an alternative\n";
        } else {
            auto result = fit(design.data, fit_options);
            fitted.push_back({"author", std::move(design), std::move(result)});
        }
    }
    if (run.run_citation()) {
        auto kinds = run.citation_kinds();
        auto design = build_citation_design(stream, kinds, sampling, options);
        if (design.data.n_strata() == 0) {
            std::cerr << "citation model skipped: no stratum has an alternative\n";
        } else {
            auto result = fit(design.data, fit_options);
            fitted.push_back({"citation", std::move(design), std::move(result)});
        }
    }
    if (fitted.empty()) throw std::invalid_argument("no model could be fitted on this stream");
    return fitted;
}

void write_ledgers(const Run& run, const std::vector<FittedModel>& fitted) {
    FitOptions fit_options = run.fit_options();
    std::vector<std::vector<json>> rows;
    json doc;
    for (const auto& model : fitted) {
        AicLedger ledger = aic_ledger(model.design.data, fit_options);
        json entries = json::array();
        for (const auto& e : ledger.entries) {
            rows.push_back({model.model, e.name, e.aic_alone, e.aic_without, e.delta_over_null,
                            e.delta_in_full, e.pct_over_null, e.pct_in_full});
            entries.push_back({{"kind", e.name},
                               {"aic_alone", e.aic_alone},
                               {"aic_without", e.aic_without},
                               {"delta_over_null", e.delta_over_null},
                               {"delta_in_full", e.delta_in_full},
                               {"pct_over_null", finite_or_null(e.pct_over_null)},
                               {"pct_in_full", finite_or_null(e.pct_in_full)}});
        }
        doc[model.model] = {{"logpl_null", ledger.logpl_null},
                            {"logpl_full", ledger.logpl_full},
                            {"aic_null", ledger.aic_null},
                            {"aic_full", ledger.aic_full},
                            {"entries", entries}};
    }
    write_table(run.out / "ledger",
                {"model", "kind", "aic_alone", "aic_without", "delta_over_null", "delta_in_full",
                 "pct_over_null", "pct_in_full"},
                rows);
    write_json(run.out / "aic.json", doc);
}

int cmd_fit(const Run& run, bool with_ledger) {
    run.prepare_output();
    run.echo_config();
    EventStream stream = run.load_stream();
    auto fitted = fit_selected(run, stream);

    std::vector<std::vector<json>> coef_rows;
    std::vector<std::vector<json>> meta_rows;
    json doc;
    for (const auto& model : fitted) {
        const auto& f = model.fit;
        for (std::size_t j = 0; j < f.names.size(); ++j) {
            auto idx = static_cast<Eigen::Index>(j);
            coef_rows.push_back({model.model, f.names[j], f.beta[idx], f.se_robust[idx], f.z[idx],
                                 f.p_value[idx]});
        }
        meta_rows.push_back({model.model, f.n_strata, f.n_rows, f.null_log_likelihood,
                             f.log_likelihood, -2.0 * f.null_log_likelihood, f.aic, f.iterations,
                             f.converged ? 1 : 0, f.used_ridge ? 1 : 0});
        doc[model.model] = fit_to_json(f, model.design.transform, model.design);
    }
    write_table(run.out / "coefficients", {"model", "kind", "estimate", "se_robust", "z", "p"},
                coef_rows);
    write_table(run.out / "fit_metadata",
                {"model", "n_strata", "n_rows", "logpl_null", "logpl", "aic_null", "aic",
                 "iterations", "converged", "used_ridge"},
                meta_rows);
    write_json(run.out / "fit.json", doc);
    if (with_ledger) write_ledgers(run, fitted);

    int status = 0;
    for (const auto& model : fitted) {
        std::cout << model.model << ": logPL " << fmt(model.fit.log_likelihood, 6) << ", AIC "
                  << fmt(model.fit.aic, 6) << ", " << model.fit.iterations << " iterations"
                  << (model.fit.converged ? "" : " (NOT converged)") << '\n';
        if (!model.fit.converged) {
            std::cerr << model.model << " model did not converge\n";
            status = 2;
        }
    }
    return status;
}

int cmd_aic(const Run& run) {
    run.prepare_output();
    run.echo_config();
    EventStream stream = run.load_stream();
    auto fitted = fit_selected(run, stream);
    write_ledgers(run, fitted);
    int status = 0;
    for (const auto& model : fitted)
        if (!model.fit.converged) {
            std::cerr << model.model << " model did not converge\n";
            status = 2;
        }
    std::cout << "ledger written to " << (run.out / "ledger.csv").string() << '\n';
    return status;
}

// ---------------------------------------------------------------- simulate

int cmd_simulate(const Run& run) {
    run.prepare_output();
    run.echo_config();
    SimulationConfig config = run.simulation();
    EventStream stream = simulate(config);

    const fs::path events = run.out / "events.jsonl";
    const fs::path actors = run.out / "actors.csv";
    save_event_stream(stream, events.string(), actors.string());

    std::size_t total_authors = 0, total_citations = 0;
    for (const auto& pub : stream.publications) {
        total_authors += pub.authors.size();
        total_citations += pub.citations.size();
    }
    const auto n = static_cast<double>(stream.publications.size());
    json doc = {{"n_actors", stream.registry.size()},
                {"n_events", stream.publications.size()},
                {"mean_authors", static_cast<double>(total_authors) / n},
                {"mean_citations", static_cast<double>(total_citations) / n},
                {"events", events.string()},
                {"actors", actors.string()}};
    write_json(run.out / "simulation.json", doc);
    std::cout << "simulated " << stream.publications.size() << " events over "
              << stream.registry.size() << " actors\n";
    return 0;
}

// ----------------------------------------------------------------- recover

int cmd_recover(const Run& run) {
    run.prepare_output();
    run.echo_config();
    RecoveryConfig config;
    config.simulation = run.simulation();
    const json& r = run.cfg["recovery"];
    config.replicates = r["replicates"].get<std::size_t>();
    config.m_controls = r["m_controls"].get<std::size_t>();
    config.fit_seed = r["fit_seed"].get<std::uint64_t>();
    config.focal = author_stat_from_string(r["focal"].get<std::string>());

    RecoveryReport report = run_recovery(config);

    std::vector<std::vector<json>> rows;
    json reps = json::array();
    for (std::size_t i = 0; i < report.replicates.size(); ++i) {
        const auto& rep = report.replicates[i];
        rows.push_back({i, rep.beta, rep.se, rep.scale, rep.theta_hat, rep.theta_se,
                        rep.covered ? 1 : 0, rep.converged ? 1 : 0});
        reps.push_back({{"beta", rep.beta},
                        {"se", rep.se},
                        {"scale", rep.scale},
                        {"theta_hat", rep.theta_hat},
                        {"theta_se", rep.theta_se},
                        {"covered", rep.covered},
                        {"converged", rep.converged}});
    }
    write_table(run.out / "recovery",
                {"replicate", "beta", "se", "scale", "theta_hat", "theta_se", "covered",
                 "converged"},
                rows);
    json doc = {{"focal", std::string(to_string(config.focal))},
                {"theta_true", report.theta_true},
                {"replicates", reps},
                {"n_covered", report.n_covered},
                {"mean_theta", report.mean_theta},
                {"mean_bias", report.mean_bias},
                {"mc_se", report.mc_se}};
    write_json(run.out / "recovery.json", doc);

    std::cout << "coverage " << report.n_covered << "/" << report.replicates.size()
              << ", mean estimate " << fmt(report.mean_theta, 6) << " (truth "
              << fmt(report.theta_true, 6) << ", mc se " << fmt(report.mc_se, 6) << ")\n";
    for (const auto& rep : report.replicates)
        if (!rep.converged) {
            std::cerr << "a replicate fit did not converge\n";
            return 2;
        }
    return 0;
}

// --------------------------------------------------------------- interpret

int cmd_interpret(const Run& run, const std::string& fit_path, const std::string& model,
                  const std::string& kind, double delta) {
    if (model != "author" && model != "citation")
        throw std::invalid_argument("--model must be 'author' or 'citation' here");
    const fs::path path = fit_path.empty() ? run.out / "fit.json" : fs::path(fit_path);
    if (!fs::exists(path)) throw std::invalid_argument("no such file: " + path.string());
    std::ifstream file(path);
    json doc = json::parse(file);
    if (!doc.contains(model))
        throw std::invalid_argument("fit file has no '" + model + "' model");

    const json* found = nullptr;
    for (const auto& col : doc[model]["coefficients"])
        if (col["kind"].get<std::string>() == kind) found = &col;
    if (!found) throw std::invalid_argument("kind '" + kind + "' not in the fitted model");
    if ((*found)["dropped"].get<bool>() || (*found)["estimate"].is_null())
        throw std::invalid_argument("kind '" + kind + "' is degenerate in this fit");

    const double beta = (*found)["estimate"].get<double>();
    const double se = (*found)["se_robust"].get<double>();
    const double point = std::exp(beta * delta);
    const double lo = std::exp((beta - 1.96 * se) * delta);
    const double hi = std::exp((beta + 1.96 * se) * delta);

    run.prepare_output();
    run.echo_config();
    json out = {{"model", model},      {"kind", kind}, {"delta", delta},
                {"estimate", beta},    {"se", se},     {"rate_ratio", point},
                {"ci_low", lo},        {"ci_high", hi}};
    write_json(run.out / "interpret.json", out);

    std::cout << "a " << fmt(delta, 6) << " increase of " << kind << " multiplies the rate by "
              << fmt(point, 6) << " (95% CI " << fmt(lo, 6) << " to " << fmt(hi, 6) << ")\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"group-oriented relational hyperevent models for publication streams"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path, events, actors, output, which, seed_text;
    std::optional<std::uint64_t> m_authors, m_citations;
    std::optional<int> threads;
    app.add_option("--config", config_path, "JSON run configuration");
    app.add_option("--events", events, "events file (JSON lines)");
    app.add_option("--actors", actors, "actor table (CSV)");
    app.add_option("--out", output, "output directory");
    app.add_option("--seed", seed_text, "sampling and simulation seed");
    app.add_option("--m-authors", m_authors, "author-model controls per stratum");
    app.add_option("--m-citations", m_citations, "citation-model controls per stratum");
    app.add_option("--threads", threads, "worker threads (0: all cores)");
    app.add_option("--model", which, "author | citation | both")
        ->check(CLI::IsMember({"author", "citation", "both"}));
    std::string citation_policy;
    app.add_option("--citation-policy", citation_policy,
                   "reject or drop out-of-corpus citations")
        ->check(CLI::IsMember({"strict", "drop"}));

    auto* validate_cmd = app.add_subcommand("validate", "check a stream against the invariants");
    auto* stats_cmd = app.add_subcommand("stats", "write sampled design matrices");
    bool raw = false;
    stats_cmd->add_flag("--raw", raw, "emit untransformed statistics");
    auto* fit_cmd = app.add_subcommand("fit", "estimate model coefficients");
    bool with_ledger = false;
    fit_cmd->add_flag("--ledger", with_ledger, "also write the AIC ledger");
    auto* aic_cmd = app.add_subcommand("aic", "write the AIC contribution ledger");
    auto* simulate_cmd = app.add_subcommand("simulate", "generate a synthetic stream");
    auto* recover_cmd = app.add_subcommand("recover", "simulate-and-refit coefficient recovery");
    auto* interpret_cmd = app.add_subcommand("interpret", "rate ratio for a fitted coefficient");
    std::string fit_path, kind;
    double delta = 1.0;
    interpret_cmd->add_option("--fit", fit_path, "fit.json from a previous run");
    interpret_cmd->add_option("--kind", kind, "statistic to interpret")->required();
    interpret_cmd->add_option("--delta", delta, "covariate increase, transformed scale");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;  // flag misuse is a configuration error
    }

    try {
        json cfg = json::object();
        if (!config_path.empty()) {
            if (!fs::exists(config_path))
                throw std::invalid_argument("no such file: " + config_path);
            std::ifstream file(config_path);
            cfg = json::parse(file);
        }
        cfg = effective_config(std::move(cfg));
        if (!events.empty()) cfg["paths"]["events"] = events;
        if (!actors.empty()) cfg["paths"]["actors"] = actors;
        if (!output.empty()) cfg["paths"]["output"] = output;
        if (!which.empty()) cfg["model"]["which"] = which;
        if (!seed_text.empty()) {
            const auto seed = static_cast<std::uint64_t>(std::stoull(seed_text));
            cfg["sampling"]["seed"] = seed;
            cfg["simulation"]["seed"] = seed;
        }
        if (m_authors) cfg["sampling"]["m_authors"] = *m_authors;
        if (m_citations) cfg["sampling"]["m_citations"] = *m_citations;
        if (threads) cfg["threads"] = *threads;
        if (!citation_policy.empty()) cfg["input"]["citation_policy"] = citation_policy;

        Run run{std::move(cfg), fs::path()};
        run.out = run.cfg["paths"]["output"].get<std::string>();

        if (validate_cmd->parsed()) return cmd_validate(run);
        if (stats_cmd->parsed()) return cmd_stats(run, raw);
        if (fit_cmd->parsed()) return cmd_fit(run, with_ledger);
        if (aic_cmd->parsed()) return cmd_aic(run);
        if (simulate_cmd->parsed()) return cmd_simulate(run);
        if (recover_cmd->parsed()) return cmd_recover(run);
        if (interpret_cmd->parsed())
            return cmd_interpret(run, fit_path, which.empty() ? "author" : which, kind, delta);
        return 1;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const json::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return 2;
    }
}
