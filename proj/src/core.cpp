#include "ghrem/core.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace ghrem {

using nlohmann::json;

ActorId ActorRegistry::add(std::string name, bool chilean) {
    if (name.empty()) throw std::invalid_argument("actor id must be non-empty");
    auto [it, inserted] = by_name_.emplace(name, ActorId{static_cast<std::uint32_t>(names_.size())});
    if (!inserted) throw std::invalid_argument("duplicate actor id: " + name);
    names_.push_back(std::move(name));
    chilean_.push_back(chilean ? 1 : 0);
    return it->second;
}

std::optional<ActorId> ActorRegistry::find(std::string_view name) const {
    auto it = by_name_.find(std::string(name));
    if (it == by_name_.end()) return std::nullopt;
    return it->second;
}

namespace {

std::string trimmed(std::string s) {
    auto issp = [](unsigned char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
    while (!s.empty() && issp(s.back())) s.pop_back();
    std::size_t i = 0;
    while (i < s.size() && issp(s[i])) ++i;
    return s.substr(i);
}

ActorRegistry parse_actors_csv(std::istream& in) {
    ActorRegistry registry;
    std::string line;
    std::size_t lineno = 0;
    bool saw_header = false;
    while (std::getline(in, line)) {
        ++lineno;
        line = trimmed(line);
        if (line.empty()) continue;
        if (!saw_header) {
            if (line != "actor_id,chilean")
                throw ParseError(lineno, "expected header 'actor_id,chilean', got '" + line + "'");
            saw_header = true;
            continue;
        }
        auto comma = line.find(',');
        if (comma == std::string::npos) throw ParseError(lineno, "expected 'actor_id,chilean' row");
        std::string id = trimmed(line.substr(0, comma));
        std::string flag = trimmed(line.substr(comma + 1));
        if (id.empty()) throw ParseError(lineno, "empty actor id");
        if (flag != "0" && flag != "1")
            throw ParseError(lineno, "chilean flag must be 0 or 1, got '" + flag + "'");
        try {
            registry.add(std::move(id), flag == "1");
        } catch (const std::invalid_argument& e) {
            throw ParseError(lineno, e.what());
        }
    }
    if (!saw_header) throw ParseError(1, "actors source is empty");
    return registry;
}

struct RawRecord {
    std::string work;
    std::vector<std::string> authors;
    std::vector<std::string> citations;
    bool has_seq = false;
    std::int64_t seq = 0;
    std::size_t line = 0;
    std::size_t file_order = 0;
};

std::vector<RawRecord> parse_event_records(std::istream& in) {
    std::vector<RawRecord> records;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trimmed(line);
        if (t.empty()) continue;
        json obj;
        try {
            obj = json::parse(t);
        } catch (const json::exception& e) {
            throw ParseError(lineno, std::string("malformed record: ") + e.what());
        }
        if (!obj.is_object()) throw ParseError(lineno, "record is not an object");
        RawRecord rec;
        rec.line = lineno;
        rec.file_order = records.size();
        if (!obj.contains("work") || !obj["work"].is_string() || obj["work"].get<std::string>().empty())
            throw ParseError(lineno, "field 'work' must be a non-empty string");
        rec.work = obj["work"].get<std::string>();
        if (obj.contains("seq")) {
            if (!obj["seq"].is_number_integer())
                throw ParseError(lineno, "field 'seq' must be an integer");
            rec.has_seq = true;
            rec.seq = obj["seq"].get<std::int64_t>();
        }
        if (!obj.contains("authors") || !obj["authors"].is_array())
            throw ParseError(lineno, "field 'authors' must be an array of strings");
        for (const auto& a : obj["authors"]) {
            if (!a.is_string()) throw ParseError(lineno, "field 'authors' must be an array of strings");
            rec.authors.push_back(a.get<std::string>());
        }
        if (rec.authors.empty()) throw ParseError(lineno, "empty author set");
        if (!obj.contains("citations") || !obj["citations"].is_array())
            throw ParseError(lineno, "field 'citations' must be an array of strings");
        for (const auto& c : obj["citations"]) {
            if (!c.is_string())
                throw ParseError(lineno, "field 'citations' must be an array of strings");
            rec.citations.push_back(c.get<std::string>());
        }
        records.push_back(std::move(rec));
    }
    return records;
}

}  // namespace

EventStream parse_event_stream(std::istream& events, std::istream& actors,
                               const ParseOptions& options) {
    EventStream stream;
    stream.registry = parse_actors_csv(actors);
    std::vector<RawRecord> records = parse_event_records(events);

    std::size_t with_seq = 0;
    for (const auto& r : records) with_seq += r.has_seq ? 1 : 0;
    if (with_seq != 0 && with_seq != records.size())
        throw ParseError(records.front().line,
                         "either every record carries 'seq' or none does");
    if (with_seq == 0)
        for (auto& r : records) r.seq = static_cast<std::int64_t>(r.file_order);

    std::stable_sort(records.begin(), records.end(),
                     [](const RawRecord& a, const RawRecord& b) { return a.seq < b.seq; });

    bool has_tie = false;
    for (std::size_t i = 1; i < records.size(); ++i) {
        if (records[i].seq == records[i - 1].seq) {
            has_tie = true;
            ++stream.parse_stats.tie_broken_records;
        }
    }

    // Intern works in final order; WorkId == position.
    stream.publications.reserve(records.size());
    stream.work_names.reserve(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        auto [it, inserted] =
            stream.work_by_name.emplace(records[i].work, WorkId{static_cast<std::uint32_t>(i)});
        if (!inserted) throw ParseError(records[i].line, "duplicate work id: " + records[i].work);
        stream.work_names.push_back(records[i].work);
    }

    for (std::size_t i = 0; i < records.size(); ++i) {
        const RawRecord& rec = records[i];
        Publication pub;
        pub.work = WorkId{static_cast<std::uint32_t>(i)};
        pub.source_seq = rec.seq;
        pub.seq = has_tie ? static_cast<std::int64_t>(i) : rec.seq;

        for (const auto& name : rec.authors) {
            auto a = stream.registry.find(name);
            if (!a) throw ParseError(rec.line, "unregistered author: " + name);
            pub.authors.push_back(*a);
        }
        std::sort(pub.authors.begin(), pub.authors.end());
        pub.authors.erase(std::unique(pub.authors.begin(), pub.authors.end()), pub.authors.end());

        for (const auto& name : rec.citations) {
            if (name == rec.work) throw ParseError(rec.line, "self-reference: " + name);
            auto it = stream.work_by_name.find(name);
            if (it == stream.work_by_name.end()) {
                if (options.citation_policy == CitationPolicy::Strict)
                    throw ParseError(rec.line, "citation of unknown work: " + name);
                ++stream.parse_stats.dropped_unknown_citations;
                continue;
            }
            if (it->second.v >= i) {
                if (options.citation_policy == CitationPolicy::Strict)
                    throw ParseError(rec.line, "citation of future work: " + name);
                ++stream.parse_stats.dropped_forward_citations;
                continue;
            }
            pub.citations.push_back(it->second);
        }
        std::sort(pub.citations.begin(), pub.citations.end());
        pub.citations.erase(std::unique(pub.citations.begin(), pub.citations.end()),
                            pub.citations.end());
        stream.publications.push_back(std::move(pub));
    }
    return stream;
}

EventStream load_event_stream(const std::string& events_path, const std::string& actors_path,
                              const ParseOptions& options) {
    std::ifstream events(events_path);
    if (!events) throw std::runtime_error("cannot open events file: " + events_path);
    std::ifstream actors(actors_path);
    if (!actors) throw std::runtime_error("cannot open actors file: " + actors_path);
    return parse_event_stream(events, actors, options);
}

void write_events(const EventStream& stream, std::ostream& out) {
    for (const Publication& pub : stream.publications) {
        json obj;
        obj["work"] = stream.work_name(pub.work);
        obj["seq"] = pub.seq;
        json authors = json::array();
        for (ActorId a : pub.authors) authors.push_back(stream.registry.name(a));
        obj["authors"] = std::move(authors);
        json citations = json::array();
        for (WorkId c : pub.citations) citations.push_back(stream.work_name(c));
        obj["citations"] = std::move(citations);
        out << obj.dump() << '\n';
    }
}

void write_actors(const ActorRegistry& registry, std::ostream& out) {
    out << "actor_id,chilean\n";
    for (std::uint32_t i = 0; i < registry.size(); ++i) {
        ActorId a{i};
        out << registry.name(a) << ',' << (registry.is_chilean(a) ? 1 : 0) << '\n';
    }
}

void save_event_stream(const EventStream& stream, const std::string& events_path,
                       const std::string& actors_path) {
    std::ofstream events(events_path);
    if (!events) throw std::runtime_error("cannot write events file: " + events_path);
    write_events(stream, events);
    std::ofstream actors(actors_path);
    if (!actors) throw std::runtime_error("cannot write actors file: " + actors_path);
    write_actors(stream.registry, actors);
}

std::string_view to_string(ViolationKind kind) {
    switch (kind) {
        case ViolationKind::NonStrictOrdering: return "non-strict ordering";
        case ViolationKind::ForwardCitation: return "forward citation";
        case ViolationKind::SelfReference: return "self-reference";
        case ViolationKind::EmptyAuthors: return "empty author set";
        case ViolationKind::UnregisteredAuthor: return "unregistered author";
        case ViolationKind::DuplicateWorkId: return "duplicate work id";
        case ViolationKind::UnknownCitation: return "unknown citation";
        case ViolationKind::DuplicateMember: return "duplicate set member";
    }
    return "unknown";
}

ValidationReport validate_stream(const EventStream& stream) {
    ValidationReport report;
    auto add = [&](ViolationKind kind, std::int64_t seq, std::string message) {
        report.violations.push_back({kind, seq, std::move(message)});
    };

    const std::size_t n = stream.publications.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Publication& pub = stream.publications[i];
        const std::string label = i < stream.work_names.size() && pub.work.v < stream.work_names.size()
                                      ? stream.work_names[pub.work.v]
                                      : ("#" + std::to_string(i));

        if (pub.work.v != i)
            add(ViolationKind::DuplicateWorkId, pub.seq,
                "work '" + label + "' has index " + std::to_string(pub.work.v) +
                    " but position " + std::to_string(i));
        if (i > 0 && stream.publications[i - 1].seq >= pub.seq)
            add(ViolationKind::NonStrictOrdering, pub.seq,
                "seq " + std::to_string(pub.seq) + " does not exceed predecessor");

        if (pub.authors.empty())
            add(ViolationKind::EmptyAuthors, pub.seq, "work '" + label + "' has no authors");
        for (std::size_t k = 0; k < pub.authors.size(); ++k) {
            if (pub.authors[k].v >= stream.registry.size())
                add(ViolationKind::UnregisteredAuthor, pub.seq,
                    "work '" + label + "' refers to unknown actor index " +
                        std::to_string(pub.authors[k].v));
            if (k > 0 && pub.authors[k - 1].v == pub.authors[k].v)
                add(ViolationKind::DuplicateMember, pub.seq,
                    "work '" + label + "' repeats an author");
        }
        for (std::size_t k = 0; k < pub.citations.size(); ++k) {
            WorkId c = pub.citations[k];
            if (c.v >= n)
                add(ViolationKind::UnknownCitation, pub.seq,
                    "work '" + label + "' cites unknown work index " + std::to_string(c.v));
            else if (c.v == pub.work.v)
                add(ViolationKind::SelfReference, pub.seq, "work '" + label + "' cites itself");
            else if (c.v > i)
                add(ViolationKind::ForwardCitation, pub.seq,
                    "work '" + label + "' cites later work '" + stream.work_names[c.v] + "'");
            if (k > 0 && pub.citations[k - 1].v == c.v)
                add(ViolationKind::DuplicateMember, pub.seq,
                    "work '" + label + "' repeats a citation");
        }
    }

    if (stream.parse_stats.tie_broken_records > 0)
        report.notes.push_back("tied seq keys re-keyed to consecutive integers for " +
                               std::to_string(stream.parse_stats.tie_broken_records) + " record(s)");
    if (stream.parse_stats.dropped_unknown_citations > 0)
        report.notes.push_back(std::to_string(stream.parse_stats.dropped_unknown_citations) +
                               " citation(s) of works outside the corpus dropped");
    if (stream.parse_stats.dropped_forward_citations > 0)
        report.notes.push_back(std::to_string(stream.parse_stats.dropped_forward_citations) +
                               " forward citation(s) dropped");
    return report;
}

}  // namespace ghrem
