#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ghrem/ids.hpp"

namespace ghrem {

/// Fixed universe of actors for a run. Every author appearing in any event
/// must be registered before parsing; actors never enter or leave.
class ActorRegistry {
public:
    ActorId add(std::string name, bool chilean);
    std::optional<ActorId> find(std::string_view name) const;

    std::size_t size() const { return names_.size(); }
    const std::string& name(ActorId a) const { return names_.at(a.v); }
    bool is_chilean(ActorId a) const { return chilean_.at(a.v) != 0; }

private:
    std::vector<std::string> names_;
    std::vector<std::uint8_t> chilean_;
    std::unordered_map<std::string, ActorId> by_name_;
};

/// One hyperevent: a work linking its author set to its cited-work set.
/// `authors` and `citations` are sorted and duplicate-free. `seq` is the
/// canonical strictly-increasing order key; `source_seq` preserves the raw
/// input key when the loader had to break ties.
struct Publication {
    WorkId work;
    std::vector<ActorId> authors;
    std::vector<WorkId> citations;
    std::int64_t seq = 0;
    std::int64_t source_seq = 0;
};

/// Counters for records the loader repaired rather than rejected.
struct ParseStats {
    std::size_t dropped_unknown_citations = 0;
    std::size_t dropped_forward_citations = 0;
    std::size_t tie_broken_records = 0;
};

/// Immutable, validated event history. Publications are ordered by seq and
/// each publication's WorkId equals its position in that order, so citations
/// always point to strictly smaller indices. Safe to share across threads.
struct EventStream {
    ActorRegistry registry;
    std::vector<Publication> publications;
    std::vector<std::string> work_names;  // indexed by WorkId
    std::unordered_map<std::string, WorkId> work_by_name;
    ParseStats parse_stats;

    const std::string& work_name(WorkId w) const { return work_names.at(w.v); }
};

/// How to treat citations of works outside the corpus or later in the order.
enum class CitationPolicy {
    DropWithWarning,  // remove the citation, count it in ParseStats
    Strict,           // reject the record
};

struct ParseOptions {
    CitationPolicy citation_policy = CitationPolicy::DropWithWarning;
};

/// Malformed input; `line` is 1-based within the offending source.
class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

/// Parses the line-oriented events source (one JSON object per line with
/// fields work, seq?, authors, citations) against a `actor_id,chilean` CSV.
/// Records are re-sorted by seq; tied seq keys are re-keyed to consecutive
/// integers in file order with the original key retained in source_seq.
EventStream parse_event_stream(std::istream& events, std::istream& actors,
                               const ParseOptions& options = {});
EventStream load_event_stream(const std::string& events_path, const std::string& actors_path,
                              const ParseOptions& options = {});

void write_events(const EventStream& stream, std::ostream& out);
void write_actors(const ActorRegistry& registry, std::ostream& out);
void save_event_stream(const EventStream& stream, const std::string& events_path,
                       const std::string& actors_path);

enum class ViolationKind {
    NonStrictOrdering,
    ForwardCitation,
    SelfReference,
    EmptyAuthors,
    UnregisteredAuthor,
    DuplicateWorkId,
    UnknownCitation,
    DuplicateMember,
};

std::string_view to_string(ViolationKind kind);

struct Violation {
    ViolationKind kind;
    std::int64_t seq;  // seq of the offending publication, -1 if stream-level
    std::string message;
};

/// Violations are data, not faults: an empty `violations` list means every
/// typed invariant holds. `notes` carries informational flags (tie re-keying,
/// dropped citations) that are not invariant violations.
struct ValidationReport {
    std::vector<Violation> violations;
    std::vector<std::string> notes;
    bool ok() const { return violations.empty(); }
};

ValidationReport validate_stream(const EventStream& stream);

}  // namespace ghrem
