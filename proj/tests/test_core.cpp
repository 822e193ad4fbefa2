#include <doctest.h>

#include <sstream>

#include "ghrem/core.hpp"

using namespace ghrem;

namespace {

const char* kActors =
    "actor_id,chilean\n"
    "ana,1\n"
    "ben,0\n"
    "carla,1\n"
    "dan,0\n";

EventStream parse(const std::string& events, const std::string& actors = kActors,
                  ParseOptions options = {}) {
    std::istringstream ev(events);
    std::istringstream ac(actors);
    return parse_event_stream(ev, ac, options);
}

}  // namespace

TEST_CASE("events are ordered by seq and works are keyed by position") {
    auto stream = parse(
        R"({"work":"p2","seq":20,"authors":["ben"],"citations":["p1"]})"
        "\n"
        R"({"work":"p1","seq":10,"authors":["ana","ben"],"citations":[]})"
        "\n");
    REQUIRE(stream.publications.size() == 2);
    CHECK(stream.work_names[0] == "p1");
    CHECK(stream.work_names[1] == "p2");
    CHECK(stream.publications[0].work.v == 0);
    CHECK(stream.publications[1].work.v == 1);
    // p2's citation of p1 resolves to the earlier position
    REQUIRE(stream.publications[1].citations.size() == 1);
    CHECK(stream.publications[1].citations[0].v == 0);
    CHECK(validate_stream(stream).ok());
}

TEST_CASE("author and citation lists are sorted and de-duplicated") {
    auto stream = parse(
        R"({"work":"p1","authors":["carla","ana","carla"],"citations":[]})"
        "\n"
        R"({"work":"p2","authors":["ben"],"citations":["p1","p1"]})"
        "\n");
    CHECK(stream.publications[0].authors.size() == 2);
    CHECK(stream.publications[0].authors[0].v < stream.publications[0].authors[1].v);
    CHECK(stream.publications[1].citations.size() == 1);
}

TEST_CASE("seq must be present on all records or none") {
    CHECK_THROWS_AS(parse(R"({"work":"p1","seq":1,"authors":["ana"],"citations":[]})"
                          "\n"
                          R"({"work":"p2","authors":["ben"],"citations":[]})"
                          "\n"),
                    ParseError);
}

TEST_CASE("tied seq keys are re-keyed and surfaced as a note") {
    auto stream = parse(
        R"({"work":"p1","seq":7,"authors":["ana"],"citations":[]})"
        "\n"
        R"({"work":"p2","seq":7,"authors":["ben"],"citations":[]})"
        "\n"
        R"({"work":"p3","seq":9,"authors":["carla"],"citations":[]})"
        "\n");
    CHECK(stream.parse_stats.tie_broken_records == 1);
    // re-keying keeps file order among ties and restores strict ordering
    CHECK(stream.publications[0].seq < stream.publications[1].seq);
    CHECK(stream.publications[1].seq < stream.publications[2].seq);
    auto report = validate_stream(stream);
    CHECK(report.ok());
    REQUIRE(!report.notes.empty());
    CHECK(report.notes[0].find("re-keyed") != std::string::npos);
}

TEST_CASE("unknown and forward citations are dropped under the default policy") {
    auto stream = parse(
        R"({"work":"p1","authors":["ana"],"citations":["elsewhere","p2"]})"
        "\n"
        R"({"work":"p2","authors":["ben"],"citations":["p1"]})"
        "\n");
    CHECK(stream.publications[0].citations.empty());
    CHECK(stream.parse_stats.dropped_unknown_citations == 1);
    CHECK(stream.parse_stats.dropped_forward_citations == 1);
    auto report = validate_stream(stream);
    CHECK(report.ok());
    CHECK(report.notes.size() == 2);
}

TEST_CASE("strict policy rejects what the default policy drops") {
    ParseOptions strict;
    strict.citation_policy = CitationPolicy::Strict;
    CHECK_THROWS_AS(parse(R"({"work":"p1","authors":["ana"],"citations":["elsewhere"]})"
                          "\n",
                          kActors, strict),
                    ParseError);
}

TEST_CASE("malformed input is rejected with the offending line") {
    try {
        parse("{\"work\":\"p1\",\"authors\":[\"ana\"],\"citations\":[]}\nnot json\n");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
    }

    CHECK_THROWS_AS(parse(R"({"work":"p1","authors":[],"citations":[]})"
                          "\n"),
                    ParseError);
    CHECK_THROWS_AS(parse(R"({"work":"p1","authors":["nobody"],"citations":[]})"
                          "\n"),
                    ParseError);
    CHECK_THROWS_AS(parse(R"({"work":"p1","authors":["ana"],"citations":["p1"]})"
                          "\n"),
                    ParseError);
    CHECK_THROWS_AS(parse(R"({"work":"p1","authors":["ana"],"citations":[]})"
                          "\n"
                          R"({"work":"p1","authors":["ben"],"citations":[]})"
                          "\n"),
                    ParseError);
}

TEST_CASE("actor table rejects duplicates and bad flags") {
    CHECK_THROWS_AS(parse("", "actor_id,chilean\nana,1\nana,0\n"), ParseError);
    CHECK_THROWS_AS(parse("", "actor_id,chilean\nana,yes\n"), ParseError);
    CHECK_THROWS_AS(parse("", "wrong,header\n"), ParseError);
}

TEST_CASE("write and reparse round-trips the stream") {
    auto stream = parse(
        R"({"work":"p1","seq":3,"authors":["ana","carla"],"citations":[]})"
        "\n"
        R"({"work":"p2","seq":8,"authors":["ben"],"citations":["p1"]})"
        "\n");
    std::ostringstream ev, ac;
    write_events(stream, ev);
    write_actors(stream.registry, ac);
    auto again = parse(ev.str(), ac.str());
    REQUIRE(again.publications.size() == stream.publications.size());
    for (std::size_t i = 0; i < stream.publications.size(); ++i) {
        CHECK(again.publications[i].authors == stream.publications[i].authors);
        CHECK(again.publications[i].citations == stream.publications[i].citations);
        CHECK(again.publications[i].seq == stream.publications[i].seq);
    }
    CHECK(again.registry.size() == stream.registry.size());
    CHECK(again.registry.is_chilean(ActorId{0}) == stream.registry.is_chilean(ActorId{0}));
}

TEST_CASE("validation reports hand-made violations") {
    EventStream stream;
    stream.registry.add("ana", true);
    stream.work_names = {"w0", "w1"};

    Publication p0;
    p0.work = WorkId{0};
    p0.seq = 5;
    p0.authors = {ActorId{0}};
    Publication p1;
    p1.work = WorkId{1};
    p1.seq = 5;  // not strictly increasing
    p1.citations = {WorkId{1}};  // self-reference, and no authors
    stream.publications = {p0, p1};

    auto report = validate_stream(stream);
    CHECK(!report.ok());
    bool saw_order = false, saw_self = false, saw_empty = false;
    for (const auto& v : report.violations) {
        saw_order |= v.kind == ViolationKind::NonStrictOrdering;
        saw_self |= v.kind == ViolationKind::SelfReference;
        saw_empty |= v.kind == ViolationKind::EmptyAuthors;
    }
    CHECK(saw_order);
    CHECK(saw_self);
    CHECK(saw_empty);
}
