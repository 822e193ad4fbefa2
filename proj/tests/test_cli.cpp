// Drives the installed binary end to end through popen. Each case works in
// its own directory under the system temp path.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include <doctest.h>
#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int run_cli(const std::string& args, std::string* output = nullptr) {
    const std::string cmd = std::string(GHREM_CLI_PATH) + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::string text;
    char buf[512];
    while (std::fgets(buf, sizeof buf, pipe)) text += buf;
    const int status = pclose(pipe);
    if (output) *output = text;
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path fresh_dir(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / "ghrem_cli_tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream file(path);
    file << text;
}

std::string slurp(const fs::path& path) {
    std::ifstream file(path);
    std::ostringstream text;
    text << file.rdbuf();
    return text.str();
}

void write_valid_fixture(const fs::path& dir) {
    write_file(dir / "events.jsonl",
               R"({"work":"w1","authors":["a1","a2"],"citations":[]})"
               "\n"
               R"({"work":"w2","authors":["a2"],"citations":["w1"]})"
               "\n"
               R"({"work":"w3","authors":["a1","a3"],"citations":["w1","w2"]})"
               "\n");
    write_file(dir / "actors.csv", "actor_id,chilean\na1,0\na2,1\na3,0\n");
}

std::string simulated_inputs(const fs::path& dir) {
    write_file(dir / "sim.json",
               R"({"simulation": {"n_actors": 12, "n_events": 60, "seed": 9,
                   "author_size_pmf": [0, 0.3, 0.4, 0.3],
                   "citation_size_pmf": [0.2, 0.4, 0.4],
                   "author_effects": {"coauthor_pair_rep": 0.5}}})");
    const std::string out = (dir / "sim").string();
    REQUIRE(run_cli("simulate --config " + (dir / "sim.json").string() + " --out " + out) == 0);
    return " --events " + out + "/events.jsonl --actors " + out + "/actors.csv";
}

}  // namespace

TEST_CASE("cli: validate distinguishes clean and broken streams") {
    auto dir = fresh_dir("validate");
    write_valid_fixture(dir);
    std::string output;
    int code = run_cli("validate --events " + (dir / "events.jsonl").string() + " --actors " +
                           (dir / "actors.csv").string() + " --out " + (dir / "out").string(),
                       &output);
    CHECK(code == 0);
    CHECK(output.find("ok: 3 events") != std::string::npos);
    auto doc = json::parse(slurp(dir / "out" / "validation.json"));
    CHECK(doc["ok"] == true);
    CHECK(doc["violations"].empty());

    // forward citation: rejected under the default policy, a note when dropping
    write_file(dir / "forward.jsonl",
               R"({"work":"w1","authors":["a1"],"citations":["w2"]})"
               "\n"
               R"({"work":"w2","authors":["a2"],"citations":[]})"
               "\n");
    const std::string base = "--events " + (dir / "forward.jsonl").string() + " --actors " +
                             (dir / "actors.csv").string() + " --out " + (dir / "out2").string();
    code = run_cli("validate " + base, &output);
    CHECK(code == 1);
    CHECK(output.find("future work") != std::string::npos);

    code = run_cli("validate " + base + " --citation-policy drop", &output);
    CHECK(code == 0);
    auto lenient = json::parse(slurp(dir / "out2" / "validation.json"));
    CHECK(lenient["parse_stats"]["dropped_forward_citations"] == 1);

    code = run_cli("fit " + base + " --seed 3", &output);
    CHECK(code == 1);
}

TEST_CASE("cli: fit artifacts are complete and deterministic") {
    auto dir = fresh_dir("fit");
    const std::string inputs = simulated_inputs(dir);
    const std::string common = "fit" + inputs + " --m-authors 20 --m-citations 20";

    std::string output;
    int code = run_cli(common + " --seed 11 --out " + (dir / "a").string(), &output);
    CHECK(code == 0);
    CHECK(output.find("author: logPL") != std::string::npos);
    CHECK(output.find("citation: logPL") != std::string::npos);

    for (const char* name : {"coefficients.csv", "coefficients.full.csv", "fit_metadata.csv",
                             "fit_metadata.full.csv", "fit.json", "config_used.json"})
        CHECK(fs::exists(dir / "a" / name));

    auto echoed = json::parse(slurp(dir / "a" / "config_used.json"));
    CHECK(echoed["sampling"]["seed"] == 11);
    CHECK(echoed["sampling"]["m_authors"] == 20);
    CHECK(echoed["model"]["which"] == "both");

    auto doc = json::parse(slurp(dir / "a" / "fit.json"));
    for (const char* model : {"author", "citation"}) {
        CHECK(doc[model]["converged"] == true);
        const double aic = doc[model]["aic"].get<double>();
        const double logpl = doc[model]["logpl"].get<double>();
        const auto params = doc[model]["n_parameters"].get<std::size_t>();
        CHECK(aic == 2.0 * static_cast<double>(params) - 2.0 * logpl);
    }

    // identical inputs and seed give byte-identical tables
    code = run_cli(common + " --seed 11 --out " + (dir / "b").string(), &output);
    CHECK(code == 0);
    CHECK(slurp(dir / "a" / "coefficients.full.csv") == slurp(dir / "b" / "coefficients.full.csv"));
    CHECK(slurp(dir / "a" / "coefficients.csv") == slurp(dir / "b" / "coefficients.csv"));

    // a different control seed moves the estimates
    code = run_cli(common + " --seed 12 --out " + (dir / "c").string(), &output);
    CHECK(code == 0);
    CHECK(slurp(dir / "a" / "coefficients.full.csv") !=
          slurp(dir / "c" / "coefficients.full.csv"));
}

TEST_CASE("cli: starving the optimizer surfaces as a numerical failure") {
    auto dir = fresh_dir("nonconv");
    const std::string inputs = simulated_inputs(dir);
    write_file(dir / "cfg.json", R"({"estimation": {"max_iterations": 1}})");

    std::string output;
    int code = run_cli("fit" + inputs + " --config " + (dir / "cfg.json").string() +
                           " --seed 11 --m-authors 20 --m-citations 20 --model author --out " +
                           (dir / "out").string(),
                       &output);
    CHECK(code == 2);
    CHECK(output.find("did not converge") != std::string::npos);
    // partial artifacts are still written
    CHECK(fs::exists(dir / "out" / "coefficients.csv"));
}

TEST_CASE("cli: aic ledger covers every configured kind") {
    auto dir = fresh_dir("aic");
    const std::string inputs = simulated_inputs(dir);
    std::string output;
    int code = run_cli("aic" + inputs + " --seed 11 --m-authors 15 --model author --out " +
                           (dir / "out").string(),
                       &output);
    CHECK(code == 0);

    std::ifstream ledger(dir / "out" / "ledger.csv");
    std::string line;
    REQUIRE(std::getline(ledger, line));
    CHECK(line ==
          "model,kind,aic_alone,aic_without,delta_over_null,delta_in_full,pct_over_null,"
          "pct_in_full");
    std::size_t rows = 0;
    while (std::getline(ledger, line)) ++rows;
    CHECK(rows == 10);

    auto doc = json::parse(slurp(dir / "out" / "aic.json"));
    CHECK(doc["author"]["entries"].size() == 10);
    CHECK(doc["author"]["aic_null"].get<double>() ==
          -2.0 * doc["author"]["logpl_null"].get<double>());
    // aic counts only identified parameters, so the implied count must be a
    // whole number no larger than the configured ten kinds
    const double k = (doc["author"]["aic_full"].get<double>() +
                      2.0 * doc["author"]["logpl_full"].get<double>()) /
                     2.0;
    CHECK(k == doctest::Approx(std::round(k)).epsilon(1e-9));
    CHECK(k >= 1.0);
    CHECK(k <= 10.0);
}

TEST_CASE("cli: interpret matches the documented rate ratios") {
    auto dir = fresh_dir("interpret");
    json fake = {{"author",
                  {{"coefficients",
                    json::array({{{"kind", "coauthor_pair_rep"},
                                  {"estimate", 0.8},
                                  {"se_robust", 0.1},
                                  {"dropped", false}},
                                 {{"kind", "ratio_chilean"},
                                  {"estimate", nullptr},
                                  {"se_robust", nullptr},
                                  {"dropped", true}}})}}}};
    write_file(dir / "fit.json", fake.dump());

    std::string output;
    int code = run_cli("interpret --fit " + (dir / "fit.json").string() +
                           " --kind coauthor_pair_rep --out " + (dir / "out").string(),
                       &output);
    CHECK(code == 0);
    auto doc = json::parse(slurp(dir / "out" / "interpret.json"));
    CHECK(doc["rate_ratio"].get<double>() == doctest::Approx(std::exp(0.8)).epsilon(1e-12));
    CHECK(output.find("2.22554") != std::string::npos);

    code = run_cli("interpret --fit " + (dir / "fit.json").string() +
                       " --kind coauthor_pair_rep --delta 0.25 --out " + (dir / "out").string(),
                   &output);
    CHECK(code == 0);
    CHECK(output.find("1.2214") != std::string::npos);

    code = run_cli("interpret --fit " + (dir / "fit.json").string() +
                       " --kind ratio_chilean --out " + (dir / "out").string(),
                   &output);
    CHECK(code == 1);
    CHECK(output.find("degenerate") != std::string::npos);

    code = run_cli("interpret --fit " + (dir / "fit.json").string() + " --kind no_such --out " +
                       (dir / "out").string(),
                   &output);
    CHECK(code == 1);
}

TEST_CASE("cli: configuration mistakes exit with a data error") {
    auto dir = fresh_dir("config");
    write_valid_fixture(dir);
    const std::string base = "--events " + (dir / "events.jsonl").string() + " --actors " +
                             (dir / "actors.csv").string() + " --out " + (dir / "out").string();

    std::string output;
    CHECK(run_cli("fit " + base, &output) == 1);  // no seed anywhere
    CHECK(output.find("seed") != std::string::npos);

    write_file(dir / "typo.json", R"({"sampl": {"m_authors": 5}})");
    CHECK(run_cli("fit " + base + " --seed 1 --config " + (dir / "typo.json").string(),
                  &output) == 1);
    CHECK(output.find("unknown config key") != std::string::npos);

    write_file(dir / "badkind.json", R"({"model": {"author_kinds": ["not_a_statistic"]}})");
    CHECK(run_cli("fit " + base + " --seed 1 --config " + (dir / "badkind.json").string(),
                  &output) == 1);

    CHECK(run_cli("fit --events missing.jsonl --actors missing.csv --seed 1 --out " +
                      (dir / "out").string(),
                  &output) == 1);
    CHECK(output.find("no such file") != std::string::npos);
}

TEST_CASE("cli: stats table groups rows by stratum") {
    auto dir = fresh_dir("stats");
    const std::string inputs = simulated_inputs(dir);
    std::string output;
    int code = run_cli("stats" + inputs + " --seed 11 --m-authors 3 --model author --out " +
                           (dir / "out").string(),
                       &output);
    CHECK(code == 0);

    std::ifstream table(dir / "out" / "author_design.csv");
    std::string line;
    REQUIRE(std::getline(table, line));
    CHECK(line.rfind("stratum,is_event,candidate,", 0) == 0);

    std::size_t events = 0, rows = 0;
    std::string last_stratum;
    while (std::getline(table, line)) {
        ++rows;
        const auto first = line.find(',');
        const auto second = line.find(',', first + 1);
        const std::string stratum = line.substr(0, first);
        const std::string is_event = line.substr(first + 1, second - first - 1);
        if (is_event == "1") {
            ++events;
            CHECK(stratum != last_stratum);  // observed row opens its stratum
            last_stratum = stratum;
        }
    }
    CHECK(events > 0);
    CHECK(rows > events);  // every stratum carries at least one control
    CHECK(fs::exists(dir / "out" / "author_design.full.csv"));
    CHECK(fs::exists(dir / "out" / "design_info.json"));
}
