// SPDX-License-Identifier: Apache-2.0
//
// End-to-end checks that drive the installed binary the way a user would.
#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "last/embedding_io.hpp"
#include "last/selection.hpp"

namespace {

struct RunResult {
    int exit_code = -1;
    std::string out;
};

RunResult run_cli(const std::string& args) {
    const std::string cmd = std::string(LAST_CLI_PATH) + " " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    RunResult r;
    char buf[4096];
    while (size_t n = fread(buf, 1, sizeof(buf), pipe)) r.out.append(buf, n);
    const int status = pclose(pipe);
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string fx(const std::string& name) { return std::string(LAST_FIXTURES_DIR) + "/" + name; }

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

TEST_CASE("cli select matches the library on the fixture scenario") {
    const auto r = run_cli("select --embeddings " + fx("embeddings.txt") +
                           " --query-embedding " + fx("query.txt") + " --k 4");
    REQUIRE(r.exit_code == 0);
    const auto doc = nlohmann::json::parse(r.out);

    const auto frames = last::read_embeddings(fx("embeddings.txt"));
    const auto query = last::read_embeddings(fx("query.txt")).front();
    last::SelectionConfig cfg;
    cfg.k = 4;
    const auto direct = last::select_frames(query, frames, cfg);

    CHECK(doc.at("indices").get<std::vector<int>>() == direct.presented_indices);
    CHECK(doc.at("selection_order").get<std::vector<int>>() == direct.indices);
    CHECK(doc.at("gains").size() == direct.gains.size());
}

TEST_CASE("cli select with k >= T keeps every frame (uniform pad)") {
    const auto r = run_cli("select --embeddings " + fx("embeddings.txt") +
                           " --query-embedding " + fx("query.txt") +
                           " --k 32 --pad uniform");
    REQUIRE(r.exit_code == 0);
    const auto doc = nlohmann::json::parse(r.out);
    std::vector<int> all(16);
    for (int i = 0; i < 16; ++i) all[i] = i;
    CHECK(doc.at("indices").get<std::vector<int>>() == all);
}

TEST_CASE("cli select rejects a corrupt embedding header with exit 2") {
    const std::string bad = "cli_bad_embeddings.txt";
    {
        std::ofstream out(bad);
        out << "not a header\n1 0 0 0\n";
    }
    const auto r = run_cli("select --embeddings " + bad + " --query-embedding " +
                           fx("query.txt") + " --k 4");
    CHECK(r.exit_code == 2);
    std::remove(bad.c_str());
}

TEST_CASE("cli episode runs the fixture scenario reproducibly") {
    const std::string args = "episode --question \"How many sofas appear?\" --manifest " +
                             fx("manifest.txt") + " --embeddings " + fx("embeddings.txt") +
                             " --query-embedding " + fx("query.txt") + " --fixtures " +
                             fx("scenario.json");
    const auto a = run_cli(args + " --out cli_trace_a.json");
    REQUIRE(a.exit_code == 0);
    CHECK(a.out.find("terminated_by=answer") != std::string::npos);
    CHECK(a.out.find("tool_calls=2") != std::string::npos);

    const auto b = run_cli(args + " --out cli_trace_b.json");
    REQUIRE(b.exit_code == 0);
    CHECK(slurp("cli_trace_a.json") == slurp("cli_trace_b.json"));

    const auto doc = nlohmann::json::parse(slurp("cli_trace_a.json"));
    CHECK(doc.at("final_answer").get<std::string>().find("2") != std::string::npos);
    std::remove("cli_trace_a.json");
    std::remove("cli_trace_b.json");
}

TEST_CASE("cli episode without fixtures or --live is an input error") {
    const auto r = run_cli("episode --question q --manifest " + fx("manifest.txt") +
                           " --embeddings " + fx("embeddings.txt") + " --query-embedding " +
                           fx("query.txt"));
    CHECK(r.exit_code == 2);
}

TEST_CASE("cli curate produces the expected split and a loadable dataset") {
    const auto r = run_cli("curate --corpus " + fx("corpus.ndjson") + " --fixtures " +
                           fx("scenario.json") + " --manifest " + fx("manifest.txt") +
                           " --embeddings " + fx("embeddings.txt") + " --query-embedding " +
                           fx("query.txt") + " --out cli_dataset.ndjson");
    REQUIRE(r.exit_code == 0);
    const auto stats = nlohmann::json::parse(r.out);
    CHECK(stats.at("text_cot").get<int>() == 1);
    CHECK(stats.at("visual_trajectory").get<int>() == 1);
    CHECK(stats.at("discarded").get<int>() == 1);
    CHECK(stats.at("per_source").at("video").get<int>() == 1);
    CHECK(stats.at("per_source").at("scene3d").get<int>() == 1);

    // dataset header + 2 sample lines
    std::ifstream in("cli_dataset.ndjson");
    std::string line;
    int lines = 0, samples = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        ++lines;
        const auto doc = nlohmann::json::parse(line);
        if (doc.at("record") == "sample") ++samples;
    }
    CHECK(lines == 3);
    CHECK(samples == 2);
    std::remove("cli_dataset.ndjson");
}

TEST_CASE("cli eval scores the fixture records") {
    const auto r = run_cli("eval --records " + fx("records.ndjson"));
    REQUIRE(r.exit_code == 0);
    const auto doc = nlohmann::json::parse(r.out);
    CHECK(doc.at("metrics").at("em1").get<double>() == doctest::Approx(0.5));
    CHECK(doc.at("metrics").at("em_r1").get<double>() == doctest::Approx(1.0));
    CHECK(doc.at("metrics").at("mca_accuracy").get<double>() == doctest::Approx(1.0));
    CHECK(doc.at("metrics").at("mra").get<double>() == doctest::Approx(0.6));
}

TEST_CASE("cli eval with mismatched trace count exits 4") {
    // one trace line against four records
    const std::string traces = "cli_traces.ndjson";
    {
        nlohmann::json t = {{"question", "q"},        {"initial_frames", {0}},
                            {"initial_visual_tokens", 1}, {"rounds", nlohmann::json::array()},
                            {"final_answer", "x"},    {"terminated_by", "answer"}};
        std::ofstream out(traces);
        out << t.dump() << "\n";
    }
    const auto r = run_cli("eval --records " + fx("records.ndjson") + " --traces " + traces);
    CHECK(r.exit_code == 4);
    std::remove(traces.c_str());
}

TEST_CASE("cli eval on a missing file exits 2") {
    const auto r = run_cli("eval --records no_such_file.ndjson");
    CHECK(r.exit_code == 2);
}
