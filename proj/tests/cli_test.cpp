#include "doctest.h"

#include <fstream>

#include "json.hpp"

#include "helpers.hpp"

using testutil::cli_path;
using testutil::run_command;

TEST_CASE("--help exits 0 for every subcommand and documents the flags") {
    auto top = run_command(cli_path() + " --help");
    CHECK(top.exit_code == 0);
    for (const char* name : {"ingest", "adapt", "eval", "demo"}) {
        CHECK(top.output.find(name) != std::string::npos);
    }

    auto adapt = run_command(cli_path() + " adapt --help");
    CHECK(adapt.exit_code == 0);
    for (const char* flag : {"--qa-per-session", "--no-content-update", "--no-strategy-update",
                             "--unguided-questions", "--parallel", "--max-rounds", "--replay"}) {
        CHECK(adapt.output.find(flag) != std::string::npos);
    }

    auto eval = run_command(cli_path() + " eval --help");
    CHECK(eval.exit_code == 0);
    CHECK(eval.output.find("--judge") != std::string::npos);

    CHECK(run_command(cli_path() + " ingest --help").exit_code == 0);
    CHECK(run_command(cli_path() + " demo --help").exit_code == 0);
}

TEST_CASE("ingest reports fixture category counts") {
    testutil::TempDir dir;
    auto out = (dir.path() / "native.json").string();
    auto result = run_command(cli_path() + " ingest --input fixtures/locomo_small.json --format "
                                           "locomo --output " + out);
    CHECK(result.exit_code == 0);
    CHECK(result.output.find("multi_hop=1 temporal=1 open_domain=1 single_hop=1") !=
          std::string::npos);
    CHECK(result.output.find("other=1") != std::string::npos);
}

TEST_CASE("ingest of a bad path exits 2") {
    auto result = run_command(cli_path() + " ingest --input /nonexistent/nowhere.json --format "
                                           "locomo");
    CHECK(result.exit_code == 2);
}

TEST_CASE("unknown flags are a usage error") {
    auto result = run_command(cli_path() + " adapt --definitely-not-a-flag");
    CHECK(result.exit_code == 2);
}

TEST_CASE("native passthrough is idempotent modulo canonicalization") {
    testutil::TempDir dir;
    auto first = (dir.path() / "first.json").string();
    auto second = (dir.path() / "second.json").string();
    CHECK(run_command(cli_path() + " ingest --input fixtures/native_small.corpus.json --format "
                                   "native --output " + first)
              .exit_code == 0);
    CHECK(run_command(cli_path() + " ingest --input " + first + " --format native --output " +
                      second)
              .exit_code == 0);
    CHECK(testutil::read_file(first) == testutil::read_file(second));
}

TEST_CASE("config file supplies defaults that flags can override") {
    testutil::TempDir dir;
    auto config_path = dir.path() / "config.json";
    std::ofstream(config_path) << R"({"ama": {"qa_per_session": 1, "max_rounds": 2}})";
    auto run_dir = (dir.path() / "run").string();
    auto result = run_command(cli_path() + " adapt --corpus fixtures/synthetic.corpus.json"
                                           " --run-dir " + run_dir +
                              " --replay fixtures/synthetic.replay.jsonl --config " +
                              config_path.string());
    CHECK(result.exit_code == 0);
    auto run_json = nlohmann::json::parse(testutil::read_file(run_dir + "/run.json"));
    CHECK(run_json.at("config").at("ama").at("qa_per_session").get<int>() == 1);
    CHECK(run_json.at("config").at("ama").at("max_rounds").get<int>() == 2);
}

TEST_CASE("eval on a missing run directory exits 2") {
    auto result = run_command(cli_path() + " eval --run-dir /nonexistent/run --corpus "
                                           "fixtures/synthetic.corpus.json --replay "
                                           "fixtures/synthetic.replay.jsonl");
    CHECK(result.exit_code == 2);
}
