#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "genreforge/error.h"
#include "genreforge/pipeline.h"

using namespace genreforge;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kMini = fs::path(GENREFORGE_FIXTURES) / "mini";

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json mini_config(const fs::path& out) {
  json j = json::parse(slurp(kMini / "pipeline.json"));
  for (const char* key : {"corpus", "parses", "metaphor_annotations", "metaphor_lexicon"})
    j[key] = (kMini / j[key].get<std::string>()).string();
  j["lexicon"] = fs::path(GENREFORGE_DATA "/lexicon").string();
  j["output"] = out.string();
  return j;
}

fs::path fresh_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / name;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::vector<Diagnostic> diags_for(const json& j) {
  std::vector<Diagnostic> d;
  parse_config(j.dump(), kMini, d);
  return d;
}

bool mentions(const std::vector<Diagnostic>& ds, const std::string& field,
              const std::string& needle = "") {
  for (const auto& d : ds)
    if (d.field == field && d.str().find(needle) != std::string::npos) return true;
  return false;
}

}  // namespace

TEST_CASE("the mini config is clean") {
  CHECK(validate_config(kMini / "pipeline.json").empty());
  const auto cfg = load_config(kMini / "pipeline.json");
  CHECK(cfg.tasks.size() == 2);
  CHECK(cfg.kind_sets.front().empty());
  CHECK(cfg.encoder.dim == 1024);
}

TEST_CASE("config diagnostics name the offending field") {
  const fs::path out = fresh_dir("gf_cfg_test");
  auto j = mini_config(out / "o");
  j["languages"] = {"ENG"};
  CHECK(mentions(diags_for(j), "languages[0]"));

  j = mini_config(out / "o");
  const fs::path missing = out / "no_such_lexicon";
  j["lexicon"] = missing.string();
  CHECK(mentions(diags_for(j), "lexicon", "directory not found: " + missing.string()));

  j = mini_config(out / "o");
  j["tasks"] = {"P:P"};
  CHECK(mentions(diags_for(j), "tasks[0]", "unknown genre pair"));

  j = mini_config(out / "o");
  j["encoder"]["dim"] = 1000;
  CHECK_FALSE(diags_for(j).empty());

  j = mini_config(out / "o");
  j["colour"] = "blue";
  CHECK(mentions(diags_for(j), "colour"));

  std::vector<Diagnostic> d;
  try {
    parse_config("{\n  \"seed\": ,\n}", kMini, d);
    FAIL("expected ParseError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kParseError);
    CHECK(std::string(e.what()).find("config:2:") != std::string::npos);
  }
  fs::remove_all(out);
}

TEST_CASE("cell names") {
  CHECK(cell_name(Task::parse("P:N"), Language::EN, FeatureSpec{}) == "baseline/Novel-Poetry_EN");
  CHECK(cell_name(Task::parse("N:D"), Language::FR, FeatureSpec::parse("metre,syntax")) ==
        "syntax+metre/Drama-Novel_FR");
}

TEST_CASE("mini pipeline trains the grid, then reuses the cache") {
  const fs::path dir = fresh_dir("gf_pipeline_test");
  std::vector<Diagnostic> d;
  const auto cfg = parse_config(mini_config(dir / "out").dump(), kMini, d);
  REQUIRE(d.empty());

  const auto first = run_pipeline(cfg, 2);
  REQUIRE_MESSAGE(first.ok, first.error);
  CHECK(first.models_trained == 16);
  CHECK(first.models_cached == 0);
  for (const char* f : {"manifest.jsonl", "features/metre.jsonl", "features/syntax.jsonl",
                        "features/metaphor.jsonl", "macro.json", "delta_table.md",
                        "summary.json", "plots/syntax_EN.svg", "plots/metre_FR.csv",
                        "models/baseline/Novel-Poetry_EN.json",
                        "reports/metre/Drama-Novel_FR.json"})
    CHECK_MESSAGE(fs::exists(dir / "out" / f), f);
  const std::string summary = slurp(dir / "out/summary.json");

  const auto second = run_pipeline(cfg, 1);
  REQUIRE(second.ok);
  CHECK(second.models_trained == 0);
  CHECK(second.models_cached == 16);
  CHECK(slurp(dir / "out/summary.json") == summary);

  auto changed = cfg;
  changed.train.epochs = 3;
  const auto third = run_pipeline(changed, 4);
  REQUIRE(third.ok);
  CHECK(third.models_trained == 16);
  fs::remove_all(dir);
}

TEST_CASE("a failing stage keeps partial outputs under failed/") {
  const fs::path dir = fresh_dir("gf_pipeline_fail");
  // A parses directory that covers none of the manifest sentences.
  fs::create_directories(dir / "parses");
  std::ofstream(dir / "parses/x.conllu") << "# sent_id = nothing\n1\ta\t_\t_\t_\t_\t0\tdep\t_\t_\n\n";
  auto j = mini_config(dir / "out");
  j["parses"] = (dir / "parses").string();
  std::vector<Diagnostic> d;
  const auto cfg = parse_config(j.dump(), kMini, d);
  REQUIRE(d.empty());
  const auto r = run_pipeline(cfg, 1);
  CHECK_FALSE(r.ok);
  CHECK_FALSE(r.failed_stage.empty());
  CHECK(fs::exists(dir / "out/failed/error.txt"));
  CHECK(fs::exists(dir / "out/failed/manifest.jsonl"));
  fs::remove_all(dir);
}

TEST_CASE("cli validate and run") {
  const fs::path dir = fresh_dir("gf_cli_test");
  std::ofstream(dir / "good.json") << mini_config(dir / "out").dump(2);
  auto bad = mini_config(dir / "out");
  bad["languages"] = {"ENG"};
  std::ofstream(dir / "bad.json") << bad.dump(2);

  const std::string cli = GENREFORGE_CLI;
  auto run = [&](const std::string& args) {
    return std::system((cli + " " + args + " > " + (dir / "log.txt").string() + " 2>&1").c_str());
  };
  CHECK(run("validate --config " + (dir / "good.json").string()) == 0);
  CHECK(run("validate --config " + (dir / "bad.json").string()) != 0);
  CHECK(slurp(dir / "log.txt").find("languages[0]") != std::string::npos);
  CHECK(run("run --config " + (dir / "good.json").string()) == 0);
  CHECK(fs::exists(dir / "out/summary.json"));
  CHECK(run("frobnicate") != 0);
  fs::remove_all(dir);
}

TEST_CASE("GENREFORGE_WORKERS sets the worker count") {
  setenv("GENREFORGE_WORKERS", "3", 1);
  CHECK(configured_workers() == 3);
  setenv("GENREFORGE_WORKERS", "0", 1);
  CHECK(configured_workers() >= 1);
  unsetenv("GENREFORGE_WORKERS");
  CHECK(configured_workers() >= 1);
}
