#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <functional>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "adscreen/error.hpp"
#include "adscreen/pipeline.hpp"

using namespace adscreen;
namespace fs = std::filesystem;

namespace {

PipelineConfig light() {
  PipelineConfig c;
  c.seed = 7;
  c.ntree = 60;
  c.mtry_grid = {1, 2, 3, 4};
  c.impute_ntree = 20;
  c.impute_max_iter = 3;
  c.importance_permutations = 5;
  c.boruta_ntree = 60;
  c.boruta_max_rounds = 8;
  c.pca_ks = {1, 2, 5};
  return c;
}

fs::path fresh_dir(const std::string& name) {
  const auto d = fs::temp_directory_path() / ("adscreen_unit_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::vector<std::string>> rows_of(const fs::path& p) {
  std::vector<std::vector<std::string>> out;
  std::istringstream in(slurp(p));
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    out.push_back(cells);
  }
  return out;
}

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return Errc::IoError;
}

// One shared light run for the read-only checks.
const fs::path& light_run() {
  static const fs::path dir = [] {
    const auto d = fresh_dir("light");
    run_pipeline(light(), d);
    return d;
  }();
  return dir;
}

}  // namespace

TEST_SUITE("pipeline") {
  TEST_CASE("config JSON round trip") {
    const PipelineConfig def;
    CHECK(config_from_json(config_to_json(def)) == def);
    auto c = light();
    c.split_first = true;
    c.scale = true;
    c.tune_on_test = true;
    c.smote_target = SmoteTarget::Ratio;
    c.smote_ratio = 0.5;
    c.importance_loss = ImportanceLoss::Auc;
    c.drop_columns = {"RID"};
    CHECK(config_from_json(config_to_json(c)) == c);
    CHECK(config_from_json("{}") == def);
  }

  TEST_CASE("config errors") {
    CHECK(code_of([] { config_from_json(R"({"bogus": 1})"); }) == Errc::ConfigError);
    CHECK(code_of([] { config_from_json("not json"); }) == Errc::ConfigError);
    auto c = light();
    c.train_fraction = 1.5;
    CHECK(code_of([&] { validate_config(c); }) == Errc::ConfigError);
    c = light();
    c.ntree = 0;
    CHECK(code_of([&] { validate_config(c); }) == Errc::ConfigError);
    CHECK(code_of([] { run_stage("nonsense", PipelineConfig{}, fs::temp_directory_path()); }) == Errc::ConfigError);
  }

  TEST_CASE("stage order") {
    PipelineConfig c;
    const std::vector<std::string> expected{"generate", "ingest", "sanitize", "derive_age", "drop_columns",
                                            "binarize", "impute", "split", "scale", "balance",
                                            "tune", "train", "evaluate", "importance", "boruta",
                                            "select", "groups", "pca", "report"};
    CHECK(stage_order(c) == expected);
    c.split_first = true;
    const auto o = stage_order(c);
    CHECK(o[6] == "split");
    CHECK(o[7] == "impute");
    c.input_csv = "x.csv";
    c.input_schema = "x.schema.json";
    CHECK(stage_order(c).front() == "ingest");
  }

  TEST_CASE("exit codes") {
    CHECK(exit_code_for(Error(Errc::ConfigError, "x")) == 2);
    CHECK(exit_code_for(Error(Errc::EmptyGrid, "x")) == 2);
    CHECK(exit_code_for(Error(Errc::ParseError, "x")) == 3);
    CHECK(exit_code_for(Error(Errc::SchemaMismatch, "x")) == 3);
    CHECK(exit_code_for(Error(Errc::MissingStage, "x")) == 4);
  }

  TEST_CASE("fingerprint is FNV-1a 64") {
    const auto d = fresh_dir("fnv");
    std::ofstream(d / "empty").close();
    std::ofstream(d / "a") << "a";
    CHECK(file_fingerprint(d / "empty") == "cbf29ce484222325");
    CHECK(file_fingerprint(d / "a") == "af63dc4c8601ec8c");
  }

  TEST_CASE("light run: manifest, artifacts and report tables") {
    const auto& d = light_run();
    for (const auto* f : {"manifest.json", "cohort.csv", "truth.csv", "train.csv", "test.csv", "balanced.csv",
                          "tune_original.csv", "metrics_tuned_original.txt", "metrics_untuned_scaled.txt",
                          "roc.csv", "importance.csv", "boruta.csv", "selected_features.txt", "pca_curve.csv",
                          "variance.csv", "table1_analog.csv", "table2_analog.csv", "table3_analog.csv"}) {
      CHECK_MESSAGE(fs::exists(d / f), f);
    }
    CHECK_FALSE(fs::exists(d / "FAILED"));
    const auto manifest = slurp(d / "manifest.json");
    CHECK(manifest.find("\"report\"") != std::string::npos);
    CHECK(manifest.find("fnv1a64") != std::string::npos);

    const auto t1 = rows_of(d / "table1_analog.csv");
    REQUIRE(!t1.empty());
    CHECK(t1[0] == std::vector<std::string>{"model", "variant", "accuracy", "precision", "recall"});
    std::map<std::string, std::vector<double>> by;
    for (std::size_t i = 1; i < t1.size(); ++i) {
      by[t1[i][0] + "/" + t1[i][1]] = {std::stod(t1[i][2]), std::stod(t1[i][3]), std::stod(t1[i][4])};
    }
    const auto t2 = rows_of(d / "table2_analog.csv");
    CHECK(t2[0] == std::vector<std::string>{"model", "accuracy_diff", "precision_diff", "recall_diff"});
    for (std::size_t i = 1; i < t2.size(); ++i) {
      const auto& o = by.at(t2[i][0] + "/original");
      const auto& s = by.at(t2[i][0] + "/scaled");
      for (int k = 0; k < 3; ++k) CHECK(std::abs(std::stod(t2[i][1 + k]) - (s[k] - o[k])) <= 0.01);
    }
    const auto t3 = rows_of(d / "table3_analog.csv");
    CHECK(t3[0] == std::vector<std::string>{"group", "accuracy", "precision", "recall"});
    REQUIRE(t3.size() == 4);
    CHECK(t3[1][0] == "Medical history");
    CHECK(t3[2][0] == "Neuropsychology assessments");
    CHECK(t3[3][0].find("ApoE") != std::string::npos);

    const auto metrics = read_key_values(d / "metrics_tuned_original.txt");
    std::map<std::string, std::string> m(metrics.begin(), metrics.end());
    CHECK(m.at("positive_class") == "NonHC");
    CHECK(std::stoul(m.at("tp")) + std::stoul(m.at("fp")) + std::stoul(m.at("fn")) + std::stoul(m.at("tn")) ==
          std::stoul(m.at("n_test")));
    CHECK(rows_of(d / "roc.csv")[0] == std::vector<std::string>{"threshold", "fpr", "tpr"});
  }

  TEST_CASE("light run is reproducible") {
    const auto& a = light_run();
    const auto b = fresh_dir("light_again");
    run_pipeline(light(), b);
    for (const auto* f : {"table1_analog.csv", "table3_analog.csv", "importance.csv", "boruta.csv", "manifest.json"}) {
      CHECK_MESSAGE(slurp(a / f) == slurp(b / f), f);
    }
  }

  TEST_CASE("missing upstream stage fails with a marker") {
    const auto d = fresh_dir("missing");
    CHECK(code_of([&] { emit_reports(d); }) == Errc::MissingStage);
    try {
      run_stage("train", light(), d);
      FAIL("expected StageError");
    } catch (const StageError& e) {
      CHECK(e.stage() == "train");
      CHECK(exit_code_for(e) == 4);
    }
    const auto marker = read_key_values(d / "FAILED");
    REQUIRE(!marker.empty());
    CHECK(marker[0] == std::pair<std::string, std::string>{"stage", "train"});
  }

  TEST_CASE("cli exit codes") {
    const std::string cli = ADSCREEN_CLI_PATH;
    if (cli.empty()) return;
    const auto d = fresh_dir("cli");
    std::ofstream(d / "bad.json") << R"({"bogus": true})";
    auto run = [&](const std::string& args) {
      const int rc = std::system((cli + " " + args + " > " + (d / "log.txt").string() + " 2>&1").c_str());
      return WEXITSTATUS(rc);
    };
    CHECK(run("--help") == 0);
    CHECK(run("tune --out " + (d / "r").string() + " --config " + (d / "bad.json").string()) == 2);
    CHECK(run("train --out " + (d / "empty").string()) == 4);
    CHECK(run("no-such-command") != 0);
  }
}
