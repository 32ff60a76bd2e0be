// Copyright 2026 The bankmfg Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"

#include "bankmfg/artifacts.hpp"
#include "bankmfg/commands.hpp"
#include "io.hpp"
#include "tempdir.hpp"

namespace fs = std::filesystem;

namespace {

const std::string kToy = std::string(BANKMFG_SOURCE_DIR) + "/configs/toy.yaml";

int run(const std::string& args) {
  const std::string command =
      std::string(BANKMFG_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

testio::SchemaValidator schema(const std::string& name) {
  return testio::SchemaValidator(testio::load_json(
      std::string(BANKMFG_SOURCE_DIR) + "/schemas/" + name));
}

nlohmann::json layout(const std::string& name) {
  return testio::load_json(std::string(BANKMFG_SOURCE_DIR) + "/schemas/" +
                           name);
}

void check_manifest(const fs::path& dir, const std::string& command) {
  const auto doc = testio::load_json((dir / "manifest.json").string());
  CHECK(schema("manifest.schema.json").validate(doc).empty());
  CHECK(doc["command"] == command);
  CHECK(doc["status"] == "complete");
  for (const auto& output : doc["outputs"]) {
    const fs::path file = dir / output["path"].get<std::string>();
    CHECK(bankmfg::git_blob_hash_file(file) == output["sha1"]);
    CHECK(fs::file_size(file) == output["bytes"].get<std::uintmax_t>());
  }
  CHECK(!fs::exists(dir / ".lock"));
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("train, rollout, evaluate on the small profile") {
  testio::TempDir dir;
  const fs::path a = dir / "a";
  const fs::path b = dir / "b";
  REQUIRE(run("train --quiet --config " + kToy + " --out " + a.string()) == 0);
  REQUIRE(run("train --quiet --config " + kToy + " --out " + b.string()) == 0);
  check_manifest(a, "train");

  const testio::Csv loss = testio::read_csv((a / "loss.csv").string());
  CHECK(loss.rows.size() == 60);
  CHECK(testio::validate_csv(loss, layout("loss.csv.json")).empty());
  CHECK(testio::slurp((a / "loss.csv").string()) ==
        testio::slurp((b / "loss.csv").string()));
  for (int n = 1; n <= 3; ++n) {
    const std::string name =
        "checkpoints/" + bankmfg::checkpoint_file_name(n);
    REQUIRE(fs::exists(a / name));
    CHECK(testio::slurp((a / name).string()) ==
          testio::slurp((b / name).string()));
    CHECK(schema("checkpoint.schema.json")
              .validate(testio::load_json((a / name).string()))
              .empty());
  }

  const fs::path other = dir / "seed1";
  REQUIRE(run("train --quiet --seed 1 --config " + kToy + " --out " +
              other.string()) == 0);
  CHECK(testio::slurp((other / "loss.csv").string()) !=
        testio::slurp((a / "loss.csv").string()));

  const std::string checkpoint =
      (a / "checkpoints" / bankmfg::checkpoint_file_name(3)).string();
  const fs::path full = dir / "full";
  REQUIRE(run("rollout --config " + kToy + " --checkpoint " + checkpoint +
              " --out " + full.string()) == 0);
  check_manifest(full, "rollout");
  const testio::Csv tree = testio::read_csv((full / "trajectories.csv").string());
  CHECK(tree.rows.size() == 9 * 3);
  CHECK(testio::validate_csv(tree, layout("trajectories.csv.json")).empty());
  const auto values = testio::load_json((full / "values.json").string());
  CHECK(schema("values.schema.json").validate(values).empty());
  CHECK(values["mode"] == "full-tree");

  const fs::path sampled = dir / "sampled";
  REQUIRE(run("rollout --mode sampled --config " + kToy + " --checkpoint " +
              checkpoint + " --out " + sampled.string()) == 0);
  const testio::Csv paths =
      testio::read_csv((sampled / "trajectories.csv").string());
  CHECK(paths.rows.size() == 50 * 3);
  CHECK(paths.number(0, "probability") == doctest::Approx(0.02));
  const auto sampled_values =
      testio::load_json((sampled / "values.json").string());
  CHECK(std::abs(sampled_values["major"].get<double>() -
                 values["major"].get<double>()) <=
        5.0 * sampled_values["major_stderr"].get<double>() + 1e-15);

  const fs::path eval = dir / "eval";
  REQUIRE(run("evaluate --config " + kToy + " --checkpoint " + checkpoint +
              " --out " + eval.string()) == 0);
  check_manifest(eval, "evaluate");
  const auto report = testio::load_json((eval / "exploitability.json").string());
  CHECK(schema("exploitability.schema.json").validate(report).empty());
  CHECK(report["outer_iteration"] == 3);
  CHECK(report["minor"]["gap"].get<double>() >= -1e-12);
  CHECK(report["major"]["gap"].get<double>() >= -1e-12);
}

TEST_CASE("project-demo") {
  testio::TempDir dir;
  {
    std::ofstream csv(dir / "measure.csv");
    csv << "p,r,weight\n0.5,0.03,0.5\n0.21,0.026,0.25\n0.8,0.035,0.25\n";
  }
  const fs::path out = dir / "demo";
  REQUIRE(run("project-demo --config " + kToy + " " +
              (dir / "measure.csv").string() + " --out " + out.string()) == 0);
  check_manifest(out, "project-demo");
  const testio::Csv projected =
      testio::read_csv((out / "projected.csv").string());
  CHECK(projected.rows.size() == 96);
  CHECK(testio::validate_csv(projected, layout("projected.csv.json")).empty());
  double mass = 0.0;
  double mean_p = 0.0;
  for (std::size_t k = 0; k < projected.rows.size(); ++k) {
    mass += projected.number(k, "weight");
    mean_p += projected.number(k, "weight") * projected.number(k, "p");
  }
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(mean_p == doctest::Approx(0.25 + 0.0525 + 0.2).epsilon(1e-12));

  {
    std::ofstream csv(dir / "outside.csv");
    csv << "0.9,0.03,1\n";
  }
  const fs::path failed = dir / "failed";
  CHECK(run("project-demo --config " + kToy + " " +
            (dir / "outside.csv").string() + " --out " + failed.string()) ==
        1);
  const auto manifest = testio::load_json((failed / "manifest.json").string());
  CHECK(manifest["status"] == "failed");
  CHECK(manifest["error"].get<std::string>().find("outside") !=
        std::string::npos);
  CHECK(!fs::exists(failed / ".lock"));
}

TEST_CASE("usage and configuration errors exit with status 2") {
  testio::TempDir dir;
  {
    std::ofstream bad(dir / "bad.yaml");
    bad << testio::slurp(kToy) << "surprise: 1\n";
  }
  CHECK(run("train --config " + (dir / "bad.yaml").string() + " --out " +
            (dir / "x").string()) == 2);
  CHECK(!fs::exists(dir / "x"));
  CHECK(run("train") == 2);
  CHECK(run("rollout --config " + kToy) == 2);
  CHECK(run("frobnicate") == 2);
  CHECK(run("--help") == 0);
}

TEST_CASE("a locked output directory is refused") {
  testio::TempDir dir;
  fs::create_directories(dir / "busy");
  std::ofstream(dir / "busy" / ".lock") << "1\n";
  CHECK(run("train --quiet --config " + kToy + " --out " +
            (dir / "busy").string()) == 1);
  CHECK(!fs::exists(dir / "busy" / "manifest.json"));
}

}  // TEST_SUITE
