// Copyright 2026 The popmc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Drives the installed command-line front end as a subprocess.

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path kWork = fs::temp_directory_path() / "popmc_test_cli";

int run(const std::string& args) {
  const std::string cmd = std::string(POPMC_CLI_PATH) + " " + args + " > " + (kWork / "stdout.txt").string() + " 2> " +
                          (kWork / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::size_t data_rows(const fs::path& p) {
  std::istringstream in(slurp(p));
  std::string line;
  std::size_t rows = 0;
  while (std::getline(in, line)) ++rows;
  return rows - 1;
}

std::size_t columns(const fs::path& p) {
  std::istringstream in(slurp(p));
  std::string header;
  std::getline(in, header);
  std::size_t n = 1;
  for (char c : header) n += c == ',';
  return n;
}

struct Workdir {
  Workdir() {
    fs::remove_all(kWork);
    fs::create_directories(kWork);
  }
  ~Workdir() { fs::remove_all(kWork); }
};

}  // namespace

TEST_CASE("popmcmc defaults produce 8192 samples of four means") {
  Workdir w;
  REQUIRE(run("popmcmc --chains 8 --out-dir " + (kWork / "pm").string()) == 0);
  CHECK(data_rows(kWork / "pm" / "samples.csv") == 8192);
  CHECK(columns(kWork / "pm" / "samples.csv") == 4);
  CHECK(data_rows(kWork / "pm" / "trace.csv") == 8);
  const auto manifest = nlohmann::json::parse(slurp(kWork / "pm" / "manifest.json"));
  CHECK(manifest["config"]["iterations"] == "8192");
  CHECK(manifest["config"]["chains"] == "8");
}

TEST_CASE("pfilter defaults produce 200 filter means of three factors") {
  Workdir w;
  REQUIRE(run("pfilter --particles 256 --out-dir " + (kWork / "pf").string()) == 0);
  CHECK(data_rows(kWork / "pf" / "means.csv") == 200);
  CHECK(columns(kWork / "pf" / "means.csv") == 3);
  CHECK(data_rows(kWork / "pf" / "stds.csv") == 200);
}

TEST_CASE("pfilter reads an observation file") {
  Workdir w;
  REQUIRE(run("gendata --model fsv --length 30 --data-seed 4 --out-dir " + (kWork / "gen").string()) == 0);
  REQUIRE(run("pfilter --particles 128 --data " + (kWork / "gen" / "data.csv").string() + " --out-dir " +
              (kWork / "from_file").string()) == 0);
  REQUIRE(run("pfilter --particles 128 --length 30 --data-seed 4 --out-dir " + (kWork / "seeded").string()) == 0);
  CHECK(data_rows(kWork / "from_file" / "means.csv") == 30);
  CHECK(slurp(kWork / "from_file" / "means.csv") == slurp(kWork / "seeded" / "means.csv"));
}

TEST_CASE("flags and config files combine, flags last") {
  Workdir w;
  {
    std::ofstream cfg(kWork / "run.cfg");
    cfg << "particles = 4096\nseed = 5\n";
  }
  REQUIRE(run("istoy --config " + (kWork / "run.cfg").string() + " --seed 9 --out " + "toy.csv --out-dir " +
              (kWork / "toy").string()) == 0);
  const auto manifest = nlohmann::json::parse(slurp(kWork / "toy" / "manifest.json"));
  CHECK(manifest["config"]["particles"] == "4096");
  CHECK(manifest["config"]["seed"] == "9");
  CHECK(fs::exists(kWork / "toy" / "toy.csv"));
}

TEST_CASE("exit codes") {
  Workdir w;
  CHECK(run("") == 2);
  CHECK(run("popmcmc --no-such-flag 3") == 2);
  CHECK(run("popmcmc --chains 0 --out-dir " + kWork.string()) == 2);
  CHECK(run("smc-sampler --precision half --out-dir " + kWork.string()) == 2);
  CHECK(slurp(kWork / "stderr.txt").find("precision") != std::string::npos);
  CHECK(run("istoy --config " + (kWork / "absent.cfg").string()) == 4);
  CHECK(run("popmcmc --data " + (kWork / "absent.csv").string() + " --out-dir " + kWork.string()) == 4);
  {
    std::ofstream blocker(kWork / "file");
    blocker << "x";
  }
  CHECK(run("istoy --particles 1000 --out-dir " + (kWork / "file" / "sub").string()) == 4);
  {
    // Observations this far out give every particle a -inf log weight, so
    // the filter must report a numeric failure.
    std::ofstream data(kWork / "wild.csv");
    data << "y_1,y_2,y_3,y_4,y_5\n1e200,1e200,1e200,1e200,1e200\n";
  }
  CHECK(run("pfilter --particles 64 --data " + (kWork / "wild.csv").string() + " --out-dir " + kWork.string()) == 3);
  CHECK(run("--version") == 0);
  CHECK(run("bench --help") == 0);
}

TEST_CASE("bench writes a timing table") {
  Workdir w;
  REQUIRE(run("bench --sizes 4,8 --workers-list 1,1 --iterations 20 --repetitions 3 --out-dir " +
              (kWork / "b").string()) == 0);
  CHECK(columns(kWork / "b" / "bench.csv") == 5);
  CHECK(data_rows(kWork / "b" / "bench.csv") == 4);
  CHECK(run("bench --workers-list 2 --out-dir " + (kWork / "b").string()) == 2);
}
