// Copyright 2026 The kerrgate Authors
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

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <sys/wait.h>

#include "kerrgate/cli.hpp"
#include "kerrgate/csv.hpp"

using namespace kerrgate;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run_cli(const std::vector<std::string>& args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("kerrgate_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("CSV quoting round trip") {
    CHECK(csv_escape("plain") == "plain");
    CHECK(csv_escape("a,b") == "\"a,b\"");
    CHECK(csv_escape("say \"hi\"") == "\"say \"\"hi\"\"\"");
    CsvTable t({"name", "value"});
    t.add_row({"x, y", "1"});
    t.add_row({"line\nbreak", "\"q\""});
    std::ostringstream os;
    t.write(os);
    const CsvTable back = parse_csv(os.str());
    CHECK(back.header() == t.header());
    CHECK(back.rows() == t.rows());
    CHECK_THROWS_AS(t.add_row({"only one"}), std::invalid_argument);
    CHECK_THROWS_AS(parse_csv("a,b\n1\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_csv("a,b\n\"1,2\n"), std::invalid_argument);
    CHECK(parse_csv("n,y\n1,2\n\n").rows().size() == 1);
  }

  TEST_CASE("numbers carry 12 significant digits") {
    CHECK(format_number(0.1) == "0.1");
    CHECK(format_number(1.0 / 3.0) == "0.333333333333");
    CHECK(format_number(123456789.123456789) == "123456789.123");
    CHECK(format_number(-2.5e-20) == "-2.5e-20");
  }

  TEST_CASE("point with zero coupling") {
    const Outcome o = run_cli({"point", "--chi", "0", "--sigma", "0.3", "--sites", "4"});
    REQUIRE(o.code == 0);
    const auto j = nlohmann::json::parse(o.out);
    CHECK(j["overlap"]["re"].get<double>() == 1.0);
    CHECK(j["overlap"]["im"].get<double>() == 0.0);
    CHECK(j["quad"]["converged"].get<bool>());
    CHECK(j["quad"]["nodes"].get<int>() == 129);
    CHECK(j["params"]["sites"].get<int>() == 4);
  }

  TEST_CASE("point reports the fidelity fields") {
    const Outcome o = run_cli({"point", "--arrangement", "counter-2", "--gamma", "10", "--chi",
                               "10000", "--omega0", "0", "--sigma", "1.8367"});
    REQUIRE(o.code == 0);
    const auto j = nlohmann::json::parse(o.out);
    CHECK(j["f_pi"].get<double>() == doctest::Approx(0.8628).epsilon(1e-4));
    for (const char* key : {"overlap", "f_pi", "phi_opt", "f_opt", "quad", "params"}) CHECK(j.contains(key));
    CHECK(j["quad"].contains("window"));
    CHECK(j["quad"].contains("refinements"));
  }

  TEST_CASE("validation failures exit with 2") {
    CHECK(run_cli({"point", "--sigma", "-1"}).code == cli::kExitUsage);
    CHECK(run_cli({"point", "--sigma", "0.2", "--arrangement", "counter-2"}).code == cli::kExitUsage);
    CHECK(run_cli({"point", "--sigma", "0.2", "--arrangement", "ring"}).code == cli::kExitUsage);
    CHECK(run_cli({"point", "--sigma", "0.2", "--chi", "-3"}).code == cli::kExitUsage);
    CHECK(run_cli({"point", "--sigma", "0.2", "--nodes", "1"}).code == cli::kExitUsage);
    CHECK(run_cli({"point"}).code == cli::kExitUsage);
    CHECK(run_cli({"nonsense"}).code == cli::kExitUsage);
    CHECK(run_cli({}).code == cli::kExitUsage);
    CHECK(run_cli({"--help"}).code == cli::kExitOk);
  }

  TEST_CASE("non-convergence exits with 3 and still prints") {
    const Outcome o = run_cli({"point", "--sites", "10", "--sigma", "2", "--nodes", "3",
                               "--max-refinements", "0", "--tol", "1e-14"});
    CHECK(o.code == cli::kExitNumerics);
    const auto j = nlohmann::json::parse(o.out);
    CHECK_FALSE(j["quad"]["converged"].get<bool>());
  }

  TEST_CASE("fit on synthetic data and malformed input") {
    const fs::path dir = fresh_dir("fit");
    {
      std::ofstream f(dir / "synthetic.csv");
      f << "n,y\n";
      for (int n = 1; n <= 25; ++n) f << n << ',' << format_number(2.0 * std::pow(n, -3.0)) << '\n';
    }
    const Outcome o = run_cli({"fit", "--csv", (dir / "synthetic.csv").string(), "--column", "y",
                               "--n-lo", "1", "--n-hi", "25"});
    REQUIRE(o.code == 0);
    const auto j = nlohmann::json::parse(o.out);
    CHECK(j["amplitude"].get<double>() == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(j["exponent"].get<double>() == doctest::Approx(-3.0).epsilon(1e-9));
    CHECK(j["points"].get<int>() == 25);

    CHECK(run_cli({"fit", "--csv", (dir / "synthetic.csv").string(), "--column", "y", "--n-lo",
                   "20", "--n-hi", "4"})
              .code == cli::kExitUsage);
    CHECK(run_cli({"fit", "--csv", (dir / "synthetic.csv").string(), "--column", "nope"}).code ==
          cli::kExitUsage);
    {
      std::ofstream f(dir / "bad.csv");
      f << "n,y\n1,2\n2,abc\n3,1\n4,0.5\n";
    }
    CHECK(run_cli({"fit", "--csv", (dir / "bad.csv").string(), "--column", "y", "--n-lo", "1",
                   "--n-hi", "4"})
              .code == cli::kExitUsage);
    CHECK(run_cli({"fit", "--csv", (dir / "missing.csv").string(), "--column", "y"}).code ==
          cli::kExitUsage);
  }

  TEST_CASE("scan writes CSV and a manifest that reruns byte for byte") {
    const fs::path a = fresh_dir("scan_a");
    const fs::path b = fresh_dir("scan_b");
    const Outcome o = run_cli({"scan", "--sites", "3", "--sigma-min", "0.01", "--sigma-max", "3",
                               "--points", "6", "--out-dir", a.string(), "--svg", "--threads", "3"});
    REQUIRE(o.code == 0);
    const CsvTable t = parse_csv(slurp(a / "scan.csv"));
    CHECK(t.rows().size() == 6);
    CHECK(t.header().front() == "sigma");
    CHECK(fs::exists(a / "scan.svg"));
    const auto manifest = nlohmann::json::parse(slurp(a / "manifest.json"));
    CHECK(manifest["command"] == "scan");
    CHECK(manifest["quadrature"]["nodes"] == 129);

    const Outcome r = run_cli({"rerun", "--manifest", (a / "manifest.json").string(), "--out-dir",
                               b.string(), "--threads", "1"});
    REQUIRE(r.code == 0);
    CHECK(slurp(a / "scan.csv") == slurp(b / "scan.csv"));
    CHECK(slurp(a / "manifest.json") == slurp(b / "manifest.json"));
  }

  TEST_CASE("fig5 columns and ordering of the two averages") {
    const fs::path dir = fresh_dir("fig5");
    const Outcome o = run_cli({"fig5", "--points", "5", "--out-dir", dir.string()});
    REQUIRE(o.code == 0);
    const CsvTable t = parse_csv(slurp(dir / "fig5.csv"));
    CHECK(t.header() == std::vector<std::string>{"sigma", "f1_pi", "f2_pi"});
    for (const auto& row : t.rows()) CHECK(std::stod(row[2]) >= std::stod(row[1]));
  }

  TEST_CASE("installed binary maps errors to exit codes") {
    auto status = [](const std::string& args) {
      const int s = std::system((std::string(KERRGATE_TOOL) + " " + args + " >/dev/null 2>&1").c_str());
      return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
    };
    CHECK(status("point --chi 0 --sigma 0.2") == 0);
    CHECK(status("point --sigma 0") == 2);
    CHECK(status("point --sites 10 --sigma 2 --nodes 3 --max-refinements 0 --tol 1e-14") == 3);
  }
}
