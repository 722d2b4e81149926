// Copyright 2026 The dicke-trajectories Authors
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

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

namespace
{

struct Run
{
  int status;
  std::string out;
};

Run run(const std::string & args)
{
  const std::string cmd = std::string(DICKE_CLI_PATH) + " " + args + " 2>/dev/null";
  FILE * pipe = popen(cmd.c_str(), "r");
  if (!pipe) {
    return {-1, {}};
  }
  std::string out;
  char buf[4096];
  std::size_t got;
  while ((got = fread(buf, 1, sizeof(buf), pipe)) > 0) {
    out.append(buf, got);
  }
  const int raw = pclose(pipe);
  return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, out};
}

std::vector<std::string> lines(const std::string & text)
{
  std::vector<std::string> out;
  std::istringstream is(text);
  for (std::string l; std::getline(is, l); ) {
    if (!l.empty() && l.back() == '\r') {
      l.pop_back();
    }
    out.push_back(l);
  }
  return out;
}

/// Rows of table `name` (header excluded) from CSV output.
std::vector<std::string> table_rows(const std::string & text, const std::string & name)
{
  std::vector<std::string> out;
  bool inside = false, header = false;
  for (const auto & l : lines(text)) {
    if (l.rfind("# table=", 0) == 0) {
      inside = l == "# table=" + name;
      header = inside;
      continue;
    }
    if (!inside || l.empty()) {
      continue;
    }
    if (header) {
      header = false;
      continue;
    }
    out.push_back(l);
  }
  return out;
}

TEST(Cli, FlatSteadyState)
{
  auto r = run("steady --n 3 --ratio 1");
  ASSERT_EQ(r.status, 0);
  EXPECT_EQ(r.out.rfind("# schema=dicke-output/1\r\n", 0), 0u);
  auto rows = table_rows(r.out, "distribution");
  ASSERT_EQ(rows.size(), 4u);
  for (const auto & row : rows) {
    EXPECT_EQ(row.substr(row.rfind(',') + 1), "0.25");
  }
  auto op = table_rows(r.out, "order_parameter");
  ASSERT_EQ(op.size(), 1u);
  EXPECT_EQ(op[0].rfind("3,1,0.5,", 0), 0u);
}

TEST(Cli, ExitCodes)
{
  EXPECT_EQ(run("--help").status, 0);
  EXPECT_EQ(run("steady --n 0").status, 1);
  EXPECT_EQ(run("dynamics --bogus").status, 1);
  EXPECT_EQ(run("nosuchcommand").status, 1);
  EXPECT_EQ(run("dynamics --n 4 --rates 1,-2").status, 1);
  // lattice of C(2003, 3) states is refused
  EXPECT_EQ(run("dynamics --n 2000 --rates 1,2,3").status, 3);
}

TEST(Cli, DynamicsJson)
{
  auto r = run("dynamics --n 4 --rates 1,1/2 --t-points 5 --out json --expressions");
  ASSERT_EQ(r.status, 0);
  auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["schema"], "dicke-output/1");
  EXPECT_EQ(j["command"], "dynamics");
  std::vector<std::string> names;
  for (const auto & t : j["tables"]) {
    names.push_back(t["name"]);
  }
  EXPECT_NE(std::find(names.begin(), names.end(), "intensity"), names.end());
  EXPECT_NE(std::find(names.begin(), names.end(), "peaks"), names.end());
  EXPECT_TRUE(j.contains("expressions"));
}

TEST(Cli, MonteCarloIsReproducible)
{
  const std::string args = "mc --n 25 --rates 1,3 --trajectories 400 --seed 12 --bins 16";
  auto a = run(args);
  auto b = run(args);
  ASSERT_EQ(a.status, 0);
  EXPECT_EQ(a.out, b.out);
  auto c = run(args + " --threads 3");
  ASSERT_EQ(c.status, 0);
  for (const auto & name : {"intensity", "final_fraction", "final_states"}) {
    auto rows = table_rows(a.out, name);
    EXPECT_FALSE(rows.empty()) << name;
    EXPECT_EQ(rows, table_rows(c.out, name)) << name;
  }
  EXPECT_NE(run("mc --n 25 --rates 1,3 --trajectories 400 --seed 13 --bins 16").out, a.out);
}

TEST(Cli, WritesToFile)
{
  const std::string path = ::testing::TempDir() + "dicke_cli_scaling.csv";
  auto r = run("scaling --n 10,20 --d 1,2 -o " + path);
  ASSERT_EQ(r.status, 0);
  EXPECT_TRUE(r.out.empty());
  std::ifstream in(path, std::ios::binary);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  EXPECT_EQ(table_rows(text, "scaling").size(), 4u);
  std::remove(path.c_str());
}

TEST(Cli, QuickVerifyPasses)
{
  auto r = run("verify --quick");
  EXPECT_EQ(r.status, 0);
  auto rows = table_rows(r.out, "checks");
  EXPECT_GT(rows.size(), 10u);
}

}  // namespace
