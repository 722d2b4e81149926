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

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include "dicke/io.hpp"

namespace
{

namespace io = dicke::io;

TEST(Format, ShortestRoundTrip)
{
  EXPECT_EQ(io::format(0.1), "0.1");
  EXPECT_EQ(io::format(1.0), "1");
  EXPECT_EQ(io::format(-2.5e-300), "-2.5e-300");
  const double x = 0.1 + 0.2;
  EXPECT_EQ(std::stod(io::format(x)), x);
  EXPECT_EQ(io::format(std::numeric_limits<double>::quiet_NaN()), "nan");
  EXPECT_EQ(io::format(-INFINITY), "-inf");
  EXPECT_EQ(io::format(std::uint64_t(18446744073709551615ull)), "18446744073709551615");
  EXPECT_EQ(io::format(true), "true");
  EXPECT_EQ(io::format("abc"), "abc");
}

TEST(Csv, QuotesOnlyWhenNeeded)
{
  EXPECT_EQ(io::csv_field("plain"), "plain");
  EXPECT_EQ(io::csv_field("1,2"), "\"1,2\"");
  EXPECT_EQ(io::csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
  EXPECT_EQ(io::csv_field("a\nb"), "\"a\nb\"");
  EXPECT_EQ(io::csv_field(""), "");
}

io::Document sample()
{
  io::Document doc;
  doc.command = "steady";
  doc.echo("n", 3u);
  doc.echo("rates", std::string("1,2"));
  auto & t = doc.add_table("distribution", {"n1", "n2", "probability"});
  t.add_row(3u, 0u, 0.25);
  t.add_row(2u, 1u, 0.75);
  doc.add_table("empty", {"x"});
  return doc;
}

TEST(Csv, LayoutWithCommentsAndCrlf)
{
  std::ostringstream os;
  io::write_csv(os, sample());
  EXPECT_EQ(os.str(),
    "# schema=dicke-output/1\r\n"
    "# command=steady\r\n"
    "# n=3\r\n"
    "# rates=1,2\r\n"
    "# table=distribution\r\n"
    "n1,n2,probability\r\n"
    "3,0,0.25\r\n"
    "2,1,0.75\r\n"
    "\r\n"
    "# table=empty\r\n"
    "x\r\n");
}

TEST(Table, RowWidthIsChecked)
{
  io::Document doc;
  auto & t = doc.add_table("t", {"a", "b"});
  EXPECT_THROW(t.add_row(1.0), dicke::ValidationError);
  EXPECT_THROW(t.add_row(std::vector<std::string>{"1", "2", "3"}), dicke::ValidationError);
  EXPECT_THROW(doc.table("missing"), dicke::ValidationError);
}

TEST(Json, StructureAndAttachments)
{
  auto doc = sample();
  auto j = io::to_json(doc);
  EXPECT_EQ(j["schema"], "dicke-output/1");
  EXPECT_EQ(j["config"]["rates"], "1,2");
  EXPECT_EQ(j["tables"][0]["rows"][1][2], "0.75");
  EXPECT_FALSE(j.contains("expressions"));
  doc.attachments["I_total"] = {{"terms", 1}};
  std::ostringstream os;
  io::write_json(os, doc);
  auto parsed = nlohmann::json::parse(os.str());
  EXPECT_EQ(parsed["expressions"]["I_total"]["terms"], 1);
  EXPECT_EQ(parsed["tables"].size(), 2u);
}

TEST(Write, FilesAndFormats)
{
  EXPECT_EQ(io::parse_format("csv"), io::Format::csv);
  EXPECT_EQ(io::parse_format("json"), io::Format::json);
  EXPECT_THROW(io::parse_format("xml"), dicke::ValidationError);

  const std::string path = ::testing::TempDir() + "dicke_io_test.csv";
  io::write(sample(), io::Format::csv, path);
  std::ifstream in(path, std::ios::binary);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::ostringstream os;
  io::write_csv(os, sample());
  EXPECT_EQ(text, os.str());
  std::remove(path.c_str());
  EXPECT_THROW(io::write(sample(), io::Format::csv, "/nonexistent-dir/x.csv"),
    dicke::ValidationError);
}

}  // namespace
