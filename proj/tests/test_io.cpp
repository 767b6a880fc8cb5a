#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <chrono>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "posgain/errors.hpp"
#include "posgain/io.hpp"

using namespace posgain;

namespace {

std::string data_path(const std::string& name) {
  return std::string(POSGAIN_DATA_DIR) + "/" + name;
}

std::filesystem::path temp_file(const std::string& stem) {
  auto tick = std::chrono::steady_clock::now().time_since_epoch().count();
  return std::filesystem::temp_directory_path() / (stem + std::to_string(tick));
}

const char* kStateSpaceDoc = R"({
  "type": "statespace", "version": 1, "name": "demo",
  "description": "two-state example",
  "A": [[0.5, 0.1], [0.0, 0.4]],
  "B": [[1.0], [0.5]],
  "C": [[1.0, 0.0]],
  "D": [[0.25]]
})";

}  // namespace

TEST_CASE("parse a statespace document") {
  SystemFileContent c = parse_system_file(kStateSpaceDoc, "inline");
  CHECK(c.type == "statespace");
  CHECK(c.name == "demo");
  CHECK(c.description == "two-state example");
  REQUIRE(c.statespace.has_value());
  CHECK(c.statespace->A(0, 1) == 0.1);
  CHECK(c.statespace->B(1, 0) == 0.5);
  CHECK(c.statespace->D(0, 0) == 0.25);
  CHECK_FALSE(c.rnn.has_value());
}

TEST_CASE("parse an rnn document") {
  SystemFileContent c = parse_system_file(R"({
    "type": "rnn", "version": 1,
    "Lambda": [[0.5]], "Win": [[0.2]], "Wout": [[0.3]]
  })",
                                          "inline");
  CHECK(c.type == "rnn");
  REQUIRE(c.rnn.has_value());
  CHECK(c.rnn->lambda()(0, 0) == 0.5);
  CHECK(c.rnn->channel_dim() == 1);
}

TEST_CASE("parse errors carry the origin and a location") {
  CHECK_THROWS_WITH_AS(parse_system_file("{ not json", "bad.json"),
                       doctest::Contains("bad.json"), ParseError);
  CHECK_THROWS_WITH_AS(parse_system_file("[1, 2]", "arr.json"),
                       doctest::Contains("top level"), ParseError);
  CHECK_THROWS_WITH_AS(
      parse_system_file(R"({"type": "statespace", "version": 2, "A": [[0]]})", "v.json"),
      doctest::Contains("\"version\": 1"), ParseError);
  CHECK_THROWS_WITH_AS(parse_system_file(R"({"version": 1, "A": [[0]]})", "t.json"),
                       doctest::Contains("type"), ParseError);
  CHECK_THROWS_WITH_AS(parse_system_file(R"({"type": "foo", "version": 1})", "u.json"),
                       doctest::Contains("unknown type 'foo'"), ParseError);

  // missing key, ragged rows, and non-numeric entries all name the spot
  CHECK_THROWS_WITH_AS(
      parse_system_file(R"({"type": "statespace", "version": 1, "A": [[0.5]]})", "k.json"),
      doctest::Contains("missing key 'B'"), ParseError);
  CHECK_THROWS_WITH_AS(
      parse_system_file(
          R"({"type": "rnn", "version": 1, "Lambda": [[0.1, 0.0], [0.0]], "Win": [[1]], "Wout": [[1]]})",
          "r.json"),
      doctest::Contains("row 1"), ParseError);
  CHECK_THROWS_WITH_AS(
      parse_system_file(
          R"({"type": "rnn", "version": 1, "Lambda": [[0.1, "x"]], "Win": [[1]], "Wout": [[1]]})",
          "n.json"),
      doctest::Contains("(0,1)"), ParseError);
}

TEST_CASE("model-level failures keep their own types") {
  CHECK_THROWS_AS(parse_system_file(R"({
    "type": "statespace", "version": 1,
    "A": [[0.5]], "B": [[1.0], [1.0]], "C": [[1.0]], "D": [[0.0]]
  })",
                                    "dim.json"),
                  DimensionError);
  CHECK_THROWS_AS(parse_system_file(R"({
    "type": "rnn", "version": 1,
    "Lambda": [[1.5]], "Win": [[1.0]], "Wout": [[1.0]]
  })",
                                    "unstable.json"),
                  UnstableSystem);
}

TEST_CASE("shipped data files parse") {
  SystemFileContent siso = read_system_file(data_path("siso_4state.json"));
  REQUIRE(siso.statespace.has_value());
  CHECK(siso.statespace->n() == 4);
  CHECK(siso.statespace->nw() == 1);

  SystemFileContent rnn = read_system_file(data_path("rnn_relu6.json"));
  REQUIRE(rnn.rnn.has_value());
  CHECK(rnn.rnn->state_dim() == 6);
  CHECK(rnn.rnn->channel_dim() == 6);

  CHECK_THROWS_WITH_AS(read_system_file(data_path("no_such_file.json")),
                       doctest::Contains("cannot open"), ParseError);
}

TEST_CASE("write and read round trip exactly") {
  SystemFileContent c = parse_system_file(kStateSpaceDoc, "inline");
  c.statespace->A(0, 0) = 1.0 / 3.0;  // force a non-terminating decimal
  auto path = temp_file("posgain-roundtrip-");
  write_system_file(path.string(), c);
  SystemFileContent back = read_system_file(path.string());
  CHECK(back.name == c.name);
  CHECK(back.description == c.description);
  CHECK((back.statespace->A - c.statespace->A).max_abs() == 0.0);
  CHECK((back.statespace->B - c.statespace->B).max_abs() == 0.0);
  CHECK((back.statespace->C - c.statespace->C).max_abs() == 0.0);
  CHECK((back.statespace->D - c.statespace->D).max_abs() == 0.0);
  CHECK_FALSE(std::filesystem::exists(path.string() + ".tmp"));
  std::filesystem::remove(path);

  SystemFileContent missing;
  missing.type = "statespace";
  CHECK_THROWS_AS(write_system_file(temp_file("posgain-missing-").string(), missing),
                  InvalidInput);
}

TEST_CASE("atomic text writes") {
  auto path = temp_file("posgain-text-");
  write_text_file(path.string(), "alpha\n");
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line == "alpha");
  CHECK_FALSE(std::filesystem::exists(path.string() + ".tmp"));
  std::filesystem::remove(path);

  CHECK_THROWS_AS(write_text_file("/nonexistent-dir-posgain/file.txt", "x"), IoError);
}

TEST_CASE("format_sig keeps twelve significant digits") {
  CHECK(format_sig(1.0) == "1");
  CHECK(format_sig(0.1) == "0.1");
  CHECK(format_sig(1.23456789012345) == "1.23456789012");
  CHECK(format_sig(-9.079727e-3) == "-0.009079727");
  CHECK(format_sig(1e-10) == "1e-10");
}

TEST_CASE("bounds csv layout") {
  BoundReport rep;
  rep.hinf = 1.5;
  rep.rows = {BoundRow{1, 2.0, std::nullopt}, BoundRow{2, std::nullopt, 1.0}};
  rep.warnings = {"order 2 upper bound: bracket failed"};
  std::string csv = bounds_csv(rep);
  CHECK(csv ==
        "N,upper,lower,hinf\n"
        "1,2,,1.5\n"
        "2,,1,1.5\n"
        "# warning: order 2 upper bound: bracket failed\n");
  CHECK(csv.find('\r') == std::string::npos);
}

TEST_CASE("sweep csv layout") {
  std::vector<SweepCell> cells = {
      SweepCell{0.0, -1.0, CellClass::Both},
      SweepCell{0.5, -1.0, CellClass::CopOnly},
      SweepCell{1.0, -1.0, CellClass::Neither},
      SweepCell{1.5, -1.0, CellClass::Indeterminate},
  };
  CHECK(sweep_csv(cells) ==
        "a,b,classification\n"
        "0,-1,both\n"
        "0.5,-1,cop_only\n"
        "1,-1,neither\n"
        "1.5,-1,indeterminate\n");
}

TEST_CASE("trajectory csv layout") {
  StateSpace delay{Matrix{{0.0}}, Matrix{{1.0}}, Matrix{{1.0}}, Matrix{{0.0}}};
  Signal w = Signal::impulse(1, 2);
  SimResult sim = simulate(delay, w, 2);
  CHECK(trajectory_csv(w, sim) ==
        "k,u1,x1,z1\n"
        "0,1,0,0\n"
        "1,0,1,1\n");
}

TEST_CASE("certificate and witness csv layout") {
  GainCertificate cert;
  cert.gamma = 1.25;
  cert.order = 2;
  cert.p = SymMatrix::identity(2);
  std::string csv = certificate_csv(cert);
  CHECK(csv ==
        "matrix,row,col,value\n"
        "gamma,0,0,1.25\n"
        "order,0,0,2\n"
        "P,0,0,1\n"
        "P,0,1,0\n"
        "P,1,0,0\n"
        "P,1,1,1\n");

  SsgWitness wit;
  wit.p = SymMatrix::identity(1);
  wit.s = {0.5};
  CHECK(witness_csv(wit) ==
        "matrix,row,col,value\n"
        "P,0,0,1\n"
        "S,0,0,0.5\n");
}
