#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "deltasym/cli.hpp"

using namespace deltasym;

namespace {

std::string golden(const std::string& rel) { return std::string(DELTASYM_SOURCE_DIR) + "/golden/" + rel; }

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("deltasym_test_" + name)).string();
}

}  // namespace

TEST_CASE("verify command") {
  Run ok = run({"verify", golden("schemes/volterra.scm"), golden("fields/volterra.fields")});
  CHECK(ok.code == cli::kOk);
  CHECK(ok.out.find("4/4 hold") != std::string::npos);

  Run bad = run({"verify", golden("schemes/poly_n3.scm"), golden("fields/poly_bad.fields")});
  CHECK(bad.code == cli::kClaimFails);
  CHECK(bad.out.find("witness") != std::string::npos);

  CHECK(run({"verify", golden("schemes/missing.scm"), golden("fields/volterra.fields")}).code == cli::kInputError);
  CHECK(run({"verify"}).code == cli::kInputError);
  CHECK(run({"--format", "csv", "verify", golden("schemes/volterra.scm"), golden("fields/volterra.fields")})
            .out.rfind("field,holds,exact", 0) == 0);
}

TEST_CASE("find command") {
  Run r = run({"find", golden("schemes/cubic.scm"), golden("ansatz/cubic.ansatz")});
  CHECK(r.code == cli::kOk);
  CHECK(r.out.find("dimension 9") != std::string::npos);
  CHECK(r.out.find("brackets: closed") != std::string::npos);

  Run n = run({"find", golden("schemes/no_limit.scm"), golden("ansatz/no_limit.ansatz")});
  CHECK(n.out.find("dimension 9") != std::string::npos);
  CHECK(n.out.find(": xi=x[0]\n") != std::string::npos);

  std::string empty = temp_path("empty.ansatz");
  std::ofstream(empty) << "# nothing\n";
  CHECK(run({"find", golden("schemes/volterra.scm"), empty}).code == cli::kInputError);

  std::string tiny = temp_path("tiny.ansatz");
  std::ofstream(tiny) << "phi: 1\n";
  Run t = run({"find", golden("schemes/poly_n3.scm"), tiny});
  CHECK(t.code == cli::kDegenerate);
  CHECK(t.err.find("enlarge the ansatz") != std::string::npos);
}

TEST_CASE("bracket-table command") {
  Run r = run({"--format", "csv", "bracket-table", golden("fields/uxx_one.fields")});
  CHECK(r.code == cli::kOk);
  std::ifstream in(golden("brackets/uxx_one.csv"));
  std::stringstream expected;
  expected << in.rdbuf();
  CHECK(r.out == expected.str());

  std::string open_set = temp_path("open.fields");
  std::ofstream(open_set) << "P: xi=1\nC: xi=x^2\n";
  Run o = run({"bracket-table", open_set});
  CHECK(o.code == cli::kClaimFails);
  CHECK(o.out.find("not closed") != std::string::npos);
}

TEST_CASE("solve and lattice commands") {
  std::string csv = temp_path("traj.csv");
  Run r = run({"solve", golden("schemes/uxx_u.scm"), "--init", golden("solve/uxx_u.init"), "--emit", csv});
  CHECK(r.code == cli::kOk);
  CHECK(r.out.find("solution reproduced") != std::string::npos);
  std::ifstream in(csv);
  std::string header;
  std::getline(in, header);
  CHECK(header == "n,x,u_re,u_im");

  std::string partial = temp_path("partial.csv");
  Run d = run({"solve", golden("schemes/uxx_u.scm"), "--init", golden("solve/singular.init"), "--emit", partial});
  CHECK(d.code == cli::kDiverged);
  std::ifstream pin(partial);
  std::stringstream body;
  body << pin.rdbuf();
  CHECK(body.str().find("# diverged") != std::string::npos);

  Run u = run({"--format", "csv", "lattice", "uniform", "--params", "1,5", "--range", "0..2"});
  CHECK(u.out == "n,x,u_re,u_im\n0,5,0,0\n1,6,0,0\n2,7,0,0\n");
  Run s = run({"--format", "csv", "solve", "--lattice", "uniform", "--params", "1,5", "--range", "0..2"});
  CHECK(s.out == u.out);

  std::string svg = temp_path("moebius.svg");
  Run m = run({"lattice", "moebius", "--params", "sqrt(2), -sqrt(3), 3, -sqrt(3)*pi", "--range", "-10..10", "--emit", svg});
  CHECK(m.code == cli::kOk);
  CHECK(m.out.find("21 points") != std::string::npos);
  CHECK(run({"lattice", "moebius", "--params", "1, 0, 1, -2", "--range", "0..4"}).code == cli::kInputError);
}

TEST_CASE("invariant-check and reduce-check commands") {
  Run r = run({"invariant-check", golden("fields/poly_invariant.fields"), "--q",
               "(x[1]-x[0])*(x[0]-x[-1])/((x[1]-x[-1])*u[0]^2)"});
  CHECK(r.code == cli::kOk);
  CHECK(r.out.find("C: identical") != std::string::npos);
  Run f = run({"invariant-check", golden("fields/poly_invariant.fields"), "--q", "x[1] - x[0]"});
  CHECK(f.code == cli::kClaimFails);
  Run red = run({"reduce-check"});
  CHECK(red.code == cli::kOk);
  CHECK(red.out.find("translation sign +1: residual 0 (exact)") != std::string::npos);
  CHECK(red.out.find("translation sign -1: residual 0 (exact)") != std::string::npos);
  CHECK(run({"reduce-check", "--case", "nope"}).code == cli::kInputError);
}

TEST_CASE("catalog command") {
  Run one = run({"catalog", "--filter", "volterra"});
  CHECK(one.code == cli::kOk);
  CHECK(one.out == run({"catalog", "--filter", "volterra"}).out);
  CHECK(one.out.find("catalog: 1/1 entries pass") != std::string::npos);

  // A corrupted golden table is reported with the first differing row.
  std::filesystem::path dir = std::filesystem::temp_directory_path() / "deltasym_test_golden";
  std::filesystem::remove_all(dir);
  std::filesystem::copy(golden(""), dir, std::filesystem::copy_options::recursive);
  {
    std::ofstream f(dir / "brackets" / "uxx_one.csv", std::ios::app);
    f << "6,6,6,1\n";
  }
  setenv("DELTASYM_GOLDEN_DIR", dir.c_str(), 1);
  Run bad = run({"catalog", "--filter", "uxx_one"});
  unsetenv("DELTASYM_GOLDEN_DIR");
  CHECK(bad.code == cli::kClaimFails);
  CHECK(bad.out.find("FAIL uxx_one: bracket table differs") != std::string::npos);
  CHECK(bad.out.find("expected 6,6,6,1") != std::string::npos);
  std::filesystem::remove_all(dir);
  CHECK(run({"catalog", "--filter", "no-such-entry"}).code == cli::kInputError);
}
