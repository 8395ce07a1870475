#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tcbind/cli.hpp"

using namespace tcbind;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "tcbind");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "tcbind_cli_test";
  std::filesystem::create_directories(dir);
  return dir / name;
}

std::string write_file(const std::string& name, const std::string& body) {
  const auto p = scratch(name);
  std::ofstream(p) << body;
  return p.string();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* kReference = "mu=0.08\nsigma=0.16\ngamma=5\npi_max=0.5\nepsilon=0.01\n";

// Value of `column` in the first data row whose first cell equals `key`.
std::string cell(const std::string& csv, const std::string& key, int column) {
  std::istringstream in(csv);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind(key + ",", 0) != 0) continue;
    std::stringstream ls(line);
    std::string item;
    for (int i = 0; i <= column; ++i) std::getline(ls, item, ',');
    return item;
  }
  return "";
}

}  // namespace

TEST_CASE("parameter files") {
  std::istringstream plain("# comment\nmu = 0.08\n\nsigma=0.16\n");
  const cli::ParamMap p = cli::parse_params(plain);
  CHECK(p.at("mu") == "0.08");
  CHECK(p.at("sigma") == "0.16");

  std::istringstream header("# tcbind 1.0.0\n# command=solve\n# mu=0.08\nquantity,exact\nmu=9\n");
  const cli::ParamMap h = cli::parse_params(header);
  CHECK(h.at("mu") == "0.08");
  CHECK(h.at("command") == "solve");

  std::istringstream unknown("mu=0.08\nvolatility=0.2\n");
  CHECK_THROWS_AS(cli::parse_params(unknown), Error);
  std::istringstream garbage("mu 0.08\n");
  CHECK_THROWS_AS(cli::parse_params(garbage), Error);
}

TEST_CASE("eps grid") {
  const std::vector<double> g = cli::parse_eps_grid("1e-4:1e-2:3");
  REQUIRE(g.size() == 3);
  CHECK(g[0] == doctest::Approx(1e-4));
  CHECK(g[1] == doctest::Approx(1e-3));
  CHECK(g[2] == 1e-2);
  CHECK(cli::parse_eps_grid("0.01:0.01:1").size() == 1);
  CHECK_THROWS_AS(cli::parse_eps_grid("0:1:3"), Error);
  CHECK_THROWS_AS(cli::parse_eps_grid("1e-3:1e-2"), Error);
}

TEST_CASE("solve") {
  const std::string params = write_file("ref.txt", kReference);
  const Outcome ok = invoke({"solve", "--params", params});
  CHECK(ok.code == cli::kExitOk);
  CHECK(ok.out.find("# tcbind ") == 0);
  CHECK(ok.out.find("# mu=0.08\n") != std::string::npos);
  CHECK(std::stod(cell(ok.out, "lambda", 1)) == doctest::Approx(0.060410940287441).epsilon(1e-11));
  CHECK(ok.out.find("nan") == std::string::npos);

  const Outcome rerun = invoke({"solve", "--params", write_file("hdr.csv", ok.out)});
  CHECK(rerun.out == ok.out);

  const Outcome bind = invoke({"solve", "--params", params, "--set", "pi_max=0.7"});
  CHECK(bind.code == cli::kExitValidation);
  CHECK(bind.err.find("ConstraintNotBinding") != std::string::npos);

  CHECK(invoke({"solve", "--set", "mu=0.08"}).code == cli::kExitValidation);
  CHECK(invoke({"solve", "--params", params, "--set", "colour=red"}).code == cli::kExitValidation);
  CHECK(invoke({"frobnicate"}).code == cli::kExitValidation);
  CHECK(invoke({"sweep", "--params", write_file("other.csv", "# command=solve\nmu=0.08\n")}).code ==
        cli::kExitValidation);

  const Outcome t1 = invoke({"solve", "--set", "mu=0.0217293333333333", "--set", "r=0.0582706666666667",
                             "--set", "sigma=0.16", "--set", "gamma=0.1", "--set", "pi_max=2.2",
                             "--set", "epsilon=0.01"});
  CHECK(t1.code == 0);
  CHECK(std::abs(std::stod(cell(t1.out, "esr", 1)) - 0.0954) < 5e-4);

  const Outcome js = invoke({"solve", "--params", params, "--format", "json"});
  const auto doc = nlohmann::json::parse(js.out);
  CHECK(doc["command"] == "solve");
  CHECK(doc["params"]["gamma"] == "5");
  CHECK(doc["rows"][0]["quantity"] == "lambda");
}

TEST_CASE("sweep") {
  const std::string params = write_file("ref.txt", kReference);
  const std::string out = scratch("sweep.csv").string();
  const Outcome s = invoke({"sweep", "--params", params, "--set", "pi_max_grid=0.4,0.7", "--eps-grid",
                            "1e-4:0.1:4", "--out", out});
  CHECK(s.code == 0);
  const std::string csv = read_file(out);
  std::istringstream in(csv);
  std::string line;
  std::vector<std::string> rows;
  while (std::getline(in, line)) {
    if (line[0] != '#' && line.rfind("pi_max", 0) != 0) rows.push_back(line);
  }
  REQUIRE(rows.size() == 8);
  CHECK(rows[0].rfind("0.4,0.0001,ok,", 0) == 0);
  CHECK(rows[3].find(",ok,") != std::string::npos);
  CHECK(rows[4].find(",ConstraintNotBinding,") != std::string::npos);
  CHECK(rows[7].find(",ConstraintNotBinding,") != std::string::npos);
  // width column: tighter constraint gives a smaller no-trade region at eps = 1e-2.
  const Outcome w = invoke({"sweep", "--params", params, "--set", "pi_max_grid=0.4,0.5", "--eps-grid",
                            "0.01:0.01:1"});
  CHECK(std::stod(cell(w.out, "0.4", 5)) < std::stod(cell(w.out, "0.5", 5)));

  const Outcome lev = invoke({"sweep", "--set", "mu=0.08", "--set", "sigma=0.16", "--set", "gamma=0.8",
                              "--set", "pi_max_grid=1.75,2.25", "--eps-grid", "0.001:0.001:1"});
  CHECK(std::stod(cell(lev.out, "1.75", 13)) < std::stod(cell(lev.out, "2.25", 13)));

  const Outcome again = invoke({"sweep", "--params", write_file("sweep_hdr.csv", csv)});
  CHECK(again.out == csv);
}

TEST_CASE("simulate") {
  const std::string params = write_file("ref.txt", kReference);
  const std::vector<std::string> args = {"simulate", "--params", params, "--paths", "3",
                                         "--set",    "horizon=2", "--seed", "7"};
  const Outcome a = invoke(args);
  const Outcome b = invoke(args);
  CHECK(a.code == 0);
  CHECK(a.out == b.out);
  std::vector<std::string> threaded = args;
  threaded.insert(threaded.end(), {"--threads", "2"});
  CHECK(invoke(threaded).out == a.out);
  CHECK(cell(a.out, "spread_violations", 2) == "0");

  const std::string trace = scratch("trace.csv").string();
  std::vector<std::string> traced = args;
  traced.insert(traced.end(), {"--trace", trace, "--set", "trace_stride=100"});
  CHECK(invoke(traced).code == 0);
  const std::string t = read_file(trace);
  CHECK(t.find("t,y,ask,shadow,phi,phi0,local_lower,local_upper") != std::string::npos);

  CHECK(invoke({"simulate", "--params", params, "--dt", "0.3"}).code == cli::kExitValidation);
}

TEST_CASE("broker, deposit and table") {
  const std::vector<std::string> market = {"--set", "mu_bar=0.08", "--set", "sigma=0.16",
                                           "--set", "gamma=0.1",   "--set", "esr=0.1"};
  std::vector<std::string> broker = {"broker", "--set", "pi_max=1.8"};
  broker.insert(broker.end(), market.begin(), market.end());
  const Outcome b = invoke(broker);
  CHECK(b.code == 0);
  std::vector<std::string> deposit = {"deposit", "--set", "pi_max_old=2.2", "--set", "pi_max_new=1.8"};
  deposit.insert(deposit.end(), market.begin(), market.end());
  const Outcome d = invoke(deposit);
  CHECK(d.code == 0);
  const double iso = std::stod(cell(b.out, "1.8", 1));
  CHECK(std::stod(cell(d.out, "2.2", 4)) == doctest::Approx(iso).epsilon(1e-10));

  std::vector<std::string> hopeless = {"deposit", "--set", "pi_max_old=2.2", "--set", "pi_max_new=1.05"};
  hopeless.insert(hopeless.end(), market.begin(), market.end());
  const Outcome none = invoke(hopeless);
  CHECK(none.code == cli::kExitSolver);
  CHECK(none.err.find("NoSolution") != std::string::npos);

  const Outcome t = invoke({"table1", "--format", "json"});
  CHECK(t.code == 0);
  const auto doc = nlohmann::json::parse(t.out);
  CHECK(doc["rows"].size() == 12);
  CHECK(doc["max_rate_deviation_pp"].get<double>() <= 0.05);
  CHECK(doc["max_esr_deviation_pp"].get<double>() <= 0.05);
  CHECK(doc["rows"][6]["r_display"] == "5.16%");
}

TEST_CASE("installed tool exit codes") {
  const std::string tool = TCBIND_TOOL;
  const std::string params = write_file("ref.txt", kReference);
  CHECK(std::system((tool + " solve --params " + params + " > /dev/null").c_str()) == 0);
  const int bad = std::system((tool + " solve --params " + params + " --set pi_max=0.9 2> /dev/null").c_str());
  CHECK(WEXITSTATUS(bad) == cli::kExitValidation);
}
