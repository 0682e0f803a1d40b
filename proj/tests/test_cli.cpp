#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "qdl/cli.hpp"
#include "qdl/numeric.hpp"

using namespace qdl;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("qdl_cli_test_" + name)).string();
}

bool parse(std::vector<const char*> args, RunConfig& cfg) {
  args.insert(args.begin(), "qdl");
  std::string msg;
  return parse_run_config(static_cast<int>(args.size()), args.data(), cfg, msg);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

TEST_CASE("csv output quotes fields and keeps 12 significant digits") {
  Table t;
  t.columns = {"name", "value"};
  t.add_row({std::string("a,b"), kPi});
  t.add_row({std::string("say \"hi\""), std::monostate{}});
  t.add_row({std::string("n"), std::int64_t{-7}});
  CHECK(to_csv(t) == "name,value\r\n\"a,b\",3.14159265359\r\n\"say \"\"hi\"\"\",\r\nn,-7\r\n");
  CHECK_THROWS_AS(t.add_row({1.0}), DomainError);
  CHECK(format_number(1.0 / 3.0) == "0.333333333333");
  CHECK(format_number(1e-20) == "1e-20");
  CHECK(format_number(std::nan("")) == "nan");
  CHECK_THROWS_AS(parse_format("xml"), DomainError);
}

TEST_CASE("json output round-trips") {
  Table t;
  t.columns = {"x", "label", "empty"};
  t.meta["note"] = "m";
  t.add_row({2.0 / 3.0, std::string("r"), std::monostate{}});
  const auto j = nlohmann::json::parse(to_json(t));
  REQUIRE(j.is_object());
  CHECK(j.size() == 2);
  CHECK(j["meta"]["note"] == "m");
  REQUIRE(j["rows"].size() == 1);
  CHECK(j["rows"][0]["x"].get<double>() == std::stod("0.666666666667"));
  CHECK(j["rows"][0]["label"] == "r");
  CHECK(j["rows"][0]["empty"].is_null());
  const std::string text = to_text(t);
  CHECK(text.find("0.666666666667") != std::string::npos);
  CHECK(text.find("---") != std::string::npos);
}

TEST_CASE("flags override the config file") {
  const std::string path = temp_path("config.json");
  {
    std::ofstream f(path);
    f << R"({"command": "ffield", "sigma": 0.7, "format": "csv", "n": [5, 7], "q": 5})";
  }
  RunConfig cfg;
  REQUIRE(parse({"--config", path.c_str(), "--sigma", "0.9", "--n", "3,5"}, cfg));
  CHECK(cfg.command == "ffield");
  CHECK(cfg.sigma == 0.9);
  CHECK(cfg.format == "csv");
  CHECK(cfg.q == 5);
  CHECK(cfg.n_list == std::vector<int>{3, 5});

  REQUIRE(parse({"compare", "--config", path.c_str(), "--X", "1e3,1e4"}, cfg));
  CHECK(cfg.command == "compare");
  CHECK(cfg.X_ladder == std::vector<double>{1e3, 1e4});
  CHECK(cfg.sigma == 0.7);

  {
    std::ofstream f(path);
    f << R"({"command": "constants", "sigmaa": 1})";
  }
  CHECK_THROWS_AS(parse({"--config", path.c_str()}, cfg), DomainError);
  {
    std::ofstream f(path);
    f << R"({"command": "constants", "sigma": "wide"})";
  }
  CHECK_THROWS_AS(parse({"--config", path.c_str()}, cfg), DomainError);
  std::filesystem::remove(path);

  CHECK_FALSE(parse({"--help"}, cfg));
  CHECK_THROWS_AS(parse({"plot"}, cfg), DomainError);
  CHECK_THROWS_AS(parse({"constants", "--bogus"}, cfg), DomainError);
}

TEST_CASE("validation happens before any computation") {
  RunConfig cfg;
  CHECK_THROWS_AS(parse({"ffield", "--n", "4"}, cfg), DomainError);
  CHECK_THROWS_AS(parse({"ffield", "--q", "9"}, cfg), DomainError);
  CHECK_THROWS_AS(parse({"density", "--X", "5"}, cfg), DomainError);
  CHECK_THROWS_AS(parse({"compare", "--theorem", "T1_3", "--sigma", "1.2"}, cfg), DomainError);
  CHECK_THROWS_AS(parse({"compare", "--theorem", "T1_1", "--family", "F_all"}, cfg), DomainError);
  CHECK_THROWS_AS(parse({"compare", "--sigma", "2.5"}, cfg), DomainError);
  CHECK_THROWS_AS(parse({"zeros", "--T", "0"}, cfg), DomainError);
  CHECK_THROWS_AS(parse({"zeros", "--T", "10", "--d-min", "5", "--d-max", "1"}, cfg), DomainError);
  CHECK_THROWS_AS(parse({"constants", "--kernel", "box"}, cfg), DomainError);
  CHECK_THROWS_AS(parse({"constants", "--format", "yaml"}, cfg), DomainError);
  CHECK_THROWS_AS(parse({"constants", "--threads", "-1"}, cfg), DomainError);
  CHECK(parse({"compare", "--theorem", "T1_3", "--sigma", "0.5"}, cfg));
  CHECK(cfg.theorem == "T1_3");
}

TEST_CASE("constants report") {
  RunConfig cfg;
  cfg.command = "constants";
  cfg.quiet = true;
  cfg.format = "csv";
  const auto r = run_command(cfg);
  CHECK(r.certified);
  const std::string csv = to_csv(r.table);
  CHECK(csv.rfind("name,value,uncertainty,note\r\n", 0) == 0);
  CHECK(csv.find("zeta(2)," + format_number(kPi * kPi / 6.0) + ",") != std::string::npos);
  CHECK(format_number(kPi * kPi / 6.0) == "1.64493406685");
  CHECK(csv.find("\r\nc_w1,") != std::string::npos);
  CHECK(csv.find("\r\nd1,3.2185495566") != std::string::npos);
  CHECK(r.table.meta["config"]["command"] == "constants");
  CHECK(r.table.meta["certified"] == true);
}

TEST_CASE("output is byte-identical across thread counts") {
  RunConfig cfg;
  cfg.command = "ffield";
  cfg.quiet = true;
  cfg.kernel = "fejer";
  cfg.sigma = 1.0;
  cfg.n_list = {5, 7};
  cfg.threads = 1;
  const auto a = run_command(cfg);
  cfg.threads = 4;
  const auto b = run_command(cfg);
  set_thread_count(0);
  CHECK(a.certified);
  REQUIRE(a.table.rows.size() == 2);
  CHECK(to_csv(a.table) == to_csv(b.table));
  // The config echo leaves out the thread count, so the whole document matches.
  CHECK(to_json(a.table) == to_json(b.table));
  const auto ja = nlohmann::json::parse(to_json(a.table));
  CHECK(ja["rows"][0]["g"] == 2);
  CHECK(ja["rows"][1]["curves"] == 1458);
}

TEST_CASE("zeros command writes the cache") {
  const std::string dir = temp_path("cache");
  std::filesystem::remove_all(dir);
  RunConfig cfg;
  cfg.command = "zeros";
  cfg.quiet = true;
  cfg.d_min = -4;
  cfg.d_max = 4;
  cfg.T_height = 20.0;
  cfg.cache_dir = dir;
  const auto r = run_command(cfg);
  CHECK(r.certified);
  // Squarefree d in [-4, 4] without 0 and +-4.
  CHECK(r.table.rows.size() == 6);
  std::ifstream in(dir + "/L_-3.zeros");
  REQUIRE(in);
  std::int64_t d = 0, q = 0, n = 0;
  double T = 0.0;
  int complete = 0;
  in >> d >> q >> T >> complete >> n;
  CHECK(d == -3);
  CHECK(q == 3);
  CHECK(T == 20.0);
  CHECK(complete == 1);
  CHECK(n == std::get<std::int64_t>(r.table.rows[0][4]));
  std::filesystem::remove_all(dir);
}

TEST_CASE("emit writes output and the plot template") {
  const std::string out = temp_path("ff.csv");
  RunConfig cfg;
  cfg.command = "ffield";
  cfg.quiet = true;
  cfg.kernel = "fejer";
  cfg.sigma = 1.0;
  cfg.n_list = {5};
  cfg.format = "csv";
  cfg.output_path = out;
  CHECK(emit(cfg, run_command(cfg)) == 0);
  const std::string csv = slurp(out);
  CHECK(csv.rfind("q,n,g,curves,", 0) == 0);
  const std::string script = slurp(out + ".plot.py");
  CHECK(script.find("import matplotlib") != std::string::npos);
  CHECK(script.find("savefig") != std::string::npos);
  CHECK(script.find("error_corrected") != std::string::npos);

  CommandResult failed;
  failed.table.columns = {"a"};
  failed.certified = false;
  cfg.output_path = temp_path("failed.csv");
  cfg.plot_script_path = temp_path("failed.py");
  CHECK(emit(cfg, failed) == 1);
  std::filesystem::remove(out);
  std::filesystem::remove(out + ".plot.py");
  std::filesystem::remove(cfg.output_path);
  std::filesystem::remove(cfg.plot_script_path);
}
