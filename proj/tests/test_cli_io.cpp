#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "doctest.h"
#include "tpi.h"
#include "tpi/scenario.hpp"

using namespace tpi;

namespace {

const char* kTinyHom =
    "scenario = hom\n"
    "grid_points = 256\n"
    "window_samples = 256\n"
    "scan_steps = 5\n"
    "scan_min = -4\n"
    "scan_max = 4\n";

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(static_cast<bool>(in));
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

TEST_CASE("config parsing") {
  SUBCASE("valid text with comments and defaults") {
    const auto cfg = parse_config_text(
        "# comment line\n"
        "scenario = hom   ; trailing comment\n"
        "\n"
        "stats = fermion\n");
    CHECK(cfg.scenario == ScenarioKind::Hom);
    CHECK(cfg.stats.sign == -1);
    CHECK(cfg.center == 10.0);
    CHECK(cfg.scan_steps == 101);
    CHECK(cfg.scan_min == -5.0);
    CHECK(cfg.scan_max == 5.0);
  }

  SUBCASE("scenario-shaped scan defaults") {
    auto cfg = parse_config_text("scenario = postponed_compensation\ntau1 = 5\n");
    CHECK(cfg.scan_min == doctest::Approx(8.0));
    CHECK(cfg.scan_max == doctest::Approx(12.0));
    cfg = parse_config_text("scenario = no_meeting\ntau1 = 8\ntau2 = 8\n");
    CHECK(cfg.scan_min == doctest::Approx(3.0));
    CHECK(cfg.scan_max == doctest::Approx(13.0));
  }

  SUBCASE("unknown keys are named") {
    try {
      parse_config_text("scenario = hom\nbogus_key = 1\n");
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Validation);
      CHECK(std::string(e.what()).find("bogus_key") != std::string::npos);
    }
  }

  SUBCASE("unknown scenario names are rejected") {
    try {
      parse_config_text("scenario = triple_slit\n");
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Validation);
      CHECK(std::string(e.what()).find("scenario") != std::string::npos);
    }
  }

  SUBCASE("malformed values are parse errors") {
    try {
      parse_config_text("scenario = hom\ncenter = ten\n");
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Parse);
    }
    CHECK_THROWS_AS(parse_config_text("scenario = hom\ncenter 10\n"), Error);
    CHECK_THROWS_AS(parse_config_text("scenario = hom\ncenter = 10\ncenter = 11\n"), Error);
  }

  SUBCASE("missing files are io errors") {
    try {
      load_config_file("/nonexistent/path.cfg");
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Io);
    }
  }
}

TEST_CASE("csv emission") {
  auto cfg = parse_config_text(kTinyHom);
  cfg.scan_steps = 3;
  const auto result = scenario_hom(cfg);
  const std::string csv = csv_string(result);

  SUBCASE("three-point scan prints a header plus three rows") {
    std::size_t lines = 0;
    for (const char ch : csv)
      if (ch == '\n') ++lines;
    CHECK(lines == 4);
    CHECK(csv.rfind("param,rate,direct,exchange\n", 0) == 0);
    CHECK(csv.find('\r') == std::string::npos);
  }

  SUBCASE("round-trip parse reproduces the values") {
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);  // header
    std::size_t row = 0;
    while (std::getline(in, line)) {
      double v[4];
      REQUIRE(std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf", &v[0], &v[1], &v[2], &v[3]) == 4);
      // Twelve significant digits quantize at half a unit in the last place,
      // i.e. 5e-12 of the magnitude.
      const auto& expect = result.rows[row];
      CHECK(std::abs(v[0] - expect.parameter) <= 5e-12 * std::max(1.0, std::abs(expect.parameter)));
      CHECK(std::abs(v[1] - expect.rate) <= 5e-12 * std::max(1.0, std::abs(expect.rate)));
      CHECK(std::abs(v[2] - expect.direct) <= 5e-12 * std::max(1.0, std::abs(expect.direct)));
      CHECK(std::abs(v[3] - expect.exchange) <= 5e-12 * std::max(1.0, std::abs(expect.exchange)));
      // Rowwise invariant re-checked on the emitted numbers.
      CHECK(v[1] >= -1e-12);
      CHECK(std::abs(v[1] - (v[2] + v[3])) <= 1e-9 * std::max(1.0, std::abs(v[1])));
      ++row;
    }
    CHECK(row == result.rows.size());
  }

  SUBCASE("identical configs give bit-identical csv") {
    const auto again = scenario_hom(cfg, 2);
    CHECK(csv_string(again) == csv);
  }
}

TEST_CASE("c api lifecycle") {
  SUBCASE("version and scenario list") {
    CHECK(std::string(tpi_version()).size() > 0);
    const std::string list = tpi_scenario_list();
    for (const auto& name : scenario_names())
      CHECK(list.find(name) != std::string::npos);
  }

  SUBCASE("parse, run, inspect, write") {
    tpi_config* cfg = nullptr;
    REQUIRE(tpi_config_parse(kTinyHom, &cfg) == TPI_OK);
    REQUIRE(cfg != nullptr);
    CHECK(std::string(tpi_config_scenario(cfg)) == "hom");

    tpi_result* result = nullptr;
    REQUIRE(tpi_run(cfg, 2, &result) == TPI_OK);
    REQUIRE(result != nullptr);
    CHECK(tpi_result_rows(result) == 5);
    CHECK(std::string(tpi_result_parameter_name(result)) == "delta_t");

    double param = 0.0, rate = 0.0, direct = 0.0, exchange = 0.0;
    REQUIRE(tpi_result_row(result, 2, &param, &rate, &direct, &exchange) == TPI_OK);
    CHECK(param == doctest::Approx(0.0));
    CHECK(rate <= 1e-6 * direct);
    CHECK(tpi_result_row(result, 99, &param, &rate, &direct, &exchange) ==
          TPI_INVALID_ARGUMENT);

    CHECK(tpi_result_check(result) == TPI_OK);

    const std::string path = "/tmp/tpi_capi_test.csv";
    REQUIRE(tpi_result_write_csv(result, path.c_str()) == TPI_OK);
    const std::string body = read_file(path);
    CHECK(body.rfind("param,rate,direct,exchange\n", 0) == 0);
    std::remove(path.c_str());

    tpi_result_free(result);
    tpi_config_free(cfg);
  }

  SUBCASE("error statuses match the documented exit codes") {
    tpi_config* cfg = nullptr;
    CHECK(tpi_config_parse("scenario = hom\ncenter = ten\n", &cfg) == TPI_PARSE_ERROR);
    CHECK(cfg == nullptr);
    CHECK(std::string(tpi_last_error()).size() > 0);

    CHECK(tpi_config_parse("scenario = warp_drive\n", &cfg) == TPI_VALIDATION_ERROR);
    CHECK(tpi_config_load("/nonexistent/path.cfg", &cfg) == TPI_IO_ERROR);
    CHECK(tpi_config_parse(nullptr, &cfg) == TPI_INVALID_ARGUMENT);

    // Undersampled window: the washout configuration needs finer sampling.
    const char* undersampled =
        "scenario = hom\n"
        "center = 7\n"
        "center_q = 27\n"
        "grid_min = 1\n"
        "grid_max = 33\n"
        "grid_points = 1024\n"
        "window_min = -25\n"
        "window_max = 25\n"
        "window_samples = 256\n"
        "scan_steps = 2\n"
        "scan_min = -0.5\n"
        "scan_max = 0.5\n";
    REQUIRE(tpi_config_parse(undersampled, &cfg) == TPI_OK);
    tpi_result* result = nullptr;
    CHECK(tpi_run(cfg, 1, &result) == TPI_NUMERICAL_GUARD);
    CHECK(result == nullptr);
    CHECK(std::string(tpi_last_error()).find("Nyquist") != std::string::npos);
    tpi_config_free(cfg);
  }
}

TEST_CASE("shipped configs load and validate") {
  for (const char* name :
       {"hom.cfg", "hom_fermion.cfg", "hom_entangled.cfg", "eraser.cfg", "eraser_no_pbs.cfg",
        "postponed_compensation.cfg", "postponed_compensation_entangled.cfg", "no_meeting.cfg",
        "washout.cfg"}) {
    const std::string path = std::string(TPI_CONFIG_DIR) + "/" + name;
    CAPTURE(path);
    CHECK_NOTHROW(load_config_file(path));
  }
}

#ifdef TPI_CLI_PATH
namespace {

int run_cli(const std::string& args) {
  const std::string command = std::string(TPI_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(command.c_str());
  REQUIRE(status != -1);
  return WEXITSTATUS(status);
}

void write_file(const std::string& path, const std::string& body) {
  std::ofstream out(path);
  REQUIRE(static_cast<bool>(out));
  out << body;
}

}  // namespace

TEST_CASE("cli exit codes") {
  const std::string dir = "/tmp/tpi_cli_test";
  std::system(("mkdir -p " + dir).c_str());

  SUBCASE("successful run exits 0 and writes the csv") {
    write_file(dir + "/ok.cfg", std::string(kTinyHom));
    CHECK(run_cli("run " + dir + "/ok.cfg --out " + dir + "/ok.csv --check") == 0);
    const std::string body = read_file(dir + "/ok.csv");
    CHECK(body.rfind("param,rate,direct,exchange\n", 0) == 0);
  }

  SUBCASE("list exits 0") { CHECK(run_cli("list") == 0); }

  SUBCASE("malformed config exits 2") {
    write_file(dir + "/bad_number.cfg", "scenario = hom\ncenter = ten\n");
    CHECK(run_cli("run " + dir + "/bad_number.cfg --out " + dir + "/x.csv") == 2);
  }

  SUBCASE("invalid field exits 3") {
    write_file(dir + "/bad_scenario.cfg", "scenario = warp_drive\n");
    CHECK(run_cli("run " + dir + "/bad_scenario.cfg --out " + dir + "/x.csv") == 3);
  }

  SUBCASE("undersampled window exits 4") {
    write_file(dir + "/undersampled.cfg",
               "scenario = hom\ncenter = 7\ncenter_q = 27\ngrid_min = 1\ngrid_max = 33\n"
               "grid_points = 1024\nwindow_min = -25\nwindow_max = 25\n"
               "window_samples = 256\nscan_steps = 2\nscan_min = -0.5\nscan_max = 0.5\n");
    CHECK(run_cli("run " + dir + "/undersampled.cfg --out " + dir + "/x.csv") == 4);
  }
}
#endif  // TPI_CLI_PATH
