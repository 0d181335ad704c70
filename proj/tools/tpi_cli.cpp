// Command line front end; links only the C API of the shared library.

#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "tpi.h"

namespace {

int exit_code_for(tpi_status status) {
  switch (status) {
    case TPI_OK: return 0;
    case TPI_PARSE_ERROR: return 2;
    case TPI_VALIDATION_ERROR: return 3;
    case TPI_NUMERICAL_GUARD: return 4;
    default: return 1;
  }
}

int report_failure(tpi_status status) {
  std::fprintf(stderr, "error: %s\n", tpi_last_error());
  return exit_code_for(status);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tpi - one- and two-photon interference scans"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path = "scan.csv";
  int threads = 1;
  bool check = false;

  auto* run = app.add_subcommand("run", "execute a scan described by a config file");
  run->add_option("config", config_path, "path to the scenario config")->required();
  run->add_option("--out", out_path, "output CSV path (default scan.csv)");
  run->add_option("--threads", threads, "scan-point worker threads (default 1)");
  run->add_flag("--check", check, "re-run the result invariant suite before writing");

  auto* list = app.add_subcommand("list", "print the available scenario names");

  CLI11_PARSE(app, argc, argv);

  if (list->parsed()) {
    std::fputs(tpi_scenario_list(), stdout);
    return 0;
  }

  tpi_config* config = nullptr;
  tpi_status status = tpi_config_load(config_path.c_str(), &config);
  if (status != TPI_OK) return report_failure(status);

  tpi_result* result = nullptr;
  status = tpi_run(config, threads, &result);
  tpi_config_free(config);
  if (status != TPI_OK) return report_failure(status);

  if (check) {
    status = tpi_result_check(result);
    if (status != TPI_OK) {
      tpi_result_free(result);
      return report_failure(status);
    }
  }

  status = tpi_result_write_csv(result, out_path.c_str());
  if (status != TPI_OK) {
    tpi_result_free(result);
    return report_failure(status);
  }

  std::printf("%s: %zu rows -> %s\n", tpi_result_parameter_name(result),
              tpi_result_rows(result), out_path.c_str());
  tpi_result_free(result);
  return 0;
}
