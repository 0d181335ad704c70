#include <cstdio>
#include <fstream>
#include <sstream>

#include "tpi/scenario.hpp"

namespace tpi {

namespace {

std::string format_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

}  // namespace

std::string csv_string(const ScanResult& result) {
  result.validate();
  std::ostringstream out;
  out << "param,rate,direct,exchange\n";
  for (std::size_t i = 1; i < result.rows.size(); ++i)
    if (!(result.rows[i].parameter > result.rows[i - 1].parameter))
      fail(ErrorKind::NumericalGuard, "scan rows are not in ascending parameter order");
  for (const auto& row : result.rows) {
    out << format_value(row.parameter) << ',' << format_value(row.rate) << ','
        << format_value(row.direct) << ',' << format_value(row.exchange) << '\n';
  }
  return out.str();
}

void emit_csv(const ScanResult& result, const std::string& path) {
  const std::string body = csv_string(result);
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Io, "cannot open output file '" + path + "'");
  out.write(body.data(), static_cast<std::streamsize>(body.size()));
  if (!out) fail(ErrorKind::Io, "failed writing output file '" + path + "'");
}

void run_scan_file(const std::string& config_path, const std::string& out_path, int threads,
                   bool check) {
  const ScenarioConfig config = load_config_file(config_path);
  const ScanResult result = run_scenario(config, threads);
  if (check) result.validate();
  emit_csv(result, out_path);
}

}  // namespace tpi
