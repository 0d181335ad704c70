#include "tpi.h"

#include <memory>
#include <string>

#include "tpi/scenario.hpp"

struct tpi_config {
  tpi::ScenarioConfig config;
};

struct tpi_result {
  tpi::ScanResult result;
};

namespace {

thread_local std::string g_last_error;

tpi_status status_from(const tpi::Error& e) {
  switch (e.kind()) {
    case tpi::ErrorKind::Parse: return TPI_PARSE_ERROR;
    case tpi::ErrorKind::Validation:
    case tpi::ErrorKind::GridMismatch:
    case tpi::ErrorKind::SizeLimit:
    case tpi::ErrorKind::ZeroNorm: return TPI_VALIDATION_ERROR;
    case tpi::ErrorKind::NumericalGuard: return TPI_NUMERICAL_GUARD;
    case tpi::ErrorKind::Io: return TPI_IO_ERROR;
    case tpi::ErrorKind::InvalidArgument: return TPI_INVALID_ARGUMENT;
  }
  return TPI_ERROR;
}

template <typename Fn>
tpi_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return TPI_OK;
  } catch (const tpi::Error& e) {
    g_last_error = e.what();
    return status_from(e);
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return TPI_ERROR;
  } catch (...) {
    g_last_error = "unknown error";
    return TPI_ERROR;
  }
}

std::string build_scenario_list() {
  std::string out;
  for (const auto& name : tpi::scenario_names()) {
    out += name;
    out += '\n';
  }
  return out;
}

}  // namespace

extern "C" {

const char* tpi_version(void) { return "1.0.0"; }

const char* tpi_scenario_list(void) {
  static const std::string list = build_scenario_list();
  return list.c_str();
}

const char* tpi_last_error(void) { return g_last_error.c_str(); }

tpi_status tpi_config_load(const char* path, tpi_config** out_config) {
  if (path == nullptr || out_config == nullptr) {
    g_last_error = "null argument";
    return TPI_INVALID_ARGUMENT;
  }
  *out_config = nullptr;
  return guarded([&]() {
    auto cfg = std::make_unique<tpi_config>();
    cfg->config = tpi::load_config_file(path);
    *out_config = cfg.release();
  });
}

tpi_status tpi_config_parse(const char* text, tpi_config** out_config) {
  if (text == nullptr || out_config == nullptr) {
    g_last_error = "null argument";
    return TPI_INVALID_ARGUMENT;
  }
  *out_config = nullptr;
  return guarded([&]() {
    auto cfg = std::make_unique<tpi_config>();
    cfg->config = tpi::parse_config_text(text);
    *out_config = cfg.release();
  });
}

const char* tpi_config_scenario(const tpi_config* config) {
  if (config == nullptr) return "";
  return tpi::to_string(config->config.scenario);
}

void tpi_config_free(tpi_config* config) { delete config; }

tpi_status tpi_run(const tpi_config* config, int n_threads, tpi_result** out_result) {
  if (config == nullptr || out_result == nullptr) {
    g_last_error = "null argument";
    return TPI_INVALID_ARGUMENT;
  }
  *out_result = nullptr;
  return guarded([&]() {
    auto res = std::make_unique<tpi_result>();
    res->result = tpi::run_scenario(config->config, n_threads <= 0 ? 1 : n_threads);
    *out_result = res.release();
  });
}

size_t tpi_result_rows(const tpi_result* result) {
  return result == nullptr ? 0 : result->result.rows.size();
}

tpi_status tpi_result_row(const tpi_result* result, size_t index, double* parameter,
                          double* rate, double* direct_part, double* exchange_part) {
  if (result == nullptr || index >= result->result.rows.size()) {
    g_last_error = "row index out of range";
    return TPI_INVALID_ARGUMENT;
  }
  const auto& row = result->result.rows[index];
  if (parameter != nullptr) *parameter = row.parameter;
  if (rate != nullptr) *rate = row.rate;
  if (direct_part != nullptr) *direct_part = row.direct;
  if (exchange_part != nullptr) *exchange_part = row.exchange;
  return TPI_OK;
}

const char* tpi_result_parameter_name(const tpi_result* result) {
  return result == nullptr ? "" : result->result.parameter_name.c_str();
}

tpi_status tpi_result_check(const tpi_result* result) {
  if (result == nullptr) {
    g_last_error = "null argument";
    return TPI_INVALID_ARGUMENT;
  }
  return guarded([&]() { result->result.validate(); });
}

tpi_status tpi_result_write_csv(const tpi_result* result, const char* path) {
  if (result == nullptr || path == nullptr) {
    g_last_error = "null argument";
    return TPI_INVALID_ARGUMENT;
  }
  return guarded([&]() { tpi::emit_csv(result->result, path); });
}

void tpi_result_free(tpi_result* result) { delete result; }

}  // extern "C"
