#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sidiff/sidiff.h"

namespace {

enum ExitCode { kAllPass = 0, kVerdictFailed = 1, kConfigInvalid = 2, kRuntimeError = 3 };

struct ConfigHandle {
  sidiff_config* ptr = nullptr;
  ~ConfigHandle() { sidiff_config_destroy(ptr); }
};

struct ResultHandle {
  sidiff_result* ptr = nullptr;
  ~ResultHandle() { sidiff_result_destroy(ptr); }
};

int report_error(const char* what, sidiff_status status) {
  std::cerr << "error: " << what << " (" << sidiff_status_name(status) << "): " << sidiff_last_error() << "\n";
  return status == SIDIFF_E_CONFIG ? kConfigInvalid : kRuntimeError;
}

// Prints every issue; returns true when the config is runnable.
bool print_issues(const sidiff_config* config) {
  for (size_t i = 0; i < sidiff_config_issue_count(config); ++i) {
    int severity = 0;
    const char* key = "";
    const char* message = "";
    sidiff_config_issue(config, i, &severity, &key, &message);
    std::cerr << (severity == 0 ? "error" : "warning") << ": " << key << ": " << message << "\n";
  }
  return sidiff_config_valid(config) != 0;
}

int fetch_text(sidiff_status (*fn)(char*, size_t, size_t*), const char* what, std::string& text) {
  size_t size = 0;
  sidiff_status status = fn(nullptr, 0, &size);
  if (status != SIDIFF_OK) return report_error(what, status);
  std::vector<char> buffer(size);
  status = fn(buffer.data(), buffer.size(), &size);
  if (status != SIDIFF_OK) return report_error(what, status);
  text = buffer.data();
  return kAllPass;
}

int print_text(sidiff_status (*fn)(char*, size_t, size_t*), const char* what) {
  std::string text;
  if (const int code = fetch_text(fn, what, text); code != kAllPass) return code;
  std::cout << text;
  return kAllPass;
}

int oracle_command(const std::string& goldens_dir) {
  std::string text;
  if (const int code = fetch_text(sidiff_oracles_json, "oracle", text); code != kAllPass) return code;
  if (goldens_dir.empty()) {
    std::cout << text;
    return kAllPass;
  }
  std::error_code ec;
  std::filesystem::create_directories(goldens_dir, ec);
  const auto path = std::filesystem::path(goldens_dir) / "oracles.json";
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) {
    std::cerr << "error: cannot write " << path.string() << "\n";
    return kRuntimeError;
  }
  std::cout << "wrote " << path.string() << "\n";
  return kAllPass;
}

int validate_command(const std::string& path) {
  ConfigHandle config;
  const sidiff_status status = sidiff_config_load(path.c_str(), &config.ptr);
  if (status != SIDIFF_OK) return report_error("cannot load config", status);
  if (!print_issues(config.ptr)) return kConfigInvalid;
  std::cout << "ok: " << path << "\n";
  return kAllPass;
}

int run_command(const std::string& path, const std::string& output_dir, int workers) {
  ConfigHandle config;
  sidiff_status status = sidiff_config_load(path.c_str(), &config.ptr);
  if (status != SIDIFF_OK) return report_error("cannot load config", status);
  if (!print_issues(config.ptr)) return kConfigInvalid;
  if (!output_dir.empty()) sidiff_config_set_output_dir(config.ptr, output_dir.c_str());
  if (workers >= 0) sidiff_config_set_workers(config.ptr, static_cast<unsigned>(workers));

  ResultHandle result;
  status = sidiff_run(config.ptr, &result.ptr);
  if (status != SIDIFF_OK) return report_error("run failed", status);
  for (size_t i = 0; i < sidiff_result_criterion_count(result.ptr); ++i) {
    const char* id = "";
    int pass = 0;
    sidiff_result_criterion(result.ptr, i, &id, &pass);
    std::cout << (pass ? "PASS " : "FAIL ") << id << "\n";
  }
  return sidiff_result_all_pass(result.ptr) ? kAllPass : kVerdictFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulated annealing diffusions: experiments and reference values"};
  app.set_version_flag("--version", std::string(sidiff_version()));
  app.require_subcommand(1);

  std::string run_path;
  std::string output_dir;
  int workers = -1;
  auto* run = app.add_subcommand("run", "Run the experiment described by a JSON config");
  run->add_option("config", run_path, "Config file")->required()->check(CLI::ExistingFile);
  run->add_option("-o,--output-dir", output_dir, "Override output_dir");
  run->add_option("-w,--workers", workers, "Override worker count (0 = hardware concurrency)")
      ->check(CLI::NonNegativeNumber);

  std::string validate_path;
  auto* validate = app.add_subcommand("validate", "Check a config without running it");
  validate->add_option("config", validate_path, "Config file")->required()->check(CLI::ExistingFile);

  auto* catalog = app.add_subcommand("catalog", "List the potential catalog as JSON");
  std::string goldens_dir;
  auto* oracle = app.add_subcommand("oracle", "Compute brute-force reference values (JSON)");
  oracle->add_option("-o,--goldens-dir", goldens_dir, "Write oracles.json here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kAllPass : kConfigInvalid;
  }

  if (*run) return run_command(run_path, output_dir, workers);
  if (*validate) return validate_command(validate_path);
  if (*catalog) return print_text(sidiff_catalog_json, "catalog");
  if (*oracle) return oracle_command(goldens_dir);
  return kConfigInvalid;
}
