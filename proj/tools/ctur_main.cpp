// Copyright 2026 The collisional-tur Authors
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

// Command-line front end: run, validate, list-presets.
//
// Exit status: 0 when every row succeeded, 2 when some row carries a
// physics error status, 1 on configuration or I/O errors.

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ctur/cli/config.hpp"
#include "ctur/cli/sweep.hpp"

#ifndef CTUR_PRESET_DIR
#define CTUR_PRESET_DIR "configs"
#endif

namespace fs = std::filesystem;
using namespace ctur::cli;

namespace {

fs::path preset_dir() {
    if (const char* env = std::getenv("CTUR_PRESET_DIR")) return env;
    return CTUR_PRESET_DIR;
}

std::vector<std::string> preset_names() {
    std::vector<std::string> names;
    std::error_code ec;
    for (const auto& entry : fs::directory_iterator(preset_dir(), ec)) {
        if (entry.path().extension() == ".json") names.push_back(entry.path().stem().string());
    }
    std::sort(names.begin(), names.end());
    return names;
}

/// A readable file path, or else the name of a bundled preset.
fs::path resolve_config(const std::string& arg) {
    if (fs::is_regular_file(arg)) return arg;
    const fs::path preset = preset_dir() / (arg + ".json");
    if (fs::is_regular_file(preset)) return preset;
    throw ConfigError(arg, "no such file or preset");
}

int do_validate(const std::string& arg) {
    const auto path = resolve_config(arg);
    const auto cfg = parse_config_text(read_file(path));
    std::size_t points = expand_grid(cfg).size();
    std::cout << path.string() << ": ok (mode " << to_string(cfg.mode) << ", " << points << " grid point"
              << (points == 1 ? "" : "s") << ")\n";
    return 0;
}

int do_run(const std::string& arg, const std::string& output_override, bool quiet) {
    const auto path = resolve_config(arg);
    const std::string text = read_file(path);
    auto cfg = parse_config_text(text);
    if (!output_override.empty()) cfg.output = output_override;
    if (cfg.output.has_parent_path()) fs::create_directories(cfg.output.parent_path());

    const auto start = std::chrono::steady_clock::now();
    const int threads = resolve_threads(cfg.threads, expand_grid(cfg).size());
    const auto rows = run_sweep(cfg, threads);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    std::ofstream out(cfg.output, std::ios::binary);
    if (!out) throw ConfigError("output.path", "cannot write " + cfg.output.string());
    if (cfg.format == OutputFormat::Csv) {
        write_csv(out, cfg, rows);
    } else {
        write_json(out, cfg, rows);
    }

    RunMetadata meta{path.string(), config_hash(text), wall, threads, rows.size(), 0};
    meta.failed_rows = static_cast<std::size_t>(std::count_if(rows.begin(), rows.end(), [](const auto& r) {
        return !r.ok();
    }));
    std::ofstream side(cfg.output.string() + ".meta.json", std::ios::binary);
    if (!side) throw ConfigError("output.path", "cannot write metadata next to " + cfg.output.string());
    write_metadata(side, cfg, meta);

    if (!quiet) {
        std::cerr << rows.size() << " rows -> " << cfg.output.string() << " (" << meta.failed_rows
                  << " with errors, " << threads << " thread" << (threads == 1 ? "" : "s") << ", " << wall
                  << " s)\n";
    }
    return meta.failed_rows == 0 ? 0 : 2;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Collisional-model thermodynamic uncertainty sweeps"};
    app.set_version_flag("--version", std::string(CTUR_VERSION));
    app.require_subcommand(1);

    std::string run_config, output_override, validate_config;
    bool quiet = false;
    auto* run = app.add_subcommand("run", "Evaluate a configuration (file path or preset name)");
    run->add_option("config", run_config, "Configuration file or preset name")->required();
    run->add_option("-o,--output", output_override, "Override output.path");
    run->add_flag("-q,--quiet", quiet, "Suppress the summary line");
    auto* validate = app.add_subcommand("validate", "Check a configuration without running it");
    validate->add_option("config", validate_config, "Configuration file or preset name")->required();
    auto* list = app.add_subcommand("list-presets", "Print the bundled preset names");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*run) return do_run(run_config, output_override, quiet);
        if (*validate) return do_validate(validate_config);
        if (*list) {
            for (const auto& name : preset_names()) std::cout << name << '\n';
            return 0;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
