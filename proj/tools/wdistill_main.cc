// Copyright 2026 The wdistill Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end: run, sweep, mitigate, report.

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <yaml-cpp/yaml.h>

#include "wdistill/errors.h"
#include "wdistill/experiment.h"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct Overrides {
    std::string config;
    std::string out = "out";
    std::optional<uint64_t> seed;
    std::optional<std::string> mode;
    std::optional<uint64_t> shots;
    std::optional<uint64_t> trials;
    std::optional<unsigned> workers;
    bool mitigated = false;
    std::optional<std::string> counts;
    std::optional<std::string> model;
};

wdistill::RunConfig resolve(const Overrides &o) {
    wdistill::RunConfig c = o.config.empty() ? wdistill::parse_run_config("") : wdistill::load_run_config(o.config);
    if (o.seed) c.seed = *o.seed;
    if (o.mode) {
        if (*o.mode == "exact") {
            c.mode = wdistill::RunMode::Exact;
        } else if (*o.mode == "mc") {
            c.mode = wdistill::RunMode::MonteCarlo;
        } else {
            throw wdistill::ConfigError("--mode must be exact or mc");
        }
    }
    if (o.shots) c.shots = *o.shots;
    if (o.trials) c.trials = *o.trials;
    if (o.workers) c.workers = *o.workers;
    if (o.mitigated) c.mitigated = true;
    if (o.counts) c.counts = *o.counts;
    if (o.model) c.readout = *o.model;
    c.validate();
    return c;
}

void add_common(CLI::App *cmd, Overrides &o, bool sampling) {
    cmd->add_option("--config", o.config, "YAML run configuration");
    cmd->add_option("--out", o.out, "output directory")->capture_default_str();
    cmd->add_option("--seed", o.seed, "master seed");
    if (sampling) {
        cmd->add_option("--mode", o.mode, "exact or mc");
        cmd->add_option("--shots", o.shots, "shots per trial");
        cmd->add_option("--trials", o.trials, "number of trials");
        cmd->add_option("--workers", o.workers, "worker threads (0 = all cores)");
        cmd->add_flag("--mitigated", o.mitigated, "apply readout mitigation to sampled counts");
    }
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"Random-party EPR distillation from W states"};
    app.require_subcommand(1);
    app.set_version_flag("--version", wdistill::kVersion);

    Overrides run_o, sweep_o, mit_o;
    std::string report_dir = "out";
    auto *run = app.add_subcommand("run", "simulate one configuration");
    add_common(run, run_o, true);
    auto *sweep = app.add_subcommand("sweep", "scan one configuration axis");
    add_common(sweep, sweep_o, true);
    auto *mitigate = app.add_subcommand("mitigate", "correct outcome counts for readout errors");
    add_common(mitigate, mit_o, false);
    mitigate->add_option("--counts", mit_o.counts, "CSV of outcome,count");
    mitigate->add_option("--model", mit_o.model, "readout model file");
    auto *report = app.add_subcommand("report", "summarize result files");
    report->add_option("--out", report_dir, "directory holding result files")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (run->parsed()) {
            wdistill::cmd_run(resolve(run_o), run_o.out);
        } else if (sweep->parsed()) {
            wdistill::cmd_sweep(resolve(sweep_o), sweep_o.out);
        } else if (mitigate->parsed()) {
            wdistill::cmd_mitigate(resolve(mit_o), mit_o.out);
        } else if (report->parsed()) {
            wdistill::cmd_report(report_dir, std::cout);
        }
    } catch (const wdistill::ConfigError &e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const YAML::Exception &e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const wdistill::NumericalDomainError &e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const wdistill::InvalidState &e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const wdistill::UndefinedEstimate &e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
