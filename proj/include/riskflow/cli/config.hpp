#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "riskflow/cashflow/experiment.hpp"

namespace riskflow::cli {

struct GridConfig {
    double horizon = 1.0;
    std::size_t steps = 1000;
};

struct McConfig {
    std::size_t n_paths = 10000;
    std::uint64_t seed = 42;
};

struct OutputConfig {
    std::string dir;  // empty: no files written
    bool dump_paths = false;
    std::size_t max_dump_paths = 100;
    bool plot_csv = true;
};

/// Linear-Gaussian decoupled model for "generic_fbsde": dx = κ(level − x)dt + s dW, g = x + βy, y(T) = 0.
struct GenericConfig {
    double kappa = 1.0;
    double level = 0.5;
    double s = 0.3;
    double beta = 0.1;
    double x0 = 1.0;
};

struct ExperimentConfig {
    std::string experiment = "cashflow";  // cashflow | generic_fbsde | property_suite
    double theta = 0.5;
    GridConfig grid;
    McConfig mc;
    OutputConfig output;
    bool quiet = false;

    cashflow::Params cashflow;
    cashflow::ExperimentOptions cashflow_options;
    cashflow::RiccatiMethod riccati_method = cashflow::RiccatiMethod::closed_form;
    GenericConfig generic;

    /// Configuration as resolved, defaults included.
    nlohmann::json resolved;
};

/// Parses and validates configuration text; `origin` names the source in messages.
ExperimentConfig parse_config(const std::string& text, const std::string& origin = "<config>");

ExperimentConfig load_config(const std::filesystem::path& path);

/// Command-line overrides applied after loading.
struct Overrides {
    std::optional<std::string> experiment;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> paths;
    std::optional<std::size_t> steps;
    std::optional<double> theta;
    std::optional<std::string> out;
    bool dump_paths = false;
    bool quiet = false;
};

void apply_overrides(ExperimentConfig& config, const Overrides& o);

}  // namespace riskflow::cli
