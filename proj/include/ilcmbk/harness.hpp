#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ilcmbk/baselines.hpp"
#include "ilcmbk/config.hpp"
#include "ilcmbk/ilc.hpp"
#include "ilcmbk/plant.hpp"

namespace ilcmbk {

enum class Method { ilc_mbk, mfac, admittance };

Method method_from_string(const std::string& name);
std::string to_string(Method m);

/// Full description of one run. Built-in defaults mirror the documented
/// config-file schema; CLI flags and config files both land here.
struct ExperimentConfig {
    std::string task = "auto_reset_button";
    std::optional<std::string> plant_file;  ///< overrides `task` when set
    Method method = Method::ilc_mbk;
    double dt = 0.05;
    std::size_t iterations = 750;
    LearnConfig learn;
    MfacConfig mfac;
    std::uint64_t seed = 1;
    std::filesystem::path out_dir;  ///< empty = <out root>/<task>_<method>

    /// Assumption-1 fixed initial state error. NaN init_dv selects the
    /// default of 10% of the peak reference speed.
    double init_dv = std::numeric_limits<double>::quiet_NaN();
    double init_dx = 0.0;

    double inconsistency = 0.0;  ///< force-reference noise amplitude, fraction of peak |f_r|
    bool use_true_c = false;     ///< certificate alpha0 from secant C instead of the estimate
    std::optional<double> depth;
    std::optional<double> t_end;
};

ExperimentConfig experiment_from_config(const ConfigTree& cfg);

double rmse(std::span<const double> values);

/// Maximum single-iteration decrease of an RMSE learning curve; negative if
/// the curve only rises. Needs at least two points.
double mdr(std::span<const double> rmse_curve);

struct ExperimentResult {
    LearningCurve curve;
    std::string channel;  ///< "force" or "torque", from the plant definition
    std::filesystem::path out_dir;
    std::filesystem::path csv_path;
    std::filesystem::path summary_path;
    std::optional<std::filesystem::path> certificate_path;
};

/// Runs one experiment and persists curve.csv, summary.json and (for the
/// learning method) certificate.json into the output directory. Outputs are
/// byte-stable for identical configs.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

struct ComparisonCell {
    double rmse_final = 0.0;
    double mdr = 0.0;
};

struct ComparisonTable {
    std::string task;
    double dt = 0.0;
    std::size_t iterations = 0;
    std::vector<std::string> methods;
    std::vector<std::string> channels;             ///< {"position", "force"|"torque"}
    std::vector<std::vector<ComparisonCell>> cells;  ///< [channel][method]
    std::vector<std::size_t> best;                  ///< per channel, by final RMSE
};

/// Runs every config (all must share task/dt/iterations) and tabulates
/// final RMSE and MDR per channel, flagging the best method per row.
ComparisonTable compare(const std::vector<ExperimentConfig>& cfgs);

std::string render_table(const ComparisonTable& table);

/// Default output root: $ILCMBK_OUT_ROOT or "results".
std::filesystem::path default_out_root();

}  // namespace ilcmbk
