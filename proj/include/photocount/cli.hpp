#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "photocount/core.hpp"
#include "photocount/genfn.hpp"
#include "photocount/random.hpp"

namespace photocount::cli {

inline constexpr const char* kSpecVersion = "1.0";

enum class Task { FanoSweep, Pmf, GfTrace, Mc, Tail };

std::string_view to_string(Task task);
Task task_from_string(std::string_view name);

/// Lorentzian occupation f_max / (1 + w^2) discretized over +-span
/// half-widths; expanded into the window's profile at run time.
struct LorentzianSpec {
    double f_max = 1.0;
    int points = 10000;
    double span = 100.0;
};

/// Task parameters. Unset fields take task-specific defaults.
struct TaskParams {
    std::optional<std::vector<double>> f;              // fano-sweep occupation grid
    std::optional<double> gamma;                       // fano-sweep single-barrier transparency
    std::optional<std::vector<std::string>> methods;   // pmf
    std::optional<int> n_max;                          // pmf, tail
    std::optional<std::vector<double>> xi;             // gf-trace
    std::optional<std::int64_t> trials;                // mc
    std::optional<int> cells;                          // mc
    std::optional<int> threads;                        // mc
    std::optional<std::uint64_t> seed;                 // mc, ensemble realizations
    std::optional<bool> reference;                     // mc: chi-square against exact inversion
};

struct Scenario {
    std::string spec_version = kSpecVersion;
    Statistics statistics = Statistics::Bose;
    ModeCovariance mu = ModeCovariance::scalar(0.0, 1);
    TransmissionSpec t = TransmissionSpec::eigenvalues({1.0});
    CountingWindow window;
    std::optional<LorentzianSpec> lorentzian;
    Task task = Task::Pmf;
    TaskParams params;
};

/// Strict parse: unknown fields, wrong types and missing required fields
/// throw Error(Config).
Scenario parse_scenario(const std::string& json_text);
std::string dump_scenario(const Scenario& scenario);

/// The counting window with any Lorentzian spec expanded into its profile.
CountingWindow effective_window(const Scenario& scenario);

/// Generating function for a scenario. Ensembles with scalar mu stay a
/// continuum; with a matrix mu a finite realization is drawn from `rng`.
GeneratingFunction build_generating_function(const Scenario& scenario, Rng& rng,
                                             std::vector<RegimeWarning>& warnings);

struct TaskOutput {
    std::map<std::string, std::string> files;  // file name -> contents
    std::vector<RegimeWarning> warnings;
};

/// Validates the scenario and runs its task in memory.
TaskOutput run_task(const Scenario& scenario, std::optional<std::uint64_t> seed_override = std::nullopt);

/// Full-precision scientific rendering used in every CSV.
std::string format_real(double x);

/// Command-line entry: --scenario FILE --out DIR [--seed N] [--strict].
/// Returns 0 on success, 2 on validation or configuration errors, 3 when
/// --strict meets a regime warning (nothing is written), 1 otherwise.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace photocount::cli
