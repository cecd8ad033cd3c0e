// app.hpp
//
// Subcommand implementations behind the `callgram` binary.  Every run echoes
// its fully resolved RunConfig to `<out>/<subcommand>.config.json`; feeding
// that file to `callgram rerun` repeats the run with identical outputs.

#ifndef CALLGRAM_APP_HPP
#define CALLGRAM_APP_HPP

#include "callgram/feature_select.hpp"
#include "callgram/image.hpp"
#include "callgram/profile.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace callgram::app {

inline constexpr std::size_t default_profile_cap = 20000;

enum class SplitFilter { Train, Test, All };

std::string_view to_string(SplitFilter s) noexcept;
/// throws UsageError
SplitFilter parse_split_filter(std::string_view name);

struct RunConfig {
    std::string subcommand;
    std::optional<int> order;  ///< classify and export-images take it from the model when unset
    std::uint64_t seed = 1;
    std::filesystem::path out = "callgram-out";
    unsigned jobs = 0;  ///< 0: one per hardware thread; never affects outputs

    std::filesystem::path manifest;
    std::filesystem::path model;
    std::filesystem::path predictions;
    std::filesystem::path templates;  ///< synth; empty selects the built-in families

    SelectionParams selection;
    std::size_t profile_cap = default_profile_cap;

    std::size_t train_per_class = 50;
    std::size_t test_per_class = 20;
    std::optional<double> noise_rate;  ///< synth: overrides every template

    std::optional<SplitFilter> split;  ///< classify defaults to test, export-images to all
    std::vector<ImageStage> stages{ImageStage::Raw, ImageStage::Blurred, ImageStage::Clahe, ImageStage::Sobel};
    BlurParams blur;
    ClaheParams clahe;
};

/// Paths made absolute, defaults filled in for the subcommand.  Throws
/// UsageError for unknown subcommands or missing required inputs.
RunConfig resolve(RunConfig config);

/// JSON echo of the parameters the subcommand uses.
std::string config_echo(const RunConfig &config);
/// Inverse of config_echo.  Throws UsageError.
RunConfig parse_config_echo(std::string_view json_text);

std::filesystem::path echo_path(const RunConfig &config);

/// Resolves, writes the echo, runs.  Progress goes to `log`.  Throws Error.
void run(const RunConfig &config, std::ostream &log);

/// Predictions CSV: `sample_id,predicted,margin,score:<class>...`.
std::string predictions_csv(const std::vector<ClassificationResult> &results,
                            const std::vector<std::string> &classes);
/// sample_id and predicted only; scores are not needed downstream.
std::vector<ClassificationResult> parse_predictions(std::string_view csv);

}  // namespace callgram::app

#endif  // CALLGRAM_APP_HPP
