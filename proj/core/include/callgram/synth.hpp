// synth.hpp
//
// Seeded synthetic behavioral reports built from family templates.
//
// Randomness comes from std::mt19937_64 (fully specified by the C++
// standard) with bounded draws done here by rejection sampling, so corpora
// are byte-identical across platforms and standard libraries.  Seeds for
// each sample are derived with the SplitMix64 finalizer:
//   sample_seed = mix64(family_seed ^ mix64(index + 0x9E3779B97F4A7C15))
//   family_seed = mix64(corpus_seed ^ fnv1a32(class_name))
//
// Argument patterns may contain placeholders:
//   {n:K}  a decimal integer drawn uniformly from [0, K)
//   {hex}  eight random lowercase hex digits

#ifndef CALLGRAM_SYNTH_HPP
#define CALLGRAM_SYNTH_HPP

#include "callgram/report.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace callgram {

struct CallPattern {
    std::string category;
    std::string api;
    std::vector<std::string> arguments;
    std::string return_value = "0";

    bool operator==(const CallPattern &) const = default;
};

using Motif = std::vector<CallPattern>;

struct FamilyTemplate {
    std::string class_name;
    std::vector<CallPattern> call_pool;  ///< filler calls placed between motif instances
    std::vector<Motif> chain_motifs;
    double noise_rate = 0.0;             ///< chance of a benign call before each emitted call
    int min_motifs = 1;                  ///< motif instances per sample, inclusive range
    int max_motifs = 1;

    /// throws BadTemplate
    void validate() const;

    bool operator==(const FamilyTemplate &) const = default;
};

/// Template file: JSON object with class_name, call_pool, chain_motifs,
/// noise_rate and optional min_motifs / max_motifs.  Throws BadTemplate.
FamilyTemplate parse_template(std::string_view json_text);
std::string dump_template(const FamilyTemplate &t);

/// Accepts one template object or an array of them.
std::vector<FamilyTemplate> load_templates(const std::filesystem::path &path);

/// Calls shared by every family as background noise.
const std::vector<CallPattern> &benign_noise_pool();

/// Eight families: Adware, Worm, Virus, Backdoor, Spyware, Benign, Trojan,
/// Downloader.
std::vector<FamilyTemplate> builtin_templates();

std::uint64_t mix64(std::uint64_t x) noexcept;
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept;
std::uint64_t family_seed(std::uint64_t corpus_seed, std::string_view class_name) noexcept;

/// Deterministic draws on top of mt19937_64.
class SynthRng {
public:
    explicit SynthRng(std::uint64_t seed) : engine_{seed} {}

    std::uint64_t next() { return engine_(); }
    /// uniform in [0, bound); bound > 0
    std::uint64_t below(std::uint64_t bound);
    /// true with probability p
    bool chance(double p);

private:
    std::mt19937_64 engine_;
};

struct GeneratedReport {
    std::string sample_id;
    std::string label;
    std::string json;  ///< report in the behavior/processes/calls layout
};

/// Sample ids are `<class lowercased>_<index, 4 digits>`.  A pure function
/// of its arguments.  Throws BadTemplate.
std::vector<GeneratedReport> generate(const FamilyTemplate &family, std::size_t count, std::uint64_t seed);

/// The call sequence `generate` would emit for sample `index`.
std::vector<ApiCallRecord> generate_calls(const FamilyTemplate &family, std::uint64_t sample_seed);

struct CorpusPlan {
    std::size_t train_per_class = 50;
    std::size_t test_per_class = 20;
    std::uint64_t seed = 1;
};

/// Writes `<out>/reports/<sample_id>.json` for every family plus
/// `<out>/manifest.csv` (first train_per_class samples of each family are
/// train, the rest test).  Returns the manifest path.
std::filesystem::path write_corpus(std::span<const FamilyTemplate> families, const CorpusPlan &plan,
                                   const std::filesystem::path &out_dir);

}  // namespace callgram

#endif  // CALLGRAM_SYNTH_HPP
