// support.hpp: shared helpers for the unit tests

#ifndef CALLGRAM_TEST_SUPPORT_HPP
#define CALLGRAM_TEST_SUPPORT_HPP

#include "callgram/error.hpp"
#include "callgram/featurize.hpp"
#include "callgram/io.hpp"

#include <doctest.h>

#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace testing {

inline std::filesystem::path fixture(const std::string &name) {
    return std::filesystem::path{CALLGRAM_FIXTURE_DIR} / name;
}

/// fresh, empty scratch directory under the build tree
inline std::filesystem::path scratch(const std::string &name) {
    auto dir = std::filesystem::path{CALLGRAM_SCRATCH_DIR} / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline callgram::TokenDocument doc(const std::string &id, const std::string &label,
                                   const std::vector<std::string> &tokens, int order = 1) {
    callgram::TokenDocument d;
    d.sample_id = id;
    d.label = label;
    d.order = order;
    d.tokens = tokens;
    for (const auto &t : tokens) ++d.counts[t];
    return d;
}

template <typename F>
callgram::ErrorCode error_code_of(F &&f) {
    try {
        f();
    } catch (const callgram::Error &e) {
        return e.code();
    }
    FAIL("expected a callgram::Error");
    return callgram::ErrorCode::UsageError;
}

}  // namespace testing

#endif  // CALLGRAM_TEST_SUPPORT_HPP
