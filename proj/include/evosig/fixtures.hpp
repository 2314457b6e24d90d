#pragma once

// Programs and prompt templates compiled into the library from data/.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace evosig::fixtures {

struct EmbeddedFile {
    std::string_view path; // relative to data/, e.g. "programs/webster.sig"
    std::string_view content;
};

const std::vector<EmbeddedFile>& embedded_files();
std::optional<std::string_view> find(std::string_view path);

/// Baseline Webster program, the initial program of every run.
std::string_view webster_program();
/// Webster with the five evolved modifications applied.
std::string_view discovered_program();

} // namespace evosig::fixtures
