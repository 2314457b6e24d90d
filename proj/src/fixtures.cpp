#include "evosig/fixtures.hpp"

#include "evosig/error.hpp"

namespace evosig::fixtures {

std::optional<std::string_view> find(std::string_view path) {
    for (const auto& f : embedded_files())
        if (f.path == path) return f.content;
    return std::nullopt;
}

namespace {

std::string_view require(std::string_view path) {
    if (auto f = find(path)) return *f;
    throw Error(ErrorKind::Load, "missing embedded file " + std::string(path));
}

} // namespace

std::string_view webster_program() { return require("programs/webster.sig"); }
std::string_view discovered_program() { return require("programs/discovered.sig"); }

} // namespace evosig::fixtures
