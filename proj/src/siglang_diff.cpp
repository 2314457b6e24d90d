#include "evosig/error.hpp"
#include "evosig/siglang.hpp"

namespace evosig::sig {

SourceText apply_diff(const SourceText& source, std::span<const DiffBlock> diffs, const Limits& limits) {
    if (diffs.empty()) return source;
    std::string text = source.text;
    for (std::size_t i = 0; i < diffs.size(); ++i) {
        const auto& block = diffs[i];
        if (block.search.empty()) {
            if (diffs.size() != 1) throw DiffError(i, "empty search text is only allowed as a single full rewrite");
            text = block.replace;
            break;
        }
        const auto at = text.find(block.search);
        if (at == std::string::npos) throw DiffError(i, "search text not found");
        text.replace(at, block.search.size(), block.replace);
    }
    if (text.size() > limits.max_bytes)
        throw Error(ErrorKind::Limit, "patched source is " + std::to_string(text.size()) + " bytes, limit " +
                                          std::to_string(limits.max_bytes));
    return SourceText(std::move(text));
}

namespace {

std::string_view trim_marker(std::string_view line) {
    while (!line.empty() && (line.back() == ' ' || line.back() == '\t' || line.back() == '\r')) line.remove_suffix(1);
    return line;
}

std::string join(const std::vector<std::string_view>& lines) {
    std::string out;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (i) out += '\n';
        out += lines[i];
    }
    return out;
}

} // namespace

std::vector<DiffBlock> parse_diff_blocks(std::string_view text) {
    std::vector<std::string_view> lines;
    for (std::size_t pos = 0; pos <= text.size();) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        lines.push_back(text.substr(pos, nl - pos));
        pos = nl + 1;
    }

    std::vector<DiffBlock> blocks;
    enum class State { Outside, Search, Replace } state = State::Outside;
    std::vector<std::string_view> search, replace;
    for (auto raw : lines) {
        const auto line = trim_marker(raw);
        switch (state) {
        case State::Outside:
            if (line == kSearchMarker) {
                state = State::Search;
                search.clear();
                replace.clear();
            }
            break;
        case State::Search:
            if (line == kDividerMarker)
                state = State::Replace;
            else if (line == kSearchMarker || line == kReplaceMarker)
                throw DiffError(blocks.size(), "expected '=======' before '" + std::string(line) + "'");
            else
                search.push_back(raw);
            break;
        case State::Replace:
            if (line == kReplaceMarker) {
                blocks.push_back({join(search), join(replace)});
                state = State::Outside;
            } else if (line == kSearchMarker || line == kDividerMarker) {
                throw DiffError(blocks.size(), "expected '>>>>>>> REPLACE' before '" + std::string(line) + "'");
            } else {
                replace.push_back(raw);
            }
            break;
        }
    }
    if (state != State::Outside) throw DiffError(blocks.size(), "block is not closed");
    return blocks;
}

std::string format_diff_blocks(std::span<const DiffBlock> diffs) {
    std::string out;
    for (const auto& d : diffs) {
        out += kSearchMarker;
        out += '\n';
        out += d.search;
        out += '\n';
        out += kDividerMarker;
        out += '\n';
        out += d.replace;
        out += '\n';
        out += kReplaceMarker;
        out += '\n';
    }
    return out;
}

} // namespace evosig::sig
