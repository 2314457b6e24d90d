#include "evosig/archive.hpp"

#include "evosig/error.hpp"

#include <algorithm>
#include <cmath>

namespace evosig {

namespace {

[[noreturn]] void load_error(const std::string& what) { throw Error(ErrorKind::Load, what); }

int bucket(double value, double origin, double width, int count) {
    const double b = std::floor((value - origin) / width);
    if (!(b >= 0.0)) return 0;
    if (b >= count - 1) return count - 1;
    return static_cast<int>(b);
}

std::optional<std::uint64_t> parse_hex(const std::string& s) {
    if (s.size() != 16) return std::nullopt;
    std::uint64_t v = 0;
    for (char c : s) {
        v <<= 4;
        if (c >= '0' && c <= '9')
            v |= static_cast<std::uint64_t>(c - '0');
        else if (c >= 'a' && c <= 'f')
            v |= static_cast<std::uint64_t>(c - 'a' + 10);
        else
            return std::nullopt;
    }
    return v;
}

} // namespace

void ArchiveDims::validate() const {
    if (token_buckets < 1 || cycle_buckets < 1) throw Error(ErrorKind::InvalidArgument, "archive needs >= 1 bucket per axis");
    if (!(tokens_per_bucket > 0.0) || !(cycle_per_bucket > 0.0))
        throw Error(ErrorKind::InvalidArgument, "archive bucket widths must be positive");
}

Cell descriptor(std::size_t tokens, double mean_cycle, const ArchiveDims& dims) {
    return {bucket(static_cast<double>(tokens), 0.0, dims.tokens_per_bucket, dims.token_buckets),
            bucket(mean_cycle, dims.cycle_origin, dims.cycle_per_bucket, dims.cycle_buckets)};
}

std::size_t token_count(const sig::SourceText& source) {
    return sig::tokenize(source.text, sig::Limits{SIZE_MAX, SIZE_MAX}).size() - 1;
}

std::string_view to_string(InsertOutcome o) {
    switch (o) {
    case InsertOutcome::Inserted: return "inserted";
    case InsertOutcome::Replaced: return "replaced";
    case InsertOutcome::Rejected: return "rejected";
    }
    return "?";
}

Archive::Archive(ArchiveDims dims) : dims_(dims) { dims_.validate(); }

InsertResult Archive::insert(CandidateProgram program) {
    InsertResult out;
    if (!program.result.ok()) {
        out.reason = "evaluation failed: " + std::string(to_string(program.result.error->kind));
        return out;
    }
    try {
        program.tokens = token_count(program.source);
    } catch (const Error& e) {
        out.reason = std::string("unparsable source: ") + e.what();
        return out;
    }
    program.cell = descriptor(program.tokens, program.result.mean_cycle, dims_);
    out.cell = program.cell;

    auto it = grid_.find(program.cell);
    if (it == grid_.end()) {
        out.outcome = InsertOutcome::Inserted;
        it = grid_.emplace(program.cell, std::move(program)).first;
    } else if (program.score() > it->second.score()) {
        out.outcome = InsertOutcome::Replaced;
        out.evicted = std::move(it->second);
        it->second = std::move(program);
    } else {
        out.reason = "score does not beat the cell incumbent";
        return out;
    }
    if (!best_ || it->second.score() > grid_.at(*best_).score()) best_ = it->first;
    return out;
}

const CandidateProgram& Archive::sample_parent(Rng& rng) const {
    if (grid_.empty()) throw Error(ErrorKind::EmptyArchive, "cannot sample a parent from an empty archive");
    if (rng.uniform01() < 0.7) {
        auto it = grid_.begin();
        std::advance(it, static_cast<long>(rng.index(grid_.size())));
        return it->second;
    }
    return grid_.at(*best_);
}

std::vector<const CandidateProgram*> ranked(const Archive& archive) {
    std::vector<const CandidateProgram*> out;
    for (const auto& [cell, p] : archive.entries()) out.push_back(&p);
    std::stable_sort(out.begin(), out.end(),
                     [](const CandidateProgram* a, const CandidateProgram* b) { return a->score() > b->score(); });
    return out;
}

std::vector<const CandidateProgram*> Archive::sample_inspirations(Rng& rng, std::size_t k,
                                                                  std::optional<Cell> exclude) const {
    std::vector<const CandidateProgram*> pool;
    for (const auto* p : ranked(*this))
        if (!exclude || p->cell != *exclude) pool.push_back(p);

    std::vector<const CandidateProgram*> out;
    const std::size_t top = std::min((k + 1) / 2, pool.size());
    out.assign(pool.begin(), pool.begin() + static_cast<long>(top));
    pool.erase(pool.begin(), pool.begin() + static_cast<long>(top));
    for (std::size_t n = 0; n < k / 2 && !pool.empty(); ++n) {
        const auto pick = rng.index(pool.size());
        out.push_back(pool[pick]);
        pool.erase(pool.begin() + static_cast<long>(pick));
    }
    return out;
}

const CandidateProgram* Archive::best() const { return best_ ? &grid_.at(*best_) : nullptr; }

const CandidateProgram* Archive::at(Cell c) const {
    auto it = grid_.find(c);
    return it == grid_.end() ? nullptr : &it->second;
}

Json to_json(const CandidateProgram& p) {
    return {
        {"cell", {p.cell.i, p.cell.j}},
        {"hash", p.source.hash_hex()},
        {"tokens", p.tokens},
        {"parent_hash", p.parent_hash ? Json(sig::hash_hex(*p.parent_hash)) : Json(nullptr)},
        {"iteration_born", p.iteration_born},
        {"model_used", p.model_used},
        {"result", to_json(p.result)},
        {"source", p.source.text},
    };
}

CandidateProgram candidate_from_json(const Json& j) {
    try {
        CandidateProgram p;
        p.source = sig::SourceText(j.at("source").get<std::string>());
        const auto hash = parse_hex(j.at("hash").get<std::string>());
        if (!hash || *hash != p.source.hash) load_error("content hash does not match source");
        const auto& cell = j.at("cell");
        if (!cell.is_array() || cell.size() != 2) load_error("cell must be [i, j]");
        p.cell = {cell[0].get<int>(), cell[1].get<int>()};
        p.tokens = j.at("tokens").get<std::size_t>();
        const auto& parent = j.at("parent_hash");
        if (!parent.is_null()) {
            p.parent_hash = parse_hex(parent.get<std::string>());
            if (!p.parent_hash) load_error("malformed parent hash");
        }
        p.iteration_born = j.at("iteration_born").get<std::size_t>();
        p.model_used = j.at("model_used").get<std::string>();
        p.result = eval_result_from_json(j.at("result"));
        return p;
    } catch (const Json::exception& e) {
        load_error(std::string("malformed program entry: ") + e.what());
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::Load) throw;
        load_error(std::string("malformed program entry: ") + e.what());
    }
}

Json Archive::to_json() const {
    Json entries = Json::array();
    for (const auto& [cell, p] : grid_) entries.push_back(evosig::to_json(p));
    return {
        {"format", "evosig-archive"},
        {"engine_version", kEngineVersion},
        {"dims",
         {{"token_buckets", dims_.token_buckets},
          {"tokens_per_bucket", dims_.tokens_per_bucket},
          {"cycle_buckets", dims_.cycle_buckets},
          {"cycle_origin", dims_.cycle_origin},
          {"cycle_per_bucket", dims_.cycle_per_bucket}}},
        {"best", best_ ? Json::array({best_->i, best_->j}) : Json(nullptr)},
        {"entries", entries},
    };
}

Archive Archive::from_json(const Json& j) {
    try {
        if (!j.is_object() || j.value("format", "") != "evosig-archive") load_error("not an archive checkpoint");
        const auto& d = j.at("dims");
        ArchiveDims dims;
        dims.token_buckets = d.at("token_buckets").get<int>();
        dims.tokens_per_bucket = d.at("tokens_per_bucket").get<double>();
        dims.cycle_buckets = d.at("cycle_buckets").get<int>();
        dims.cycle_origin = d.at("cycle_origin").get<double>();
        dims.cycle_per_bucket = d.at("cycle_per_bucket").get<double>();
        Archive a(dims);
        for (const auto& e : j.at("entries")) {
            auto p = candidate_from_json(e);
            if (!p.result.ok()) load_error("stored program has an error result");
            if (descriptor(p.tokens, p.result.mean_cycle, dims) != p.cell) load_error("stored cell does not match descriptor");
            const Cell cell = p.cell;
            if (!a.grid_.emplace(cell, std::move(p)).second) load_error("two programs in one cell");
        }
        const auto& best = j.at("best");
        if (best.is_null()) {
            if (!a.grid_.empty()) load_error("non-empty archive without a best entry");
        } else {
            const Cell c{best.at(0).get<int>(), best.at(1).get<int>()};
            if (!a.grid_.count(c)) load_error("best entry refers to an empty cell");
            for (const auto& [cell, p] : a.grid_)
                if (p.score() > a.grid_.at(c).score()) load_error("best entry is not the top score");
            a.best_ = c;
        }
        return a;
    } catch (const Json::exception& e) {
        load_error(std::string("malformed archive: ") + e.what());
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::Load) throw;
        load_error(std::string("malformed archive: ") + e.what());
    }
}

void checkpoint(const Archive& archive, const std::filesystem::path& path) {
    write_text_file(path, archive.to_json().dump(1) + "\n");
}

Archive load_archive(const std::filesystem::path& path) {
    const auto text = read_text_file(path);
    Json j;
    try {
        j = Json::parse(text);
    } catch (const Json::parse_error& e) {
        load_error(path.string() + ": " + e.what());
    }
    return Archive::from_json(j);
}

} // namespace evosig
