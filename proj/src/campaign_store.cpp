#include "mutsum/campaign_store.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <set>

#include "mutsum/digest.hpp"
#include "mutsum/error.hpp"
#include "mutsum/fsutil.hpp"

namespace mutsum {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kFormatVersion = 1;

constexpr Phase kPhases[] = {Phase::Ingested,    Phase::Mutated,    Phase::Summarized,
                             Phase::UnderReview, Phase::Reconciled, Phase::Reported};

bool at_least(Phase p, Phase q) { return static_cast<int>(p) >= static_cast<int>(q); }

std::vector<fs::path> sorted_entries(const fs::path& dir, bool directories) {
    std::vector<fs::path> out;
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) return out;
    for (const auto& e : fs::directory_iterator(dir, ec)) {
        if (fsutil::is_temp_file(e.path())) continue;
        if (directories ? e.is_directory() : (e.is_regular_file() && e.path().extension() == ".json"))
            out.push_back(e.path());
    }
    std::sort(out.begin(), out.end());
    return out;
}

/// Every "{program}/{name}.json" below `root`, as (mutant id, path).
std::vector<std::pair<std::string, fs::path>> mutant_files(const fs::path& root) {
    std::vector<std::pair<std::string, fs::path>> out;
    for (const fs::path& prog : sorted_entries(root, true))
        for (const fs::path& f : sorted_entries(prog, false))
            out.emplace_back(prog.filename().string() + "/" + f.stem().string(), f);
    return out;
}

}  // namespace

std::string_view to_string(Phase p) noexcept {
    switch (p) {
        case Phase::Ingested: return "ingested";
        case Phase::Mutated: return "mutated";
        case Phase::Summarized: return "summarized";
        case Phase::UnderReview: return "under-review";
        case Phase::Reconciled: return "reconciled";
        case Phase::Reported: return "reported";
    }
    return "reported";
}

Phase parse_phase(std::string_view s) {
    for (Phase p : kPhases)
        if (s == to_string(p)) return p;
    throw StoreError("unknown phase: " + std::string(s));
}

std::pair<std::string, std::string> split_mutant_id(std::string_view mutant_id) {
    const auto slash = mutant_id.find('/');
    if (slash == std::string_view::npos || slash == 0 || slash + 1 == mutant_id.size() ||
        mutant_id.find('/', slash + 1) != std::string_view::npos)
        throw StoreError("malformed mutant id: " + std::string(mutant_id));
    const std::string program(mutant_id.substr(0, slash));
    const std::string name(mutant_id.substr(slash + 1));
    if (sanitize_id(program) != program || sanitize_id(name) != name || program == ".." || name == "..")
        throw StoreError("malformed mutant id: " + std::string(mutant_id));
    return {program, name};
}

// ---------------------------------------------------------------------------
// Config

json to_json(const CampaignConfig& c) {
    json j{{"id", c.id}, {"string_literals", c.engine.string_literals}};
    j["quota_spec"] = c.quota_spec ? json(*c.quota_spec) : json(nullptr);
    j["quota"] = c.quota_spec ? to_json(parse_quota(*c.quota_spec)) : json(nullptr);
    j["seed"] = c.seed ? json(*c.seed) : json(nullptr);
    j["provider"] = c.provider ? to_json(*c.provider) : json(nullptr);
    return j;
}

CampaignConfig campaign_config_from_json(const json& j) {
    CampaignConfig c;
    c.id = j.at("id").get<std::string>();
    if (j.contains("quota_spec") && !j["quota_spec"].is_null()) c.quota_spec = j["quota_spec"].get<std::string>();
    if (j.contains("seed") && !j["seed"].is_null()) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("provider") && !j["provider"].is_null()) c.provider = provider_config_from_json(j["provider"]);
    c.engine.string_literals = j.value("string_literals", false);
    return c;
}

bool CampaignConfig::operator==(const CampaignConfig& o) const { return to_json(*this) == to_json(o); }

json IntegrityReport::to_json() const {
    json f = json::array();
    for (const Finding& x : findings) f.push_back({{"kind", x.kind}, {"ref", x.ref}, {"detail", x.detail}});
    return json{{"ok", ok()}, {"artifacts_checked", artifacts_checked}, {"findings", std::move(f)}};
}

// ---------------------------------------------------------------------------
// Lock

struct CampaignStore::Lock {
    int fd = -1;

    explicit Lock(const fs::path& path) {
        fd = ::open(path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
        if (fd < 0) throw IoError("cannot open lock file " + path.string() + ": " + std::strerror(errno));
        if (::flock(fd, LOCK_EX | LOCK_NB) != 0) {
            const int err = errno;
            ::close(fd);
            if (err == EWOULDBLOCK) throw StoreError("campaign is locked by another writer: " + path.string());
            throw IoError("cannot lock " + path.string() + ": " + std::strerror(err));
        }
    }
    ~Lock() {
        if (fd >= 0) ::close(fd);
    }
    Lock(const Lock&) = delete;
    Lock& operator=(const Lock&) = delete;
};

// ---------------------------------------------------------------------------
// Lifecycle

CampaignStore::CampaignStore(fs::path dir, std::unique_ptr<Lock> lock) : dir_(std::move(dir)), lock_(std::move(lock)) {}
CampaignStore::CampaignStore(CampaignStore&&) noexcept = default;
CampaignStore& CampaignStore::operator=(CampaignStore&&) noexcept = default;
CampaignStore::~CampaignStore() = default;

bool CampaignStore::exists(const fs::path& dir) {
    std::error_code ec;
    return fs::exists(dir / "campaign.json", ec);
}

CampaignStore CampaignStore::init(const fs::path& dir, const CampaignConfig& config,
                                  const std::vector<Program>& programs, bool resume) {
    if (exists(dir)) {
        if (!resume) throw StoreError("a campaign already exists at " + dir.string() + " (use resume)");
        CampaignStore store = open(dir, Access::Write);
        if (store.id() != config.id) throw StoreError("existing campaign has id " + store.id() + ", not " + config.id);
        std::vector<std::string> ids;
        for (const Program& p : programs) ids.push_back(p.id);
        std::sort(ids.begin(), ids.end());
        if (ids != store.program_ids_) throw StoreError("existing campaign has a different program set");
        return store;
    }

    if (config.id.empty() || sanitize_id(config.id) != config.id)
        throw StoreError("campaign id must be non-empty and use only [A-Za-z0-9._-]: " + config.id);
    if (config.quota_spec) parse_quota(*config.quota_spec);
    if (config.provider) config.provider->validate();

    std::vector<Program> sorted = programs;
    std::sort(sorted.begin(), sorted.end(), [](const Program& a, const Program& b) { return a.id < b.id; });
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        if (sorted[i].id.empty() || sanitize_id(sorted[i].id) != sorted[i].id)
            throw StoreError("program id is not file-safe: " + sorted[i].id);
        if (i > 0 && sorted[i].id == sorted[i - 1].id) throw StoreError("duplicate program id: " + sorted[i].id);
    }

    fs::create_directories(dir);
    CampaignStore store(dir, std::make_unique<Lock>(dir / ".lock"));
    store.config_ = config;

    json entries = json::array();
    for (const Program& p : sorted) {
        fsutil::atomic_write(dir / "programs" / (p.id + ".py"), p.source_text);
        json e = program_metadata(p);
        e["source_sha256"] = digest::sha256_hex(p.source_text);
        entries.push_back(std::move(e));
        store.program_ids_.push_back(p.id);
    }
    fsutil::write_json(dir / "programs.json", json{{"programs", std::move(entries)}});
    store.write_manifest();
    return store;
}

CampaignStore CampaignStore::open(const fs::path& dir, Access access) {
    if (!exists(dir)) throw StoreError("no campaign at " + dir.string());
    std::unique_ptr<Lock> lock;
    if (access == Access::Write) lock = std::make_unique<Lock>(dir / ".lock");
    CampaignStore store(dir, std::move(lock));
    store.load_manifest();
    return store;
}

void CampaignStore::load_manifest() {
    json j;
    try {
        j = fsutil::read_json(dir_ / "campaign.json");
        if (j.value("format_version", 0) != kFormatVersion)
            throw StoreError("unsupported campaign format in " + (dir_ / "campaign.json").string());
        config_ = campaign_config_from_json(j.at("config"));
        phase_ = parse_phase(j.at("phase").get<std::string>());
        program_ids_ = j.at("programs").get<std::vector<std::string>>();
    } catch (const json::exception& e) {
        throw StoreError("corrupt campaign manifest: " + std::string(e.what()));
    } catch (const IoError& e) {
        throw StoreError(e.what());
    }
}

void CampaignStore::write_manifest() {
    json j{{"format_version", kFormatVersion},
           {"id", config_.id},
           {"config", to_json(config_)},
           {"phase", to_string(phase_)},
           {"programs", program_ids_}};
    const auto planned = planned_mutants();
    j["planned_mutants"] = planned ? json(*planned) : json(nullptr);
    fsutil::write_json(dir_ / "campaign.json", j);
}

void CampaignStore::require_writable() const {
    if (!lock_) throw StoreError("campaign opened read-only: " + dir_.string());
}

json CampaignStore::read_manifest_file(std::string_view name, const json& fallback) const {
    const fs::path p = dir_ / name;
    std::error_code ec;
    if (!fs::exists(p, ec)) return fallback;
    try {
        return fsutil::read_json(p);
    } catch (const IoError& e) {
        throw StoreError(e.what());
    }
}

std::optional<std::size_t> CampaignStore::planned_mutants() const {
    if (!config_.quota_spec) return std::nullopt;
    return quota_total(parse_quota(*config_.quota_spec)) * program_ids_.size();
}

void CampaignStore::set_config(const CampaignConfig& config) {
    require_writable();
    if (config.id != config_.id) throw StoreError("campaign id cannot change");
    if (config.quota_spec) parse_quota(*config.quota_spec);
    if (config.provider) config.provider->validate();
    config_ = config;
    write_manifest();
}

Campaign CampaignStore::campaign() const {
    Campaign c;
    c.id = config_.id;
    c.config = config_;
    c.phase = phase_;
    c.planned_mutants = planned_mutants();
    c.program_ids = program_ids_;
    for (const Mutant& m : mutants()) c.mutant_ids.push_back(m.id);
    std::set<std::string> keys;
    for (const auto& [subject, key] : summary_index()) keys.insert(key);
    c.summary_ids.assign(keys.begin(), keys.end());
    for (const std::string& r : raters())
        for (const Verdict& v : verdicts(r)) c.verdict_ids.push_back(r + ":" + v.mutant_id);
    return c;
}

// ---------------------------------------------------------------------------
// Programs

std::vector<Program> CampaignStore::programs() const {
    const json j = read_manifest_file("programs.json", json{{"programs", json::array()}});
    std::vector<Program> out;
    try {
        for (const json& e : j.at("programs")) {
            Program p = e.get<Program>();
            p.source_text = fsutil::read_file(dir_ / "programs" / (p.id + ".py"));
            out.push_back(std::move(p));
        }
    } catch (const json::exception& e) {
        throw StoreError("corrupt programs.json: " + std::string(e.what()));
    } catch (const IoError& e) {
        throw StoreError(e.what());
    }
    return out;
}

std::optional<Program> CampaignStore::program(std::string_view id) const {
    for (Program& p : programs())
        if (p.id == id) return std::move(p);
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Mutants

bool CampaignStore::has_mutant_manifest() const {
    std::error_code ec;
    return fs::exists(dir_ / "mutants.json", ec);
}

std::vector<Mutant> CampaignStore::mutants() const {
    const json j = read_manifest_file("mutants.json", json{{"mutants", json::array()}});
    std::vector<Mutant> out;
    try {
        for (const json& e : j.at("mutants")) {
            Mutant m = mutant_from_json(e);
            const auto [program, name] = split_mutant_id(m.id);
            m.mutated_source = fsutil::read_file(dir_ / "mutants" / program / (name + ".py"));
            out.push_back(std::move(m));
        }
    } catch (const json::exception& e) {
        throw StoreError("corrupt mutants.json: " + std::string(e.what()));
    } catch (const IoError& e) {
        throw StoreError(e.what());
    } catch (const ConfigError& e) {
        throw StoreError("corrupt mutants.json: " + std::string(e.what()));
    }
    return out;
}

std::optional<Mutant> CampaignStore::mutant(std::string_view id) const {
    for (Mutant& m : mutants())
        if (m.id == id) return std::move(m);
    return std::nullopt;
}

std::vector<ProgramShortfall> CampaignStore::shortfalls() const {
    const json j = read_manifest_file("mutants.json", json::object());
    std::vector<ProgramShortfall> out;
    for (const json& e : j.value("shortfalls", json::array())) {
        ProgramShortfall s;
        s.program_id = e.at("program_id").get<std::string>();
        s.shortfall.type = parse_mutation_type(e.at("type").get<std::string>());
        s.shortfall.bucket = parse_bucket(e.at("bucket").get<std::string>());
        s.shortfall.requested = e.at("requested").get<std::size_t>();
        s.shortfall.produced = e.at("produced").get<std::size_t>();
        out.push_back(s);
    }
    return out;
}

std::size_t CampaignStore::put_mutants(const std::vector<Mutant>& mutants,
                                       const std::vector<ProgramShortfall>& shortfalls) {
    require_writable();
    std::set<std::string> programs(program_ids_.begin(), program_ids_.end());
    std::set<std::string> seen;
    std::size_t written = 0;
    json entries = json::array();
    for (const Mutant& m : mutants) {
        const auto [program, name] = split_mutant_id(m.id);
        if (program != m.program_id || name != m.name) throw StoreError("mutant id does not match its fields: " + m.id);
        if (!programs.count(program)) throw StoreError("mutant " + m.id + " references unknown program");
        if (!seen.insert(m.id).second) throw StoreError("duplicate mutant id: " + m.id);
        written += fsutil::atomic_write(dir_ / "mutants" / program / (name + ".py"), m.mutated_source);
        entries.push_back(to_json(m));
    }
    json sf = json::array();
    for (const ProgramShortfall& s : shortfalls)
        sf.push_back({{"program_id", s.program_id},
                      {"type", to_string(s.shortfall.type)},
                      {"bucket", to_string(s.shortfall.bucket)},
                      {"requested", s.shortfall.requested},
                      {"produced", s.shortfall.produced}});
    written += fsutil::write_json(dir_ / "mutants.json", json{{"mutants", std::move(entries)}, {"shortfalls", sf}});
    return written;
}

// ---------------------------------------------------------------------------
// Summaries

SummaryStore CampaignStore::summaries() const { return SummaryStore(dir_ / "summaries"); }

std::map<std::string, std::string> CampaignStore::summary_index() const {
    const json j = read_manifest_file("summaries.json", json::object());
    try {
        return j.value("subjects", std::map<std::string, std::string>{});
    } catch (const json::exception& e) {
        throw StoreError("corrupt summaries.json: " + std::string(e.what()));
    }
}

bool CampaignStore::put_summary_index(const std::map<std::string, std::string>& index) {
    require_writable();
    return fsutil::write_json(dir_ / "summaries.json", json{{"subjects", index}});
}

std::optional<SummaryRecord> CampaignStore::summary_for(std::string_view subject) const {
    const auto index = summary_index();
    const auto it = index.find(std::string(subject));
    if (it == index.end()) return std::nullopt;
    auto r = summaries().get(it->second);
    if (r) r->subject_ref = std::string(subject);
    return r;
}

// ---------------------------------------------------------------------------
// Verdicts

std::vector<std::string> CampaignStore::raters() const {
    std::vector<std::string> out;
    for (const fs::path& p : sorted_entries(dir_ / "verdicts", true)) out.push_back(p.filename().string());
    return out;
}

std::vector<Verdict> CampaignStore::verdicts(std::string_view rater) const {
    std::vector<Verdict> out;
    for (const auto& [id, path] : mutant_files(dir_ / "verdicts" / std::string(rater))) {
        try {
            out.push_back(verdict_from_json(fsutil::read_json(path)));
        } catch (const IoError& e) {
            throw StoreError(e.what());
        }
    }
    return out;
}

std::optional<Verdict> CampaignStore::verdict(std::string_view rater, std::string_view mutant_id) const {
    const auto [program, name] = split_mutant_id(mutant_id);
    const fs::path p = dir_ / "verdicts" / std::string(rater) / program / (name + ".json");
    std::error_code ec;
    if (!fs::exists(p, ec)) return std::nullopt;
    try {
        return verdict_from_json(fsutil::read_json(p));
    } catch (const IoError& e) {
        throw StoreError(e.what());
    }
}

bool CampaignStore::put_verdict(const Verdict& v) {
    require_writable();
    validate(v);
    const auto [program, name] = split_mutant_id(v.mutant_id);
    return fsutil::write_json(dir_ / "verdicts" / v.rater_id / program / (name + ".json"), to_json(v));
}

std::vector<ReconciledVerdict> CampaignStore::reconciled() const {
    std::vector<ReconciledVerdict> out;
    for (const auto& [id, path] : mutant_files(dir_ / "reconciled")) {
        try {
            out.push_back(reconciled_from_json(fsutil::read_json(path)));
        } catch (const IoError& e) {
            throw StoreError(e.what());
        }
    }
    return out;
}

std::optional<ReconciledVerdict> CampaignStore::reconciled(std::string_view mutant_id) const {
    const auto [program, name] = split_mutant_id(mutant_id);
    const fs::path p = dir_ / "reconciled" / program / (name + ".json");
    std::error_code ec;
    if (!fs::exists(p, ec)) return std::nullopt;
    try {
        return reconciled_from_json(fsutil::read_json(p));
    } catch (const IoError& e) {
        throw StoreError(e.what());
    }
}

bool CampaignStore::put_reconciled(const ReconciledVerdict& r) {
    require_writable();
    const auto [program, name] = split_mutant_id(r.mutant_id);
    return fsutil::write_json(dir_ / "reconciled" / program / (name + ".json"), to_json(r));
}

bool CampaignStore::remove_reconciled(std::string_view mutant_id) {
    require_writable();
    const auto [program, name] = split_mutant_id(mutant_id);
    std::error_code ec;
    return fs::remove(dir_ / "reconciled" / program / (name + ".json"), ec);
}

// ---------------------------------------------------------------------------
// Phases

std::vector<std::string> CampaignStore::gaps(Phase target) const {
    std::vector<std::string> out;
    std::error_code ec;
    if (program_ids_.empty()) out.push_back("campaign has no programs");
    for (const std::string& id : program_ids_)
        if (!fs::exists(dir_ / "programs" / (id + ".py"), ec)) out.push_back("program file missing: " + id);
    if (!at_least(target, Phase::Mutated)) return out;

    if (!config_.quota_spec) out.push_back("quota not recorded");
    if (!config_.seed) out.push_back("seed not recorded");
    if (!has_mutant_manifest()) {
        out.push_back("mutants.json missing");
        return out;
    }
    const json mj = read_manifest_file("mutants.json", json::object());
    std::vector<std::string> mutant_ids;
    for (const json& e : mj.value("mutants", json::array())) {
        const std::string id = e.value("id", std::string());
        mutant_ids.push_back(id);
        const auto [program, name] = split_mutant_id(id);
        if (!fs::exists(dir_ / "mutants" / program / (name + ".py"), ec)) out.push_back("mutant file missing: " + id);
    }
    if (!at_least(target, Phase::Summarized)) return out;

    const auto index = summary_index();
    const SummaryStore store = summaries();
    auto need = [&](const std::string& subject) {
        const auto it = index.find(subject);
        if (it == index.end() || !fs::exists(store.path_for(it->second), ec))
            out.push_back("summary missing for " + subject);
    };
    for (const std::string& id : program_ids_) need(id);
    for (const std::string& id : mutant_ids) need(id);
    if (!at_least(target, Phase::Reconciled)) return out;

    for (const std::string& id : mutant_ids) {
        const auto [program, name] = split_mutant_id(id);
        if (!fs::exists(dir_ / "reconciled" / program / (name + ".json"), ec))
            out.push_back("mutant not reconciled: " + id);
    }
    if (!at_least(target, Phase::Reported)) return out;

    if (!fs::exists(report_dir() / "report.md", ec)) out.push_back("report/report.md missing");
    return out;
}

bool CampaignStore::advance(Phase target) {
    require_writable();
    if (at_least(phase_, target)) return false;
    const auto missing = gaps(target);
    if (!missing.empty()) {
        std::string msg = "cannot advance to " + std::string(to_string(target)) + ": " + missing.front();
        if (missing.size() > 1) msg += " (and " + std::to_string(missing.size() - 1) + " more)";
        throw IntegrityError(msg, missing);
    }
    phase_ = target;
    write_manifest();
    return true;
}

// ---------------------------------------------------------------------------
// Integrity

IntegrityReport CampaignStore::integrity_check() const {
    IntegrityReport report;
    auto finding = [&](std::string kind, std::string ref, std::string detail) {
        report.findings.push_back({std::move(kind), std::move(ref), std::move(detail)});
    };
    std::error_code ec;

    // Programs
    std::map<std::string, std::string> program_sources;
    std::map<std::string, Program> program_by_id;
    json pj;
    try {
        pj = fsutil::read_json(dir_ / "programs.json");
    } catch (const IoError& e) {
        finding("corrupt_file", "programs.json", e.what());
    }
    std::set<std::string> listed;
    for (const json& e : pj.value("programs", json::array())) {
        const std::string id = e.value("id", std::string());
        listed.insert(id);
        ++report.artifacts_checked;
        const fs::path f = dir_ / "programs" / (id + ".py");
        if (!fs::exists(f, ec)) {
            finding("dangling_reference", id, "program file missing");
            continue;
        }
        Program p;
        try {
            p = e.get<Program>();
        } catch (const json::exception& ex) {
            finding("corrupt_file", "programs.json", ex.what());
            continue;
        }
        p.source_text = fsutil::read_file(f);
        if (digest::sha256_hex(p.source_text) != e.value("source_sha256", std::string()))
            finding("digest_mismatch", id, "program source differs from its recorded digest");
        program_sources[id] = p.source_text;
        program_by_id[id] = std::move(p);
    }
    if (std::vector<std::string>(listed.begin(), listed.end()) != program_ids_)
        finding("manifest_mismatch", "campaign.json", "program list differs from programs.json");

    // Mutants
    std::map<std::string, std::string> mutant_sources;
    json mj = json::object();
    if (has_mutant_manifest()) {
        try {
            mj = fsutil::read_json(dir_ / "mutants.json");
        } catch (const IoError& e) {
            finding("corrupt_file", "mutants.json", e.what());
        }
    }
    for (const json& e : mj.value("mutants", json::array())) {
        ++report.artifacts_checked;
        Mutant m;
        try {
            m = mutant_from_json(e);
            split_mutant_id(m.id);
        } catch (const std::exception& ex) {
            finding("corrupt_file", "mutants.json", ex.what());
            continue;
        }
        const auto [program, name] = split_mutant_id(m.id);
        const auto src = program_sources.find(m.program_id);
        if (src == program_sources.end() || program != m.program_id) {
            finding("dangling_reference", m.id, "mutant references missing program " + m.program_id);
            continue;
        }
        const fs::path f = dir_ / "mutants" / program / (name + ".py");
        if (!fs::exists(f, ec)) {
            finding("dangling_reference", m.id, "mutant file missing");
            continue;
        }
        m.mutated_source = fsutil::read_file(f);
        for (const std::string& problem : check_mutant(program_by_id.at(m.program_id), m)) finding("mutant_invalid", m.id, problem);
        mutant_sources[m.id] = m.mutated_source;
    }

    // Summaries
    std::map<std::string, std::string> index;
    try {
        index = summary_index();
    } catch (const StoreError& e) {
        finding("corrupt_file", "summaries.json", e.what());
    }
    const SummaryStore store = summaries();
    for (const auto& [subject, key] : index) {
        ++report.artifacts_checked;
        std::string code;
        if (auto it = program_sources.find(subject); it != program_sources.end())
            code = it->second;
        else if (auto mt = mutant_sources.find(subject); mt != mutant_sources.end())
            code = mt->second;
        else {
            finding("dangling_reference", subject, "summary index names an unknown subject");
            continue;
        }
        const fs::path f = store.path_for(key);
        if (!fs::exists(f, ec)) {
            finding("dangling_reference", subject, "summary file missing: summaries/" + key + ".json");
            continue;
        }
        json raw;
        SummaryRecord r;
        try {
            raw = fsutil::read_json(f);
            r = summary_from_json(raw);
        } catch (const std::exception& ex) {
            finding("corrupt_file", "summaries/" + key + ".json", ex.what());
            continue;
        }
        if (r.cache_key != key)
            finding("cache_key_mismatch", subject, "record key " + r.cache_key + " filed under " + key);
        else if (r.prompt_text != build_prompt(code) || cache_key(r.model_id, r.prompt_text, code) != key)
            finding("cache_key_mismatch", subject, "cache key does not match the subject's code");
        else if (raw.value("content_digest", std::string()) != content_digest(r))
            finding("cache_key_mismatch", subject, "summary text does not match its recorded digest");
        if (r.status != SummaryStatus::Ok) finding("dangling_reference", subject, "index points at a failed record");
    }

    // Verdicts
    auto summarized = [&](const std::string& mutant_id) {
        const auto m = mutant_sources.find(mutant_id);
        if (m == mutant_sources.end()) return false;
        for (const std::string& subject : {mutant_id, split_mutant_id(mutant_id).first}) {
            const auto it = index.find(subject);
            if (it == index.end() || !fs::exists(store.path_for(it->second), ec)) return false;
        }
        return true;
    };
    for (const std::string& rater : raters()) {
        for (const auto& [id, path] : mutant_files(dir_ / "verdicts" / rater)) {
            ++report.artifacts_checked;
            const std::string ref = "verdicts/" + rater + "/" + id;
            Verdict v;
            try {
                v = verdict_from_json(fsutil::read_json(path));
                validate(v);
            } catch (const std::exception& ex) {
                finding("corrupt_file", ref, ex.what());
                continue;
            }
            if (v.rater_id != rater || v.mutant_id != id)
                finding("misfiled", ref, "verdict content names " + v.rater_id + ":" + v.mutant_id);
            if (!mutant_sources.count(id))
                finding("dangling_reference", ref, "verdict references unknown mutant");
            else if (!summarized(id))
                finding("dangling_reference", ref, "verdict without both summaries");
        }
    }
    for (const auto& [id, path] : mutant_files(dir_ / "reconciled")) {
        ++report.artifacts_checked;
        const std::string ref = "reconciled/" + id;
        try {
            const ReconciledVerdict r = reconciled_from_json(fsutil::read_json(path));
            if (r.mutant_id != id) finding("misfiled", ref, "content names " + r.mutant_id);
        } catch (const std::exception& ex) {
            finding("corrupt_file", ref, ex.what());
            continue;
        }
        if (!mutant_sources.count(id)) finding("dangling_reference", ref, "reconciled verdict for unknown mutant");
    }

    // Phase claims
    try {
        for (const std::string& gap : gaps(phase_)) finding("phase_gap", std::string(to_string(phase_)), gap);
    } catch (const Error& e) {
        finding("phase_gap", std::string(to_string(phase_)), e.what());
    }
    return report;
}

}  // namespace mutsum
