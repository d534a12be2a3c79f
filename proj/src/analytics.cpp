#include "mutsum/analytics.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "mutsum/error.hpp"
#include "mutsum/fsutil.hpp"

namespace mutsum {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(Dimension d) noexcept {
    switch (d) {
        case Dimension::Complexity: return "complexity";
        case Dimension::MutationType: return "mutation_type";
        case Dimension::Location: return "location";
        case Dimension::Model: return "model";
    }
    return "model";
}

std::string RateGroup::formatted() const { return total > 0 ? stats::format_rate(positives, total) : "n/a"; }

stats::ContingencyTable RateBreakdown::table() const {
    stats::ContingencyTable t;
    for (const RateGroup& g : groups) {
        if (g.total == 0) continue;
        t.row_labels.push_back(g.label);
        t.counts.push_back({g.positives, g.negatives()});
    }
    return t;
}

namespace {

constexpr MutationType kTypeOrder[] = {MutationType::Statement, MutationType::Decision, MutationType::Value};
constexpr ComplexityCategory kComplexityOrder[] = {ComplexityCategory::SF, ComplexityCategory::SC,
                                                   ComplexityCategory::MC, ComplexityCategory::MT};

std::vector<std::string> models_of(const std::vector<VerdictRow>& rows) {
    std::vector<std::string> out;
    for (const VerdictRow& r : rows)
        if (std::find(out.begin(), out.end(), r.model) == out.end()) out.push_back(r.model);
    return out;
}

std::vector<std::string> group_labels(const std::vector<VerdictRow>& rows, Dimension d) {
    std::vector<std::string> out;
    switch (d) {
        case Dimension::Complexity:
            for (auto c : kComplexityOrder) out.emplace_back(to_string(c));
            break;
        case Dimension::MutationType:
            for (auto t : kTypeOrder) out.emplace_back(to_string(t));
            break;
        case Dimension::Location:
            for (auto b : kBuckets) out.emplace_back(to_string(b));
            break;
        case Dimension::Model: out = models_of(rows); break;
    }
    return out;
}

std::string group_of(const VerdictRow& r, Dimension d) {
    switch (d) {
        case Dimension::Complexity:
            if (!r.complexity) throw StatsError("row " + r.mutant_id + " has no complexity category");
            return std::string(to_string(*r.complexity));
        case Dimension::MutationType: return std::string(to_string(r.mutation_type));
        case Dimension::Location:
            if (!r.bucket) throw StatsError("row " + r.mutant_id + " has no location bucket");
            return std::string(to_string(*r.bucket));
        case Dimension::Model: return r.model;
    }
    return {};
}

bool dimension_available(const std::vector<VerdictRow>& rows, Dimension d) {
    for (const VerdictRow& r : rows) {
        if (d == Dimension::Complexity && !r.complexity) return false;
        if (d == Dimension::Location && !r.bucket) return false;
    }
    return true;
}

std::vector<VerdictRow> rows_for(const std::vector<VerdictRow>& rows, const std::string& model) {
    std::vector<VerdictRow> out;
    for (const VerdictRow& r : rows)
        if (r.model == model) out.push_back(r);
    return out;
}

}  // namespace

RateBreakdown detection_rates(const std::vector<VerdictRow>& rows, Dimension dimension) {
    RateBreakdown b;
    b.dimension = dimension;
    b.overall.label = "overall";
    for (const std::string& l : group_labels(rows, dimension)) b.groups.push_back({l, 0, 0});
    for (const VerdictRow& r : rows) {
        const std::string g = group_of(r, dimension);
        auto it = std::find_if(b.groups.begin(), b.groups.end(), [&](const RateGroup& x) { return x.label == g; });
        const bool pos = r.label == Label::Positive;
        it->positives += pos;
        it->total += 1;
        b.overall.positives += pos;
        b.overall.total += 1;
    }
    return b;
}

std::vector<VerdictRow> campaign_rows(const CampaignStore& store) {
    const std::string model = store.config().provider ? store.config().provider->model_id : "unknown";
    std::map<std::string, Program> programs;
    for (Program& p : store.programs()) programs.emplace(p.id, std::move(p));
    std::vector<VerdictRow> rows;
    std::vector<std::string> missing;
    for (const Mutant& m : store.mutants()) {
        const auto rec = store.reconciled(m.id);
        if (!rec) {
            missing.push_back(m.id);
            continue;
        }
        const Program& p = programs.at(m.program_id);
        VerdictRow r;
        r.mutant_id = m.id;
        r.model = model;
        r.mutation_type = m.mutation_type;
        r.complexity = p.complexity;
        r.bucket = m.bucket;
        r.loc = p.loc;
        r.label = rec->label;
        r.failure_mode = rec->failure_mode;
        r.recognized_as_bug = rec->recognized_as_bug;
        rows.push_back(std::move(r));
    }
    if (!missing.empty()) {
        std::string msg = std::to_string(missing.size()) + " mutant(s) not reconciled:";
        for (std::size_t i = 0; i < missing.size() && i < 5; ++i) msg += " " + missing[i];
        throw StatsError(msg);
    }
    return rows;
}

std::vector<VerdictRow> load_verdict_fixture(const fs::path& file) {
    std::ifstream in(file);
    if (!in) throw FixtureError("cannot read verdict fixture " + file.string());
    std::vector<VerdictRow> rows;
    std::set<std::pair<std::string, std::string>> seen;
    std::string line;
    for (std::size_t n = 1; std::getline(in, line); ++n) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const std::string where = file.string() + ":" + std::to_string(n) + ": ";
        try {
            const json j = json::parse(line);
            VerdictRow r;
            r.mutant_id = j.at("mutant_id").get<std::string>();
            r.model = j.at("model").get<std::string>();
            r.mutation_type = parse_mutation_type(j.at("mutation_type").get<std::string>());
            r.label = parse_label(j.at("label").get<std::string>());
            if (j.contains("complexity") && !j["complexity"].is_null())
                r.complexity = parse_complexity(j["complexity"].get<std::string>());
            if (j.contains("bucket") && !j["bucket"].is_null()) r.bucket = parse_bucket(j["bucket"].get<std::string>());
            if (j.contains("loc") && !j["loc"].is_null()) r.loc = j["loc"].get<std::size_t>();
            if (j.contains("failure_mode") && !j["failure_mode"].is_null())
                r.failure_mode = parse_failure_mode(j["failure_mode"].get<std::string>());
            r.recognized_as_bug = j.value("recognized_as_bug", false);
            validate(Verdict{r.mutant_id, "fixture", r.label, r.failure_mode, r.recognized_as_bug, "", "", {}});
            if (!seen.insert({r.model, r.mutant_id}).second)
                throw FixtureError("duplicate verdict for " + r.model + " " + r.mutant_id);
            rows.push_back(std::move(r));
        } catch (const FixtureError& e) {
            throw FixtureError(where + e.what());
        } catch (const std::exception& e) {
            throw FixtureError(where + e.what());
        }
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Report

namespace {

constexpr Dimension kTestedDimensions[] = {Dimension::Complexity, Dimension::MutationType, Dimension::Location};

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
    return out + "\"";
}

std::string csv_line(const std::vector<std::string>& fields) {
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) out += (i ? "," : "") + csv_field(fields[i]);
    return out + "\n";
}

std::string md_row(const std::vector<std::string>& cells) {
    std::string out = "|";
    for (const std::string& c : cells) out += " " + c + " |";
    return out + "\n";
}

std::string md_table(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
    std::string out = md_row(header) + "|";
    for (std::size_t i = 0; i < header.size(); ++i) out += "---|";
    out += "\n";
    for (const auto& r : rows) out += md_row(r);
    return out;
}

std::string title_of(Dimension d) {
    switch (d) {
        case Dimension::Complexity: return "complexity category";
        case Dimension::MutationType: return "mutation type";
        case Dimension::Location: return "mutation location";
        case Dimension::Model: return "model";
    }
    return "";
}

std::vector<std::string> rate_cells(const RateGroup& g) {
    return {g.label, std::to_string(g.positives), std::to_string(g.negatives()), std::to_string(g.total),
            g.formatted()};
}

struct StatLine {
    std::string model;
    std::string test;
    std::string dimension;
    std::optional<stats::StatResult> result;
    std::string note;

    std::vector<std::string> cells() const {
        if (!result) return {model, test, dimension, "", "", "", "", "", "", note};
        const auto& r = *result;
        return {model,
                test,
                dimension,
                stats::format_fixed(r.statistic, 4),
                r.df ? stats::format_fixed(*r.df, 0) : "",
                stats::format_p(r.p_value),
                r.effect_name,
                r.effect_size ? stats::format_fixed(*r.effect_size, 4) : "",
                std::to_string(r.n),
                note};
    }
};

StatLine chi_square_line(const std::string& model, const RateBreakdown& b) {
    StatLine s{model, "chi-square", std::string(to_string(b.dimension)), std::nullopt, ""};
    const auto table = b.table();
    if (table.counts.size() < 2) {
        s.note = "fewer than two non-empty groups";
        return s;
    }
    try {
        s.result = stats::chi_square(table);
    } catch (const StatsError& e) {
        s.note = e.what();
    }
    return s;
}

StatLine loc_line(const std::string& model, const std::vector<VerdictRow>& rows) {
    StatLine s{model, "mann-whitney-u", "loc (positive vs negative)", std::nullopt, ""};
    std::vector<double> pos, neg;
    for (const VerdictRow& r : rows) {
        if (!r.loc) {
            s.note = "loc not available";
            return s;
        }
        (r.label == Label::Positive ? pos : neg).push_back(static_cast<double>(*r.loc));
    }
    if (pos.empty() || neg.empty()) {
        s.note = "needs both positive and negative verdicts";
        return s;
    }
    s.result = stats::mann_whitney_u(pos, neg);
    return s;
}

json figure(Dimension d, const std::vector<std::pair<std::string, RateBreakdown>>& per_model) {
    json models = json::array();
    for (const auto& [model, b] : per_model) {
        json groups = json::array(), pos = json::array(), neg = json::array();
        for (const RateGroup& g : b.groups) {
            groups.push_back(g.label);
            pos.push_back(g.positives);
            neg.push_back(g.negatives());
        }
        models.push_back({{"model", model},
                          {"groups", groups},
                          {"series", json::array({{{"name", "positive"}, {"values", pos}},
                                                  {{"name", "negative"}, {"values", neg}}})}});
    }
    return json{{"dimension", to_string(d)}, {"models", models}};
}

}  // namespace

ReportSummary emit_report(const ReportInput& input, const fs::path& out_dir) {
    std::map<std::string, std::string> files;  // relative path -> content
    const auto models = models_of(input.rows);
    const std::vector<std::string> rate_header{"model", "group", "positive", "negative", "total", "rate"};

    std::ostringstream md;
    md << "# Mutation detection report: " << input.title << "\n\n";
    md << input.rows.size() << " reconciled verdict(s) across " << models.size() << " model(s).\n";

    std::vector<StatLine> stat_lines;
    std::string failure_csv = csv_line({"model", "failure_mode", "count", "share_of_negatives"});
    std::string bug_csv = csv_line({"model", "positives", "recognized_as_bug", "share"});

    for (Dimension d : kTestedDimensions) {
        if (!dimension_available(input.rows, d)) continue;
        std::string csv = csv_line(rate_header);
        std::vector<std::pair<std::string, RateBreakdown>> per_model;
        for (const std::string& m : models) {
            const RateBreakdown b = detection_rates(rows_for(input.rows, m), d);
            for (const RateGroup& g : b.groups) {
                auto cells = rate_cells(g);
                cells.insert(cells.begin(), m);
                csv += csv_line(cells);
            }
            auto cells = rate_cells(b.overall);
            cells.insert(cells.begin(), m);
            csv += csv_line(cells);
            per_model.emplace_back(m, b);
        }
        files["tables/" + std::string(to_string(d)) + ".csv"] = csv;
        files["figures/" + std::string(to_string(d)) + ".json"] = figure(d, per_model).dump(2) + "\n";
    }

    {
        const RateBreakdown b = detection_rates(input.rows, Dimension::Model);
        std::string csv = csv_line({"model", "positive", "negative", "total", "rate"});
        for (const RateGroup& g : b.groups) csv += csv_line(rate_cells(g));
        files["tables/model.csv"] = csv;
        files["figures/model.json"] = figure(Dimension::Model, {{"all", b}}).dump(2) + "\n";
    }

    for (const std::string& m : models) {
        const auto rows = rows_for(input.rows, m);
        const RateBreakdown overall = detection_rates(rows, Dimension::MutationType);
        md << "\n## Model " << m << "\n\n";
        md << "Detected " << overall.overall.positives << " of " << overall.overall.total << " mutations ("
           << overall.overall.formatted() << ").\n";

        for (Dimension d : kTestedDimensions) {
            md << "\n### Detection by " << title_of(d) << "\n\n";
            if (!dimension_available(rows, d)) {
                md << "Not available for this data set.\n";
                continue;
            }
            const RateBreakdown b = detection_rates(rows, d);
            std::vector<std::vector<std::string>> t;
            for (const RateGroup& g : b.groups) t.push_back(rate_cells(g));
            t.push_back(rate_cells(b.overall));
            md << md_table({"Group", "Positive", "Negative", "Total", "Rate"}, t);
            stat_lines.push_back(chi_square_line(m, b));
        }
        stat_lines.push_back(loc_line(m, rows));

        md << "\n### Statistical tests\n\n";
        std::vector<std::vector<std::string>> t;
        for (const StatLine& s : stat_lines)
            if (s.model == m) {
                auto c = s.cells();
                t.push_back(std::vector<std::string>(c.begin() + 1, c.end()));
            }
        md << md_table({"Test", "Dimension", "Statistic", "df", "p", "Effect", "Effect size", "n", "Note"}, t);

        std::int64_t negatives = 0, abstract = 0, original = 0, positives = 0, bugs = 0;
        for (const VerdictRow& r : rows) {
            if (r.label == Label::Positive) {
                ++positives;
                bugs += r.recognized_as_bug;
                continue;
            }
            ++negatives;
            if (r.failure_mode == FailureMode::TooAbstract) ++abstract;
            if (r.failure_mode == FailureMode::DescribesOriginal) ++original;
        }
        md << "\n### Failure modes\n\n";
        if (negatives == 0) {
            md << "No negative verdicts.\n";
        } else {
            const std::vector<std::pair<std::string, std::int64_t>> modes{
                {"too-abstract", abstract}, {"describes-original", original}, {"untagged", negatives - abstract - original}};
            std::vector<std::vector<std::string>> ft;
            for (const auto& [name, count] : modes) {
                failure_csv += csv_line({m, name, std::to_string(count), stats::format_rate(count, negatives)});
                ft.push_back({name, std::to_string(count), stats::format_rate(count, negatives)});
            }
            md << md_table({"Failure mode", "Count", "Share of negatives"}, ft);
        }
        const std::string share = positives > 0 ? stats::format_rate(bugs, positives) : "n/a";
        bug_csv += csv_line({m, std::to_string(positives), std::to_string(bugs), share});
        md << "\n### Recognized as bug\n\n"
           << bugs << " of " << positives << " positive verdicts (" << share
           << ") describe the mutation as an error.\n";
    }

    if (models.size() >= 2) {
        const std::string& first = models.front();
        const std::string& last = models.back();
        std::vector<std::string> header{"mutation_type"};
        header.insert(header.end(), models.begin(), models.end());
        header.push_back("improvement");
        std::string csv = csv_line(header);
        std::vector<std::vector<std::string>> t;
        std::map<std::string, RateBreakdown> by_model;
        for (const std::string& m : models) by_model[m] = detection_rates(rows_for(input.rows, m), Dimension::MutationType);
        for (std::size_t i = 0; i <= std::size(kTypeOrder); ++i) {
            auto pick = [&](const RateBreakdown& b) { return i < std::size(kTypeOrder) ? b.groups[i] : b.overall; };
            std::vector<std::string> row{pick(by_model[first]).label};
            for (const std::string& m : models) row.push_back(pick(by_model[m]).formatted());
            const RateGroup a = pick(by_model[first]), b = pick(by_model[last]);
            row.push_back(a.total > 0 && b.total > 0 ? stats::format_pp(b.positives, b.total, a.positives, a.total)
                                                     : "n/a");
            csv += csv_line(row);
            t.push_back(row);
        }
        files["tables/model_comparison.csv"] = csv;
        header[0] = "Mutation type";
        header.back() = "Improvement";
        md << "\n## Model comparison\n\n" << md_table(header, t);
        stat_lines.push_back(chi_square_line("all", detection_rates(input.rows, Dimension::Model)));
    }

    if (input.agreement) {
        const AgreementResult& a = *input.agreement;
        const auto& c = a.confusion;
        const std::string pct = stats::format_rate(c[0][0] + c[1][1], a.n_items);
        files["tables/agreement.csv"] =
            csv_line({"rater_a", "rater_b", "n_items", "percent_agreement", "kappa", "pos_pos", "pos_neg", "neg_pos",
                      "neg_neg"}) +
            csv_line({a.rater_a, a.rater_b, std::to_string(a.n_items), pct, stats::format_fixed(a.kappa, 4),
                      std::to_string(c[0][0]), std::to_string(c[0][1]), std::to_string(c[1][0]),
                      std::to_string(c[1][1])});
        md << "\n## Inter-rater agreement\n\n"
           << a.rater_a << " and " << a.rater_b << " agree on " << (c[0][0] + c[1][1]) << " of " << a.n_items
           << " shared items (" << pct << "), Cohen's kappa " << stats::format_fixed(a.kappa, 4) << ".\n";
    }

    std::string stat_csv =
        csv_line({"model", "test", "dimension", "statistic", "df", "p_value", "effect", "effect_size", "n", "note"});
    for (const StatLine& s : stat_lines) stat_csv += csv_line(s.cells());
    files["tables/statistics.csv"] = stat_csv;
    files["tables/failure_modes.csv"] = failure_csv;
    files["tables/recognized_as_bug.csv"] = bug_csv;
    files["report.md"] = md.str();

    ReportSummary out;
    for (const auto& [rel, content] : files) {
        out.written += fsutil::atomic_write(out_dir / rel, content);
        out.files.emplace_back(rel);
    }
    return out;
}

ReportSummary emit_campaign_report(CampaignStore& store) {
    if (static_cast<int>(store.phase()) < static_cast<int>(Phase::Reconciled))
        throw PhaseError("report needs a reconciled campaign (phase is " + std::string(to_string(store.phase())) + ")");
    ReportInput input;
    input.title = store.id();
    input.rows = campaign_rows(store);
    const auto raters = store.raters();
    if (raters.size() >= 2) {
        try {
            input.agreement = agreement(store, raters[0], raters[1]);
        } catch (const StatsError&) {
        } catch (const ReviewError&) {
        }
    }
    ReportSummary out = emit_report(input, store.report_dir());
    store.advance(Phase::Reported);
    return out;
}

}  // namespace mutsum
