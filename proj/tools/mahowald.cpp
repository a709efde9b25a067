#include "mahowald/ahss.hpp"
#include "mahowald/db.hpp"
#include "mahowald/invariants.hpp"
#include "mahowald/stunted.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

using nlohmann::json;
using namespace mahowald;

namespace {

std::string locate_data(const std::string& flag_value, const char* argv0)
{
    if (!flag_value.empty())
        return flag_value;
    if (const char* env = std::getenv("MAHOWALD_DATA"))
        return env;
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::path exe(argv0 ? argv0 : "");
    fs::path beside = exe.parent_path() / ".." / "data" / "stems.facts";
    if (fs::exists(beside, ec))
        return beside.string();
    return "data/stems.facts";
}

std::string join(const std::vector<std::string>& v, const std::string& sep = ", ")
{
    std::string s;
    for (size_t i = 0; i < v.size(); ++i)
        s += (i ? sep : "") + v[i];
    return s;
}

void print_trace(std::ostream& out, const ProofTrace& trace)
{
    int i = 0;
    for (const TraceStep& s : trace.steps) {
        out << "  " << ++i << ". [" << s.rule << "] ";
        if (!s.inputs.empty())
            out << join(s.inputs, " ") << " ";
        out << "=> " << s.output << "\n";
        if (!s.citation.empty())
            out << "       " << s.citation << "\n";
    }
}

json trace_json(const ProofTrace& trace)
{
    json steps = json::array();
    for (const TraceStep& s : trace.steps)
        steps.push_back({{"rule", s.rule},
                         {"inputs", s.inputs},
                         {"output", s.output},
                         {"citation", s.citation}});
    return steps;
}

json record_json(const MahowaldRecord& rec)
{
    json bounds = json::array();
    for (const Bound& b : rec.bounds)
        bounds.push_back({{"kind", bound_kind_name(b.kind)},
                         {"value", b.value},
                         {"justification", b.justification}});
    json filtered = json::array();
    for (const FilteredInvariantStep& s : rec.filtered)
        filtered.push_back({{"k", s.k}, {"value", s.value}, {"provenance", s.provenance}});
    json j{{"schema", 1},
           {"element", rec.element},
           {"status", rec.determined ? "determined" : "undetermined"},
           {"value", rec.value},
           {"m_alg", rec.m_alg_coset},
           {"m_alg_indeterminacy", rec.m_alg_indet},
           {"m_alg_route", rec.m_alg_route},
           {"bounds", bounds},
           {"filtered", filtered},
           {"notes", rec.notes},
           {"trace", trace_json(rec.trace)}};
    if (rec.lower)
        j["lower"] = *rec.lower;
    if (rec.upper)
        j["upper"] = *rec.upper;
    return j;
}

void print_record(std::ostream& out, const MahowaldRecord& rec, bool with_trace)
{
    out << "M(" << rec.element << "): "
        << (rec.determined ? "determined" : "undetermined") << "\n";
    if (!rec.value.empty())
        out << "  value: " << join(rec.value) << "\n";
    if (!rec.m_alg_coset.empty()) {
        out << "  algebraic invariant (" << rec.m_alg_route << "): " << join(rec.m_alg_coset);
        out << "\n";
    }
    if (rec.lower)
        out << "  lower bound: " << *rec.lower << "\n";
    if (rec.upper)
        out << "  upper bound: " << *rec.upper << "\n";
    for (const FilteredInvariantStep& s : rec.filtered)
        out << "  filtered invariant: " << s.value << " at k=" << s.k << " (" << s.provenance
            << ")\n";
    for (const std::string& n : rec.notes)
        out << "  note: " << n << "\n";
    if (with_trace) {
        out << "  trace:\n";
        print_trace(std::cout, rec.trace);
    }
}

int run_complex(const Database&, long long bottom, long long top, const std::string& format)
{
    StuntedComplex cx = build_complex(bottom, top);
    if (format == "json") {
        json atts = json::array();
        for (const Attachment& a : cx.attachments)
            atts.push_back({{"source", a.source}, {"target", a.target}, {"label", label_name(a.label)}});
        json j{{"schema", 1}, {"bottom", cx.bottom}, {"top", cx.top}, {"attachments", atts}};
        std::cout << j.dump(2) << "\n";
        return 0;
    }
    std::cout << "P^" << top << "_" << bottom << ": cells " << bottom << ".." << top << "\n";
    for (const Attachment& a : cx.attachments)
        std::cout << "  " << a.source << " -> " << a.target << "  " << label_name(a.label) << "\n";
    return 0;
}

int run_ahss(const Database& db, long long bottom, long long top, int degree, int floor,
             const std::string& format)
{
    AHSSChart chart = build_chart(build_complex(bottom, top), degree, db);
    SurvivorReport rep = survivors(chart, db, floor);
    if (format == "json") {
        json entries = json::array();
        for (const AHSSEntry& e : chart.entries)
            entries.push_back({{"element", e.element}, {"cell", e.cell}, {"degree", e.total_degree}});
        json diffs = json::array();
        for (const AHSSDifferential& d : chart.differentials)
            diffs.push_back({{"r", d.r},
                             {"source", d.source.element},
                             {"source_cell", d.source.cell},
                             {"target", d.target.element},
                             {"target_cell", d.target.cell},
                             {"justification",
                              d.justification.kind == AHSSJustification::hidden_extension
                                  ? "hidden extension"
                                  : "product"}});
        json surv = json::array();
        for (const AHSSEntry& e : rep.survivors)
            surv.push_back({{"element", e.element}, {"cell", e.cell}});
        json inc = json::array();
        for (const AHSSEntry& e : rep.inconclusive)
            inc.push_back({{"element", e.element}, {"cell", e.cell}});
        json holes = json::array();
        for (const CoverageHole& h : chart.holes)
            holes.push_back({{"cell", h.cell}, {"degree", h.degree}});
        json j{{"schema", 1},     {"bottom", bottom},       {"top", top},
               {"degree", degree}, {"entries", entries},     {"differentials", diffs},
               {"survivors", surv}, {"inconclusive", inc},   {"coverage_holes", holes}};
        std::cout << j.dump(2) << "\n";
        return 0;
    }
    std::cout << "AHSS of P^" << top << "_" << bottom << " in total degree " << degree << "\n";
    std::cout << "entries:\n";
    for (const AHSSEntry& e : chart.entries)
        std::cout << "  " << e.element << "[" << e.cell << "]  degree " << e.total_degree << "\n";
    std::cout << "differentials:\n";
    for (const AHSSDifferential& d : chart.differentials) {
        std::cout << "  d_" << d.r << "(" << d.source.element << "[" << d.source.cell
                  << "]) = " << d.target.element << "[" << d.target.cell << "]  ("
                  << (d.justification.kind == AHSSJustification::hidden_extension
                          ? "hidden extension"
                          : "product")
                  << ")\n";
    }
    for (const CoverageHole& h : chart.holes)
        std::cout << "coverage: no generator list for cell " << h.cell << " in degree " << h.degree
                  << "\n";
    std::cout << "survivors (degree " << degree << (floor >= 0 ? ", filtration > " + std::to_string(floor) : "")
              << "):\n";
    for (const AHSSEntry& e : rep.survivors)
        std::cout << "  " << e.element << "[" << e.cell << "]\n";
    for (const AHSSEntry& e : rep.inconclusive)
        std::cout << "  " << e.element << "[" << e.cell << "]  (inconclusive)\n";
    return 0;
}

int run_verify(const Database& db, const std::string& format)
{
    TableReport report = verify_table(db);
    if (format == "json") {
        json rows = json::array();
        for (const RowReport& r : report.rows) {
            const char* outcome = r.outcome == RowReport::match            ? "match"
                                  : r.outcome == RowReport::mismatch       ? "mismatch"
                                  : r.outcome == RowReport::undetermined_ok ? "undetermined"
                                                                            : "coverage";
            rows.push_back({{"element", r.row.element},
                            {"claimed_malg", r.row.claimed_malg},
                            {"claimed_m", r.row.claimed_m},
                            {"proof", r.row.proof},
                            {"outcome", outcome},
                            {"computed_malg", r.computed_malg},
                            {"computed_m", r.computed_m},
                            {"detail", r.detail}});
        }
        json j{{"schema", 1},
               {"rows", rows},
               {"mismatches", report.mismatches},
               {"coverage_gaps", report.coverage_gaps}};
        std::cout << j.dump(2) << "\n";
    }
    else {
        for (const RowReport& r : report.rows) {
            const char* outcome = r.outcome == RowReport::match            ? "match       "
                                  : r.outcome == RowReport::mismatch       ? "MISMATCH    "
                                  : r.outcome == RowReport::undetermined_ok ? "undetermined"
                                                                            : "COVERAGE    ";
            std::cout << outcome << " " << r.row.element << " -> " << r.computed_m << " ["
                      << r.row.proof << "]";
            if (!r.detail.empty())
                std::cout << "  (" << r.detail << ")";
            std::cout << "\n";
        }
        std::cout << report.rows.size() << " rows, " << report.mismatches << " mismatches, "
                  << report.coverage_gaps << " coverage gaps\n";
    }
    if (report.mismatches > 0)
        return 1;
    if (report.coverage_gaps > 0)
        return 2;
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Mahowald invariant computation engine over a stable-stem fact database"};
    app.require_subcommand(1);
    app.fallthrough();  // --data/--format may follow the subcommand

    std::string data_path;
    std::string format = "text";
    app.add_option("--data", data_path, "fact file (default: $MAHOWALD_DATA or bundled data)");
    app.add_option("--format", format, "output format: text or json")
        ->check(CLI::IsMember({"text", "json"}));

    auto* ingest = app.add_subcommand("ingest", "load and validate a fact file");

    auto* complex_cmd = app.add_subcommand("complex", "print a stunted complex");
    long long bottom = 0, top = 0;
    complex_cmd->add_option("--bottom", bottom, "bottom cell")->required();
    complex_cmd->add_option("--top", top, "top cell")->required();

    auto* ahss_cmd = app.add_subcommand("ahss", "build an AHSS chart in one total degree");
    long long a_bottom = 0, a_top = 0;
    int degree = 0, floor = -1;
    ahss_cmd->add_option("--bottom", a_bottom, "bottom cell")->required();
    ahss_cmd->add_option("--top", a_top, "top cell")->required();
    ahss_cmd->add_option("--degree", degree, "total degree")->required();
    ahss_cmd->add_option("--filtration-floor", floor, "survivor filtration floor (strict)");

    auto* malg_cmd = app.add_subcommand("malg", "algebraic Mahowald invariant of an Ext class");
    std::string malg_name;
    malg_cmd->add_option("name", malg_name, "Ext class name")->required();

    auto* resolve_cmd = app.add_subcommand("resolve", "resolve the Mahowald invariant of an element");
    std::string resolve_name;
    bool with_trace = false;
    resolve_cmd->add_option("name", resolve_name, "element name")->required();
    resolve_cmd->add_flag("--trace", with_trace, "print the proof trace");

    auto* verify_cmd = app.add_subcommand("verify-table", "recompute and check every table row");

    auto* trace_cmd = app.add_subcommand("trace", "resolve, print the trace, and replay it");
    std::string trace_name;
    trace_cmd->add_option("name", trace_name, "element name")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        Database db = load_database_file(locate_data(data_path, argv[0]));

        if (ingest->parsed()) {
            if (format == "json") {
                json j{{"schema", 1},
                       {"elements", db.elements.size()},
                       {"ext_classes", db.ext_classes.size()},
                       {"products", db.products.size()},
                       {"sq0", db.sq0.size()},
                       {"malg", db.malg.size()},
                       {"brackets", db.brackets.size()},
                       {"adams_differentials", db.adams_diffs.size()},
                       {"table_rows", db.table1.size()},
                       {"max_stem", db.max_stem}};
                std::cout << j.dump(2) << "\n";
            }
            else {
                std::cout << "ok: " << db.elements.size() << " elements, " << db.ext_classes.size()
                          << " ext classes, " << db.products.size() << " products, "
                          << db.sq0.size() << " sq0, " << db.malg.size() << " malg, "
                          << db.adams_diffs.size() << " differentials, " << db.table1.size()
                          << " table rows\n";
            }
            return 0;
        }
        if (complex_cmd->parsed())
            return run_complex(db, bottom, top, format);
        if (ahss_cmd->parsed())
            return run_ahss(db, a_bottom, a_top, degree, floor, format);
        if (malg_cmd->parsed()) {
            MalgResult r = m_alg(db, malg_name);
            if (format == "json") {
                json j{{"schema", 1},
                       {"input", malg_name},
                       {"coset", r.coset},
                       {"indeterminacy", r.indeterminacy},
                       {"route", r.route}};
                std::cout << j.dump(2) << "\n";
            }
            else {
                std::cout << "M_alg(" << malg_name << ") = " << join(r.coset) << "  [" << r.route
                          << "]\n";
            }
            return 0;
        }
        if (resolve_cmd->parsed()) {
            MahowaldRecord rec = resolve(db, resolve_name);
            if (format == "json")
                std::cout << record_json(rec).dump(2) << "\n";
            else
                print_record(std::cout, rec, with_trace);
            return 0;
        }
        if (verify_cmd->parsed())
            return run_verify(db, format);
        if (trace_cmd->parsed()) {
            MahowaldRecord rec = resolve(db, trace_name);
            print_record(std::cout, rec, true);
            replay_trace(db, rec.trace);
            std::cout << "trace replayed: ok\n";
            return 0;
        }
    }
    catch (const data_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
