#include "mahowald/invariants.hpp"

#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <future>
#include <sstream>

using namespace mahowald;

namespace {

std::string bundled_text()
{
    std::ifstream in(MAHOWALD_DATA_FILE);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const Database& bundled()
{
    static Database db = load_database_file(MAHOWALD_DATA_FILE);
    return db;
}

std::string replace_once(std::string text, const std::string& from, const std::string& to)
{
    size_t pos = text.find(from);
    REQUIRE(pos != std::string::npos);
    return text.replace(pos, from.size(), to);
}

}  // namespace

TEST_CASE("algebraic invariant routes")
{
    const Database& db = bundled();

    MalgResult cartan = m_alg(db, "h_1 h_4");
    CHECK(cartan.primary() == "h_2 h_5");
    CHECK(cartan.route == "cartan");
    CHECK(cartan.indeterminacy.empty());

    MalgResult sq = m_alg(db, "h_1");
    CHECK(sq.primary() == "h_2");
    CHECK(sq.route == "sq0");

    MalgResult table = m_alg(db, "h_1 P^2 h_1");
    CHECK(table.primary() == "Delta^2 h_2^2");
    CHECK(table.route == "table");
    REQUIRE(table.indeterminacy.size() == 1);
    CHECK(table.indeterminacy.front() == "h_0^2 h_5 i");

    // no table fact, no Sq^0 fact, no recorded factorization
    CHECK_THROWS_AS(m_alg(db, "h_0^2 g"), data_error);
}

TEST_CASE("Jones bound")
{
    const Database& db = bundled();
    CHECK(jones_bound(db, "eta").value == 2);
    CHECK(jones_bound(db, "iota").value == 0);
    CHECK(jones_bound(db, "eta_4").value == 32);
    CHECK_THROWS_AS(jones_bound(db, "missing"), data_error);
}

TEST_CASE("Theorem 3.4 classification")
{
    const Database& db = bundled();

    Thm34Result c = classify_thm34(db, "P h_1", m_alg(db, "P h_1").coset);
    CHECK(c.case_ == 'c');
    REQUIRE(c.homotopy_value.size() == 1);
    CHECK(c.homotopy_value.front() == "nu*kappabar");

    Thm34Result a = classify_thm34(db, "h_1 h_4", m_alg(db, "h_1 h_4").coset);
    CHECK(a.case_ == 'a');
    REQUIRE(a.bound.has_value());
    CHECK(a.bound->kind == Bound::thm34_upper);
    CHECK(a.bound->value == 33);

    Thm34Result b = classify_thm34(db, "P^2 h_2", m_alg(db, "P^2 h_2").coset);
    CHECK(b.case_ == 'b');
    REQUIRE(b.bound.has_value());
    CHECK(b.bound->kind == Bound::thm34_lower);
    CHECK(b.bound->value == 53);

    Thm34Result unknown = classify_thm34(db, "h_2 h_4", m_alg(db, "h_2 h_4").coset);
    CHECK(unknown.case_ == '?');

    CHECK_THROWS_AS(classify_thm34(db, "h_1", {}), data_error);
}

TEST_CASE("filtered invariant chains")
{
    const Database& db = bundled();

    FilteredChain eta4 = filtered_steps(db, "eta_4");
    REQUIRE(eta4.steps.size() == 2);
    CHECK(eta4.steps[0].k == 2);
    CHECK(eta4.steps[0].value == "h_2 h_5");
    CHECK(eta4.steps[1].k == 4);
    CHECK(eta4.steps[1].value == "p");

    FilteredChain nsb = filtered_steps(db, "nu*sigmabar");
    REQUIRE(nsb.steps.size() == 2);
    CHECK(nsb.steps[0].k == 4);
    CHECK(nsb.steps[0].value == "h_3 c_2");
    CHECK(nsb.steps[1].k == 5);
    CHECK(nsb.steps[1].value == "h_2 g_2");

    FilteredChain emu = filtered_steps(db, "eta*mu_17");
    REQUIRE(emu.steps.size() == 2);
    CHECK(emu.steps[0].k == 10);
    CHECK(emu.steps[0].value == "Delta^2 h_2^2");
    CHECK(emu.steps[1].k == 11);
    CHECK(emu.steps[1].value == "h_0 P M");

    // strictly increasing filtration with matching window shifts
    for (const char* name : {"eta_4", "nu*sigmabar", "eta*mu_17", "sigma", "sigmabar"}) {
        FilteredChain ch = filtered_steps(db, name);
        for (size_t i = 1; i < ch.steps.size(); ++i) {
            CHECK(ch.steps[i].k > ch.steps[i - 1].k);
            CHECK(db.ext(ch.steps[i].value).stem() == db.ext(ch.steps[i - 1].value).stem() - 1);
            CHECK(ch.steps[i].window_top - ch.steps[i].window_bottom == 1);
        }
    }
}

TEST_CASE("Cartan analysis of factored elements")
{
    const Database& db = bundled();

    // eta * mu_17: product of the invariants is recorded zero
    CartanResult r1 = cartan_analysis(db, "eta*mu_17", "eta", "mu_17", resolve(db, "eta"),
                                      resolve(db, "mu_17"));
    REQUIRE(r1.bounds.size() == 1);
    CHECK(r1.bounds.front().kind == Bound::cartan_lower);
    CHECK(r1.bounds.front().value == 52);

    // eta * eta: nu^2 is nonzero and survives the bottom cell of P_{-5}
    CartanResult r2 =
        cartan_analysis(db, "eta^2", "eta", "eta", resolve(db, "eta"), resolve(db, "eta"));
    REQUIRE(r2.product_value.has_value());
    CHECK(*r2.product_value == "nu^2");

    // 4{P^2 h_2} = 2 * 2{P^2 h_2}: the hidden eta-extension places the product
    CartanResult r3 = cartan_analysis(db, "4pi(P^2 h_2)", "2", "2pi(P^2 h_2)", resolve(db, "2"),
                                      resolve(db, "2pi(P^2 h_2)"));
    REQUIRE(r3.product_value.has_value());
    CHECK(*r3.product_value == "pi(P^6 c_0)");

    CHECK_THROWS_AS(cartan_analysis(db, "eta^2", "eta", "nu", resolve(db, "eta"),
                                    resolve(db, "nu")),
                    data_error);
}

TEST_CASE("resolution of table entries")
{
    const Database& db = bundled();

    MahowaldRecord eta = resolve(db, "eta");
    CHECK(eta.determined);
    REQUIRE(eta.value.size() == 1);
    CHECK(eta.value.front() == "nu");

    MahowaldRecord eta4 = resolve(db, "eta_4");
    CHECK(eta4.determined);
    REQUIRE(eta4.value.size() == 1);
    CHECK(eta4.value.front() == "pi(Delta h_1 h_3)");
    CHECK(eta4.lower == 32);
    CHECK(eta4.upper == 33);

    MahowaldRecord two = resolve(db, "2");
    CHECK(two.determined);
    CHECK(two.value.front() == "eta");

    // nu_4 stays open: the engine can bound it (the determined invariant of
    // 2nu_4 caps the stem at 38) but cannot pick a value
    MahowaldRecord nu4 = resolve(db, "nu_4");
    CHECK(!nu4.determined);
    CHECK(nu4.lower == 36);
    CHECK(nu4.upper == 38);

    MahowaldRecord zeta = resolve(db, "pi(P^2 h_2)");
    CHECK(!zeta.determined);
    CHECK(zeta.lower == 53);

    CHECK_THROWS_AS(resolve(db, "not_an_element"), data_error);
}

TEST_CASE("verify_table matches every bundled row")
{
    TableReport report = verify_table(bundled());
    CHECK(report.ok());
    CHECK(report.rows.size() == 61);
    int undetermined = 0;
    for (const RowReport& r : report.rows) {
        CHECK(r.outcome != RowReport::mismatch);
        CHECK(r.outcome != RowReport::coverage_gap);
        if (r.outcome == RowReport::undetermined_ok)
            ++undetermined;
    }
    CHECK(undetermined == 5);
}

TEST_CASE("traces replay mechanically for every table row")
{
    const Database& db = bundled();
    for (const TableRow& row : db.table1) {
        MahowaldRecord rec = resolve(db, row.element);
        CHECK_NOTHROW(replay_trace(db, rec.trace));
    }
}

TEST_CASE("replay refuses traces that contradict the database")
{
    const Database& db = bundled();
    MahowaldRecord rec = resolve(db, "eta_4");
    REQUIRE(!rec.trace.steps.empty());
    ProofTrace tampered = rec.trace;
    for (TraceStep& s : tampered.steps)
        if (s.rule == "Conclusion")
            s.output = "pi(q)";
    CHECK_THROWS_AS(replay_trace(db, tampered), data_error);

    ProofTrace tampered2 = rec.trace;
    for (TraceStep& s : tampered2.steps)
        if (s.rule == "Jones")
            s.output = "lower=30";
    CHECK_THROWS_AS(replay_trace(db, tampered2), data_error);
}

TEST_CASE("resolve calls for distinct elements run in parallel over a shared database")
{
    const Database& db = bundled();
    std::vector<std::string> names;
    for (const TableRow& row : db.table1)
        names.push_back(row.element);

    std::vector<std::future<MahowaldRecord>> futures;
    for (const std::string& name : names)
        futures.push_back(
            std::async(std::launch::async, [&db, name] { return resolve(db, name); }));

    for (size_t i = 0; i < names.size(); ++i) {
        MahowaldRecord parallel = futures[i].get();
        MahowaldRecord serial = resolve(db, names[i]);
        CHECK(parallel.determined == serial.determined);
        CHECK(parallel.value == serial.value);
        CHECK(parallel.trace.steps.size() == serial.trace.steps.size());
    }
}

TEST_CASE("determined invariants respect the Jones bound")
{
    const Database& db = bundled();
    for (const TableRow& row : db.table1) {
        MahowaldRecord rec = resolve(db, row.element);
        if (rec.determined)
            CHECK(db.element(rec.value.front()).stem >= 2 * db.element(row.element).stem);
    }
}

TEST_CASE("contradictory bounds raise instead of resolving")
{
    // redirect the algebraic invariant of h_0^2 P^2 h_2 to a class that
    // supports a differential in a stem below the Jones bound: the upper
    // bound collapses under the lower one and the engine must say so
    std::string text = replace_once(bundled_text(),
                                    "malg input=\"h_0^2 P^2 h_2\" output=\"h_1 Delta^2 h_1 h_3\"",
                                    "malg input=\"h_0^2 P^2 h_2\" output=\"h_2 h_5\"");
    Database corrupted = load_database(text);
    CHECK_THROWS_WITH_AS(resolve(corrupted, "4pi(P^2 h_2)"),
                         doctest::Contains("contradictory bounds"), data_error);
}

TEST_CASE("corrupting a product fact flips verify_table off green")
{
    // nu * theta_4 = pi(p) is the differential killing the bottom cell of
    // P_{-18}; erasing it leaves two live candidates for M(eta_4)
    std::string text = replace_once(bundled_text(),
                                    "product left=nu right=theta_4 result=\"pi(p)\" kind=hidden_nu",
                                    "product left=nu right=theta_4 result=zero kind=ordinary");
    Database corrupted = load_database(text);
    TableReport report = verify_table(corrupted);
    CHECK(!report.ok());
    bool eta4_flagged = false;
    for (const RowReport& r : report.rows)
        if (r.row.element == "eta_4")
            eta4_flagged = r.outcome == RowReport::mismatch || r.outcome == RowReport::coverage_gap;
    CHECK(eta4_flagged);
}
