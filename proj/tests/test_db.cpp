#include "mahowald/db.hpp"

#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <sstream>

using namespace mahowald;

namespace {

const Database& bundled()
{
    static Database db = load_database_file(MAHOWALD_DATA_FILE);
    return db;
}

bool window_contains(const std::vector<HomotopyElement>& v, const std::string& name)
{
    return std::any_of(v.begin(), v.end(),
                       [&](const HomotopyElement& e) { return e.name == name; });
}

}  // namespace

TEST_CASE("single records parse with the stated degrees")
{
    Database db = load_database(
        "coverage stems=0-2\n"
        "ext name=h_1 s=1 t=2 status=permanent\n"
        "element name=eta stem=1 filt=1 detected=h_1 order=2\n");
    CHECK(db.ext("h_1").stem() == 1);
    CHECK(db.element("eta").detected_by == "h_1");
    CHECK(db.element("eta").order == 2);
}

TEST_CASE("parse errors carry line numbers")
{
    CHECK_THROWS_WITH_AS(load_database("ext name=x s=1\n"), "line 1: ext record missing field 't'",
                         data_error);
    try {
        load_database("ext name=h_1 s=1 t=2\nbogus a=b\n");
        FAIL("expected parse error");
    }
    catch (const data_error& e) {
        CHECK(e.line == 2);
    }
    CHECK_THROWS_AS(load_database("ext name=\"h_1 s=1 t=2\n"), data_error);
    CHECK_THROWS_AS(load_database("ext name=h_1 s=1 t=2 t=3\n"), data_error);
}

TEST_CASE("dangling references are rejected by name")
{
    try {
        load_database("coverage stems=0-1\n"
                      "ext name=h_1 s=1 t=2\n"
                      "element name=eta stem=1 filt=1 detected=h_9\n");
        FAIL("expected dangling reference error");
    }
    catch (const data_error& e) {
        CHECK(std::string(e.what()).find("h_9") != std::string::npos);
    }
}

TEST_CASE("invariant violations are rejected at ingestion")
{
    // element stem disagrees with the detecting class
    CHECK_THROWS_AS(load_database("coverage stems=0-3\n"
                                  "ext name=h_1 s=1 t=2\n"
                                  "element name=eta stem=3 filt=1 detected=h_1\n"),
                    data_error);
    // product violating stem additivity
    CHECK_THROWS_AS(load_database("coverage stems=0-9\n"
                                  "ext name=h_1 s=1 t=2\n"
                                  "ext name=h_2 s=1 t=4\n"
                                  "element name=eta stem=1 filt=1 detected=h_1\n"
                                  "element name=nu stem=3 filt=1 detected=h_2\n"
                                  "product left=eta right=eta result=nu kind=ordinary\n"),
                    data_error);
    // Sq^0 violating the (s,t) -> (s,2t) law
    CHECK_THROWS_AS(load_database("ext name=h_1 s=1 t=2\n"
                                  "ext name=h_3 s=1 t=8\n"
                                  "sq0 input=h_1 output=h_3\n"),
                    data_error);
    // Adams differential with wrong bidegree shift
    CHECK_THROWS_AS(load_database("ext name=a s=1 t=10\n"
                                  "ext name=b s=2 t=11\n"
                                  "adams_diff r=2 source=a target=b\n"),
                    data_error);
    // duplicate names
    CHECK_THROWS_AS(load_database("ext name=h_1 s=1 t=2\next name=h_1 s=1 t=2\n"), data_error);
    // ordinary product dropping filtration
    CHECK_THROWS_AS(load_database("coverage stems=0-9\n"
                                  "ext name=h_1 s=1 t=2\n"
                                  "ext name=lo s=1 t=3\n"
                                  "element name=eta stem=1 filt=1 detected=h_1\n"
                                  "element name=x stem=2 filt=1 detected=lo\n"
                                  "product left=eta right=eta result=x kind=ordinary\n"),
                    data_error);
}

TEST_CASE("bundled database loads and serializes to itself")
{
    const Database& db = bundled();
    CHECK(db.elements.size() > 100);
    CHECK(db.ext_classes.size() > 100);
    Database again = load_database(db.serialize());
    CHECK(again == db);
}

TEST_CASE("referential closure and arithmetic laws hold across the bundle")
{
    const Database& db = bundled();
    for (const ProductFact& p : db.products) {
        CHECK(db.has_element(p.left));
        CHECK(db.has_element(p.right));
        if (!p.is_zero()) {
            CHECK(db.has_element(p.result));
            CHECK(db.element(p.result).stem == db.element(p.left).stem + db.element(p.right).stem);
            if (p.kind == ProductFact::ordinary)
                CHECK(db.element(p.result).adams_filtration >=
                      db.element(p.left).adams_filtration + db.element(p.right).adams_filtration);
        }
    }
    for (const Sq0Fact& q : db.sq0) {
        CHECK(db.ext(q.output).s == db.ext(q.input).s);
        CHECK(db.ext(q.output).t == 2 * db.ext(q.input).t);
    }
    for (const auto& [name, el] : db.elements) {
        CHECK(db.ext(el.detected_by).stem() == el.stem);
        CHECK(db.ext(el.detected_by).s == el.adams_filtration);
    }
    for (const AdamsDifferential& d : db.adams_diffs) {
        CHECK(db.ext(d.target).s == db.ext(d.source).s + d.r);
        CHECK(db.ext(d.target).stem() == db.ext(d.source).stem() - 1);
    }
}

TEST_CASE("window queries are exact and deterministically ordered")
{
    const Database& db = bundled();
    auto w = db.elements_in_window(32, 33, 4);
    CHECK(window_contains(w, "pi(Delta h_1 h_3)"));
    CHECK(!window_contains(w, "kappa_1"));   // filtration 4 is not > 4
    CHECK(!window_contains(w, "pi(p)"));     // filtration 4
    CHECK(db.elements_in_window(0, 0, 100).empty());
    CHECK(window_contains(db.elements_in_window(52, 53, 11), "pi(Delta h_1 d_0^2)"));
    for (size_t i = 1; i < w.size(); ++i) {
        auto key = [](const HomotopyElement& e) {
            return std::make_tuple(e.stem, e.adams_filtration, e.name);
        };
        CHECK(key(w[i - 1]) < key(w[i]));
    }
    CHECK_THROWS_AS(db.elements_in_window(5, 3, 0), data_error);
}

TEST_CASE("product lookup applies commutativity and never invents")
{
    const Database& db = bundled();
    auto r = db.product_of("eta", "eta");
    REQUIRE(r.state == ProductLookup::nonzero);
    CHECK(r.result == "eta^2");

    auto hidden = db.product_of("theta_4", "nu");  // reversed order on purpose
    REQUIRE(hidden.state == ProductLookup::nonzero);
    CHECK(hidden.result == "pi(p)");
    CHECK(hidden.fact->kind == ProductFact::hidden_nu);

    auto hidden2 = db.product_of("eta", "pi(P^4 h_0^2 i)");
    REQUIRE(hidden2.state == ProductLookup::nonzero);
    CHECK(hidden2.result == "pi(P^6 c_0)");

    // 2x = 0 follows from order 2; anything else unrecorded stays unknown
    CHECK(db.product_of("2", "eta").state == ProductLookup::zero);
    CHECK(db.product_of("2", "eta").by_order);
    CHECK(db.product_of("sigma", "sigma^2").state == ProductLookup::unknown);
    CHECK_THROWS_AS(db.product_of("eta", "no_such_element"), data_error);
}

TEST_CASE("permanent status is served verbatim")
{
    const Database& db = bundled();
    ExtStatus s1 = db.permanent_status("h_2 h_5");
    CHECK(s1.kind == ExtStatus::supports);
    CHECK(s1.partner == "h_0 p");
    CHECK(s1.page == 3);

    ExtStatus s2 = db.permanent_status("h_5 P d_0");
    CHECK(s2.kind == ExtStatus::killed_by);
    CHECK(s2.partner == "Delta_1 h_1^2");
    CHECK(s2.page == 3);

    CHECK(db.permanent_status("h_1").kind == ExtStatus::permanent);
    CHECK(db.permanent_status("h_3 h_5").kind == ExtStatus::unknown);
    CHECK_THROWS_AS(db.permanent_status("nope"), data_error);
}

TEST_CASE("coverage declarations gate element stems")
{
    CHECK_THROWS_AS(load_database("coverage stems=0-3\n"
                                  "ext name=x s=1 t=8\n"
                                  "element name=sig stem=7 filt=1 detected=x\n"),
                    data_error);
    const Database& db = bundled();
    CHECK(db.stem_covered(33));
    CHECK(!db.stem_covered(43));
    CHECK(db.max_stem == 74);
}
