#pragma once

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace mahowald {

/* Errors raised while ingesting or validating a fact file. `line` is the
 * 1-based source line when known, 0 otherwise. */
struct data_error : std::runtime_error {
    int line;
    explicit data_error(const std::string& msg, int line_ = 0)
        : std::runtime_error(line_ ? "line " + std::to_string(line_) + ": " + msg : msg), line(line_)
    {
    }
};

struct ExtStatus {
    enum Kind { unknown, permanent, killed_by, supports } kind = unknown;
    std::string partner;  // source of the killing differential / target of the supported one
    int page = 0;

    friend bool operator==(const ExtStatus&, const ExtStatus&) = default;
};

struct ExtClass {
    std::string name;
    int s = 0;
    int t = 0;
    ExtStatus status;

    int stem() const { return t - s; }
    friend bool operator==(const ExtClass&, const ExtClass&) = default;
};

struct HomotopyElement {
    std::string name;
    int stem = 0;
    int adams_filtration = 0;
    std::string detected_by;
    int order = 0;  // the 2-power order when recorded, 0 = unknown
    std::string notes;

    friend bool operator==(const HomotopyElement&, const HomotopyElement&) = default;
};

struct ProductFact {
    enum Kind { ordinary, hidden_eta, hidden_nu, hidden_sigma, hidden_two };
    std::string left;
    std::string right;
    std::string result;  // element name or "zero"
    Kind kind = ordinary;

    bool is_zero() const { return result == "zero"; }
    friend bool operator==(const ProductFact&, const ProductFact&) = default;
};

struct Sq0Fact {
    std::string input;
    std::string output;
    std::vector<std::string> indeterminacy;

    friend bool operator==(const Sq0Fact&, const Sq0Fact&) = default;
};

/* Algebraic Mahowald invariant recorded from Bruner's tables, for inputs
 * whose invariant is not reachable by Sq^0 or the Cartan formula. */
struct MalgFact {
    std::string input;
    std::string output;
    std::vector<std::string> indeterminacy;

    friend bool operator==(const MalgFact&, const MalgFact&) = default;
};

struct ExtProductFact {
    std::string left;
    std::string right;
    std::string result;  // ext class name or "zero"

    friend bool operator==(const ExtProductFact&, const ExtProductFact&) = default;
};

/* <P^top_bottom>(input) = output for the two-cell complex P^top_bottom;
 * with bottom odd this is h_0-multiplication one filtration up. */
struct BracketFact {
    long long top = 0;
    long long bottom = 0;
    std::string input;
    std::string output;

    friend bool operator==(const BracketFact&, const BracketFact&) = default;
};

struct AdamsDifferential {
    int r = 0;
    std::string source;
    std::string target;

    friend bool operator==(const AdamsDifferential&, const AdamsDifferential&) = default;
};

struct TableRow {
    std::string element;
    std::string claimed_malg;  // "-" when no algebraic invariant is on record
    std::string claimed_m;     // element name or "undetermined"
    std::string proof;         // method tag: cited, direct, exclusion, open

    friend bool operator==(const TableRow&, const TableRow&) = default;
};

struct ProductLookup {
    enum State { nonzero, zero, unknown } state = unknown;
    std::string result;                    // set when nonzero
    const ProductFact* fact = nullptr;     // recorded fact justifying the answer, if any
    bool by_order = false;                 // 2*x = 0 derived from order(x) = 2
};

class Database {
public:
    std::map<std::string, HomotopyElement> elements;
    std::map<std::string, ExtClass> ext_classes;
    std::vector<ProductFact> products;
    std::vector<ExtProductFact> ext_products;
    std::vector<Sq0Fact> sq0;
    std::vector<MalgFact> malg;
    std::vector<BracketFact> brackets;
    std::vector<AdamsDifferential> adams_diffs;
    std::vector<std::string> no_eta_ext;  // elements with no eta-extension from one stem below
    std::vector<TableRow> table1;
    std::set<int> covered_stems;  // stems whose generator list is declared complete
    int max_stem = 0;             // largest covered stem

    bool stem_covered(int stem) const { return covered_stems.count(stem) != 0; }

    const HomotopyElement& element(const std::string& name) const;
    const ExtClass& ext(const std::string& name) const;
    bool has_element(const std::string& name) const { return elements.count(name) != 0; }
    bool has_ext(const std::string& name) const { return ext_classes.count(name) != 0; }

    /* Recorded product of two elements, commutativity applied. Falls back to
     * the order field for products by "2"; otherwise strictly recorded facts. */
    ProductLookup product_of(const std::string& a, const std::string& b) const;

    std::optional<ExtProductFact> ext_product_of(const std::string& a, const std::string& b) const;
    std::vector<ExtProductFact> factorizations_of(const std::string& result) const;
    std::vector<ProductFact> element_factorizations_of(const std::string& result) const;

    const Sq0Fact* sq0_of(const std::string& input) const;
    const MalgFact* malg_of(const std::string& input) const;
    const BracketFact* bracket_by_output(const std::string& output) const;
    bool has_no_eta_ext(const std::string& element) const;

    ExtStatus permanent_status(const std::string& ext_name) const;

    std::vector<HomotopyElement> elements_in_window(int stem_min, int stem_max,
                                                    int filtration_floor) const;
    std::vector<HomotopyElement> elements_in_stem(int stem) const;
    std::vector<std::string> elements_detected_by(const std::string& ext_name) const;

    /* Canonical text form; load_database(serialize(db)) == db. */
    std::string serialize() const;

    friend bool operator==(const Database&, const Database&) = default;
};

Database load_database(const std::string& source);
Database load_database_file(const std::string& path);

}  // namespace mahowald
