#pragma once

#include "mahowald/ahss.hpp"
#include "mahowald/db.hpp"

#include <optional>
#include <string>
#include <vector>

namespace mahowald {

struct Bound {
    enum Kind { jones_lower, cartan_lower, cartan_upper_adjacent, thm34_upper, thm34_lower };
    Kind kind = jones_lower;
    int value = 0;  // a stem
    std::string justification;

    bool is_lower() const
    {
        return kind == jones_lower || kind == cartan_lower || kind == thm34_lower;
    }
};

const char* bound_kind_name(Bound::Kind k);

/* One replayable inference. `inputs` are "key=value" strings naming database
 * facts or outputs of earlier steps; replay_trace re-derives `output` from
 * them and fails loudly on any drift. */
struct TraceStep {
    std::string rule;
    std::vector<std::string> inputs;
    std::string output;
    std::string citation;
};

struct ProofTrace {
    std::vector<TraceStep> steps;
};

struct MalgResult {
    std::vector<std::string> coset;  // primary value first, then indeterminacy
    std::vector<std::string> indeterminacy;
    std::string route;  // "sq0", "cartan", "table"
    std::vector<TraceStep> steps;

    const std::string& primary() const { return coset.front(); }
};

/* Algebraic Mahowald invariant of x: a recorded table fact, the recorded
 * Sq^0 value, or the Cartan product Sq^0(a)Sq^0(b) over a recorded
 * factorization x = ab. Throws data_error when no route applies. */
MalgResult m_alg(const Database& db, const std::string& x);

Bound jones_bound(const Database& db, const std::string& alpha);

struct Thm34Result {
    char case_ = '?';  // 'c' determined, 'a' upper, 'b' killed (cases b/d), '?' inconclusive
    std::optional<Bound> bound;
    std::vector<std::string> homotopy_value;  // case c: elements detected by permanent members
    std::string note;
    std::vector<TraceStep> steps;
};

Thm34Result classify_thm34(const Database& db, const std::string& u,
                           const std::vector<std::string>& malg_coset);

struct FilteredInvariantStep {
    int k = 0;
    std::string value;       // ext class name
    std::string provenance;  // "initial_via_Sq0" or "stepped_via_differential"
    long long window_top = 0, window_bottom = 0;  // bracket cells for stepped entries
};

struct FilteredChain {
    std::vector<FilteredInvariantStep> steps;
    std::string note;  // why the chain stopped
    std::vector<TraceStep> trace;
};

FilteredChain filtered_steps(const Database& db, const std::string& alpha);

struct MahowaldRecord {
    std::string element;
    bool determined = false;
    std::vector<std::string> value;  // singleton when determined; ambiguity set otherwise
    std::vector<std::string> m_alg_coset;
    std::vector<std::string> m_alg_indet;
    std::string m_alg_route;
    std::vector<Bound> bounds;
    std::optional<int> lower, upper;
    std::vector<FilteredInvariantStep> filtered;
    ProofTrace trace;
    std::vector<std::string> notes;
};

struct CartanResult {
    std::vector<Bound> bounds;
    std::optional<std::string> product_value;  // set when Thm 3.12(1) places the product
    std::string value_beta, value_gamma;       // representatives behind product_value
    bool inconclusive = false;
    std::vector<TraceStep> steps;
};

/* Theorem 3.12 analysis of alpha = beta * gamma given the factors' records:
 * places M(beta)M(gamma) inside M(alpha) when the product is a nonzero fact
 * surviving bottom-cell inclusion, else emits the stem lower bound. */
CartanResult cartan_analysis(const Database& db, const std::string& alpha, const std::string& beta,
                             const std::string& gamma, const MahowaldRecord& m_beta,
                             const MahowaldRecord& m_gamma);

MahowaldRecord resolve(const Database& db, const std::string& alpha);

struct RowReport {
    TableRow row;
    enum Outcome { match, mismatch, undetermined_ok, coverage_gap } outcome = coverage_gap;
    std::string computed_malg;
    std::string computed_m;
    std::string detail;
};

struct TableReport {
    std::vector<RowReport> rows;
    int mismatches = 0;
    int coverage_gaps = 0;
    bool ok() const { return mismatches == 0 && coverage_gaps == 0; }
};

TableReport verify_table(const Database& db);

/* Re-executes every step of a trace against the database; throws data_error
 * on the first step whose output cannot be re-derived from its inputs. */
void replay_trace(const Database& db, const ProofTrace& trace);

}  // namespace mahowald
