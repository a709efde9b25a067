#include "mahowald/invariants.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

namespace mahowald {

namespace {

std::string join(const std::vector<std::string>& v)
{
    std::string s;
    for (size_t i = 0; i < v.size(); ++i)
        s += (i ? "," : "") + v[i];
    return s;
}

std::string kv(const std::string& k, const std::string& v)
{
    return k + "=" + v;
}

std::string kv(const std::string& k, long long v)
{
    return k + "=" + std::to_string(v);
}

std::map<std::string, std::string> parse_inputs(const TraceStep& step)
{
    std::map<std::string, std::string> m;
    for (const std::string& s : step.inputs) {
        size_t eq = s.find('=');
        if (eq == std::string::npos)
            throw data_error("malformed trace input '" + s + "'");
        m[s.substr(0, eq)] = s.substr(eq + 1);
    }
    return m;
}

long long to_int(const std::string& s)
{
    return std::stoll(s);
}

std::string at_k(const std::string& name, int k)
{
    return name + " @ k=" + std::to_string(k);
}

}  // namespace

const char* bound_kind_name(Bound::Kind k)
{
    switch (k) {
    case Bound::jones_lower: return "jones_lower";
    case Bound::cartan_lower: return "cartan_lower";
    case Bound::cartan_upper_adjacent: return "cartan_upper_adjacent";
    case Bound::thm34_upper: return "thm34_upper";
    default: return "thm34_lower";
    }
}

MalgResult m_alg(const Database& db, const std::string& x)
{
    const ExtClass& in = db.ext(x);
    MalgResult res;

    if (const MalgFact* f = db.malg_of(x)) {
        res.coset.push_back(f->output);
        for (const std::string& ind : f->indeterminacy)
            res.coset.push_back(ind);
        res.indeterminacy = f->indeterminacy;
        res.route = "table";
        TraceStep step;
        step.rule = "Malg_table";
        step.inputs = {kv("x", x)};
        step.output = f->output;
        step.citation = "recorded algebraic invariant (Bruner's tables)";
        if (!f->indeterminacy.empty())
            step.citation += "; indeterminacy " + join(f->indeterminacy);
        res.steps.push_back(step);
        return res;
    }

    if (const Sq0Fact* f = db.sq0_of(x)) {
        res.coset.push_back(f->output);
        for (const std::string& ind : f->indeterminacy)
            res.coset.push_back(ind);
        res.indeterminacy = f->indeterminacy;
        res.route = "sq0";
        TraceStep step;
        step.rule = "Sq0";
        step.inputs = {kv("x", x)};
        step.output = f->output;
        step.citation = "Sq^0 lands in the algebraic invariant when nonzero";
        res.steps.push_back(step);
        return res;
    }

    // Cartan: x = ab with Sq^0 recorded on both factors and nonzero product.
    for (const ExtProductFact& fac : db.factorizations_of(x)) {
        const Sq0Fact* ql = db.sq0_of(fac.left);
        const Sq0Fact* qr = db.sq0_of(fac.right);
        if (!ql || !qr)
            continue;
        auto prod = db.ext_product_of(ql->output, qr->output);
        if (!prod || prod->result == "zero")
            continue;
        res.coset.push_back(prod->result);
        res.route = "cartan";
        TraceStep step;
        step.rule = "Cartan_alg";
        step.inputs = {kv("x", x), kv("left", fac.left), kv("right", fac.right),
                       kv("sq0_left", ql->output), kv("sq0_right", qr->output)};
        step.output = prod->result;
        step.citation = "Sq^0(ab) = Sq^0(a)Sq^0(b) when the product is nonzero";
        res.steps.push_back(step);
        return res;
    }

    throw data_error("no algebraic invariant route for '" + x + "' (s=" + std::to_string(in.s) +
                     ", t=" + std::to_string(in.t) + "): no table fact, no Sq^0 fact, no usable factorization");
}

Bound jones_bound(const Database& db, const std::string& alpha)
{
    const HomotopyElement& el = db.element(alpha);
    Bound b;
    b.kind = Bound::jones_lower;
    b.value = 2 * el.stem;
    b.justification = "|M(" + alpha + ")| >= 2|" + alpha + "| = " + std::to_string(b.value);
    return b;
}

Thm34Result classify_thm34(const Database& db, const std::string& u,
                           const std::vector<std::string>& malg_coset)
{
    if (malg_coset.empty())
        throw data_error("classify_thm34: empty coset for '" + u + "'");
    Thm34Result res;
    int stem = db.ext(malg_coset.front()).stem();

    bool any_permanent = false, any_killed = false, any_unknown = false;
    std::string permanent_member, killed_member;
    bool all_support = true;
    for (const std::string& name : malg_coset) {
        ExtStatus st = db.permanent_status(name);
        if (st.kind != ExtStatus::supports)
            all_support = false;
        if (st.kind == ExtStatus::permanent && !any_permanent) {
            any_permanent = true;
            permanent_member = name;
        }
        if (st.kind == ExtStatus::killed_by && !any_killed) {
            any_killed = true;
            killed_member = name;
        }
        if (st.kind == ExtStatus::unknown)
            any_unknown = true;
    }

    TraceStep step;
    step.inputs = {kv("u", u), kv("coset", join(malg_coset))};

    if (any_permanent) {
        res.case_ = 'c';
        res.homotopy_value = db.elements_detected_by(permanent_member);
        step.rule = "Thm3.4c";
        step.inputs = {kv("u", u), kv("member", permanent_member)};
        step.output = join(res.homotopy_value);
        step.citation = permanent_member + " is a nontrivial permanent cycle, so the homotopy "
                        "invariant is the coset it detects";
        if (res.homotopy_value.empty())
            res.note = "permanent member '" + permanent_member + "' detects no recorded element";
        res.steps.push_back(step);
        return res;
    }
    if (any_killed) {
        // Killed members are cycles, so the coset is not differential-supported;
        // cases (b)/(d) both push the invariant to stem >= k. Telling them apart
        // needs the existence of the comparison square, which is not recorded.
        res.case_ = 'b';
        Bound b;
        b.kind = Bound::thm34_lower;
        b.value = stem;
        b.justification = killed_member + " is killed by d_" +
                          std::to_string(db.permanent_status(killed_member).page) + "(" +
                          db.permanent_status(killed_member).partner + ")";
        res.bound = b;
        step.rule = "Thm3.4b";
        step.output = "lower=" + std::to_string(stem);
        step.citation = "killed algebraic invariant: cases (b)/(d), stem >= " + std::to_string(stem);
        res.steps.push_back(step);
        return res;
    }
    if (all_support) {
        res.case_ = 'a';
        Bound b;
        b.kind = Bound::thm34_upper;
        b.value = stem - 1;
        b.justification = "no member of {" + join(malg_coset) + "} is a permanent cycle";
        res.bound = b;
        step.rule = "Thm3.4a";
        step.output = "upper=" + std::to_string(stem - 1);
        step.citation = "the algebraic invariant supports a differential, so |M| < " +
                        std::to_string(stem);
        res.steps.push_back(step);
        return res;
    }
    res.case_ = '?';
    res.note = any_unknown ? "permanence of the algebraic invariant is not recorded"
                           : "mixed statuses in the algebraic invariant coset";
    return res;
}

FilteredChain filtered_steps(const Database& db, const std::string& alpha)
{
    FilteredChain chain;
    const HomotopyElement& el = db.element(alpha);

    MalgResult mr;
    try {
        mr = m_alg(db, el.detected_by);
    }
    catch (const data_error& e) {
        chain.note = std::string("no initial filtered invariant: ") + e.what();
        return chain;
    }

    const ExtClass& first = db.ext(mr.primary());
    if (first.s != el.adams_filtration) {
        chain.note = "initial value " + mr.primary() + " has filtration " + std::to_string(first.s) +
                     " != " + std::to_string(el.adams_filtration) +
                     ", so the k_1 = AF identification does not apply";
        return chain;
    }

    FilteredInvariantStep s0;
    s0.k = el.adams_filtration;
    s0.value = mr.primary();
    s0.provenance = "initial_via_Sq0";
    chain.steps.push_back(s0);
    {
        TraceStep t;
        t.rule = "Thm3.9_init";
        t.inputs = {kv("alpha", alpha), kv("detected", el.detected_by)};
        t.output = at_k(mr.primary(), s0.k);
        t.citation = "k_1 equals the Adams filtration of " + alpha +
                     " and the first filtered invariant detects the algebraic one";
        chain.trace.push_back(t);
    }

    while (true) {
        const std::string cur_value = chain.steps.back().value;
        const int cur_k = chain.steps.back().k;
        ExtStatus st = db.permanent_status(cur_value);
        if (st.kind == ExtStatus::permanent) {
            chain.note = cur_value + " is a permanent cycle; chain complete";
            break;
        }
        if (st.kind == ExtStatus::killed_by) {
            chain.note = cur_value + " is killed by d_" + std::to_string(st.page) + "(" + st.partner +
                         "); it cannot detect the invariant";
            break;
        }
        if (st.kind == ExtStatus::unknown) {
            chain.note = "status of " + cur_value + " is not recorded; chain stops";
            break;
        }
        const BracketFact* br = db.bracket_by_output(st.partner);
        if (!br) {
            chain.note = cur_value + " supports d_" + std::to_string(st.page) + " into " + st.partner +
                         " but no bracket fact applies; chain stops";
            break;
        }
        const ExtClass& next = db.ext(br->input);
        if (next.s <= cur_k)
            throw data_error("filtered chain for '" + alpha + "' is not strictly increasing at " +
                             br->input);
        FilteredInvariantStep s;
        s.k = next.s;
        s.value = br->input;
        s.provenance = "stepped_via_differential";
        s.window_top = br->top;
        s.window_bottom = br->bottom;
        chain.steps.push_back(s);
        TraceStep t;
        t.rule = "Thm3.8_step";
        t.inputs = {kv("prev", cur_value), kv("diff_target", st.partner), kv("bracket_top", br->top),
                    kv("bracket_bottom", br->bottom)};
        t.output = at_k(br->input, s.k);
        t.citation = "d_" + std::to_string(st.page) + "(" + cur_value + ") = " + st.partner +
                     " and <P^" + std::to_string(br->top) + "_" + std::to_string(br->bottom) + ">(" +
                     br->input + ") = " + br->output;
        chain.trace.push_back(t);
    }
    return chain;
}

namespace {

// Survival of one element on the bottom cell of P_{bottom} in the given
// total degree: the Cor 3.7(2) check and the Thm 3.12 bottom-cell condition.
struct BottomCheck {
    enum State { survives, dies, inconclusive } state = inconclusive;
    std::string detail;
    AHSSChart chart;
};

BottomCheck bottom_cell_check(const Database& db, const std::string& element, int degree)
{
    const HomotopyElement& el = db.element(element);
    long long cell = degree - el.stem;
    BottomCheck out;
    out.chart = build_chart(build_complex(cell, 0), degree, db);
    AHSSEntry entry{element, cell, degree};
    if (out.chart.is_differential_target(entry)) {
        out.state = BottomCheck::dies;
        for (const AHSSDifferential& d : out.chart.differentials)
            if (d.target == entry)
                out.detail = d.source.element + "[" + std::to_string(d.source.cell) + "] hits it by d_" +
                             std::to_string(d.r);
    }
    else if (out.chart.has_unknown_flag(entry)) {
        out.state = BottomCheck::inconclusive;
        out.detail = "survival depends on data outside coverage";
    }
    else {
        out.state = BottomCheck::survives;
    }
    return out;
}

}  // namespace

CartanResult cartan_analysis(const Database& db, const std::string& alpha, const std::string& beta,
                             const std::string& gamma, const MahowaldRecord& m_beta,
                             const MahowaldRecord& m_gamma)
{
    ProductLookup fac = db.product_of(beta, gamma);
    if (fac.state != ProductLookup::nonzero || fac.result != alpha)
        throw data_error("cartan_analysis: " + beta + " * " + gamma + " is not recorded as " + alpha);

    CartanResult res;
    const bool bd = m_beta.determined && !m_beta.value.empty();
    const bool gd = m_gamma.determined && !m_gamma.value.empty();

    auto lower_of = [&](const MahowaldRecord& r) -> std::optional<int> {
        if (r.determined && !r.value.empty())
            return db.element(r.value.front()).stem;
        return r.lower;
    };

    if (bd && gd) {
        const std::string& vb = m_beta.value.front();
        const std::string& vg = m_gamma.value.front();
        int sum = db.element(vb).stem + db.element(vg).stem;
        ProductLookup prod = db.product_of(vb, vg);
        if (prod.state == ProductLookup::nonzero) {
            int degree = db.element(alpha).stem - 1;
            BottomCheck bc = bottom_cell_check(db, prod.result, degree);
            if (bc.state == BottomCheck::survives) {
                res.product_value = prod.result;
                res.value_beta = vb;
                res.value_gamma = vg;
                TraceStep t;
                t.rule = "Thm3.12_product";
                t.inputs = {kv("beta_value", vb), kv("gamma_value", vg), kv("product", prod.result),
                            kv("bottom", degree - db.element(prod.result).stem), kv("degree", degree)};
                t.output = prod.result;
                t.citation = "M(" + beta + ")M(" + gamma + ") = " + prod.result +
                             " survives bottom-cell inclusion, so it lies in M(" + alpha + ")";
                res.steps.push_back(t);
                return res;
            }
            if (bc.state == BottomCheck::dies) {
                Bound b;
                b.kind = Bound::cartan_lower;
                b.value = sum + 1;
                b.justification = prod.result + " dies at the bottom cell (" + bc.detail +
                                  "), so M(" + alpha + ") lies strictly above stem " +
                                  std::to_string(sum);
                res.bounds.push_back(b);
                TraceStep t;
                t.rule = "Thm3.12_lower";
                t.inputs = {kv("beta_value", vb), kv("gamma_value", vg), kv("product", prod.result),
                            kv("mode", "product_dies")};
                t.output = "lower=" + std::to_string(sum + 1);
                t.citation = b.justification;
                res.steps.push_back(t);
                return res;
            }
            res.inconclusive = true;
        }
        else if (prod.state == ProductLookup::zero) {
            Bound b;
            b.kind = Bound::cartan_lower;
            b.value = sum + 1;
            b.justification = vb + " * " + vg + " = 0, so M(" + alpha +
                              ") lies strictly above stem " + std::to_string(sum);
            res.bounds.push_back(b);
            TraceStep t;
            t.rule = "Thm3.12_lower";
            t.inputs = {kv("beta_value", vb), kv("gamma_value", vg), kv("product", "zero"),
                        kv("mode", "product_zero")};
            t.output = "lower=" + std::to_string(sum + 1);
            t.citation = b.justification;
            res.steps.push_back(t);
            return res;
        }
        else {
            res.inconclusive = true;
        }
        // product unresolved: the stem sum still bounds from below
        Bound b;
        b.kind = Bound::cartan_lower;
        b.value = sum;
        b.justification = "|M(" + beta + ")| + |M(" + gamma + ")| = " + std::to_string(sum) +
                          " (product with " + alpha + " unresolved)";
        res.bounds.push_back(b);
        TraceStep t;
        t.rule = "Thm3.12_lower";
        t.inputs = {kv("beta_low", db.element(vb).stem), kv("gamma_low", db.element(vg).stem),
                    kv("mode", "sum")};
        t.output = "lower=" + std::to_string(sum);
        t.citation = b.justification;
        res.steps.push_back(t);
        return res;
    }

    auto lb = lower_of(m_beta), lg = lower_of(m_gamma);
    if (lb && lg) {
        Bound b;
        b.kind = Bound::cartan_lower;
        b.value = *lb + *lg;
        b.justification = "bound sum: |M(" + beta + ")| >= " + std::to_string(*lb) + ", |M(" + gamma +
                          ")| >= " + std::to_string(*lg);
        res.bounds.push_back(b);
        TraceStep t;
        t.rule = "Thm3.12_lower";
        t.inputs = {kv("beta_low", *lb), kv("gamma_low", *lg), kv("mode", "sum")};
        t.output = "lower=" + std::to_string(b.value);
        t.citation = b.justification;
        res.steps.push_back(t);
    }
    else {
        res.inconclusive = true;
    }
    return res;
}

namespace {

class Resolver {
public:
    explicit Resolver(const Database& db) : db_(db) {}

    MahowaldRecord resolve(const std::string& alpha)
    {
        auto it = memo_.find(alpha);
        if (it != memo_.end())
            return it->second;
        if (visiting_.count(alpha)) {
            // cycle guard: expose only the unconditional lower bound
            MahowaldRecord partial;
            partial.element = alpha;
            Bound j = jones_bound(db_, alpha);
            partial.bounds.push_back(j);
            partial.lower = j.value;
            partial.notes.push_back("partial record (cyclic factorization)");
            return partial;
        }
        visiting_.insert(alpha);
        MahowaldRecord rec = run(alpha);
        visiting_.erase(alpha);
        memo_.emplace(alpha, rec);
        return rec;
    }

private:
    const Database& db_;
    std::map<std::string, MahowaldRecord> memo_;
    std::set<std::string> visiting_;

    void push_bound(MahowaldRecord& rec, const Bound& b)
    {
        rec.bounds.push_back(b);
        if (b.is_lower())
            rec.lower = rec.lower ? std::max(*rec.lower, b.value) : b.value;
        else
            rec.upper = rec.upper ? std::min(*rec.upper, b.value) : b.value;
        if (rec.lower && rec.upper && *rec.lower > *rec.upper)
            throw data_error("contradictory bounds for M(" + rec.element + "): lower " +
                             std::to_string(*rec.lower) + " > upper " + std::to_string(*rec.upper) +
                             " (" + b.justification + ")");
    }

    void conclude(MahowaldRecord& rec, const std::string& value_element, const std::string& mode,
                  std::vector<std::string> extra = {})
    {
        const HomotopyElement& v = db_.element(value_element);
        if (rec.lower && v.stem < *rec.lower)
            throw data_error("value " + value_element + " of M(" + rec.element +
                             ") violates the lower bound " + std::to_string(*rec.lower));
        if (rec.upper && v.stem > *rec.upper)
            throw data_error("value " + value_element + " of M(" + rec.element +
                             ") violates the upper bound " + std::to_string(*rec.upper));
        int jones = 2 * db_.element(rec.element).stem;
        if (v.stem < jones)
            throw data_error("value " + value_element + " of M(" + rec.element +
                             ") violates the Jones bound " + std::to_string(jones));
        rec.determined = true;
        rec.value = {value_element};
        TraceStep t;
        t.rule = "Conclusion";
        t.inputs = {kv("alpha", rec.element), kv("mode", mode),
                    kv("low", rec.lower ? *rec.lower : jones),
                    kv("high", rec.upper ? *rec.upper : v.stem), kv("jones", jones)};
        for (std::string& e : extra)
            t.inputs.push_back(std::move(e));
        t.output = value_element;
        t.citation = value_element + " in M(" + rec.element + ")";
        rec.trace.steps.push_back(t);
    }

    // Upper bound for M(alpha) from its recorded double 2*alpha = delta,
    // using only the double's own algebraic data (no recursion).
    void upper_from_double(MahowaldRecord& rec, const std::string& delta)
    {
        const HomotopyElement& del = db_.element(delta);
        std::optional<int> dbl_upper;
        std::string how;
        try {
            MalgResult mr = m_alg(db_, del.detected_by);
            Thm34Result cls = classify_thm34(db_, del.detected_by, mr.coset);
            if (cls.case_ == 'c' && !cls.homotopy_value.empty()) {
                dbl_upper = db_.element(cls.homotopy_value.front()).stem;
                how = "M(" + delta + ") = " + cls.homotopy_value.front();
            }
            else if (cls.case_ == 'a' && cls.bound) {
                dbl_upper = cls.bound->value;
                how = "|M(" + delta + ")| <= " + std::to_string(cls.bound->value);
            }
        }
        catch (const data_error&) {
            return;
        }
        if (!dbl_upper)
            return;
        int drop = 1;
        std::string eta_note;
        if (how.rfind("M(" + delta + ") = ", 0) == 0) {
            std::string val = how.substr(("M(" + delta + ") = ").size());
            if (db_.has_no_eta_ext(val)) {
                drop = 2;
                eta_note = "; no eta-extension from stem " + std::to_string(*dbl_upper - 1) +
                           " reaches " + val;
            }
        }
        Bound b;
        b.kind = Bound::cartan_upper_adjacent;
        b.value = *dbl_upper - drop;
        b.justification = "|M(" + rec.element + ")| <= |M(2*" + rec.element + ")| - " +
                          std::to_string(drop) + ": " + how + eta_note;
        push_bound(rec, b);
        TraceStep t;
        t.rule = "Thm3.12_lower";
        t.inputs = {kv("double", delta), kv("double_upper", *dbl_upper), kv("drop", drop)};
        t.output = "upper=" + std::to_string(b.value);
        t.citation = b.justification;
        rec.trace.steps.push_back(t);
    }

    void emit_candidates_step(MahowaldRecord& rec, int low, int high, int floor,
                              const std::vector<HomotopyElement>& candidates)
    {
        std::vector<std::string> names;
        for (const HomotopyElement& c : candidates)
            names.push_back(c.name);
        TraceStep t;
        t.rule = "Candidates";
        t.inputs = {kv("low", low), kv("high", high), kv("floor", floor)};
        t.output = join(names);
        t.citation = "generators in stems " + std::to_string(low) + ".." + std::to_string(high) +
                     " with Adams filtration > " + std::to_string(floor);
        rec.trace.steps.push_back(t);
    }

    void emit_ahss_steps(MahowaldRecord& rec, const AHSSChart& chart,
                         const std::vector<AHSSEntry>& interesting)
    {
        for (const AHSSDifferential& d : chart.differentials) {
            bool relevant = false;
            for (const AHSSEntry& e : interesting)
                if (d.target == e || d.source == e)
                    relevant = true;
            if (!relevant)
                continue;
            TraceStep t;
            t.rule = "AHSS_exclusion";
            t.inputs = {kv("r", d.r), kv("source", d.source.element),
                        kv("source_cell", d.source.cell), kv("bottom", chart.complex.bottom),
                        kv("degree", chart.total_degree)};
            t.output = d.target.element + "[" + std::to_string(d.target.cell) + "]";
            t.citation = "d_" + std::to_string(d.r) + "(" + d.source.element + "[" +
                         std::to_string(d.source.cell) + "]) = " + t.output +
                         (d.justification.kind == AHSSJustification::hidden_extension
                              ? " (hidden extension)"
                              : " (product)");
            rec.trace.steps.push_back(t);
        }
    }

    MahowaldRecord run(const std::string& alpha)
    {
        MahowaldRecord rec;
        rec.element = alpha;
        const HomotopyElement& el = db_.element(alpha);
        const int degree = el.stem - 1;

        // algebraic invariant
        bool have_malg = false;
        try {
            MalgResult mr = m_alg(db_, el.detected_by);
            rec.m_alg_coset = mr.coset;
            rec.m_alg_indet = mr.indeterminacy;
            rec.m_alg_route = mr.route;
            for (TraceStep& s : mr.steps)
                rec.trace.steps.push_back(s);
            have_malg = true;
        }
        catch (const data_error& e) {
            rec.notes.push_back(e.what());
        }

        // filtered chain
        FilteredChain chain = filtered_steps(db_, alpha);
        rec.filtered = chain.steps;
        for (TraceStep& s : chain.trace)
            rec.trace.steps.push_back(s);
        if (!chain.note.empty())
            rec.notes.push_back(chain.note);
        const int floor =
            chain.steps.empty() ? el.adams_filtration - 1 : chain.steps.back().k;

        // bounds
        Bound jones = jones_bound(db_, alpha);
        push_bound(rec, jones);
        {
            TraceStep t;
            t.rule = "Jones";
            t.inputs = {kv("alpha", alpha), kv("stem", el.stem)};
            t.output = "lower=" + std::to_string(jones.value);
            t.citation = jones.justification;
            rec.trace.steps.push_back(t);
        }

        if (have_malg) {
            Thm34Result cls = classify_thm34(db_, el.detected_by, rec.m_alg_coset);
            for (TraceStep& s : cls.steps)
                rec.trace.steps.push_back(s);
            if (!cls.note.empty())
                rec.notes.push_back(cls.note);
            if (cls.case_ == 'c') {
                if (!cls.homotopy_value.empty()) {
                    rec.value = cls.homotopy_value;
                    conclude(rec, cls.homotopy_value.front(), "case_c");
                    return rec;
                }
                rec.notes.push_back("determination blocked: no element recorded for the permanent cycle");
                return rec;
            }
            if (cls.bound)
                push_bound(rec, *cls.bound);
        }

        // Theorem 3.12 over recorded factorizations
        for (const ProductFact& f : db_.element_factorizations_of(alpha)) {
            if (f.left == alpha || f.right == alpha || f.is_zero())
                continue;
            MahowaldRecord mb = resolve(f.left);
            MahowaldRecord mg = resolve(f.right);
            CartanResult cr = cartan_analysis(db_, alpha, f.left, f.right, mb, mg);
            for (TraceStep& s : cr.steps)
                rec.trace.steps.push_back(s);
            for (const Bound& b : cr.bounds)
                push_bound(rec, b);
            if (cr.inconclusive)
                rec.notes.push_back("Cartan product for " + f.left + " * " + f.right +
                                    " unresolved (missing product or coverage)");
            if (cr.product_value) {
                conclude(rec, *cr.product_value, "product",
                         {kv("beta_value", cr.value_beta), kv("gamma_value", cr.value_gamma)});
                return rec;
            }
        }
        for (const ProductFact& f : db_.products) {
            if (f.left == "2" && f.right == alpha && !f.is_zero())
                upper_from_double(rec, f.result);
        }

        if (!rec.upper) {
            rec.notes.push_back("no upper bound: candidate window is unbounded");
            return rec;
        }
        const int low = *rec.lower, high = *rec.upper;

        for (int s = low; s <= high; ++s)
            if (!db_.stem_covered(s)) {
                rec.notes.push_back("stem " + std::to_string(s) +
                                    " in the candidate window is outside database coverage");
                return rec;
            }

        // chief candidate: the last filtered value, when permanent
        std::string chief;
        if (!chain.steps.empty()) {
            const std::string& v = chain.steps.back().value;
            if (db_.permanent_status(v).kind == ExtStatus::permanent) {
                auto detected = db_.elements_detected_by(v);
                if (detected.size() == 1 && db_.element(detected.front()).stem >= low &&
                    db_.element(detected.front()).stem <= high)
                    chief = detected.front();
            }
        }

        long long bottom = degree - high;
        AHSSChart chart = build_chart(build_complex(bottom, 0), degree, db_);

        if (!chief.empty()) {
            const HomotopyElement& ch = db_.element(chief);
            AHSSEntry chief_entry{chief, degree - ch.stem, degree};
            BottomCheck bc;
            bc.state = chart.is_differential_target(chief_entry) ? BottomCheck::dies
                       : chart.has_unknown_flag(chief_entry)     ? BottomCheck::inconclusive
                                                                 : BottomCheck::survives;
            TraceStep t;
            t.rule = "Cor3.7_bottom_cell";
            t.inputs = {kv("element", chief), kv("cell", chief_entry.cell), kv("bottom", bottom),
                        kv("degree", degree)};
            t.output = bc.state == BottomCheck::survives     ? "survives"
                       : bc.state == BottomCheck::dies       ? "dies"
                                                             : "inconclusive";
            t.citation = "image of " + chief + " under the bottom-cell inclusion of P_{" +
                         std::to_string(chief_entry.cell) + "}";
            rec.trace.steps.push_back(t);

            if (bc.state == BottomCheck::survives) {
                // remaining competitors sit on shallower cells: stems < stem(chief)
                int high2 = ch.stem - 1;
                std::vector<HomotopyElement> cands;
                if (low <= high2)
                    cands = db_.elements_in_window(low, high2, floor);
                emit_candidates_step(rec, low, std::min(high2, high), floor, cands);
                std::vector<AHSSEntry> entries;
                for (const HomotopyElement& c : cands)
                    entries.push_back(AHSSEntry{c.name, degree - c.stem, degree});
                emit_ahss_steps(rec, chart, entries);
                std::vector<std::string> alive;
                for (const AHSSEntry& e : entries) {
                    if (chart.is_differential_target(e) || chart.is_differential_source(e))
                        continue;
                    alive.push_back(e.element +
                                    (chart.has_unknown_flag(e) ? " (unresolved)" : ""));
                }
                if (alive.empty()) {
                    conclude(rec, chief, "chief",
                             {kv("bottom", bottom), kv("degree", degree), kv("floor", floor),
                              kv("window_high", high2)});
                    return rec;
                }
                rec.value.push_back(chief);
                for (const std::string& a : alive)
                    rec.value.push_back(a);
                rec.notes.push_back("higher-filtration candidates not excluded: " + join(alive));
                return rec;
            }
            if (bc.state == BottomCheck::inconclusive) {
                rec.notes.push_back("bottom-cell check for " + chief +
                                    " is inconclusive (coverage)");
                rec.value.push_back(chief);
                return rec;
            }
            rec.notes.push_back("bottom-cell image of " + chief + " dies; invariant lies deeper");
            emit_ahss_steps(rec, chart, {chief_entry});
        }

        // full window exclusion
        std::vector<HomotopyElement> cands = db_.elements_in_window(low, high, floor);
        emit_candidates_step(rec, low, high, floor, cands);
        std::vector<AHSSEntry> entries;
        for (const HomotopyElement& c : cands)
            entries.push_back(AHSSEntry{c.name, degree - c.stem, degree});
        emit_ahss_steps(rec, chart, entries);

        std::vector<std::string> alive, unresolved;
        for (const AHSSEntry& e : entries) {
            if (chart.is_differential_target(e) || chart.is_differential_source(e))
                continue;
            if (chart.has_unknown_flag(e))
                unresolved.push_back(e.element);
            else
                alive.push_back(e.element);
        }
        if (alive.size() == 1 && unresolved.empty()) {
            conclude(rec, alive.front(), "window",
                     {kv("bottom", bottom), kv("degree", degree), kv("floor", floor)});
            return rec;
        }
        if (alive.empty() && unresolved.empty()) {
            rec.notes.push_back("every candidate in the window is excluded; data must be missing");
            return rec;
        }
        rec.value = alive;
        for (const std::string& u : unresolved)
            rec.value.push_back(u + " (unresolved)");
        rec.notes.push_back("survivors remain: " + join(rec.value));
        return rec;
    }
};

}  // namespace

MahowaldRecord resolve(const Database& db, const std::string& alpha)
{
    return Resolver(db).resolve(alpha);
}

TableReport verify_table(const Database& db)
{
    TableReport report;
    Resolver shared(db);
    for (const TableRow& row : db.table1) {
        RowReport rr;
        rr.row = row;
        try {
            MahowaldRecord rec = shared.resolve(row.element);
            rr.computed_malg = rec.m_alg_coset.empty() ? "-" : rec.m_alg_coset.front();
            rr.computed_m = rec.determined ? join(rec.value) : "undetermined";
            if (row.claimed_m == "undetermined") {
                rr.outcome = rec.determined ? RowReport::mismatch : RowReport::undetermined_ok;
                if (rec.determined)
                    rr.detail = "expected undetermined, resolved to " + rr.computed_m;
                else if (row.claimed_malg != "-" && rr.computed_malg != row.claimed_malg) {
                    rr.outcome = RowReport::mismatch;
                    rr.detail = "algebraic invariant: expected " + row.claimed_malg + ", got " +
                                rr.computed_malg;
                }
            }
            else if (!rec.determined) {
                rr.outcome = RowReport::mismatch;
                rr.detail = "expected " + row.claimed_m + ", resolution inconclusive";
                for (const std::string& n : rec.notes)
                    rr.detail += "; " + n;
            }
            else if (rec.value.size() != 1 || rec.value.front() != row.claimed_m) {
                rr.outcome = RowReport::mismatch;
                rr.detail = "expected " + row.claimed_m + ", got " + rr.computed_m;
            }
            else if (row.claimed_malg != "-" && rr.computed_malg != row.claimed_malg) {
                rr.outcome = RowReport::mismatch;
                rr.detail = "algebraic invariant: expected " + row.claimed_malg + ", got " +
                            rr.computed_malg;
            }
            else {
                rr.outcome = RowReport::match;
            }
        }
        catch (const data_error& e) {
            rr.outcome = RowReport::coverage_gap;
            rr.detail = e.what();
        }
        if (rr.outcome == RowReport::mismatch)
            ++report.mismatches;
        if (rr.outcome == RowReport::coverage_gap)
            ++report.coverage_gaps;
        report.rows.push_back(rr);
    }
    return report;
}

void replay_trace(const Database& db, const ProofTrace& trace)
{
    auto fail = [](const TraceStep& s, const std::string& why) {
        throw data_error("trace replay failed at rule " + s.rule + ": " + why);
    };

    for (const TraceStep& step : trace.steps) {
        auto in = parse_inputs(step);
        if (step.rule == "Sq0") {
            const Sq0Fact* f = db.sq0_of(in.at("x"));
            if (!f || f->output != step.output)
                fail(step, "Sq^0 fact does not reproduce " + step.output);
        }
        else if (step.rule == "Malg_table") {
            const MalgFact* f = db.malg_of(in.at("x"));
            if (!f || f->output != step.output)
                fail(step, "table fact does not reproduce " + step.output);
        }
        else if (step.rule == "Cartan_alg") {
            auto fac = db.ext_product_of(in.at("left"), in.at("right"));
            if (!fac || fac->result != in.at("x"))
                fail(step, "factorization not recorded");
            const Sq0Fact* ql = db.sq0_of(in.at("left"));
            const Sq0Fact* qr = db.sq0_of(in.at("right"));
            if (!ql || !qr || ql->output != in.at("sq0_left") || qr->output != in.at("sq0_right"))
                fail(step, "factor Sq^0 facts drifted");
            auto prod = db.ext_product_of(ql->output, qr->output);
            if (!prod || prod->result != step.output)
                fail(step, "Cartan product does not reproduce " + step.output);
        }
        else if (step.rule == "Thm3.9_init") {
            const HomotopyElement& el = db.element(in.at("alpha"));
            size_t at = step.output.rfind(" @ k=");
            if (at == std::string::npos)
                fail(step, "malformed output");
            std::string value = step.output.substr(0, at);
            int k = static_cast<int>(to_int(step.output.substr(at + 5)));
            if (k != el.adams_filtration || db.ext(value).s != k)
                fail(step, "k_1 != Adams filtration");
        }
        else if (step.rule == "Thm3.8_step") {
            ExtStatus st = db.permanent_status(in.at("prev"));
            if (st.kind != ExtStatus::supports || st.partner != in.at("diff_target"))
                fail(step, "differential fact drifted");
            const BracketFact* br = db.bracket_by_output(st.partner);
            if (!br || br->top != to_int(in.at("bracket_top")) ||
                br->bottom != to_int(in.at("bracket_bottom")))
                fail(step, "bracket fact drifted");
            if (step.output != at_k(br->input, db.ext(br->input).s))
                fail(step, "stepped value drifted");
        }
        else if (step.rule == "Jones") {
            const HomotopyElement& el = db.element(in.at("alpha"));
            if (el.stem != to_int(in.at("stem")) ||
                step.output != "lower=" + std::to_string(2 * el.stem))
                fail(step, "Jones arithmetic drifted");
        }
        else if (step.rule == "Thm3.4a") {
            std::istringstream ss(in.at("coset"));
            std::string name;
            int stem = -1;
            while (std::getline(ss, name, ',')) {
                if (db.permanent_status(name).kind != ExtStatus::supports)
                    fail(step, name + " does not support a differential");
                stem = db.ext(name).stem();
            }
            if (step.output != "upper=" + std::to_string(stem - 1))
                fail(step, "upper bound drifted");
        }
        else if (step.rule == "Thm3.4b") {
            std::istringstream ss(in.at("coset"));
            std::string name;
            bool killed = false;
            int stem = -1;
            while (std::getline(ss, name, ',')) {
                ExtStatus st = db.permanent_status(name);
                if (st.kind == ExtStatus::permanent)
                    fail(step, name + " is permanent");
                if (st.kind == ExtStatus::killed_by)
                    killed = true;
                stem = db.ext(name).stem();
            }
            if (!killed || step.output != "lower=" + std::to_string(stem))
                fail(step, "killed-case bound drifted");
        }
        else if (step.rule == "Thm3.4c") {
            if (db.permanent_status(in.at("member")).kind != ExtStatus::permanent)
                fail(step, in.at("member") + " is not permanent");
            if (join(db.elements_detected_by(in.at("member"))) != step.output)
                fail(step, "detected coset drifted");
        }
        else if (step.rule == "Thm3.12_product") {
            ProductLookup prod = db.product_of(in.at("beta_value"), in.at("gamma_value"));
            if (prod.state != ProductLookup::nonzero || prod.result != in.at("product") ||
                prod.result != step.output)
                fail(step, "product fact drifted");
            int degree = static_cast<int>(to_int(in.at("degree")));
            BottomCheck bc = bottom_cell_check(db, prod.result, degree);
            if (bc.state != BottomCheck::survives)
                fail(step, "bottom-cell survival no longer holds");
        }
        else if (step.rule == "Thm3.12_lower") {
            std::string mode = in.count("mode") ? in.at("mode") : "";
            if (mode == "product_zero") {
                ProductLookup prod = db.product_of(in.at("beta_value"), in.at("gamma_value"));
                if (prod.state != ProductLookup::zero)
                    fail(step, "product is no longer zero");
                int sum = db.element(in.at("beta_value")).stem + db.element(in.at("gamma_value")).stem;
                if (step.output != "lower=" + std::to_string(sum + 1))
                    fail(step, "bound arithmetic drifted");
            }
            else if (mode == "product_dies") {
                int sum = db.element(in.at("beta_value")).stem + db.element(in.at("gamma_value")).stem;
                if (step.output != "lower=" + std::to_string(sum + 1))
                    fail(step, "bound arithmetic drifted");
            }
            else if (mode == "sum") {
                long long sum = to_int(in.at("beta_low")) + to_int(in.at("gamma_low"));
                if (step.output != "lower=" + std::to_string(sum))
                    fail(step, "bound arithmetic drifted");
            }
            else if (in.count("double")) {
                long long up = to_int(in.at("double_upper")) - to_int(in.at("drop"));
                if (step.output != "upper=" + std::to_string(up))
                    fail(step, "adjacent bound arithmetic drifted");
            }
            else {
                fail(step, "unknown Thm3.12 mode");
            }
        }
        else if (step.rule == "Cor3.7_bottom_cell") {
            int degree = static_cast<int>(to_int(in.at("degree")));
            long long bottom = to_int(in.at("bottom"));
            AHSSChart chart = build_chart(build_complex(bottom, 0), degree, db);
            AHSSEntry entry{in.at("element"), to_int(in.at("cell")), degree};
            std::string state = chart.is_differential_target(entry) ? "dies"
                                : chart.has_unknown_flag(entry)     ? "inconclusive"
                                                                    : "survives";
            if (state != step.output)
                fail(step, "bottom-cell state drifted to " + state);
        }
        else if (step.rule == "Candidates") {
            int low = static_cast<int>(to_int(in.at("low")));
            int high = static_cast<int>(to_int(in.at("high")));
            std::vector<std::string> names;
            if (low <= high)
                for (const HomotopyElement& c :
                     db.elements_in_window(low, high, static_cast<int>(to_int(in.at("floor")))))
                    names.push_back(c.name);
            if (join(names) != step.output)
                fail(step, "candidate window drifted");
        }
        else if (step.rule == "AHSS_exclusion") {
            int r = static_cast<int>(to_int(in.at("r")));
            long long src_cell = to_int(in.at("source_cell"));
            long long bottom = to_int(in.at("bottom"));
            StuntedComplex cx = build_complex(bottom, 0);
            if (!cx.has_attachment(src_cell, src_cell - r, label_for_span(r)))
                fail(step, "attaching map missing");
            ProductLookup prod = db.product_of(label_element(label_for_span(r)), in.at("source"));
            if (prod.state != ProductLookup::nonzero)
                fail(step, "composite no longer nonzero");
            std::string expect = prod.result + "[" + std::to_string(src_cell - r) + "]";
            if (expect != step.output)
                fail(step, "differential target drifted");
        }
        else if (step.rule == "Conclusion") {
            const HomotopyElement& v = db.element(step.output);
            if (v.stem < to_int(in.at("low")) || v.stem > to_int(in.at("high")) ||
                v.stem < to_int(in.at("jones")))
                fail(step, "conclusion violates recorded bounds");
            std::string mode = in.count("mode") ? in.at("mode") : "";
            if (mode == "case_c") {
                const HomotopyElement& alpha = db.element(in.at("alpha"));
                bool detected = false;
                try {
                    for (const std::string& member : m_alg(db, alpha.detected_by).coset)
                        if (db.permanent_status(member).kind == ExtStatus::permanent)
                            for (const std::string& el : db.elements_detected_by(member))
                                detected = detected || el == step.output;
                }
                catch (const data_error&) {
                }
                if (!detected)
                    fail(step, "no permanent algebraic invariant detects " + step.output);
            }
            else if (mode == "product") {
                ProductLookup prod = db.product_of(in.at("beta_value"), in.at("gamma_value"));
                if (prod.state != ProductLookup::nonzero || prod.result != step.output)
                    fail(step, "placed product drifted");
            }
            else if (mode == "window" || mode == "chief") {
                int degree = static_cast<int>(to_int(in.at("degree")));
                long long bottom = to_int(in.at("bottom"));
                int floor = static_cast<int>(to_int(in.at("floor")));
                int low = static_cast<int>(to_int(in.at("low")));
                int high = mode == "chief" ? static_cast<int>(to_int(in.at("window_high")))
                                           : static_cast<int>(to_int(in.at("high")));
                AHSSChart chart = build_chart(build_complex(bottom, 0), degree, db);
                if (mode == "chief") {
                    AHSSEntry chief{step.output, degree - v.stem, degree};
                    if (chart.is_differential_target(chief) || chart.has_unknown_flag(chief))
                        fail(step, "chief no longer survives the bottom cell");
                }
                std::vector<std::string> alive;
                if (low <= high) {
                    for (const HomotopyElement& c : db.elements_in_window(low, high, floor)) {
                        AHSSEntry e{c.name, degree - c.stem, degree};
                        if (chart.is_differential_target(e) || chart.is_differential_source(e))
                            continue;
                        if (chart.has_unknown_flag(e))
                            fail(step, "candidate " + c.name + " is unresolved");
                        alive.push_back(c.name);
                    }
                }
                if (mode == "window" && (alive.size() != 1 || alive.front() != step.output))
                    fail(step, "window exclusion no longer isolates " + step.output);
                if (mode == "chief" && !alive.empty())
                    fail(step, "higher-filtration candidates reappeared");
            }
        }
        else {
            fail(step, "unknown rule");
        }
    }
}

}  // namespace mahowald
