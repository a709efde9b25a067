#include "mahowald/db.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace mahowald {

namespace {

struct Token {
    std::string key;
    std::string value;
};

// One record per line, whitespace-separated key=value pairs, values quoted
// when they contain spaces, '#' starts a comment.
struct Line {
    int number = 0;
    std::string kind;
    std::vector<Token> tokens;
};

std::vector<Line> scan(const std::string& source)
{
    std::vector<Line> lines;
    std::istringstream in(source);
    std::string raw;
    int number = 0;
    while (std::getline(in, raw)) {
        ++number;
        Line line;
        line.number = number;
        size_t i = 0;
        auto skip_ws = [&] {
            while (i < raw.size() && (raw[i] == ' ' || raw[i] == '\t' || raw[i] == '\r'))
                ++i;
        };
        std::vector<std::string> words;
        while (true) {
            skip_ws();
            if (i >= raw.size() || raw[i] == '#')
                break;
            std::string word;
            while (i < raw.size() && raw[i] != ' ' && raw[i] != '\t' && raw[i] != '\r' && raw[i] != '#') {
                if (raw[i] == '"') {
                    size_t close = raw.find('"', i + 1);
                    if (close == std::string::npos)
                        throw data_error("unterminated quote", number);
                    word += raw.substr(i + 1, close - i - 1);
                    i = close + 1;
                }
                else {
                    word += raw[i++];
                }
            }
            words.push_back(word);
        }
        if (words.empty())
            continue;
        line.kind = words[0];
        for (size_t w = 1; w < words.size(); ++w) {
            size_t eq = words[w].find('=');
            if (eq == std::string::npos)
                throw data_error("expected key=value, got '" + words[w] + "'", number);
            line.tokens.push_back(Token{words[w].substr(0, eq), words[w].substr(eq + 1)});
        }
        lines.push_back(std::move(line));
    }
    return lines;
}

class Fields {
public:
    Fields(const Line& line) : line_(line)
    {
        for (const Token& t : line.tokens) {
            if (map_.count(t.key))
                throw data_error("duplicate field '" + t.key + "' in " + line.kind + " record",
                                 line.number);
            map_.emplace(t.key, t.value);
        }
    }

    std::string get(const std::string& key) const
    {
        auto it = map_.find(key);
        if (it == map_.end())
            throw data_error(line_.kind + " record missing field '" + key + "'", line_.number);
        used_.insert(key);
        return it->second;
    }

    std::string get_or(const std::string& key, const std::string& dflt) const
    {
        auto it = map_.find(key);
        if (it == map_.end())
            return dflt;
        used_.insert(key);
        return it->second;
    }

    long long get_int(const std::string& key) const
    {
        std::string v = get(key);
        try {
            size_t pos = 0;
            long long n = std::stoll(v, &pos);
            if (pos != v.size())
                throw std::invalid_argument(v);
            return n;
        }
        catch (const std::exception&) {
            throw data_error("field '" + key + "' is not an integer: '" + v + "'", line_.number);
        }
    }

    void reject_unknown() const
    {
        for (const Token& t : line_.tokens)
            if (!used_.count(t.key))
                throw data_error("unknown field '" + t.key + "' in " + line_.kind + " record",
                                 line_.number);
    }

private:
    const Line& line_;
    std::map<std::string, std::string> map_;
    mutable std::set<std::string> used_;
};

std::vector<std::string> split_list(const std::string& v)
{
    std::vector<std::string> out;
    std::string cur;
    for (char c : v) {
        if (c == ',') {
            if (!cur.empty())
                out.push_back(cur);
            cur.clear();
        }
        else {
            cur += c;
        }
    }
    if (!cur.empty())
        out.push_back(cur);
    return out;
}

bool is_pow2(long long n)
{
    return n > 0 && (n & (n - 1)) == 0;
}

std::string quoted(const std::string& s)
{
    if (s.find(' ') != std::string::npos)
        return '"' + s + '"';
    return s;
}

}  // namespace

const HomotopyElement& Database::element(const std::string& name) const
{
    auto it = elements.find(name);
    if (it == elements.end())
        throw data_error("unknown element '" + name + "'");
    return it->second;
}

const ExtClass& Database::ext(const std::string& name) const
{
    auto it = ext_classes.find(name);
    if (it == ext_classes.end())
        throw data_error("unknown ext class '" + name + "'");
    return it->second;
}

ProductLookup Database::product_of(const std::string& a, const std::string& b) const
{
    element(a);
    element(b);
    for (const ProductFact& f : products) {
        if ((f.left == a && f.right == b) || (f.left == b && f.right == a)) {
            ProductLookup r;
            r.state = f.is_zero() ? ProductLookup::zero : ProductLookup::nonzero;
            r.result = f.is_zero() ? "" : f.result;
            r.fact = &f;
            return r;
        }
    }
    // 2x = 0 is the meaning of order 2; no other product is ever inferred.
    const std::string* other = nullptr;
    if (a == "2")
        other = &b;
    else if (b == "2")
        other = &a;
    if (other && element(*other).order == 2) {
        ProductLookup r;
        r.state = ProductLookup::zero;
        r.by_order = true;
        return r;
    }
    return ProductLookup{};
}

std::optional<ExtProductFact> Database::ext_product_of(const std::string& a, const std::string& b) const
{
    for (const ExtProductFact& f : ext_products)
        if ((f.left == a && f.right == b) || (f.left == b && f.right == a))
            return f;
    return std::nullopt;
}

std::vector<ExtProductFact> Database::factorizations_of(const std::string& result) const
{
    std::vector<ExtProductFact> out;
    for (const ExtProductFact& f : ext_products)
        if (f.result == result)
            out.push_back(f);
    return out;
}

std::vector<ProductFact> Database::element_factorizations_of(const std::string& result) const
{
    std::vector<ProductFact> out;
    for (const ProductFact& f : products)
        if (f.result == result)
            out.push_back(f);
    return out;
}

const Sq0Fact* Database::sq0_of(const std::string& input) const
{
    for (const Sq0Fact& f : sq0)
        if (f.input == input)
            return &f;
    return nullptr;
}

const MalgFact* Database::malg_of(const std::string& input) const
{
    for (const MalgFact& f : malg)
        if (f.input == input)
            return &f;
    return nullptr;
}

const BracketFact* Database::bracket_by_output(const std::string& output) const
{
    for (const BracketFact& f : brackets)
        if (f.output == output)
            return &f;
    return nullptr;
}

bool Database::has_no_eta_ext(const std::string& element) const
{
    return std::find(no_eta_ext.begin(), no_eta_ext.end(), element) != no_eta_ext.end();
}

ExtStatus Database::permanent_status(const std::string& ext_name) const
{
    return ext(ext_name).status;
}

std::vector<HomotopyElement> Database::elements_in_window(int stem_min, int stem_max,
                                                          int filtration_floor) const
{
    if (stem_min > stem_max)
        throw data_error("elements_in_window: stem_min > stem_max");
    std::vector<HomotopyElement> out;
    for (const auto& [name, el] : elements)
        if (el.stem >= stem_min && el.stem <= stem_max && el.adams_filtration > filtration_floor)
            out.push_back(el);
    std::sort(out.begin(), out.end(), [](const HomotopyElement& a, const HomotopyElement& b) {
        return std::tie(a.stem, a.adams_filtration, a.name) <
               std::tie(b.stem, b.adams_filtration, b.name);
    });
    return out;
}

std::vector<HomotopyElement> Database::elements_in_stem(int stem) const
{
    return elements_in_window(stem, stem, -1);
}

std::vector<std::string> Database::elements_detected_by(const std::string& ext_name) const
{
    std::vector<std::string> out;
    for (const auto& [name, el] : elements)
        if (el.detected_by == ext_name)
            out.push_back(name);
    std::sort(out.begin(), out.end());
    return out;
}

Database load_database(const std::string& source)
{
    Database db;
    std::vector<std::pair<int, ProductFact>> product_lines;
    std::vector<std::pair<int, ExtProductFact>> extprod_lines;
    std::vector<std::pair<int, Sq0Fact>> sq0_lines;
    std::vector<std::pair<int, MalgFact>> malg_lines;
    std::vector<std::pair<int, BracketFact>> bracket_lines;
    std::vector<std::pair<int, AdamsDifferential>> diff_lines;
    std::vector<std::pair<int, std::string>> noeta_lines;
    std::vector<std::pair<int, TableRow>> row_lines;
    std::vector<std::pair<int, HomotopyElement>> element_lines;

    for (const Line& line : scan(source)) {
        Fields f(line);
        if (line.kind == "coverage") {
            // comma-separated stems and inclusive ranges, e.g. stems=0-26,28,30-42
            for (const std::string& part : split_list(f.get("stems"))) {
                size_t dash = part.find('-', part.empty() || part[0] == '-' ? 1 : 0);
                try {
                    if (dash == std::string::npos) {
                        db.covered_stems.insert(std::stoi(part));
                    }
                    else {
                        int a = std::stoi(part.substr(0, dash));
                        int b = std::stoi(part.substr(dash + 1));
                        for (int s = a; s <= b; ++s)
                            db.covered_stems.insert(s);
                    }
                }
                catch (const std::exception&) {
                    throw data_error("bad coverage range '" + part + "'", line.number);
                }
            }
            if (!db.covered_stems.empty())
                db.max_stem = *db.covered_stems.rbegin();
        }
        else if (line.kind == "ext") {
            ExtClass e;
            e.name = f.get("name");
            e.s = static_cast<int>(f.get_int("s"));
            e.t = static_cast<int>(f.get_int("t"));
            std::string st = f.get_or("status", "unknown");
            if (st == "permanent")
                e.status.kind = ExtStatus::permanent;
            else if (st == "unknown")
                e.status.kind = ExtStatus::unknown;
            else
                throw data_error("bad ext status '" + st + "' (killed/supports come from adams_diff)",
                                 line.number);
            if (e.s < 0 || e.t < 0)
                throw data_error("ext class '" + e.name + "' has negative bidegree", line.number);
            if (db.ext_classes.count(e.name))
                throw data_error("duplicate ext class '" + e.name + "'", line.number);
            db.ext_classes.emplace(e.name, e);
        }
        else if (line.kind == "element") {
            HomotopyElement el;
            el.name = f.get("name");
            el.stem = static_cast<int>(f.get_int("stem"));
            el.adams_filtration = static_cast<int>(f.get_int("filt"));
            el.detected_by = f.get("detected");
            std::string ord = f.get_or("order", "unknown");
            if (ord != "unknown") {
                try {
                    el.order = std::stoi(ord);
                }
                catch (const std::exception&) {
                    throw data_error("bad order '" + ord + "'", line.number);
                }
                if (!is_pow2(el.order))
                    throw data_error("order of '" + el.name + "' is not a power of 2", line.number);
            }
            el.notes = f.get_or("notes", "");
            element_lines.emplace_back(line.number, el);
        }
        else if (line.kind == "product") {
            ProductFact p;
            p.left = f.get("left");
            p.right = f.get("right");
            p.result = f.get("result");
            std::string k = f.get_or("kind", "ordinary");
            if (k == "ordinary")
                p.kind = ProductFact::ordinary;
            else if (k == "hidden_eta")
                p.kind = ProductFact::hidden_eta;
            else if (k == "hidden_nu")
                p.kind = ProductFact::hidden_nu;
            else if (k == "hidden_sigma")
                p.kind = ProductFact::hidden_sigma;
            else if (k == "hidden_two")
                p.kind = ProductFact::hidden_two;
            else
                throw data_error("bad product kind '" + k + "'", line.number);
            product_lines.emplace_back(line.number, p);
        }
        else if (line.kind == "extprod") {
            extprod_lines.emplace_back(line.number,
                                       ExtProductFact{f.get("left"), f.get("right"), f.get("result")});
        }
        else if (line.kind == "sq0") {
            Sq0Fact q;
            q.input = f.get("input");
            q.output = f.get("output");
            q.indeterminacy = split_list(f.get_or("indet", ""));
            sq0_lines.emplace_back(line.number, q);
        }
        else if (line.kind == "malg") {
            MalgFact m;
            m.input = f.get("input");
            m.output = f.get("output");
            m.indeterminacy = split_list(f.get_or("indet", ""));
            malg_lines.emplace_back(line.number, m);
        }
        else if (line.kind == "bracket") {
            BracketFact b;
            b.top = f.get_int("top");
            b.bottom = f.get_int("bottom");
            b.input = f.get("input");
            b.output = f.get("output");
            bracket_lines.emplace_back(line.number, b);
        }
        else if (line.kind == "adams_diff") {
            AdamsDifferential d;
            d.r = static_cast<int>(f.get_int("r"));
            d.source = f.get("source");
            d.target = f.get("target");
            diff_lines.emplace_back(line.number, d);
        }
        else if (line.kind == "no_eta_ext") {
            noeta_lines.emplace_back(line.number, f.get("target"));
        }
        else if (line.kind == "table_row") {
            TableRow r;
            r.element = f.get("element");
            r.claimed_malg = f.get("malg");
            r.claimed_m = f.get("m");
            r.proof = f.get("proof");
            row_lines.emplace_back(line.number, r);
        }
        else {
            throw data_error("unknown record kind '" + line.kind + "'", line.number);
        }
        f.reject_unknown();
    }

    // Cross-reference and invariant checks. Ext classes are already in; wire
    // the rest in dependency order so every dangling name is caught.
    auto need_ext = [&](const std::string& name, int ln) -> const ExtClass& {
        auto it = db.ext_classes.find(name);
        if (it == db.ext_classes.end())
            throw data_error("dangling ext class reference '" + name + "'", ln);
        return it->second;
    };

    for (auto& [ln, d] : diff_lines) {
        ExtClass& src = db.ext_classes.at(need_ext(d.source, ln).name);
        ExtClass& tgt = db.ext_classes.at(need_ext(d.target, ln).name);
        if (d.r < 2)
            throw data_error("adams_diff page must be >= 2", ln);
        if (tgt.s != src.s + d.r || tgt.t != src.t + d.r - 1)
            throw data_error("adams_diff d_" + std::to_string(d.r) + "(" + d.source + ") = " +
                                 d.target + " violates the d_r bidegree law",
                             ln);
        if (src.status.kind == ExtStatus::permanent)
            throw data_error("'" + d.source + "' is marked permanent but supports a differential", ln);
        if (tgt.status.kind == ExtStatus::permanent)
            throw data_error("'" + d.target + "' is marked permanent but is hit by a differential", ln);
        if (src.status.kind != ExtStatus::unknown || tgt.status.kind != ExtStatus::unknown)
            throw data_error("conflicting differentials at '" + d.source + "' or '" + d.target + "'",
                             ln);
        src.status = ExtStatus{ExtStatus::supports, d.target, d.r};
        tgt.status = ExtStatus{ExtStatus::killed_by, d.source, d.r};
        db.adams_diffs.push_back(d);
    }

    for (auto& [ln, el] : element_lines) {
        if (el.stem < 0)
            throw data_error("element '" + el.name + "' has negative stem", ln);
        if (!db.covered_stems.empty() && !db.stem_covered(el.stem))
            throw data_error("element '" + el.name + "' lies in stem " + std::to_string(el.stem) +
                                 " which is not in the declared coverage",
                             ln);
        const ExtClass& det = need_ext(el.detected_by, ln);
        if (det.stem() != el.stem)
            throw data_error("element '" + el.name + "': detecting class stem " +
                                 std::to_string(det.stem()) + " != element stem " +
                                 std::to_string(el.stem),
                             ln);
        if (det.s != el.adams_filtration)
            throw data_error("element '" + el.name + "': detecting class filtration " +
                                 std::to_string(det.s) + " != adams_filtration " +
                                 std::to_string(el.adams_filtration),
                             ln);
        if (db.elements.count(el.name))
            throw data_error("duplicate element '" + el.name + "'", ln);
        db.elements.emplace(el.name, el);
    }

    auto need_element = [&](const std::string& name, int ln) -> const HomotopyElement& {
        auto it = db.elements.find(name);
        if (it == db.elements.end())
            throw data_error("dangling element reference '" + name + "'", ln);
        return it->second;
    };

    for (auto& [ln, p] : product_lines) {
        const HomotopyElement& l = need_element(p.left, ln);
        const HomotopyElement& r = need_element(p.right, ln);
        for (const ProductFact& q : db.products)
            if ((q.left == p.left && q.right == p.right) || (q.left == p.right && q.right == p.left))
                throw data_error("duplicate product fact " + p.left + " * " + p.right, ln);
        if (!p.is_zero()) {
            const HomotopyElement& res = need_element(p.result, ln);
            if (res.stem != l.stem + r.stem)
                throw data_error("product " + p.left + " * " + p.right + " = " + p.result +
                                     " violates stem additivity",
                                 ln);
            if (p.kind == ProductFact::ordinary &&
                res.adams_filtration < l.adams_filtration + r.adams_filtration)
                throw data_error("ordinary product " + p.left + " * " + p.right + " = " + p.result +
                                     " violates filtration superadditivity",
                                 ln);
        }
        if (p.kind != ProductFact::ordinary) {
            static const std::map<ProductFact::Kind, std::string> req = {
                {ProductFact::hidden_two, "2"},
                {ProductFact::hidden_eta, "eta"},
                {ProductFact::hidden_nu, "nu"},
                {ProductFact::hidden_sigma, "sigma"}};
            if (p.left != req.at(p.kind))
                throw data_error("hidden extension kind requires left = " + req.at(p.kind), ln);
        }
        db.products.push_back(p);
    }

    for (auto& [ln, e] : extprod_lines) {
        const ExtClass& l = need_ext(e.left, ln);
        const ExtClass& r = need_ext(e.right, ln);
        if (e.result != "zero") {
            const ExtClass& res = need_ext(e.result, ln);
            if (res.s != l.s + r.s || res.t != l.t + r.t)
                throw data_error("extprod " + e.left + " * " + e.right + " = " + e.result +
                                     " violates bidegree additivity",
                                 ln);
        }
        db.ext_products.push_back(e);
    }

    for (auto& [ln, q] : sq0_lines) {
        const ExtClass& in = need_ext(q.input, ln);
        const ExtClass& out = need_ext(q.output, ln);
        if (out.s != in.s || out.t != 2 * in.t)
            throw data_error("sq0 " + q.input + " -> " + q.output +
                                 " violates the (s,t) -> (s,2t) bidegree law",
                             ln);
        for (const std::string& ind : q.indeterminacy) {
            const ExtClass& x = need_ext(ind, ln);
            if (x.s != out.s || x.t != out.t)
                throw data_error("sq0 indeterminacy '" + ind + "' not in the output bidegree", ln);
        }
        for (const Sq0Fact& prev : db.sq0)
            if (prev.input == q.input)
                throw data_error("duplicate sq0 fact for '" + q.input + "'", ln);
        db.sq0.push_back(q);
    }

    for (auto& [ln, m] : malg_lines) {
        need_ext(m.input, ln);
        const ExtClass& out = need_ext(m.output, ln);
        for (const std::string& ind : m.indeterminacy) {
            const ExtClass& x = need_ext(ind, ln);
            if (x.stem() != out.stem())
                throw data_error("malg indeterminacy '" + ind + "' not in the output stem", ln);
        }
        for (const MalgFact& prev : db.malg)
            if (prev.input == m.input)
                throw data_error("duplicate malg fact for '" + m.input + "'", ln);
        db.malg.push_back(m);
    }

    for (auto& [ln, b] : bracket_lines) {
        const ExtClass& in = need_ext(b.input, ln);
        const ExtClass& out = need_ext(b.output, ln);
        if (b.bottom != b.top - 1)
            throw data_error("bracket complex must have exactly two cells", ln);
        if (((b.bottom % 2) + 2) % 2 != 1)
            throw data_error("bracket bottom cell must be odd (2i attaching map)", ln);
        if (out.s != in.s + 1 || out.stem() != in.stem())
            throw data_error("bracket " + b.input + " -> " + b.output +
                                 " is not h_0-multiplication (s+1, same stem)",
                             ln);
        db.brackets.push_back(b);
    }

    for (auto& [ln, t] : noeta_lines) {
        need_element(t, ln);
        db.no_eta_ext.push_back(t);
    }

    for (auto& [ln, r] : row_lines) {
        need_element(r.element, ln);
        if (r.claimed_malg != "-")
            need_ext(r.claimed_malg, ln);
        if (r.claimed_m != "undetermined")
            need_element(r.claimed_m, ln);
        db.table1.push_back(r);
    }

    return db;
}

Database load_database_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw data_error("cannot open fact file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return load_database(ss.str());
}

std::string Database::serialize() const
{
    std::ostringstream out;
    if (!covered_stems.empty()) {
        out << "coverage stems=";
        bool first = true;
        auto it = covered_stems.begin();
        while (it != covered_stems.end()) {
            int lo = *it, hi = lo;
            auto jt = std::next(it);
            while (jt != covered_stems.end() && *jt == hi + 1)
                hi = *jt++;
            if (!first)
                out << ",";
            first = false;
            out << lo;
            if (hi != lo)
                out << "-" << hi;
            it = jt;
        }
        out << "\n";
    }
    for (const auto& [name, e] : ext_classes) {
        out << "ext name=" << quoted(name) << " s=" << e.s << " t=" << e.t;
        if (e.status.kind == ExtStatus::permanent)
            out << " status=permanent";
        out << "\n";
    }
    for (const AdamsDifferential& d : adams_diffs)
        out << "adams_diff r=" << d.r << " source=" << quoted(d.source)
            << " target=" << quoted(d.target) << "\n";
    for (const auto& [name, el] : elements) {
        out << "element name=" << quoted(name) << " stem=" << el.stem
            << " filt=" << el.adams_filtration << " detected=" << quoted(el.detected_by);
        if (el.order)
            out << " order=" << el.order;
        if (!el.notes.empty())
            out << " notes=" << quoted(el.notes);
        out << "\n";
    }
    auto kind_name = [](ProductFact::Kind k) {
        switch (k) {
        case ProductFact::ordinary: return "ordinary";
        case ProductFact::hidden_eta: return "hidden_eta";
        case ProductFact::hidden_nu: return "hidden_nu";
        case ProductFact::hidden_sigma: return "hidden_sigma";
        default: return "hidden_two";
        }
    };
    for (const ProductFact& p : products)
        out << "product left=" << quoted(p.left) << " right=" << quoted(p.right)
            << " result=" << quoted(p.result) << " kind=" << kind_name(p.kind) << "\n";
    for (const ExtProductFact& e : ext_products)
        out << "extprod left=" << quoted(e.left) << " right=" << quoted(e.right)
            << " result=" << quoted(e.result) << "\n";
    auto join = [](const std::vector<std::string>& v) {
        std::string s;
        for (size_t i = 0; i < v.size(); ++i)
            s += (i ? "," : "") + v[i];
        return s;
    };
    for (const Sq0Fact& q : sq0) {
        out << "sq0 input=" << quoted(q.input) << " output=" << quoted(q.output);
        if (!q.indeterminacy.empty())
            out << " indet=" << quoted(join(q.indeterminacy));
        out << "\n";
    }
    for (const MalgFact& m : malg) {
        out << "malg input=" << quoted(m.input) << " output=" << quoted(m.output);
        if (!m.indeterminacy.empty())
            out << " indet=" << quoted(join(m.indeterminacy));
        out << "\n";
    }
    for (const BracketFact& b : brackets)
        out << "bracket top=" << b.top << " bottom=" << b.bottom << " input=" << quoted(b.input)
            << " output=" << quoted(b.output) << "\n";
    for (const std::string& t : no_eta_ext)
        out << "no_eta_ext target=" << quoted(t) << "\n";
    for (const TableRow& r : table1)
        out << "table_row element=" << quoted(r.element) << " malg=" << quoted(r.claimed_malg)
            << " m=" << quoted(r.claimed_m) << " proof=" << quoted(r.proof) << "\n";
    return out.str();
}

}  // namespace mahowald
