#include "mahowald/ahss.hpp"

#include <algorithm>

namespace mahowald {

std::vector<AHSSEntry> e1_page(const StuntedComplex& cx, int total_degree, const Database& db,
                               std::vector<CoverageHole>* holes)
{
    std::vector<AHSSEntry> out;
    for (long long cell = cx.bottom; cell <= cx.top; ++cell) {
        long long stem = total_degree - cell;
        if (stem < 0)
            continue;
        if (!db.stem_covered(static_cast<int>(stem))) {
            if (holes)
                holes->push_back(CoverageHole{cell, total_degree});
            continue;
        }
        for (const HomotopyElement& el : db.elements_in_stem(static_cast<int>(stem)))
            out.push_back(AHSSEntry{el.name, cell, total_degree});
    }
    std::sort(out.begin(), out.end(), [](const AHSSEntry& a, const AHSSEntry& b) {
        return std::tie(a.cell, a.element) < std::tie(b.cell, b.element);
    });
    return out;
}

std::vector<AHSSEntry> AHSSChart::entries_in_degree(int degree) const
{
    std::vector<AHSSEntry> out;
    for (const AHSSEntry& e : entries)
        if (e.total_degree == degree)
            out.push_back(e);
    return out;
}

bool AHSSChart::is_differential_source(const AHSSEntry& e) const
{
    for (const AHSSDifferential& d : differentials)
        if (d.source == e)
            return true;
    return false;
}

bool AHSSChart::is_differential_target(const AHSSEntry& e) const
{
    for (const AHSSDifferential& d : differentials)
        if (d.target == e)
            return true;
    return false;
}

bool AHSSChart::has_unknown_flag(const AHSSEntry& e) const
{
    for (const UnknownComposite& u : unknowns) {
        if (u.source == e)
            return true;
        // an unknown composite from one degree up could land on e
        if (u.source.total_degree == e.total_degree + 1 && u.target_cell == e.cell)
            return true;
    }
    // unlisted sources on an uncovered cell one degree up could hit e
    for (const CoverageHole& h : holes) {
        if (h.degree != e.total_degree + 1)
            continue;
        int r = static_cast<int>(h.cell - e.cell);
        if ((r == 1 || r == 2 || r == 4 || r == 8) &&
            complex.has_attachment(h.cell, e.cell, label_for_span(r)))
            return true;
    }
    return false;
}

AHSSChart build_chart(const StuntedComplex& cx, int total_degree, const Database& db)
{
    AHSSChart chart;
    chart.complex = cx;
    chart.total_degree = total_degree;
    chart.entries = e1_page(cx, total_degree, db, &chart.holes);
    for (const AHSSEntry& e : e1_page(cx, total_degree + 1, db, &chart.holes))
        chart.entries.push_back(e);

    // The differential on alpha[s] is the composite with the attaching map of
    // the least span landing in the complex. Shorter spans with a recorded
    // zero composite are logged; unknown composites are flagged and any later
    // span is emitted with an assumed-vanishing annotation. Sources in both
    // tracked degrees fire, so outgoing differentials on degree-D entries are
    // known even though their targets live one degree down.
    for (const AHSSEntry& src : chart.entries) {
        std::vector<int> assumed;
        for (AttachingLabel label : {AttachingLabel::two_iota, AttachingLabel::eta,
                                     AttachingLabel::nu, AttachingLabel::sigma}) {
            int r = span_of(label);
            long long target_cell = src.cell - r;
            if (!cx.has_cell(target_cell))
                continue;
            if (!cx.has_attachment(src.cell, target_cell, label))
                continue;
            ProductLookup pl = db.product_of(label_element(label), src.element);
            if (pl.state == ProductLookup::zero) {
                chart.log.push_back(ChartNote{src, r, "no differential at span " + std::to_string(r) +
                                                          ": composite is zero"});
                continue;
            }
            if (pl.state == ProductLookup::unknown) {
                chart.unknowns.push_back(UnknownComposite{src, r, target_cell});
                chart.log.push_back(ChartNote{src, r, "unresolved composite " +
                                                          std::string(label_element(label)) + " * " +
                                                          src.element + " at span " +
                                                          std::to_string(r)});
                assumed.push_back(r);
                continue;
            }
            AHSSDifferential d;
            d.r = r;
            d.source = src;
            d.target = AHSSEntry{pl.result, target_cell, src.total_degree - 1};
            d.justification.kind = pl.fact && pl.fact->kind != ProductFact::ordinary
                                       ? AHSSJustification::hidden_extension
                                       : AHSSJustification::ordinary_product;
            if (pl.fact)
                d.justification.fact = *pl.fact;
            d.justification.assumed_vanishing = assumed;
            chart.differentials.push_back(d);
            break;
        }
    }
    std::sort(chart.differentials.begin(), chart.differentials.end(),
              [](const AHSSDifferential& a, const AHSSDifferential& b) {
                  return std::tie(a.source.cell, a.source.element, a.r) <
                         std::tie(b.source.cell, b.source.element, b.r);
              });

    // An entry killed on one page cannot support a differential on a later
    // page; recorded facts must not contradict that.
    for (const AHSSDifferential& d : chart.differentials) {
        for (const AHSSDifferential& d2 : chart.differentials) {
            if (d2.target == d.source && d2.r < d.r)
                throw data_error("chart inconsistency: " + d.source.element + "[" +
                                 std::to_string(d.source.cell) + "] is hit on page " +
                                 std::to_string(d2.r) + " but fires on page " + std::to_string(d.r));
        }
    }
    return chart;
}

SurvivorReport survivors(const AHSSChart& chart, const Database& db, int filtration_floor)
{
    SurvivorReport report;
    for (const AHSSEntry& e : chart.entries) {
        if (e.total_degree != chart.total_degree)
            continue;
        if (filtration_floor >= 0 && db.element(e.element).adams_filtration <= filtration_floor)
            continue;
        if (chart.is_differential_source(e) || chart.is_differential_target(e))
            continue;
        if (chart.has_unknown_flag(e))
            report.inconclusive.push_back(e);
        else
            report.survivors.push_back(e);
    }
    return report;
}

}  // namespace mahowald
