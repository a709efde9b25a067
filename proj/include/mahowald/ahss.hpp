#pragma once

#include "mahowald/db.hpp"
#include "mahowald/stunted.hpp"

#include <optional>
#include <string>
#include <vector>

namespace mahowald {

/* alpha[s]: a sphere-stem element sitting on cell `cell` of the ambient
 * complex, in total degree stem(alpha) + cell. */
struct AHSSEntry {
    std::string element;
    long long cell = 0;
    int total_degree = 0;

    friend bool operator==(const AHSSEntry&, const AHSSEntry&) = default;
};

struct AHSSJustification {
    enum Kind { ordinary_product, hidden_extension } kind = ordinary_product;
    ProductFact fact;
    // spans below r whose composite is only assumed (not proved) zero
    std::vector<int> assumed_vanishing;
};

struct AHSSDifferential {
    int r = 0;
    AHSSEntry source;
    AHSSEntry target;
    AHSSJustification justification;
};

/* An unresolved composite: label * element unknown at the given span. */
struct UnknownComposite {
    AHSSEntry source;
    int r = 0;
    long long target_cell = 0;
};

struct ChartNote {
    AHSSEntry source;
    int r = 0;
    std::string text;
};

/* A cell whose stem has no complete generator list in the database; entries
 * there may be missing, so anything it could reach is only conditionally
 * understood. */
struct CoverageHole {
    long long cell = 0;
    int degree = 0;
};

struct AHSSChart {
    StuntedComplex complex;
    int total_degree = 0;
    std::vector<AHSSEntry> entries;         // total_degree and total_degree + 1
    std::vector<AHSSDifferential> differentials;
    std::vector<UnknownComposite> unknowns;
    std::vector<ChartNote> log;             // "no differential at span r" notes
    std::vector<CoverageHole> holes;        // cells whose stem is outside db coverage

    std::vector<AHSSEntry> entries_in_degree(int degree) const;
    bool is_differential_source(const AHSSEntry& e) const;
    bool is_differential_target(const AHSSEntry& e) const;
    /* Unknown composite that could hit or leave this entry. */
    bool has_unknown_flag(const AHSSEntry& e) const;
};

/* Entries of the E_1-page of the chart's complex in one total degree:
 * one per (element, cell) with stem(element) = degree - cell. Cells whose
 * stem is not covered by the database are reported, not guessed empty. */
std::vector<AHSSEntry> e1_page(const StuntedComplex& cx, int total_degree, const Database& db,
                               std::vector<CoverageHole>* holes = nullptr);

/* Builds the chart for `total_degree`: entries in degrees D and D+1, then
 * derives differentials. Each degree-(D+1) entry supports at most one
 * differential, at the least span whose attaching composite is a nonzero
 * recorded fact; unknown composites are surfaced, never treated as zero. */
AHSSChart build_chart(const StuntedComplex& cx, int total_degree, const Database& db);

struct SurvivorReport {
    std::vector<AHSSEntry> survivors;      // clean: unhit, no differential, no unknowns
    std::vector<AHSSEntry> inconclusive;   // survival blocked by an unknown composite
};

/* Entries of the chart's total degree that are neither differential source
 * nor target. `filtration_floor`, when >= 0, restricts the analysis to
 * entries whose element has Adams filtration strictly greater. */
SurvivorReport survivors(const AHSSChart& chart, const Database& db, int filtration_floor = -1);

}  // namespace mahowald
