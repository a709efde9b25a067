#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace mahowald {

/* Attaching maps in stunted projective spectra, one label per cell gap.
 * The label<->span pairing is fixed: 2i spans 1 cell, eta 2, nu 4, sigma 8. */
enum class AttachingLabel { two_iota, eta, nu, sigma };

constexpr int span_of(AttachingLabel l)
{
    switch (l) {
    case AttachingLabel::two_iota: return 1;
    case AttachingLabel::eta: return 2;
    case AttachingLabel::nu: return 4;
    default: return 8;
    }
}

const char* label_name(AttachingLabel l);

/* Element of pi_* acting as the attaching composite for a label: "2", "eta", "nu", "sigma". */
const char* label_element(AttachingLabel l);

/* Inverse of span_of; throws for spans other than 1, 2, 4, 8. */
AttachingLabel label_for_span(int r);

/* C(n,i) mod 2 for arbitrary integer n, nonnegative i, by digit-wise 2-adic
 * comparison (Lucas). Negative n is handled through the 2-adic expansion of n,
 * which is the two's-complement bit pattern; no congruence tables involved. */
int binomial_parity(long long n, unsigned i);

/* Labels of the attaching maps landing on cell n, from the mod 2/4/8/16
 * congruences. Must agree with binomial_parity(n, span) == 1 on every span. */
std::vector<AttachingLabel> attaching_maps_at(long long n);

struct Attachment {
    long long source = 0;
    long long target = 0;
    AttachingLabel label = AttachingLabel::two_iota;

    friend bool operator==(const Attachment&, const Attachment&) = default;
};

/* Cell model of P^top_bottom: the integer interval [bottom, top] with the
 * attaching maps dictated by the congruences. Cell indices may be negative. */
struct StuntedComplex {
    long long bottom = 0;
    long long top = 0;
    std::vector<Attachment> attachments;  // sorted by (target, span)

    long long cell_count() const { return top - bottom + 1; }
    bool has_cell(long long n) const { return bottom <= n && n <= top; }
    bool has_attachment(long long source, long long target, AttachingLabel l) const;
};

StuntedComplex build_complex(long long bottom, long long top);

struct JamesParameters {
    int g = 0;
    long long f = 1;  // f = 2^g
};

/* f(r) = 2^(g(r)), g(r) = floor(r/2) - 1 if r = 0 mod 8, +1 if r = 3,5 mod 8.
 * Throws std::domain_error when g(r) < 0 (r = 0). */
JamesParameters james_parameters(unsigned r);

/* Checks P^{n-1}_{n-r-1} = S^{f(r)} P^{n-f-1}_{n-r-f-1} on the cell model:
 * equal cell counts and equal attachment sets after shifting by f(r).
 * Attachments landing on the bottom cell are outside the statement's n > k
 * hypothesis and are ignored on both sides. */
bool check_james(long long n, unsigned r);

}  // namespace mahowald
