#include "mahowald/stunted.hpp"

#include <algorithm>

namespace mahowald {

const char* label_name(AttachingLabel l)
{
    switch (l) {
    case AttachingLabel::two_iota: return "two_iota";
    case AttachingLabel::eta: return "eta";
    case AttachingLabel::nu: return "nu";
    default: return "sigma";
    }
}

const char* label_element(AttachingLabel l)
{
    switch (l) {
    case AttachingLabel::two_iota: return "2";
    case AttachingLabel::eta: return "eta";
    case AttachingLabel::nu: return "nu";
    default: return "sigma";
    }
}

AttachingLabel label_for_span(int r)
{
    switch (r) {
    case 1: return AttachingLabel::two_iota;
    case 2: return AttachingLabel::eta;
    case 4: return AttachingLabel::nu;
    case 8: return AttachingLabel::sigma;
    default: throw std::invalid_argument("no attaching label of span " + std::to_string(r));
    }
}

int binomial_parity(long long n, unsigned i)
{
    // The 2-adic digits of n are its two's-complement bits (infinitely many
    // leading ones when n < 0). C(n,i) is odd iff the digits of i are
    // dominated by the digits of n. Arithmetic right shift keeps the sign
    // bit, which is exactly the infinite leading-ones behaviour we need.
    long long nn = n;
    unsigned ii = i;
    while (ii != 0) {
        if ((ii & 1u) && (nn & 1LL) == 0)
            return 0;
        ii >>= 1;
        nn >>= 1;
    }
    return 1;
}

static long long mod_pos(long long n, long long m)
{
    long long r = n % m;
    return r < 0 ? r + m : r;
}

std::vector<AttachingLabel> attaching_maps_at(long long n)
{
    std::vector<AttachingLabel> out;
    long long m2 = mod_pos(n, 2), m4 = mod_pos(n, 4), m8 = mod_pos(n, 8), m16 = mod_pos(n, 16);
    if (m2 == 1)
        out.push_back(AttachingLabel::two_iota);
    if (m4 == 2 || m4 == 3)
        out.push_back(AttachingLabel::eta);
    if (m8 >= 4 && m8 <= 7)
        out.push_back(AttachingLabel::nu);
    if (m16 >= 8 && m16 <= 15)
        out.push_back(AttachingLabel::sigma);
    return out;
}

bool StuntedComplex::has_attachment(long long source, long long target, AttachingLabel l) const
{
    Attachment a{source, target, l};
    return std::find(attachments.begin(), attachments.end(), a) != attachments.end();
}

StuntedComplex build_complex(long long bottom, long long top)
{
    if (bottom > top)
        throw std::invalid_argument("build_complex: bottom > top");
    StuntedComplex cx;
    cx.bottom = bottom;
    cx.top = top;
    for (long long target = bottom; target <= top; ++target) {
        for (AttachingLabel l : attaching_maps_at(target)) {
            long long source = target + span_of(l);
            if (source <= top)
                cx.attachments.push_back(Attachment{source, target, l});
        }
    }
    return cx;
}

JamesParameters james_parameters(unsigned r)
{
    int g = static_cast<int>(r / 2);
    unsigned m8 = r % 8;
    if (m8 == 0)
        g -= 1;
    else if (m8 == 3 || m8 == 5)
        g += 1;
    if (g < 0)
        throw std::domain_error("james_parameters: g(r) < 0");
    JamesParameters jp;
    jp.g = g;
    jp.f = 1LL << g;
    return jp;
}

bool check_james(long long n, unsigned r)
{
    const long long f = james_parameters(r).f;
    StuntedComplex lhs = build_complex(n - r - 1, n - 1);
    StuntedComplex rhs = build_complex(n - r - f - 1, n - f - 1);
    if (lhs.cell_count() != rhs.cell_count())
        return false;
    auto interior = [](const StuntedComplex& cx, long long shift) {
        std::vector<Attachment> v;
        for (const Attachment& a : cx.attachments)
            if (a.target > cx.bottom)
                v.push_back(Attachment{a.source + shift, a.target + shift, a.label});
        return v;
    };
    return interior(lhs, 0) == interior(rhs, f);
}

}  // namespace mahowald
