#include "dov/gf64.hpp"

#include "dov/errors.hpp"

namespace dov::gf64 {

namespace {

struct Tables {
    std::array<Element, 2 * (kOrder - 1)> exp{};
    std::array<int, kOrder> log{};

    constexpr Tables() {
        int x = 1;
        for (int i = 0; i < kOrder - 1; ++i) {
            exp[i] = static_cast<Element>(x);
            exp[i + kOrder - 1] = static_cast<Element>(x);
            log[x] = i;
            x <<= 1;
            if (x & kOrder) x ^= kPrimitivePoly;
        }
        log[0] = -1;
    }
};

constexpr Tables kTables{};

constexpr int mod_order(int p) noexcept {
    p %= kOrder - 1;
    return p < 0 ? p + kOrder - 1 : p;
}

} // namespace

Element exp(int power) noexcept { return kTables.exp[mod_order(power)]; }

int log(Element a) {
    if (a == 0 || a >= kOrder) throw InvalidArgument("gf64::log of 0 or out-of-field value");
    return kTables.log[a];
}

Element mul(Element a, Element b) noexcept {
    if (a == 0 || b == 0) return 0;
    return kTables.exp[kTables.log[a] + kTables.log[b]];
}

Element div(Element a, Element b) {
    if (b == 0) throw InvalidArgument("gf64::div by zero");
    if (a == 0) return 0;
    return kTables.exp[mod_order(kTables.log[a] - kTables.log[b])];
}

Element inv(Element a) { return div(1, a); }

Element pow(Element a, int power) noexcept {
    if (a == 0) return power == 0 ? 1 : 0;
    return kTables.exp[mod_order(kTables.log[a] * power)];
}

} // namespace dov::gf64
