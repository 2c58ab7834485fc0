#include "dov/reed_solomon.hpp"

#include <algorithm>
#include <string>

#include "dov/errors.hpp"

namespace dov {

using gf64::Element;

namespace {

// Polynomials below are stored lowest degree first.
using Poly = std::vector<Element>;

Element eval_low(const Poly& p, Element x) {
    Element acc = 0;
    for (auto it = p.rbegin(); it != p.rend(); ++it) acc = gf64::add(gf64::mul(acc, x), *it);
    return acc;
}

void trim(Poly& p) {
    while (p.size() > 1 && p.back() == 0) p.pop_back();
}

int degree(const Poly& p) {
    for (int i = static_cast<int>(p.size()) - 1; i >= 0; --i) {
        if (p[i] != 0) return i;
    }
    return -1;
}

} // namespace

ReedSolomon::ReedSolomon(int n, int k) : n_(n), k_(k) {
    if (n < 2 || n > gf64::kOrder - 1 || k < 1 || k >= n) {
        throw InvalidArgument("RS parameters out of range: (" + std::to_string(n) + "," +
                              std::to_string(k) + ")");
    }
    // g(x) = prod_{i=1}^{n-k} (x - alpha^i), built highest degree first.
    generator_ = {1};
    for (int i = 1; i <= n - k; ++i) {
        const Element root = gf64::exp(i);
        std::vector<Element> next(generator_.size() + 1, 0);
        for (std::size_t j = 0; j < generator_.size(); ++j) {
            next[j] = gf64::add(next[j], generator_[j]);
            next[j + 1] = gf64::add(next[j + 1], gf64::mul(generator_[j], root));
        }
        generator_ = std::move(next);
    }
}

std::vector<Element> ReedSolomon::encode(std::span<const Element> message) const {
    if (static_cast<int>(message.size()) != k_) {
        throw InvalidArgument("RS encode: expected " + std::to_string(k_) + " symbols, got " +
                              std::to_string(message.size()));
    }
    std::vector<Element> work(n_, 0);
    for (int i = 0; i < k_; ++i) {
        if (message[i] >= gf64::kOrder) throw InvalidArgument("RS symbol out of GF(64)");
        work[i] = message[i];
    }
    // Long division by the monic generator; the remainder lands in the tail.
    for (int i = 0; i < k_; ++i) {
        const Element coef = work[i];
        if (coef == 0) continue;
        for (std::size_t j = 1; j < generator_.size(); ++j) {
            work[i + j] = gf64::add(work[i + j], gf64::mul(generator_[j], coef));
        }
    }
    std::vector<Element> out(message.begin(), message.end());
    out.insert(out.end(), work.begin() + k_, work.end());
    return out;
}

std::optional<ReedSolomon::Decoded> ReedSolomon::decode(std::span<const Element> received,
                                                        std::span<const int> erasures) const {
    if (static_cast<int>(received.size()) != n_) {
        throw InvalidArgument("RS decode: expected " + std::to_string(n_) + " symbols, got " +
                              std::to_string(received.size()));
    }
    const int two_t = n_ - k_;
    const int f = static_cast<int>(erasures.size());
    if (f > two_t) throw InvalidArgument("RS decode: more erasures than redundancy symbols");
    {
        std::vector<int> sorted(erasures.begin(), erasures.end());
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
            throw InvalidArgument("RS decode: duplicate erasure position");
        }
        if (!sorted.empty() && (sorted.front() < 0 || sorted.back() >= n_)) {
            throw InvalidArgument("RS decode: erasure position out of range");
        }
    }

    std::vector<Element> word(received.begin(), received.end());
    for (auto& s : word) {
        if (s >= gf64::kOrder) throw InvalidArgument("RS symbol out of GF(64)");
    }
    // Erased symbols carry no information; zero them so syndromes are the
    // same whatever the demodulator produced there.
    for (int pos : erasures) word[pos] = 0;

    auto syndromes = [&](const std::vector<Element>& w) {
        Poly s(two_t);
        for (int j = 1; j <= two_t; ++j) {
            const Element x = gf64::exp(j);
            Element acc = 0;
            for (auto sym : w) acc = gf64::add(gf64::mul(acc, x), sym);
            s[j - 1] = acc;
        }
        return s;
    };

    const Poly S = syndromes(word);
    const auto message_of = [&](const std::vector<Element>& w) {
        return std::vector<Element>(w.begin(), w.begin() + k_);
    };
    if (std::all_of(S.begin(), S.end(), [](Element s) { return s == 0; })) {
        return Decoded{message_of(word), 0};
    }

    const auto locator = [&](int pos) { return gf64::exp(n_ - 1 - pos); };

    // Erasure locator Gamma(x) = prod (1 - X_i x).
    Poly gamma{1};
    for (int pos : erasures) {
        const Element X = locator(pos);
        Poly next(gamma.size() + 1, 0);
        for (std::size_t j = 0; j < gamma.size(); ++j) {
            next[j] = gf64::add(next[j], gamma[j]);
            next[j + 1] = gf64::add(next[j + 1], gf64::mul(gamma[j], X));
        }
        gamma = std::move(next);
    }

    // Berlekamp-Massey seeded with the erasure locator.
    Poly lambda = gamma;
    Poly B = gamma;
    int L = f;
    for (int r = f + 1; r <= two_t; ++r) {
        Element delta = 0;
        for (int j = 0; j < static_cast<int>(lambda.size()); ++j) {
            const int idx = r - j;
            if (idx < 1) break;
            delta = gf64::add(delta, gf64::mul(lambda[j], S[idx - 1]));
        }
        Poly xB(B.size() + 1, 0);
        std::copy(B.begin(), B.end(), xB.begin() + 1);
        if (delta == 0) {
            B = std::move(xB);
            continue;
        }
        Poly next(std::max(lambda.size(), xB.size()), 0);
        for (std::size_t j = 0; j < lambda.size(); ++j) next[j] = lambda[j];
        for (std::size_t j = 0; j < xB.size(); ++j) {
            next[j] = gf64::add(next[j], gf64::mul(delta, xB[j]));
        }
        if (2 * L <= r + f - 1) {
            const Element dinv = gf64::inv(delta);
            B.assign(lambda.size(), 0);
            for (std::size_t j = 0; j < lambda.size(); ++j) B[j] = gf64::mul(dinv, lambda[j]);
            L = r + f - L;
        } else {
            B = std::move(xB);
        }
        lambda = std::move(next);
    }
    trim(lambda);
    const int deg = degree(lambda);
    if (deg != L || 2 * (L - f) + f > two_t) return std::nullopt;

    // Omega(x) = S(x) Lambda(x) mod x^(2t).
    Poly omega(two_t, 0);
    for (int i = 0; i < two_t; ++i) {
        for (int j = 0; j < static_cast<int>(lambda.size()) && i + j < two_t; ++j) {
            omega[i + j] = gf64::add(omega[i + j], gf64::mul(S[i], lambda[j]));
        }
    }
    // Formal derivative: odd-degree terms survive in characteristic 2.
    Poly dlambda(std::max<std::size_t>(lambda.size() - 1, 1), 0);
    for (std::size_t j = 1; j < lambda.size(); j += 2) dlambda[j - 1] = lambda[j];

    int roots = 0;
    int errors = 0;
    for (int pos = 0; pos < n_; ++pos) {
        const Element Xinv = gf64::inv(locator(pos));
        if (eval_low(lambda, Xinv) != 0) continue;
        ++roots;
        const Element den = eval_low(dlambda, Xinv);
        if (den == 0) return std::nullopt;
        const Element magnitude = gf64::div(eval_low(omega, Xinv), den);
        word[pos] = gf64::add(word[pos], magnitude);
        if (magnitude != 0 && std::find(erasures.begin(), erasures.end(), pos) == erasures.end()) {
            ++errors;
        }
    }
    // Roots outside the shortened range mean the pattern is uncorrectable.
    if (roots != deg) return std::nullopt;

    const Poly check = syndromes(word);
    if (!std::all_of(check.begin(), check.end(), [](Element s) { return s == 0; })) {
        return std::nullopt;
    }
    return Decoded{message_of(word), errors};
}

} // namespace dov
