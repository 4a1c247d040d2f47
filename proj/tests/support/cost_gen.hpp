#pragma once

#include "perflens/cost_model.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace perflens::testing {

struct CostGen {
    std::mt19937_64 rng;
    explicit CostGen(std::uint64_t seed) : rng(seed) {}

    int pick(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

    cost::SymbolicCost operator()(bool allow_unknown = false) {
        if (allow_unknown && pick(0, 9) == 0) return cost::SymbolicCost::unknown();
        static const char* syms[] = {"n", "m", "k"};
        std::vector<cost::Monomial> ms;
        const int count = pick(0, 4);
        for (int i = 0; i < count; ++i) {
            cost::Monomial m;
            m.coefficient = pick(0, 3) == 0 ? cost::Rational(pick(1, 5), 2) : cost::Rational(pick(1, 6));
            for (const char* s : syms) {
                const int e = pick(0, 2);
                if (e > 0) m.factors.powers[s] = static_cast<unsigned>(e);
                if (pick(0, 5) == 0) m.factors.log_powers[s] = 1;
            }
            ms.push_back(m);
        }
        return cost::SymbolicCost::from_monomials(ms);
    }

    cost::Valuation valuation() {
        return {{"n", static_cast<std::uint64_t>(pick(0, 12))},
                {"m", static_cast<std::uint64_t>(pick(0, 12))},
                {"k", static_cast<std::uint64_t>(pick(0, 12))}};
    }
};

}  // namespace perflens::testing
