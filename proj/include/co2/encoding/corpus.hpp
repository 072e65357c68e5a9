#pragma once

/*
  Seeded random formulas in the encodable fragment, used to exercise
  the logical/process correspondence on many instances: up to three
  principals, four atom names, four conjuncts, and one or two premises
  and head atoms per clause.
*/

#include <random>
#include <string>
#include <vector>

#include "co2/pcl/formula.hpp"

namespace co2::encoding {

inline pcl::FormulaPtr random_minus_formula(std::mt19937& rng) {
    static const std::vector<Ident> principals{"A", "B", "C"};
    static const std::vector<std::string> atoms{"a", "b", "c", "d"};
    auto up_to = [&](int lo, int hi) {
        return std::uniform_int_distribution<int>(lo, hi)(rng);
    };
    auto principal = [&] { return principals[up_to(0, 2)]; };
    auto atom = [&] { return atoms[up_to(0, 3)]; };

    auto atom_conj = [&](bool tagged) {
        int n = up_to(1, 2);
        pcl::FormulaPtr conj;
        for (int j = 0; j < n; ++j) {
            pcl::FormulaPtr unit = pcl::f_atom(pcl::promise(atom()));
            if (tagged) unit = pcl::f_says(principal(), unit);
            conj = conj ? pcl::f_and(conj, unit) : unit;
        }
        return conj;
    };

    int n_conj = up_to(1, 4);
    pcl::FormulaPtr out;
    for (int i = 0; i < n_conj; ++i) {
        pcl::FormulaPtr body;
        switch (up_to(0, 2)) {
            case 0: body = atom_conj(false); break;
            case 1: body = pcl::f_imp(atom_conj(true), atom_conj(false)); break;
            default: body = pcl::f_cimp(atom_conj(true), atom_conj(false)); break;
        }
        auto conjunct = pcl::f_says(principal(), body);
        out = out ? pcl::f_and(out, conjunct) : conjunct;
    }
    return out;
}

}  // namespace co2::encoding
