// Multi-indices on the reference d-simplex and exact combinatorics.
//
// The ordering returned by multi_indices() is lexicographically descending
// in alpha_0 and fixes the coefficient layout of every Bernstein coefficient
// vector in the library.

#pragma once

#include <vector>

namespace szinterp {

/// d+1 non-negative entries (alpha_0, ..., alpha_d); the degree is their sum.
using MultiIndex = std::vector<int>;

/// Exact n! in integer arithmetic, valid for n <= 20.
long long factorial(int n);

/// Exact binomial coefficient, valid while intermediate products fit in 64 bit.
long long binomial(int n, int k);

int multi_index_degree(const MultiIndex& alpha);

/// All multi-indices with d+1 entries and degree m, length binom(m+d, d).
const std::vector<MultiIndex>& multi_indices(int d, int m);

/// Position of alpha within multi_indices(alpha.size()-1, |alpha|).
int multi_index_position(const MultiIndex& alpha);

}  // namespace szinterp
