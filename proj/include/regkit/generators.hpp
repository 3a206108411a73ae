#pragma once

#include <vector>

#include "regkit/bernoulli.hpp"
#include "regkit/domain.hpp"
#include "regkit/entropy.hpp"
#include "regkit/family.hpp"
#include "regkit/rng.hpp"

namespace regkit {

// Instance generators. Everything here is deterministic given its inputs
// (and the Rng state where one is taken). Bit i of element x is
// (x >> i) & 1 throughout.

// Parity of the selected bits; empty selection means all bits.
BoundedFn gen_parity(const Domain& dom, const std::vector<int>& bits = {});

// 1 when strictly more than half the bits are set; ties go to 0.
BoundedFn gen_majority(const Domain& dom);

// Address function: the lowest a bits pick one of the 2^a data bits,
// with a the largest value satisfying a + 2^a <= bits.
BoundedFn gen_address(const Domain& dom);

BoundedFn gen_random_boolean(std::size_t n, double bias, Rng& rng);

// Fractional target split on bit 0: value lo where the bit is clear,
// hi where it is set.
BoundedFn gen_first_bit_biased(const Domain& dom, double lo, double hi);

// Every boolean function depending on at most `arity` of the domain's
// bits, deduplicated, constants included; already closed under
// complement.
Family gen_juntas(const Domain& dom, int arity);

// Conjunctions of at most `width` literals over distinct bits (the empty
// conjunction is the constant 1), closed under complement.
Family gen_conjunctions(const Domain& dom, int width);

// Parity tests 1[xor of the selected bits = 1] for every non-empty bit
// subset of size at most `width`, closed under complement.
Family gen_parity_family(const Domain& dom, int width);

// Product distribution with per-bit marginals Pr[bit i = 1] = bias[i];
// a single entry is broadcast to every bit.
Dist gen_product_biased(const Domain& dom, const std::vector<double>& bias);

// Random joint law: marginal and every conditional row drawn flat on the
// simplex (normalized exponentials).
JointDist gen_random_joint(std::size_t n, int L, Rng& rng);

// Binary joint law over a bit domain: Pr[label 1 | x] = hi where bit 0
// of x is set, lo where it is clear, with the given marginal.
JointDist gen_bit_biased_joint(const Domain& dom, Dist marg, double lo, double hi);

// Reads each member at the base point behind either block of a two-block
// union (index mod base size).
Family lift_to_union(const Family& base, std::size_t copies = 2);

// Product distinguishers for labeled inputs: label-blind lifts of the
// base members, label indicators, and base-member x label-indicator
// products, deduplicated.
LabeledFamily product_family_from(const Family& base, int L);

}  // namespace regkit
