#!/usr/bin/env python3
# Copyright 2026 The uqwiz Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#  http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Independent reference values frozen into the C++ unit tests.

Everything here is computed with plain Python floats and direct formulas,
separate from the C++ implementation. Run it to regenerate the constants
found in tests/quantifiers_test.cc and tests/evaluation_test.cc.
"""
from fractions import Fraction
from itertools import product
import math


def entropy(p):
    return -sum(x * math.log(x) for x in p if x > 0)


def mean_rows(rows):
    s = len(rows)
    return [sum(r[c] for r in rows) / s for c in range(len(rows[0]))]


def main():
    samples = [[0.8, 0.2], [0.6, 0.4]]
    m = mean_rows(samples)
    pe = entropy(m)
    mi = pe - sum(entropy(r) for r in samples) / len(samples)
    print(f"mean={m}")
    print(f"pred_entropy={pe:.17g}")
    print(f"H([0.8,0.2])={entropy(samples[0]):.17g}")
    print(f"H([0.6,0.4])={entropy(samples[1]):.17g}")
    print(f"mutual_information={mi:.17g}")
    print(f"ln2={math.log(2):.17g} ln4={math.log(4):.17g}")

    # AUROC by brute-force pair counting (wrong vs correct, ties = 1/2).
    wrong, correct = [0.9, 0.8], [0.1, 0.2]
    pairs = [(w, c) for w in wrong for c in correct]
    auc = sum(Fraction(1) if w > c else Fraction(1, 2) if w == c else 0
              for w, c in pairs) / len(pairs)
    print(f"auroc={auc}")

    # One-sided sign test over 10 seeds: smallest k with P(X >= k) <= 0.05.
    for k in range(11):
        tail = sum(math.comb(10, i) for i in range(k, 11)) / 2 ** 10
        if tail <= 0.05:
            print(f"sign_test_min_successes={k} tail={tail:.6f}")
            break

    # Converted plain model used by the var_ratio smoke test: identity dense,
    # dropout p=0.2, identity dense, softmax, input [1, 0.5]. A sample votes
    # class 1 iff unit 0 is dropped and unit 1 kept.
    p_flip = 0.2 * 0.8
    p_unanimous = (1 - p_flip) ** 32 + p_flip ** 32
    p_all_zero = p_unanimous ** 10
    print(f"P(one input unanimous, S=32)={p_unanimous:.6g}")
    print(f"P(all 10 inputs zero var_ratio)={p_all_zero:.3g}")

if __name__ == "__main__":
    main()
