/*
    Licensed under the Apache License, Version 2.0 (the "License");
    you may not use this file except in compliance with the License.
    You may obtain a copy of the License at

        https://www.apache.org/licenses/LICENSE-2.0

    Unless required by applicable law or agreed to in writing, software
    distributed under the License is distributed on an "AS IS" BASIS,
    WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
    See the License for the specific language governing permissions and
    limitations under the License.
*/

#pragma once

#include "rtsa/stores.hpp"

namespace rtsa {

class InsufficientSupport : public Error {
 public:
  using Error::Error;
};

/// A metric whose formula divides by (or takes the log of) a zero cell.
class UndefinedMetric : public Error {
 public:
  using Error::Error;
};

/// 2x2 table of (soft) counts for the ordered pair A -> B.
///
///              A        not A
///   B        n11        n12
///   not B    n21        n22
///
/// so col1 = n11 + n21 is the mass of contexts containing A and
/// row1 = n11 + n12 the mass of contexts containing B.
struct ContingencyTable {
  double n11 = 0.0;
  double n12 = 0.0;
  double n21 = 0.0;
  double n22 = 0.0;

  double total() const { return n11 + n12 + n21 + n22; }
  double row1() const { return n11 + n12; }
  double row2() const { return n21 + n22; }
  double col1() const { return n11 + n21; }
  double col2() const { return n12 + n22; }
};

/// Assembles the table for A -> B from the stores:
///   n11 = cooccurrence weight A -> B
///   n21 = max(0, contexts(A) * context_fanout - n11)
///   n12 = max(0, contexts(B) - n11)
///   N   = total query weight mass (raised to the three cells if smaller)
///   n22 = N - n11 - n12 - n21
/// With decay off and unit weights these are plain context counts.
/// Throws InsufficientSupport if the pair is absent or n11 < min_pair_support.
ContingencyTable build_table(const Query& a, const Query& b, Millis now, const Stores& stores,
                             const EngineConfig& cfg);

/// n11 / (n11 + n21); 0 when the A column is empty.
double conditional_relative_frequency(const ContingencyTable& t);

/// log2((n11/N) / ((row1/N)(col1/N))). Throws UndefinedMetric when N, row1,
/// col1 or n11 is zero.
double pmi(const ContingencyTable& t);

/// Dunning's G^2 = 2 sum n_ij ln(n_ij N / (row_i col_j)), with 0 ln 0 = 0.
/// Throws UndefinedMetric when N is zero.
double log_likelihood_ratio(const ContingencyTable& t);

/// N (n11 n22 - n12 n21)^2 / (row1 row2 col1 col2). Throws UndefinedMetric on
/// a zero margin.
double chi_square(const ContingencyTable& t);

}  // namespace rtsa
