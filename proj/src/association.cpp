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

#include "rtsa/association.hpp"

#include <algorithm>
#include <cmath>

namespace rtsa {
namespace {

double g_term(double observed, double row, double col, double n) {
  if (observed <= 0) return 0.0;
  return observed * std::log(observed * n / (row * col));
}

}  // namespace

ContingencyTable build_table(const Query& a, const Query& b, Millis now, const Stores& stores,
                             const EngineConfig& cfg) {
  const CoocEntry* entry = stores.cooc.find(a.text, b.text);
  if (entry == nullptr) throw InsufficientSupport("pair " + a.text + " -> " + b.text + " never observed");
  ContingencyTable t;
  t.n11 = entry->weight.read(now, cfg);
  if (t.n11 < cfg.min_pair_support) {
    throw InsufficientSupport("pair " + a.text + " -> " + b.text + " below minimum support");
  }
  const double a_mass = stores.queries.contexts(a.text, now, cfg) * cfg.context_fanout;
  const double b_mass = stores.queries.contexts(b.text, now, cfg);
  t.n21 = std::max(0.0, a_mass - t.n11);
  t.n12 = std::max(0.0, b_mass - t.n11);
  const double n = std::max(stores.queries.total_mass(now, cfg), t.n11 + t.n12 + t.n21);
  t.n22 = std::max(0.0, n - t.n11 - t.n12 - t.n21);
  return t;
}

double conditional_relative_frequency(const ContingencyTable& t) {
  const double a = t.col1();
  return a > 0 ? t.n11 / a : 0.0;
}

double pmi(const ContingencyTable& t) {
  const double n = t.total();
  const double row = t.row1();
  const double col = t.col1();
  if (n <= 0 || row <= 0 || col <= 0 || t.n11 <= 0) {
    throw UndefinedMetric("pmi undefined: zero cell or margin");
  }
  return std::log2((t.n11 / n) / ((row / n) * (col / n)));
}

double log_likelihood_ratio(const ContingencyTable& t) {
  const double n = t.total();
  if (n <= 0) throw UndefinedMetric("log-likelihood ratio undefined: empty table");
  const double g = g_term(t.n11, t.row1(), t.col1(), n) + g_term(t.n12, t.row1(), t.col2(), n) +
                   g_term(t.n21, t.row2(), t.col1(), n) + g_term(t.n22, t.row2(), t.col2(), n);
  return std::max(0.0, 2.0 * g);
}

double chi_square(const ContingencyTable& t) {
  const double r1 = t.row1();
  const double r2 = t.row2();
  const double c1 = t.col1();
  const double c2 = t.col2();
  if (r1 <= 0 || r2 <= 0 || c1 <= 0 || c2 <= 0) {
    throw UndefinedMetric("chi-square undefined: zero margin");
  }
  const double cross = t.n11 * t.n22 - t.n12 * t.n21;
  return t.total() * cross * cross / (r1 * r2 * c1 * c2);
}

}  // namespace rtsa
