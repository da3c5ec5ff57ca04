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

#include "rtsa/decay.hpp"

#include <algorithm>
#include <cmath>

namespace rtsa {

double decay_factor(Millis delta_ms, const EngineConfig& cfg) {
  if (delta_ms <= 0) return 1.0;
  const auto delta = static_cast<double>(delta_ms);
  switch (cfg.decay_fn) {
    case DecayFn::Exponential:
      return std::exp2(-delta / static_cast<double>(cfg.halflife_ms));
    case DecayFn::Step:
      return delta_ms < cfg.step_age_ms ? 1.0 : cfg.step_floor;
    case DecayFn::Linear:
      return std::max(0.0, 1.0 - delta / static_cast<double>(cfg.linear_span_ms));
    case DecayFn::None:
      return 1.0;
  }
  return 1.0;
}

}  // namespace rtsa
