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

#include "rtsa/config.hpp"

namespace rtsa {

/// Multiplier in [0, 1] applied to a weight last touched `delta_ms` ago.
///   Exponential: 2^(-delta / halflife)
///   Step:        1 while delta < step_age, then step_floor
///   Linear:      max(0, 1 - delta / linear_span)
///   None:        1
/// Always 1 at delta = 0.
double decay_factor(Millis delta_ms, const EngineConfig& cfg);

/// True when decaying to t1 and then to t2 equals decaying straight to t2.
inline bool decay_composes(DecayFn fn) {
  return fn == DecayFn::Exponential || fn == DecayFn::None;
}

/// A weight with the time it was last written. Reads apply the decay lazily;
/// `touched_ts` only moves on writes (and on materialization for composing
/// decay functions), so a read never changes what later reads return.
class DecayedWeight {
 public:
  DecayedWeight() = default;
  DecayedWeight(double value, Millis touched_ts) : value_(value), touched_ts_(touched_ts) {}

  double read(Millis now, const EngineConfig& cfg) const {
    if (now <= touched_ts_) return value_;
    return value_ * decay_factor(now - touched_ts_, cfg);
  }

  /// Decays to `now` and adds `increment`.
  void add(double increment, Millis now, const EngineConfig& cfg) {
    value_ = read(now, cfg) + increment;
    if (now > touched_ts_) touched_ts_ = now;
  }

  /// Folds the decay up to `now` into the stored value. A no-op for decay
  /// functions that do not compose, whose age must keep counting from the
  /// last write.
  void materialize(Millis now, const EngineConfig& cfg) {
    if (!decay_composes(cfg.decay_fn) || now <= touched_ts_) return;
    value_ = read(now, cfg);
    touched_ts_ = now;
  }

  double raw_value() const { return value_; }
  Millis touched_ts() const { return touched_ts_; }

 private:
  double value_ = 0.0;
  Millis touched_ts_ = 0;
};

}  // namespace rtsa
