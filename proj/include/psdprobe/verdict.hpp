#pragma once

#include <cstdint>
#include <optional>

#include "psdprobe/rng.hpp"

namespace psdprobe {

enum class TesterMode { one_sided, two_sided };

struct Verdict {
  bool is_psd = true;
  std::optional<Vector> witness;
  std::int64_t queries_used = 0;
  TesterMode mode = TesterMode::one_sided;
  std::optional<double> statistic;
};

}  // namespace psdprobe
