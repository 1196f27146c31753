#pragma once

#include "lifebench/lifelog/types.hpp"

namespace lifebench {

// Deterministic synthetic lifelog bundle: same spec, byte-identical dataset.
// Each user's stream is seeded independently from (spec.seed, user id), so
// the output is insensitive to generation order.
AlignedDataset synthesize_dataset(const SynthSpec& spec);

}  // namespace lifebench
