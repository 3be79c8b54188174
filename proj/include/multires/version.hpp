// SPDX-License-Identifier: Apache-2.0
#pragma once

namespace multires {

inline constexpr const char* kVersion = "0.1.0";

// Bumped whenever the store layout changes incompatibly.
inline constexpr int kStoreFormat = 1;

}  // namespace multires
