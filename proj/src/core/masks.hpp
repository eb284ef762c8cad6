// Copyright 2026 WSDT Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "common.hpp"
#include "tensor.hpp"

namespace wsdt {

/// Token segment boundaries of a sequence: the LR conditioning block, the LF
/// block, then HF blocks grouped by decomposition level (ordered j = J..1,
/// three directional sub-bands per level).
struct SegmentLayout {
    int64_t n_lr = 0;
    int64_t n_lf = 0;
    std::vector<int64_t> hf_level_counts;  // tokens per level, order j = J..1

    int64_t n_hf() const {
        int64_t s = 0;
        for (int64_t c : hf_level_counts) s += c;
        return s;
    }
    int64_t total() const { return n_lr + n_lf + n_hf(); }
};

/// Boolean query x key visibility matrix with its segment layout. Storage is
/// shared so attention ops can hold it alive without copying.
struct AttentionMask {
    int64_t n = 0;
    std::shared_ptr<std::vector<uint8_t>> visible;  // row-major n x n
    SegmentLayout layout;

    MaskView view() const { return {visible, n, n}; }
    bool at(int64_t q, int64_t k) const { return (*visible)[q * n + k] != 0; }

    /// Construction invariant: every query row sees at least one key.
    void check_rows() const;
};

/// LEDec mask over an [LR | LF] sequence: LR queries attend only within LR
/// (the conditioning stream stays clean of noised tokens); LF queries attend
/// to everything.
AttentionMask build_m_low(const SegmentLayout& layout);

/// HDDec mask over an [LR | LF | HF] sequence:
///   - LR queries attend only within LR;
///   - LF queries do not see LR (realignment must come through HF);
///   - HF queries do not see LF, but do see LR and every HF level.
AttentionMask build_m_high(const SegmentLayout& layout);

}  // namespace wsdt
