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

#include "masks.hpp"

namespace wsdt {

void AttentionMask::check_rows() const {
    for (int64_t q = 0; q < n; ++q) {
        bool any = false;
        for (int64_t k = 0; k < n && !any; ++k) any = at(q, k);
        if (!any) throw ConfigError(cat("attention mask row ", q, " has no visible key"));
    }
}

AttentionMask build_m_low(const SegmentLayout& layout) {
    if (!layout.hf_level_counts.empty())
        throw ContractError("build_m_low: layout must contain only LR and LF segments");
    if (layout.n_lr < 1)
        throw ContractError("build_m_low: layout has no LR segment");
    int64_t n = layout.total();
    AttentionMask mask;
    mask.n = n;
    mask.layout = layout;
    mask.visible = std::make_shared<std::vector<uint8_t>>(static_cast<size_t>(n * n), 0);
    auto& m = *mask.visible;
    for (int64_t q = 0; q < n; ++q) {
        bool q_is_lr = q < layout.n_lr;
        for (int64_t k = 0; k < n; ++k) {
            bool k_is_lr = k < layout.n_lr;
            m[q * n + k] = q_is_lr ? static_cast<uint8_t>(k_is_lr) : uint8_t(1);
        }
    }
    mask.check_rows();
    return mask;
}

AttentionMask build_m_high(const SegmentLayout& layout) {
    if (layout.n_lr < 1 || layout.n_lf < 1 || layout.n_hf() < 1)
        throw ContractError("build_m_high: layout must contain LR, LF and HF segments in order");
    int64_t n = layout.total();
    int64_t lf_begin = layout.n_lr;
    int64_t hf_begin = layout.n_lr + layout.n_lf;
    AttentionMask mask;
    mask.n = n;
    mask.layout = layout;
    mask.visible = std::make_shared<std::vector<uint8_t>>(static_cast<size_t>(n * n), 0);
    auto& m = *mask.visible;
    auto seg = [&](int64_t i) { return i < lf_begin ? 0 : (i < hf_begin ? 1 : 2); };
    for (int64_t q = 0; q < n; ++q) {
        int sq = seg(q);
        for (int64_t k = 0; k < n; ++k) {
            int sk = seg(k);
            bool vis = false;
            switch (sq) {
                case 0: vis = sk == 0; break;             // LR -> LR only
                case 1: vis = sk != 0; break;             // LF -> LF, HF
                case 2: vis = sk != 1; break;             // HF -> LR, HF (all levels)
            }
            m[q * n + k] = static_cast<uint8_t>(vis);
        }
    }
    mask.check_rows();
    return mask;
}

}  // namespace wsdt
