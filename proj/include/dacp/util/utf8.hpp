// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string_view>

namespace dacp {

/// Strict UTF-8 check: rejects overlongs, surrogates and code points above
/// U+10FFFF.
bool is_valid_utf8(std::string_view s);

}  // namespace dacp
