#pragma once

#include <map>
#include <string>
#include <string_view>

namespace confbandit {

/// Single-pass placeholder substitution: every `{name}` whose name is a key
/// of `values` is replaced; any other brace text is copied verbatim.
/// Substituted text is never rescanned, so values may contain braces.
std::string fill_template(std::string_view tmpl,
                          const std::map<std::string, std::string, std::less<>>& values);

}  // namespace confbandit
