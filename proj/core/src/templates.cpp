#include "confbandit/templates.hpp"

namespace confbandit {

std::string fill_template(std::string_view tmpl,
                          const std::map<std::string, std::string, std::less<>>& values) {
  std::string out;
  out.reserve(tmpl.size());
  std::size_t pos = 0;
  while (pos < tmpl.size()) {
    const std::size_t open = tmpl.find('{', pos);
    if (open == std::string_view::npos) {
      out.append(tmpl.substr(pos));
      break;
    }
    out.append(tmpl.substr(pos, open - pos));
    const std::size_t close = tmpl.find('}', open + 1);
    if (close != std::string_view::npos) {
      const auto name = tmpl.substr(open + 1, close - open - 1);
      if (auto it = values.find(name); it != values.end()) {
        out.append(it->second);
        pos = close + 1;
        continue;
      }
    }
    out.push_back('{');
    pos = open + 1;
  }
  return out;
}

}  // namespace confbandit
