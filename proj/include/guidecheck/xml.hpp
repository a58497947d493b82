#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace guidecheck::xml {

/// Namespace-resolved element tree; attributes are keyed by local name.
struct Element {
  std::string ns;
  std::string name;
  std::map<std::string, std::string, std::less<>> attributes;
  std::vector<Element> children;
  std::string text;
  std::size_t line = 0;
  std::size_t column = 0;

  const std::string* attribute(std::string_view key) const;
  std::string attribute_or(std::string_view key, std::string_view fallback) const;
};

/// Parses a whole document. Throws ParseError carrying expat's line/column.
Element parse(std::istream& in);
Element parse(std::string_view text);

std::string escape(std::string_view text);

}  // namespace guidecheck::xml
