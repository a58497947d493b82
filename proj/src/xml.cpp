#include "guidecheck/xml.hpp"

#include <expat.h>

#include <istream>
#include <memory>
#include <sstream>

#include "guidecheck/error.hpp"

namespace guidecheck::xml {

namespace {

constexpr char kNamespaceSeparator = '|';

std::pair<std::string, std::string> split_name(const char* qualified) {
  const std::string_view name{qualified};
  const auto bar = name.rfind(kNamespaceSeparator);
  if (bar == std::string_view::npos) return {std::string{}, std::string{name}};
  return {std::string{name.substr(0, bar)}, std::string{name.substr(bar + 1)}};
}

struct Builder {
  XML_Parser parser = nullptr;
  Element root;
  bool have_root = false;
  std::vector<Element*> open;

  static void on_start(void* data, const XML_Char* name, const XML_Char** attrs) {
    auto& self = *static_cast<Builder*>(data);
    Element element;
    std::tie(element.ns, element.name) = split_name(name);
    element.line = XML_GetCurrentLineNumber(self.parser);
    element.column = XML_GetCurrentColumnNumber(self.parser) + 1;
    for (std::size_t i = 0; attrs[i] != nullptr; i += 2) {
      element.attributes.insert_or_assign(split_name(attrs[i]).second, attrs[i + 1]);
    }
    Element* slot;
    if (self.open.empty()) {
      self.root = std::move(element);
      self.have_root = true;
      slot = &self.root;
    } else {
      auto& siblings = self.open.back()->children;
      siblings.push_back(std::move(element));
      slot = &siblings.back();
    }
    self.open.push_back(slot);
  }

  static void on_end(void* data, const XML_Char*) { static_cast<Builder*>(data)->open.pop_back(); }

  static void on_text(void* data, const XML_Char* text, int length) {
    auto& self = *static_cast<Builder*>(data);
    if (!self.open.empty()) self.open.back()->text.append(text, static_cast<std::size_t>(length));
  }
};

using ParserHandle = std::unique_ptr<std::remove_pointer_t<XML_Parser>, decltype(&XML_ParserFree)>;

}  // namespace

const std::string* Element::attribute(std::string_view key) const {
  const auto it = attributes.find(key);
  return it == attributes.end() ? nullptr : &it->second;
}

std::string Element::attribute_or(std::string_view key, std::string_view fallback) const {
  const auto* value = attribute(key);
  return value ? *value : std::string{fallback};
}

Element parse(std::istream& in) {
  ParserHandle parser{XML_ParserCreateNS(nullptr, kNamespaceSeparator), &XML_ParserFree};
  Builder builder;
  builder.parser = parser.get();
  XML_SetUserData(parser.get(), &builder);
  XML_SetElementHandler(parser.get(), &Builder::on_start, &Builder::on_end);
  XML_SetCharacterDataHandler(parser.get(), &Builder::on_text);

  auto fail = [&] {
    throw ParseError(std::string{"malformed XML: "} + XML_ErrorString(XML_GetErrorCode(parser.get())),
                     XML_GetCurrentLineNumber(parser.get()),
                     XML_GetCurrentColumnNumber(parser.get()) + 1);
  };

  char buffer[1 << 14];
  while (true) {
    in.read(buffer, sizeof buffer);
    const auto got = static_cast<int>(in.gcount());
    const bool last = got < static_cast<int>(sizeof buffer);
    if (XML_Parse(parser.get(), buffer, got, last ? XML_TRUE : XML_FALSE) == XML_STATUS_ERROR) fail();
    if (last) break;
  }
  if (!builder.have_root) throw ParseError("malformed XML: no root element", 1);
  return std::move(builder.root);
}

Element parse(std::string_view text) {
  std::istringstream in{std::string{text}};
  return parse(in);
}

std::string escape(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (const char c : text) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      case '\'':
        out += "&apos;";
        break;
      default:
        out.push_back(c);
    }
  }
  return out;
}

}  // namespace guidecheck::xml
