#include "guidecheck/pnml.hpp"

#include <fmt/format.h>

#include <cstdlib>
#include <map>
#include <ostream>

#include "guidecheck/error.hpp"
#include "guidecheck/xml.hpp"

namespace guidecheck::petri {

namespace {

constexpr std::string_view kInvisible = "$invisible$";
constexpr std::string_view kTool = "guidecheck";

void write_marking_places(std::ostream& out, const PetriNet& net, const Marking& m, std::string_view indent) {
  for (PlaceIndex p = 0; p < m.size(); ++p) {
    if (m[p] == 0) continue;
    out << indent << fmt::format("<place idref=\"{}\"><text>{}</text></place>\n", xml::escape(net.place(p).id), m[p]);
  }
}

std::string name_text(const xml::Element& element) {
  for (const auto& child : element.children) {
    if (child.name != "name") continue;
    for (const auto& text : child.children) {
      if (text.name == "text") return text.text;
    }
  }
  return {};
}

std::uint32_t token_text(const xml::Element& element) {
  for (const auto& child : element.children) {
    if (child.name == "text") return static_cast<std::uint32_t>(std::strtoul(child.text.c_str(), nullptr, 10));
  }
  return 0;
}

/// Collects elements named `name` directly under the net or any (nested) page.
void collect(const xml::Element& root, std::string_view name, std::vector<const xml::Element*>& out) {
  for (const auto& child : root.children) {
    if (child.name == name) out.push_back(&child);
    if (child.name == "page") collect(child, name, out);
  }
}

}  // namespace

void write_pnml(const PetriNet& net, std::ostream& out, std::string_view name) {
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<pnml>\n";
  out << "  <net id=\"net1\" type=\"http://www.pnml.org/version-2009/grammar/pnmlcoremodel\">\n";
  out << fmt::format("    <name><text>{}</text></name>\n", xml::escape(name));
  out << "    <page id=\"page1\">\n";
  for (PlaceIndex p = 0; p < net.places().size(); ++p) {
    const auto& place = net.place(p);
    out << fmt::format("      <place id=\"{}\"><name><text>{}</text></name>", xml::escape(place.id),
                       xml::escape(place.name.empty() ? place.id : place.name));
    if (net.initial_marking().size() == net.places().size() && net.initial_marking()[p] > 0) {
      out << fmt::format("<initialMarking><text>{}</text></initialMarking>", net.initial_marking()[p]);
    }
    out << "</place>\n";
  }
  for (const auto& t : net.transitions()) {
    out << fmt::format("      <transition id=\"{}\"><name><text>{}</text></name>", xml::escape(t.id),
                       xml::escape(t.label ? *t.label : t.id));
    if (t.silent()) out << fmt::format("<toolspecific tool=\"ProM\" version=\"6.4\" activity=\"{}\"/>", kInvisible);
    out << "</transition>\n";
  }
  std::size_t arc = 0;
  for (const auto& t : net.transitions()) {
    for (const auto p : t.inputs) {
      out << fmt::format("      <arc id=\"a{}\" source=\"{}\" target=\"{}\"/>\n", arc++, xml::escape(net.place(p).id),
                         xml::escape(t.id));
    }
    for (const auto p : t.outputs) {
      out << fmt::format("      <arc id=\"a{}\" source=\"{}\" target=\"{}\"/>\n", arc++, xml::escape(t.id),
                         xml::escape(net.place(p).id));
    }
  }
  out << "    </page>\n";
  if (net.final_marking().size() == net.places().size()) {
    out << "    <finalmarkings>\n      <marking>\n";
    write_marking_places(out, net, net.final_marking(), "        ");
    out << "      </marking>\n    </finalmarkings>\n";
  }
  out << fmt::format("    <toolspecific tool=\"{}\" version=\"1.0\">\n", kTool);
  out << "      <initialMarking>\n";
  if (net.initial_marking().size() == net.places().size()) {
    write_marking_places(out, net, net.initial_marking(), "        ");
  }
  out << "      </initialMarking>\n      <finalMarking>\n";
  if (net.final_marking().size() == net.places().size()) {
    write_marking_places(out, net, net.final_marking(), "        ");
  }
  out << "      </finalMarking>\n    </toolspecific>\n";
  out << "  </net>\n</pnml>\n";
}

PetriNet read_pnml(std::istream& in) {
  const auto root = xml::parse(in);
  if (root.name != "pnml") throw ParseError("PNML root element must be <pnml>", root.line, root.column);
  const xml::Element* net_element = nullptr;
  for (const auto& child : root.children) {
    if (child.name == "net") {
      net_element = &child;
      break;
    }
  }
  if (net_element == nullptr) throw ParseError("PNML document has no <net>", root.line, root.column);

  PetriNet net;
  std::map<std::string, PlaceIndex, std::less<>> places;
  std::map<std::string, TransitionIndex, std::less<>> transitions;
  std::vector<std::pair<PlaceIndex, std::uint32_t>> initial;

  std::vector<const xml::Element*> elements;
  collect(*net_element, "place", elements);
  for (const auto* p : elements) {
    const auto id = p->attribute_or("id", "");
    if (id.empty() || places.contains(id)) throw ParseError("place without unique id", p->line, p->column);
    const auto index = net.add_place(id, name_text(*p));
    places.emplace(id, index);
    for (const auto& child : p->children) {
      if (child.name == "initialMarking") initial.emplace_back(index, token_text(child));
    }
  }
  elements.clear();
  collect(*net_element, "transition", elements);
  for (const auto* t : elements) {
    const auto id = t->attribute_or("id", "");
    if (id.empty() || transitions.contains(id)) throw ParseError("transition without unique id", t->line, t->column);
    bool invisible = false;
    for (const auto& child : t->children) {
      if (child.name == "toolspecific" && child.attribute_or("activity", "") == kInvisible) invisible = true;
    }
    transitions.emplace(id, net.add_transition(id, invisible ? std::nullopt : std::optional{name_text(*t)}));
  }
  elements.clear();
  collect(*net_element, "arc", elements);
  for (const auto* a : elements) {
    const auto source = a->attribute_or("source", "");
    const auto target = a->attribute_or("target", "");
    if (const auto p = places.find(source), t = transitions.find(target); p != places.end() && t != transitions.end()) {
      net.add_input_arc(p->second, t->second);
    } else if (const auto t2 = transitions.find(source), p2 = places.find(target);
               t2 != transitions.end() && p2 != places.end()) {
      net.add_output_arc(t2->second, p2->second);
    } else {
      throw ParseError(fmt::format("arc '{}' does not connect a place and a transition", a->attribute_or("id", "")),
                       a->line, a->column);
    }
  }

  Marking initial_marking = net.empty_marking();
  for (const auto& [p, n] : initial) initial_marking.add(p, n);
  net.set_initial_marking(std::move(initial_marking));

  Marking final_marking = net.empty_marking();
  bool have_final = false;
  for (const auto& child : net_element->children) {
    if (child.name != "finalmarkings" || have_final) continue;
    for (const auto& marking : child.children) {
      if (marking.name != "marking") continue;
      for (const auto& ref : marking.children) {
        const auto p = places.find(ref.attribute_or("idref", ""));
        if (p == places.end()) throw ParseError("final marking references unknown place", ref.line, ref.column);
        final_marking.add(p->second, token_text(ref));
      }
      have_final = true;
      break;
    }
  }
  if (!have_final) throw ParseError("PNML net has no final marking", net_element->line, net_element->column);
  net.set_final_marking(std::move(final_marking));
  return net;
}

}  // namespace guidecheck::petri
