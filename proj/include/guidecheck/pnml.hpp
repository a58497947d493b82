#pragma once

#include <iosfwd>
#include <string>
#include <string_view>

#include "guidecheck/petri.hpp"

namespace guidecheck::petri {

/// PNML core-model export. Silent transitions carry ProM's "$invisible$"
/// marker; the final marking is written both as ProM <finalmarkings> and as a
/// guidecheck toolspecific block.
void write_pnml(const PetriNet& net, std::ostream& out, std::string_view name = "net");

/// Reads nets written by write_pnml (and plain PNML core models with
/// <finalmarkings>). Throws ParseError.
PetriNet read_pnml(std::istream& in);

}  // namespace guidecheck::petri
