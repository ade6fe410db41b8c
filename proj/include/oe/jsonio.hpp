#pragma once

#include <json.hpp>

#include "oe/calculus.hpp"
#include "oe/interp.hpp"
#include "oe/semantics.hpp"

namespace oe {

using Json = nlohmann::ordered_json;

Json toJson(const Diagnostic& d);
Json toJson(const std::vector<Diagnostic>& ds);
Json toJson(const CspBranch& b);
Json toJson(const Csp& c);
Json toJson(const Store& s);
Json toJson(const DiffReport& r);
Json toJson(const ReductionTrace& t);
Json toJson(const std::vector<DerivedFact>& facts);

} // namespace oe
