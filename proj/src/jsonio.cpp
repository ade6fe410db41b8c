#include "oe/jsonio.hpp"

namespace oe {

Json toJson(const Diagnostic& d) {
  Json j;
  j["kind"] = diagKindName(d.kind);
  j["location"] = d.location;
  j["message"] = d.message;
  return j;
}

Json toJson(const std::vector<Diagnostic>& ds) {
  Json j = Json::array();
  for (const auto& d : ds) j.push_back(toJson(d));
  return j;
}

Json toJson(const CspBranch& b) {
  Json j;
  j["guard"] = renderBool(b.guard, RenderMode::Predicate);
  Json eqs = Json::object();
  for (const auto& [slot, e] : b.sp.finalEqs)
    eqs[slot.key()] = renderMath(e, RenderMode::Predicate);
  j["finalEqs"] = std::move(eqs);
  Json res = Json::array();
  for (const auto& r : b.sp.residuals) res.push_back(renderBool(r, RenderMode::Predicate));
  j["residuals"] = std::move(res);
  return j;
}

Json toJson(const Csp& c) {
  Json j;
  Json branches = Json::array();
  for (const auto& b : c.branches) branches.push_back(toJson(b));
  j["branches"] = std::move(branches);
  j["diagnostics"] = toJson(c.diagnostics);
  return j;
}

Json toJson(const Store& s) {
  Json j = Json::object();
  for (const auto& [name, v] : s.vals) {
    switch (v.t) {
      case Value::T::Int: j[name] = v.i.str(); break;
      case Value::T::Addr: j[name] = "&" + v.addr.of; break;
      case Value::T::PsiV: j[name] = "psi"; break;
    }
  }
  for (const auto& [name, arr] : s.arrays) {
    Json a = Json::array();
    for (const auto& v : arr) {
      switch (v.t) {
        case Value::T::Int: a.push_back(v.i.str()); break;
        case Value::T::Addr: a.push_back("&" + v.addr.of); break;
        case Value::T::PsiV: a.push_back("psi"); break;
      }
    }
    j[name] = std::move(a);
  }
  return j;
}

Json toJson(const DiffReport& r) {
  Json j;
  j["samples"] = r.samples;
  j["checked"] = r.checked;
  j["skipped"] = r.skipped;
  if (!r.skipReason.empty()) j["skipReason"] = r.skipReason;
  Json ms = Json::array();
  for (const auto& m : r.mismatches) {
    Json e;
    e["store"] = toJson(m.store);
    e["detail"] = m.detail;
    ms.push_back(std::move(e));
  }
  j["mismatches"] = std::move(ms);
  return j;
}

Json toJson(const ReductionTrace& t) {
  Json j = Json::array();
  for (const auto& s : t.steps) {
    Json e;
    e["rule"] = s.rule;
    Json before = Json::array();
    for (const auto& c : s.before) before.push_back(renderCsp(c));
    Json after = Json::array();
    for (const auto& c : s.after) after.push_back(renderCsp(c));
    e["before"] = std::move(before);
    e["after"] = std::move(after);
    j.push_back(std::move(e));
  }
  return j;
}

Json toJson(const std::vector<DerivedFact>& facts) {
  Json j = Json::array();
  for (const auto& f : facts) {
    Json e;
    e["ref"] = renderMath(f.lhs, RenderMode::Predicate);
    e["names"] = f.pointee;
    e["value"] = renderMath(f.value, RenderMode::Predicate);
    j.push_back(std::move(e));
  }
  return j;
}

} // namespace oe
