#include <ostream>
#include <sstream>

#include "gsq/equivalence.hpp"
#include "json.hpp"

namespace gsq {

namespace {

bool fails(const std::vector<ScriptOp>& ops, const OpScript& base, const EquivalenceConfig& config) {
  // Candidates outside the exact domain are not counterexamples.
  if (domain_violation(ops, config.data_width, config.allow_inversions)) return false;
  OpScript trial{base.params, ops};
  try {
    return !check_equivalence(trial, config).equivalent;
  } catch (const ConfigError&) {
    return false;
  }
}

nlohmann::json elements(const std::vector<Element>& v) {
  auto out = nlohmann::json::array();
  for (const auto& e : v) out.push_back({{"id", e.id}, {"data", e.data}});
  return out;
}

}  // namespace

OpScript shrink(const OpScript& script, const EquivalenceConfig& config) {
  EquivalenceConfig exact = config;
  exact.checkpoint_every = 1;  // pin the divergence to the op that caused it
  const auto first = check_equivalence(script, exact);
  if (first.equivalent) return script;

  std::vector<ScriptOp> ops(script.ops.begin(),
                            script.ops.begin() + static_cast<std::ptrdiff_t>(first.divergence->op_index + 1));
  bool progress = true;
  while (progress) {
    progress = false;
    for (std::size_t i = 0; i < ops.size();) {
      auto candidate = ops;
      candidate.erase(candidate.begin() + static_cast<std::ptrdiff_t>(i));
      if (fails(candidate, script, exact)) {
        ops = std::move(candidate);
        progress = true;
      } else {
        ++i;
      }
    }
  }
  OpScript out{script.params, std::move(ops)};
  out.params.ops = out.ops.size();
  return out;
}

void write_counterexample(std::ostream& out, const OpScript& script, const EquivalenceConfig& config,
                          const EquivalenceReport& report) {
  std::ostringstream text;
  write_script(text, script);
  nlohmann::json doc;
  doc["config"] = {{"data_width", config.data_width},
                   {"timeout_width", config.timeout_width},
                   {"id_width", config.id_width},
                   {"units", config.geometry.units},
                   {"blocks", config.geometry.blocks},
                   {"with_systolic", config.with_systolic}};
  doc["equivalent"] = report.equivalent;
  doc["script"] = text.str();
  if (report.divergence) {
    const auto& d = *report.divergence;
    auto oracle = nlohmann::json::array();
    for (const auto& e : d.oracle_state) oracle.push_back({{"id", e.id}, {"expiration", e.expiration}});
    doc["divergence"] = {{"op_index", d.op_index},
                         {"what", d.what},
                         {"behavioral", elements(d.core_state)},
                         {"systolic", elements(d.systolic_state)},
                         {"oracle", oracle}};
  }
  out << doc.dump(2) << '\n';
}

}  // namespace gsq
