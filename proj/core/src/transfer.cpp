#include "dcn/transfer.hpp"

#include <sstream>

#include "dcn/errors.hpp"

namespace dcn {

std::string to_string(FreezePolicy p) {
  return p == FreezePolicy::fc_only ? "fc" : "fc+conv";
}

FreezePolicy freeze_policy_from_string(const std::string& s) {
  if (s == "fc") return FreezePolicy::fc_only;
  if (s == "fc+conv") return FreezePolicy::fc_plus_conv;
  throw config_error("unknown freeze policy: " + s + " (want fc or fc+conv)");
}

std::string TransplantReport::to_text() const {
  std::ostringstream os;
  for (const auto& l : layers) {
    os << l.name << ' ';
    switch (l.action) {
      case TransplantAction::copied: os << "copied"; break;
      case TransplantAction::reinitialized: os << "reinitialized"; break;
      case TransplantAction::skipped: os << "skipped"; break;
    }
    os << " source=" << (l.source_shape.empty() ? "-" : l.source_shape)
       << " target=" << l.target_shape << "\n";
  }
  return os.str();
}

std::pair<ParamStore, TransplantReport> transplant(
    const Checkpoint& source, const NetworkSpec& target_spec,
    std::uint64_t seed, double init_scale) {
  ParamStore params = init_params(target_spec, seed, init_scale);
  TransplantReport report;

  std::vector<const ParamEntry*> src_trunk;
  for (const auto& e : source.params.entries)
    if (!e.is_head) src_trunk.push_back(&e);
  std::size_t trunk_pos = 0;

  for (auto& e : params.entries) {
    TransplantLayer row;
    row.name = e.name;
    row.target_shape = e.weight.shape_str();
    if (e.is_head) {
      // heads are always freshly initialized
      row.action = TransplantAction::reinitialized;
      report.layers.push_back(std::move(row));
      continue;
    }
    const ParamEntry* src =
        trunk_pos < src_trunk.size() ? src_trunk[trunk_pos] : nullptr;
    ++trunk_pos;
    if (src) row.source_shape = src->weight.shape_str();
    const bool matches = src && src->kind == e.kind &&
                         src->weight.same_shape(e.weight) &&
                         src->bias.same_shape(e.bias);
    if (matches) {
      e.weight = src->weight;
      e.bias = src->bias;
      // velocities stay zero: source momentum is meaningless here
      row.action = TransplantAction::copied;
    } else {
      if (e.kind == LayerKind::conv)
        throw incompatibility_error(
            "transplant: conv layer " + e.name + " mismatch (source " +
            (src ? src->weight.shape_str() : std::string("absent")) +
            " vs target " + e.weight.shape_str() + ")");
      row.action = TransplantAction::reinitialized;
    }
    report.layers.push_back(std::move(row));
  }
  return {std::move(params), std::move(report)};
}

void apply_freeze_policy(ParamStore& params, FreezePolicy policy) {
  bool has_conv = false, has_fc = false;
  for (const auto& e : params.entries) {
    has_conv |= e.kind == LayerKind::conv;
    has_fc |= e.kind == LayerKind::fc;
  }
  if (!has_conv || !has_fc)
    throw config_error("freeze policy needs both conv and fc layers");
  for (auto& e : params.entries)
    e.frozen = policy == FreezePolicy::fc_only && !e.is_head &&
               e.kind == LayerKind::conv;
}

TransferResult transfer_train(const Checkpoint& source,
                              const NetworkSpec& target_spec,
                              const TrainData& data, FreezePolicy policy,
                              const TrainConfig& cfg, std::ostream* log) {
  TransferResult result;
  auto [params, report] = transplant(source, target_spec, cfg.seed);
  result.transplant_report = std::move(report);
  apply_freeze_policy(params, policy);
  result.train_report = train(target_spec, params, data, cfg, log);
  result.params = std::move(params);
  return result;
}

}  // namespace dcn
