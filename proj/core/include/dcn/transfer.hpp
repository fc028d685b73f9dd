#pragma once

#include <string>
#include <vector>

#include "dcn/netspec.hpp"
#include "dcn/trainer.hpp"

namespace dcn {

// Which parameter groups fine-tuning may update.
enum class FreezePolicy {
  fc_plus_conv,  // update everything
  fc_only        // freeze all convolution layers
};

std::string to_string(FreezePolicy p);
FreezePolicy freeze_policy_from_string(const std::string& s);

enum class TransplantAction { copied, reinitialized, skipped };

struct TransplantLayer {
  std::string name;
  TransplantAction action;
  std::string source_shape;  // empty when no positional counterpart
  std::string target_shape;
};

struct TransplantReport {
  std::vector<TransplantLayer> layers;  // one per target learnable layer
  std::string to_text() const;
};

// Copies shape-matching trunk layers (by position) from the source
// checkpoint into a fresh parameter store for the target spec. Heads and
// non-matching FC layers are freshly initialized; velocities are zero.
// A conv mismatch anywhere is an incompatibility_error naming the layer.
std::pair<ParamStore, TransplantReport> transplant(const Checkpoint& source,
                                                   const NetworkSpec& target_spec,
                                                   std::uint64_t seed,
                                                   double init_scale = 0.01);

// fc_only freezes every conv layer; fc_plus_conv clears all freeze flags.
// Heads are never frozen. Idempotent.
void apply_freeze_policy(ParamStore& params, FreezePolicy policy);

struct TransferResult {
  ParamStore params;
  TransplantReport transplant_report;
  TrainReport train_report;
};

// transplant -> apply_freeze_policy -> train.
TransferResult transfer_train(const Checkpoint& source,
                              const NetworkSpec& target_spec,
                              const TrainData& data, FreezePolicy policy,
                              const TrainConfig& cfg,
                              std::ostream* log = nullptr);

}  // namespace dcn
