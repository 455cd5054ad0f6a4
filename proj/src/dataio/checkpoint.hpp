#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "nn/optim.hpp"
#include "nn/tensor.hpp"

namespace cogadapt::dataio {

// Parameter file, little-endian:
//   magic "CGCK" | version u16 | scenario u16+bytes | epoch i32 | metric f64
//   | n_leaves u32 | per leaf: name u16+bytes, count u32, values f64
// Leaves are written sorted by name and at full double precision, so equal
// state always produces equal bytes.
inline constexpr std::uint16_t kCheckpointVersion = 1;

struct CheckpointMeta {
  std::string scenario;  // free-form tag ("A", "pretrain", ...)
  int epoch = 0;
  double val_metric = 0.0;
};

using LeafView = std::vector<std::pair<std::string, const nn::Vec*>>;
using LeafSlots = std::vector<std::pair<std::string, nn::Vec*>>;

// Convenience: one leaf list from a model's parameter and buffer registries.
LeafView checkpoint_leaves(const std::vector<nn::ParamRef>& params,
                           const std::vector<nn::BufferRef>& buffers);
LeafSlots checkpoint_slots(const std::vector<nn::ParamRef>& params,
                           const std::vector<nn::BufferRef>& buffers);

void write_checkpoint(const std::string& path, const CheckpointMeta& meta,
                      const LeafView& leaves);

// Fills every slot byte-exactly and returns the metadata. The file must carry
// exactly the slot set with exactly the slot sizes; anything else is a shape
// error naming the leaf.
CheckpointMeta read_checkpoint(const std::string& path, const LeafSlots& slots);

// Inspection form: whatever the file holds.
CheckpointMeta read_checkpoint_raw(const std::string& path,
                                   std::map<std::string, nn::Vec>& leaves);

}  // namespace cogadapt::dataio
