#pragma once

#include "wavedir/datapipe.hpp"
#include "wavedir/model.hpp"

#include <nlohmann/json_fwd.hpp>
#include <string>

namespace wavedir {

using Json = nlohmann::json;

inline constexpr int kDatasetFormatVersion = 1;
inline constexpr int kCheckpointFormatVersion = 1;

/// Window-set binary: 16-byte header ("WDWS0001" + u32 version + u32
/// reserved), u64 count/steps/features, then little-endian f64 blocks
/// (inputs window-major row-major, targets, final yaw) and u32 arrays
/// (transect index, start row).
void save_windowset(const std::string& path, const WindowSet& ws);
WindowSet load_windowset(const std::string& path);

struct DatasetBundle {
  WindowSet train;
  WindowSet test;
  Standardizer standardizer;
  double sample_rate = 0.0;
  std::uint64_t split_seed = 0;
  int stride = 1;
  std::string split_mode;
};

/// Writes train.bin, test.bin and dataset.json (shapes, feature order,
/// standardizer, split seed) into dir.
void save_dataset(const std::string& dir, const DatasetBundle& ds);
DatasetBundle load_dataset(const std::string& dir);

/// Checkpoint: "WDCKPT01" magic, u64 JSON length, JSON header (kind, config,
/// feature order, standardizer, seed, format version), then the parameter
/// block as little-endian f64 in param_refs order.
void save_lstm_checkpoint(const std::string& path, StackedLstm& model,
                          const Json& extra_meta);
StackedLstm load_lstm_checkpoint(const std::string& path, Json* meta = nullptr);

void save_mlp_checkpoint(const std::string& path, Mlp& model,
                         const Json& extra_meta);
Mlp load_mlp_checkpoint(const std::string& path, Json* meta = nullptr);

/// Peeks at the JSON header's "kind" field.
std::string checkpoint_kind(const std::string& path);

void write_json(const std::string& path, const Json& j);
Json read_json(const std::string& path);

}  // namespace wavedir
