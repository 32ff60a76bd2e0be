// Copyright 2026 The bankmfg Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef BANKMFG_ARTIFACTS_HPP
#define BANKMFG_ARTIFACTS_HPP

// Files a run leaves behind: network checkpoints, CSV tables, JSON reports,
// the run manifest with content hashes, and the per-directory lock.

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "bankmfg/config.hpp"
#include "bankmfg/evaluation.hpp"
#include "bankmfg/trainer.hpp"

namespace bankmfg {

inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
  int outer_iteration = 0;  // completed outer iterations
  std::uint64_t seed = 0;
  NetworkPair networks;     // fictitious-play averages
};

nlohmann::json network_to_json(const NeuronMeasure& net,
                               const std::vector<std::string>& features);
// Throws DimensionError if the stored feature layout differs from
// `features`.
NeuronMeasure network_from_json(const nlohmann::json& j,
                                const std::vector<std::string>& features);

nlohmann::json checkpoint_to_json(const Checkpoint& checkpoint,
                                  const GridSpec& grid);
Checkpoint checkpoint_from_json(const nlohmann::json& j, const GridSpec& grid);
void write_checkpoint(const std::filesystem::path& path,
                      const Checkpoint& checkpoint, const GridSpec& grid);
Checkpoint read_checkpoint(const std::filesystem::path& path,
                           const GridSpec& grid);

// Shortest decimal text that reads back to the same double.
std::string format_double(double x);

void write_loss_header(std::ostream& out);
void write_loss_rows(std::ostream& out, std::span<const TrainRecord> records);

void write_trajectory_csv(std::ostream& out,
                          std::span<const Trajectory> trajectories,
                          const GridSpec& grid);

// Input: "p,r,weight" rows. Output: one row per grid node.
EmpiricalMeasure read_measure_csv(std::istream& in);
void write_projected_csv(std::ostream& out, const ProjectedMeasure& mu,
                         const GridSpec& grid);

nlohmann::json config_to_json(const RunConfig& config);
nlohmann::json value_estimate_to_json(const ValueEstimate& values,
                                      RolloutMode mode);
nlohmann::json exploitability_to_json(const ExploitabilityReport& report,
                                      int outer_iteration);

// Hash of the bytes as git stores a blob: SHA-1 over "blob <size>\0" + data.
std::string git_blob_hash(const std::string& data);
std::string git_blob_hash_file(const std::filesystem::path& path);

// Writes `text` to a temporary sibling and renames it into place.
void write_text_file(const std::filesystem::path& path,
                     const std::string& text);

// manifest.json in the output directory. The first write marks the command
// as running; finish() records the content hashes of every listed output.
class RunManifest {
 public:
  RunManifest(std::filesystem::path directory, std::string command,
              const RunConfig& config, nlohmann::json arguments);

  void add_output(const std::filesystem::path& relative);
  void finish();
  void fail(const std::string& message);

 private:
  void write();

  std::filesystem::path directory_;
  nlohmann::json doc_;
  std::vector<std::filesystem::path> outputs_;
};

// Exclusive lock on an output directory, held by a ".lock" file created with
// O_EXCL. Throws Error if another command holds it.
class DirectoryLock {
 public:
  explicit DirectoryLock(const std::filesystem::path& directory);
  ~DirectoryLock();
  DirectoryLock(const DirectoryLock&) = delete;
  DirectoryLock& operator=(const DirectoryLock&) = delete;

 private:
  std::filesystem::path path_;
};

}  // namespace bankmfg

#endif  // BANKMFG_ARTIFACTS_HPP
