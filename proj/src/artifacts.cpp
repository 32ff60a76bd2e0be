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

#include "bankmfg/artifacts.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <chrono>
#include <cstring>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <openssl/evp.h>

#include "bankmfg/errors.hpp"
#include "bankmfg/features.hpp"

namespace bankmfg {

namespace fs = std::filesystem;
using nlohmann::json;

nlohmann::json network_to_json(const NeuronMeasure& net,
                               const std::vector<std::string>& features) {
  if (static_cast<Eigen::Index>(features.size()) != net.input_dim()) {
    throw DimensionError("feature names do not match the network inputs");
  }
  std::vector<double> in_weights;
  in_weights.reserve(static_cast<std::size_t>(net.in_weights().size()));
  for (Eigen::Index l = 0; l < net.width(); ++l) {
    for (Eigen::Index k = 0; k < net.input_dim(); ++k) {
      in_weights.push_back(net.in_weights()(l, k));
    }
  }
  return json{
      {"activation", to_string(net.activation())},
      {"width", net.width()},
      {"input_dim", net.input_dim()},
      {"features", features},
      {"in_weights", in_weights},
      {"bias", std::vector<double>(net.bias().data(),
                                   net.bias().data() + net.width())},
      {"out_weights", std::vector<double>(net.out_weights().data(),
                                          net.out_weights().data() +
                                              net.width())},
  };
}

NeuronMeasure network_from_json(const nlohmann::json& j,
                                const std::vector<std::string>& features) {
  const auto stored = j.at("features").get<std::vector<std::string>>();
  if (stored != features) {
    throw DimensionError(
        "checkpoint feature layout does not match the configured grid");
  }
  const auto width = j.at("width").get<Eigen::Index>();
  const auto dim = j.at("input_dim").get<Eigen::Index>();
  if (dim != static_cast<Eigen::Index>(features.size()) || width < 1) {
    throw DimensionError("checkpoint network has an invalid shape");
  }
  const auto in = j.at("in_weights").get<std::vector<double>>();
  const auto bias = j.at("bias").get<std::vector<double>>();
  const auto out = j.at("out_weights").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(in.size()) != width * dim ||
      static_cast<Eigen::Index>(bias.size()) != width ||
      static_cast<Eigen::Index>(out.size()) != width) {
    throw DimensionError("checkpoint parameter arrays disagree on the shape");
  }
  Eigen::MatrixXd w(width, dim);
  for (Eigen::Index l = 0; l < width; ++l) {
    for (Eigen::Index k = 0; k < dim; ++k) {
      w(l, k) = in[static_cast<std::size_t>(l * dim + k)];
    }
  }
  return NeuronMeasure(std::move(w),
                       Eigen::Map<const Eigen::VectorXd>(bias.data(), width),
                       Eigen::Map<const Eigen::VectorXd>(out.data(), width),
                       activation_from_string(
                           j.at("activation").get<std::string>()));
}

nlohmann::json checkpoint_to_json(const Checkpoint& checkpoint,
                                  const GridSpec& grid) {
  return json{
      {"format", "bankmfg-checkpoint"},
      {"version", kCheckpointVersion},
      {"outer_iteration", checkpoint.outer_iteration},
      {"seed", checkpoint.seed},
      {"grid", {{"p_points", grid.p_points}, {"r_points", grid.r_points}}},
      {"networks",
       {{"major", network_to_json(checkpoint.networks.major,
                                  major_feature_names(grid))},
        {"minor", network_to_json(checkpoint.networks.minor,
                                  minor_feature_names(grid))}}},
  };
}

Checkpoint checkpoint_from_json(const nlohmann::json& j,
                                const GridSpec& grid) {
  try {
    if (j.at("format") != "bankmfg-checkpoint") {
      throw Error("not a bankmfg checkpoint");
    }
    if (j.at("version").get<int>() != kCheckpointVersion) {
      throw Error("unsupported checkpoint version " +
                  j.at("version").dump());
    }
    const auto p_points = j.at("grid").at("p_points").get<std::vector<double>>();
    const auto r_points = j.at("grid").at("r_points").get<std::vector<double>>();
    if (p_points != grid.p_points || r_points != grid.r_points) {
      throw DimensionError("checkpoint grid differs from the configured grid");
    }
    return Checkpoint{
        j.at("outer_iteration").get<int>(), j.at("seed").get<std::uint64_t>(),
        NetworkPair{network_from_json(j.at("networks").at("major"),
                                      major_feature_names(grid)),
                    network_from_json(j.at("networks").at("minor"),
                                      minor_feature_names(grid))}};
  } catch (const json::exception& e) {
    throw Error(std::string("malformed checkpoint: ") + e.what());
  }
}

void write_checkpoint(const fs::path& path, const Checkpoint& checkpoint,
                      const GridSpec& grid) {
  write_text_file(path, checkpoint_to_json(checkpoint, grid).dump() + "\n");
}

Checkpoint read_checkpoint(const fs::path& path, const GridSpec& grid) {
  std::ifstream in(path);
  if (!in) throw Error(path.string() + ": cannot open checkpoint");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(path.string() + ": " + e.what());
  }
  return checkpoint_from_json(j, grid);
}

std::string format_double(double x) {
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), x);
  return std::string(buffer, result.ptr);
}

void write_loss_header(std::ostream& out) {
  out << "outer_n,inner_m,loss_major,loss_minor,wall_ms\n";
}

void write_loss_rows(std::ostream& out, std::span<const TrainRecord> records) {
  for (const TrainRecord& r : records) {
    out << r.outer << ',' << r.inner << ',' << format_double(r.loss_major)
        << ',' << format_double(r.loss_minor) << ','
        << format_double(r.wall_ms) << '\n';
  }
}

void write_trajectory_csv(std::ostream& out,
                          std::span<const Trajectory> trajectories,
                          const GridSpec& grid) {
  out << "path,probability,t,cb_rate,p0,r0,u0,reward_major,minor_mass,"
         "minor_mean_rate,minor_mean_action,minor_mean_reward,total_mass";
  const std::vector<std::string> names = major_feature_names(grid);
  for (std::size_t k = MajorLayout::kMeasure; k < names.size(); ++k) {
    out << ",\"" << names[k] << '"';
  }
  out << '\n';
  for (std::size_t path = 0; path < trajectories.size(); ++path) {
    const Trajectory& traj = trajectories[path];
    for (const TrajectoryStep& s : traj.steps) {
      out << path << ',' << format_double(traj.probability) << ',' << s.t
          << ',' << format_double(s.cb_rate) << ','
          << format_double(s.major.p) << ',' << format_double(s.major.r)
          << ',' << format_double(s.major_action) << ','
          << format_double(s.reward_major) << ','
          << format_double(s.minor_mass) << ','
          << format_double(s.minor_mean_rate) << ','
          << format_double(s.minor_mean_action) << ','
          << format_double(s.minor_mean_reward) << ','
          << format_double(s.total_mass);
      for (Eigen::Index k = 0; k < s.mu.size(); ++k) {
        out << ',' << format_double(s.mu[k]);
      }
      out << '\n';
    }
  }
}

EmpiricalMeasure read_measure_csv(std::istream& in) {
  EmpiricalMeasure measure;
  std::string line;
  int line_no = 0;
  auto parse = [&](const std::string& field) {
    double x = 0.0;
    const char* begin = field.data();
    const char* end = begin + field.size();
    while (begin < end && *begin == ' ') ++begin;
    const auto result = std::from_chars(begin, end, x);
    if (result.ec != std::errc() || result.ptr != end) {
      throw DomainError("line " + std::to_string(line_no) +
                        ": cannot parse number '" + field + "'");
    }
    return x;
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (line_no == 1 && line == "p,r,weight") continue;
    std::vector<std::string> fields;
    std::stringstream row(line);
    std::string field;
    while (std::getline(row, field, ',')) fields.push_back(field);
    if (fields.size() != 3) {
      throw DomainError("line " + std::to_string(line_no) +
                        ": expected 3 columns p,r,weight");
    }
    measure.atoms.push_back(
        {parse(fields[0]), parse(fields[1]), parse(fields[2])});
  }
  if (measure.atoms.empty()) throw DomainError("measure file has no atoms");
  return measure;
}

void write_projected_csv(std::ostream& out, const ProjectedMeasure& mu,
                         const GridSpec& grid) {
  out << "node,i,j,p,r,weight\n";
  for (std::size_t node = 0; node < grid.size(); ++node) {
    out << node << ',' << node / grid.r_points.size() << ','
        << node % grid.r_points.size() << ','
        << format_double(grid.node_p(node)) << ','
        << format_double(grid.node_r(node)) << ','
        << format_double(mu[node]) << '\n';
  }
}

nlohmann::json config_to_json(const RunConfig& config) {
  const MarketParams& m = config.game.params;
  const GridSpec& g = config.game.grid;
  const InitialCondition& init = config.game.initial;
  const TrainConfig& t = config.train;
  const EvaluationConfig& e = config.evaluation;
  std::vector<std::vector<double>> transition;
  const Eigen::MatrixXd& matrix = config.game.chain.transition();
  for (Eigen::Index i = 0; i < matrix.rows(); ++i) {
    std::vector<double> row(static_cast<std::size_t>(matrix.cols()));
    for (Eigen::Index k = 0; k < matrix.cols(); ++k) {
      row[static_cast<std::size_t>(k)] = matrix(i, k);
    }
    transition.push_back(std::move(row));
  }
  return json{
      {"seed", config.seed},
      {"output_dir", config.output_dir},
      {"checkpoint_every", config.checkpoint_every},
      {"market",
       {{"kappa_major", m.kappa_major},
        {"kappa_minor", m.kappa_minor},
        {"delta_major", m.delta_major},
        {"delta_minor", m.delta_minor},
        {"deposit_volume", m.deposit_volume},
        {"premium_major", m.premium_major},
        {"premium_minor", m.premium_minor},
        {"discount", m.discount},
        {"cost_linear", m.cost_linear},
        {"cost_fixed", m.cost_fixed},
        {"horizon", m.horizon},
        {"dt", m.dt},
        {"rate_min", m.rate_min},
        {"rate_max", m.rate_max},
        {"prop_min", m.prop_min},
        {"prop_max", m.prop_max}}},
      {"grid", {{"p_points", g.p_points}, {"r_points", g.r_points}}},
      {"central_bank",
       {{"rates", config.game.chain.rates()}, {"transition", transition}}},
      {"actions", std::vector<double>(config.game.actions.values().begin(),
                                      config.game.actions.values().end())},
      {"initial",
       {{"major_p", init.major.p},
        {"major_r", init.major.r},
        {"cb_rate", init.cb_rate},
        {"minor_p_min", init.minor_p_lo},
        {"minor_p_max", init.minor_p_hi},
        {"minor_r_min", init.minor_r_lo},
        {"minor_r_max", init.minor_r_hi},
        {"resolution", init.minor_resolution}}},
      {"train",
       {{"outer_iterations", t.outer_iterations},
        {"inner_iterations", t.inner_iterations},
        {"batch_size", t.batch_size},
        {"width", t.width},
        {"learning_rate", t.learning_rate},
        {"averaging", to_string(t.averaging)},
        {"replay_mix", t.replay_mix},
        {"activation", to_string(t.activation)},
        {"stop_gradient", t.stop_gradient},
        {"continuation", to_string(t.continuation)},
        {"divergence_threshold", t.divergence_threshold},
        {"record_wall_clock", t.record_wall_clock}}},
      {"evaluation",
       {{"br_p_points", e.br_p_points},
        {"major_br_horizon", e.major_br_horizon},
        {"major_tree_budget", e.major_tree_budget},
        {"minor_exact_budget", e.minor_exact_budget},
        {"sampled_paths", e.sampled_paths}}},
  };
}

nlohmann::json value_estimate_to_json(const ValueEstimate& values,
                                      RolloutMode mode) {
  return json{{"format", "bankmfg-values"},
              {"version", 1},
              {"mode", to_string(mode)},
              {"paths", values.paths},
              {"major", values.major},
              {"major_stderr", values.major_stderr},
              {"minor", values.minor},
              {"minor_stderr", values.minor_stderr}};
}

namespace {
json gap_to_json(const PlayerGap& gap) {
  return json{{"on_policy", gap.on_policy},
              {"best_response", gap.best_response},
              {"gap", gap.gap},
              {"relative_gap", gap.relative_gap}};
}
}  // namespace

nlohmann::json exploitability_to_json(const ExploitabilityReport& report,
                                      int outer_iteration) {
  json major = gap_to_json(report.major.gap);
  major["deviation_horizon"] = report.major.deviation_horizon;
  major["leaves"] = report.major.leaves;
  json minor = gap_to_json(report.minor.gap);
  minor["method"] = report.minor.method;
  minor["grid_on_policy"] = report.minor.grid_on_policy;
  minor["grid_best_response"] = report.minor.grid_best_response;
  minor["interpolation_tolerance"] = report.minor.interpolation_tolerance;
  return json{{"format", "bankmfg-exploitability"},
              {"version", 1},
              {"outer_iteration", outer_iteration},
              {"major", major},
              {"minor", minor}};
}

std::string git_blob_hash(const std::string& data) {
  const std::string header = "blob " + std::to_string(data.size()) + '\0';
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  const bool ok = ctx != nullptr &&
                  EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr) == 1 &&
                  EVP_DigestUpdate(ctx, header.data(), header.size()) == 1 &&
                  EVP_DigestUpdate(ctx, data.data(), data.size()) == 1 &&
                  EVP_DigestFinal_ex(ctx, digest, &length) == 1;
  EVP_MD_CTX_free(ctx);
  if (!ok) throw Error("SHA-1 digest failed");
  std::ostringstream hex;
  for (unsigned int i = 0; i < length; ++i) {
    const unsigned char byte = digest[i];
    hex << std::hex << std::setw(2) << std::setfill('0')
        << static_cast<int>(byte);
  }
  return hex.str();
}

std::string git_blob_hash_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(path.string() + ": cannot open for hashing");
  std::ostringstream data;
  data << in.rdbuf();
  return git_blob_hash(data.str());
}

void write_text_file(const fs::path& path, const std::string& text) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(tmp.string() + ": cannot open for writing");
    out << text;
    if (!out) throw Error(tmp.string() + ": write failed");
  }
  fs::rename(tmp, path);
}

namespace {
std::string utc_now() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buffer[32];
  std::strftime(buffer, sizeof(buffer), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buffer;
}
}  // namespace

RunManifest::RunManifest(fs::path directory, std::string command,
                         const RunConfig& config, nlohmann::json arguments)
    : directory_(std::move(directory)) {
  doc_ = json{{"format", "bankmfg-manifest"},
              {"version", 1},
              {"tool_version", BANKMFG_VERSION},
              {"command", std::move(command)},
              {"arguments", std::move(arguments)},
              {"status", "running"},
              {"started_at", utc_now()},
              {"finished_at", nullptr},
              {"error", nullptr},
              {"config", config_to_json(config)},
              {"config_hash", ""},
              {"outputs", json::array()}};
  doc_["config_hash"] = git_blob_hash(doc_["config"].dump());
  write();
}

void RunManifest::add_output(const fs::path& relative) {
  outputs_.push_back(relative);
}

void RunManifest::finish() {
  json outputs = json::array();
  for (const fs::path& rel : outputs_) {
    const fs::path full = directory_ / rel;
    outputs.push_back({{"path", rel.generic_string()},
                       {"bytes", fs::file_size(full)},
                       {"sha1", git_blob_hash_file(full)}});
  }
  doc_["outputs"] = std::move(outputs);
  doc_["status"] = "complete";
  doc_["finished_at"] = utc_now();
  write();
}

void RunManifest::fail(const std::string& message) {
  doc_["status"] = "failed";
  doc_["error"] = message;
  doc_["finished_at"] = utc_now();
  write();
}

void RunManifest::write() {
  write_text_file(directory_ / "manifest.json", doc_.dump(2) + "\n");
}

DirectoryLock::DirectoryLock(const fs::path& directory)
    : path_(directory / ".lock") {
  fs::create_directories(directory);
  const int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
  if (fd < 0) {
    if (errno == EEXIST) {
      throw Error(directory.string() +
                  " is locked by another command (remove " + path_.string() +
                  " if no command is running)");
    }
    throw Error(path_.string() + ": " + std::strerror(errno));
  }
  const std::string pid = std::to_string(::getpid()) + "\n";
  [[maybe_unused]] const auto written = ::write(fd, pid.data(), pid.size());
  ::close(fd);
}

DirectoryLock::~DirectoryLock() {
  std::error_code ec;
  fs::remove(path_, ec);
}

}  // namespace bankmfg
