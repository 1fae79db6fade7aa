#include "wavedir/serialization.hpp"

#include <nlohmann/json.hpp>

#include <cstring>
#include <filesystem>
#include <fstream>

namespace wavedir {

namespace {

constexpr char kWindowMagic[8] = {'W', 'D', 'W', 'S', '0', '0', '0', '1'};
constexpr char kCheckpointMagic[8] = {'W', 'D', 'C', 'K', 'P', 'T', '0', '1'};

void write_u32(std::ostream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}
void write_u64(std::ostream& out, std::uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}
std::uint32_t read_u32(std::istream& in) {
  std::uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  return v;
}
std::uint64_t read_u64(std::istream& in) {
  std::uint64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  return v;
}
void write_f64(std::ostream& out, const double* data, std::size_t count) {
  out.write(reinterpret_cast<const char*>(data),
            static_cast<std::streamsize>(count * sizeof(double)));
}
void read_f64(std::istream& in, double* data, std::size_t count) {
  in.read(reinterpret_cast<char*>(data),
          static_cast<std::streamsize>(count * sizeof(double)));
}

Json standardizer_to_json(const Standardizer& s) {
  Json j;
  j["mu"] = std::vector<double>(s.mu.data(), s.mu.data() + s.mu.size());
  j["sigma_raw"] = std::vector<double>(s.sigma_raw.data(),
                                       s.sigma_raw.data() + s.sigma_raw.size());
  j["sigma_clamped"] = std::vector<double>(
      s.sigma_clamped.data(), s.sigma_clamped.data() + s.sigma_clamped.size());
  j["fit_count"] = s.fit_count;
  return j;
}

Standardizer standardizer_from_json(const Json& j) {
  Standardizer s;
  const auto mu = j.at("mu").get<std::vector<double>>();
  const auto sr = j.at("sigma_raw").get<std::vector<double>>();
  const auto sc = j.at("sigma_clamped").get<std::vector<double>>();
  s.mu = Eigen::Map<const Vec>(mu.data(), static_cast<Index>(mu.size()));
  s.sigma_raw = Eigen::Map<const Vec>(sr.data(), static_cast<Index>(sr.size()));
  s.sigma_clamped = Eigen::Map<const Vec>(sc.data(), static_cast<Index>(sc.size()));
  s.fit_count = j.at("fit_count").get<int>();
  return s;
}

}  // namespace

void save_windowset(const std::string& path, const WindowSet& ws) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("save_windowset: cannot write " + path);
  out.write(kWindowMagic, 8);
  write_u32(out, kDatasetFormatVersion);
  write_u32(out, 0);  // reserved
  const std::uint64_t count = static_cast<std::uint64_t>(ws.count());
  const std::uint64_t steps = ws.n > 0 ? static_cast<std::uint64_t>(ws.n - 1) : 0;
  write_u64(out, count);
  write_u64(out, steps);
  write_u64(out, kFeatureCount);
  for (const Mat& w : ws.inputs) {
    for (Index r = 0; r < w.rows(); ++r) {
      for (Index c = 0; c < w.cols(); ++c) {
        const double v = w(r, c);
        write_f64(out, &v, 1);
      }
    }
  }
  for (Index i = 0; i < ws.count(); ++i) {
    write_f64(out, &ws.targets(i, 0), 1);
    write_f64(out, &ws.targets(i, 1), 1);
  }
  if (count > 0) write_f64(out, ws.final_yaw.data(), ws.final_yaw.size());
  for (int v : ws.transect_index) write_u32(out, static_cast<std::uint32_t>(v));
  for (int v : ws.start_row) write_u32(out, static_cast<std::uint32_t>(v));
}

WindowSet load_windowset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("load_windowset: cannot open " + path);
  char magic[8];
  in.read(magic, 8);
  if (std::memcmp(magic, kWindowMagic, 8) != 0) {
    throw SchemaError("load_windowset: bad magic in " + path);
  }
  const std::uint32_t version = read_u32(in);
  if (version != kDatasetFormatVersion) {
    throw SchemaError("load_windowset: unsupported version " +
                      std::to_string(version));
  }
  read_u32(in);  // reserved
  const std::uint64_t count = read_u64(in);
  const std::uint64_t steps = read_u64(in);
  const std::uint64_t features = read_u64(in);
  if (features != kFeatureCount) {
    throw SchemaError("load_windowset: feature count mismatch");
  }
  WindowSet ws;
  ws.n = static_cast<int>(steps) + 1;
  ws.inputs.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    Mat w(steps, features);
    for (std::uint64_t r = 0; r < steps; ++r) {
      for (std::uint64_t c = 0; c < features; ++c) {
        read_f64(in, &w(static_cast<Index>(r), static_cast<Index>(c)), 1);
      }
    }
    ws.inputs.push_back(std::move(w));
  }
  ws.targets.resize(static_cast<Index>(count), 2);
  for (std::uint64_t i = 0; i < count; ++i) {
    read_f64(in, &ws.targets(static_cast<Index>(i), 0), 1);
    read_f64(in, &ws.targets(static_cast<Index>(i), 1), 1);
  }
  ws.final_yaw.resize(count);
  if (count > 0) read_f64(in, ws.final_yaw.data(), count);
  ws.transect_index.resize(count);
  for (auto& v : ws.transect_index) v = static_cast<int>(read_u32(in));
  ws.start_row.resize(count);
  for (auto& v : ws.start_row) v = static_cast<int>(read_u32(in));
  if (!in) throw DataError("load_windowset: truncated file " + path);
  return ws;
}

void save_dataset(const std::string& dir, const DatasetBundle& ds) {
  std::filesystem::create_directories(dir);
  save_windowset(dir + "/train.bin", ds.train);
  save_windowset(dir + "/test.bin", ds.test);
  Json j;
  j["format_version"] = kDatasetFormatVersion;
  j["sequence_size"] = ds.train.n;
  j["stride"] = ds.stride;
  j["feature_order"] = feature_names();
  j["train_count"] = ds.train.count();
  j["test_count"] = ds.test.count();
  j["sample_rate_hz"] = ds.sample_rate;
  j["split_seed"] = ds.split_seed;
  j["split_mode"] = ds.split_mode;
  j["standardizer"] = standardizer_to_json(ds.standardizer);
  write_json(dir + "/dataset.json", j);
}

DatasetBundle load_dataset(const std::string& dir) {
  DatasetBundle ds;
  const Json j = read_json(dir + "/dataset.json");
  ds.train = load_windowset(dir + "/train.bin");
  ds.test = load_windowset(dir + "/test.bin");
  ds.standardizer = standardizer_from_json(j.at("standardizer"));
  ds.sample_rate = j.at("sample_rate_hz").get<double>();
  ds.split_seed = j.at("split_seed").get<std::uint64_t>();
  ds.stride = j.at("stride").get<int>();
  ds.split_mode = j.at("split_mode").get<std::string>();
  return ds;
}

namespace {

void write_checkpoint(const std::string& path, const Json& header,
                      const std::vector<ParamRef>& refs) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("save_checkpoint: cannot write " + path);
  const std::string hdr = header.dump();
  out.write(kCheckpointMagic, 8);
  write_u64(out, hdr.size());
  out.write(hdr.data(), static_cast<std::streamsize>(hdr.size()));
  for (const ParamRef& r : refs) {
    write_f64(out, r.value, static_cast<std::size_t>(r.size));
  }
}

Json read_checkpoint_header(std::ifstream& in, const std::string& path) {
  char magic[8];
  in.read(magic, 8);
  if (std::memcmp(magic, kCheckpointMagic, 8) != 0) {
    throw SchemaError("load_checkpoint: bad magic in " + path);
  }
  const std::uint64_t len = read_u64(in);
  std::string hdr(len, '\0');
  in.read(hdr.data(), static_cast<std::streamsize>(len));
  if (!in) throw DataError("load_checkpoint: truncated header in " + path);
  return Json::parse(hdr);
}

void read_params(std::ifstream& in, const std::vector<ParamRef>& refs,
                 const std::string& path) {
  for (const ParamRef& r : refs) {
    read_f64(in, r.value, static_cast<std::size_t>(r.size));
  }
  if (!in) throw DataError("load_checkpoint: truncated parameters in " + path);
}

}  // namespace

void save_lstm_checkpoint(const std::string& path, StackedLstm& model,
                          const Json& extra_meta) {
  Json header = extra_meta;
  header["format_version"] = kCheckpointFormatVersion;
  header["kind"] = "lstm";
  header["config"] = {{"sequence_size", model.config.sequence_size},
                      {"hidden", model.config.hidden},
                      {"num_layers", model.config.num_layers},
                      {"learning_rate", model.config.learning_rate}};
  header["feature_order"] = feature_names();
  write_checkpoint(path, header, param_refs(model));
}

StackedLstm load_lstm_checkpoint(const std::string& path, Json* meta) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("load_checkpoint: cannot open " + path);
  const Json header = read_checkpoint_header(in, path);
  if (header.at("kind") != "lstm") {
    throw SchemaError("load_lstm_checkpoint: checkpoint kind is " +
                      header.at("kind").get<std::string>());
  }
  ModelConfig cfg;
  cfg.sequence_size = header.at("config").at("sequence_size").get<int>();
  cfg.hidden = header.at("config").at("hidden").get<int>();
  cfg.num_layers = header.at("config").at("num_layers").get<int>();
  cfg.learning_rate = header.at("config").at("learning_rate").get<double>();
  SeededRng scratch(0);
  StackedLstm model = make_lstm(cfg, scratch);
  read_params(in, param_refs(model), path);
  if (meta) *meta = header;
  return model;
}

void save_mlp_checkpoint(const std::string& path, Mlp& model,
                         const Json& extra_meta) {
  Json header = extra_meta;
  header["format_version"] = kCheckpointFormatVersion;
  header["kind"] = "mlp";
  header["config"] = {{"input_dim", model.input_dim}, {"hidden", model.hidden}};
  header["feature_order"] = feature_names();
  write_checkpoint(path, header, param_refs(model));
}

Mlp load_mlp_checkpoint(const std::string& path, Json* meta) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("load_checkpoint: cannot open " + path);
  const Json header = read_checkpoint_header(in, path);
  if (header.at("kind") != "mlp") {
    throw SchemaError("load_mlp_checkpoint: checkpoint kind is " +
                      header.at("kind").get<std::string>());
  }
  SeededRng scratch(0);
  Mlp model = make_mlp(header.at("config").at("input_dim").get<int>(),
                       header.at("config").at("hidden").get<int>(), scratch);
  read_params(in, param_refs(model), path);
  if (meta) *meta = header;
  return model;
}

std::string checkpoint_kind(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("checkpoint_kind: cannot open " + path);
  return read_checkpoint_header(in, path).at("kind").get<std::string>();
}

void write_json(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw DataError("write_json: cannot write " + path);
  out << j.dump(2) << '\n';
}

Json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("read_json: cannot open " + path);
  return Json::parse(in);
}

}  // namespace wavedir
