#include "conststyle/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace conststyle::io {

namespace fs = std::filesystem;

namespace {

constexpr char kMagic[4] = {'C', 'S', 'T', 'N'};
constexpr std::uint8_t kFormatVersion = 0x01;

void append_u32_le(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 24) & 0xff));
}

std::uint32_t read_u32_le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
         static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

void write_file(const fs::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw StateError("cannot open for writing: " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw StateError("write failed: " + path.string());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StateError("missing artifact: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

double parse_double(const std::string& s, const std::string& key) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("bad numeric value for " + key + ": " + s);
  }
}

long long parse_int(const std::string& s, const std::string& key) {
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("bad integer value for " + key + ": " + s);
  }
}

std::string ini_get(const IniMap& ini, const std::string& key) {
  const auto it = ini.find(key);
  if (it == ini.end()) throw ConfigError("missing key in metadata: " + key);
  return it->second;
}

}  // namespace

std::size_t Tensor::element_count() const {
  std::size_t n = 1;
  for (std::uint32_t d : dims) n *= d;
  return dims.empty() ? 0 : n;
}

void write_tensor(const fs::path& path, const Tensor& tensor) {
  if (tensor.values.size() != tensor.element_count())
    throw ShapeError("tensor payload does not match its dimensions");
  std::string bytes;
  bytes.reserve(9 + 4 * tensor.dims.size() + 4 * tensor.values.size());
  bytes.append(kMagic, 4);
  bytes.push_back(static_cast<char>(kFormatVersion));
  append_u32_le(bytes, static_cast<std::uint32_t>(tensor.dims.size()));
  for (std::uint32_t d : tensor.dims) append_u32_le(bytes, d);
  for (float v : tensor.values) {
    std::uint32_t u;
    std::memcpy(&u, &v, 4);
    append_u32_le(bytes, u);
  }
  write_file(path, bytes);
}

Tensor read_tensor(const fs::path& path) {
  const std::string bytes = read_file(path);
  if (bytes.size() < 9 || std::memcmp(bytes.data(), kMagic, 4) != 0)
    throw StateError("not a CSTN tensor file: " + path.string());
  if (static_cast<std::uint8_t>(bytes[4]) != kFormatVersion)
    throw StateError("unsupported CSTN version in " + path.string());
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::uint32_t rank = read_u32_le(p + 5);
  if (bytes.size() < 9 + 4 * static_cast<std::size_t>(rank))
    throw StateError("truncated CSTN header: " + path.string());

  Tensor t;
  t.dims.resize(rank);
  for (std::uint32_t i = 0; i < rank; ++i) t.dims[i] = read_u32_le(p + 9 + 4 * i);
  const std::size_t payload = tensor_payload_offset(rank, 0);
  const std::size_t count = t.element_count();
  if (bytes.size() != payload + 4 * count)
    throw StateError("CSTN payload size mismatch: " + path.string());
  t.values.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint32_t u = read_u32_le(p + payload + 4 * i);
    float v;
    std::memcpy(&v, &u, 4);
    t.values[i] = v;
  }
  return t;
}

Tensor tensor_from(std::span<const std::uint32_t> dims, std::span<const double> values) {
  Tensor t;
  t.dims.assign(dims.begin(), dims.end());
  t.values.resize(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) t.values[i] = static_cast<float>(values[i]);
  if (t.values.size() != t.element_count())
    throw ShapeError("tensor payload does not match its dimensions");
  return t;
}

std::size_t tensor_payload_offset(std::size_t rank, std::size_t index) {
  return 9 + 4 * rank + 4 * index;
}

IniMap read_ini(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw StateError("missing artifact: " + path.string());
  IniMap map;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": empty key");
    map[key] = value;
  }
  return map;
}

void write_ini(const fs::path& path,
               const std::vector<std::pair<std::string, std::string>>& entries) {
  std::string out;
  for (const auto& [k, v] : entries) out += k + " = " + v + "\n";
  write_file(path, out);
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

CsvWriter::CsvWriter(const fs::path& path, std::span<const std::string> header)
    : path_(path), columns_(header.size()) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) buffer_ += ',';
    buffer_ += header[i];
  }
  buffer_ += '\n';
}

void CsvWriter::row(std::span<const std::string> cells) {
  if (cells.size() != columns_) throw ShapeError("CSV row width does not match the header");
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) buffer_ += ',';
    buffer_ += cells[i];
  }
  buffer_ += '\n';
}

CsvWriter::~CsvWriter() {
  try {
    write_file(path_, buffer_);
  } catch (...) {
    // destructor must not throw; a failed report write surfaces as a missing file
  }
}

RunLock::RunLock(const fs::path& dir) {
  fs::create_directories(dir);
  lock_path_ = dir / ".lock";
  std::error_code ec;
  if (fs::exists(lock_path_, ec))
    throw StateError("run directory is locked by another writer: " + dir.string());
  std::ofstream out(lock_path_);
  if (!out) throw StateError("cannot create lock file in " + dir.string());
  out << "locked\n";
}

RunLock::~RunLock() {
  std::error_code ec;
  fs::remove(lock_path_, ec);
}

// ---------------------------------------------------------------------------
// Datasets: samples.cstn (N x C x H x W) + manifest.csv + dataset.ini.
// ---------------------------------------------------------------------------

void save_dataset(const fs::path& dir, const SyntheticDataset& dataset) {
  fs::create_directories(dir);
  const std::size_t n = dataset.samples.size();
  if (n == 0) throw EmptyDomainError("refusing to save an empty dataset");
  const auto& first = dataset.samples.front().input;

  Tensor t;
  t.dims = {static_cast<std::uint32_t>(n), static_cast<std::uint32_t>(first.channels),
            static_cast<std::uint32_t>(first.height), static_cast<std::uint32_t>(first.width)};
  t.values.reserve(n * first.values.size());
  for (const auto& s : dataset.samples)
    for (double v : s.input.values) t.values.push_back(static_cast<float>(v));
  write_tensor(dir / "samples.cstn", t);

  const std::size_t per_sample = first.values.size();
  const std::vector<std::string> header = {"sample_id", "class_label", "domain_id", "file_offset"};
  CsvWriter manifest(dir / "manifest.csv", header);
  for (std::size_t i = 0; i < n; ++i) {
    manifest.row(std::vector<std::string>{
        std::to_string(i), std::to_string(dataset.samples[i].class_label),
        std::to_string(dataset.samples[i].domain_id),
        std::to_string(tensor_payload_offset(t.dims.size(), i * per_sample))});
  }

  write_ini(dir / "dataset.ini", {{"n_classes", std::to_string(dataset.n_classes)},
                                  {"seed", std::to_string(dataset.seed)},
                                  {"height", std::to_string(dataset.height)},
                                  {"width", std::to_string(dataset.width)},
                                  {"format_version", "1"}});
}

SyntheticDataset load_dataset(const fs::path& dir) {
  const Tensor t = read_tensor(dir / "samples.cstn");
  if (t.dims.size() != 4) throw StateError("dataset tensor must have rank 4");
  const IniMap meta = read_ini(dir / "dataset.ini");

  SyntheticDataset dataset;
  dataset.n_classes = static_cast<int>(parse_int(ini_get(meta, "n_classes"), "n_classes"));
  dataset.seed = static_cast<std::uint64_t>(parse_int(ini_get(meta, "seed"), "seed"));
  dataset.height = static_cast<int>(t.dims[2]);
  dataset.width = static_cast<int>(t.dims[3]);

  const std::string manifest = read_file(dir / "manifest.csv");
  std::istringstream lines(manifest);
  std::string line;
  if (!std::getline(lines, line)) throw StateError("empty manifest: " + dir.string());

  const std::size_t n = t.dims[0];
  const std::size_t per_sample = static_cast<std::size_t>(t.dims[1]) * t.dims[2] * t.dims[3];
  std::size_t row = 0;
  while (std::getline(lines, line)) {
    if (trim(line).empty()) continue;
    if (row >= n) throw StateError("manifest has more rows than the tensor has samples");
    std::istringstream cells(line);
    std::string id, label, domain, offset;
    if (!std::getline(cells, id, ',') || !std::getline(cells, label, ',') ||
        !std::getline(cells, domain, ',') || !std::getline(cells, offset, ','))
      throw StateError("malformed manifest row: " + line);

    LabeledSample sample;
    sample.class_label = static_cast<int>(parse_int(trim(label), "class_label"));
    sample.domain_id = static_cast<int>(parse_int(trim(domain), "domain_id"));
    sample.input = FeatureMap(static_cast<int>(t.dims[1]), static_cast<int>(t.dims[2]),
                              static_cast<int>(t.dims[3]));
    for (std::size_t j = 0; j < per_sample; ++j)
      sample.input.values[j] = t.values[row * per_sample + j];
    dataset.samples.push_back(std::move(sample));
    ++row;
  }
  if (row != n) throw StateError("manifest row count does not match the tensor");

  for (const auto& s : dataset.samples) dataset.domain_ids.push_back(s.domain_id);
  std::sort(dataset.domain_ids.begin(), dataset.domain_ids.end());
  dataset.domain_ids.erase(std::unique(dataset.domain_ids.begin(), dataset.domain_ids.end()),
                           dataset.domain_ids.end());
  return dataset;
}

// ---------------------------------------------------------------------------
// Models: params.cstn + model.ini architecture header.
// ---------------------------------------------------------------------------

void save_model(const fs::path& dir, const DeskNet& net, const Vec* initial_style_params) {
  fs::create_directories(dir);
  write_tensor(dir / "params.cstn",
               tensor_from(std::vector<std::uint32_t>{static_cast<std::uint32_t>(net.param_count())},
                           net.params()));
  write_ini(dir / "model.ini",
            {{"n_classes", std::to_string(net.n_classes())},
             {"input", std::to_string(kInputChannels) + "x" + std::to_string(kInputSize) + "x" +
                           std::to_string(kInputSize)},
             {"style_channels", std::to_string(kStyleChannels)},
             {"trunk_channels", std::to_string(kTrunkChannels)},
             {"kernel", std::to_string(kKernel)},
             {"version", kLibraryVersion}});
  if (initial_style_params != nullptr && !initial_style_params->empty()) {
    write_tensor(dir / "initial_style.cstn",
                 tensor_from(std::vector<std::uint32_t>{
                                 static_cast<std::uint32_t>(initial_style_params->size())},
                             *initial_style_params));
  }
}

DeskNet load_model(const fs::path& dir) {
  const IniMap meta = read_ini(dir / "model.ini");
  const int k = static_cast<int>(parse_int(ini_get(meta, "n_classes"), "n_classes"));
  if (static_cast<int>(parse_int(ini_get(meta, "style_channels"), "style_channels")) !=
          kStyleChannels ||
      static_cast<int>(parse_int(ini_get(meta, "trunk_channels"), "trunk_channels")) !=
          kTrunkChannels)
    throw StateError("model architecture header does not match this build");

  DeskNet net(k);
  const Tensor t = read_tensor(dir / "params.cstn");
  if (t.dims.size() != 1 || static_cast<int>(t.values.size()) != net.param_count())
    throw StateError("model parameter dump has the wrong size");
  for (std::size_t i = 0; i < t.values.size(); ++i) net.params()[i] = t.values[i];
  return net;
}

bool load_initial_style_params(const fs::path& dir, Vec& out) {
  const fs::path path = dir / "initial_style.cstn";
  if (!fs::exists(path)) return false;
  const Tensor t = read_tensor(path);
  out.assign(t.values.begin(), t.values.end());
  return true;
}

// ---------------------------------------------------------------------------
// Unified domain: mean + covariance tensors + method tag.
// ---------------------------------------------------------------------------

void save_unified(const fs::path& dir, const UnifiedDomain& unified) {
  fs::create_directories(dir);
  const std::uint32_t d = static_cast<std::uint32_t>(unified.style.dim());
  write_tensor(dir / "unified_mean.cstn",
               tensor_from(std::vector<std::uint32_t>{d}, unified.style.mean));
  write_tensor(dir / "unified_cov.cstn",
               tensor_from(std::vector<std::uint32_t>{d, d}, unified.style.covariance.data()));
  write_ini(dir / "unified.ini", {{"method", to_string(unified.method)},
                                  {"iterations", std::to_string(unified.iterations)},
                                  {"residual", format_double(unified.residual)},
                                  {"converged", unified.converged ? "1" : "0"}});
}

UnifiedDomain load_unified(const fs::path& dir) {
  const Tensor mean = read_tensor(dir / "unified_mean.cstn");
  const Tensor cov = read_tensor(dir / "unified_cov.cstn");
  if (mean.dims.size() != 1 || cov.dims.size() != 2 || cov.dims[0] != cov.dims[1] ||
      cov.dims[0] != mean.dims[0])
    throw StateError("unified-domain dump has inconsistent shapes");

  UnifiedDomain unified;
  unified.style.mean.assign(mean.values.begin(), mean.values.end());
  unified.style.covariance = SymMatrix(static_cast<int>(cov.dims[0]));
  for (std::size_t i = 0; i < cov.values.size(); ++i)
    unified.style.covariance.data()[i] = cov.values[i];

  const IniMap meta = read_ini(dir / "unified.ini");
  unified.method = unified_method_from_string(ini_get(meta, "method"));
  unified.iterations = static_cast<int>(parse_int(ini_get(meta, "iterations"), "iterations"));
  unified.residual = parse_double(ini_get(meta, "residual"), "residual");
  unified.converged = ini_get(meta, "converged") == "1";
  return unified;
}

bool unified_exists(const fs::path& dir) {
  return fs::exists(dir / "unified_mean.cstn") && fs::exists(dir / "unified_cov.cstn") &&
         fs::exists(dir / "unified.ini");
}

}  // namespace conststyle::io
