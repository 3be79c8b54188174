// SPDX-License-Identifier: Apache-2.0
#include "multires/store.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include "multires/rng.hpp"
#include "multires/version.hpp"

namespace multires {

namespace {

static_assert(sizeof(double) == 8, "store format requires 64-bit doubles");

void write_f64_file(const std::filesystem::path& path, const double* data,
                    size_t count) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw StoreError("cannot open " + path.string() + " for writing");
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(data),
              static_cast<std::streamsize>(count * 8));
  } else {
    for (size_t i = 0; i < count; ++i) {
      char bytes[8];
      std::memcpy(bytes, &data[i], 8);
      std::swap(bytes[0], bytes[7]);
      std::swap(bytes[1], bytes[6]);
      std::swap(bytes[2], bytes[5]);
      std::swap(bytes[3], bytes[4]);
      out.write(bytes, 8);
    }
  }
  if (!out) throw StoreError("short write to " + path.string());
}

std::vector<double> read_f64_file(const std::filesystem::path& path,
                                  size_t count) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw StoreError("cannot open " + path.string());
  auto bytes = static_cast<size_t>(in.tellg());
  if (bytes != count * 8)
    throw StoreError(path.string() + " holds " + std::to_string(bytes / 8) +
                     " values, manifest says " + std::to_string(count));
  in.seekg(0);
  std::vector<double> data(count);
  in.read(reinterpret_cast<char*>(data.data()),
          static_cast<std::streamsize>(count * 8));
  if (!in) throw StoreError("short read from " + path.string());
  if constexpr (std::endian::native == std::endian::big) {
    for (double& v : data) {
      char b[8];
      std::memcpy(b, &v, 8);
      std::swap(b[0], b[7]);
      std::swap(b[1], b[6]);
      std::swap(b[2], b[5]);
      std::swap(b[3], b[4]);
      std::memcpy(&v, b, 8);
    }
  }
  return data;
}

// JSON has no infinity; stability constants can be infinite.
nlohmann::json json_real(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

double real_from_json(const nlohmann::json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  throw StoreError("manifest holds a malformed real value");
}

nlohmann::json space_meta(const AffineReducedSpace& space) {
  nlohmann::json j;
  j["dim"] = space.dim();
  j["picked"] = space.picked;
  j["eps_history"] = space.eps_history;
  j["mu"] = json_real(space.mu);
  j["sigma_est"] = json_real(space.sigma_est);
  return j;
}

void space_from_meta(const nlohmann::json& j, const StoreReader& reader,
                     const std::string& prefix, int level,
                     AffineReducedSpace& space) {
  space.offset = FemVector{level, reader.get_array(prefix + "_offset")};
  Eigen::MatrixXd basis = reader.get_matrix(prefix + "_basis");
  space.basis.clear();
  for (Eigen::Index i = 0; i < basis.rows(); ++i)
    space.basis.push_back(FemVector{level, basis.row(i).transpose()});
  space.picked = j.at("picked").get<std::vector<int>>();
  space.eps_history = j.at("eps_history").get<std::vector<double>>();
  space.mu = real_from_json(j.at("mu"));
  space.sigma_est = real_from_json(j.at("sigma_est"));
  if (j.at("dim").get<int>() != space.dim())
    throw StoreError("basis array for " + prefix +
                     " disagrees with the manifest dimension");
}

Eigen::MatrixXd pack_rows(const std::vector<Eigen::VectorXd>& rows) {
  if (rows.empty()) return Eigen::MatrixXd(0, 0);
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), rows[0].size());
  for (size_t i = 0; i < rows.size(); ++i)
    m.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
  return m;
}

}  // namespace

StoreWriter::StoreWriter(const std::filesystem::path& dir) : dir_(dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw StoreError("cannot create store directory " + dir_.string());
  manifest_["arrays"] = nlohmann::json::object();
}

void StoreWriter::put_array(const std::string& name, const Eigen::VectorXd& v) {
  const std::string file = name + ".f64";
  write_f64_file(dir_ / file, v.data(), static_cast<size_t>(v.size()));
  manifest_["arrays"][name] = {{"file", file}, {"count", v.size()}};
}

void StoreWriter::put_matrix(const std::string& name, const Eigen::MatrixXd& m) {
  const std::string file = name + ".f64";
  std::vector<double> buf(static_cast<size_t>(m.rows() * m.cols()));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      buf[static_cast<size_t>(r * m.cols() + c)] = m(r, c);
  write_f64_file(dir_ / file, buf.data(), buf.size());
  manifest_["arrays"][name] = {{"file", file},
                               {"count", m.rows() * m.cols()},
                               {"rows", m.rows()},
                               {"cols", m.cols()}};
}

void StoreWriter::finish() {
  if (finished_) return;
  std::ofstream out(dir_ / "manifest.json", std::ios::binary);
  if (!out) throw StoreError("cannot write manifest in " + dir_.string());
  out << manifest_.dump(2) << '\n';
  if (!out) throw StoreError("short write of manifest in " + dir_.string());
  finished_ = true;
}

StoreReader::StoreReader(const std::filesystem::path& dir) : dir_(dir) {
  std::ifstream in(dir_ / "manifest.json");
  if (!in)
    throw StoreError("no manifest.json in " + dir_.string() +
                     "; run the offline command first");
  try {
    in >> manifest_;
  } catch (const nlohmann::json::exception& e) {
    throw StoreError("corrupt manifest in " + dir_.string() + ": " + e.what());
  }
}

bool StoreReader::has_array(const std::string& name) const {
  return manifest_.contains("arrays") && manifest_["arrays"].contains(name);
}

Eigen::VectorXd StoreReader::get_array(const std::string& name) const {
  if (!has_array(name)) throw StoreError("store lacks array '" + name + "'");
  const auto& entry = manifest_["arrays"][name];
  auto count = entry.at("count").get<size_t>();
  std::vector<double> data =
      read_f64_file(dir_ / entry.at("file").get<std::string>(), count);
  return Eigen::Map<Eigen::VectorXd>(data.data(),
                                     static_cast<Eigen::Index>(count));
}

Eigen::MatrixXd StoreReader::get_matrix(const std::string& name) const {
  if (!has_array(name)) throw StoreError("store lacks array '" + name + "'");
  const auto& entry = manifest_["arrays"][name];
  if (!entry.contains("rows"))
    throw StoreError("array '" + name + "' was not stored as a matrix");
  auto rows = entry.at("rows").get<Eigen::Index>();
  auto cols = entry.at("cols").get<Eigen::Index>();
  std::vector<double> data =
      read_f64_file(dir_ / entry.at("file").get<std::string>(),
                    static_cast<size_t>(rows * cols));
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c)
      m(r, c) = data[static_cast<size_t>(r * cols + c)];
  return m;
}

void save_offline(const std::filesystem::path& dir,
                  const OfflineArtifacts& art) {
  StoreWriter w(dir);
  nlohmann::json& m = w.meta();
  m["format"] = kStoreFormat;
  m["version"] = kVersion;
  m["rng"] = std::string(UniformSampler::kAlgorithm);
  m["config"] = config_to_json(art.config);
  m["k"] = art.family.size();

  nlohmann::json boxes = nlohmann::json::array();
  for (const MeasurementBox& b : art.boxes)
    boxes.push_back({{"x0", b.x0}, {"y0", b.y0}, {"width", b.width}});
  m["boxes"] = boxes;

  m["root"] = {
      {"lower", std::vector<double>(art.family.root.lower.begin(),
                                    art.family.root.lower.end())},
      {"upper", std::vector<double>(art.family.root.upper.begin(),
                                    art.family.root.upper.end())}};

  m["global"] = space_meta(art.global);
  w.put_array("global_offset", art.global.offset.coeffs);
  {
    std::vector<Eigen::VectorXd> rows;
    for (const FemVector& b : art.global.basis) rows.push_back(b.coeffs);
    w.put_matrix("global_basis", pack_rows(rows));
  }

  nlohmann::json cells = nlohmann::json::array();
  for (int k = 0; k < art.family.size(); ++k) {
    const ParameterCell& cell = art.family.cells[static_cast<size_t>(k)];
    nlohmann::json jc;
    jc["lower"] = std::vector<double>(cell.lower.begin(), cell.lower.end());
    jc["upper"] = std::vector<double>(cell.upper.begin(), cell.upper.end());
    jc["members"] = cell.members;
    jc["frozen"] = cell.frozen;
    jc["space"] = space_meta(cell.space);
    cells.push_back(jc);
    const std::string prefix = "cell_" + std::to_string(k);
    w.put_array(prefix + "_offset", cell.space.offset.coeffs);
    std::vector<Eigen::VectorXd> rows;
    for (const FemVector& b : cell.space.basis) rows.push_back(b.coeffs);
    w.put_matrix(prefix + "_basis", pack_rows(rows));
  }
  m["cells"] = cells;

  nlohmann::json hist = nlohmann::json::array();
  for (const SplitRecord& rec : art.family.history)
    hist.push_back({{"cell_index", rec.cell_index},
                    {"direction", rec.direction},
                    {"sigma_before", json_real(rec.sigma_before)},
                    {"sigma_minus", json_real(rec.sigma_minus)},
                    {"sigma_plus", json_real(rec.sigma_plus)}});
  m["history"] = hist;

  auto pack_params = [](const std::vector<ParameterPoint>& pts) {
    std::vector<Eigen::VectorXd> rows(pts.begin(), pts.end());
    return pack_rows(rows);
  };
  auto pack_snaps = [](const std::vector<FemVector>& snaps) {
    std::vector<Eigen::VectorXd> rows;
    for (const FemVector& u : snaps) rows.push_back(u.coeffs);
    return pack_rows(rows);
  };
  w.put_matrix("params_train", pack_params(art.y_train));
  w.put_matrix("params_test", pack_params(art.y_test));
  w.put_matrix("snaps_train", pack_snaps(art.u_train));
  w.put_matrix("snaps_test", pack_snaps(art.u_test));
  w.finish();
}

void write_raw_f64(const std::filesystem::path& path, const Eigen::VectorXd& v) {
  write_f64_file(path, v.data(), static_cast<size_t>(v.size()));
}

Eigen::VectorXd read_raw_f64(const std::filesystem::path& path) {
  std::error_code ec;
  auto bytes = std::filesystem::file_size(path, ec);
  if (ec) throw StoreError("cannot stat " + path.string());
  if (bytes % 8 != 0)
    throw StoreError(path.string() + " is not a float64 array");
  std::vector<double> data = read_f64_file(path, bytes / 8);
  return Eigen::Map<Eigen::VectorXd>(data.data(),
                                     static_cast<Eigen::Index>(data.size()));
}

OfflineArtifacts load_offline(const std::filesystem::path& dir) {
  StoreReader r(dir);
  const nlohmann::json& m = r.manifest();
  if (!m.contains("format") || m.at("format").get<int>() != kStoreFormat)
    throw StoreError("store format of " + dir.string() +
                     " is not supported by this build");

  OfflineArtifacts art;
  art.config = config_from_json(m.at("config"));
  art.config.validate();
  const int level = art.config.fine_level;

  for (const auto& jb : m.at("boxes"))
    art.boxes.push_back(MeasurementBox{jb.at("x0").get<double>(),
                                       jb.at("y0").get<double>(),
                                       jb.at("width").get<double>()});

  auto unpack_params = [](const Eigen::MatrixXd& mat) {
    std::vector<ParameterPoint> pts;
    for (Eigen::Index i = 0; i < mat.rows(); ++i)
      pts.push_back(mat.row(i).transpose());
    return pts;
  };
  auto unpack_snaps = [level](const Eigen::MatrixXd& mat) {
    std::vector<FemVector> snaps;
    for (Eigen::Index i = 0; i < mat.rows(); ++i)
      snaps.push_back(FemVector{level, mat.row(i).transpose()});
    return snaps;
  };
  art.y_train = unpack_params(r.get_matrix("params_train"));
  art.y_test = unpack_params(r.get_matrix("params_test"));
  art.u_train = unpack_snaps(r.get_matrix("snaps_train"));
  art.u_test = unpack_snaps(r.get_matrix("snaps_test"));

  space_from_meta(m.at("global"), r, "global", level, art.global);

  const auto& jroot = m.at("root");
  auto lower = jroot.at("lower").get<std::vector<double>>();
  auto upper = jroot.at("upper").get<std::vector<double>>();
  art.family.root.lower =
      Eigen::Map<Eigen::VectorXd>(lower.data(), static_cast<Eigen::Index>(lower.size()));
  art.family.root.upper =
      Eigen::Map<Eigen::VectorXd>(upper.data(), static_cast<Eigen::Index>(upper.size()));

  int k = 0;
  for (const auto& jc : m.at("cells")) {
    ParameterCell cell;
    auto clo = jc.at("lower").get<std::vector<double>>();
    auto cup = jc.at("upper").get<std::vector<double>>();
    cell.lower = Eigen::Map<Eigen::VectorXd>(clo.data(),
                                             static_cast<Eigen::Index>(clo.size()));
    cell.upper = Eigen::Map<Eigen::VectorXd>(cup.data(),
                                             static_cast<Eigen::Index>(cup.size()));
    cell.members = jc.at("members").get<std::vector<int>>();
    cell.frozen = jc.at("frozen").get<bool>();
    space_from_meta(jc.at("space"), r, "cell_" + std::to_string(k), level,
                    cell.space);
    art.family.cells.push_back(std::move(cell));
    ++k;
  }
  if (m.contains("k") && m.at("k").get<int>() != art.family.size())
    throw StoreError("manifest cell count disagrees with the cell list");

  for (const auto& jh : m.at("history"))
    art.family.history.push_back(
        SplitRecord{jh.at("cell_index").get<int>(),
                    jh.at("direction").get<int>(),
                    real_from_json(jh.at("sigma_before")),
                    real_from_json(jh.at("sigma_minus")),
                    real_from_json(jh.at("sigma_plus"))});
  return art;
}

}  // namespace multires
