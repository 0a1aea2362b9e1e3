#include "mpca/io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <sstream>

namespace mpca::io {

namespace fs = std::filesystem;

namespace {

constexpr std::array<char, 4> kMt2Magic{'M', 'T', '2', '\0'};
constexpr std::array<char, 4> kBasisMagic{'M', 'B', 'Z', '\0'};

void put_u32(std::ostream& out, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                     static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
  out.write(b, 4);
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) throw ValidationError("truncated header");
  return std::uint32_t{b[0]} | (std::uint32_t{b[1]} << 8) | (std::uint32_t{b[2]} << 16) |
         (std::uint32_t{b[3]} << 24);
}

void put_f64(std::ostream& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  char b[8];
  for (int k = 0; k < 8; ++k) b[k] = static_cast<char>((bits >> (8 * k)) & 0xff);
  out.write(b, 8);
}

std::uint32_t checked_u32(Index v) {
  if (v < 0 || v > Index(0xffffffff)) throw ValidationError("dimension does not fit in u32");
  return static_cast<std::uint32_t>(v);
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  return in;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot write " + path.string());
  return out;
}

Eigen::MatrixXd single(std::istream& in, const char* what) {
  auto ms = read_mt2(in);
  if (ms.size() != 1) throw ValidationError(std::string(what) + ": expected a single matrix");
  return std::move(ms.front());
}

std::string mt2_bytes(const Eigen::MatrixXd& m) {
  std::ostringstream out(std::ios::binary);
  write_mt2(out, {m});
  return out.str();
}

Eigen::MatrixXd mt2_from_bytes(const std::string& bytes, const char* what) {
  std::istringstream in(bytes, std::ios::binary);
  return single(in, what);
}

Json vector_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

void write_basis_file(const fs::path& path, Json header,
                      const std::vector<std::pair<std::string, Eigen::MatrixXd>>& blocks) {
  Json names = Json::array();
  for (const auto& b : blocks) names.push_back(b.first);
  header["blocks"] = names;
  const std::string text = header.dump();
  auto out = open_out(path);
  out.write(kBasisMagic.data(), 4);
  put_u32(out, checked_u32(static_cast<Index>(text.size())));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& b : blocks) write_mt2(out, {b.second});
  if (!out) throw ValidationError("failed writing " + path.string());
}

}  // namespace

void write_mt2(std::ostream& out, const std::vector<Eigen::MatrixXd>& samples) {
  const Index p = samples.empty() ? 0 : samples.front().rows();
  const Index q = samples.empty() ? 0 : samples.front().cols();
  out.write(kMt2Magic.data(), 4);
  put_u32(out, checked_u32(p));
  put_u32(out, checked_u32(q));
  put_u32(out, checked_u32(static_cast<Index>(samples.size())));
  for (const auto& x : samples) {
    if (x.rows() != p || x.cols() != q) throw ValidationError("write_mt2: inconsistent shapes");
    for (Index k = 0; k < x.size(); ++k) put_f64(out, x.data()[k]);
  }
}

std::vector<Eigen::MatrixXd> read_mt2(std::istream& in) {
  std::array<char, 4> magic{};
  if (!in.read(magic.data(), 4) || magic != kMt2Magic)
    throw ValidationError("not an MT2 matrix stream (bad magic)");
  const std::uint32_t p = get_u32(in);
  const std::uint32_t q = get_u32(in);
  const std::uint32_t n = get_u32(in);
  std::vector<Eigen::MatrixXd> out;
  out.reserve(n);
  std::vector<unsigned char> buf(std::size_t{p} * q * 8);
  for (std::uint32_t i = 0; i < n; ++i) {
    if (!in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size())))
      throw ValidationError("MT2 stream truncated at sample " + std::to_string(i));
    Eigen::MatrixXd x(p, q);
    for (std::size_t k = 0; k < std::size_t{p} * q; ++k) {
      std::uint64_t bits = 0;
      for (int b = 0; b < 8; ++b) bits |= std::uint64_t{buf[8 * k + b]} << (8 * b);
      x.data()[k] = std::bit_cast<double>(bits);
    }
    out.push_back(std::move(x));
  }
  return out;
}

void write_dataset(const fs::path& path, const MatrixDataset<double>& data) {
  auto out = open_out(path);
  write_mt2(out, data.samples());
  if (!out) throw ValidationError("failed writing " + path.string());
}

MatrixDataset<double> read_dataset(const fs::path& path) {
  auto in = open_in(path);
  return MatrixDataset<double>(read_mt2(in));
}

MatrixDataset<double> read_csv(const fs::path& path, Index p, Index q) {
  if (p < 1 || q < 1) throw ValidationError("read_csv: shape must be positive");
  auto in = open_in(path);
  std::vector<Eigen::MatrixXd> samples;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
        if (cell.find_first_not_of(" \t\r", used) != std::string::npos) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw ValidationError(path.string() + ":" + std::to_string(lineno) + ": bad number '" +
                              cell + "'");
      }
    }
    if (static_cast<Index>(row.size()) != p * q)
      throw ValidationError(path.string() + ":" + std::to_string(lineno) + ": expected " +
                            std::to_string(p * q) + " values, got " + std::to_string(row.size()));
    samples.emplace_back(Eigen::Map<const Eigen::MatrixXd>(row.data(), p, q));
  }
  return MatrixDataset<double>(std::move(samples));
}

void write_csv(const fs::path& path, const MatrixDataset<double>& data) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path.string());
  out.precision(17);
  for (const auto& x : data.samples()) {
    for (Index k = 0; k < x.size(); ++k) out << (k ? "," : "") << x.data()[k];
    out << '\n';
  }
}

Eigen::MatrixXd read_pgm(const fs::path& path) {
  auto in = open_in(path);
  auto token = [&]() {
    std::string t;
    int c;
    while ((c = in.get()) != EOF) {
      if (c == '#') {
        while ((c = in.get()) != EOF && c != '\n') {
        }
        continue;
      }
      if (std::isspace(c)) {
        if (!t.empty()) break;
        continue;
      }
      t.push_back(static_cast<char>(c));
    }
    return t;
  };
  const std::string magic = token();
  if (magic != "P5")
    throw ValidationError(path.string() + ": unsupported PGM variant '" + magic +
                          "' (only binary P5)");
  long width = 0, height = 0, maxval = 0;
  try {
    width = std::stol(token());
    height = std::stol(token());
    maxval = std::stol(token());
  } catch (const std::exception&) {
    throw ValidationError(path.string() + ": malformed PGM header");
  }
  if (width < 1 || height < 1 || maxval < 1 || maxval > 65535)
    throw ValidationError(path.string() + ": unsupported PGM dimensions or maxval");
  const std::size_t bpp = maxval > 255 ? 2 : 1;
  std::vector<unsigned char> buf(static_cast<std::size_t>(width * height) * bpp);
  if (!in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size())))
    throw ValidationError(path.string() + ": truncated pixel data");
  Eigen::MatrixXd img(height, width);
  for (long r = 0; r < height; ++r)
    for (long c = 0; c < width; ++c) {
      const std::size_t k = static_cast<std::size_t>(r * width + c) * bpp;
      const unsigned v = bpp == 2 ? (unsigned{buf[k]} << 8) | buf[k + 1] : buf[k];
      img(r, c) = static_cast<double>(v) / static_cast<double>(maxval);
    }
  return img;
}

void write_pgm(const fs::path& path, const Eigen::MatrixXd& image) {
  auto out = open_out(path);
  out << "P5\n" << image.cols() << ' ' << image.rows() << "\n255\n";
  for (Index r = 0; r < image.rows(); ++r)
    for (Index c = 0; c < image.cols(); ++c) {
      const double v = std::clamp(image(r, c), 0.0, 1.0);
      out.put(static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0))));
    }
  if (!out) throw ValidationError("failed writing " + path.string());
}

MatrixDataset<double> read_pgm_dir(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw ValidationError(dir.string() + " is not a directory");
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    std::string ext = e.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".pgm") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw ValidationError("no .pgm files under " + dir.string());
  std::vector<Eigen::MatrixXd> images;
  images.reserve(files.size());
  for (const auto& f : files) {
    images.push_back(read_pgm(f));
    if (images.back().rows() != images.front().rows() ||
        images.back().cols() != images.front().cols())
      throw ValidationError(f.string() + ": image size differs from " + files.front().string());
  }
  return MatrixDataset<double>(std::move(images));
}

Format parse_format(const std::string& name) {
  if (name == "pgm-dir") return Format::pgm_dir;
  if (name == "csv") return Format::csv;
  if (name == "bin") return Format::bin;
  throw ValidationError("unknown format '" + name + "' (expected pgm-dir, csv or bin)");
}

Format guess_format(const fs::path& path) {
  if (fs::is_directory(path)) return Format::pgm_dir;
  if (path.extension() == ".csv") return Format::csv;
  return Format::bin;
}

MatrixDataset<double> ingest(const fs::path& path, Format format, std::optional<Index> csv_rows) {
  switch (format) {
    case Format::pgm_dir:
      return read_pgm_dir(path);
    case Format::bin:
      return read_dataset(path);
    case Format::csv: {
      if (!csv_rows) throw ValidationError("csv ingestion needs the row count p");
      // Column count follows from the first row's length.
      auto in = open_in(path);
      std::string line;
      while (std::getline(in, line) && line.find_first_not_of(" \t\r") == std::string::npos) {
      }
      const auto len = static_cast<Index>(std::count(line.begin(), line.end(), ',') + 1);
      if (*csv_rows < 1 || len % *csv_rows != 0)
        throw ValidationError("csv row length " + std::to_string(len) + " is not a multiple of p = " +
                              std::to_string(*csv_rows));
      return read_csv(path, *csv_rows, len / *csv_rows);
    }
  }
  throw ValidationError("unsupported format");
}

std::string base64_encode(const std::string& bytes) {
  static constexpr char kAlphabet[] =
      "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < bytes.size(); i += 3) {
    const std::uint32_t v = (std::uint32_t{static_cast<unsigned char>(bytes[i])} << 16) |
                            (std::uint32_t{static_cast<unsigned char>(bytes[i + 1])} << 8) |
                            static_cast<unsigned char>(bytes[i + 2]);
    out += {kAlphabet[v >> 18], kAlphabet[(v >> 12) & 63], kAlphabet[(v >> 6) & 63], kAlphabet[v & 63]};
  }
  if (const std::size_t rest = bytes.size() - i; rest > 0) {
    std::uint32_t v = std::uint32_t{static_cast<unsigned char>(bytes[i])} << 16;
    if (rest == 2) v |= std::uint32_t{static_cast<unsigned char>(bytes[i + 1])} << 8;
    out += kAlphabet[v >> 18];
    out += kAlphabet[(v >> 12) & 63];
    out += rest == 2 ? kAlphabet[(v >> 6) & 63] : '=';
    out += '=';
  }
  return out;
}

std::string base64_decode(const std::string& text) {
  auto value = [](char c) -> int {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= 'a' && c <= 'z') return c - 'a' + 26;
    if (c >= '0' && c <= '9') return c - '0' + 52;
    if (c == '+') return 62;
    if (c == '/') return 63;
    return -1;
  };
  if (text.size() % 4 != 0) throw ValidationError("base64: length is not a multiple of 4");
  std::string out;
  out.reserve(text.size() / 4 * 3);
  for (std::size_t i = 0; i < text.size(); i += 4) {
    int v[4];
    int pad = 0;
    for (int k = 0; k < 4; ++k) {
      const char c = text[i + k];
      if (c == '=' && i + 4 == text.size() && k >= 2) {
        v[k] = 0;
        ++pad;
      } else if ((v[k] = value(c)) < 0 || pad > 0) {
        throw ValidationError("base64: invalid character");
      }
    }
    const std::uint32_t w = (std::uint32_t(v[0]) << 18) | (std::uint32_t(v[1]) << 12) |
                            (std::uint32_t(v[2]) << 6) | std::uint32_t(v[3]);
    out.push_back(static_cast<char>(w >> 16));
    if (pad < 2) out.push_back(static_cast<char>((w >> 8) & 0xff));
    if (pad < 1) out.push_back(static_cast<char>(w & 0xff));
  }
  return out;
}

Json spec_to_json(const ModelSpec<double>& spec) {
  return Json{{"format", "mpca-model-spec/1"},
              {"p", spec.p()},
              {"q", spec.q()},
              {"p0", spec.p0()},
              {"q0", spec.q0()},
              {"sigma2", spec.sigma2},
              {"mu", base64_encode(mt2_bytes(spec.mu))},
              {"A0", base64_encode(mt2_bytes(spec.A0.matrix()))},
              {"B0", base64_encode(mt2_bytes(spec.B0.matrix()))},
              {"T", base64_encode(mt2_bytes(spec.T))}};
}

ModelSpec<double> spec_from_json(const Json& j) {
  try {
    ModelSpec<double> spec;
    spec.mu = mt2_from_bytes(base64_decode(j.at("mu").get<std::string>()), "mu");
    spec.A0 = OrthonormalFrame<double>(mt2_from_bytes(base64_decode(j.at("A0").get<std::string>()), "A0"));
    spec.B0 = OrthonormalFrame<double>(mt2_from_bytes(base64_decode(j.at("B0").get<std::string>()), "B0"));
    spec.T = mt2_from_bytes(base64_decode(j.at("T").get<std::string>()), "T");
    spec.sigma2 = j.at("sigma2").get<double>();
    if (j.at("p").get<Index>() != spec.p() || j.at("q").get<Index>() != spec.q() ||
        j.at("p0").get<Index>() != spec.p0() || j.at("q0").get<Index>() != spec.q0())
      throw ValidationError("model spec: declared dimensions disagree with the stored blocks");
    spec.validate();
    return spec;
  } catch (const Json::exception& e) {
    throw ValidationError(std::string("model spec: ") + e.what());
  }
}

void save_spec(const fs::path& path, const ModelSpec<double>& spec) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << spec_to_json(spec).dump(2) << '\n';
}

ModelSpec<double> load_spec(const fs::path& path) {
  auto in = open_in(path);
  Json j;
  try {
    in >> j;
  } catch (const Json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  return spec_from_json(j);
}

namespace {

const char* init_name(InitStrategy s) {
  switch (s) {
    case InitStrategy::row_scatter_eigenvectors:
      return "row-scatter-eigenvectors";
    case InitStrategy::random_orthonormal:
      return "random-orthonormal";
    case InitStrategy::user_supplied:
      return "user-supplied";
  }
  return "unknown";
}

}  // namespace

Json config_to_json(const MpcaConfig& cfg) {
  return Json{{"pdim", cfg.pdim},         {"qdim", cfg.qdim},         {"tol", cfg.tol},
              {"max_iter", cfg.max_iter}, {"init", init_name(cfg.init)}, {"restarts", cfg.restarts},
              {"seed", cfg.seed}, {"subspace_tol", cfg.subspace_tol}};
}

void save_basis(const fs::path& path, const MpcaBasis<double>& basis, const MpcaConfig& cfg) {
  Json h{{"kind", "mpca"},
         {"shape", {basis.A.ambient(), basis.B.ambient()}},
         {"config", config_to_json(cfg)},
         {"objective_trace", basis.objective_trace},
         {"converged", basis.converged},
         {"iterations", basis.iterations},
         {"restart_objectives", basis.restart_objectives},
         {"lambda", vector_json(basis.lambda)},
         {"xi", vector_json(basis.xi)}};
  std::vector<std::pair<std::string, Eigen::MatrixXd>> blocks{{"A", basis.A.matrix()},
                                                              {"B", basis.B.matrix()}};
  if (basis.mean.size() > 0) blocks.emplace_back("mean", basis.mean);
  write_basis_file(path, std::move(h), blocks);
}

void save_basis(const fs::path& path, const TwoDPcaBasis<double>& basis) {
  Json h{{"kind", "2d2pca"},
         {"shape", {basis.Astar.ambient(), basis.Bstar.ambient()}},
         {"config", {{"pdim", basis.Astar.rank()}, {"qdim", basis.Bstar.rank()}}},
         {"lambda", vector_json(basis.lambdaStar)},
         {"xi", vector_json(basis.xiStar)}};
  std::vector<std::pair<std::string, Eigen::MatrixXd>> blocks{{"A", basis.Astar.matrix()},
                                                              {"B", basis.Bstar.matrix()}};
  if (basis.mean.size() > 0) blocks.emplace_back("mean", basis.mean);
  write_basis_file(path, std::move(h), blocks);
}

void save_basis(const fs::path& path, const PcaBasis<double>& basis) {
  Json h{{"kind", "pca"},
         {"shape", {basis.p, basis.q}},
         {"config", {{"k", basis.components()}}},
         {"eigenvalues", vector_json(basis.eigenvalues)}};
  std::vector<std::pair<std::string, Eigen::MatrixXd>> blocks{{"loadings", basis.loadings.matrix()}};
  if (basis.mean.size() > 0) blocks.emplace_back("mean", basis.mean);
  write_basis_file(path, std::move(h), blocks);
}

StoredBasis load_basis(const fs::path& path) {
  auto in = open_in(path);
  std::array<char, 4> magic{};
  if (!in.read(magic.data(), 4) || magic != kBasisMagic)
    throw ValidationError(path.string() + ": not a basis file (bad magic)");
  const std::uint32_t len = get_u32(in);
  std::string text(len, '\0');
  if (!in.read(text.data(), len)) throw ValidationError(path.string() + ": truncated header");
  StoredBasis out;
  try {
    out.header = Json::parse(text);
    out.kind = out.header.at("kind").get<std::string>();
    out.p = out.header.at("shape").at(0).get<Index>();
    out.q = out.header.at("shape").at(1).get<Index>();
    for (const auto& name : out.header.at("blocks")) {
      const auto n = name.get<std::string>();
      Eigen::MatrixXd m = single(in, n.c_str());
      if (n == "A") out.A = std::move(m);
      else if (n == "B") out.B = std::move(m);
      else if (n == "loadings") out.loadings = std::move(m);
      else if (n == "mean") out.mean = std::move(m);
      else throw ValidationError("unknown block '" + n + "'");
    }
  } catch (const Json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  const bool two_sided = out.kind == "mpca" || out.kind == "2d2pca";
  if (two_sided && (out.A.rows() != out.p || out.B.rows() != out.q))
    throw ValidationError(path.string() + ": frame shapes disagree with header");
  if (out.kind == "pca" && out.loadings.rows() != out.p * out.q)
    throw ValidationError(path.string() + ": loading shape disagrees with header");
  if (!two_sided && out.kind != "pca") throw ValidationError("unknown basis kind '" + out.kind + "'");
  return out;
}

MatrixDataset<double> StoredBasis::reconstruct(const MatrixDataset<double>& data) const {
  if (data.rows() != p || data.cols() != q)
    throw ValidationError("basis shape " + detail::shape_str(p, q) + " does not match data " +
                          detail::shape_str(data.rows(), data.cols()));
  const Eigen::MatrixXd center = mean.size() > 0 ? mean : data.mean();
  if (kind == "pca") {
    PcaBasis<double> b;
    b.loadings = OrthonormalFrame<double>(loadings);
    b.p = p;
    b.q = q;
    return pca_reconstruct(data, b, center);
  }
  return mpca::reconstruct(data, OrthonormalFrame<double>(A), OrthonormalFrame<double>(B), center);
}

}  // namespace mpca::io
