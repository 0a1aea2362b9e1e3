#pragma once

// File formats.
//
//  MT2 matrix stream: "MT2\0", u32 p, u32 q, u32 n (little-endian), then n·p·q
//  float64 (little-endian) values, each sample stored column-major.
//
//  Basis file (.mbz): "MBZ\0", u32 header length L, L bytes of JSON header, then one
//  MT2 stream (n = 1) per entry of the header's "blocks" array, in that order.
//
//  Model spec: JSON object with p, q, p0, q0, sigma2 and base64-encoded MT2 streams
//  (n = 1) for mu, A0, B0 and T.

#include "mpca/baselines.hpp"
#include "mpca/glram.hpp"
#include "mpca/simulator.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace mpca::io {

using Json = nlohmann::json;

void write_mt2(std::ostream& out, const std::vector<Eigen::MatrixXd>& samples);
std::vector<Eigen::MatrixXd> read_mt2(std::istream& in);

void write_dataset(const std::filesystem::path& path, const MatrixDataset<double>& data);
MatrixDataset<double> read_dataset(const std::filesystem::path& path);

/// One vec'd (column-major) sample per row, comma separated.
MatrixDataset<double> read_csv(const std::filesystem::path& path, Index p, Index q);
void write_csv(const std::filesystem::path& path, const MatrixDataset<double>& data);

/// Binary P5 PGM, maxval ≤ 65535; pixels scaled to [0,1] by maxval.
Eigen::MatrixXd read_pgm(const std::filesystem::path& path);
/// Writes an 8-bit P5 image, clamping values to [0,1].
void write_pgm(const std::filesystem::path& path, const Eigen::MatrixXd& image);
/// All *.pgm files under `dir` (recursively), in lexicographic path order.
MatrixDataset<double> read_pgm_dir(const std::filesystem::path& dir);

enum class Format { pgm_dir, csv, bin };
Format parse_format(const std::string& name);
/// Guesses from the path: directory → pgm-dir, *.csv → csv, otherwise bin.
Format guess_format(const std::filesystem::path& path);
MatrixDataset<double> ingest(const std::filesystem::path& path, Format format,
                             std::optional<Index> csv_rows = std::nullopt);

std::string base64_encode(const std::string& bytes);
std::string base64_decode(const std::string& text);

Json spec_to_json(const ModelSpec<double>& spec);
ModelSpec<double> spec_from_json(const Json& j);
void save_spec(const std::filesystem::path& path, const ModelSpec<double>& spec);
ModelSpec<double> load_spec(const std::filesystem::path& path);

/// Any of the three fitted bases, as read back from a basis file.
struct StoredBasis {
  std::string kind;  // "mpca", "2d2pca" or "pca"
  Index p = 0;
  Index q = 0;
  Json header;
  Eigen::MatrixXd A;         // mpca / 2d2pca
  Eigen::MatrixXd B;         // mpca / 2d2pca
  Eigen::MatrixXd loadings;  // pca
  Eigen::MatrixXd mean;

  /// Reconstruction of `data` around the stored training mean.
  MatrixDataset<double> reconstruct(const MatrixDataset<double>& data) const;
};

Json config_to_json(const MpcaConfig& cfg);

void save_basis(const std::filesystem::path& path, const MpcaBasis<double>& basis,
                const MpcaConfig& cfg);
void save_basis(const std::filesystem::path& path, const TwoDPcaBasis<double>& basis);
void save_basis(const std::filesystem::path& path, const PcaBasis<double>& basis);
StoredBasis load_basis(const std::filesystem::path& path);

}  // namespace mpca::io
