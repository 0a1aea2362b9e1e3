#include <doctest.h>

#include "support.hpp"

#include <mpca/io.hpp>

#include <fstream>
#include <sstream>

using namespace mpca;
using Eigen::MatrixXd;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("mpca_io_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  fs::path operator/(const std::string& name) const { return path / name; }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void spit(const fs::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary);
  out << bytes;
}

bool identical(const MatrixDataset<double>& a, const MatrixDataset<double>& b) {
  if (a.size() != b.size() || a.rows() != b.rows() || a.cols() != b.cols()) return false;
  for (Index i = 0; i < a.size(); ++i)
    if (std::memcmp(a[i].data(), b[i].data(), sizeof(double) * a[i].size()) != 0) return false;
  return true;
}

}  // namespace

TEST_CASE("MT2 layout") {
  std::ostringstream out;
  MatrixXd m(2, 3);
  m << 1, 2, 3, 4, 5, 6;
  io::write_mt2(out, {m});
  const std::string bytes = out.str();
  REQUIRE(bytes.size() == 16 + 6 * 8);
  CHECK(bytes.compare(0, 4, std::string("MT2\0", 4)) == 0);
  CHECK(bytes[4] == 2);
  CHECK(bytes[8] == 3);
  CHECK(bytes[12] == 1);
  double second;
  std::memcpy(&second, bytes.data() + 24, 8);
  CHECK(second == 4.0);  // column-major

  std::istringstream in(bytes);
  CHECK(io::read_mt2(in).front() == m);
}

TEST_CASE("MT2 rejects malformed input") {
  std::istringstream bad_magic(std::string("MTX\0", 4) + std::string(12, '\0'));
  CHECK_THROWS_AS(io::read_mt2(bad_magic), ValidationError);
  std::ostringstream out;
  io::write_mt2(out, {MatrixXd::Ones(2, 2), MatrixXd::Ones(2, 2)});
  std::istringstream truncated(out.str().substr(0, out.str().size() - 3));
  CHECK_THROWS_AS(io::read_mt2(truncated), ValidationError);
  std::ostringstream mixed;
  CHECK_THROWS_AS(io::write_mt2(mixed, {MatrixXd::Ones(2, 2), MatrixXd::Ones(3, 2)}),
                  ValidationError);
}

TEST_CASE("binary dataset round trip is byte-identical") {
  TempDir tmp;
  std::mt19937_64 rng(81);
  const auto d = mpca::testing::gaussian_dataset(rng, 7, 4, 3);
  io::write_dataset(tmp / "a.bin", d);
  const auto back = io::read_dataset(tmp / "a.bin");
  CHECK(identical(d, back));
  io::write_dataset(tmp / "b.bin", back);
  CHECK(slurp(tmp / "a.bin") == slurp(tmp / "b.bin"));
  CHECK_THROWS_AS(io::read_dataset(tmp / "missing.bin"), ValidationError);
}

TEST_CASE("CSV round trip") {
  TempDir tmp;
  std::mt19937_64 rng(82);
  const auto d = mpca::testing::gaussian_dataset(rng, 5, 3, 2);
  io::write_csv(tmp / "d.csv", d);
  CHECK(identical(d, io::read_csv(tmp / "d.csv", 3, 2)));
  CHECK(identical(d, io::ingest(tmp / "d.csv", io::Format::csv, 3)));
  CHECK_THROWS_AS(io::read_csv(tmp / "d.csv", 4, 2), ValidationError);
  CHECK_THROWS_AS(io::ingest(tmp / "d.csv", io::Format::csv, 4), ValidationError);

  spit(tmp / "bad.csv", "1,2,3,4\n5,6,x,8\n");
  CHECK_THROWS_AS(io::read_csv(tmp / "bad.csv", 2, 2), ValidationError);
  spit(tmp / "ragged.csv", "1,2,3,4\n5,6,7\n");
  CHECK_THROWS_AS(io::read_csv(tmp / "ragged.csv", 2, 2), ValidationError);
}

TEST_CASE("PGM reading") {
  TempDir tmp;
  // 3 wide, 2 tall, 8-bit, with a comment in the header
  spit(tmp / "a.pgm", std::string("P5\n# comment\n3 2\n255\n") +
                          std::string("\x00\x7f\xff\x33\x66\x99", 6));
  const MatrixXd a = io::read_pgm(tmp / "a.pgm");
  REQUIRE(a.rows() == 2);
  REQUIRE(a.cols() == 3);
  CHECK(a(0, 0) == 0.0);
  CHECK(a(0, 2) == 1.0);
  CHECK(a(1, 0) == doctest::Approx(0x33 / 255.0));

  spit(tmp / "b.pgm", std::string("P5 2 1 65535\n") + std::string("\x01\x00\xff\xff", 4));
  const MatrixXd b = io::read_pgm(tmp / "b.pgm");
  CHECK(b(0, 0) == doctest::Approx(256.0 / 65535.0));
  CHECK(b(0, 1) == 1.0);

  spit(tmp / "ascii.pgm", "P2\n2 1\n255\n0 255\n");
  CHECK_THROWS_AS(io::read_pgm(tmp / "ascii.pgm"), ValidationError);
  spit(tmp / "short.pgm", std::string("P5\n2 2\n255\n") + std::string("\x01\x02", 2));
  CHECK_THROWS_AS(io::read_pgm(tmp / "short.pgm"), ValidationError);
}

TEST_CASE("PGM write/read and directory ingest") {
  TempDir tmp;
  fs::create_directories(tmp / "faces/s2");
  MatrixXd img(2, 2);
  img << 0, 1, 0.2, 2.0;  // 2.0 is clamped
  io::write_pgm(tmp / "faces/b.pgm", img);
  io::write_pgm(tmp / "faces/s2/a.PGM", MatrixXd::Zero(2, 2));
  io::write_pgm(tmp / "faces/a.pgm", MatrixXd::Ones(2, 2));
  spit(tmp / "faces/notes.txt", "ignored");

  const MatrixXd back = io::read_pgm(tmp / "faces/b.pgm");
  CHECK(back(1, 1) == 1.0);
  CHECK(std::abs(back(1, 0) - 0.2) <= 0.5 / 255);

  const auto d = io::ingest(tmp / "faces", io::guess_format(tmp / "faces"));
  REQUIRE(d.size() == 3);
  CHECK(d[0] == MatrixXd::Ones(2, 2));  // faces/a.pgm
  CHECK(d[2] == MatrixXd::Zero(2, 2));  // faces/s2/a.PGM

  io::write_pgm(tmp / "faces/c.pgm", MatrixXd::Zero(3, 2));
  CHECK_THROWS_AS(io::read_pgm_dir(tmp / "faces"), ValidationError);
  fs::create_directories(tmp / "empty");
  CHECK_THROWS_AS(io::read_pgm_dir(tmp / "empty"), ValidationError);
}

TEST_CASE("format names") {
  CHECK(io::parse_format("pgm-dir") == io::Format::pgm_dir);
  CHECK(io::parse_format("csv") == io::Format::csv);
  CHECK(io::parse_format("bin") == io::Format::bin);
  CHECK_THROWS_AS(io::parse_format("png"), ValidationError);
  CHECK(io::guess_format("x.csv") == io::Format::csv);
  CHECK(io::guess_format("x.mt2") == io::Format::bin);
}

TEST_CASE("base64") {
  CHECK(io::base64_encode("") == "");
  CHECK(io::base64_encode("f") == "Zg==");
  CHECK(io::base64_encode("fo") == "Zm8=");
  CHECK(io::base64_encode("foobar") == "Zm9vYmFy");
  CHECK(io::base64_decode("Zm9vYg==") == "foob");
  std::string all;
  for (int c = 0; c < 256; ++c) all.push_back(static_cast<char>(c));
  CHECK(io::base64_decode(io::base64_encode(all)) == all);
  CHECK_THROWS_AS(io::base64_decode("Zm9v!"), ValidationError);
}

TEST_CASE("spec JSON round trip is exact") {
  TempDir tmp;
  const auto spec = random_spec<double>(5, 4, 2, 3, 0.35, 17);
  io::save_spec(tmp / "spec.json", spec);
  const auto back = io::load_spec(tmp / "spec.json");
  CHECK(back.mu == spec.mu);
  CHECK(back.A0.matrix() == spec.A0.matrix());
  CHECK(back.B0.matrix() == spec.B0.matrix());
  CHECK(back.T == spec.T);
  CHECK(back.sigma2 == spec.sigma2);

  auto j = io::spec_to_json(spec);
  j["sigma2"] = -1.0;
  CHECK_THROWS_AS(io::spec_from_json(j), ValidationError);
  j = io::spec_to_json(spec);
  j.erase("T");
  CHECK_THROWS_AS(io::spec_from_json(j), ValidationError);
}

TEST_CASE("basis files") {
  TempDir tmp;
  std::mt19937_64 rng(83);
  const auto d = mpca::testing::structured_dataset(rng, 20, 5, 4);
  const auto test = mpca::testing::structured_dataset(rng, 6, 5, 4);

  MpcaConfig cfg;
  cfg.pdim = 2;
  cfg.qdim = 3;
  const auto fit = glram_fit(d, cfg);
  io::save_basis(tmp / "m.mbz", fit, cfg);
  const auto m = io::load_basis(tmp / "m.mbz");
  CHECK(m.kind == "mpca");
  CHECK(m.A == fit.A.matrix());
  CHECK(m.B == fit.B.matrix());
  CHECK(m.header.at("config").at("pdim") == 2);
  const auto expected = reconstruct(test, fit.A, fit.B, d.mean());
  const auto got = m.reconstruct(test);
  for (Index i = 0; i < test.size(); ++i) CHECK(got[i] == expected[i]);

  const auto star = twod2pca_fit(d, 2, 2);
  io::save_basis(tmp / "t.mbz", star);
  const auto t = io::load_basis(tmp / "t.mbz");
  CHECK(t.kind == "2d2pca");
  CHECK(t.A == star.Astar.matrix());

  const auto pca = pca_fit(d, 4);
  io::save_basis(tmp / "p.mbz", pca);
  const auto p = io::load_basis(tmp / "p.mbz");
  CHECK(p.kind == "pca");
  CHECK(p.loadings == pca.loadings.matrix());
  const auto pe = pca_reconstruct(test, pca, d.mean());
  const auto pg = p.reconstruct(test);
  for (Index i = 0; i < test.size(); ++i) CHECK((pg[i] - pe[i]).norm() <= 1e-12);

  CHECK_THROWS_AS(p.reconstruct(mpca::testing::structured_dataset(rng, 3, 4, 4)), ValidationError);
  spit(tmp / "junk.mbz", "MBZ");
  CHECK_THROWS_AS(io::load_basis(tmp / "junk.mbz"), ValidationError);
}
