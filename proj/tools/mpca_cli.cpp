#include <mpca/harness.hpp>
#include <mpca/io.hpp>

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>

using namespace mpca;
namespace fs = std::filesystem;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;
constexpr std::uint32_t kStreamSplit = 0x53504c54;

struct InputOptions {
  std::string path;
  std::string format;
  Index csv_rows = 0;

  MatrixDataset<double> load() const {
    if (!fs::exists(path)) throw ValidationError("input not found: " + path);
    const io::Format f = format.empty() ? io::guess_format(path) : io::parse_format(format);
    return io::ingest(path, f, csv_rows > 0 ? std::optional<Index>(csv_rows) : std::nullopt);
  }
};

void add_input(CLI::App* cmd, InputOptions& in, const std::string& flag, const std::string& what) {
  cmd->add_option(flag, in.path, what)->required();
  cmd->add_option("--format", in.format, "pgm-dir, csv or bin (guessed from the path if omitted)");
  cmd->add_option("--rows", in.csv_rows, "image height for CSV input");
}

void add_glram(CLI::App* cmd, MpcaConfig& cfg, std::string& init) {
  cmd->add_option("--tol", cfg.tol, "relative objective tolerance")->capture_default_str();
  cmd->add_option("--subspace-tol", cfg.subspace_tol, "frame movement tolerance")
      ->capture_default_str();
  cmd->add_option("--max-iter", cfg.max_iter, "iteration cap")->capture_default_str();
  cmd->add_option("--restarts", cfg.restarts, "number of GLRAM runs")->capture_default_str();
  cmd->add_option("--seed", cfg.seed, "seed for random restarts")->capture_default_str();
  cmd->add_option("--init", init, "eig or random")->capture_default_str();
}

InitStrategy parse_init(const std::string& name) {
  if (name == "eig") return InitStrategy::row_scatter_eigenvectors;
  if (name == "random") return InitStrategy::random_orthonormal;
  throw ValidationError("unknown init '" + name + "' (expected eig or random)");
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path);
  return out;
}

// Seeded, platform-independent shuffle: order samples by a Philox key per index.
std::pair<MatrixDataset<double>, MatrixDataset<double>> split(const MatrixDataset<double>& d,
                                                              double test_fraction,
                                                              std::uint64_t seed) {
  const Index n = d.size();
  const Index n_test = static_cast<Index>(std::llround(test_fraction * static_cast<double>(n)));
  if (n_test < 2 || n - n_test < 2)
    throw ValidationError("split leaves fewer than 2 samples on one side");
  std::vector<std::uint64_t> key(n);
  const Philox4x32::Key k{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  for (Index i = 0; i < n; ++i) {
    const auto b = Philox4x32::block({static_cast<std::uint32_t>(i), 0, kStreamSplit, 0}, k);
    key[i] = (std::uint64_t{b[0]} << 32) | b[1];
  }
  std::vector<Index> order(n);
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return key[a] < key[b]; });
  std::vector<Eigen::MatrixXd> test, train;
  for (Index i = 0; i < n; ++i) (i < n_test ? test : train).push_back(d[order[i]]);
  return {MatrixDataset<double>(std::move(train)), MatrixDataset<double>(std::move(test))};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multilinear PCA for matrix-valued data"};
  app.require_subcommand(1);

  // spec
  auto* spec_cmd = app.add_subcommand("spec", "Draw a random model specification");
  Index sp = 0, sq = 0, sp0 = 0, sq0 = 0;
  double ssigma2 = 0;
  std::uint64_t sseed = 0;
  std::string spec_out;
  spec_cmd->add_option("--p", sp)->required();
  spec_cmd->add_option("--q", sq)->required();
  spec_cmd->add_option("--p0", sp0)->required();
  spec_cmd->add_option("--q0", sq0)->required();
  spec_cmd->add_option("--sigma2", ssigma2)->required();
  spec_cmd->add_option("--seed", sseed)->capture_default_str();
  spec_cmd->add_option("--out", spec_out)->required();

  // simulate
  auto* sim_cmd = app.add_subcommand("simulate", "Sample a dataset from a model specification");
  std::string sim_spec, sim_out;
  Index sim_n = 0;
  std::uint64_t sim_seed = 0;
  sim_cmd->add_option("--spec", sim_spec)->required()->check(CLI::ExistingFile);
  sim_cmd->add_option("--n", sim_n)->required();
  sim_cmd->add_option("--seed", sim_seed)->capture_default_str();
  sim_cmd->add_option("--out", sim_out)->required();

  // fit
  auto* fit_cmd = app.add_subcommand("fit", "Fit a basis");
  InputOptions fit_in;
  MpcaConfig fit_cfg;
  std::string fit_method = "mpca", fit_init = "eig", fit_out;
  Index fit_k = 0;
  add_input(fit_cmd, fit_in, "--in", "training data");
  fit_cmd->add_option("--method", fit_method, "mpca, pca or 2d2pca")->capture_default_str();
  fit_cmd->add_option("--pdim", fit_cfg.pdim, "row dimension");
  fit_cmd->add_option("--qdim", fit_cfg.qdim, "column dimension");
  fit_cmd->add_option("--k", fit_k, "PCA component count (default pdim*qdim)");
  add_glram(fit_cmd, fit_cfg, fit_init);
  fit_cmd->add_option("--out", fit_out)->required();

  // reconstruct
  auto* rec_cmd = app.add_subcommand("reconstruct", "Project data onto a stored basis");
  InputOptions rec_in;
  std::string rec_basis, rec_out, rec_pgm;
  rec_cmd->add_option("--basis", rec_basis)->required()->check(CLI::ExistingFile);
  add_input(rec_cmd, rec_in, "--in", "data to reconstruct");
  rec_cmd->add_option("--out", rec_out)->required();
  rec_cmd->add_option("--pgm-dir", rec_pgm, "also write each reconstruction as an 8-bit PGM");

  // compare
  auto* cmp_cmd = app.add_subcommand("compare", "Reconstruction error sweep over a grid");
  InputOptions cmp_train, cmp_test;
  MpcaConfig cmp_cfg;
  std::string cmp_grid, cmp_methods = "mpca,pca,2d2pca", cmp_init = "eig", cmp_out;
  double cmp_split = 0;
  add_input(cmp_cmd, cmp_train, "--train", "training data (or the full corpus with --split)");
  cmp_cmd->add_option("--test", cmp_test.path, "test data");
  cmp_cmd->add_option("--split", cmp_split, "test fraction in (0,1), drawn from --train");
  cmp_cmd->add_option("--grid", cmp_grid, "dimension grid, e.g. 1x1,2x2,4x4")->required();
  cmp_cmd->add_option("--methods", cmp_methods)->capture_default_str();
  add_glram(cmp_cmd, cmp_cfg, cmp_init);
  cmp_cmd->add_option("--out", cmp_out)->required();

  // verify
  auto* ver_cmd = app.add_subcommand("verify", "Check subspace relations on a model's exact covariance");
  std::string ver_spec, ver_out;
  ver_cmd->add_option("--spec", ver_spec)->required()->check(CLI::ExistingFile);
  ver_cmd->add_option("--out", ver_out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    if (*spec_cmd) {
      io::save_spec(spec_out, random_spec<double>(sp, sq, sp0, sq0, ssigma2, sseed));
    } else if (*sim_cmd) {
      io::write_dataset(sim_out, sample(io::load_spec(sim_spec), sim_n, sim_seed));
    } else if (*fit_cmd) {
      const auto data = fit_in.load();
      fit_cfg.init = parse_init(fit_init);
      const Method method = parse_method(fit_method);
      if (method == Method::pca) {
        const Index k = fit_k > 0 ? fit_k : fit_cfg.pdim * fit_cfg.qdim;
        const auto basis = pca_fit(data, k);
        io::save_basis(fit_out, basis);
        std::cout << "pca k=" << k << " retained_variance=" << basis.eigenvalues.head(k).sum()
                  << '\n';
      } else if (method == Method::twod2pca) {
        const auto basis = twod2pca_fit(data, fit_cfg.pdim, fit_cfg.qdim);
        io::save_basis(fit_out, basis);
        std::cout << "2d2pca " << fit_cfg.pdim << 'x' << fit_cfg.qdim
                  << " objective=" << objective(data, basis.Astar, basis.Bstar) << '\n';
      } else {
        const auto basis = glram_fit(data, fit_cfg);
        io::save_basis(fit_out, basis, fit_cfg);
        std::cout << "mpca " << fit_cfg.pdim << 'x' << fit_cfg.qdim
                  << " objective=" << basis.objective() << " iterations=" << basis.iterations
                  << " converged=" << (basis.converged ? "yes" : "no")
                  << " best_restart=" << basis.best_restart << '\n';
      }
    } else if (*rec_cmd) {
      const auto basis = io::load_basis(rec_basis);
      const auto recon = basis.reconstruct(rec_in.load());
      io::write_dataset(rec_out, recon);
      if (!rec_pgm.empty()) {
        fs::create_directories(rec_pgm);
        for (Index i = 0; i < recon.size(); ++i) {
          char name[32];
          std::snprintf(name, sizeof name, "recon_%05ld.pgm", static_cast<long>(i));
          io::write_pgm(fs::path(rec_pgm) / name, recon[i]);
        }
      }
    } else if (*cmp_cmd) {
      cmp_cfg.init = parse_init(cmp_init);
      const bool have_test = !cmp_test.path.empty();
      const bool have_split = cmp_cmd->count("--split") > 0;
      if (have_test == have_split) throw ValidationError("give exactly one of --test and --split");
      auto train = cmp_train.load();
      MatrixDataset<double> test = train;
      if (have_split) {
        if (!(cmp_split > 0 && cmp_split < 1)) throw ValidationError("--split must be in (0,1)");
        std::tie(train, test) = split(train, cmp_split, cmp_cfg.seed);
      } else {
        cmp_test.format = cmp_train.format;
        cmp_test.csv_rows = cmp_train.csv_rows;
        test = cmp_test.load();
      }
      const auto rows =
          compare(train, test, parse_grid(cmp_grid), parse_methods(cmp_methods), cmp_cfg);
      auto out = open_out(cmp_out);
      write_report_csv(out, rows);
    } else if (*ver_cmd) {
      const auto report = verify(io::load_spec(ver_spec));
      open_out(ver_out) << report.to_json().dump(2) << '\n';
      std::size_t failed = 0, skipped = 0;
      for (const auto& c : report.checks) {
        failed += !c.passed && !c.skipped;
        skipped += c.skipped;
      }
      std::cout << report.checks.size() << " checks, " << failed << " failed, " << skipped
                << " skipped" << (report.degenerate_spectrum ? " (degenerate spectrum)" : "")
                << '\n';
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  }
  return 0;
}
