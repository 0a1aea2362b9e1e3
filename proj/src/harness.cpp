#include "mpca/harness.hpp"

#include <chrono>
#include <future>
#include <ostream>
#include <sstream>

namespace mpca {

Method parse_method(const std::string& name) {
  if (name == "mpca") return Method::mpca;
  if (name == "pca") return Method::pca;
  if (name == "2d2pca") return Method::twod2pca;
  throw ValidationError("unknown method '" + name + "' (expected mpca, pca or 2d2pca)");
}

std::string method_name(Method m) {
  switch (m) {
    case Method::mpca:
      return "mpca";
    case Method::pca:
      return "pca";
    case Method::twod2pca:
      return "2d2pca";
  }
  return "unknown";
}

std::vector<Method> parse_methods(const std::string& list) {
  std::vector<Method> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_method(item));
  if (out.empty()) throw ValidationError("no methods given");
  return out;
}

std::vector<GridPoint> parse_grid(const std::string& text) {
  std::vector<GridPoint> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto x = item.find('x');
    try {
      if (x == std::string::npos) throw std::invalid_argument(item);
      std::size_t used_p = 0, used_q = 0;
      const std::string ps = item.substr(0, x), qs = item.substr(x + 1);
      GridPoint g{std::stol(ps, &used_p), std::stol(qs, &used_q)};
      if (used_p != ps.size() || used_q != qs.size() || g.pdim < 1 || g.qdim < 1)
        throw std::invalid_argument(item);
      out.push_back(g);
    } catch (const std::exception&) {
      throw ValidationError("bad grid entry '" + item + "' (expected PxQ)");
    }
  }
  if (out.empty()) throw ValidationError("empty grid");
  return out;
}

double mean_squared_error(const MatrixDataset<double>& a, const MatrixDataset<double>& b) {
  if (a.size() != b.size() || a.rows() != b.rows() || a.cols() != b.cols())
    throw ValidationError("mean_squared_error: datasets differ in shape");
  double s = 0;
  for (Index i = 0; i < a.size(); ++i) s += (a[i] - b[i]).squaredNorm();
  return s / static_cast<double>(a.size());
}

namespace {

ReportRow score(Method method, GridPoint g, const MatrixDataset<double>& train,
                const MatrixDataset<double>& test, const MpcaConfig& base) {
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  const Index p = train.rows();
  const Index q = train.cols();
  ReportRow row;
  row.method = method_name(method);
  row.pdim = g.pdim;
  row.qdim = g.qdim;
  row.components = g.pdim * g.qdim;
  const double total = total_variance(train);

  MatrixDataset<double> train_hat, test_hat;
  double retained = 0;
  switch (method) {
    case Method::mpca: {
      MpcaConfig cfg = base;
      cfg.pdim = g.pdim;
      cfg.qdim = g.qdim;
      const auto fit = glram_fit(train, cfg);
      train_hat = reconstruct(train, fit.A, fit.B, train.mean());
      test_hat = reconstruct(test, fit.A, fit.B, train.mean());
      retained = fit.objective();
      row.iterations = fit.iterations;
      row.free_parameters = free_parameter_count(MethodKind::mpca, p, q);
      break;
    }
    case Method::twod2pca: {
      const auto fit = twod2pca_fit(train, g.pdim, g.qdim);
      train_hat = reconstruct(train, fit.Astar, fit.Bstar, train.mean());
      test_hat = reconstruct(test, fit.Astar, fit.Bstar, train.mean());
      retained = objective(train, fit.Astar, fit.Bstar);
      row.free_parameters = free_parameter_count(MethodKind::mpca, p, q);
      break;
    }
    case Method::pca: {
      const auto fit = pca_fit(train, row.components);
      train_hat = pca_reconstruct(train, fit, train.mean());
      test_hat = pca_reconstruct(test, fit, train.mean());
      retained = fit.eigenvalues.sum();
      row.free_parameters = free_parameter_count(MethodKind::pca, p, q);
      break;
    }
  }
  row.train_error = mean_squared_error(train, train_hat);
  row.test_error = mean_squared_error(test, test_hat);
  row.test_rmse = std::sqrt(row.test_error / static_cast<double>(p * q));
  row.explained_variance = total > 0 ? std::clamp(retained / total, 0.0, 1.0) : 0.0;
  row.wall_time_s = std::chrono::duration<double>(Clock::now() - start).count();
  return row;
}

}  // namespace

std::vector<ReportRow> compare(const MatrixDataset<double>& train,
                               const MatrixDataset<double>& test,
                               const std::vector<GridPoint>& grid,
                               const std::vector<Method>& methods, const MpcaConfig& base) {
  if (train.rows() != test.rows() || train.cols() != test.cols())
    throw ValidationError("compare: train is " + detail::shape_str(train.rows(), train.cols()) +
                          " but test is " + detail::shape_str(test.rows(), test.cols()));
  if (methods.empty()) throw ValidationError("compare: no methods");
  for (const auto& g : grid)
    if (g.pdim < 1 || g.pdim > train.rows() || g.qdim < 1 || g.qdim > train.cols())
      throw ValidationError("compare: grid point " + detail::shape_str(g.pdim, g.qdim) +
                            " invalid for shape " + detail::shape_str(train.rows(), train.cols()));

  std::vector<std::future<std::vector<ReportRow>>> jobs;
  jobs.reserve(grid.size());
  for (const auto& g : grid)
    jobs.push_back(std::async(std::launch::async, [&, g] {
      std::vector<ReportRow> rows;
      for (Method m : methods) rows.push_back(score(m, g, train, test, base));
      return rows;
    }));
  std::vector<ReportRow> out;
  for (auto& j : jobs)
    for (auto& r : j.get()) out.push_back(std::move(r));
  return out;
}

void write_report_csv(std::ostream& out, const std::vector<ReportRow>& rows) {
  out << "method,pdim,qdim,components,free_parameters,train_error,test_error,test_rmse,"
         "explained_variance,iterations,wall_time_s\n";
  const auto old = out.precision(12);
  for (const auto& r : rows)
    out << r.method << ',' << r.pdim << ',' << r.qdim << ',' << r.components << ','
        << r.free_parameters << ',' << r.train_error << ',' << r.test_error << ',' << r.test_rmse
        << ',' << r.explained_variance << ',' << r.iterations << ',' << r.wall_time_s << '\n';
  out.precision(old);
}

bool VerifyReport::all_passed() const {
  for (const auto& c : checks)
    if (!c.skipped && !c.passed) return false;
  return true;
}

nlohmann::json VerifyReport::to_json() const {
  nlohmann::json cs = nlohmann::json::array();
  for (const auto& c : checks)
    cs.push_back({{"name", c.name},
                  {"pdim", c.pdim},
                  {"qdim", c.qdim},
                  {"residual", c.residual},
                  {"tolerance", c.tolerance},
                  {"passed", c.passed},
                  {"skipped", c.skipped},
                  {"note", c.note}});
  return {{"p", p},   {"q", q},   {"p0", p0}, {"q0", q0}, {"sigma2", sigma2},
          {"degenerate_spectrum", degenerate_spectrum}, {"all_passed", all_passed()},
          {"checks", cs}};
}

namespace {

bool simple_leading_roots(const Vector<double>& values, Index leading, double gap) {
  for (Index i = 0; i < leading && i + 1 < values.size(); ++i)
    if (values(i) - values(i + 1) < gap) return false;
  return true;
}

double column_distance(const Matrix<double>& a, const Matrix<double>& b, Index count) {
  double worst = 0;
  for (Index i = 0; i < count; ++i)
    worst = std::max(worst, projection_distance(OrthonormalFrame<double>(a.col(i)),
                                                OrthonormalFrame<double>(b.col(i))));
  return worst;
}

}  // namespace

VerifyReport verify(const ModelSpec<double>& spec, const VerifyOptions& opt) {
  spec.validate();
  VerifyReport rep;
  rep.p = spec.p();
  rep.q = spec.q();
  rep.p0 = spec.p0();
  rep.q0 = spec.q0();
  rep.sigma2 = spec.sigma2;

  const auto sigma = population_covariance(spec);
  const auto full2d = population_twod2pca(sigma, rep.p, rep.q);
  rep.degenerate_spectrum = !simple_leading_roots(full2d.lambdaStar, rep.p0, opt.simple_root_gap) ||
                            !simple_leading_roots(full2d.xiStar, rep.q0, opt.simple_root_gap);

  auto add = [&](std::string name, Index pd, Index qd, double residual, double tol) {
    rep.checks.push_back({std::move(name), pd, qd, residual, tol, residual <= tol, false, ""});
  };
  auto skip = [&](std::string name, Index pd, Index qd, std::string why) {
    rep.checks.push_back({std::move(name), pd, qd, 0.0, 0.0, false, true, std::move(why)});
  };

  for (Index pd = rep.p0 - 1; pd <= rep.p0 + 1; ++pd) {
    if (pd < 1 || pd > rep.p) continue;
    for (Index qd = rep.q0 - 1; qd <= rep.q0 + 1; ++qd) {
      if (qd < 1 || qd > rep.q) continue;
      MpcaConfig cfg = opt.glram;
      cfg.pdim = pd;
      cfg.qdim = qd;
      const auto fit = population_mpca(sigma, cfg);
      const bool a_over = pd >= rep.p0;
      const bool b_over = qd >= rep.q0;
      const char regime = a_over ? (b_over ? 'a' : 'c') : (b_over ? 'b' : 'd');
      const std::string tag = std::string("nesting(") + regime + ") ";
      if (a_over)
        add(tag + "span(A0) in span(A)", pd, qd, containment_residual(spec.A0, fit.A),
            opt.containment_tol);
      else
        add(tag + "span(A) in span(A0)", pd, qd, containment_residual(fit.A, spec.A0),
            opt.containment_tol);
      if (b_over)
        add(tag + "span(B0) in span(B)", pd, qd, containment_residual(spec.B0, fit.B),
            opt.containment_tol);
      else
        add(tag + "span(B) in span(B0)", pd, qd, containment_residual(fit.B, spec.B0),
            opt.containment_tol);

      if (b_over) {
        if (rep.degenerate_spectrum) {
          skip("row shift lambda* - lambda", pd, qd, "degenerate leading spectrum");
        } else {
          const double expected = static_cast<double>(rep.q - qd) * spec.sigma2;
          const double shift =
              ((full2d.lambdaStar.head(pd) - fit.lambda).array() - expected).abs().maxCoeff();
          add("row shift lambda* - lambda", pd, qd, shift, opt.shift_tol);
          add("shared leading row eigenvectors", pd, qd,
              column_distance(fit.A.matrix(), full2d.Astar.matrix(), std::min(rep.p0, pd)),
              opt.vector_tol);
        }
      }
      if (a_over) {
        if (rep.degenerate_spectrum) {
          skip("column shift xi* - xi", pd, qd, "degenerate leading spectrum");
        } else {
          const double expected = static_cast<double>(rep.p - pd) * spec.sigma2;
          const double shift =
              ((full2d.xiStar.head(qd) - fit.xi).array() - expected).abs().maxCoeff();
          add("column shift xi* - xi", pd, qd, shift, opt.shift_tol);
          add("shared leading column eigenvectors", pd, qd,
              column_distance(fit.B.matrix(), full2d.Bstar.matrix(), std::min(rep.q0, qd)),
              opt.vector_tol);
        }
      }
    }
  }
  return rep;
}

}  // namespace mpca
