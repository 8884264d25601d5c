// formhom: reproducible experiment runner for the discrete-forms
// homogenization library.  One positional command plus flat flags; the same
// keys may come from a key=value config file (flags override the file).

#include <CLI11.hpp>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "formhom/dirichlet.hpp"
#include "formhom/io.hpp"
#include "formhom/parallel.hpp"
#include "formhom/rng.hpp"

using namespace formhom;
namespace fs = std::filesystem;

namespace {

struct Options {
  std::string command;
  int d = 2;
  int r = 1;
  int m = 3;
  int mMax = 4;
  int mRef = 0;  // 0: derived from the command
  std::string ensemble = "checkerboard2:1,4";
  int nsamples = 32;
  int nsamplesRef = 0;  // 0: same as nsamples
  std::uint64_t seed = 1;
  double lambda = 0.25;
  double cgTol = 1e-10;
  int threads = 0;  // 0: FORMHOM_THREADS or 1
  std::string out = "out";
  std::string f = "lp:1";         // boundary data: lp:c1,..  or lpq:c1,..
  std::string epsList = "1,2,3";  // exponents k, eps = 3^-k
  std::string mList = "2,3,4";
  int samplesPerEps = 4;
  double vFraction = 0.5;
  int probes = 20;
  int pDir = 1;
  int qDir = 2;
  int refine = 1;
  bool allowLarge = false;

  std::string canonical() const {
    std::ostringstream os;
    os << "command=" << command << "\nd=" << d << "\nr=" << r << "\nm=" << m << "\nm_max=" << mMax
       << "\nm_ref=" << mRef << "\nensemble=" << ensemble << "\nnsamples=" << nsamples
       << "\nnsamples_ref=" << nsamplesRef << "\nseed=" << seed << "\nlambda=" << lambda
       << "\ncg_tol=" << cgTol << "\nf=" << f << "\neps_list=" << epsList << "\nm_list=" << mList
       << "\nsamples_per_eps=" << samplesPerEps << "\nv_fraction=" << vFraction
       << "\nprobes=" << probes << "\np_dir=" << pDir << "\nq_dir=" << qDir
       << "\nrefine=" << refine << "\n";
    return os.str();
  }
};

std::vector<int> parseIntList(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(std::stoi(tok));
  return out;
}

PolyFormField parseBoundaryData(const std::string& text, int d, int r) {
  auto colon = text.find(':');
  std::string kind = text.substr(0, colon);
  std::vector<double> cs;
  if (colon != std::string::npos) {
    std::stringstream ss(text.substr(colon + 1));
    std::string tok;
    while (std::getline(ss, tok, ',')) cs.push_back(std::stod(tok));
  }
  AltForm p(d, r);
  for (std::size_t i = 0; i < cs.size() && i < static_cast<std::size_t>(p.comps()); ++i)
    p.coeffs(i) = cs[i];
  if (cs.size() == 1 && p.comps() >= 1) {
    // single index shorthand: lp:k means p = dx_k (1-based rank order)
    p.coeffs.setZero();
    int k = static_cast<int>(cs[0]) - 1;
    if (k < 0 || k >= p.comps()) throw CLI::ValidationError("--f: basis index out of range");
    p.coeffs(k) = 1.0;
  }
  if (kind == "lp") return lpField(p);
  if (kind == "lpq") return lpQuadraticField(p);
  throw CLI::ValidationError("--f: expected lp:... or lpq:...");
}

Json configJson(const Options& opt, std::uint64_t hash) {
  Json j;
  j["command"] = opt.command;
  j["d"] = opt.d;
  j["r"] = opt.r;
  j["m"] = opt.m;
  j["m_max"] = opt.mMax;
  j["m_ref"] = opt.mRef;
  j["ensemble"] = opt.ensemble;
  j["nsamples"] = opt.nsamples;
  j["nsamples_ref"] = opt.nsamplesRef;
  j["seed"] = opt.seed;
  j["lambda"] = opt.lambda;
  j["cg_tol"] = opt.cgTol;
  j["f"] = opt.f;
  j["eps_list"] = opt.epsList;
  j["m_list"] = opt.mList;
  j["samples_per_eps"] = opt.samplesPerEps;
  j["v_fraction"] = opt.vFraction;
  j["probes"] = opt.probes;
  j["p_dir"] = opt.pDir;
  j["q_dir"] = opt.qDir;
  j["refine"] = opt.refine;
  j["config_hash"] = hashHex(hash);
  j["version"] = kVersion;
  return j;
}

int runCommand(const Options& opt) {
  int threads = opt.threads > 0 ? opt.threads : defaultThreads();
  SolverOptions solver;
  solver.tol = opt.cgTol;
  std::uint64_t hash = fnv1a(opt.canonical());
  EnsembleSpec spec = EnsembleSpec::parse(opt.ensemble, opt.d, opt.r, opt.lambda);

  Json results;
  std::ostringstream csv;
  CsvWriter writer(csv);
  Json extra;  // additional files: name -> content
  const std::string& cmd = opt.command;

  if (cmd == "sample-env") {
    Environment env = sampleEnvironment(spec, opt.m, opt.seed).refineBy(opt.refine);
    std::ostringstream envCsv;
    dumpEnvironmentCsv(env, envCsv);
    extra["environment.csv"] = envCsv.str();
    extra["environment.json"] = environmentSidecar(spec, opt.m, opt.seed).dump(2) + "\n";
    results["cells"] = env.grid.cellCount();
  } else if (cmd == "estimate-ahom" || cmd == "dykhne") {
    AhomEstimate est = estimateAhom(spec, opt.m, opt.nsamples, opt.seed, threads, solver);
    results = toJson(est);
    for (long i = 0; i < est.matrix.rows(); ++i)
      for (long j = 0; j < est.matrix.cols(); ++j) {
        std::string name = "ahom_" + std::to_string(i) + std::to_string(j);
        writer.row(cmd, opt.m, name, est.matrix(i, j), est.stderr_(i, j));
      }
    if (cmd == "dykhne") {
      if (spec.kind != EnsembleSpec::Kind::Checkerboard2)
        throw CLI::ValidationError("dykhne requires a checkerboard2 ensemble");
      double target = std::sqrt(spec.c1 * spec.c2);
      Eigen::MatrixXd diff =
          est.matrix - target * Eigen::MatrixXd::Identity(est.matrix.rows(), est.matrix.cols());
      double dev = Eigen::JacobiSVD<Eigen::MatrixXd>(diff).singularValues()(0);
      results["dykhne_target"] = target;
      results["dykhne_deviation_opnorm"] = dev;
      writer.row(cmd, opt.m, "dykhne_deviation", dev, 0.0);
    }
  } else if (cmd == "sequences" || cmd == "rate" || cmd == "os-calibrate") {
    SequenceResult seq = computeSequences(spec, opt.mMax, opt.nsamples, opt.seed, threads, solver);
    Json ahoms = Json::array();
    for (const auto& est : seq.ahomPerLevel) ahoms.push_back(toJson(est));
    results["D"] = seq.D;
    results["D_stderr"] = seq.Dstderr;
    results["tau"] = seq.tau;
    results["tau_stderr"] = seq.tauStderr;
    results["ahom_per_level"] = ahoms;
    for (std::size_t n = 0; n < seq.D.size(); ++n)
      writer.row(cmd, double(n), "D", seq.D[n], seq.Dstderr[n]);
    for (std::size_t n = 0; n < seq.tau.size(); ++n)
      writer.row(cmd, double(n), "tau", seq.tau[n], seq.tauStderr[n]);
    if (cmd != "sequences") {
      RateFit fit = fitRate(seq.D);
      results["rate_fit"] = toJson(fit);
      writer.row(cmd, double(opt.mMax), "alpha", fit.alpha, 0.0);
      writer.row(cmd, double(opt.mMax), "r_squared", fit.rSquared, 0.0);
      if (cmd == "os-calibrate") {
        const AhomEstimate& ahom = seq.ahomPerLevel.back();
        AltForm e1 = AltForm::basis(opt.d, opt.r, 0);
        AltForm q = ahom.applyMap(e1);
        Json os = Json::array();
        for (int n = 0; n <= opt.mMax; ++n) {
          std::vector<double> js;
          for (const auto& bs : seq.grams[n]) js.push_back(jFromGrams(bs, e1, q));
          OsCalibration cal = osCalibrate(js, 1.0);
          Json row = toJson(cal);
          row["n"] = n;
          double scaled = std::isfinite(fit.alpha) ? cal.C * std::pow(3.0, n * fit.alpha) : 0.0;
          row["C_scaled"] = scaled;
          os.push_back(row);
          writer.row(cmd, double(n), "os_C", cal.C, 0.0);
          writer.row(cmd, double(n), "os_C_scaled", scaled, 0.0);
        }
        results["os"] = os;
      }
    }
  } else if (cmd == "duality") {
    DualityReport rep = verifyDuality(spec, opt.m, opt.nsamples, opt.seed, threads, solver);
    results = toJson(rep);
    writer.row(cmd, opt.m, "duality_deviation", rep.deviationOpNorm, 0.0);
    writer.row(cmd, opt.m, "exchange_residual", rep.exchangeResidualMean, rep.exchangeResidualStderr);
  } else if (cmd == "flatness") {
    int mRef = opt.mRef;
    std::vector<int> ms = parseIntList(opt.mList);
    if (mRef == 0) mRef = *std::max_element(ms.begin(), ms.end()) + 1;
    int nRef = opt.nsamplesRef > 0 ? opt.nsamplesRef : opt.nsamples;
    AhomEstimate ref = estimateAhom(spec, mRef, nRef, CounterRng::key(opt.seed, 0xA4EFULL),
                                    threads, solver);
    results["ahom_ref"] = toJson(ref);
    AltForm p = AltForm::basis(opt.d, opt.r, opt.pDir - 1);
    AltForm q = ref.applyMap(AltForm::basis(opt.d, opt.r, opt.qDir - 1));
    Json rows = Json::array();
    for (int m : ms) {
      FlatnessResult res = flatnessCheck(spec, m, p, q, ref, opt.nsamples,
                                         CounterRng::key(opt.seed, 0xF1A7ULL, m), threads, solver);
      Json row = toJson(res);
      row["m"] = m;
      rows.push_back(row);
      writer.row(cmd, m, "grad_term", res.gradTermMean, res.gradTermStderr);
      writer.row(cmd, m, "flux_term", res.fluxTermMean, res.fluxTermStderr);
    }
    results["flatness"] = rows;
  } else if (cmd == "dirichlet") {
    Environment env = sampleEnvironment(spec, opt.m, opt.seed).refineBy(opt.refine);
    PolyFormField f = parseBoundaryData(opt.f, opt.d, opt.r);
    DirichletProblem pb{env, interpolate(f, env.grid), solver};
    SolveReport rep = solveDirichlet(pb);
    results["value"] = rep.value;
    results["iterations"] = rep.iterations;
    results["residual"] = rep.relativeResidual;
    results["seed"] = opt.seed;
    results["config-hash"] = hashHex(hash);
    std::ostringstream sol;
    dumpCochainCsv(rep.maximizer, sol);
    extra["solution.csv"] = sol.str();
    writer.row(cmd, opt.m, "residual", rep.relativeResidual, 0.0);
  } else if (cmd == "two-scale") {
    int mRef = opt.mRef > 0 ? opt.mRef : 3;
    int nRef = opt.nsamplesRef > 0 ? opt.nsamplesRef : opt.nsamples;
    AhomEstimate ref = estimateAhom(spec, mRef, nRef, CounterRng::key(opt.seed, 0xA4EFULL),
                                    threads, solver);
    PolyFormField f = parseBoundaryData(opt.f, opt.d, opt.r);
    TwoScaleReport rep = twoScaleError(spec, parseIntList(opt.epsList), f, opt.seed, ref,
                                       opt.samplesPerEps, threads, solver);
    results = toJson(rep);
    results["ahom_ref"] = toJson(ref);
    std::ostringstream ts;
    ts << "eps,l2_error,hminus1_error\n";
    for (std::size_t i = 0; i < rep.epsList.size(); ++i) {
      ts << formatDouble(rep.epsList[i]) << ',' << formatDouble(rep.l2Errors[i]) << ','
         << formatDouble(rep.hminus1Errors[i]) << '\n';
      writer.row(cmd, rep.epsList[i], "l2_error", rep.l2Errors[i], 0.0);
      writer.row(cmd, rep.epsList[i], "hminus1_error", rep.hminus1Errors[i], 0.0);
    }
    extra["twoscale.csv"] = ts.str();
  } else if (cmd == "diagnostics") {
    Environment env = sampleEnvironment(spec, opt.m, opt.seed).refineBy(opt.refine);
    CaccioppoliReport rep = caccioppoliDiag(env, opt.vFraction, opt.probes, opt.seed, solver);
    results["caccioppoli"] = toJson(rep);
    writer.row(cmd, opt.m, "caccioppoli_max_ratio", rep.maxRatio, 0.0);
    writer.row(cmd, opt.m, "caccioppoli_mean_ratio", rep.meanRatio, 0.0);
    // subadditivity spot sample
    AltForm p = AltForm::basis(opt.d, opt.r, 0);
    AltForm q = AltForm::basis(opt.d, opt.d - opt.r, 0);
    double margin = subadditivityMargin(env, p, q, solver);
    results["subadditivity_margin_sample"] = margin;
    writer.row(cmd, opt.m, "subadditivity_margin", margin, 0.0);
  } else {
    throw CLI::ValidationError("unknown command '" + cmd + "'");
  }

  // emit artifacts
  fs::create_directories(opt.out);
  Json top;
  top["config"] = configJson(opt, hash);
  top["results"] = results;
  {
    std::ofstream jf(fs::path(opt.out) / "results.json");
    if (!jf) throw std::ios_base::failure("cannot open results.json");
    jf << top.dump(2) << "\n";
  }
  {
    std::ofstream cf(fs::path(opt.out) / "results.csv");
    if (!cf) throw std::ios_base::failure("cannot open results.csv");
    cf << csv.str();
  }
  for (auto& [name, content] : extra.items()) {
    std::ofstream xf(fs::path(opt.out) / name);
    if (!xf) throw std::ios_base::failure("cannot open " + name);
    xf << content.get<std::string>();
  }
  {
    // timestamps live outside the deterministic result body
    Json meta;
    auto now = std::chrono::system_clock::now().time_since_epoch();
    meta["unix_time"] = std::chrono::duration_cast<std::chrono::seconds>(now).count();
    meta["threads"] = threads;
    std::ofstream mf(fs::path(opt.out) / "results.meta.json");
    mf << meta.dump(2) << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"formhom: quantitative homogenization experiments for discrete differential forms"};
  Options opt;

  app.set_config("--config", "", "key=value config file; command-line flags override it");
  app.add_option("command", opt.command,
                 "one of: sample-env estimate-ahom sequences rate duality dykhne flatness "
                 "dirichlet two-scale diagnostics os-calibrate")
      ->required();
  app.add_option("--d", opt.d, "ambient dimension (1..4)");
  app.add_option("--r", opt.r, "form degree of the environment (1..d)");
  app.add_option("--m", opt.m, "triadic exponent: cube side 3^m");
  app.add_option("--m-max", opt.mMax, "largest level for sequences/rate");
  app.add_option("--m-ref", opt.mRef, "level of the reference ahom estimate (0 = derive)");
  app.add_option("--ensemble", opt.ensemble,
                 "constant[:c] | iid-spd | checkerboard2:c1,c2 | laminate:axis,c1,c2");
  app.add_option("--nsamples", opt.nsamples, "Monte Carlo samples");
  app.add_option("--nsamples-ref", opt.nsamplesRef, "samples for the reference estimate");
  app.add_option("--seed", opt.seed, "base seed (64-bit)");
  app.add_option("--lambda", opt.lambda, "ellipticity constant in (0,1]");
  app.add_option("--cg-tol", opt.cgTol, "CG relative residual tolerance");
  app.add_option("--threads", opt.threads, "worker threads (overrides FORMHOM_THREADS)");
  app.add_option("--out", opt.out, "output directory");
  app.add_option("--f", opt.f, "boundary data lp:<idx>|lp:c1,c2,..|lpq:..");
  app.add_option("--eps-list", opt.epsList, "two-scale exponents k (eps = 3^-k)");
  app.add_option("--m-list", opt.mList, "levels for the flatness experiment");
  app.add_option("--samples-per-eps", opt.samplesPerEps, "environments per eps");
  app.add_option("--v-fraction", opt.vFraction, "inner-cube fraction for diagnostics");
  app.add_option("--probes", opt.probes, "probe solutions for diagnostics");
  app.add_option("--p-dir", opt.pDir, "basis direction of p (1-based)");
  app.add_option("--q-dir", opt.qDir, "basis direction defining q = ahom e_j (1-based)");
  app.add_option("--refine", opt.refine,
                 "grid cells per coefficient sample and axis (sample-env/dirichlet/diagnostics)");
  app.add_flag("--allow-large", opt.allowLarge, "lift the d<=4, m<=7 guard");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (opt.d < 1 || opt.d > 4) throw CLI::ValidationError("--d must be in 1..4");
    if (opt.r < 1 || opt.r > opt.d) throw CLI::ValidationError("--r must be in 1..d");
    if (!opt.allowLarge && (opt.m > 7 || opt.mMax > 7))
      throw CLI::ValidationError("m > 7 requires --allow-large");
    if (opt.nsamples < 1) throw CLI::ValidationError("--nsamples must be positive");
    return runCommand(opt);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const CgFailure& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return 3;
  } catch (const std::ios_base::failure& e) {
    std::cerr << "io failure: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
