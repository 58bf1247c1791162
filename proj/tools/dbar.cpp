// Command-line front end: configuration, data ingestion, solving, plot-data
// export, and the verification suite.
#include <cmath>
#include <complex>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "dbar/blaschke.hpp"
#include "dbar/cauchy.hpp"
#include "dbar/io.hpp"
#include "dbar/pipeline.hpp"
#include "dbar/sequence.hpp"
#include "dbar/verify.hpp"

namespace {

using dbar::cplx;
using dbar::io::format_double;

constexpr int kExitOk = 0;
constexpr int kExitVerifyFailure = 1;
constexpr int kExitInputError = 2;

std::string fmt_cplx(cplx z) {
  return format_double(z.real()) + (z.imag() < 0 ? " - " : " + ") +
         format_double(std::abs(z.imag())) + "i";
}

// config-file plus per-flag overrides shared by solve/verify/decompose
struct ConfigFlags {
  std::string config_path;
  CLI::Option *o_grid_nr = nullptr, *o_grid_ntheta = nullptr, *o_contour_q = nullptr,
              *o_nmax = nullptr, *o_tol = nullptr, *o_seed = nullptr, *o_dim = nullptr,
              *o_parallel = nullptr, *o_eps = nullptr, *o_nu = nullptr, *o_delta = nullptr,
              *o_sequence = nullptr, *o_region = nullptr, *o_density = nullptr,
              *o_out = nullptr;
  std::size_t grid_nr = 0, grid_ntheta = 0, contour_q = 0;
  int nmax = 0, dim = 0;
  double tol = 0.0, eps = 0.0, nu = 0.0, delta = 0.0;
  std::uint64_t seed = 0;
  bool parallel = true;
  std::string sequence_path, region_path, density_path, out_dir;

  void attach(CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON config file (emit one with `dbar init`)");
    o_grid_nr = sub->add_option("--grid-nr", grid_nr, "pullback grid, radial nodes");
    o_grid_ntheta = sub->add_option("--grid-ntheta", grid_ntheta,
                                    "pullback grid, angular nodes");
    o_contour_q = sub->add_option("--contour-q", contour_q, "contour nodes per part");
    o_nmax = sub->add_option("--nmax", nmax, "cap on retained series indices");
    o_tol = sub->add_option("--tol", tol, "generic identity tolerance");
    o_seed = sub->add_option("--seed", seed, "seed for every randomized stage");
    o_dim = sub->add_option("--dim", dim, "target dimension d of the density");
    o_parallel = sub->add_flag("--parallel,!--no-parallel", parallel,
                               "parallel evaluation stages");
    o_eps = sub->add_option("--eps", eps, "covering scale of the chain");
    o_nu = sub->add_option("--nu", nu, "refinement parameter");
    o_delta = sub->add_option("--delta", delta, "certified characteristic floor");
    o_sequence = sub->add_option("--sequence", sequence_path, "sequence file");
    o_region = sub->add_option("--region", region_path, "region file");
    o_density = sub->add_option("--density", density_path, "density file");
    o_out = sub->add_option("--out", out_dir, "output directory");
  }

  dbar::io::RunConfig resolve() const {
    dbar::io::RunConfig cfg;
    if (!config_path.empty()) cfg = dbar::io::load_config(config_path);
    if (o_grid_nr->count()) cfg.grid_nr = grid_nr;
    if (o_grid_ntheta->count()) cfg.grid_ntheta = grid_ntheta;
    if (o_contour_q->count()) cfg.contour_q = contour_q;
    if (o_nmax->count()) cfg.n_max = nmax;
    if (o_tol->count()) cfg.tol = tol;
    if (o_seed->count()) cfg.seed = seed;
    if (o_dim->count()) cfg.dim = dim;
    if (o_parallel->count()) cfg.parallel = parallel;
    if (o_eps->count()) cfg.eps = eps;
    if (o_nu->count()) cfg.nu = nu;
    if (o_delta->count()) cfg.delta = delta;
    if (o_sequence->count()) cfg.sequence_path = sequence_path;
    if (o_region->count()) cfg.region_path = region_path;
    if (o_density->count()) cfg.density_path = density_path;
    if (o_out->count()) cfg.out_dir = out_dir;
    return cfg;
  }
};

int cmd_init(const std::string& out_path) {
  dbar::io::save_config(out_path, dbar::io::RunConfig{});
  std::cout << "wrote " << out_path << "\n";
  return kExitOk;
}

int cmd_analyze_sequence(const std::string& path, double eps) {
  const dbar::FiniteSequence seq = dbar::io::load_sequence(path);
  const double delta = seq.characteristic();
  const dbar::InterpolationBound b = dbar::interpolation_constant_bound(delta);
  std::cout << "points: " << seq.size() << "\n";
  std::cout << "delta: " << format_double(delta) << "\n";
  std::cout << "delta (derivative form): "
            << format_double(dbar::characteristic_via_blaschke(seq)) << "\n";
  std::cout << "interpolation bounds: lower " << format_double(b.lower) << ", jones "
            << format_double(b.jones) << ", earl " << format_double(b.earl) << ", value "
            << format_double(b.value) << "\n";

  const dbar::FiniteSequence chain = dbar::greedy_chain(seq.points(), eps);
  double minsep = 1.0;
  for (std::size_t i = 0; i < chain.size(); ++i)
    for (std::size_t j = i + 1; j < chain.size(); ++j)
      minsep = std::min(minsep, dbar::pseudo_distance(chain[i], chain[j]));
  std::cout << "chain at eps " << format_double(eps) << ": " << chain.size()
            << " points, min separation "
            << format_double(chain.size() > 1 ? minsep : 1.0) << "\n";

  const double threshold = dbar::split_threshold(eps);
  int depth = 0;
  const std::vector<dbar::FiniteSequence> leaves =
      dbar::split_to_threshold(seq, eps, &depth);
  double leaf_min = 1.0;
  for (const auto& leaf : leaves) leaf_min = std::min(leaf_min, leaf.characteristic());
  std::cout << "split threshold: " << format_double(threshold) << ", depth " << depth
            << ", groups " << leaves.size() << ", min group delta "
            << format_double(leaf_min) << "\n";
  if (seq.size() >= 2) {
    const dbar::SplitResult sr = dbar::split_sqrt_delta(seq);
    std::cout << "sqrt-split: min part delta " << format_double(sr.min_characteristic)
              << " >= sqrt(delta) " << format_double(std::sqrt(delta)) << " ("
              << (sr.exhaustive ? "exhaustive" : "local search") << ")\n";
  }
  return kExitOk;
}

int cmd_chain(const std::string& path, double eps, const std::string& out_path) {
  const dbar::FiniteSequence seq = dbar::io::load_sequence(path);
  const dbar::FiniteSequence chain = dbar::greedy_chain(seq.points(), eps);
  std::cout << "chain at eps " << format_double(eps) << ": " << chain.size() << " of "
            << seq.size() << " points\n";
  if (!out_path.empty()) {
    std::string csv = "re,im\n";
    for (const auto& p : chain.points())
      csv += format_double(p.value().real()) + "," + format_double(p.value().imag()) + "\n";
    dbar::io::write_text_file(out_path, csv);
    std::cout << "wrote " << out_path << "\n";
  } else {
    for (const auto& p : chain.points()) std::cout << fmt_cplx(p.value()) << "\n";
  }
  return kExitOk;
}

int cmd_blaschke_eval(const std::string& path, const std::vector<double>& zv) {
  const dbar::FiniteSequence seq = dbar::io::load_sequence(path);
  const dbar::BlaschkeProduct b{seq};
  const cplx z(zv[0], zv[1]);
  if (std::abs(z) >= 1.0 - dbar::kBoundaryMargin) {
    std::cerr << "error: z must lie inside the open unit disk\n";
    return kExitInputError;
  }
  std::cout << "degree: " << b.degree() << "\n";
  std::cout << "B(z) = " << fmt_cplx(b.eval(z)) << "\n";
  std::cout << "|B(z)| = " << format_double(std::abs(b.eval(z))) << "\n";
  std::cout << "B'(z) = " << fmt_cplx(b.derivative(z)) << "\n";
  std::cout << "characteristic (derivative form): "
            << format_double(b.characteristic_via_derivative()) << "\n";
  return kExitOk;
}

int cmd_blaschke_levels(const std::string& path, double lambda, std::vector<double> values,
                        std::size_t samples, const std::string& out_path) {
  const dbar::FiniteSequence seq = dbar::io::load_sequence(path);
  const double delta = seq.characteristic();
  if (lambda <= 0.0) {
    // largest admissible root of the separation condition, with margin
    lambda = 0.8 * (1.0 - std::sqrt(std::max(0.0, 1.0 - delta * delta))) / delta;
  }
  const double r = dbar::level_radius(delta, lambda);
  if (values.empty()) values = {0.25 * r, 0.5 * r, 0.75 * r};
  const dbar::LevelComponents lev{dbar::BlaschkeProduct{seq}, lambda, r};
  const std::string csv = dbar::io::level_contour_csv(lev, values, samples);
  std::cout << "delta " << format_double(delta) << ", lambda " << format_double(lambda)
            << ", r " << format_double(r) << "\n";
  if (!out_path.empty()) {
    dbar::io::write_text_file(out_path, csv);
    std::cout << "wrote " << out_path << "\n";
  } else {
    std::cout << csv;
  }
  return kExitOk;
}

int cmd_solve(const dbar::io::RunConfig& cfg) {
  if (cfg.sequence_path.empty() || cfg.region_path.empty() || cfg.density_path.empty()) {
    std::cerr << "error: solve needs sequence_path, region_path and density_path "
                 "(config file or --sequence/--region/--density)\n";
    return kExitInputError;
  }
  const dbar::FiniteSequence zeta = dbar::io::load_sequence(cfg.sequence_path);
  const dbar::RegionSpec region = dbar::io::load_region(cfg.region_path);
  dbar::Density f = dbar::io::load_density(cfg.density_path);
  if (f.dim != cfg.dim)
    std::cout << "note: density dim " << f.dim << " overrides config dim " << cfg.dim
              << "\n";

  const dbar::AssembledOperator op =
      dbar::assemble_general(region, zeta, cfg.eps, cfg.delta, dbar::io::assembly_config(cfg));
  const dbar::AssembledOperator::Applied lf = op.apply(f);

  std::filesystem::create_directories(cfg.out_dir);
  const std::string manifest_path = cfg.out_dir + "/manifest.json";
  const std::string solution_path = cfg.out_dir + "/solution.csv";
  const std::string residual_path = cfg.out_dir + "/residual.json";
  dbar::io::save_manifest(manifest_path, op);

  // sampled solution on a fixed polar grid
  const dbar::PolarGrid sgrid{cfg.sample_nr, cfg.sample_ntheta, cfg.sample_radius};
  std::vector<cplx> points;
  points.reserve(sgrid.node_count());
  for (std::size_t i = 0; i < sgrid.nr; ++i)
    for (std::size_t k = 0; k < sgrid.ntheta; ++k) points.push_back(sgrid.node(i, k));
  const std::vector<cplx> values = lf.eval_batch(points, cfg.parallel);
  dbar::io::save_solution_csv(solution_path, points, values, lf.dim());

  // weak-residual report against one bump per region anchor (up to three)
  nlohmann::ordered_json jr;
  jr["format"] = "dbar-residual-report";
  jr["f_sup"] = lf.f_sup();
  nlohmann::ordered_json bumps = nlohmann::ordered_json::array();
  auto F = [&](cplx z, cplx* out) { lf.eval(z, out); };
  auto rhs = [&](cplx z, cplx* out) {
    if (region.contains(z)) {
      f.eval(z, out);
      for (int c = 0; c < f.dim; ++c) out[c] /= 1.0 - std::norm(z);
    } else {
      for (int c = 0; c < f.dim; ++c) out[c] = 0.0;
    }
  };
  for (std::size_t a = 0; a < std::min<std::size_t>(region.size(), 3); ++a) {
    const dbar::EuclidDisk e = dbar::euclid_image(
        dbar::PseudoDisk(region.anchors()[a], region.radii()[a]));
    const double radius =
        std::min(3.0 * e.radius, 0.9 * (1.0 - std::abs(e.center)));
    const dbar::Bump bump{e.center, radius};
    const double res = dbar::weak_residual(F, rhs, f.dim, bump, 96, 96, 2);
    bumps.push_back(nlohmann::ordered_json{
        {"center", {e.center.real(), e.center.imag()}},
        {"radius", radius},
        {"residual", res},
        {"residual_over_f_sup", lf.f_sup() > 0.0 ? res / lf.f_sup() : 0.0}});
  }
  jr["bumps"] = std::move(bumps);
  dbar::io::write_text_file(residual_path, jr.dump(2) + "\n");

  std::cout << "parts: " << op.part_count() << " (" << (op.general_path() ? "general" : "refined")
            << " path, split depth " << op.split_depth_used() << ")\n";
  std::cout << "certificate: " << format_double(op.certificate()) << " (summed "
            << format_double(op.summed_certificate()) << ")\n";
  std::cout << "f_sup: " << format_double(lf.f_sup()) << "\n";
  std::cout << "wrote " << manifest_path << "\n";
  std::cout << "wrote " << solution_path << "\n";
  std::cout << "wrote " << residual_path << "\n";
  return kExitOk;
}

int cmd_verify(dbar::io::RunConfig cfg, bool sabotage, const std::string& out_path) {
  if (sabotage) cfg.sabotage = true;
  const dbar::verify::Report rep = dbar::verify::run_all(cfg);
  for (const auto& c : rep.checks) {
    std::cout << (c.pass ? "[PASS] " : "[FAIL] ") << c.id << ": " << c.reference
              << " (measured " << format_double(c.measured) << ", bound "
              << format_double(c.bound) << ")\n";
  }
  std::cout << rep.checks.size() << " checks, " << rep.failures() << " failures\n";
  if (!out_path.empty()) {
    dbar::io::write_text_file(out_path, rep.text());
    std::cout << "wrote " << out_path << "\n";
  }
  return rep.all_pass() ? kExitOk : kExitVerifyFailure;
}

int cmd_decompose(const dbar::io::RunConfig& cfg, double nu_arg) {
  if (cfg.sequence_path.empty() || cfg.region_path.empty() || cfg.density_path.empty()) {
    std::cerr << "error: decompose needs sequence_path, region_path and density_path\n";
    return kExitInputError;
  }
  const dbar::FiniteSequence zeta = dbar::io::load_sequence(cfg.sequence_path);
  const dbar::RegionSpec region = dbar::io::load_region(cfg.region_path);
  const dbar::Density f = dbar::io::load_density(cfg.density_path);
  const double nu = nu_arg > 0.0 ? nu_arg : cfg.nu;

  const dbar::AssembledOperator base =
      dbar::assemble_general(region, zeta, cfg.eps, cfg.delta, dbar::io::assembly_config(cfg));
  const dbar::Decomposition dec = dbar::decomposition_data(base, nu);
  const dbar::Decomposition::Applied ap = dec.apply(f);
  const dbar::Neighbourhood fat = dec.fattened();

  // exterior sample ring: reconstruction against the direct evaluation
  dbar::Rng rng(cfg.seed);
  const int d = ap.dim();
  std::vector<cplx> pts, base_vals, recon_vals;
  std::vector<cplx> tmp1(static_cast<std::size_t>(d)), tmp2(static_cast<std::size_t>(d));
  double worst = 0.0;
  std::size_t guard = 0;
  while (pts.size() < 200 && ++guard < 200000) {
    const cplx z = rng.disk_point(0.97);
    if (fat.contains(z)) continue;
    ap.base().eval(z, tmp1.data());
    ap.reconstruct(z, tmp2.data());
    double diff = 0.0;
    for (int c = 0; c < d; ++c) diff += std::norm(tmp1[c] - tmp2[c]);
    worst = std::max(worst, std::sqrt(diff));
    pts.push_back(z);
    base_vals.insert(base_vals.end(), tmp1.begin(), tmp1.end());
    recon_vals.insert(recon_vals.end(), tmp2.begin(), tmp2.end());
  }

  std::filesystem::create_directories(cfg.out_dir);
  const std::string json_path = cfg.out_dir + "/decomposition.json";
  const std::string csv_path = cfg.out_dir + "/exterior_samples.csv";

  nlohmann::ordered_json j;
  j["format"] = "dbar-decomposition";
  j["nu"] = dec.nu();
  j["eps_nu"] = dec.eps_nu();
  j["h_certificate"] = dec.h_certificate();
  j["blocks"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < ap.blocks(); ++i) {
    const dbar::LaurentOperatorData hd = ap.refined().part(i).h_data();
    nlohmann::ordered_json jb;
    nlohmann::ordered_json chain = nlohmann::ordered_json::array();
    for (const auto& p : dec.refined().part(i).chain.points())
      chain.push_back({p.value().real(), p.value().imag()});
    jb["chain"] = std::move(chain);
    jb["contour_radius"] = hd.contour_radius;
    jb["n_min"] = hd.n_min;
    jb["n_max"] = hd.n_max;
    j["blocks"].push_back(std::move(jb));
  }
  j["exterior_samples"] = pts.size();
  j["max_reconstruction_gap"] = worst;
  j["f_sup"] = ap.base().f_sup();
  dbar::io::write_text_file(json_path, j.dump(2) + "\n");

  // CSV: direct evaluation next to the reconstructed value, interleaved
  std::string csv = "re,im";
  for (int c = 0; c < d; ++c) {
    const std::string n = std::to_string(c);
    csv += ",base" + n + "_re,base" + n + "_im,recon" + n + "_re,recon" + n + "_im";
  }
  csv += "\n";
  for (std::size_t i = 0; i < pts.size(); ++i) {
    csv += format_double(pts[i].real()) + "," + format_double(pts[i].imag());
    for (int c = 0; c < d; ++c) {
      const cplx bv = base_vals[i * static_cast<std::size_t>(d) + static_cast<std::size_t>(c)];
      const cplx rv = recon_vals[i * static_cast<std::size_t>(d) + static_cast<std::size_t>(c)];
      csv += "," + format_double(bv.real()) + "," + format_double(bv.imag()) + "," +
             format_double(rv.real()) + "," + format_double(rv.imag());
    }
    csv += "\n";
  }
  dbar::io::write_text_file(csv_path, csv);

  std::cout << "blocks: " << ap.blocks() << ", nu " << format_double(dec.nu())
            << ", eps_nu " << format_double(dec.eps_nu()) << "\n";
  std::cout << "h certificate: " << format_double(dec.h_certificate()) << "\n";
  std::cout << "max reconstruction gap over " << pts.size() << " exterior samples: "
            << format_double(worst) << "\n";
  std::cout << "wrote " << json_path << "\n";
  std::cout << "wrote " << csv_path << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bounded solution operator for dF/dzbar = f/(1-|z|^2) on the unit disk"};
  app.require_subcommand(1);

  // init
  auto* init = app.add_subcommand("init", "write a config file with explicit defaults");
  std::string init_out = "dbar-config.json";
  init->add_option("--out", init_out, "output path");

  // analyze-sequence
  auto* analyze = app.add_subcommand("analyze-sequence",
                                     "characteristic, interpolation bounds, chain, splits");
  std::string analyze_path;
  double analyze_eps = 0.5;
  analyze->add_option("file", analyze_path, "sequence file")->required();
  analyze->add_option("--eps", analyze_eps, "chain extraction scale");

  // chain
  auto* chain = app.add_subcommand("chain", "extract a greedy eps-chain");
  std::string chain_path, chain_out;
  double chain_eps = 0.5;
  chain->add_option("file", chain_path, "sequence file")->required();
  chain->add_option("--eps", chain_eps, "separation scale");
  chain->add_option("--out", chain_out, "CSV output path (stdout otherwise)");

  // blaschke eval/levels
  auto* blaschke = app.add_subcommand("blaschke", "Blaschke product tools");
  blaschke->require_subcommand(1);
  auto* beval = blaschke->add_subcommand("eval", "evaluate B and B' at a point");
  std::string beval_path;
  std::vector<double> beval_z;
  beval->add_option("file", beval_path, "sequence file")->required();
  beval->add_option("--z", beval_z, "point, two numbers: re im")->expected(2)->required();
  auto* blevels = blaschke->add_subcommand("levels", "CSV of (re, im, |B|) level contours");
  std::string blevels_path, blevels_out;
  double blevels_lambda = 0.0;
  std::vector<double> blevels_values;
  std::size_t blevels_samples = 128;
  blevels->add_option("file", blevels_path, "sequence file")->required();
  blevels->add_option("--lambda", blevels_lambda, "component radius parameter");
  blevels->add_option("--levels", blevels_values, "level values in (0, r)");
  blevels->add_option("--samples", blevels_samples, "samples per component boundary");
  blevels->add_option("--out", blevels_out, "CSV output path (stdout otherwise)");

  // solve
  auto* solve = app.add_subcommand("solve",
                                   "assemble the operator, write manifest/solution/residual");
  ConfigFlags solve_flags;
  solve_flags.attach(solve);

  // verify
  auto* verify = app.add_subcommand("verify", "run every module's invariant suite");
  ConfigFlags verify_flags;
  verify_flags.attach(verify);
  bool verify_sabotage = false;
  std::string verify_out;
  verify->add_flag("--sabotage", verify_sabotage,
                   "negate the quadrature kernel (mutation canary; must fail)");
  verify->add_option("--report", verify_out, "write the JSON report here");

  // decompose (alias theorem13)
  auto* decompose = app.add_subcommand(
      "decompose", "exterior decomposition: E0 plus holomorphic blocks H_i(B_i)");
  decompose->alias("theorem13");
  ConfigFlags dec_flags;
  dec_flags.attach(decompose);
  double dec_nu = 0.0;
  decompose->add_option("--decomposition-nu", dec_nu,
                        "refinement parameter of the decomposition (defaults to config nu)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInputError;
  }

  try {
    if (init->parsed()) return cmd_init(init_out);
    if (analyze->parsed()) return cmd_analyze_sequence(analyze_path, analyze_eps);
    if (chain->parsed()) return cmd_chain(chain_path, chain_eps, chain_out);
    if (blaschke->parsed()) {
      if (beval->parsed()) return cmd_blaschke_eval(beval_path, beval_z);
      if (blevels->parsed())
        return cmd_blaschke_levels(blevels_path, blevels_lambda, blevels_values,
                                   blevels_samples, blevels_out);
    }
    if (solve->parsed()) return cmd_solve(solve_flags.resolve());
    if (verify->parsed())
      return cmd_verify(verify_flags.resolve(), verify_sabotage, verify_out);
    if (decompose->parsed()) return cmd_decompose(dec_flags.resolve(), dec_nu);
  } catch (const dbar::io::ParseError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  }
  return kExitOk;
}
