// Command-line front end: instance generation, certification (component-aware
// and moment-SDP modes), decomposition, and the concentration experiments.
//
// Exit codes: 0 success/YES, 3 certified NO, 4 undecided (SDP
// non-convergence), 5 extraction stall, 1 usage or I/O error.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>

#include "tensorcert/certificate.hpp"
#include "tensorcert/concentration.hpp"
#include "tensorcert/decomposition.hpp"
#include "tensorcert/instances.hpp"
#include "tensorcert/io.hpp"
#include "tensorcert/moment_sdp.hpp"

namespace {

using namespace tensorcert;

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text << std::endl;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + out_path);
  out << text << "\n";
}

std::string b64_of_rows(const Eigen::MatrixXd& rows) {
  Eigen::VectorXd flat(rows.size());
  for (Eigen::Index i = 0; i < rows.rows(); ++i)
    flat.segment(i * rows.cols(), rows.cols()) = rows.row(i).transpose();
  return base64_encode(reinterpret_cast<const unsigned char*>(flat.data()),
                       static_cast<std::size_t>(flat.size()) * 8);
}

int run_generate(int n, int m, const std::string& ensemble, std::uint64_t seed,
                 double noise, const std::string& out) {
  Instance instance = sample_instance(n, m, ensemble_from_string(ensemble), seed);
  SymmetricTensor3 tensor = instance.tensor;
  if (noise > 0.0) tensor = add_noise(tensor, NoiseSpec{noise, seed});
  write_tensor_file(out, tensor);
  return 0;
}

int run_certify_components(const SymmetricTensor3& tensor, double threshold,
                           double tol, const std::string& out) {
  CertifyOptions opt;
  opt.threshold = threshold;
  opt.tol = tol;
  const CertificateReport report = certify(tensor, opt);
  emit(report.to_json(), out);
  return report.verdict_yes ? 0 : 3;
}

int run_certify_sdp(const SymmetricTensor3& tensor, double threshold, double tol,
                    int degree, const std::string& out) {
  if (threshold <= 0.0) threshold = 1.0 + 1.0 / std::log(tensor.n());
  SdpOptions opt;
  opt.tol = tol > 0.0 ? tol : 1e-4;
  const SdpCertificate cert = certify_via_sdp(tensor, threshold, degree, opt);
  emit(cert.to_json(), out);
  switch (cert.verdict) {
    case SdpVerdict::kYes: return 0;
    case SdpVerdict::kNo: return 3;
    case SdpVerdict::kUndecided: return 4;
  }
  return 1;
}

int run_decompose(const SymmetricTensor3& tensor, int m,
                  const ExtractionConfig& config, int refine_sweeps,
                  double refine_tol, const std::string& truth_path,
                  const std::string& out, const std::string& csv_path) {
  const ExtractionResult extraction = extract_components(tensor, m, config);
  nlohmann::json j;
  j["n"] = tensor.n();
  j["m_requested"] = m;
  j["m_extracted"] = extraction.components.rows();
  j["stalled"] = extraction.stalled;
  if (extraction.stalled) j["stall_index"] = extraction.stall_index;
  j["extraction_values"] = extraction.values;
  j["extraction_restarts"] = extraction.restarts_per_slot;
  j["extraction_sweeps"] = extraction.sweeps;

  Eigen::MatrixXd components = extraction.components;
  double residual = extraction.residual_fro;
  if (!extraction.stalled) {
    const RefineResult refined = refine(tensor, components, refine_sweeps, refine_tol);
    components = refined.components;
    residual = refined.residual_fro;
    j["refine_sweeps"] = refined.sweeps;
    j["refine_diverged"] = refined.diverged;
  }
  j["residual_fro"] = residual;
  j["components_b64"] = b64_of_rows(components);

  if (!truth_path.empty() && components.rows() > 0) {
    const SymmetricTensor3 truth_tensor = read_tensor_file(truth_path);
    if (!truth_tensor.is_component_form())
      throw std::runtime_error("--truth file has no component form");
    const Eigen::MatrixXd& truth = truth_tensor.components().vectors;
    if (truth.rows() == components.rows()) {
      const Matching matching = match_components(components, truth);
      j["matching"] = matching.permutation;
      std::vector<double> distances(matching.distances.data(),
                                    matching.distances.data() + matching.distances.size());
      j["distances"] = distances;
      j["max_distance"] = matching.bottleneck;
      if (!csv_path.empty()) {
        std::ofstream csv(csv_path);
        if (!csv) throw std::runtime_error("cannot open for writing: " + csv_path);
        csv << "truth_index,found_index,distance\n";
        csv.precision(17);
        for (std::size_t i = 0; i < matching.permutation.size(); ++i)
          csv << i << ',' << matching.permutation[i] << ',' << matching.distances[i]
              << '\n';
      }
    }
  }
  emit(j.dump(2), out);
  return extraction.stalled ? 5 : 0;
}

std::vector<std::pair<int, int>> parse_grid(const std::string& text) {
  std::vector<std::pair<int, int>> grid;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    const auto x = cell.find('x');
    if (x == std::string::npos)
      throw CLI::ValidationError("--grid", "expected n1xm1,n2xm2,...");
    grid.emplace_back(std::stoi(cell.substr(0, x)), std::stoi(cell.substr(x + 1)));
  }
  if (grid.empty()) throw CLI::ValidationError("--grid", "empty grid");
  return grid;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"random 3-tensor injective-norm certification and decomposition"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "worker threads for trial farms (0 = auto)");

  // generate
  auto* gen = app.add_subcommand("generate", "sample an instance and write a tensor file");
  int gen_n = 50, gen_m = 100;
  std::string gen_ensemble = "rademacher-normalized";
  std::uint64_t gen_seed = 0;
  double gen_noise = 0.0;
  std::string gen_out;
  gen->add_option("-n", gen_n, "dimension")->required();
  gen->add_option("-m", gen_m, "component count")->required();
  gen->add_option("--ensemble", gen_ensemble,
                  "rademacher-normalized | sphere-uniform | gaussian-normalized");
  gen->add_option("--seed", gen_seed, "instance seed");
  gen->add_option("--noise", gen_noise, "target unfolding norm of injected noise");
  gen->add_option("--out", gen_out, "output tensor file")->required();

  // certify
  auto* cert = app.add_subcommand("certify", "certify an injective-norm upper bound");
  std::string cert_input, cert_mode = "components", cert_out;
  double cert_threshold = 0.0, cert_tol = 1e-6;
  int cert_degree = 4;
  cert->add_option("input", cert_input, "tensor file")->required();
  cert->add_option("--mode", cert_mode, "components | sdp");
  cert->add_option("--threshold", cert_threshold, "verdict threshold (default 1 + 1/ln n)");
  cert->add_option("--tol", cert_tol, "estimator tolerance");
  cert->add_option("--degree", cert_degree, "pseudo-expectation degree (sdp mode)");
  cert->add_option("--out", cert_out, "write the JSON report here instead of stdout");

  // decompose
  auto* dec = app.add_subcommand("decompose", "recover rank-one components");
  std::string dec_input, dec_truth, dec_out, dec_csv;
  ExtractionConfig dec_config;
  bool dec_seed_set = false;
  int dec_m = 0, dec_refine_sweeps = 500;
  double dec_refine_tol = 1e-12;
  dec->add_option("input", dec_input, "tensor file")->required();
  dec->add_option("-m", dec_m, "component count (default: from the file header)");
  dec->add_option("--truth", dec_truth, "component file for matching diagnostics");
  dec->add_option("--accept", dec_config.accept_threshold, "acceptance value threshold");
  dec->add_option("--deflation-sq", dec_config.deflation_threshold_sq,
                  "squared-overlap deflation threshold");
  dec->add_option("--restarts", dec_config.restarts_per_component,
                  "restart budget per component");
  dec->add_option("--ascent-steps", dec_config.ascent_steps, "sweeps per engine round");
  dec->add_option("--ascent-tol", dec_config.ascent_tol, "ascent movement tolerance");
  dec->add_option("--seed", dec_config.seed, "extraction seed")
      ->each([&dec_seed_set](const std::string&) { dec_seed_set = true; });
  dec->add_option("--refine-sweeps", dec_refine_sweeps, "refinement sweep budget");
  dec->add_option("--refine-tol", dec_refine_tol, "refinement movement tolerance");
  dec->add_option("--out", dec_out, "write the JSON result here instead of stdout");
  dec->add_option("--csv", dec_csv, "write per-component distances as CSV");

  // scaling
  auto* scal = app.add_subcommand("scaling", "spectral-scaling regression experiment");
  std::string scal_grid = "100x50,100x100,100x200,100x400", scal_out, scal_csv;
  int scal_trials = 10;
  std::uint64_t scal_seed = 0;
  double scal_tol = 1e-6;
  scal->add_option("--grid", scal_grid, "cells as n1xm1,n2xm2,...");
  scal->add_option("--trials", scal_trials, "trials per cell");
  scal->add_option("--seed", scal_seed, "experiment seed");
  scal->add_option("--tol", scal_tol, "spectral estimator tolerance");
  scal->add_option("--out", scal_out, "write the JSON summary here instead of stdout");
  scal->add_option("--csv", scal_csv, "write one row per (cell, trial) as CSV");

  // decouple
  auto* decp = app.add_subcommand("decouple", "coupled vs decoupled sign experiment");
  int decp_n = 50, decp_m = 100, decp_trials = 200;
  std::uint64_t decp_seed = 0;
  std::string decp_out;
  decp->add_option("-n", decp_n, "dimension")->required();
  decp->add_option("-m", decp_m, "component count")->required();
  decp->add_option("--trials", decp_trials, "sign trials");
  decp->add_option("--seed", decp_seed, "experiment seed");
  decp->add_option("--out", decp_out, "write the JSON summary here instead of stdout");

  // sdp-solve
  auto* sdp = app.add_subcommand("sdp-solve", "solve the moment problem and dump the pseudo-expectation");
  std::string sdp_input, sdp_out;
  int sdp_degree = 4;
  double sdp_tol = 1e-7;
  sdp->add_option("input", sdp_input, "tensor file")->required();
  sdp->add_option("--degree", sdp_degree, "pseudo-expectation degree");
  sdp->add_option("--tol", sdp_tol, "feasibility tolerance");
  sdp->add_option("--out", sdp_out, "write the JSON dump here instead of stdout");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) return run_generate(gen_n, gen_m, gen_ensemble, gen_seed, gen_noise, gen_out);
    if (*cert) {
      const SymmetricTensor3 tensor = read_tensor_file(cert_input);
      if (cert_mode == "components")
        return run_certify_components(tensor, cert_threshold, cert_tol, cert_out);
      if (cert_mode == "sdp")
        return run_certify_sdp(tensor, cert_threshold, cert_tol, cert_degree, cert_out);
      std::cerr << "certify: unknown --mode " << cert_mode << "\n";
      return 1;
    }
    if (*dec) {
      const SymmetricTensor3 tensor = read_tensor_file(dec_input);
      int m = dec_m;
      if (m <= 0) {
        if (!tensor.is_component_form()) {
          std::cerr << "decompose: -m is required for dense tensor files\n";
          return 1;
        }
        m = tensor.components().m;
      }
      if (!dec_seed_set && tensor.is_component_form())
        dec_config.seed = tensor.components().seed;
      return run_decompose(tensor, m, dec_config, dec_refine_sweeps, dec_refine_tol,
                           dec_truth, dec_out, dec_csv);
    }
    if (*scal) {
      const ScalingRun run = scaling_experiment(parse_grid(scal_grid), scal_trials,
                                                scal_seed, scal_tol, threads);
      if (!scal_csv.empty()) {
        std::ofstream csv(scal_csv);
        if (!csv) throw std::runtime_error("cannot open for writing: " + scal_csv);
        csv << run.to_csv();
      }
      emit(run.summary_json(), scal_out);
      return 0;
    }
    if (*decp) {
      const DecouplingSummary summary =
          decoupling_experiment(decp_n, decp_m, decp_trials, decp_seed, 1e-7, threads);
      nlohmann::json j;
      j["n"] = decp_n;
      j["m"] = decp_m;
      j["trials"] = decp_trials;
      j["ratio_median"] = summary.ratio_median;
      j["ratio_q90"] = summary.ratio_q90;
      emit(j.dump(2), decp_out);
      return 0;
    }
    if (*sdp) {
      const SymmetricTensor3 tensor = read_tensor_file(sdp_input);
      SdpOptions opt;
      opt.tol = sdp_tol;
      const MomentProblem problem = build_certification_problem(tensor, sdp_degree);
      const auto [pe, report] = solve_moment_problem(problem, tensor, opt);
      nlohmann::json j;
      j["degree"] = sdp_degree;
      j["n"] = tensor.n();
      j["opt_value"] = report.opt_value;
      j["iterations"] = report.iterations;
      j["primal_residual"] = report.primal_residual;
      j["constraint_residual"] = report.constraint_residual;
      j["status"] = report.status == SdpStatus::kConverged ? "converged" : "max_iter";
      j["moments_b64"] = base64_encode(
          reinterpret_cast<const unsigned char*>(pe.moments.data()),
          static_cast<std::size_t>(pe.moments.size()) * 8);
      j["moment_count"] = pe.moments.size();
      emit(j.dump(2), sdp_out);
      return report.status == SdpStatus::kConverged ? 0 : 4;
    }
  } catch (const TensorFileError& e) {
    std::cerr << "tensor file error in field '" << e.field() << "': " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
