#include "cavreg/instance.hpp"

#include <json.hpp>

#include <cmath>
#include <stdexcept>

#include "cavreg/rng.hpp"

namespace cavreg {

namespace {
constexpr int kMaxSide = 100000;  // sanity cap on N, M
}

int ProblemInstance::nonzero_count(double tol) const {
  int k = 0;
  for (int a = 0; a < N; ++a) {
    if (std::abs(x0(a)) > tol) ++k;
  }
  return k;
}

ProblemInstance draw_instance(int N, int M, const SignalPrior& prior,
                              double noise_var, std::uint64_t seed) {
  if (N <= 0 || M <= 0 || N > kMaxSide || M > kMaxSide) {
    throw std::domain_error("draw_instance: N, M out of range");
  }
  if (noise_var < 0.0) throw std::domain_error("draw_instance: noise_var < 0");
  prior.validate();

  ProblemInstance inst;
  inst.N = N;
  inst.M = M;
  inst.seed = seed;
  inst.prior = prior;
  inst.noise_var = noise_var;

  const double h_std = 1.0 / std::sqrt(static_cast<double>(M));
  Rng rng_h(derive_seed(seed, 1));
  inst.H.resize(M, N);
  for (int i = 0; i < M; ++i) {
    for (int a = 0; a < N; ++a) inst.H(i, a) = h_std * rng_h.gauss();
  }

  Rng rng_x(derive_seed(seed, 2));
  const double x_std = std::sqrt(prior.var0);
  inst.x0.resize(N);
  for (int a = 0; a < N; ++a) {
    const bool on = rng_x.uniform01() < prior.rho;
    inst.x0(a) = on ? x_std * rng_x.gauss() : 0.0;
  }

  inst.y = inst.H * inst.x0;
  if (noise_var > 0.0) {
    Rng rng_z(derive_seed(seed, 3));
    const double z_std = std::sqrt(noise_var);
    for (int i = 0; i < M; ++i) inst.y(i) += z_std * rng_z.gauss();
  }
  return inst;
}

std::string instance_to_json(const ProblemInstance& inst) {
  nlohmann::json j;
  j["N"] = inst.N;
  j["M"] = inst.M;
  j["seed"] = inst.seed;
  j["prior"] = {{"rho", inst.prior.rho}, {"var0", inst.prior.var0}};
  j["noise_var"] = inst.noise_var;
  std::vector<double> h_flat(static_cast<std::size_t>(inst.M) * inst.N);
  for (int i = 0; i < inst.M; ++i) {
    for (int a = 0; a < inst.N; ++a) {
      h_flat[static_cast<std::size_t>(i) * inst.N + a] = inst.H(i, a);
    }
  }
  j["H"] = h_flat;
  j["x0"] = std::vector<double>(inst.x0.data(), inst.x0.data() + inst.N);
  j["y"] = std::vector<double>(inst.y.data(), inst.y.data() + inst.M);
  return j.dump();
}

ProblemInstance instance_from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  ProblemInstance inst;
  inst.N = j.at("N").get<int>();
  inst.M = j.at("M").get<int>();
  inst.seed = j.at("seed").get<std::uint64_t>();
  inst.prior.rho = j.at("prior").at("rho").get<double>();
  inst.prior.var0 = j.at("prior").at("var0").get<double>();
  inst.noise_var = j.at("noise_var").get<double>();
  const auto h_flat = j.at("H").get<std::vector<double>>();
  if (h_flat.size() != static_cast<std::size_t>(inst.M) * inst.N) {
    throw std::runtime_error("instance_from_json: H size mismatch");
  }
  inst.H.resize(inst.M, inst.N);
  for (int i = 0; i < inst.M; ++i) {
    for (int a = 0; a < inst.N; ++a) {
      inst.H(i, a) = h_flat[static_cast<std::size_t>(i) * inst.N + a];
    }
  }
  const auto x0 = j.at("x0").get<std::vector<double>>();
  const auto y = j.at("y").get<std::vector<double>>();
  if (x0.size() != static_cast<std::size_t>(inst.N) ||
      y.size() != static_cast<std::size_t>(inst.M)) {
    throw std::runtime_error("instance_from_json: vector size mismatch");
  }
  inst.x0 = Eigen::Map<const Eigen::VectorXd>(x0.data(), inst.N);
  inst.y = Eigen::Map<const Eigen::VectorXd>(y.data(), inst.M);
  return inst;
}

}  // namespace cavreg
