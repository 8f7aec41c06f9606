#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/SparseCore>

#include "hetres/common.hpp"

namespace hetres::topo {

enum class Profile { lognormal, gamma, normal, uniform };

Profile profile_from_string(const std::string& s);
std::string to_string(Profile p);

struct Seeds {
    std::uint64_t connectivity = 1;
    std::uint64_t input = 2;
    std::uint64_t tau = 3;
};

struct NetworkSpec {
    Index N = 250;
    double p = 0.1;
    double f_exc = 0.8;  // excitatory fraction; 4:1 E/I ratio at default
    double sigma0 = 1.0;
    double J = 1.0;
    double Ju = 1.0;
    double Jn = 0.1;
    Index K = 3;
    double tau_mean = 1.0;
    double h = 0.0;  // Var[tau] = h * tau_mean^2
    Profile profile = Profile::lognormal;
    Seeds seeds{};
    // Lower truncation for the symmetric profiles (normal, uniform), which
    // otherwise produce non-positive draws; callers set it to 2*dt.
    double tau_floor = 0.02;

    void validate() const;
};

struct Network {
    // Post-scaling weights in voltage units: W carries J/sqrt(Np), Wu
    // carries Ju/sqrt(K).
    Eigen::SparseMatrix<double, Eigen::RowMajor> W;
    MatrixXd Wu;
    VectorXd tau;
    std::vector<std::uint8_t> is_exc;
    NetworkSpec spec;
    Index tau_rejections = 0;
    std::vector<std::string> warnings;

    Index N() const { return spec.N; }
    double min_tau() const { return tau.size() ? tau.minCoeff() : 0.0; }
};

struct TauSample {
    VectorXd tau;
    Index rejections = 0;
};

// Population means solving f*mu_E + (1-f)*mu_I = 0 with mu_E fixed at 1, so
// J stays the single recurrent-strength knob.
inline double mu_exc() { return 1.0; }
inline double mu_inh(double f_exc) { return -f_exc / (1.0 - f_exc); }

// Random sparse recurrence: each ordered pair (i != j) connects with
// probability p; the weight is drawn from the presynaptic population's
// Gaussian (mean mu_x, variance sigma0^2) and scaled by J/sqrt(Np). The
// drawn sign is kept as-is ("soft" Dale's law). Fills W and is_exc.
void build_connectivity(const NetworkSpec& spec, Network& net);

// Dense feedforward weights, N(0,1) * Ju/sqrt(K). Fills Wu.
void build_input_weights(const NetworkSpec& spec, Network& net);

// Per-neuron time constants with mean tau_mean and variance h*tau_mean^2.
// h = 0 short-circuits to the constant vector. Truncated profiles resample
// below tau_floor and report the rejection count.
TauSample sample_time_constants(Index N, double tau_mean, double h,
                                Profile profile, std::uint64_t seed,
                                double tau_floor);

// Full construction: connectivity, input weights, time constants.
Network build_network(const NetworkSpec& spec);

}  // namespace hetres::topo
