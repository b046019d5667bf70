// Minimal library walkthrough: build an environment, evaluate the log
// partition function and its relatives, and print a few diagnostics.

#include <cstdio>

#include "polymerlab/polymerlab.hpp"

using namespace polymerlab;

int main() {
    const auto model = DisorderModel::make_gaussian(1.0);
    const Environment<1> env(model, /*base_seed=*/42, /*replica_index=*/0);
    const PolymerParams params{16, 0.5};

    const double logZ = log_partition<1>(env, params);
    std::printf("log Z_{16} (one draw) = %.10f\n", logZ);
    std::printf("log E[Z] = N*lambda   = %.10f\n", 16.0 * model.log_mgf(params.beta));

    const auto dist = endpoint_distribution<1>(env, params);
    double msd = 0.0;
    for (const auto& [z, p] : dist) {
        msd += p * static_cast<double>(z[0] * z[0]);
    }
    std::printf("endpoint E|x_N|^2     = %.10f (free walk: 16)\n", msd);

    const auto occ = occupation_probabilities<1>(env, params);
    std::printf("occupation total      = %.10f (exact: 16)\n", occ.total());

    const auto spec = make_density_spec(model);
    std::printf("psi(0) for N(0,1)     = %.10f (exact: 1)\n", psi(spec, 0.0));
    return 0;
}
