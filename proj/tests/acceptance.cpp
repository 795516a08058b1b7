#include "bwn/lab.hpp"

#include <chrono>
#include <cstdio>
#include <iostream>

namespace {

constexpr double kTotalSeconds = 30 * 60;

const char* title(int criterion) {
    switch (criterion) {
        case 1: return "Ito isometry: MC variance within 3 SE of quadrature (P71, P72, P717; 1e4 paths; >= 20 probes)";
        case 2: return "Thresholds: J verdicts at endpoints -/+ 0.25 agree with predictions (>= 8, none disagree)";
        case 3: return "Kernels: image/sine 1e-10, Chapman-Kolmogorov 1e-6, eigen decay 1e-6, resolvent 1e-8";
        case 4: return "Estimates: Etr 200x200, Axx slope -0.25 +- 0.03, boundary mass C1 +-10%, A1+A2 <= 2 sqrt(pi)";
        case 5: return "Operators: Schur k1..k8, gradient -0.5 +- 0.05, stability pi^2 +- 1%, cross-space, splice";
        case 6: return "Dirichlet: interpolant 1e-6, e^{-x} 1e-6, O(h^2) residual, cross-series 1e-8, majorant";
        case 7: return "Simulation: flow law, f=0 exact, fourth moment 3, invariant variance within 2%";
    }
    return "";
}

}  // namespace

int main() {
    auto t0 = std::chrono::steady_clock::now();
    std::vector<std::pair<int, bool>> verdicts;
    for (const auto& name : bwn::suite_names()) {
        int k = bwn::suite_criterion(name);
        std::cout << "criterion " << k << " (" << name << ")" << std::endl;
        auto lines = bwn::run_suite(name, &std::cout);
        bool pass = !lines.empty();
        for (const auto& l : lines) pass = pass && l.pass;
        verdicts.push_back({k, pass});
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    std::cout << "\n";
    bool all = true;
    for (auto [k, pass] : verdicts) {
        std::printf("%s  criterion %d  %s\n", pass ? "PASS" : "FAIL", k, title(k));
        all = all && pass;
    }
    std::printf("total %.1f s (limit %.0f s)\n", secs, kTotalSeconds);
    all = all && secs < kTotalSeconds;
    return all ? 0 : 1;
}
