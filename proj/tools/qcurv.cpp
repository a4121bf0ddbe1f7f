// qcurv command line: band geometry exports, imaginary-time correlators,
// midpoint curvature, bound sweeps, and Mori-chain reports.
//
// Exit codes: 0 success, 2 physics-domain error (gap closure, empty density,
// zero noise), 3 resource guard (ED dimension), 4 failed bound check.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "qcurv/bloch.hpp"
#include "qcurv/bounds.hpp"
#include "qcurv/geometry.hpp"
#include "qcurv/matsubara.hpp"
#include "qcurv/mori.hpp"

namespace {

using json = nlohmann::ordered_json;

struct ModelOpts {
    std::string name = "qwz";
    double m = 1.0;
    double delta = 1.0;

    qcurv::BlochModel build() const {
        if (name == "qwz") return qcurv::BlochModel::qwz(m);
        if (name == "flatchern") return qcurv::BlochModel::flat_chern(m, delta);
        if (name == "trivialflat") return qcurv::BlochModel::trivial_flat(delta);
        throw qcurv::domain_error("unknown model: " + name);
    }
};

struct TempOpts {
    double beta = 0.0;
    double temp = 0.0;

    // temp/beta duality is resolved once at parse time (beta = 1/T, natural units)
    double resolve() const {
        if (beta > 0.0) return beta;
        if (temp > 0.0) return 1.0 / temp;
        throw qcurv::domain_error("one of --beta or --temp must be positive");
    }
};

void add_model_opts(CLI::App* cmd, ModelOpts& mo) {
    cmd->add_option("--model", mo.name, "Model: qwz | flatchern | trivialflat")
        ->check(CLI::IsMember({"qwz", "flatchern", "trivialflat"}));
    cmd->add_option("--m", mo.m, "QWZ mass parameter");
    cmd->add_option("--delta", mo.delta, "Flat-band gap (flat variants)");
}

void add_temp_opts(CLI::App* cmd, TempOpts& to) {
    auto* b = cmd->add_option("--beta", to.beta, "Inverse temperature");
    auto* t = cmd->add_option("--temp", to.temp, "Temperature (beta = 1/T)");
    b->excludes(t);
    t->excludes(b);
}

// write to --out path, or stdout when none given
void deliver(const std::optional<std::string>& out, const std::string& payload) {
    if (out) {
        std::ofstream f(*out);
        if (!f) throw qcurv::domain_error("cannot open output file: " + *out);
        f << payload;
    } else {
        std::cout << payload;
    }
}

struct SweepSpec {
    double start = 0.1, stop = 10.0;
    int steps = 2000;
};

SweepSpec parse_sweep(const std::string& s) {
    SweepSpec spec;
    char c1 = 0, c2 = 0;
    std::istringstream is(s);
    if (!(is >> spec.start >> c1 >> spec.stop >> c2 >> spec.steps) || c1 != ':' || c2 != ':')
        throw CLI::ValidationError("--sweep", "expected START:STOP:STEPS");
    if (spec.steps < 2) throw CLI::ValidationError("--sweep", "need at least 2 steps");
    return spec;
}

int run_geometry(const ModelOpts& mo, int grid_n, const std::optional<std::string>& out) {
    const auto model = mo.build();
    const auto grid = qcurv::build_band_grid(model, grid_n);
    const auto chern = qcurv::chern_number(model, grid_n);
    const double s0_sum =
        qcurv::bz_sum(grid, [](const qcurv::BandPoint& p) { return p.gap * p.gap * p.gxx; });
    const double curv_sum = qcurv::bz_sum(
        grid, [](const qcurv::BandPoint& p) { return p.gap * p.gap * p.gap * p.gap * p.gxx; });

    std::ostringstream csv;
    qcurv::write_csv(grid, csv);
    deliver(out, csv.str());

    std::printf("C = %d (FHS residual %.3g)\n", chern.c, chern.residual);
    std::printf("S0_sum = %.12g\n", s0_sum);
    std::printf("curvature_sum = %.12g\n", curv_sum);
    return 0;
}

int run_correlator(const ModelOpts& mo, int grid_n, double beta, int n_tau,
                   const std::optional<std::string>& out) {
    const auto model = mo.build();
    const auto grid = qcurv::build_band_grid(model, grid_n);
    const auto density = qcurv::band_density(grid);
    const auto corr = qcurv::spectral_correlator(density, beta, n_tau);

    std::ostringstream csv;
    qcurv::write_csv(corr, csv);
    deliver(out, csv.str());
    return 0;
}

int run_curvature(const ModelOpts& mo, int grid_n, double beta,
                  const std::optional<std::string>& out) {
    const auto model = mo.build();
    const auto grid = qcurv::build_band_grid(model, grid_n);
    const auto density = qcurv::band_density(grid);

    const double rb = qcurv::rho0_band(grid, beta);
    const double rs = qcurv::rho0_spectral(density, beta);
    const double s0 = qcurv::spectral_noise(density, beta);
    const double curv = qcurv::curvature_at_midpoint(density, beta);
    const auto bc = qcurv::bound_constants(2);
    const double bound = 4.0 / (beta * beta) * bc.sup_val;

    std::printf("beta = %.12g\n", beta);
    std::printf("S0 = %.12g\n", s0);
    std::printf("curvature_midpoint = %.12g\n", curv);
    std::printf("rho0_band = %.12g\n", rb);
    std::printf("rho0_spectral = %.12g\n", rs);
    std::printf("bound = %.12g\n", bound);
    std::printf("margin = %.12g\n", bound - rb);

    if (out) {
        char buf[256];
        std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g,%.12g,%.12g,%.12g\n", beta, s0, curv, rb,
                      bound, bound - rb);
        deliver(out, std::string("beta,S0,curvature,rho0,bound,margin\n") + buf);
    }
    return 0;
}

int run_bounds(double beta, const SweepSpec& sweep, const std::optional<std::string>& out) {
    const auto rows = qcurv::saturation_sweep(beta, sweep.start, sweep.stop, sweep.steps);
    const auto bc = qcurv::bound_constants(2);

    double best = -1.0, best_delta = 0.0;
    for (const auto& r : rows)
        if (r.rho0_beta2_over4 > best) {
            best = r.rho0_beta2_over4;
            best_delta = r.delta;
        }

    std::ostringstream csv;
    qcurv::write_csv(rows, csv);
    deliver(out, csv.str());

    std::printf("x_star = %.12g (rounded 2.07)\n", bc.x_star);
    std::printf("sup_val = %.12g (rounded 1.06)\n", bc.sup_val);
    std::printf("a_const = %.12g (rounded 2)\n", bc.a_const);
    std::printf("sweep_max rho0*beta^2/4 = %.12g at delta = %.12g (expect %.12g)\n", best,
                best_delta, 2.0 * bc.x_star / beta);
    return 0;
}

int run_mori(int sites, int np, double t, double v, double beta, int levels,
             const std::optional<std::string>& out) {
    const auto sys = qcurv::build_chain(sites, t, v, np);
    const auto chain = qcurv::mori_coefficients(sys, beta, levels);
    const auto bound = qcurv::b1_bound_check(sys, beta);

    json report;
    report["L"] = sites;
    report["t"] = t;
    report["V"] = v;
    report["Np"] = np;
    report["beta"] = beta;
    report["norm0"] = chain.norm0;
    report["b_sq"] = chain.b_sq;
    if (chain.terminated_at) report["terminated_at"] = *chain.terminated_at;
    report["midpoint_ratio"] = bound.midpoint_ratio;
    report["bound_margin"] = bound.bound_margin;
    report["holds"] = bound.holds && bound.universal_holds;
    deliver(out, report.dump(2) + "\n");

    return (bound.holds && bound.universal_holds) ? 0 : 4;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"imaginary-time correlator curvature, quantum-geometric sum rules, and Mori chains"};
    app.require_subcommand(1);

    ModelOpts model;
    TempOpts temp;
    int grid_n = 64;
    int n_tau = 101;
    std::optional<std::string> out;
    std::string sweep_str = "0.1:10:2000";
    int sites = 8, np = 4, levels = 4;
    double hop_t = 1.0, int_v = 2.0;

    auto* geometry = app.add_subcommand("geometry", "Export band grid, print Chern number and BZ sums");
    add_model_opts(geometry, model);
    geometry->add_option("--grid", grid_n, "Mesh points per axis")->check(CLI::Range(16, 4096));
    geometry->add_option("--out", out, "Output CSV path (default stdout)");

    auto* correlator = app.add_subcommand("correlator", "Imaginary-time correlator CSV over [0, beta]");
    add_model_opts(correlator, model);
    add_temp_opts(correlator, temp);
    correlator->add_option("--grid", grid_n, "Mesh points per axis")->check(CLI::Range(16, 4096));
    correlator->add_option("--n-tau", n_tau, "Tau grid points (odd)")->check(CLI::Range(3, 100001));
    correlator->add_option("--out", out, "Output CSV path (default stdout)");

    auto* curvature = app.add_subcommand("curvature", "Midpoint curvature and rho0 summary");
    add_model_opts(curvature, model);
    add_temp_opts(curvature, temp);
    curvature->add_option("--grid", grid_n, "Mesh points per axis")->check(CLI::Range(16, 4096));
    curvature->add_option("--out", out, "Optional one-row CSV path");

    auto* bounds = app.add_subcommand("bounds", "Saturation sweep of the universal curvature bound");
    add_temp_opts(bounds, temp);
    bounds->add_option("--sweep", sweep_str, "Gap sweep START:STOP:STEPS");
    bounds->add_option("--out", out, "Output CSV path (default stdout)");

    auto* mori = app.add_subcommand("mori", "ED + Mori continued-fraction JSON report");
    mori->add_option("--sites", sites, "Ring length (<= 12)");
    mori->add_option("--np", np, "Particle number");
    mori->add_option("--t", hop_t, "Hopping");
    mori->add_option("--v", int_v, "Nearest-neighbour interaction");
    add_temp_opts(mori, temp);
    mori->add_option("--levels", levels, "Continued-fraction depth")->check(CLI::Range(1, 6));
    mori->add_option("--out", out, "Output JSON path (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (geometry->parsed()) return run_geometry(model, grid_n, out);
        if (correlator->parsed()) {
            if (n_tau % 2 == 0) throw qcurv::domain_error("--n-tau must be odd");
            return run_correlator(model, grid_n, temp.resolve(), n_tau, out);
        }
        if (curvature->parsed()) return run_curvature(model, grid_n, temp.resolve(), out);
        if (bounds->parsed()) return run_bounds(temp.resolve(), parse_sweep(sweep_str), out);
        if (mori->parsed())
            return run_mori(sites, np, hop_t, int_v, temp.resolve(), levels, out);
    } catch (const qcurv::dimension_too_large_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const qcurv::gap_closure_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const qcurv::empty_density_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const qcurv::zero_noise_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const qcurv::zero_current_norm_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const qcurv::not_converged_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
