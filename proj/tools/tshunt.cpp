// tshunt: shunting-impedance studies of an occupied jointless track circuit.
//
// Every subcommand writes CSV to stdout or --out. Fit parameters and other
// summaries go to stderr. Exit codes: 0 ok, 1 configuration or usage error,
// 2 numerical failure.

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include "tshunt/analysis.hpp"
#include "tshunt/csv.hpp"
#include "tshunt/nodal_oracle.hpp"
#include "tshunt/scenario_file.hpp"

namespace {

using namespace tshunt;

constexpr int kExitConfig = 1;
constexpr int kExitNumerical = 2;

void print_fit(const char* label, const FitResult& f) {
    std::cerr << label << " (" << to_string(f.kind) << "):";
    for (double p : f.params) std::cerr << ' ' << format_number(p);
    std::cerr << "  sse=" << format_number(f.gof.sse) << " r_square=" << format_number(f.gof.r_square)
              << " rmse=" << format_number(f.gof.rmse) << '\n';
}

void write_series(CsvWriter& csv, const SweepSeries& s) {
    for (const auto& p : s.samples) {
        std::vector<std::optional<double>> row{p.x};
        if (p.valid) {
            row.push_back(p.z.real());
            row.push_back(p.z.imag());
        } else {
            row.push_back(std::nullopt);
            row.push_back(std::nullopt);
        }
        if (s.re_fit) row.push_back((*s.re_fit)(p.x));
        if (s.im_fit) row.push_back((*s.im_fit)(p.x));
        csv.row(row);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Train shunting impedance of a jointless track circuit"};
    app.require_subcommand(1);
    std::string config_path, out_path;
    app.add_option("--config", config_path, "Scenario file (JSON)")->check(CLI::ExistingFile);
    app.add_option("--out", out_path, "Write CSV here instead of stdout");

    double step = kDefaultProfileStepM;
    double radius = kDefaultExclusionRadiusM;
    std::string measured_path;
    std::size_t cap_index = 1;
    std::string fault = "break";
    double abnormal = 1.0;
    std::size_t samples = 50;
    double oracle_step = kDefaultOracleStepM;

    auto* profile = app.add_subcommand("profile", "z_f along the section");
    profile->add_option("--step", step, "Shunting-point step, m")->check(CLI::PositiveNumber);

    auto* tcr = app.add_subcommand("tcr", "Reader amplitude, full train vs first wheel set");
    tcr->add_option("--step", step, "Shunting-point step, m")->check(CLI::PositiveNumber);
    tcr->add_option("--measured", measured_path, "Measured trace: position_m, amplitude_V")->check(CLI::ExistingFile);

    struct Range {
        double from, to, by;
    };
    Range wheel_range{0.01, 1.0, 0.01}, ballast_range{1.0, 20.0, 1.0}, rail_range{0.8, 1.2, 0.01};
    auto sweep_opts = [&](CLI::App* sc, Range& r) {
        sc->add_option("--from", r.from, "First value")->capture_default_str();
        sc->add_option("--to", r.to, "Last value")->capture_default_str();
        sc->add_option("--by", r.by, "Increment")->capture_default_str()->check(CLI::PositiveNumber);
        sc->add_option("--profile-step", step, "Shunting-point step for steady values, m")->check(CLI::PositiveNumber);
        sc->add_option("--exclusion", radius, "Capacitor exclusion radius, m")->check(CLI::NonNegativeNumber);
    };
    auto* wheel = app.add_subcommand("sweep-wheel", "Steady z_f vs wheel-set resistance");
    auto* ballast = app.add_subcommand("sweep-ballast", "Steady z_f vs ballast resistance");
    auto* rail = app.add_subcommand("sweep-rail", "Steady z_f vs rail impedance scale");

    auto* cap = app.add_subcommand("cap-fault", "z_f change caused by one faulty capacitor");
    cap->add_option("--cap-index", cap_index, "Capacitor number, 1 = nearest the receiving end")->required();
    cap->add_option("--fault", fault, "break, half or none")
        ->check(CLI::IsMember({"break", "half", "none"}))
        ->capture_default_str();
    cap->add_option("--step", step, "Shunting-point step, m")->check(CLI::PositiveNumber);

    auto* imp = app.add_subcommand("importance", "Structural importance of each wheel set");
    imp->add_option("--abnormal-ohm", abnormal, "Resistance of the abnormal wheel set")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    imp->add_option("--profile-step", step, "Shunting-point step for steady values, m")->check(CLI::PositiveNumber);

    auto* validate = app.add_subcommand("validate", "Compare the chain-matrix solve with the nodal oracle");
    validate->add_option("--samples", samples, "Number of shunting points")->check(CLI::PositiveNumber);
    validate->add_option("--oracle-step", oracle_step, "Oracle discretization, m")->check(CLI::PositiveNumber);

    app.add_subcommand("default-config", "Print the default scenario file");

    sweep_opts(wheel, wheel_range);
    sweep_opts(ballast, ballast_range);
    sweep_opts(rail, rail_range);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        JtcScenario s = config_path.empty() ? default_scenario() : load_scenario(config_path, &std::cerr);

        std::unique_ptr<std::ofstream> file;
        if (!out_path.empty()) {
            file = std::make_unique<std::ofstream>(out_path, std::ios::binary);
            if (!*file) throw ConfigError("cannot open output file '" + out_path + "'");
        }
        std::ostream& out = file ? *file : std::cout;
        CsvWriter csv(out);
        const SweepOptions opt{step, radius};

        if (*profile) {
            const auto p = impedance_profile(s, step);
            csv.header({"x_f_m", "re_zf_ohm", "im_zf_ohm"});
            write_series(csv, p);
            if (p.gaps()) std::cerr << "warning: " << p.gaps() << " shunting points failed to solve\n";
        } else if (*tcr) {
            std::vector<TracePoint> trace;
            if (!measured_path.empty()) {
                std::ifstream in(measured_path);
                trace = parse_trace(in);
            }
            const auto c = tcr_comparison(s, trace, step);
            csv.header({"x_f_m", "a_zf_v", "a_rwh_v"});
            for (std::size_t i = 0; i < c.x_m.size(); ++i) csv.row({c.x_m[i], c.a_zf[i], c.a_rwh[i]});
            auto report = [](const char* label, const GoodnessOfFit& g) {
                std::cerr << label << ": sse=" << format_number(g.sse) << " r_square=" << format_number(g.r_square)
                          << " rmse=" << format_number(g.rmse) << '\n';
            };
            if (c.gof_zf) report("measured vs full-train model", *c.gof_zf);
            if (c.gof_rwh) report("measured vs first-wheel model", *c.gof_rwh);
        } else if (*wheel) {
            const auto w = sweep_wheel_resistance(s, wheel_range.from, wheel_range.to, wheel_range.by, opt);
            csv.header({"r_ws_ohm", "re_zf_ohm", "im_zf_ohm", "re_fit_ohm", "im_fit_ohm"});
            write_series(csv, w);
            print_fit("re fit 1/(a + b/r)", *w.re_fit);
            print_fit("im fit 1/(c + d/r)", *w.im_fit);
        } else if (*ballast) {
            const auto b = sweep_ballast(s, ballast_range.from, ballast_range.to, ballast_range.by, opt);
            csv.header({"r_b_ohm_km", "re_zf_ohm", "im_zf_ohm"});
            write_series(csv, b);
        } else if (*rail) {
            const auto r = sweep_rail_impedance(s, rail_range.from, rail_range.to, rail_range.by, opt);
            csv.header({"z_r_scale", "re_zf_ohm", "im_zf_ohm", "re_fit_ohm", "im_fit_ohm"});
            write_series(csv, r);
            print_fit("re fit linear", *r.re_fit);
            print_fit("im fit quadratic", *r.im_fit);
            std::cerr << "im minimum at z_r = " << format_number(r.im_vertex->x) << " z_r0, value "
                      << format_number(r.im_vertex->y) << '\n';
        } else if (*cap) {
            if (cap_index < 1 || cap_index > s.capacitors.size())
                throw ConfigError("--cap-index must be in 1.." + std::to_string(s.capacitors.size()));
            std::optional<CapacitorFault> f;
            if (fault == "break") f = CapacitorFault::LineBreakage;
            if (fault == "half") f = CapacitorFault::DegradedHalf;
            const auto d = capacitor_fault_delta(s, cap_index - 1, f, step);
            csv.header({"x_f_m", "d_re_zf_ohm", "d_im_zf_ohm"});
            write_series(csv, d);
        } else if (*imp) {
            const auto r = structural_importance(s, abnormal, opt);
            csv.header({"wheel_index", "p_re", "p_im"});
            for (std::size_t i = 0; i < r.p_re.size(); ++i) csv.row({double(i + 1), r.p_re[i], r.p_im[i]});
        } else if (*validate) {
            const ShuntingModel model(s);
            std::vector<double> xs;
            for (std::size_t i = 1; i <= samples; ++i)
                xs.push_back(s.length_m * static_cast<double>(i) / static_cast<double>(samples));
            const auto err = parallel_map<double>(xs.size(), [&](std::size_t i) {
                const cplx a = model.solve(xs[i]).z_f;
                const cplx b = nodal_oracle(s, xs[i], {oracle_step}).z_f;
                return std::abs(a - b) / std::abs(b);
            });
            csv.header({"x_f_m", "rel_err"});
            double worst = 0.0;
            for (std::size_t i = 0; i < xs.size(); ++i) {
                csv.row({xs[i], err[i]});
                worst = std::max(worst, err[i]);
            }
            std::cerr << "max relative z_f error vs nodal oracle: " << format_number(worst) << " over " << xs.size()
                      << " shunting points\n";
            if (!(worst < 1e-4)) return kExitNumerical;
        } else {
            out << scenario_to_json(s).dump(2) << '\n';
        }
        out.flush();
        if (!out) throw ConfigError("failed writing output");
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    }
    return 0;
}
