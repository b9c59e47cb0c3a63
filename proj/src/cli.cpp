#include "photocount/cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "photocount/ensembles.hpp"
#include "photocount/montecarlo.hpp"
#include "photocount/pmf.hpp"

namespace photocount::cli {

namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

// Substream reserved for realizing an ensemble; Monte Carlo trial blocks
// count up from 0.
constexpr std::uint64_t kRealizationStream = ~std::uint64_t{0};

[[noreturn]] void config_error(const std::string& where, const std::string& what) {
    throw Error(ErrorCode::Config, where + ": " + what);
}

void require_object(const json& j, const std::string& where, std::initializer_list<std::string_view> allowed) {
    if (!j.is_object()) config_error(where, "expected an object");
    for (const auto& [key, value] : j.items()) {
        bool known = false;
        for (auto a : allowed) known = known || key == a;
        if (!known) config_error(where, "unknown field '" + key + "'");
    }
}

const json& field(const json& j, const std::string& where, const char* key) {
    if (!j.contains(key)) config_error(where, std::string("missing field '") + key + "'");
    return j.at(key);
}

double as_real(const json& j, const std::string& where) {
    if (!j.is_number()) config_error(where, "expected a number");
    return j.get<double>();
}

std::int64_t as_int(const json& j, const std::string& where) {
    if (!j.is_number_integer()) config_error(where, "expected an integer");
    return j.get<std::int64_t>();
}

std::vector<double> as_real_list(const json& j, const std::string& where) {
    if (!j.is_array()) config_error(where, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(as_real(j[i], where + "[" + std::to_string(i) + "]"));
    return out;
}

std::vector<std::vector<double>> as_rows(const json& j, const std::string& where) {
    if (!j.is_array()) config_error(where, "expected an array of rows");
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < j.size(); ++i) rows.push_back(as_real_list(j[i], where + "[" + std::to_string(i) + "]"));
    for (const auto& r : rows)
        if (r.size() != rows.front().size()) config_error(where, "ragged rows");
    return rows;
}

ComplexMatrix parse_matrix(const json& j, const std::string& where) {
    require_object(j, where, {"re", "im"});
    const auto re = as_rows(field(j, where, "re"), where + ".re");
    const auto im = as_rows(field(j, where, "im"), where + ".im");
    if (re.empty() || re.front().empty()) config_error(where, "empty matrix");
    if (re.size() != im.size() || re.front().size() != im.front().size()) {
        config_error(where, "re and im have different shapes");
    }
    ComplexMatrix m(re.size(), re.front().size());
    for (std::size_t r = 0; r < re.size(); ++r)
        for (std::size_t c = 0; c < re[r].size(); ++c) m(r, c) = Complex(re[r][c], im[r][c]);
    return m;
}

ojson dump_matrix(const ComplexMatrix& m) {
    ojson re = ojson::array(), im = ojson::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        ojson rr = ojson::array(), ii = ojson::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            rr.push_back(m(r, c).real());
            ii.push_back(m(r, c).imag());
        }
        re.push_back(rr);
        im.push_back(ii);
    }
    return {{"re", re}, {"im", im}};
}

ModeCovariance parse_mu(const json& j) {
    require_object(j, "mu", {"scalar", "matrix"});
    if (j.size() != 1) config_error("mu", "give exactly one of 'scalar' or 'matrix'");
    if (j.contains("scalar")) {
        const json& s = j.at("scalar");
        require_object(s, "mu.scalar", {"f", "n"});
        const double f = as_real(field(s, "mu.scalar", "f"), "mu.scalar.f");
        const auto n = as_int(field(s, "mu.scalar", "n"), "mu.scalar.n");
        if (n < 1) config_error("mu.scalar.n", "mode count must be >= 1");
        return ModeCovariance::scalar(f, static_cast<int>(n));
    }
    return ModeCovariance::matrix(parse_matrix(j.at("matrix"), "mu.matrix"));
}

TransmissionSpec parse_t(const json& j) {
    require_object(j, "t", {"matrix", "eigenvalues", "ensemble"});
    if (j.size() != 1) config_error("t", "give exactly one of 'matrix', 'eigenvalues' or 'ensemble'");
    if (j.contains("matrix")) return TransmissionSpec::matrix(parse_matrix(j.at("matrix"), "t.matrix"));
    if (j.contains("eigenvalues")) return TransmissionSpec::eigenvalues(as_real_list(j.at("eigenvalues"), "t.eigenvalues"));
    const json& e = j.at("ensemble");
    require_object(e, "t.ensemble", {"name", "n", "gamma"});
    const json& name = field(e, "t.ensemble", "name");
    if (!name.is_string()) config_error("t.ensemble.name", "expected a string");
    EigenvalueDensity d;
    d.name = ensemble_from_string(name.get<std::string>());
    d.modes = static_cast<int>(as_int(field(e, "t.ensemble", "n"), "t.ensemble.n"));
    d.gamma = as_real(field(e, "t.ensemble", "gamma"), "t.ensemble.gamma");
    return TransmissionSpec::ensemble(d);
}

void parse_window(const json& j, Scenario& s) {
    require_object(j, "window", {"nu", "profile", "lorentzian"});
    s.window.nu = as_real(field(j, "window", "nu"), "window.nu");
    if (j.contains("profile") && j.contains("lorentzian")) {
        config_error("window", "'profile' and 'lorentzian' are mutually exclusive");
    }
    if (j.contains("profile")) {
        const auto rows = as_rows(j.at("profile"), "window.profile");
        if (rows.empty()) config_error("window.profile", "empty profile");
        for (const auto& r : rows) {
            if (r.size() != 2) config_error("window.profile", "each bin is [nu_j, f_j]");
            s.window.profile.push_back({r[0], r[1]});
        }
    }
    if (j.contains("lorentzian")) {
        const json& l = j.at("lorentzian");
        require_object(l, "window.lorentzian", {"f_max", "points", "span"});
        LorentzianSpec spec;
        spec.f_max = as_real(field(l, "window.lorentzian", "f_max"), "window.lorentzian.f_max");
        if (l.contains("points")) spec.points = static_cast<int>(as_int(l.at("points"), "window.lorentzian.points"));
        if (l.contains("span")) spec.span = as_real(l.at("span"), "window.lorentzian.span");
        s.lorentzian = spec;
    }
}

TaskParams parse_params(const json& j, Task task) {
    TaskParams p;
    switch (task) {
        case Task::FanoSweep: require_object(j, "params", {"f", "gamma", "seed"}); break;
        case Task::Pmf: require_object(j, "params", {"methods", "n_max", "seed"}); break;
        case Task::GfTrace: require_object(j, "params", {"xi", "seed"}); break;
        case Task::Mc: require_object(j, "params", {"trials", "cells", "threads", "seed", "reference"}); break;
        case Task::Tail: require_object(j, "params", {"n_max", "seed"}); break;
    }
    if (j.contains("f")) p.f = as_real_list(j.at("f"), "params.f");
    if (j.contains("gamma")) p.gamma = as_real(j.at("gamma"), "params.gamma");
    if (j.contains("methods")) {
        const json& m = j.at("methods");
        if (!m.is_array()) config_error("params.methods", "expected an array of strings");
        std::vector<std::string> names;
        for (const auto& x : m) {
            if (!x.is_string()) config_error("params.methods", "expected an array of strings");
            names.push_back(x.get<std::string>());
        }
        p.methods = names;
    }
    if (j.contains("n_max")) p.n_max = static_cast<int>(as_int(j.at("n_max"), "params.n_max"));
    if (j.contains("xi")) p.xi = as_real_list(j.at("xi"), "params.xi");
    if (j.contains("trials")) p.trials = as_int(j.at("trials"), "params.trials");
    if (j.contains("cells")) p.cells = static_cast<int>(as_int(j.at("cells"), "params.cells"));
    if (j.contains("threads")) p.threads = static_cast<int>(as_int(j.at("threads"), "params.threads"));
    if (j.contains("seed")) {
        if (!j.at("seed").is_number_unsigned()) config_error("params.seed", "expected a non-negative integer");
        p.seed = j.at("seed").get<std::uint64_t>();
    }
    if (j.contains("reference")) {
        if (!j.at("reference").is_boolean()) config_error("params.reference", "expected true or false");
        p.reference = j.at("reference").get<bool>();
    }
    return p;
}

// ---------------------------------------------------------------------------

std::string csv(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
    std::string out;
    for (std::size_t i = 0; i < header.size(); ++i) out += (i ? "," : "") + header[i];
    out += '\n';
    for (const auto& r : rows) {
        for (std::size_t i = 0; i < r.size(); ++i) out += (i ? "," : "") + r[i];
        out += '\n';
    }
    return out;
}

ojson cumulants_json(const CumulantSummary& c) {
    return {{"mean", c.mean}, {"variance", c.variance}, {"fano", c.fano}, {"c3", c.c3}};
}

ojson header(const Scenario& s) {
    ojson j;
    j["spec_version"] = kSpecVersion;
    j["task"] = std::string(to_string(s.task));
    return j;
}

std::string finish_summary(ojson j, const std::vector<RegimeWarning>& warnings) {
    ojson w = ojson::array();
    for (const auto& x : warnings) w.push_back({{"code", x.code}, {"message", x.message}});
    j["warnings"] = w;
    return j.dump(2) + "\n";
}

std::vector<double> transmissions(const TransmissionSpec& t) {
    if (t.is_eigenvalues()) return t.as_eigenvalues();
    const ComplexMatrix& m = t.as_matrix();
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(m.adjoint() * m, Eigen::EigenvaluesOnly);
    std::vector<double> out;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) out.push_back(std::clamp(es.eigenvalues()(i), 0.0, 1.0));
    return out;
}

void append(std::vector<RegimeWarning>& to, const std::vector<RegimeWarning>& from) {
    to.insert(to.end(), from.begin(), from.end());
}

// A finite scatterer: explicit t, or one realization of an ensemble.
TransmissionSpec resolve_scatterer(const Scenario& s, Rng& rng, std::vector<RegimeWarning>& warnings) {
    if (!s.t.is_ensemble()) return s.t;
    const auto& d = s.t.as_ensemble();
    append(warnings, sampling_warnings(d));
    if (!s.mu.is_scalar()) {
        const auto mu_eigs = reduce_to_spectrum(s.mu, TransmissionSpec::matrix(ComplexMatrix::Identity(d.modes, d.modes)));
        int nonzero = 0;
        for (double l : mu_eigs.lambda) nonzero += l > kSpectralTol * mu_eigs.max();
        append(warnings, universality_warnings(d.gamma, d.modes, nonzero));
    }
    return realize_ensemble(d, !s.mu.is_scalar(), rng);
}

// ---------------------------------------------------------------------------

TaskOutput task_fano_sweep(const Scenario& s) {
    if (!s.params.f || s.params.f->empty()) config_error("params.f", "occupation grid must be nonempty");
    const bool ens = s.t.is_ensemble();
    const int modes = ens ? s.t.as_ensemble().modes : 1;
    const double gamma_geom = ens ? s.t.as_ensemble().gamma : 1.0;
    const double gamma_single = s.params.gamma.value_or(ens ? gamma_geom : 0.01);
    if (!(gamma_single > 0.0 && gamma_single <= 1.0)) config_error("params.gamma", "must lie in (0, 1]");

    std::vector<std::vector<std::string>> rows;
    for (double f : *s.params.f) {
        if (!(f >= 0.0) || !std::isfinite(f)) config_error("params.f", "occupations must be finite and >= 0");
        auto fano = [&](EnsembleName name, double gamma) {
            return GeneratingFunction::from_density({name, modes, gamma}, f, s.window.nu).cumulants().fano;
        };
        rows.push_back({format_real(f), format_real(fano(EnsembleName::SingleBarrier, gamma_single)),
                        format_real(fano(EnsembleName::DoubleBarrier, gamma_geom)),
                        format_real(fano(EnsembleName::Diffusive, gamma_geom))});
    }
    TaskOutput out;
    out.files["fano_sweep.csv"] = csv({"f", "fano_single", "fano_double", "fano_diffusive"}, rows);
    ojson j = header(s);
    j["gamma_single"] = gamma_single;
    j["points"] = rows.size();
    out.files["summary.json"] = finish_summary(j, out.warnings);
    return out;
}

TaskOutput task_pmf(const Scenario& s, Rng& rng) {
    TaskOutput out;
    const std::vector<std::string> all{"exact", "saddle", "k_closed", "poisson", "gaussian"};
    const auto methods = s.params.methods.value_or(all);
    if (methods.empty()) config_error("params.methods", "method list must be nonempty");
    std::set<std::string> seen;
    for (const auto& m : methods) {
        if (std::find(all.begin(), all.end(), m) == all.end()) config_error("params.methods", "unknown method '" + m + "'");
        if (!seen.insert(m).second) config_error("params.methods", "duplicate method '" + m + "'");
    }
    if (s.params.n_max && *s.params.n_max < 0) config_error("params.n_max", "must be >= 0");

    const auto g = build_generating_function(s, rng, out.warnings);
    const auto c = g.cumulants();

    std::optional<CountDistribution> exact;
    if (seen.count("exact")) exact = invert_fourier(g, s.params.n_max.value_or(0));
    const int n_max = exact ? exact->n_max() : s.params.n_max.value_or(auto_n_max(g));

    std::map<std::string, CountDistribution> dists;
    for (const auto& m : methods) {
        if (m == "exact") {
            dists[m] = *exact;
        } else if (m == "saddle") {
            dists[m] = saddle_point_pmf(g, n_max);
        } else if (m == "poisson") {
            dists[m] = poisson_pmf(c.mean, n_max);
        } else if (m == "gaussian") {
            dists[m] = gaussian_pmf(c.mean, c.variance, n_max);
        } else {
            if (!s.mu.is_scalar() || !effective_window(s).profile.empty() || s.statistics != Statistics::Bose) {
                config_error("params.methods", "k_closed needs a narrow-band scalar occupation with Bose statistics");
            }
            const double f = s.mu.occupation();
            append(out.warnings, k_distribution_warnings(f, c.mean));
            if (!s.t.is_ensemble() || s.t.as_ensemble().name != EnsembleName::DoubleBarrier) {
                out.warnings.push_back({"k_closed_geometry", "the K-distribution describes the double-barrier continuum"});
            }
            dists[m] = k_distribution_pmf(f, c.mean, n_max);
        }
    }

    const auto& first = dists.at(methods.front());
    std::vector<std::vector<std::string>> rows, overlay;
    std::vector<std::string> overlay_header{"n"};
    for (const auto& m : methods) {
        overlay_header.push_back("p_" + m);
        overlay_header.push_back("log_p_" + m);
    }
    for (int n = 0; n <= n_max; ++n) {
        rows.push_back({std::to_string(n), format_real(first.p[n]), format_real(first.log_p[n])});
        std::vector<std::string> r{std::to_string(n)};
        for (const auto& m : methods) {
            r.push_back(format_real(dists.at(m).p[n]));
            r.push_back(format_real(dists.at(m).log_p[n]));
        }
        overlay.push_back(std::move(r));
    }
    out.files["pmf.csv"] = csv({"n", "p", "log_p"}, rows);
    out.files["pmf_overlay.csv"] = csv(overlay_header, overlay);

    ojson j = header(s);
    j["method"] = std::string(to_string(first.method));
    j["methods"] = methods;
    j["n_max"] = n_max;
    j["cumulants"] = cumulants_json(c);
    j["diagnostics"] = {{"normalization_defect", first.diagnostics.normalization_defect},
                        {"truncated_tail_mass_bound", first.diagnostics.truncated_tail_mass_bound},
                        {"transforms", first.diagnostics.transforms}};
    j["lambda_max"] = g.lambda_max();
    if (s.statistics == Statistics::Bose && g.lambda_max() > 0.0) {
        j["tail_rate"] = tail_rate(g);
    } else {
        j["tail_rate"] = nullptr;
    }
    out.files["summary.json"] = finish_summary(j, out.warnings);
    return out;
}

TaskOutput task_gf_trace(const Scenario& s, Rng& rng) {
    if (!s.params.xi || s.params.xi->empty()) config_error("params.xi", "xi grid must be nonempty");
    TaskOutput out;
    const auto g = build_generating_function(s, rng, out.warnings);
    std::vector<std::vector<std::string>> rows;
    for (double xi : *s.params.xi) {
        std::vector<std::string> r{format_real(xi)};
        for (int k = 0; k <= 3; ++k) r.push_back(format_real(g.derivative(xi, k)));
        rows.push_back(std::move(r));
    }
    out.files["gf_trace.csv"] = csv({"xi", "F", "dF", "d2F", "d3F"}, rows);
    ojson j = header(s);
    j["xi_max"] = g.xi_max();
    j["lambda_max"] = g.lambda_max();
    j["cumulants"] = cumulants_json(g.cumulants());
    out.files["summary.json"] = finish_summary(j, out.warnings);
    return out;
}

TaskOutput task_mc(const Scenario& s, std::uint64_t seed) {
    if (s.statistics != Statistics::Bose) config_error("statistics", "the Monte Carlo oracle simulates chaotic light only");
    if (!effective_window(s).profile.empty()) config_error("window", "the Monte Carlo oracle is narrow-band only");
    const double nu = s.window.nu;
    int cells = 0;
    if (s.params.cells) {
        cells = *s.params.cells;
    } else {
        if (std::abs(nu - std::round(nu)) > 1e-9 * std::max(1.0, nu)) {
            config_error("params.cells", "nu is not an integer; give the cell count explicitly");
        }
        cells = static_cast<int>(std::round(nu));
    }
    if (cells < 1) config_error("params.cells", "must be >= 1");
    const std::int64_t trials = s.params.trials.value_or(10000);
    if (trials < 1) config_error("params.trials", "must be >= 1");

    TaskOutput out;
    if (trials < 1000) out.warnings.push_back({"few_trials", "fewer than 1000 trials; summary statistics are rough"});
    Rng realization = make_substream(seed, kRealizationStream);
    const TransmissionSpec t = resolve_scatterer(s, realization, out.warnings);

    const McConfig cfg{cells, trials, seed, s.params.threads.value_or(0)};
    const auto counts = sample_counts(s.mu, t, cfg);
    const auto e = empirical_summary(counts);
    const GeneratingFunction g(reduce_to_spectrum(s.mu, t), cells);

    std::vector<std::vector<std::string>> rows;
    rows.reserve(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i) rows.push_back({std::to_string(i), std::to_string(counts[i])});
    out.files["counts.csv"] = csv({"trial", "count"}, rows);

    ojson j = header(s);
    j["trials"] = trials;
    j["cells"] = cells;
    j["seed"] = seed;
    j["mean"] = e.mean;
    j["variance"] = e.variance;
    j["fano"] = e.fano;
    j["c3"] = e.c3;
    j["se_mean"] = e.se_mean;
    j["se_variance"] = e.se_variance;
    j["se_fano"] = e.se_fano;
    j["analytic"] = cumulants_json(g.cumulants());
    if (s.params.reference.value_or(false)) {
        const auto exact = invert_fourier(g, static_cast<int>(e.histogram.size()));
        const auto chi = chi_square_test(e.histogram, exact);
        j["chi_square"] = {{"statistic", chi.statistic}, {"dof", chi.dof}, {"p_value", chi.p_value}};
    }
    out.files["summary.json"] = finish_summary(j, out.warnings);
    return out;
}

TaskOutput task_tail(const Scenario& s, Rng& rng) {
    if (s.statistics != Statistics::Bose) config_error("statistics", "tail analysis applies to Bose statistics");
    if (s.params.n_max && *s.params.n_max < 0) config_error("params.n_max", "must be >= 0");
    TaskOutput out;
    const auto g = build_generating_function(s, rng, out.warnings);
    const double rate = tail_rate(g);
    const auto d = invert_fourier(g, s.params.n_max.value_or(0));
    const auto fit = fit_last_decade(d);

    std::vector<std::vector<std::string>> rows;
    for (int n = fit.n_lo; n <= fit.n_hi; ++n) {
        rows.push_back({std::to_string(n), format_real(d.log_p[n]), format_real(fit.intercept + fit.slope * n)});
    }
    out.files["tail.csv"] = csv({"n", "log_p", "log_p_fit"}, rows);

    ojson j = header(s);
    j["lambda_max"] = g.lambda_max();
    j["tail_rate"] = rate;
    j["inverse_lambda_max"] = 1.0 / g.lambda_max();
    j["fitted_rate"] = -fit.slope;
    j["relative_error"] = std::abs(-fit.slope - rate) / rate;
    j["fit_window"] = {fit.n_lo, fit.n_hi};
    j["n_max"] = d.n_max();
    out.files["summary.json"] = finish_summary(j, out.warnings);
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------

std::string_view to_string(Task task) {
    switch (task) {
        case Task::FanoSweep: return "fano-sweep";
        case Task::Pmf: return "pmf";
        case Task::GfTrace: return "gf-trace";
        case Task::Mc: return "mc";
        case Task::Tail: return "tail";
    }
    return "?";
}

Task task_from_string(std::string_view name) {
    for (auto t : {Task::FanoSweep, Task::Pmf, Task::GfTrace, Task::Mc, Task::Tail})
        if (to_string(t) == name) return t;
    throw Error(ErrorCode::Config, "unknown task '" + std::string(name) + "'");
}

Scenario parse_scenario(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::Config, std::string("scenario is not valid JSON: ") + e.what());
    }
    require_object(j, "scenario", {"spec_version", "statistics", "mu", "t", "window", "task", "params"});
    Scenario s;
    if (j.contains("spec_version")) {
        const json& v = j.at("spec_version");
        if (!v.is_string() || v.get<std::string>() != kSpecVersion) {
            config_error("spec_version", std::string("expected \"") + kSpecVersion + "\"");
        }
    }
    if (j.contains("statistics")) {
        const json& st = j.at("statistics");
        if (st == "bose") {
            s.statistics = Statistics::Bose;
        } else if (st == "fermi") {
            s.statistics = Statistics::Fermi;
        } else {
            config_error("statistics", "expected \"bose\" or \"fermi\"");
        }
    }
    s.mu = parse_mu(field(j, "scenario", "mu"));
    s.t = parse_t(field(j, "scenario", "t"));
    parse_window(field(j, "scenario", "window"), s);
    const json& task = field(j, "scenario", "task");
    if (!task.is_string()) config_error("task", "expected a string");
    s.task = task_from_string(task.get<std::string>());
    s.params = parse_params(j.contains("params") ? j.at("params") : json::object(), s.task);
    return s;
}

std::string dump_scenario(const Scenario& s) {
    ojson j;
    j["spec_version"] = s.spec_version;
    j["statistics"] = s.statistics == Statistics::Bose ? "bose" : "fermi";
    if (s.mu.is_scalar()) {
        j["mu"] = {{"scalar", {{"f", s.mu.occupation()}, {"n", s.mu.modes()}}}};
    } else {
        j["mu"] = {{"matrix", dump_matrix(s.mu.matrix())}};
    }
    if (s.t.is_matrix()) {
        j["t"] = {{"matrix", dump_matrix(s.t.as_matrix())}};
    } else if (s.t.is_eigenvalues()) {
        j["t"] = {{"eigenvalues", s.t.as_eigenvalues()}};
    } else {
        const auto& d = s.t.as_ensemble();
        j["t"] = {{"ensemble", {{"name", std::string(to_string(d.name))}, {"n", d.modes}, {"gamma", d.gamma}}}};
    }
    ojson w;
    w["nu"] = s.window.nu;
    if (!s.window.profile.empty()) {
        ojson prof = ojson::array();
        for (const auto& b : s.window.profile) prof.push_back({b.weight, b.occupation});
        w["profile"] = prof;
    }
    if (s.lorentzian) {
        w["lorentzian"] = {{"f_max", s.lorentzian->f_max}, {"points", s.lorentzian->points}, {"span", s.lorentzian->span}};
    }
    j["window"] = w;
    j["task"] = std::string(to_string(s.task));
    ojson p = ojson::object();
    const auto& q = s.params;
    if (q.f) p["f"] = *q.f;
    if (q.gamma) p["gamma"] = *q.gamma;
    if (q.methods) p["methods"] = *q.methods;
    if (q.n_max) p["n_max"] = *q.n_max;
    if (q.xi) p["xi"] = *q.xi;
    if (q.trials) p["trials"] = *q.trials;
    if (q.cells) p["cells"] = *q.cells;
    if (q.threads) p["threads"] = *q.threads;
    if (q.seed) p["seed"] = *q.seed;
    if (q.reference) p["reference"] = *q.reference;
    j["params"] = p;
    return j.dump(2) + "\n";
}

CountingWindow effective_window(const Scenario& s) {
    if (!s.lorentzian) return s.window;
    CountingWindow w = s.window;
    w.profile = lorentzian_profile(s.lorentzian->f_max, s.window.nu, s.lorentzian->points, s.lorentzian->span);
    return w;
}

GeneratingFunction build_generating_function(const Scenario& s, Rng& rng, std::vector<RegimeWarning>& warnings) {
    const CountingWindow window = effective_window(s);
    throw_if_invalid(validate(s.mu, s.t, window));

    if (s.statistics == Statistics::Fermi) {
        if (!s.mu.is_scalar() || s.mu.occupation() != 1.0 || !window.profile.empty()) {
            throw Error(ErrorCode::Config, "Fermi statistics need mu = scalar f = 1 and no profile (zero temperature)");
        }
        if (s.t.is_ensemble()) return GeneratingFunction::from_density(s.t.as_ensemble(), 1.0, window.nu, Statistics::Fermi);
        return GeneratingFunction(SpectralData{transmissions(s.t)}, window.nu, Statistics::Fermi);
    }
    if (!window.profile.empty()) {
        if (s.t.is_ensemble()) return GeneratingFunction::from_profile(s.t.as_ensemble(), window.profile);
        return GeneratingFunction::from_profile(transmissions(s.t), window.profile);
    }
    if (s.t.is_ensemble() && s.mu.is_scalar()) {
        return GeneratingFunction::from_density(s.t.as_ensemble(), s.mu.occupation(), window.nu);
    }
    const TransmissionSpec t = resolve_scatterer(s, rng, warnings);
    return GeneratingFunction(reduce_to_spectrum(s.mu, t), window.nu);
}

TaskOutput run_task(const Scenario& s, std::optional<std::uint64_t> seed_override) {
    throw_if_invalid(validate(s.mu, s.t, effective_window(s)));
    const std::uint64_t seed = seed_override.value_or(s.params.seed.value_or(0));
    Rng rng = make_substream(seed, kRealizationStream);
    switch (s.task) {
        case Task::FanoSweep: return task_fano_sweep(s);
        case Task::Pmf: return task_pmf(s, rng);
        case Task::GfTrace: return task_gf_trace(s, rng);
        case Task::Mc: return task_mc(s, seed);
        case Task::Tail: return task_tail(s, rng);
    }
    throw Error(ErrorCode::Config, "unhandled task");
}

std::string format_real(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.16e", x);
    return buf;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Photocount statistics of chaotic radiation through a scatterer"};
    std::string scenario_path, out_dir;
    std::optional<std::uint64_t> seed;
    bool strict = false;
    app.add_option("--scenario", scenario_path, "scenario JSON file")->required();
    app.add_option("--out", out_dir, "output directory")->required();
    app.add_option("--seed", seed, "random seed (overrides params.seed)");
    app.add_flag("--strict", strict, "treat regime warnings as errors");
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }

    try {
        std::ifstream in(scenario_path, std::ios::binary);
        if (!in) throw Error(ErrorCode::Config, "cannot read scenario file '" + scenario_path + "'");
        std::stringstream buf;
        buf << in.rdbuf();
        const Scenario scenario = parse_scenario(buf.str());
        const TaskOutput result = run_task(scenario, seed);
        for (const auto& w : result.warnings) err << "warning [" << w.code << "]: " << w.message << "\n";
        if (strict && !result.warnings.empty()) {
            err << "error: regime warnings under --strict; no output written\n";
            return 3;
        }
        std::filesystem::create_directories(out_dir);
        for (const auto& [name, content] : result.files) {
            const auto path = std::filesystem::path(out_dir) / name;
            std::ofstream f(path, std::ios::binary);
            f << content;
            if (!f) throw std::runtime_error("failed writing " + path.string());
            out << path.string() << "\n";
        }
        return 0;
    } catch (const Error& e) {
        err << "error [" << to_string(e.code()) << "]: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace photocount::cli
