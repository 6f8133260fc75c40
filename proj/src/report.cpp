#include "cellload/report.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "cellload/errors.hpp"
#include "json.hpp"

namespace cellload {

using Json = nlohmann::ordered_json;

namespace {

// -- scalar helpers ------------------------------------------------------------

// NaN is written as null by the encoder; read it back the same way.
double num(const Json& j) {
    if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
    if (!j.is_number()) throw ReportParseError("expected a number, got " + j.dump());
    return j.get<double>();
}

const Json& at(const Json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) throw ReportParseError(std::string("missing field '") + key + "'");
    return j.at(key);
}

double num(const Json& j, const char* key) { return num(at(j, key)); }

template <class T>
T integer(const Json& j, const char* key) {
    const Json& v = at(j, key);
    if (!v.is_number_integer()) throw ReportParseError(std::string("field '") + key + "' must be an integer");
    return v.get<T>();
}

Json opt(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

std::optional<double> opt_num(const Json& j) {
    if (j.is_null()) return std::nullopt;
    return num(j);
}

// Empty arrays flatten to null in CSV; accept both.
const Json& array_or_empty(const Json& j, const char* key) {
    static const Json empty = Json::array();
    if (!j.contains(key) || j.at(key).is_null()) return empty;
    if (!j.at(key).is_array()) throw ReportParseError(std::string("field '") + key + "' must be an array");
    return j.at(key);
}

// -- records -------------------------------------------------------------------

Json model_json(const NetworkModel& m) {
    Json j;
    j["lambda_b"] = m.lambda_b;
    j["kind"] = m.users.is_thomas() ? "tcp" : "mcp";
    j["lambda_p"] = m.users.lambda_p;
    j["mbar"] = m.users.m_bar;
    j[m.users.is_thomas() ? "sigma" : "cluster_radius"] = m.users.cluster_scale();
    return j;
}

NetworkModel model_from(const Json& j) {
    const std::string kind = at(j, "kind").get<std::string>();
    ClusterKind ck;
    if (kind == "tcp")
        ck = Thomas{num(j, "sigma")};
    else if (kind == "mcp")
        ck = Matern{num(j, "cluster_radius")};
    else
        throw ReportParseError("unknown model kind '" + kind + "'");
    return NetworkModel{num(j, "lambda_b"), UserModel{num(j, "lambda_p"), num(j, "mbar"), ck}};
}

Json moments_json(const LoadMoments& m) {
    Json j;
    j["mean"] = m.mean;
    j["second_moment"] = m.second_moment;
    j["variance"] = m.variance;
    j["normalized_variance"] = m.normalized_variance();
    j["mean_error"] = m.mean_error;
    j["second_moment_error"] = m.second_moment_error;
    j["variance_error"] = m.variance_error;
    return j;
}

LoadMoments moments_from(const Json& j) {
    LoadMoments m;
    m.mean = num(j, "mean");
    m.second_moment = num(j, "second_moment");
    m.variance = num(j, "variance");
    m.mean_error = num(j, "mean_error");
    m.second_moment_error = num(j, "second_moment_error");
    m.variance_error = num(j, "variance_error");
    return m;
}

Json nb_json(const NegBinParams& nb) { return Json{{"r", nb.r}, {"t", nb.t}}; }

NegBinParams nb_from(const Json& j) { return NegBinParams{integer<long>(j, "r"), num(j, "t")}; }

Json estimate_json(const Estimate& e) { return Json{{"value", e.value}, {"std_error", e.std_error}}; }

Estimate estimate_from(const Json& j) { return Estimate{num(j, "value"), num(j, "std_error")}; }

Json mc_json(const McSummary& mc) {
    Json j;
    j["seed"] = mc.seed;
    j["realizations"] = mc.realizations;
    j["window_radius"] = mc.window_radius;
    j["truncated"] = mc.stats.truncated;
    j["mean"] = estimate_json(mc.stats.mean);
    j["second_moment"] = estimate_json(mc.stats.second_moment);
    j["variance"] = estimate_json(mc.stats.variance);
    j["normalized_variance"] = estimate_json(mc.stats.normalized_variance);
    j["void_probability"] = mc.stats.void_probability;
    return j;
}

McSummary mc_from(const Json& j) {
    McSummary mc;
    mc.seed = integer<std::uint64_t>(j, "seed");
    mc.realizations = integer<std::size_t>(j, "realizations");
    mc.window_radius = num(j, "window_radius");
    mc.stats.realizations = mc.realizations;
    mc.stats.truncated = integer<std::size_t>(j, "truncated");
    mc.stats.mean = estimate_from(at(j, "mean"));
    mc.stats.second_moment = estimate_from(at(j, "second_moment"));
    mc.stats.variance = estimate_from(at(j, "variance"));
    mc.stats.normalized_variance = estimate_from(at(j, "normalized_variance"));
    mc.stats.void_probability = num(j, "void_probability");
    return mc;
}

Json sir_json(const std::vector<SirPoint>& pts) {
    Json a = Json::array();
    for (const auto& p : pts) {
        Json j{{"tau", p.tau}, {"analytic", p.analytic}};
        if (p.empirical) j["empirical"] = *p.empirical;
        if (p.empirical_se) j["empirical_se"] = *p.empirical_se;
        a.push_back(j);
    }
    return a;
}

std::vector<SirPoint> sir_from(const Json& a) {
    std::vector<SirPoint> out;
    for (const auto& j : a) {
        SirPoint p{num(j, "tau"), num(j, "analytic"), std::nullopt, std::nullopt};
        if (j.contains("empirical")) p.empirical = num(j, "empirical");
        if (j.contains("empirical_se")) p.empirical_se = num(j, "empirical_se");
        out.push_back(p);
    }
    return out;
}

template <class T>
Json series(const std::vector<T>& v) {
    Json a = Json::array();
    for (const auto& x : v) {
        if constexpr (std::is_same_v<T, std::optional<double>>)
            a.push_back(opt(x));
        else
            a.push_back(x);
    }
    return a;
}

Json index_series(std::size_t n) {
    Json a = Json::array();
    for (std::size_t i = 0; i < n; ++i) a.push_back(i);
    return a;
}

std::vector<double> doubles(const Json& a) {
    std::vector<double> out;
    for (const auto& x : a) out.push_back(num(x));
    return out;
}

std::vector<std::optional<double>> opt_doubles(const Json& a) {
    std::vector<std::optional<double>> out;
    for (const auto& x : a) out.push_back(opt_num(x));
    return out;
}

void expect_command(const Json& j, const char* command) {
    const std::string got = at(j, "command").get<std::string>();
    if (got != command) throw ReportParseError("expected a '" + std::string(command) + "' report, got '" + got + "'");
}

// -- reports -------------------------------------------------------------------

Json to_json(const MomentsReport& r) {
    Json j;
    j["command"] = "moments";
    j["model"] = model_json(r.model);
    j["analytic"] = moments_json(r.analytic);
    j["ppp_normalized_variance"] = r.ppp_normalized_variance;
    if (r.nb_fit) j["nb_fit"] = nb_json(*r.nb_fit);
    if (r.mc) j["mc"] = mc_json(*r.mc);
    return j;
}

MomentsReport moments_report_from(const Json& j) {
    expect_command(j, "moments");
    MomentsReport r;
    r.model = model_from(at(j, "model"));
    r.analytic = moments_from(at(j, "analytic"));
    r.ppp_normalized_variance = num(j, "ppp_normalized_variance");
    if (j.contains("nb_fit")) r.nb_fit = nb_from(j.at("nb_fit"));
    if (j.contains("mc")) r.mc = mc_from(j.at("mc"));
    return r;
}

Json to_json(const PmfReport& r) {
    Json j;
    j["command"] = "pmf";
    j["model"] = model_json(r.model);
    j["moments"] = moments_json(r.moments);
    j["dft_size"] = r.dft_size;
    j["inversion_radius"] = r.inversion_radius;
    j["aliasing_bound"] = r.aliasing_bound;
    j["raw_sum"] = r.raw_sum;
    j["raw_min"] = r.raw_min;
    if (r.nb_fit) j["nb_fit"] = nb_json(*r.nb_fit);
    if (r.mc) j["mc"] = mc_json(*r.mc);
    if (r.tv_analytic_empirical) j["tv_analytic_empirical"] = *r.tv_analytic_empirical;
    if (r.tv_nb_empirical) j["tv_nb_empirical"] = *r.tv_nb_empirical;
    j["series"] = Json{{"n", index_series(r.analytic.size())},
                       {"analytic", series(r.analytic)},
                       {"nb", series(r.nb)},
                       {"empirical", series(r.empirical)}};
    return j;
}

PmfReport pmf_report_from(const Json& j) {
    expect_command(j, "pmf");
    PmfReport r;
    r.model = model_from(at(j, "model"));
    r.moments = moments_from(at(j, "moments"));
    r.dft_size = integer<std::size_t>(j, "dft_size");
    r.inversion_radius = num(j, "inversion_radius");
    r.aliasing_bound = num(j, "aliasing_bound");
    r.raw_sum = num(j, "raw_sum");
    r.raw_min = num(j, "raw_min");
    if (j.contains("nb_fit")) r.nb_fit = nb_from(j.at("nb_fit"));
    if (j.contains("mc")) r.mc = mc_from(j.at("mc"));
    if (j.contains("tv_analytic_empirical")) r.tv_analytic_empirical = num(j, "tv_analytic_empirical");
    if (j.contains("tv_nb_empirical")) r.tv_nb_empirical = num(j, "tv_nb_empirical");
    const Json& s = at(j, "series");
    r.analytic = doubles(array_or_empty(s, "analytic"));
    r.nb = opt_doubles(array_or_empty(s, "nb"));
    r.empirical = opt_doubles(array_or_empty(s, "empirical"));
    return r;
}

Json to_json(const RateReport& r) {
    Json j;
    j["command"] = "rate";
    j["model"] = model_json(r.model);
    j["alpha"] = r.alpha;
    j["bandwidth"] = r.bandwidth_w;
    j["backhaul"] = opt(r.backhaul_rb);
    j["delta"] = r.delta;
    j["beta_reading"] = to_string(r.reading);
    j["dft_size"] = r.dft_size;
    j["void_probability"] = r.void_probability;
    if (r.mc) j["mc"] = mc_json(*r.mc);
    j["sir"] = sir_json(r.sir);
    j["series"] = Json{{"threshold", series(r.thresholds)},
                       {"analytic", series(r.analytic)},
                       {"empirical", series(r.empirical)},
                       {"empirical_se", series(r.empirical_se)}};
    return j;
}

RateReport rate_report_from(const Json& j) {
    expect_command(j, "rate");
    RateReport r;
    r.model = model_from(at(j, "model"));
    r.alpha = num(j, "alpha");
    r.bandwidth_w = num(j, "bandwidth");
    r.backhaul_rb = opt_num(at(j, "backhaul"));
    r.delta = num(j, "delta");
    r.reading = parse_beta_reading(at(j, "beta_reading").get<std::string>());
    r.dft_size = integer<std::size_t>(j, "dft_size");
    r.void_probability = num(j, "void_probability");
    if (j.contains("mc")) r.mc = mc_from(j.at("mc"));
    r.sir = sir_from(array_or_empty(j, "sir"));
    const Json& s = at(j, "series");
    r.thresholds = doubles(array_or_empty(s, "threshold"));
    r.analytic = doubles(array_or_empty(s, "analytic"));
    r.empirical = opt_doubles(array_or_empty(s, "empirical"));
    r.empirical_se = opt_doubles(array_or_empty(s, "empirical_se"));
    return r;
}

Json to_json(const SimulateReport& r) {
    Json j;
    j["command"] = "simulate";
    j["model"] = model_json(r.model);
    j["mc"] = mc_json(r.mc);
    if (r.alpha) j["alpha"] = *r.alpha;
    j["sir"] = sir_json(r.sir);
    j["series"] = Json{{"n", index_series(r.empirical.size())}, {"empirical", series(r.empirical)}};
    return j;
}

SimulateReport simulate_report_from(const Json& j) {
    expect_command(j, "simulate");
    SimulateReport r;
    r.model = model_from(at(j, "model"));
    r.mc = mc_from(at(j, "mc"));
    if (j.contains("alpha")) r.alpha = num(j, "alpha");
    r.sir = sir_from(array_or_empty(j, "sir"));
    r.empirical = doubles(array_or_empty(at(j, "series"), "empirical"));
    return r;
}

Json to_json(const CompareReport& r) {
    Json j;
    j["command"] = "compare";
    if (r.model) j["model"] = model_json(*r.model);
    j["seed"] = r.seed;
    j["realizations"] = r.realizations;
    j["delta"] = r.delta;
    j["passed"] = r.passed;
    Json name = Json::array(), an = Json::array(), em = Json::array(), gap = Json::array(), tol = Json::array(),
         ok = Json::array();
    for (const auto& c : r.checks) {
        name.push_back(c.name);
        an.push_back(c.analytic);
        em.push_back(c.empirical);
        gap.push_back(c.gap);
        tol.push_back(c.tolerance);
        ok.push_back(c.passed);
    }
    j["series"] = Json{{"check", name}, {"analytic", an}, {"empirical", em},
                       {"gap", gap},    {"tolerance", tol}, {"passed", ok}};
    return j;
}

CompareReport compare_report_from(const Json& j) {
    expect_command(j, "compare");
    CompareReport r;
    if (j.contains("model")) r.model = model_from(j.at("model"));
    r.seed = integer<std::uint64_t>(j, "seed");
    r.realizations = integer<std::size_t>(j, "realizations");
    r.delta = num(j, "delta");
    r.passed = at(j, "passed").get<bool>();
    const Json& s = at(j, "series");
    const Json& names = array_or_empty(s, "check");
    const Json &an = array_or_empty(s, "analytic"), &em = array_or_empty(s, "empirical"),
               &gap = array_or_empty(s, "gap"), &tol = array_or_empty(s, "tolerance"),
               &ok = array_or_empty(s, "passed");
    for (std::size_t i = 0; i < names.size(); ++i)
        r.checks.push_back(Check{names.at(i).get<std::string>(), num(an.at(i)), num(em.at(i)), num(gap.at(i)),
                                 num(tol.at(i)), ok.at(i).get<bool>()});
    return r;
}

// -- CSV codec -------------------------------------------------------------------

std::string to_csv(const Json& report) {
    Json meta = report;
    Json table = Json::object();
    if (meta.contains("series")) {
        table = meta["series"];
        meta.erase("series");
    }
    std::ostringstream out;
    const Json flat = meta.flatten();
    for (const auto& [pointer, value] : flat.items()) out << "# " << pointer << '=' << value.dump() << '\n';

    if (table.empty()) return out.str();
    std::size_t rows = 0;
    bool first = true;
    for (const auto& [name, col] : table.items()) {
        out << (first ? "" : ",") << name;
        rows = std::max(rows, col.size());
        first = false;
    }
    out << '\n';
    for (std::size_t i = 0; i < rows; ++i) {
        first = true;
        for (const auto& [name, col] : table.items()) {
            if (!first) out << ',';
            if (i < col.size() && !col[i].is_null()) out << col[i].dump();
            first = false;
        }
        out << '\n';
    }
    return out.str();
}

std::vector<std::string> split_row(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    bool quoted = false;
    for (char c : line) {
        if (c == '"') quoted = !quoted;
        if (c == ',' && !quoted) {
            cells.push_back(cell);
            cell.clear();
        } else {
            cell.push_back(c);
        }
    }
    cells.push_back(cell);
    return cells;
}

Json from_csv(std::string_view text) {
    Json flat = Json::object();
    std::vector<std::string> header;
    Json table = Json::object();
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t lineno = 0;
    try {
        while (std::getline(in, line)) {
            ++lineno;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
            if (line.rfind("# ", 0) == 0) {
                const auto eq = line.find('=');
                if (eq == std::string::npos) throw ReportParseError("metadata line without '='");
                flat[line.substr(2, eq - 2)] = Json::parse(line.substr(eq + 1));
                continue;
            }
            const auto cells = split_row(line);
            if (header.empty()) {
                header = cells;
                for (const auto& h : header) table[h] = Json::array();
                continue;
            }
            if (cells.size() != header.size()) throw ReportParseError("row has the wrong number of cells");
            for (std::size_t c = 0; c < cells.size(); ++c)
                table[header[c]].push_back(cells[c].empty() ? Json(nullptr) : Json::parse(cells[c]));
        }
    } catch (const Json::exception& e) {
        throw ReportParseError("CSV line " + std::to_string(lineno) + ": " + e.what());
    } catch (const ReportParseError& e) {
        throw ReportParseError("CSV line " + std::to_string(lineno) + ": " + e.what());
    }
    Json j = flat.unflatten();
    j["series"] = table;
    return j;
}

template <class R>
std::string render_any(const R& r, Format f) {
    const Json j = to_json(r);
    return f == Format::Json ? j.dump(2) + "\n" : to_csv(j);
}

template <class R, class From>
R parse_any(std::string_view text, Format f, From from) {
    Json j;
    if (f == Format::Json) {
        try {
            j = Json::parse(text);
        } catch (const Json::exception& e) {
            throw ReportParseError(std::string("invalid JSON: ") + e.what());
        }
    } else {
        j = from_csv(text);
    }
    try {
        return from(j);
    } catch (const Json::exception& e) {
        throw ReportParseError(e.what());
    }
}

}  // namespace

Format parse_format(std::string_view s) {
    if (s == "json") return Format::Json;
    if (s == "csv") return Format::Csv;
    throw ValidationError("format", "must be json or csv");
}

BetaReading parse_beta_reading(std::string_view s) {
    for (auto r : {BetaReading::PlainExponent, BetaReading::SwappedExponent, BetaReading::DeltaOffset})
        if (s == to_string(r)) return r;
    throw ValidationError("beta_reading", "unknown reading '" + std::string(s) + "'");
}

std::string render(const MomentsReport& r, Format f) { return render_any(r, f); }
std::string render(const PmfReport& r, Format f) { return render_any(r, f); }
std::string render(const RateReport& r, Format f) { return render_any(r, f); }
std::string render(const SimulateReport& r, Format f) { return render_any(r, f); }
std::string render(const CompareReport& r, Format f) { return render_any(r, f); }

MomentsReport parse_moments_report(std::string_view text, Format f) {
    return parse_any<MomentsReport>(text, f, moments_report_from);
}
PmfReport parse_pmf_report(std::string_view text, Format f) { return parse_any<PmfReport>(text, f, pmf_report_from); }
RateReport parse_rate_report(std::string_view text, Format f) {
    return parse_any<RateReport>(text, f, rate_report_from);
}
SimulateReport parse_simulate_report(std::string_view text, Format f) {
    return parse_any<SimulateReport>(text, f, simulate_report_from);
}
CompareReport parse_compare_report(std::string_view text, Format f) {
    return parse_any<CompareReport>(text, f, compare_report_from);
}

}  // namespace cellload
