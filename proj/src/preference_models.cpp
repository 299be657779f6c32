#include "menurec/preference_models.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

namespace menurec {

namespace {

constexpr double kRangeTol = 1e-9;

void check_range(double value, double lambda, const char* family) {
    if (value < lambda - kRangeTol || value > 1.0 + kRangeTol)
        throw std::invalid_argument(std::string(family) +
                                    ": score function leaves [lambda, 1] on its domain");
}

}  // namespace

// ---------------------------------------------------------------------------
// BupModel

BupModel::BupModel(std::vector<std::vector<double>> coeffs, double lambda, bool verify_range)
    : coeffs_(std::move(coeffs)), lambda_(lambda) {
    if (coeffs_.size() < 2) throw std::invalid_argument("BupModel: need n >= 2");
    degree_ = 0;
    for (const auto& c : coeffs_)
        degree_ = std::max(degree_, static_cast<int>(c.size()) - 1);
    if (verify_range) {
        for (int i = 0; i < dim(); ++i)
            for (double x = 0.0; x <= 1.0 + 1e-12; x += 1e-4)
                check_range(eval_item(i, std::min(x, 1.0)), lambda_, "BupModel");
    }
}

double BupModel::eval_item(int i, double x) const {
    const auto& c = coeffs_[i];
    double acc = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x + *it;
    return acc;
}

Vector BupModel::scores_at(const SimplexVector& v) const {
    Vector s(dim());
    for (int i = 0; i < dim(); ++i) s[i] = eval_item(i, v[i]);
    return s;
}

// ---------------------------------------------------------------------------
// MultivariatePolyModel

MultivariatePolyModel::MultivariatePolyModel(int n, std::vector<std::vector<Monomial>> item_polys,
                                             double lambda, bool multilinear,
                                             std::optional<double> normalization, bool verify_range)
    : n_(n),
      item_polys_(std::move(item_polys)),
      lambda_(lambda),
      multilinear_(multilinear),
      normalization_(normalization) {
    if (static_cast<int>(item_polys_.size()) != n)
        throw std::invalid_argument("MultivariatePolyModel: one polynomial per item required");
    if (multilinear_) {
        for (const auto& poly : item_polys_)
            for (const auto& mono : poly)
                for (size_t j = 1; j < mono.vars.size(); ++j)
                    if (mono.vars[j] == mono.vars[j - 1])
                        throw std::invalid_argument("BMLP monomials must be multilinear");
    }
    if (verify_range) {
        Rng rng(0x9e3779b97f4a7c15ull);
        auto check_point = [&](const SimplexVector& v) {
            double sum = 0.0;
            for (int i = 0; i < n_; ++i) {
                double s = eval_item(i, v.coords());
                check_range(s, lambda_, multilinear_ ? "BmlpModel" : "BnmpModel");
                sum += s;
            }
            if (normalization_ && std::abs(sum - *normalization_) > 1e-9)
                throw std::invalid_argument("BnmpModel: score sum is not the declared constant");
        };
        for (int i = 0; i < n_; ++i) check_point(SimplexVector::point_mass(n_, i));
        check_point(SimplexVector::uniform(n_));
        for (int t = 0; t < 500; ++t) check_point(SimplexVector::random(n_, rng));
    }
}

double MultivariatePolyModel::eval_item(int i, const Vector& v) const {
    double acc = 0.0;
    for (const auto& mono : item_polys_[i]) {
        double term = mono.coeff;
        for (int var : mono.vars) term *= v[var];
        acc += term;
    }
    return acc;
}

Vector MultivariatePolyModel::scores_at(const SimplexVector& v) const {
    Vector s(n_);
    for (int i = 0; i < n_; ++i) s[i] = eval_item(i, v.coords());
    return s;
}

// ---------------------------------------------------------------------------
// SfrModel

SfrModel::SfrModel(std::vector<std::vector<Component>> item_components, double lambda,
                   double freq_bound, double separation, double lipschitz, bool verify_range)
    : components_(std::move(item_components)),
      lambda_(lambda),
      freq_bound_(freq_bound),
      separation_(separation),
      lipschitz_(lipschitz) {
    for (const auto& comps : components_) {
        for (const auto& c : comps) {
            if (c.frequency < 0.0)
                throw std::invalid_argument("SfrModel: store nonnegative frequencies only");
            if (std::abs(c.frequency) > freq_bound_ + 1e-12)
                throw std::invalid_argument("SfrModel: frequency outside [-F, F]");
            if (c.frequency == 0.0 && std::abs(c.magnitude.imag()) > 1e-12)
                throw std::invalid_argument("SfrModel: DC magnitude must be real");
        }
        for (size_t a = 0; a < comps.size(); ++a)
            for (size_t b = a + 1; b < comps.size(); ++b)
                if (std::abs(comps[a].frequency - comps[b].frequency) <= separation_)
                    throw std::invalid_argument("SfrModel: frequencies closer than separation");
    }
    if (verify_range) {
        for (int i = 0; i < dim(); ++i)
            for (double x = 0.0; x <= 1.0 + 1e-12; x += 1e-4)
                check_range(eval_item(i, std::min(x, 1.0)), lambda_, "SfrModel");
    }
}

double SfrModel::eval_item(int i, double x) const {
    double acc = 0.0;
    for (const auto& c : components_[i]) {
        if (c.frequency == 0.0) {
            acc += c.magnitude.real();
        } else {
            // xi e^{2 pi i eta x} + conj(xi) e^{-2 pi i eta x}
            double phase = 2.0 * std::numbers::pi * c.frequency * x;
            acc += 2.0 * (c.magnitude.real() * std::cos(phase) -
                          c.magnitude.imag() * std::sin(phase));
        }
    }
    return acc;
}

Vector SfrModel::scores_at(const SimplexVector& v) const {
    Vector s(dim());
    for (int i = 0; i < dim(); ++i) s[i] = eval_item(i, v[i]);
    return s;
}

Vector DispersionGuard::scores_at(const SimplexVector& v) const {
    Vector s = base_->evaluate(v).scores;
    double hi = s.maxCoeff();
    if (hi <= 0.0) return Vector::Constant(s.size(), floor_);
    if (s.minCoeff() < floor_ || hi > 1.0) s /= hi;
    return s.cwiseMax(floor_).cwiseMin(1.0);
}

// ---------------------------------------------------------------------------
// Selection

SimplexVector selection_distribution(const ScoreVector& s, const Menu& menu, int n) {
    Vector p = Vector::Zero(n);
    double denom = 0.0;
    for (int item : menu.items()) denom += s.scores[item];
    for (int item : menu.items()) p[item] = s.scores[item] / denom;
    return SimplexVector(std::move(p));
}

SimplexVector selection_distribution(const PreferenceModel& m, const SimplexVector& v,
                                     const Menu& menu) {
    return selection_distribution(m.evaluate(v), menu, m.dim());
}

int sample_choice(const PreferenceModel& m, const SimplexVector& v, const Menu& menu, Rng& rng) {
    ScoreVector s = m.evaluate(v);
    double denom = 0.0;
    for (int item : menu.items()) denom += s.scores[item];
    double u = rng.uniform() * denom;
    double acc = 0.0;
    for (int item : menu.items()) {
        acc += s.scores[item];
        if (u <= acc) return item;
    }
    return menu.items().back();
}

DispersionReport verify_dispersion(const PreferenceModel& m, double lambda, int samples, Rng& rng) {
    DispersionReport report{true, 1.0, SimplexVector::uniform(m.dim())};
    auto check = [&](const SimplexVector& v) {
        Vector s = m.evaluate(v).scores;
        double lo = s.minCoeff();
        if (lo < report.worst_score) {
            report.worst_score = lo;
            report.worst_point = v;
        }
        if (lo < lambda - kRangeTol) report.pass = false;
    };
    for (int i = 0; i < m.dim(); ++i) check(SimplexVector::point_mass(m.dim(), i));
    check(SimplexVector::uniform(m.dim()));
    for (int t = 0; t < samples; ++t) check(SimplexVector::random(m.dim(), rng));
    return report;
}

// ---------------------------------------------------------------------------
// Lower-bound constructions

ModelPtr build_lower_bound_model(int which, int n, double lambda, double eps) {
    if (which == 1) {
        if (lambda <= 0.0 || lambda >= 0.5)
            throw std::invalid_argument("construction 1 requires 0 < lambda < 0.5");
        double nn = n;
        return std::make_shared<TabularOracleModel>(
            n, lambda, [n, nn, lambda](const SimplexVector& v) {
                Vector s = Vector::Constant(n, 0.5 + lambda);
                s[0] = lambda + 0.5 + (nn / (nn - 1.0)) * (v[0] - 1.0 / nn) * (0.5 - lambda);
                s[1] = lambda + 0.5 * (1.0 - v[0] + 1.0 / nn);
                // Item 2's formula exceeds 1 slightly near v_1 = 0; clip.
                s[1] = std::min(s[1], 1.0);
                return s;
            });
    }
    if (which == 2) {
        if (n < 3) throw std::invalid_argument("construction 2 requires n >= 3");
        if (eps <= lambda) throw std::invalid_argument("construction 2 requires eps > lambda");
        if (lambda + (1.0 - eps) > 1.0 + 1e-12)
            throw std::invalid_argument("construction 2 requires lambda + (1 - eps) <= 1");
        return std::make_shared<TabularOracleModel>(
            n, lambda, [n, lambda, eps](const SimplexVector& v) {
                // items (a, b, c) = (0, 1, 2)
                Vector s(n);
                for (int i = 0; i < n; ++i) s[i] = lambda + (1.0 - eps) * (1.0 - v[1]);
                s[1] = lambda + (1.0 - eps) * v[1];
                s[2] = lambda + (1.0 - eps) * v[2];
                return s;
            });
    }
    throw std::invalid_argument("build_lower_bound_model: which must be 1 or 2");
}

// ---------------------------------------------------------------------------
// Model file format

namespace {

using nlohmann::json;

json provenance_to_json(const ModelProvenance& p) {
    return json{{"fit_family", p.fit_family},
                {"epsilon_hat", p.epsilon_hat},
                {"plan_digest", p.plan_digest}};
}

}  // namespace

std::string model_to_json(const PreferenceModel& m,
                          const std::optional<ModelProvenance>& provenance) {
    json j;
    j["family"] = m.family();
    j["n"] = m.dim();
    j["lambda"] = m.lambda();
    if (m.family() == "bup") {
        const auto& bup = dynamic_cast<const BupModel&>(m);
        j["coefficients"] = bup.coeffs();
    } else if (m.family() == "bmlp" || m.family() == "bnmp") {
        const auto& poly = dynamic_cast<const MultivariatePolyModel&>(m);
        json items = json::array();
        for (const auto& item_poly : poly.item_polys()) {
            json monos = json::array();
            for (const auto& mono : item_poly)
                monos.push_back(json{{"vars", mono.vars}, {"coeff", mono.coeff}});
            items.push_back(monos);
        }
        j["monomials"] = items;
        if (poly.normalization()) j["normalization"] = *poly.normalization();
    } else if (m.family() == "sfr") {
        const auto& sfr = dynamic_cast<const SfrModel&>(m);
        json items = json::array();
        for (const auto& comps : sfr.components()) {
            json cs = json::array();
            for (const auto& c : comps)
                cs.push_back(json{{"frequency", c.frequency},
                                  {"re", c.magnitude.real()},
                                  {"im", c.magnitude.imag()}});
            items.push_back(cs);
        }
        j["components"] = items;
        j["freq_bound"] = sfr.freq_bound();
        j["separation"] = sfr.separation();
        j["lipschitz"] = sfr.lipschitz();
    } else {
        throw std::invalid_argument("model_to_json: family has no file representation");
    }
    if (provenance) j["hypothesis"] = provenance_to_json(*provenance);
    return j.dump(2);
}

ModelPtr model_from_json(const std::string& text) {
    json j = json::parse(text);
    std::string family = j.at("family");
    int n = j.at("n");
    double lambda = j.at("lambda");
    // Hypothesis files may describe fits whose raw scores leave [lambda, 1];
    // skip range verification for them.
    bool verify = !j.contains("hypothesis");
    if (family == "bup") {
        return std::make_shared<BupModel>(
            j.at("coefficients").get<std::vector<std::vector<double>>>(), lambda, verify);
    }
    if (family == "bmlp" || family == "bnmp") {
        std::vector<std::vector<Monomial>> item_polys;
        for (const auto& item : j.at("monomials")) {
            std::vector<Monomial> poly;
            for (const auto& mono : item)
                poly.push_back(Monomial{mono.at("vars").get<std::vector<int>>(),
                                        mono.at("coeff").get<double>()});
            item_polys.push_back(std::move(poly));
        }
        std::optional<double> norm;
        if (j.contains("normalization")) norm = j.at("normalization").get<double>();
        return std::make_shared<MultivariatePolyModel>(n, std::move(item_polys), lambda,
                                                       family == "bmlp", norm, verify);
    }
    if (family == "sfr") {
        std::vector<std::vector<SfrModel::Component>> comps;
        for (const auto& item : j.at("components")) {
            std::vector<SfrModel::Component> cs;
            for (const auto& c : item)
                cs.push_back(SfrModel::Component{
                    c.at("frequency").get<double>(),
                    {c.at("re").get<double>(), c.at("im").get<double>()}});
            comps.push_back(std::move(cs));
        }
        return std::make_shared<SfrModel>(std::move(comps), lambda,
                                          j.at("freq_bound").get<double>(),
                                          j.at("separation").get<double>(),
                                          j.at("lipschitz").get<double>(), verify);
    }
    throw std::invalid_argument("model_from_json: unknown family " + family);
}

ModelPtr load_model_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open model file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return model_from_json(buf.str());
}

void save_model_file(const PreferenceModel& m, const std::string& path,
                     const std::optional<ModelProvenance>& provenance) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write model file: " + path);
    out << model_to_json(m, provenance) << "\n";
}

}  // namespace menurec
