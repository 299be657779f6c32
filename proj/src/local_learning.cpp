#include "menurec/local_learning.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstring>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

namespace menurec {

namespace {

constexpr double kNodeTol = 1e-10;

std::uint64_t fnv_mix(std::uint64_t h, std::uint64_t x) {
    for (int b = 0; b < 8; ++b) {
        h ^= (x >> (8 * b)) & 0xff;
        h *= 1099511628211ull;
    }
    return h;
}

// ---- shared plan enumeration helpers -------------------------------------

std::vector<std::vector<int>> subsets_of_size(int m, int j) {
    std::vector<std::vector<int>> out;
    std::vector<int> idx(j);
    if (j == 0) {
        out.push_back({});
        return out;
    }
    if (j > m) return out;
    std::iota(idx.begin(), idx.end(), 0);
    while (true) {
        out.push_back(idx);
        int i = j - 1;
        while (i >= 0 && idx[i] == m - j + i) --i;
        if (i < 0) break;
        ++idx[i];
        for (int t = i + 1; t < j; ++t) idx[t] = idx[t - 1] + 1;
    }
    return out;
}

/// 2j+1 distinct integer multipliers from {+-1, ..., +-(j+1)}.
std::vector<int> h_sequence(int j) {
    std::vector<int> hs;
    for (int a = 1; static_cast<int>(hs.size()) < 2 * j + 1; ++a) {
        hs.push_back(a);
        if (static_cast<int>(hs.size()) < 2 * j + 1) hs.push_back(-a);
    }
    return hs;
}

/// Multi-indices e over `vars` variables with |e| <= d, by total degree then
/// lexicographic order; index 0 is the constant term.
std::vector<std::vector<int>> multi_indices(int vars, int d) {
    std::vector<std::vector<int>> out;
    std::vector<int> e(vars, 0);
    for (int total = 0; total <= d; ++total) {
        // enumerate compositions of `total` into `vars` parts
        std::function<void(int, int)> rec = [&](int pos, int left) {
            if (pos == vars - 1) {
                e[pos] = left;
                out.push_back(e);
                return;
            }
            for (int take = left; take >= 0; --take) {
                e[pos] = take;
                rec(pos + 1, left - take);
            }
        };
        if (vars == 0) {
            if (total == 0) out.push_back({});
            continue;
        }
        rec(0, total);
    }
    return out;
}

SimplexVector point_from_chart_offsets(int n, const std::vector<double>& offsets) {
    Vector v = Vector::Constant(n, 1.0 / n);
    double sum = 0.0;
    for (int i = 0; i < n - 1; ++i) {
        v[i] += offsets[i];
        sum += offsets[i];
    }
    v[n - 1] -= sum;
    if (v.minCoeff() < -1e-12)
        throw std::invalid_argument("plan_queries: query point leaves the simplex");
    return SimplexVector(v);
}

int bup_class_count(int n, int z) {
    int c = 0;
    for (int i = 0; i < n; ++i)
        if (i % 3 == z) ++c;
    return c;
}

int sfr_grid_size(int ell, double Z, double freq_bound) {
    int base = std::max(4 * ell + 4, 16);
    // Keep the sample spacing below the aliasing limit for |eta| <= F.
    double max_spacing = 1.0 / (2.4 * std::max(freq_bound, 1.0));
    int need = static_cast<int>(std::ceil(2.0 * Z / max_spacing)) + 1;
    return std::max(base, need);
}

// ---- chart-basis -> item-basis polynomial expansion ----------------------

/// Adds coeff * prod_{w in vars (with multiplicity)} (v_w - 1/n) to `acc`,
/// keyed by the sorted v-monomial variable list.
void expand_chart_monomial(const std::vector<int>& vars, double coeff, int n,
                           std::map<std::vector<int>, double>& acc) {
    std::vector<std::pair<std::vector<int>, double>> terms{{{}, coeff}};
    for (int w : vars) {
        std::vector<std::pair<std::vector<int>, double>> next;
        next.reserve(terms.size() * 2);
        for (auto& [mono, c] : terms) {
            auto with = mono;
            with.push_back(w);
            next.emplace_back(std::move(with), c);
            next.emplace_back(mono, -c / n);
        }
        terms = std::move(next);
    }
    for (auto& [mono, c] : terms) {
        std::sort(mono.begin(), mono.end());
        acc[mono] += c;
    }
}

std::vector<Monomial> to_monomials(const std::map<std::vector<int>, double>& acc) {
    std::vector<Monomial> out;
    for (const auto& [vars, coeff] : acc)
        if (std::abs(coeff) > 1e-300) out.push_back(Monomial{vars, coeff});
    if (out.empty()) out.push_back(Monomial{{}, 0.0});
    return out;
}

// ---- shared fit utilities -------------------------------------------------

struct RangeScan {
    double min_score;
    double max_score;
};

RangeScan scan_range(const PreferenceModel& m, int samples = 400) {
    Rng rng(0x5eedull);  // fixed: fitters must be deterministic
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    auto look = [&](const SimplexVector& v) {
        Vector s = m.evaluate(v).scores;
        lo = std::min(lo, s.minCoeff());
        hi = std::max(hi, s.maxCoeff());
    };
    look(SimplexVector::uniform(m.dim()));
    for (int i = 0; i < m.dim(); ++i) look(SimplexVector::point_mass(m.dim(), i));
    for (int t = 0; t < samples; ++t) look(SimplexVector::random(m.dim(), rng));
    return RangeScan{lo, hi};
}

double plan_residual(const PreferenceModel& m, const QueryPlan& plan,
                     const QueryAnswers& answers) {
    double worst = 0.0;
    for (std::size_t p = 0; p < plan.points.size(); ++p) {
        Vector s = m.evaluate(plan.points[p]).scores;
        Vector q = s / s.sum();
        worst = std::max(worst, (q - answers[p].coords()).lpNorm<Eigen::Infinity>());
    }
    return worst;
}

double lambda_estimate(const QueryAnswers& answers, int n) {
    double minq = 1.0;
    for (const auto& a : answers) minq = std::min(minq, a.coords().minCoeff());
    return std::max(n * minq, 1e-3);
}

}  // namespace

// ---------------------------------------------------------------------------
// Plans.

std::string QueryPlan::digest() const {
    std::uint64_t h = 1469598103934665603ull;
    for (char c : family) h = fnv_mix(h, static_cast<unsigned char>(c));
    h = fnv_mix(h, static_cast<std::uint64_t>(n));
    h = fnv_mix(h, static_cast<std::uint64_t>(degree));
    auto mix_d = [&h](double x) {
        std::uint64_t bits;
        std::memcpy(&bits, &x, sizeof bits);
        h = fnv_mix(h, bits);
    };
    mix_d(alpha);
    mix_d(Z);
    for (const auto& p : points)
        for (int i = 0; i < p.dim(); ++i) mix_d(p[i]);
    std::ostringstream os;
    os << std::hex << h;
    return os.str();
}

QueryPlan plan_queries(const std::string& family, int n, int degree, double alpha,
                       double freq_bound) {
    if (n < 3) throw std::invalid_argument("plan_queries: need n >= 3");
    if (degree < 1) throw std::invalid_argument("plan_queries: need degree >= 1");
    if (alpha <= 0.0) throw std::invalid_argument("plan_queries: need alpha > 0");

    QueryPlan plan;
    plan.family = family;
    plan.n = n;
    plan.degree = degree;
    plan.alpha = alpha;

    if (family == "bup") {
        const int J = (degree + 1) / 2;
        // Raise residue class z by the shift and lower class (z+1)%3 by the
        // shift scaled with the class-size ratio so mass is conserved when 3
        // does not divide n.
        double worst_norm = 0.0;  // l2 displacement per unit shift
        double worst_down = 0.0;  // largest per-item lowering per unit shift
        for (int z = 0; z < 3; ++z) {
            double rc = double(bup_class_count(n, z));
            double lc = double(bup_class_count(n, (z + 1) % 3));
            worst_norm = std::max(worst_norm, std::sqrt(rc * (lc + rc) / lc));
            worst_down = std::max(worst_down, rc / lc);
        }
        // Paper form sqrt(n d / 6)/alpha, raised when needed so every query
        // stays inside the alpha-ball.
        plan.Z = std::max(std::sqrt(n * degree / 6.0), J * worst_norm) / alpha;
        if (1.0 / plan.Z < kNodeTol)
            throw std::invalid_argument("plan_queries: alpha too small to separate nodes");
        if (double(J) / plan.Z * std::max(1.0, worst_down) >= 1.0 / n)
            throw std::invalid_argument("plan_queries: alpha too large for this n");
        plan.points.push_back(SimplexVector::uniform(n));
        for (int z = 0; z < 3; ++z)
            for (int j = 1; j <= J; ++j) {
                double shift = j / plan.Z;
                double down = shift * bup_class_count(n, z) / bup_class_count(n, (z + 1) % 3);
                Vector v = Vector::Constant(n, 1.0 / n);
                for (int i = 0; i < n; ++i) {
                    if (i % 3 == z) v[i] += shift;
                    else if (i % 3 == (z + 1) % 3) v[i] -= down;
                }
                plan.points.push_back(SimplexVector(v));
            }
    } else if (family == "bmlp") {
        plan.Z = alpha / (2.0 * degree * (degree + 1));
        if (plan.Z < kNodeTol)
            throw std::invalid_argument("plan_queries: alpha too small to separate nodes");
        if ((degree + 1.0) * plan.Z >= 1.0 / n || degree * (degree + 1.0) * plan.Z >= 1.0 / n)
            throw std::invalid_argument("plan_queries: alpha too large for this n");
        plan.points.push_back(SimplexVector::uniform(n));
        for (int j = 1; j <= degree; ++j) {
            auto subs = subsets_of_size(n - 1, j);
            auto hs = h_sequence(j);
            for (const auto& m : subs)
                for (int h : hs) {
                    std::vector<double> off(n - 1, 0.0);
                    for (int w : m) off[w] = h * plan.Z;
                    plan.points.push_back(point_from_chart_offsets(n, off));
                }
        }
    } else if (family == "bnmp") {
        double scale = (alpha / 2.0) / degree;
        plan.Z = scale;
        if (scale < kNodeTol)
            throw std::invalid_argument("plan_queries: alpha too small to separate nodes");
        auto idxs = multi_indices(n - 1, degree);
        for (const auto& e : idxs) {
            std::vector<double> off(n - 1, 0.0);
            for (int w = 0; w < n - 1; ++w) off[w] = scale * e[w];
            plan.points.push_back(point_from_chart_offsets(n, off));
        }
    } else if (family == "sfr") {
        plan.Z = alpha / 2.0;
        plan.freq_bound = freq_bound;
        int grid = sfr_grid_size(degree, plan.Z, freq_bound);
        if (2.0 * plan.Z / (grid - 1) < kNodeTol)
            throw std::invalid_argument("plan_queries: alpha too small to separate nodes");
        if (plan.Z >= 1.0 / n)
            throw std::invalid_argument("plan_queries: alpha too large for this n");
        plan.points.push_back(SimplexVector::uniform(n));
        for (int i = 0; i < n; ++i) {
            int partner = (i + 1) % n;
            for (int g = 0; g < grid; ++g) {
                double x = -plan.Z + g * (2.0 * plan.Z / (grid - 1));
                Vector v = Vector::Constant(n, 1.0 / n);
                v[i] += x;
                v[partner] -= x;
                plan.points.push_back(SimplexVector(v));
            }
        }
    } else {
        throw std::invalid_argument("plan_queries: unknown family '" + family + "'");
    }
    return plan;
}

QueryAnswers exact_answers(const PreferenceModel& truth, const QueryPlan& plan) {
    QueryAnswers out;
    out.reserve(plan.points.size());
    for (const auto& p : plan.points) {
        Vector s = truth.evaluate(p).scores;
        out.push_back(SimplexVector::normalized(s));
    }
    return out;
}

QueryAnswers noisy_answers(const PreferenceModel& truth, const QueryPlan& plan, double beta,
                           Rng& rng) {
    QueryAnswers out;
    out.reserve(plan.points.size());
    for (const auto& p : plan.points) {
        Vector s = truth.evaluate(p).scores;
        Vector q = s / s.sum();
        for (Eigen::Index i = 0; i < q.size(); ++i)
            q[i] = std::max(0.0, q[i] + beta * (2.0 * rng.uniform() - 1.0));
        out.push_back(SimplexVector::normalized(q));
    }
    return out;
}

// ---------------------------------------------------------------------------
// BUP.

Hypothesis fit_bup(const QueryPlan& plan, const QueryAnswers& answers, double beta) {
    if (plan.family != "bup") throw std::invalid_argument("fit_bup: wrong plan family");
    if (answers.size() != plan.points.size())
        throw std::invalid_argument("fit_bup: answer count mismatch");
    const int n = plan.n;
    const int d = plan.degree;
    const int J = (d + 1) / 2;
    const Vector& qU = answers[0].coords();

    // Per-item interpolation nodes (memory value, rescaled answer).
    std::vector<std::vector<std::pair<double, double>>> nodes(n);
    for (int i = 0; i < n; ++i) nodes[i].push_back({1.0 / n, qU[i]});

    int idx = 1;
    for (int z = 0; z < 3; ++z)
        for (int j = 1; j <= J; ++j, ++idx) {
            const Vector& qv = answers[idx].coords();
            double held_v = 0.0, held_u = 0.0;
            for (int i = 0; i < n; ++i)
                if (i % 3 != z && i % 3 != (z + 1) % 3) {
                    held_v += qv[i];
                    held_u += qU[i];
                }
            // R_v = M*_U / M*_v; dividing the observed normalized scores by
            // it puts every sample on the common f_i / M*_U scale.
            double R = held_u > 0.0 ? held_v / held_u : 1.0;
            if (R <= 0.0) R = 1.0;
            double shift = j / plan.Z;
            double down = shift * bup_class_count(n, z) / bup_class_count(n, (z + 1) % 3);
            for (int i = 0; i < n; ++i) {
                if (i % 3 == z) nodes[i].push_back({1.0 / n + shift, qv[i] / R});
                else if (i % 3 == (z + 1) % 3) nodes[i].push_back({1.0 / n - down, qv[i] / R});
            }
        }

    std::vector<std::vector<double>> coeffs(n);
    double lsq_resid = 0.0;
    for (int i = 0; i < n; ++i) {
        const auto& nd = nodes[i];
        Eigen::MatrixXd V(nd.size(), d + 1);
        Eigen::VectorXd y(nd.size());
        for (std::size_t r = 0; r < nd.size(); ++r) {
            double p = 1.0;
            for (int c = 0; c <= d; ++c) {
                V(r, c) = p;
                p *= nd[r].first;
            }
            y[r] = nd[r].second;
        }
        Eigen::VectorXd a = V.colPivHouseholderQr().solve(y);
        lsq_resid = std::max(lsq_resid, (V * a - y).lpNorm<Eigen::Infinity>());
        coeffs[i].assign(a.data(), a.data() + a.size());
    }

    BupModel raw(coeffs, 0.0, false);
    RangeScan range = scan_range(raw);
    double scale = 1.0 / std::max(range.max_score, 1e-12);
    for (auto& ci : coeffs)
        for (double& c : ci) c *= scale;
    double lam = std::max(range.min_score * scale, 0.0);
    auto model = std::make_shared<BupModel>(coeffs, lam, false);

    Hypothesis hyp;
    hyp.model = model;
    hyp.plan_digest = plan.digest();
    double lam_est = lambda_estimate(answers, n);
    hyp.epsilon_hat = f_ll_constant("bup", n, d, plan.alpha, lam_est, 1.0) * beta +
                      10.0 * plan_residual(*model, plan, answers) +
                      std::max(0.0, -range.min_score * scale);
    hyp.degenerate = range.min_score <= 0.0;
    return hyp;
}

// ---------------------------------------------------------------------------
// BMLP.

namespace {

using ChartPoly = std::map<std::vector<int>, double>;  // subset -> coefficient

double restricted_eval(const ChartPoly& poly, const std::vector<int>& m, double z, int max_deg) {
    // Sum over subsets of m with size <= max_deg of coeff * z^{|subset|}.
    double total = 0.0;
    for (const auto& [vars, c] : poly) {
        if (static_cast<int>(vars.size()) > max_deg) continue;
        if (!std::includes(m.begin(), m.end(), vars.begin(), vars.end())) continue;
        total += c * std::pow(z, static_cast<double>(vars.size()));
    }
    return total;
}

}  // namespace

Hypothesis fit_bmlp(const QueryPlan& plan, const QueryAnswers& answers, double beta) {
    if (plan.family != "bmlp") throw std::invalid_argument("fit_bmlp: wrong plan family");
    if (answers.size() != plan.points.size())
        throw std::invalid_argument("fit_bmlp: answer count mismatch");
    const int n = plan.n;
    const int d = plan.degree;
    const int items = n - 1;  // chart items; item n-1 is derived at the end
    const double Z = plan.Z;
    const double beta_eff = std::max(beta, 1e-14);
    const double Fj = 10.0 * std::sqrt(beta_eff);

    std::vector<ChartPoly> a(items);
    ChartPoly b;
    b[{}] = 1.0;
    for (int i = 0; i < items; ++i) a[i][{}] = answers[0][i];

    bool degenerate = false;
    int idx = 1;
    for (int j = 1; j <= d; ++j) {
        auto subs = subsets_of_size(items, j);
        auto hs = h_sequence(j);
        for (const auto& m : subs) {
            const int H = static_cast<int>(hs.size());
            Eigen::MatrixXd q(items, H);
            Eigen::MatrixXd c(items, H);
            for (int t = 0; t < H; ++t) {
                double z = hs[t] * Z;
                double fb = restricted_eval(b, m, z, j - 1);
                const Vector& qv = answers[idx + t].coords();
                for (int i = 0; i < items; ++i) {
                    double fa = restricted_eval(a[i], m, z, j - 1);
                    q(i, t) = qv[i];
                    c(i, t) = (qv[i] * fb - fa) / std::pow(z, j);
                }
            }
            idx += H;

            // Pick the item with the widest answer spread to identify b_m.
            int istar = 0;
            double spread = -1.0;
            for (int i = 0; i < items; ++i) {
                double s = q.row(i).maxCoeff() - q.row(i).minCoeff();
                if (s > spread) {
                    spread = s;
                    istar = i;
                }
            }
            double bm;
            if (spread >= Fj) {
                // a - q_h b = c_h: least squares over the 2j+1 relations.
                Eigen::MatrixXd A(H, 2);
                A.col(0).setOnes();
                A.col(1) = -q.row(istar).transpose();
                Eigen::VectorXd sol =
                    A.colPivHouseholderQr().solve(c.row(istar).transpose());
                bm = sol[1];
                if (spread < 2.0 * Fj) degenerate = true;
            } else {
                // Constant relations: either b_m = 0 (nonzero constant c) or
                // the proportional case a_m = b_m.
                Eigen::VectorXd cbar = c.rowwise().mean();
                int i0 = 0;
                cbar.cwiseAbs().maxCoeff(&i0);
                double Ej = Fj;
                if (std::abs(cbar[i0]) > Ej) {
                    bm = 0.0;
                } else {
                    double qbar = q.row(i0).mean();
                    bm = cbar[i0] / (1.0 - qbar);
                }
                if (std::abs(std::abs(cbar[i0]) - Ej) < Ej) degenerate = true;
            }
            b[m] = bm;
            for (int i = 0; i < items; ++i) {
                double am = 0.0;
                for (int t = 0; t < H; ++t) am += q(i, t) * bm + c(i, t);
                a[i][m] = am / H;
            }
        }
    }

    // Item n's chart polynomial: b - sum of the others.
    ChartPoly an = b;
    for (int i = 0; i < items; ++i)
        for (const auto& [vars, coeff] : a[i]) an[vars] -= coeff;

    std::vector<std::vector<Monomial>> polys(n);
    for (int i = 0; i < n; ++i) {
        const ChartPoly& src = (i < items) ? a[i] : an;
        std::map<std::vector<int>, double> acc;
        for (const auto& [vars, coeff] : src) expand_chart_monomial(vars, coeff, n, acc);
        polys[i] = to_monomials(acc);
    }

    MultivariatePolyModel raw(n, polys, 0.0, true, std::nullopt, false);
    RangeScan range = scan_range(raw);
    double scale = 1.0 / std::max(range.max_score, 1e-12);
    for (auto& poly : polys)
        for (auto& mono : poly) mono.coeff *= scale;
    double lam = std::max(range.min_score * scale, 0.0);
    auto model = std::make_shared<MultivariatePolyModel>(n, polys, lam, true, std::nullopt, false);

    Hypothesis hyp;
    hyp.model = model;
    hyp.plan_digest = plan.digest();
    double lam_est = lambda_estimate(answers, n);
    hyp.epsilon_hat = f_ll_constant("bmlp", n, d, plan.alpha, lam_est, 1.0) * std::sqrt(beta) +
                      10.0 * plan_residual(*model, plan, answers) +
                      std::max(0.0, -range.min_score * scale);
    hyp.degenerate = degenerate || range.min_score <= 0.0;
    return hyp;
}

// ---------------------------------------------------------------------------
// BNMP.

namespace {

Eigen::MatrixXd bnmp_matrix(int n, int d, double scale) {
    auto idxs = multi_indices(n - 1, d);
    const auto N = static_cast<Eigen::Index>(idxs.size());
    Eigen::MatrixXd X(N, N);
    for (Eigen::Index p = 0; p < N; ++p)
        for (Eigen::Index q = 0; q < N; ++q) {
            double val = 1.0;
            for (int w = 0; w < n - 1; ++w)
                val *= std::pow(scale * idxs[p][w] / 1.0, static_cast<double>(idxs[q][w]));
            X(p, q) = val;
        }
    return X;
}

double cond_of(const Eigen::MatrixXd& X) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(X);
    double smin = svd.singularValues().minCoeff();
    return smin > 0.0 ? svd.singularValues().maxCoeff() / smin
                      : std::numeric_limits<double>::infinity();
}

}  // namespace

std::pair<double, double> bnmp_condition(int n, int degree, double alpha) {
    double ca = cond_of(bnmp_matrix(n, degree, (alpha / 2.0) / degree));
    double cr = cond_of(bnmp_matrix(n, degree, 0.5 / degree));
    return {ca, cr};
}

Hypothesis fit_bnmp(const QueryPlan& plan, const QueryAnswers& answers, double beta) {
    if (plan.family != "bnmp") throw std::invalid_argument("fit_bnmp: wrong plan family");
    if (answers.size() != plan.points.size())
        throw std::invalid_argument("fit_bnmp: answer count mismatch");
    const int n = plan.n;
    const int d = plan.degree;
    auto idxs = multi_indices(n - 1, d);
    const auto N = static_cast<Eigen::Index>(idxs.size());
    Eigen::MatrixXd X = bnmp_matrix(n, d, plan.Z);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(X);

    // Normalized scores f_i / C are themselves degree-d chart polynomials, so
    // every item (including n) fits by one linear solve.
    std::vector<std::vector<Monomial>> polys(n);
    double resid = 0.0;
    for (int i = 0; i < n; ++i) {
        Eigen::VectorXd rhs(N);
        for (Eigen::Index p = 0; p < N; ++p) rhs[p] = answers[p][i];
        Eigen::VectorXd coef = lu.solve(rhs);
        resid = std::max(resid, (X * coef - rhs).lpNorm<Eigen::Infinity>());
        std::map<std::vector<int>, double> acc;
        for (Eigen::Index q = 0; q < N; ++q) {
            if (coef[q] == 0.0) continue;
            std::vector<int> vars;
            for (int w = 0; w < n - 1; ++w)
                for (int rep = 0; rep < idxs[q][w]; ++rep) vars.push_back(w);
            expand_chart_monomial(vars, coef[q], n, acc);
        }
        polys[i] = to_monomials(acc);
    }

    MultivariatePolyModel raw(n, polys, 0.0, false, std::nullopt, false);
    RangeScan range = scan_range(raw);
    double scale = 1.0 / std::max(range.max_score, 1e-12);
    for (auto& poly : polys)
        for (auto& mono : poly) mono.coeff *= scale;
    double lam = std::max(range.min_score * scale, 0.0);
    auto model =
        std::make_shared<MultivariatePolyModel>(n, polys, lam, false, scale, false);

    Hypothesis hyp;
    hyp.model = model;
    hyp.plan_digest = plan.digest();
    double lam_est = lambda_estimate(answers, n);
    hyp.epsilon_hat = f_ll_constant("bnmp", n, d, plan.alpha, lam_est, 1.0) * beta +
                      10.0 * plan_residual(*model, plan, answers) +
                      std::max(0.0, -range.min_score * scale);
    hyp.degenerate = range.min_score <= 0.0;
    return hyp;
}

// ---------------------------------------------------------------------------
// SFR (matrix-pencil frequency recovery).

namespace {

struct PencilResult {
    std::vector<double> freqs;
    std::vector<std::complex<double>> mags;
};

PencilResult matrix_pencil(const std::vector<double>& samples, const std::vector<double>& ts,
                           int ell, double spacing, double noise_floor) {
    const int N = static_cast<int>(samples.size());
    const int L = N / 2;
    Eigen::MatrixXd Y0(N - L, L), Y1(N - L, L);
    for (int r = 0; r < N - L; ++r)
        for (int c = 0; c < L; ++c) {
            Y0(r, c) = samples[r + c];
            Y1(r, c) = samples[r + c + 1];
        }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(Y0, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    int rank = 0;
    // Components at frequency f enter the window attenuated by ~(2 pi f Z)^2,
    // so genuine singular values can sit many decades under sv[0]; only the
    // double-precision floor (or the caller's noise floor) separates them
    // from rank-deficiency.
    double thresh = std::max(sv[0] * 1e-13, noise_floor);
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv[i] > thresh) ++rank;
    rank = std::min(rank, ell);
    if (rank == 0) return {};

    Eigen::MatrixXd U = svd.matrixU().leftCols(rank);
    Eigen::MatrixXd V = svd.matrixV().leftCols(rank);
    Eigen::VectorXd S = sv.head(rank);
    Eigen::MatrixXd Zm = S.asDiagonal().inverse() * U.transpose() * Y1 * V;
    Eigen::EigenSolver<Eigen::MatrixXd> es(Zm);

    PencilResult out;
    std::vector<std::complex<double>> roots;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
        roots.push_back(es.eigenvalues()[i]);
    for (const auto& z : roots) out.freqs.push_back(std::arg(z) / (2.0 * M_PI * spacing));

    // Magnitudes by least squares against the recovered exponentials.
    Eigen::MatrixXcd A(N, rank);
    Eigen::VectorXcd y(N);
    for (int g = 0; g < N; ++g) {
        y[g] = samples[g];
        for (int k = 0; k < rank; ++k)
            A(g, k) = std::exp(std::complex<double>(0.0, 2.0 * M_PI * out.freqs[k] * ts[g]));
    }
    Eigen::VectorXcd xi = A.colPivHouseholderQr().solve(y);
    for (int k = 0; k < rank; ++k) out.mags.push_back(xi[k]);
    return out;
}

double sfr_item_eval(const std::vector<SfrModel::Component>& item, double t) {
    double f = 0.0;
    for (const auto& c : item) {
        if (c.frequency == 0.0) f += c.magnitude.real();
        else
            f += 2.0 * (c.magnitude.real() * std::cos(2.0 * M_PI * c.frequency * t) -
                        c.magnitude.imag() * std::sin(2.0 * M_PI * c.frequency * t));
    }
    return f;
}

/// Gauss-Newton polish of (dc, frequency, magnitude) against the window
/// samples. The pencil locates frequencies only to O((2 pi f Z)^2) over the
/// narrow query window; the least-squares refinement recovers the remaining
/// digits (exact samples reach machine level).
void refine_sfr_item(std::vector<SfrModel::Component>& item, const std::vector<double>& ys,
                     const std::vector<double>& ts, double freq_bound) {
    const int N = static_cast<int>(ys.size());
    int params = 0;
    for (const auto& c : item) params += c.frequency == 0.0 ? 1 : 3;
    if (params == 0 || params >= N) return;

    auto residual = [&](const std::vector<SfrModel::Component>& it) {
        Eigen::VectorXd r(N);
        for (int g = 0; g < N; ++g) r[g] = sfr_item_eval(it, ts[g]) - ys[g];
        return r;
    };
    Eigen::VectorXd r = residual(item);
    for (int iter = 0; iter < 60 && r.lpNorm<Eigen::Infinity>() > 1e-14; ++iter) {
        Eigen::MatrixXd J(N, params);
        for (int g = 0; g < N; ++g) {
            int p = 0;
            for (const auto& c : item) {
                if (c.frequency == 0.0) {
                    J(g, p++) = 1.0;
                    continue;
                }
                double w = 2.0 * M_PI * c.frequency * ts[g];
                double cw = std::cos(w), sw = std::sin(w);
                J(g, p++) = 2.0 * M_PI * ts[g] *
                            (-2.0 * c.magnitude.real() * sw - 2.0 * c.magnitude.imag() * cw);
                J(g, p++) = 2.0 * cw;
                J(g, p++) = -2.0 * sw;
            }
        }
        Eigen::VectorXd step = J.colPivHouseholderQr().solve(-r);
        // Backtrack until the residual shrinks; give up on a dead direction.
        double scale = 1.0;
        bool improved = false;
        for (int half = 0; half < 20; ++half, scale *= 0.5) {
            std::vector<SfrModel::Component> trial = item;
            int p = 0;
            for (auto& c : trial) {
                if (c.frequency == 0.0) {
                    c.magnitude += std::complex<double>(scale * step[p++], 0.0);
                    continue;
                }
                c.frequency =
                    std::clamp(c.frequency + scale * step[p++], 0.0, freq_bound);
                c.magnitude += std::complex<double>(scale * step[p], scale * step[p + 1]);
                p += 2;
            }
            Eigen::VectorXd rt = residual(trial);
            if (rt.squaredNorm() < r.squaredNorm()) {
                item = std::move(trial);
                r = std::move(rt);
                improved = true;
                break;
            }
        }
        if (!improved) break;
    }
}

}  // namespace

Hypothesis fit_sfr(const QueryPlan& plan, const QueryAnswers& answers, double beta) {
    if (plan.family != "sfr") throw std::invalid_argument("fit_sfr: wrong plan family");
    if (answers.size() != plan.points.size())
        throw std::invalid_argument("fit_sfr: answer count mismatch");
    const int n = plan.n;
    const int ell = plan.degree;
    const int grid = sfr_grid_size(ell, plan.Z, plan.freq_bound);
    const double spacing = 2.0 * plan.Z / (grid - 1);
    const Vector& qU = answers[0].coords();

    std::vector<std::vector<SfrModel::Component>> comps(n);
    double recovery_flag = 0.0;
    int idx = 1;
    for (int i = 0; i < n; ++i) {
        int partner = (i + 1) % n;
        std::vector<double> ys(grid), ts(grid);
        for (int g = 0; g < grid; ++g, ++idx) {
            const Vector& qv = answers[idx].coords();
            double held_v = 0.0, held_u = 0.0;
            for (int h = 0; h < n; ++h)
                if (h != i && h != partner) {
                    held_v += qv[h];
                    held_u += qU[h];
                }
            double R = held_u > 0.0 ? held_v / held_u : 1.0;
            if (R <= 0.0) R = 1.0;
            ts[g] = 1.0 / n + (-plan.Z + g * spacing);
            ys[g] = qv[i] / R;
        }
        PencilResult pr = matrix_pencil(ys, ts, ell, spacing, std::max(beta * 10.0, 1e-12));
        // Numerical drift can push a recovered frequency just past the band.
        for (double& f : pr.freqs) f = std::clamp(f, -plan.freq_bound, plan.freq_bound);

        // Fold eigenvalues into a DC term plus conjugate pairs. The pencil
        // super-resolves far below the 1/window Fourier limit, so classify
        // and merge with a tolerance well under any admissible frequency gap.
        double freq_tol = std::max(1e-6, 0.03 * plan.freq_bound);
        double dc = 0.0;
        std::vector<SfrModel::Component> item;
        std::vector<bool> used(pr.freqs.size(), false);
        for (std::size_t k = 0; k < pr.freqs.size(); ++k) {
            if (used[k]) continue;
            if (std::abs(pr.freqs[k]) <= freq_tol) {
                dc += pr.mags[k].real();
                used[k] = true;
                continue;
            }
            if (pr.freqs[k] < 0.0) continue;  // handled via its positive partner
            std::complex<double> mag = pr.mags[k];
            for (std::size_t k2 = 0; k2 < pr.freqs.size(); ++k2)
                if (!used[k2] && k2 != k && std::abs(pr.freqs[k2] + pr.freqs[k]) < freq_tol) {
                    mag = 0.5 * (pr.mags[k] + std::conj(pr.mags[k2]));
                    used[k2] = true;
                    break;
                }
            used[k] = true;
            // Merge near-duplicate frequencies.
            bool merged = false;
            for (auto& c : item)
                if (c.frequency > 0.0 && std::abs(c.frequency - pr.freqs[k]) < freq_tol) {
                    c.magnitude += mag;
                    merged = true;
                    break;
                }
            if (!merged) item.push_back(SfrModel::Component{pr.freqs[k], mag});
        }
        if (std::abs(dc) > 0.0 || item.empty())
            item.insert(item.begin(), SfrModel::Component{0.0, std::complex<double>(dc, 0.0)});

        refine_sfr_item(item, ys, ts, plan.freq_bound);

        // Reconstruction residual against the samples flags failed recovery.
        for (int g = 0; g < grid; ++g)
            recovery_flag = std::max(recovery_flag, std::abs(sfr_item_eval(item, ts[g]) - ys[g]));
        comps[i] = std::move(item);
    }

    // Separation/Lipschitz metadata from the recovered spectrum.
    double sep = std::numeric_limits<double>::infinity();
    double lip = 0.0;
    for (const auto& item : comps) {
        std::vector<double> fr;
        for (const auto& c : item) {
            fr.push_back(c.frequency);
            if (c.frequency > 0.0) fr.push_back(-c.frequency);
            lip += 2.0 * M_PI * std::abs(c.frequency) * 2.0 * std::abs(c.magnitude);
        }
        std::sort(fr.begin(), fr.end());
        for (std::size_t t = 1; t < fr.size(); ++t) sep = std::min(sep, fr[t] - fr[t - 1]);
    }
    if (!std::isfinite(sep) || sep <= 0.0) sep = plan.freq_bound;
    sep *= 0.99;  // declared separation must sit strictly under the min gap

    SfrModel raw(comps, 0.0, plan.freq_bound, sep, std::max(lip, 1.0), false);
    RangeScan range = scan_range(raw);
    double scale = 1.0 / std::max(range.max_score, 1e-12);
    for (auto& item : comps)
        for (auto& c : item) c.magnitude *= scale;
    double lam = std::max(range.min_score * scale, 0.0);
    auto model = std::make_shared<SfrModel>(comps, lam, plan.freq_bound, sep,
                                            std::max(lip * scale, 1.0), false);

    Hypothesis hyp;
    hyp.model = model;
    hyp.plan_digest = plan.digest();
    double lam_est = lambda_estimate(answers, n);
    hyp.epsilon_hat = f_ll_constant("sfr", n, ell, plan.alpha, lam_est, 1.0) * beta +
                      10.0 * plan_residual(*model, plan, answers) +
                      std::max(0.0, -range.min_score * scale);
    hyp.degenerate = range.min_score <= 0.0 || recovery_flag > std::max(100.0 * beta, 1e-6);
    return hyp;
}

Hypothesis fit_hypothesis(const QueryPlan& plan, const QueryAnswers& answers, double beta) {
    if (plan.family == "bup") return fit_bup(plan, answers, beta);
    if (plan.family == "bmlp") return fit_bmlp(plan, answers, beta);
    if (plan.family == "bnmp") return fit_bnmp(plan, answers, beta);
    if (plan.family == "sfr") return fit_sfr(plan, answers, beta);
    throw std::invalid_argument("fit_hypothesis: unknown family '" + plan.family + "'");
}

// ---------------------------------------------------------------------------
// Evaluation utilities.

double hypothesis_error(const PreferenceModel& hyp, const PreferenceModel& truth,
                        const std::vector<SimplexVector>& grid) {
    double worst = 0.0;
    for (const auto& v : grid) {
        Vector a = hyp.evaluate(v).scores;
        Vector b = truth.evaluate(v).scores;
        worst = std::max(worst, (a / a.sum() - b / b.sum()).norm());
    }
    return worst;
}

namespace {

void grid_rec(int n, int pos, int left, int m, std::vector<int>& parts,
              std::vector<SimplexVector>& out, std::int64_t cap) {
    if (static_cast<std::int64_t>(out.size()) > cap)
        throw std::runtime_error("simplex_grid: grid too large");
    if (pos == n - 1) {
        parts[pos] = left;
        Vector v(n);
        for (int i = 0; i < n; ++i) v[i] = static_cast<double>(parts[i]) / m;
        out.push_back(SimplexVector(std::move(v)));
        return;
    }
    for (int take = 0; take <= left; ++take) {
        parts[pos] = take;
        grid_rec(n, pos + 1, left - take, m, parts, out, cap);
    }
}

}  // namespace

std::vector<SimplexVector> simplex_grid(int n, double step, std::int64_t cap) {
    int m = static_cast<int>(std::round(1.0 / step));
    if (m < 1) throw std::invalid_argument("simplex_grid: step too large");
    std::vector<SimplexVector> out;
    std::vector<int> parts(n, 0);
    grid_rec(n, 0, m, m, parts, out, cap);
    return out;
}

double f_ll_constant(const std::string& family, int n, int degree, double alpha, double lambda,
                     double safety) {
    double lam = std::max(lambda, 1e-6);
    double base;
    if (family == "bup") {
        base = std::pow(3.0 * n * degree, degree / 2.0 + 2.0) /
               (std::pow(alpha, degree) * lam * lam);
    } else if (family == "bmlp") {
        base = n * std::pow(static_cast<double>(degree), 2.0 * degree) * 10.0 /
               (lam * std::pow(alpha, degree));
    } else if (family == "bnmp") {
        base = bnmp_condition(n, degree, alpha).first * n / lam;
    } else if (family == "sfr") {
        base = 8.0 * degree * n / (lam * alpha);
    } else {
        throw std::invalid_argument("f_ll_constant: unknown family '" + family + "'");
    }
    return safety * base;
}

}  // namespace menurec
