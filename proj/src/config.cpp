#include "geokernel/config.hpp"

#include "geokernel/errors.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace geokernel {

namespace pt = boost::property_tree;

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return {};
    return s.substr(b, s.find_last_not_of(" \t") - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
    const std::string t = trim(v);
    if (t == "inf" || t == "infinity") return kInf;
    try {
        std::size_t used = 0;
        const double x = std::stod(t, &used);
        if (used != t.size()) throw std::invalid_argument(t);
        return x;
    } catch (const std::exception&) {
        throw ValidationError("config: " + key + " = '" + v + "' is not a number");
    }
}

std::uint64_t to_uint(const std::string& key, const std::string& v) {
    const std::string t = trim(v);
    if (t.empty() || t.find_first_not_of("0123456789") != std::string::npos) {
        throw ValidationError("config: " + key + " = '" + v + "' is not a nonnegative integer");
    }
    try {
        return std::stoull(t);
    } catch (const std::exception&) {
        throw ValidationError("config: " + key + " = '" + v + "' is out of range");
    }
}

std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(trim(item));
    return out;
}

bool to_bool(const std::string& key, const std::string& v) {
    const std::string t = trim(v);
    if (t == "true" || t == "1" || t == "yes") return true;
    if (t == "false" || t == "0" || t == "no") return false;
    throw ValidationError("config: " + key + " = '" + v + "' is not a boolean");
}

class Reader {
public:
    explicit Reader(const pt::ptree& tree) : tree_(tree) {}

    std::optional<std::string> raw(const std::string& key) const {
        if (auto v = tree_.get_optional<std::string>(pt::ptree::path_type(key, '.'))) return trim(*v);
        return std::nullopt;
    }
    double num(const std::string& key, double def) const {
        auto v = raw(key);
        return v ? to_double(key, *v) : def;
    }
    std::uint64_t uint(const std::string& key, std::uint64_t def) const {
        auto v = raw(key);
        return v ? to_uint(key, *v) : def;
    }
    std::string str(const std::string& key, const std::string& def) const { return raw(key).value_or(def); }
    bool flag(const std::string& key, bool def) const {
        auto v = raw(key);
        return v ? to_bool(key, *v) : def;
    }
    template <class T>
    std::vector<T> uints(const std::string& key, std::vector<T> def) const {
        auto v = raw(key);
        if (!v) return def;
        std::vector<T> out;
        for (const auto& item : split_list(*v)) out.push_back(static_cast<T>(to_uint(key, item)));
        return out;
    }

private:
    const pt::ptree& tree_;
};

// Broadcasts a single entry to all K*K type pairs.
template <class T>
std::vector<T> per_pair(std::vector<T> v, std::size_t K, const std::string& key) {
    if (v.size() == 1) return std::vector<T>(K * K, v.front());
    if (v.size() != K * K) {
        throw ValidationError("config: " + key + " needs 1 or " + std::to_string(K * K) + " entries");
    }
    return v;
}

}  // namespace

ExperimentConfig ExperimentConfig::parse(const std::string& text) {
    pt::ptree tree;
    try {
        std::istringstream in(text);
        pt::ini_parser::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ValidationError(std::string("config: ") + e.what());
    }
    const Reader r(tree);
    ExperimentConfig c;

    const std::string kind = r.str("manifold.kind", "sphere");
    const double cap = r.num("manifold.interaction_cap", kind == "sphere" ? 5.0 : kInf);
    if (kind == "sphere") {
        c.manifold = ManifoldDescriptor::sphere(r.num("manifold.radius", 5.0 / std::numbers::pi), cap);
    } else if (kind == "poincare") {
        const std::string conv = r.str("manifold.convention", "paper");
        DistanceConvention dc;
        if (conv == "paper") dc = DistanceConvention::PaperFormula;
        else if (conv == "factor2") dc = DistanceConvention::Factor2;
        else throw ValidationError("config: manifold.convention must be paper or factor2");
        c.manifold = ManifoldDescriptor::poincare(dc, cap);
    } else if (kind == "euclidean") {
        c.manifold = ManifoldDescriptor::euclidean(static_cast<int>(r.uint("manifold.dim", 2)));
        c.manifold.interaction_cap = cap;
    } else {
        throw ValidationError("config: manifold.kind must be sphere, poincare or euclidean");
    }

    c.dynamics = r.str("dynamics.kernel", "od");
    c.lj_epsilon = r.num("dynamics.epsilon", 10.0);
    c.lj_sigma = r.num("dynamics.sigma", 1.0);
    c.kernel_file = r.str("dynamics.file", "");
    if (r.raw("dynamics.type_counts")) {
        c.type_counts = r.uints<std::size_t>("dynamics.type_counts", {});
    } else if (c.dynamics == "ps1") {
        const std::size_t n = r.uint("dynamics.N", 11);
        if (n < 2) throw ValidationError("config: ps1 needs at least one prey and the predator");
        c.type_counts = {n - 1, 1};
    } else {
        c.type_counts = {r.uint("dynamics.N", 20)};
    }

    c.integrator.scheme = parse_scheme(r.str("integrator.scheme", "rk4p"));
    c.integrator.h = r.num("integrator.h", 0.01);

    c.T = r.num("observation.T", 10.0);
    c.L = r.uint("observation.L", 100);
    c.M = r.uint("observation.M", 100);
    c.M_rho = r.uint("observation.M_rho", 0);

    std::string dist_default = "uniform_sphere";
    double size_default = 1.0;
    if (c.manifold.kind == ManifoldKind::PoincareDisk) {
        dist_default = c.dynamics == "ps1" ? "ps1_disk" : "hyperbolic_ball";
        size_default = 5.0;
    } else if (c.manifold.kind == ManifoldKind::Sphere) {
        dist_default = c.dynamics == "ps1" ? "ps1_sphere" : "uniform_sphere";
    } else {
        dist_default = "euclidean_ball";
    }
    c.ic = ICSpec::parse(r.str("initial.distribution", dist_default), r.num("initial.size", size_default));

    const std::size_t K = c.type_counts.size();
    c.basis_n = per_pair(r.uints<std::size_t>("basis.n", {51}), K, "basis.n");
    c.basis_degree = per_pair(r.uints<int>("basis.degree", {1}), K, "basis.degree");
    const std::string range = r.str("basis.range", "observed");
    if (range == "fixed") {
        c.fixed_range = true;
        c.range_lo = r.num("basis.lo", 0.0);
        c.range_hi = r.num("basis.hi", 0.0);
    } else if (range != "observed") {
        throw ValidationError("config: basis.range must be observed or fixed");
    }
    c.smooth = r.flag("basis.smooth", true);

    c.seed = r.uint("run.seed", 1);
    c.threads = static_cast<unsigned>(r.uint("run.threads", 0));
    c.test_ics = r.uint("run.test_ics", 20);
    c.transfer_N = r.uint("run.transfer_N", 40);

    c.study_M = r.uints<std::size_t>("study.M", {32, 128, 512});
    c.study_repeats = r.uint("study.repeats", 3);
    c.study_ref_M = r.uint("study.ref_M", 0);

    c.validate();
    return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("config: cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

void ExperimentConfig::validate() const {
    if (type_counts.empty()) throw ValidationError("config: no agent types");
    for (auto n : type_counts) {
        if (n == 0) throw ValidationError("config: every type needs at least one agent");
    }
    if (N() < 2) throw ValidationError("config: need at least two agents");
    if (dynamics == "ps1" && K() != 2) throw ValidationError("config: ps1 needs exactly two types");
    if ((dynamics == "od" || dynamics == "lj") && K() != 1) {
        throw ValidationError("config: " + dynamics + " is a single-type model");
    }
    if (dynamics == "file" && kernel_file.empty()) throw ValidationError("config: dynamics.file is required");
    integrator.validate();
    if (!(T > 0.0)) throw ValidationError("config: T must be positive");
    if (integrator.h > T) throw ValidationError("config: step size h exceeds T");
    const double steps = T / integrator.h;
    if (std::abs(steps - std::round(steps)) > 1e-9 * std::max(1.0, steps)) {
        throw ValidationError("config: T must be an integer multiple of h");
    }
    if (L < 2) throw ValidationError("config: L must be at least 2");
    if (M < 1) throw ValidationError("config: M must be at least 1");
    const std::size_t K = this->K();
    for (std::size_t k = 0; k < basis_n.size(); ++k) {
        // A self pair of a lone agent never gets a basis.
        const bool lone = k / K == k % K && type_counts[k / K] < 2;
        if (!lone && basis_n[k] < static_cast<std::size_t>(basis_degree[k]) + 1) {
            throw ValidationError("config: basis.n must be at least degree + 1");
        }
    }
    if (fixed_range && !(range_hi > range_lo && range_lo >= 0.0)) {
        throw ValidationError("config: fixed basis range needs 0 <= lo < hi");
    }
    if (study_M.size() < 2 && !study_M.empty()) throw ValidationError("config: study.M needs several values");
    if (study_repeats < 1) throw ValidationError("config: study.repeats must be positive");
    Manifold m(manifold);  // validates the descriptor
    (void)m;
}

std::size_t ExperimentConfig::N() const {
    std::size_t n = 0;
    for (auto c : type_counts) n += c;
    return n;
}

KernelMatrix ExperimentConfig::kernels() const {
    const double cap = manifold.interaction_cap;
    if (dynamics == "od") return KernelMatrix(make_od());
    if (dynamics == "lj") return KernelMatrix(make_lj(lj_epsilon, lj_sigma, cap));
    if (dynamics == "ps1") return make_ps1(cap);
    if (dynamics == "file") {
        std::ifstream in(kernel_file);
        if (!in) throw ValidationError("config: cannot open kernel file " + kernel_file);
        try {
            auto km = KernelMatrix::from_json(nlohmann::json::parse(in));
            if (km.types() != K()) throw ValidationError("config: kernel file has the wrong number of types");
            return km;
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError(std::string("config: kernel file: ") + e.what());
        }
    }
    throw ValidationError("config: unknown dynamics '" + dynamics + "'");
}

ModelSpec ExperimentConfig::model() const {
    return ModelSpec(Manifold(manifold), kernels(), types_from_counts(type_counts));
}

ModelSpec ExperimentConfig::model_with_agents(std::size_t n) const {
    auto counts = type_counts;
    std::size_t others = N() - counts.front();
    if (n <= others) throw ValidationError("config: too few agents for the configured population");
    counts.front() = n - others;
    return ModelSpec(Manifold(manifold), kernels(), types_from_counts(counts));
}

std::vector<std::optional<SplineBasis>> ExperimentConfig::bases(const TrajectoryDataset& ds,
                                                                const std::vector<std::size_t>& n) const {
    const std::size_t K = ds.type_count;
    if (K != this->K()) throw ValidationError("config: dataset types do not match the configuration");
    if (n.size() != K * K) throw ValidationError("config: basis sizes do not match the type count");
    const auto counts = ds.type_counts();
    std::vector<std::optional<SplineBasis>> out(K * K);
    for (std::size_t k = 0; k < K; ++k) {
        for (std::size_t kp = 0; kp < K; ++kp) {
            // A single agent of a type never interacts with its own type.
            if (k == kp && counts[k] < 2) continue;
            double lo = range_lo, hi = range_hi;
            if (!fixed_range) {
                const PairFilter filter = K == 1 ? PairFilter{} : PairFilter{{k, kp}};
                std::tie(lo, hi) = observed_range(ds, filter);
            }
            out[k * K + kp].emplace(lo, hi, n[k * K + kp], basis_degree[k * K + kp]);
        }
    }
    return out;
}

std::vector<std::size_t> ExperimentConfig::study_basis_n(std::size_t m) const {
    if (study_ref_M == 0) return basis_n;
    std::vector<std::size_t> out;
    const double f = std::cbrt(static_cast<double>(m) / static_cast<double>(study_ref_M));
    for (std::size_t k = 0; k < basis_n.size(); ++k) {
        const auto lo = static_cast<std::size_t>(basis_degree[k]) + 1;
        out.push_back(std::max(lo, static_cast<std::size_t>(std::llround(static_cast<double>(basis_n[k]) * f))));
    }
    return out;
}

}  // namespace geokernel
