#include "stoptime/fixture.hpp"

#include <fstream>
#include <random>

#include <Eigen/Eigenvalues>

namespace stoptime {

namespace {

using nlohmann::json;

json matrix_to_json(const CMatrix& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            row.push_back(json::array({m(i, j).real(), m(i, j).imag()}));
        rows.push_back(std::move(row));
    }
    return rows;
}

CMatrix matrix_from_json(const json& j, const std::string& where) {
    if (!j.is_array() || j.empty())
        throw ParseError(where + ": expected a nonempty list of rows");
    const std::size_t rows = j.size();
    const std::size_t cols = j[0].size();
    CMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < rows; ++i) {
        if (!j[i].is_array() || j[i].size() != cols)
            throw ParseError(where + ": ragged matrix rows");
        for (std::size_t k = 0; k < cols; ++k) {
            const json& cell = j[i][k];
            if (!cell.is_array() || cell.size() != 2)
                throw ParseError(where + ": entries must be [re, im] pairs");
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
                Complex(cell[0].get<double>(), cell[1].get<double>());
        }
    }
    return m;
}

// Basis of M_{n_1·…·n_k} ⊗ 1 inside the full tensor-chain space.
std::vector<CMatrix> tensor_prefix_span(const std::vector<Eigen::Index>& chain,
                                        std::size_t prefix_len) {
    Eigen::Index head = 1, tail = 1;
    for (std::size_t i = 0; i < chain.size(); ++i)
        (i < prefix_len ? head : tail) *= chain[i];
    std::vector<CMatrix> out;
    const CMatrix tail_id = CMatrix::Identity(tail, tail);
    for (Eigen::Index i = 0; i < head; ++i)
        for (Eigen::Index j = 0; j < head; ++j) {
            CMatrix e = CMatrix::Zero(head, head);
            e(i, j) = 1.0;
            out.push_back(kron(e, tail_id));
        }
    return out;
}

} // namespace

json FixtureConfig::to_json() const {
    json j;
    j["schema_version"] = schema_version;
    j["name"] = name;
    if (!tensor_chain.empty()) {
        j["ambient"]["tensor_chain"] = tensor_chain;
    } else {
        j["ambient"]["dimension"] = ambient_dim;
        json gens = json::array();
        for (const auto& list : algebra_generators) {
            json inner = json::array();
            for (const auto& g : list) inner.push_back(matrix_to_json(g));
            gens.push_back(std::move(inner));
        }
        j["ambient"]["algebras"] = std::move(gens);
    }
    if (!product_diagonals.empty())
        j["state"]["product_diagonals"] = product_diagonals;
    else if (rho)
        j["state"]["rho"] = matrix_to_json(*rho);
    j["grid"] = grid;
    if (random_seed) {
        j["stopping_time"]["random_adapted"]["seed"] = *random_seed;
    } else {
        json q = json::object();
        for (const auto& [idx, m] : q_explicit) q[std::to_string(idx)] = matrix_to_json(m);
        j["stopping_time"]["q"] = std::move(q);
    }
    j["tolerance"] = {{"eq_tol", tol.eq_tol}, {"rank_tol", tol.rank_tol}};
    return j;
}

FixtureConfig FixtureConfig::from_json(const json& j) {
    FixtureConfig c;
    try {
        c.schema_version = j.at("schema_version").get<int>();
        if (c.schema_version != 1)
            throw ParseError("unsupported schema_version");
        c.name = j.value("name", std::string("unnamed"));
        const json& ambient = j.at("ambient");
        if (ambient.contains("tensor_chain")) {
            for (const auto& v : ambient.at("tensor_chain"))
                c.tensor_chain.push_back(v.get<Eigen::Index>());
        } else {
            c.ambient_dim = ambient.at("dimension").get<Eigen::Index>();
            for (const auto& list : ambient.at("algebras")) {
                std::vector<CMatrix> gens;
                for (const auto& g : list) gens.push_back(matrix_from_json(g, "ambient.algebras"));
                c.algebra_generators.push_back(std::move(gens));
            }
        }
        const json& state = j.at("state");
        if (state.contains("product_diagonals"))
            c.product_diagonals =
                state.at("product_diagonals").get<std::vector<std::vector<double>>>();
        else
            c.rho = matrix_from_json(state.at("rho"), "state.rho");
        c.grid = j.at("grid").get<std::vector<double>>();
        const json& st = j.at("stopping_time");
        if (st.contains("random_adapted")) {
            c.random_seed = st.at("random_adapted").at("seed").get<std::uint64_t>();
        } else {
            for (const auto& [key, val] : st.at("q").items())
                c.q_explicit[std::stoul(key)] = matrix_from_json(val, "stopping_time.q." + key);
        }
        if (j.contains("tolerance")) {
            c.tol.eq_tol = j["tolerance"].value("eq_tol", c.tol.eq_tol);
            c.tol.rank_tol = j["tolerance"].value("rank_tol", c.tol.rank_tol);
        }
    } catch (const json::exception& e) {
        throw ParseError(std::string("fixture config: ") + e.what());
    }
    return c;
}

std::string fingerprint(const FixtureConfig& config) {
    const std::string dump = config.to_json().dump();
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char ch : dump) {
        h ^= ch;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

LoadedFixture build_fixture(const FixtureConfig& config) {
    config.tol.validate();
    TimeGrid grid{config.grid};
    grid.validate();

    Eigen::Index n = 0;
    std::vector<MatrixAlgebra> algebras;
    if (!config.tensor_chain.empty()) {
        n = 1;
        for (Eigen::Index b : config.tensor_chain) {
            if (b < 2) throw ValidationError("tensor_chain: block sizes must be >= 2");
            n *= b;
        }
        if (grid.size() != config.tensor_chain.size() + 1)
            throw ValidationError("tensor_chain: grid must have one point per prefix plus 0");
        for (std::size_t i = 0; i < grid.size(); ++i)
            algebras.push_back(
                MatrixAlgebra::from_span(n, tensor_prefix_span(config.tensor_chain, i),
                                         config.tol));
    } else {
        n = config.ambient_dim;
        if (n < 1) throw ValidationError("ambient dimension must be positive");
        if (config.algebra_generators.size() != grid.size())
            throw ValidationError("one generator list required per grid point");
        for (const auto& gens : config.algebra_generators)
            algebras.push_back(MatrixAlgebra::generate(n, gens, config.tol));
    }

    CMatrix rho;
    if (!config.product_diagonals.empty()) {
        if (config.tensor_chain.empty() ||
            config.product_diagonals.size() != config.tensor_chain.size())
            throw ValidationError("product_diagonals: one diagonal per tensor factor required");
        rho = CMatrix::Identity(1, 1);
        for (std::size_t i = 0; i < config.product_diagonals.size(); ++i) {
            const auto& d = config.product_diagonals[i];
            if (static_cast<Eigen::Index>(d.size()) != config.tensor_chain[i])
                throw ValidationError("product_diagonals: length mismatch at factor " +
                                      std::to_string(i));
            CMatrix factor = CMatrix::Zero(static_cast<Eigen::Index>(d.size()),
                                           static_cast<Eigen::Index>(d.size()));
            for (std::size_t k = 0; k < d.size(); ++k)
                factor(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)) = d[k];
            rho = kron(rho, factor);
        }
    } else if (config.rho) {
        rho = *config.rho;
    } else {
        throw ValidationError("fixture: no state given");
    }
    if (rho.rows() != n)
        throw ValidationError("state dimension does not match the ambient space");

    auto gns = std::make_shared<const GnsSpace>(
        GnsSpace::build(algebras.back(), FaithfulState::make(rho, config.tol), config.tol));
    auto filtration = Filtration::build(gns, grid, std::move(algebras));

    LoadedFixture out{config, filtration, std::nullopt, fingerprint(config)};
    if (config.random_seed) {
        out.stopping_time = random_adapted_stopping_time(filtration, *config.random_seed);
    } else {
        std::vector<CMatrix> q(grid.size());
        q.front() = CMatrix::Zero(n, n);
        q.back() = CMatrix::Identity(n, n);
        for (const auto& [idx, m] : config.q_explicit) {
            if (idx >= grid.size())
                throw ValidationError("stopping_time.q: index beyond grid");
            q[idx] = m;
        }
        for (std::size_t i = 1; i + 1 < q.size(); ++i)
            if (q[i].size() == 0)
                throw ValidationError("stopping_time.q: missing value at index " +
                                      std::to_string(i));
        if (config.q_explicit.count(0) && op_norm(q.front()) > config.tol.eq_tol)
            throw ValidationError("q_0 = 0 violated");
        out.stopping_time = StoppingTime::build(filtration, std::move(q));
    }
    return out;
}

LoadedFixture load_fixture(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open fixture file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ParseError(std::string("fixture file ") + path + ": " + e.what());
    }
    return build_fixture(FixtureConfig::from_json(j));
}

StoppingTime random_adapted_stopping_time(std::shared_ptr<const Filtration> filtration,
                                          std::uint64_t seed) {
    const auto& f = *filtration;
    const Tolerance tol = f.tol();
    const Eigen::Index n = f.gns().algebra().ambient_dim();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> dist(0.0, 1.0);

    std::vector<CMatrix> q;
    q.push_back(CMatrix::Zero(n, n));
    for (std::size_t i = 1; i + 1 < f.steps(); ++i) {
        const auto& alg = f.algebra_at(i);
        // Seeded random Hermitian in A_{t_i}.
        CMatrix h = CMatrix::Zero(n, n);
        for (const auto& b : alg.basis()) h += Complex(dist(rng), dist(rng)) * b;
        h = ((h + h.adjoint()) / 2.0).eval();
        // Compress to range(1 − q_prev) and threshold at the spectral midpoint.
        const CMatrix rest = CMatrix::Identity(n, n) - q.back();
        Eigen::SelfAdjointEigenSolver<CMatrix> rest_es(rest);
        Eigen::Index zero = 0;
        while (zero < n && rest_es.eigenvalues()(zero) < 0.5) ++zero;
        const CMatrix k = rest_es.eigenvectors().rightCols(n - zero);
        CMatrix r = CMatrix::Zero(n, n);
        if (k.cols() > 0) {
            Eigen::SelfAdjointEigenSolver<CMatrix> es(k.adjoint() * h * k);
            const auto& lam = es.eigenvalues();
            const double mid = (lam(0) + lam(lam.size() - 1)) / 2.0;
            // Keep eigenvalues above the midpoint and clear of zero, so the
            // increment is a genuine spectral projection of an algebra element.
            const double guard = tol.rank_tol * std::max(1.0, lam.cwiseAbs().maxCoeff());
            std::vector<Eigen::Index> keep;
            for (Eigen::Index j = 0; j < lam.size(); ++j)
                if (lam(j) > mid && std::abs(lam(j)) > guard) keep.push_back(j);
            for (Eigen::Index j : keep) {
                const CVector v = k * es.eigenvectors().col(j);
                r += v * v.adjoint();
            }
        }
        q.push_back(q.back() + r);
    }
    q.push_back(CMatrix::Identity(n, n));
    return StoppingTime::build(std::move(filtration), std::move(q));
}

StoppingTime deterministic_stopping_time(std::shared_ptr<const Filtration> filtration,
                                         std::size_t jump_index) {
    const auto& f = *filtration;
    if (jump_index == 0 || jump_index >= f.steps())
        throw ValidationError("deterministic_stopping_time: jump index out of range");
    const Eigen::Index n = f.gns().algebra().ambient_dim();
    std::vector<CMatrix> q;
    for (std::size_t i = 0; i < f.steps(); ++i)
        q.push_back(i < jump_index ? CMatrix(CMatrix::Zero(n, n))
                                   : CMatrix(CMatrix::Identity(n, n)));
    return StoppingTime::build(std::move(filtration), std::move(q));
}

FixtureConfig f1_config() {
    FixtureConfig c;
    c.name = "f1";
    c.tensor_chain = {2, 2};
    c.product_diagonals = {{2.0 / 3.0, 1.0 / 3.0}, {2.0 / 3.0, 1.0 / 3.0}};
    c.grid = {0.0, 1.0, 2.0};
    CMatrix e11 = CMatrix::Zero(2, 2);
    e11(0, 0) = 1.0;
    c.q_explicit[1] = kron(e11, CMatrix::Identity(2, 2));
    return c;
}

} // namespace stoptime
