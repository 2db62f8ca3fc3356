#include "kbahc/matrix_core.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "kbahc/errors.hpp"

namespace kbahc {

std::string_view to_string(MatrixRole role) {
    switch (role) {
        case MatrixRole::Covariance: return "covariance";
        case MatrixRole::Correlation: return "correlation";
        case MatrixRole::Residue: return "residue";
        case MatrixRole::Generic: break;
    }
    return "generic";
}

SymmetricMatrix::SymmetricMatrix(const Eigen::MatrixXd& m, MatrixRole role,
                                 std::vector<std::string> labels)
    : role_(role), labels_(std::move(labels)) {
    if (m.rows() != m.cols()) throw NumericError("symmetric matrix must be square");
    if (!labels_.empty() && static_cast<Eigen::Index>(labels_.size()) != m.rows())
        throw ConfigError("label count does not match matrix dimension");
    m_ = 0.5 * (m + m.transpose());
}

SymmetricMatrix SymmetricMatrix::with_role(MatrixRole role) const {
    SymmetricMatrix out = *this;
    out.role_ = role;
    return out;
}

SymmetricMatrix SymmetricMatrix::with_labels(std::vector<std::string> labels) const {
    return SymmetricMatrix(m_, role_, std::move(labels));
}

void SymmetricMatrix::check_role(double tol) const {
    if (!m_.allFinite()) throw NumericError("matrix has non-finite entries");
    const Eigen::Index n = dim();
    if (role_ == MatrixRole::Correlation) {
        for (Eigen::Index i = 0; i < n; ++i) {
            if (std::abs(m_(i, i) - 1.0) > tol)
                throw NumericError("correlation diagonal entry " + std::to_string(i) + " is " +
                                   std::to_string(m_(i, i)));
        }
        if (m_.cwiseAbs().maxCoeff() > 1.0 + tol)
            throw NumericError("correlation entry exceeds 1 in absolute value");
    } else if (role_ == MatrixRole::Covariance) {
        if (n > 0 && m_.diagonal().minCoeff() < 0.0)
            throw NumericError("covariance has a negative variance");
    }
}

SymmetricMatrix sample_covariance(const Eigen::MatrixXd& returns) {
    if (returns.cols() < 2)
        throw NumericError("sample covariance needs at least 2 observations, got " +
                           std::to_string(returns.cols()));
    if (!returns.allFinite()) throw NumericError("returns contain non-finite values");
    const double t = static_cast<double>(returns.cols());
    const Eigen::MatrixXd centered = returns.colwise() - returns.rowwise().mean();
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(returns.rows(), returns.rows());
    cov.selfadjointView<Eigen::Lower>().rankUpdate(centered, 1.0 / t);
    cov.triangularView<Eigen::StrictlyUpper>() = cov.transpose();
    return SymmetricMatrix(cov, MatrixRole::Covariance);
}

SymmetricMatrix to_correlation(const SymmetricMatrix& cov) {
    const Eigen::Index n = cov.dim();
    Eigen::VectorXd inv_sd(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double v = cov(i, i);
        if (!(v > 0.0)) {
            const std::string name =
                cov.labels().empty() ? "#" + std::to_string(i) : cov.labels()[i];
            throw NumericError("degenerate asset " + name + ": variance " + std::to_string(v) +
                               " is not positive");
        }
        inv_sd(i) = 1.0 / std::sqrt(v);
    }
    Eigen::MatrixXd c = inv_sd.asDiagonal() * cov.matrix() * inv_sd.asDiagonal();
    c.diagonal().setOnes();
    return SymmetricMatrix(c, MatrixRole::Correlation, cov.labels());
}

SymmetricMatrix to_covariance(const SymmetricMatrix& corr, const Eigen::VectorXd& variances) {
    const Eigen::Index n = corr.dim();
    if (variances.size() != n) throw ConfigError("variance count does not match dimension");
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!(variances(i) > 0.0))
            throw NumericError("variance of asset #" + std::to_string(i) + " is not positive");
    }
    const Eigen::VectorXd sd = variances.cwiseSqrt();
    Eigen::MatrixXd s = sd.asDiagonal() * corr.matrix() * sd.asDiagonal();
    s.diagonal() = corr.matrix().diagonal().cwiseProduct(variances);
    return SymmetricMatrix(s, MatrixRole::Covariance, corr.labels());
}

EigenSystem eigendecompose(const SymmetricMatrix& m) {
    if (!m.matrix().allFinite()) throw NumericError("eigendecomposition of non-finite matrix");
    const Eigen::Index n = m.dim();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m.matrix());
    if (solver.info() != Eigen::Success) throw NumericError("eigensolver did not converge");

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    const Eigen::VectorXd& vals = solver.eigenvalues();
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return vals(a) > vals(b); });

    EigenSystem es{Eigen::VectorXd(n), Eigen::MatrixXd(n, n)};
    for (Eigen::Index k = 0; k < n; ++k) {
        const Eigen::Index src = order[static_cast<std::size_t>(k)];
        es.values(k) = vals(src);
        es.vectors.col(k) = solver.eigenvectors().col(src);
    }
    return es;
}

SymmetricMatrix clip_negative_eigenvalues(const SymmetricMatrix& m, bool* clipped) {
    const EigenSystem es = eigendecompose(m);
    const Eigen::Index n = m.dim();
    if (n == 0 || es.values(n - 1) >= 0.0) {
        if (clipped) *clipped = false;
        return m;
    }
    if (clipped) *clipped = true;
    const Eigen::VectorXd kept = es.values.cwiseMax(0.0);
    const Eigen::MatrixXd rebuilt = es.vectors * kept.asDiagonal() * es.vectors.transpose();
    return SymmetricMatrix(rebuilt, m.role(), m.labels());
}

double diagonal_drift(const SymmetricMatrix& m) {
    if (m.dim() == 0) return 0.0;
    return (m.matrix().diagonal().array() - 1.0).abs().maxCoeff();
}

std::string format_double(double v) {
    if (std::isnan(v)) return "NaN";
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

std::string format_matrix(const SymmetricMatrix& m) {
    const Eigen::Index n = m.dim();
    auto label = [&](Eigen::Index i) {
        return m.labels().empty() ? "a" + std::to_string(i) : m.labels()[i];
    };
    std::string out = "asset";
    for (Eigen::Index j = 0; j < n; ++j) out += "," + label(j);
    out += '\n';
    for (Eigen::Index i = 0; i < n; ++i) {
        out += label(i);
        for (Eigen::Index j = 0; j < n; ++j) out += "," + format_double(m(i, j));
        out += '\n';
    }
    return out;
}

void write_matrix(const SymmetricMatrix& m, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    out << format_matrix(m);
}

SymmetricMatrix parse_matrix(std::string_view csv, MatrixRole role) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in{std::string(csv)};
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (!line.empty() && line.back() == ',') cells.emplace_back();
        rows.push_back(std::move(cells));
    }
    if (rows.empty()) throw DataError("empty matrix file");
    const std::size_t n = rows[0].size() - 1;
    if (rows.size() != n + 1) throw DataError("matrix CSV is not square");
    std::vector<std::string> labels(rows[0].begin() + 1, rows[0].end());
    Eigen::MatrixXd m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const auto& r = rows[i + 1];
        if (r.size() != n + 1)
            throw DataError("matrix row " + std::to_string(i + 2) + " has " +
                            std::to_string(r.size()) + " cells, expected " +
                            std::to_string(n + 1));
        if (r[0] != labels[i])
            throw DataError("row label '" + r[0] + "' does not match column label '" +
                            labels[i] + "'");
        for (std::size_t j = 0; j < n; ++j) {
            const std::string& c = r[j + 1];
            double v = 0.0;
            auto [ptr, ec] = std::from_chars(c.data(), c.data() + c.size(), v);
            if (ec != std::errc{} || ptr != c.data() + c.size())
                throw DataError("non-numeric matrix cell '" + c + "' at line " +
                                std::to_string(i + 2) + ", column " + std::to_string(j + 2));
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
        }
    }
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-9)
        throw DataError("matrix is not symmetric within 1e-9");
    return SymmetricMatrix(m, role, std::move(labels));
}

SymmetricMatrix load_matrix(const std::filesystem::path& path, MatrixRole role) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_matrix(buffer.str(), role);
}

}  // namespace kbahc
