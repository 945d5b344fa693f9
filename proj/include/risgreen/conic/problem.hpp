#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace risgreen::conic {

enum class ConeKind { zero, nonneg, soc, psd };

inline const char* to_string(ConeKind kind) {
    switch (kind) {
        case ConeKind::zero: return "zero";
        case ConeKind::nonneg: return "nonneg";
        case ConeKind::soc: return "soc";
        case ConeKind::psd: return "psd";
    }
    return "?";
}

/// Number of stacked entries for a cone of the given dimension (side length for psd).
inline Eigen::Index cone_rows(ConeKind kind, Eigen::Index dim) {
    return kind == ConeKind::psd ? dim * (dim + 1) / 2 : dim;
}

/// One constraint block: offset - map * x must lie in the cone.
///
/// For psd blocks the rows are the isometric svec of a symmetric matrix:
/// lower triangle, column-major, off-diagonal entries scaled by sqrt(2).
struct ConeBlock {
    ConeKind kind = ConeKind::nonneg;
    Eigen::Index dim = 0;
    Eigen::MatrixXd map;
    Eigen::VectorXd offset;

    Eigen::Index rows() const { return cone_rows(kind, dim); }
};

/// minimize c'x subject to offset_i - map_i x in cone_i for every block.
struct ConicProblem {
    Eigen::VectorXd objective;
    std::vector<ConeBlock> blocks;

    Eigen::Index num_vars() const { return objective.size(); }

    ConeBlock& add_block(ConeKind kind, Eigen::Index dim) {
        ConeBlock block;
        block.kind = kind;
        block.dim = dim;
        block.map = Eigen::MatrixXd::Zero(cone_rows(kind, dim), num_vars());
        block.offset = Eigen::VectorXd::Zero(cone_rows(kind, dim));
        blocks.push_back(std::move(block));
        return blocks.back();
    }

    void validate() const {
        const auto n = num_vars();
        if (n == 0) throw std::invalid_argument("conic problem has no variables");
        for (std::size_t i = 0; i < blocks.size(); ++i) {
            const auto& b = blocks[i];
            const auto tag = "block " + std::to_string(i) + " (" + to_string(b.kind) + "): ";
            if (b.dim < 1) throw std::invalid_argument(tag + "dimension must be positive");
            if (b.map.rows() != b.rows() || b.map.cols() != n)
                throw std::invalid_argument(tag + "map has wrong shape");
            if (b.offset.size() != b.rows()) throw std::invalid_argument(tag + "offset has wrong size");
            if (!b.map.allFinite() || !b.offset.allFinite())
                throw std::invalid_argument(tag + "non-finite data");
        }
        if (!objective.allFinite()) throw std::invalid_argument("non-finite objective");
    }
};

enum class ConicStatus { optimal, primal_infeasible, dual_infeasible, numerical_limit };

inline const char* to_string(ConicStatus status) {
    switch (status) {
        case ConicStatus::optimal: return "optimal";
        case ConicStatus::primal_infeasible: return "primal_infeasible";
        case ConicStatus::dual_infeasible: return "dual_infeasible";
        case ConicStatus::numerical_limit: return "numerical_limit";
    }
    return "?";
}

struct Tolerances {
    double feas = 1e-8;
    double gap = 1e-8;
    double reduced = 1e-6;  // accepted at the best iterate if the iteration breaks down
    double step_fraction = 0.99;
    int max_iter = 200;
};

/// Solver output.
///
/// `s` holds the slacks offset - map x and `y` the multipliers, both with one
/// entry per block row in block order (zero-cone multipliers are free). The
/// dual problem is: maximize -offset'y subject to map'y + c = 0, y in K*.
/// For infeasible statuses x/s or y hold the normalized certificate.
struct ConicSolution {
    ConicStatus status = ConicStatus::numerical_limit;
    Eigen::VectorXd x;
    Eigen::VectorXd s;
    Eigen::VectorXd y;
    double primal_objective = 0.0;
    double dual_objective = 0.0;
    double gap = 0.0;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    int iterations = 0;
};

}  // namespace risgreen::conic
