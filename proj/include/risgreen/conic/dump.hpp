#pragma once

// Plain-text dump of a ConicProblem for reproducing a solve elsewhere.
//
//   risgreen-conic 1
//   vars <n>
//   objective <c_0> ... <c_{n-1}>
//   blocks <count>
//   block <zero|nonneg|soc|psd> <dim> <rows>
//   offset <v_0> ... <v_{rows-1}>
//   entries <nnz>
//   <row> <col> <value>        (one line per nonzero of the block map, 0-based)
//
// A block constrains offset - map * x to its cone; psd rows use the isometric
// lower-triangle column-major svec. Values are written with 17 significant digits.

#include "risgreen/conic/problem.hpp"

#include <iomanip>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

namespace risgreen::conic {

inline void write_problem(std::ostream& os, const ConicProblem& p) {
    os << std::setprecision(17);
    os << "risgreen-conic 1\n";
    os << "vars " << p.num_vars() << "\n";
    os << "objective";
    for (Eigen::Index i = 0; i < p.num_vars(); ++i) os << ' ' << p.objective(i);
    os << "\nblocks " << p.blocks.size() << "\n";
    for (const auto& b : p.blocks) {
        os << "block " << to_string(b.kind) << ' ' << b.dim << ' ' << b.rows() << "\n";
        os << "offset";
        for (Eigen::Index i = 0; i < b.rows(); ++i) os << ' ' << b.offset(i);
        Eigen::Index nnz = (b.map.array() != 0.0).count();
        os << "\nentries " << nnz << "\n";
        for (Eigen::Index j = 0; j < b.map.cols(); ++j)
            for (Eigen::Index i = 0; i < b.map.rows(); ++i)
                if (b.map(i, j) != 0.0) os << i << ' ' << j << ' ' << b.map(i, j) << "\n";
    }
}

inline ConicProblem read_problem(std::istream& is) {
    auto expect = [&](const char* word) {
        std::string tok;
        if (!(is >> tok) || tok != word) throw std::runtime_error(std::string("conic dump: expected '") + word + "'");
    };
    expect("risgreen-conic");
    int version = 0;
    is >> version;
    if (version != 1) throw std::runtime_error("conic dump: unsupported version");
    ConicProblem p;
    Eigen::Index n = 0;
    expect("vars");
    is >> n;
    p.objective.resize(n);
    expect("objective");
    for (Eigen::Index i = 0; i < n; ++i) is >> p.objective(i);
    std::size_t count = 0;
    expect("blocks");
    is >> count;
    for (std::size_t k = 0; k < count; ++k) {
        expect("block");
        std::string kind;
        Eigen::Index dim = 0, rows = 0;
        is >> kind >> dim >> rows;
        ConeKind ck;
        if (kind == "zero") ck = ConeKind::zero;
        else if (kind == "nonneg") ck = ConeKind::nonneg;
        else if (kind == "soc") ck = ConeKind::soc;
        else if (kind == "psd") ck = ConeKind::psd;
        else throw std::runtime_error("conic dump: unknown cone '" + kind + "'");
        auto& b = p.add_block(ck, dim);
        if (b.rows() != rows) throw std::runtime_error("conic dump: row count mismatch");
        expect("offset");
        for (Eigen::Index i = 0; i < rows; ++i) is >> b.offset(i);
        Eigen::Index nnz = 0;
        expect("entries");
        is >> nnz;
        for (Eigen::Index e = 0; e < nnz; ++e) {
            Eigen::Index i = 0, j = 0;
            double v = 0.0;
            is >> i >> j >> v;
            if (i < 0 || i >= rows || j < 0 || j >= n) throw std::runtime_error("conic dump: entry out of range");
            b.map(i, j) = v;
        }
    }
    if (!is) throw std::runtime_error("conic dump: truncated input");
    return p;
}

}  // namespace risgreen::conic
