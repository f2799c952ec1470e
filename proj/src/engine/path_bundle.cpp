#include "riskflow/engine/path_bundle.hpp"

#include <cstdio>
#include <ostream>
#include <utility>

namespace riskflow {

PathBundle::PathBundle(std::size_t n_paths, TimeGrid grid, MarkSet marks, RngSpec rng)
    : n_paths_(n_paths), grid_(grid), marks_(std::move(marks)), rng_(rng) {
    const std::size_t nodes = grid_.nodes() * n_paths_;
    x_.assign(nodes, 0.0);
    y_.assign(nodes, 0.0);
    z_.assign(nodes, 0.0);
    xi_.assign(nodes, 0.0);
    u_.assign(nodes, 0.0);
    r_.assign(nodes * marks_.size(), 0.0);
    dw_.assign(grid_.steps() * n_paths_, 0.0);
    dn_.assign(grid_.steps() * n_paths_ * marks_.size(), 0);
    ledgers_.resize(n_paths_);
}

std::uint64_t PathBundle::path_seed(std::size_t p) const noexcept {
    return derive_seed(rng_.master_seed, 2 * p + static_cast<std::uint64_t>(StreamKind::brownian));
}

namespace {

std::vector<double> column(const std::vector<double>& data, std::size_t n_paths, std::size_t stride, std::size_t k) {
    std::vector<double> out(n_paths);
    for (std::size_t p = 0; p < n_paths; ++p) out[p] = data[p * stride + k];
    return out;
}

void put(std::ostream& out, double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << buf;
}

}  // namespace

std::vector<double> PathBundle::x_at(std::size_t k) const { return column(x_, n_paths_, nodes(), k); }
std::vector<double> PathBundle::y_at(std::size_t k) const { return column(y_, n_paths_, nodes(), k); }
std::vector<double> PathBundle::xi_at(std::size_t k) const { return column(xi_, n_paths_, nodes(), k); }

void write_paths_csv(const PathBundle& paths, std::ostream& out, std::size_t max_paths) {
    const std::size_t m = paths.n_marks();
    out << "path,k,t,x,y,z";
    for (std::size_t i = 0; i < m; ++i) out << ",r_" << i;
    out << ",xi,u\n";
    const std::size_t limit = max_paths == 0 ? paths.n_paths() : std::min(max_paths, paths.n_paths());
    for (std::size_t p = 0; p < limit; ++p) {
        for (std::size_t k = 0; k < paths.nodes(); ++k) {
            out << p << ',' << k << ',';
            put(out, paths.grid().time(k));
            for (double v : {paths.x(p, k), paths.y(p, k), paths.z(p, k)}) {
                out << ',';
                put(out, v);
            }
            for (double v : paths.r(p, k)) {
                out << ',';
                put(out, v);
            }
            out << ',';
            put(out, paths.xi(p, k));
            out << ',';
            put(out, paths.u(p, k));
            out << '\n';
        }
    }
}

}  // namespace riskflow
