// snapshot_io.hpp
// File formats: grid snapshots (header + one value per line, row-major) and
// the trajectory/compactness CSVs. All floats printed with 17 significant
// digits so re-parsing is lossless.

#ifndef MOBCH_SNAPSHOT_IO_HPP
#define MOBCH_SNAPSHOT_IO_HPP

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "mobch/ensemble.hpp"
#include "mobch/errors.hpp"
#include "mobch/grid.hpp"

namespace mobch {

namespace detail {
inline std::string fmt17(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}
} // namespace detail

struct Snapshot {
    GridFunction field;
    double t = 0.0;
};

inline void write_snapshot(const std::string& path, const GridFunction& v,
                           double t) {
    std::ofstream out(path);
    if (!out) throw Error("write_snapshot: cannot open " + path);
    out << "# mobch-snapshot dim=" << v.grid.dim << " n=" << v.grid.n_cells
        << " h=" << detail::fmt17(v.grid.h) << " t=" << detail::fmt17(t) << "\n";
    for (double x : v.values) out << detail::fmt17(x) << "\n";
    if (!out) throw Error("write_snapshot: write failed for " + path);
}

inline Snapshot read_snapshot(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("read_snapshot: cannot open " + path);
    std::string header;
    std::getline(in, header);
    int dim = 0, n = 0;
    double h = 0.0, t = 0.0;
    if (std::sscanf(header.c_str(), "# mobch-snapshot dim=%d n=%d h=%lf t=%lf",
                    &dim, &n, &h, &t) != 4)
        throw Error("read_snapshot: malformed header in " + path);
    const Grid g(dim, n, h);
    std::vector<double> vals;
    vals.reserve(g.cell_count());
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        vals.push_back(std::strtod(line.c_str(), nullptr));
    }
    if (vals.size() != g.cell_count())
        throw Error("read_snapshot: value count mismatch in " + path);
    return Snapshot{GridFunction(g, std::move(vals)), t};
}

/// Per-snapshot series of a run, as written to trajectory.csv.
struct TrajectorySeries {
    std::vector<double> t, mass, energy, energy_n, entropy, h2_norm;
    std::vector<long> newton_iters;
    std::size_t size() const { return t.size(); }
};

inline void write_trajectory_csv(const std::string& path,
                                 const TrajectorySeries& s) {
    std::ofstream out(path);
    if (!out) throw Error("write_trajectory_csv: cannot open " + path);
    out << "t,mass,energy,energy_n,entropy,h2_norm,newton_iters\n";
    for (std::size_t k = 0; k < s.size(); ++k)
        out << detail::fmt17(s.t[k]) << ',' << detail::fmt17(s.mass[k]) << ','
            << detail::fmt17(s.energy[k]) << ',' << detail::fmt17(s.energy_n[k])
            << ',' << detail::fmt17(s.entropy[k]) << ','
            << detail::fmt17(s.h2_norm[k]) << ',' << s.newton_iters[k] << "\n";
    if (!out) throw Error("write_trajectory_csv: write failed for " + path);
}

inline TrajectorySeries read_trajectory_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("read_trajectory_csv: cannot open " + path);
    std::string line;
    std::getline(in, line); // header
    if (line != "t,mass,energy,energy_n,entropy,h2_norm,newton_iters")
        throw Error("read_trajectory_csv: unexpected header in " + path);
    TrajectorySeries s;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(row, cell, ',')) cells.push_back(cell);
        if (cells.size() != 7)
            throw Error("read_trajectory_csv: bad row in " + path);
        s.t.push_back(std::strtod(cells[0].c_str(), nullptr));
        s.mass.push_back(std::strtod(cells[1].c_str(), nullptr));
        s.energy.push_back(std::strtod(cells[2].c_str(), nullptr));
        s.energy_n.push_back(std::strtod(cells[3].c_str(), nullptr));
        s.entropy.push_back(std::strtod(cells[4].c_str(), nullptr));
        s.h2_norm.push_back(std::strtod(cells[5].c_str(), nullptr));
        s.newton_iters.push_back(std::strtol(cells[6].c_str(), nullptr, 10));
    }
    return s;
}

inline void write_compactness_csv(const std::string& path,
                                  const CompactnessReport& rep) {
    std::ofstream out(path);
    if (!out) throw Error("write_compactness_csv: cannot open " + path);
    out << "t,rho,covering_number,diameter,max_residual\n";
    for (std::size_t k = 0; k < rep.sample_times.size(); ++k)
        for (std::size_t r = 0; r < rep.rho_values.size(); ++r)
            out << detail::fmt17(rep.sample_times[k]) << ','
                << detail::fmt17(rep.rho_values[r]) << ',' << rep.covering[k][r]
                << ',' << detail::fmt17(rep.diameter[k]) << ','
                << detail::fmt17(rep.max_residual[k]) << "\n";
    if (!out) throw Error("write_compactness_csv: write failed for " + path);
}

} // namespace mobch

#endif
