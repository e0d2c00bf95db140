#pragma once

#include <cstdio>
#include <string>

#include "qfc/errors.hpp"
#include "qfc/fockspace.hpp"
#include "qfc/gridsim.hpp"

namespace qfc {

// Deterministic RFC-4180-style CSV output: '.' decimal point, LF line ends,
// fixed %.12g formatting. Byte-stable across runs and worker counts.
class CsvWriter {
 public:
    explicit CsvWriter(const std::string& path) : f_(std::fopen(path.c_str(), "wb")) {
        if (!f_) throw InvalidInputError("cannot open output file: " + path);
    }
    ~CsvWriter() {
        if (f_) std::fclose(f_);
    }
    CsvWriter(const CsvWriter&) = delete;
    CsvWriter& operator=(const CsvWriter&) = delete;

    void header(const std::string& line) { std::fprintf(f_, "%s\n", line.c_str()); }

    void field(double v) {
        if (col_++ > 0) std::fputc(',', f_);
        std::fprintf(f_, "%.12g", v);
    }

    void end_row() {
        std::fputc('\n', f_);
        col_ = 0;
    }

    template <typename... Ts>
    void row(Ts... vs) {
        (field(static_cast<double>(vs)), ...);
        end_row();
    }

 private:
    std::FILE* f_;
    int col_ = 0;
};

namespace grid {

inline void write_series_csv(const std::string& path, const GridTrajectoryResult& res) {
    CsvWriter w(path);
    w.header("tau,norm,q,p,varq,varp,cov,skewq,energy");
    for (const auto& pt : res.series)
        w.row(pt.tau, pt.e.norm, pt.e.q, pt.e.p, pt.e.varq, pt.e.varp, pt.e.cov, pt.e.skew_q,
              pt.e.energy);
}

inline void write_snapshot_csv(const std::string& path, const GridGeometry& geom,
                               const GridSnapshot& snap) {
    CsvWriter w(path);
    w.header("q,density");
    for (int j = 0; j < geom.n_points; ++j)
        w.row(geom.q_at(j), snap.density[static_cast<std::size_t>(j)]);
}

}  // namespace grid

namespace fock {

inline void write_series_csv(const std::string& path, const FockRunResult& res) {
    CsvWriter w(path);
    w.header("t,n_mean,trace,purity,leak");
    for (const auto& pt : res.series) w.row(pt.t, pt.n_mean, pt.trace, pt.purity, pt.leak);
}

}  // namespace fock

}  // namespace qfc
