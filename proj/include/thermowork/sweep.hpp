// sweep.hpp - ordered parallel sweeps, resumable CSV journals, contours
#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "thermowork/csv.hpp"

namespace thermowork {

/// Rows produced by one unit of work; every unit of a sweep emits the same
/// number of rows so that a partially written journal maps back to units.
using UnitRows = std::vector<CsvRow>;
using UnitFn = std::function<UnitRows(std::size_t unit)>;
using UnitErrorFn = std::function<UnitRows(std::size_t unit, const std::string& message)>;
using UnitSink = std::function<void(std::size_t unit, const UnitRows& rows)>;

struct SweepOptions {
  std::size_t jobs = 0;        // 0 selects the hardware concurrency
  std::size_t first_unit = 0;  // units before this are skipped (resume)
};

struct SweepStats {
  std::size_t units = 0;
  std::size_t computed = 0;
  std::size_t failed = 0;
};

std::size_t default_jobs();

/// Evaluates units [first_unit, units) on a worker pool and hands results to
/// `sink` strictly in unit order from the calling thread. Exceptions thrown
/// by `compute` are turned into rows by `on_error`.
SweepStats run_sweep(std::size_t units, const UnitFn& compute, const UnitErrorFn& on_error,
                     const UnitSink& sink, const SweepOptions& options = {});

struct ResumeState {
  std::size_t completed_units = 0;
  bool header_present = false;
};

/// Uses an existing CSV output as a journal: checks the header, drops any
/// incomplete trailing unit and reports how many units are done. A missing or
/// empty file resumes from zero. Throws InputError on a header mismatch.
ResumeState prepare_resume(const std::string& path, const CsvRow& header,
                           std::size_t rows_per_unit);

struct ContourPoint {
  double x = 0.0;
  double y = 0.0;
};
using Polyline = std::vector<ContourPoint>;

/// Marching-squares iso-lines of z (xs.size() x ys.size()) at `level`,
/// joined into polylines. Cells touching a NaN are skipped; saddles are
/// resolved with the cell-centre average.
std::vector<Polyline> contour_lines(const std::vector<double>& xs, const std::vector<double>& ys,
                                    const Eigen::MatrixXd& z, double level);

}  // namespace thermowork
