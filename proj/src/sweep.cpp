// sweep.cpp
#include "thermowork/sweep.hpp"

#include <atomic>
#include <cmath>
#include <condition_variable>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include "thermowork/errors.hpp"

namespace thermowork {

std::size_t default_jobs() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : n;
}

SweepStats run_sweep(std::size_t units, const UnitFn& compute, const UnitErrorFn& on_error,
                     const UnitSink& sink, const SweepOptions& options) {
  SweepStats stats;
  stats.units = units;
  if (options.first_unit >= units) return stats;
  const std::size_t todo = units - options.first_unit;
  const std::size_t jobs = std::min(options.jobs == 0 ? default_jobs() : options.jobs, todo);

  std::vector<std::optional<UnitRows>> done(todo);
  std::vector<char> failed(todo, 0);
  std::mutex mtx;
  std::condition_variable ready;
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= todo) return;
      const std::size_t unit = options.first_unit + k;
      UnitRows rows;
      bool bad = false;
      try {
        rows = compute(unit);
      } catch (const std::exception& e) {
        rows = on_error(unit, e.what());
        bad = true;
      }
      {
        std::lock_guard<std::mutex> lock(mtx);
        done[k] = std::move(rows);
        failed[k] = bad ? 1 : 0;
      }
      ready.notify_one();
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(jobs);
  for (std::size_t t = 0; t < jobs; ++t) pool.emplace_back(worker);

  std::exception_ptr sink_error;
  for (std::size_t k = 0; k < todo; ++k) {
    UnitRows rows;
    {
      std::unique_lock<std::mutex> lock(mtx);
      ready.wait(lock, [&] { return done[k].has_value(); });
      rows = std::move(*done[k]);
      done[k].reset();
      stats.failed += failed[k] ? 1 : 0;
    }
    if (sink_error) continue;
    try {
      sink(options.first_unit + k, rows);
      ++stats.computed;
    } catch (...) {
      // Keep draining so the workers can be joined, then rethrow.
      sink_error = std::current_exception();
      next.store(todo);
    }
  }
  for (auto& t : pool) t.join();
  if (sink_error) std::rethrow_exception(sink_error);
  return stats;
}

ResumeState prepare_resume(const std::string& path, const CsvRow& header,
                           std::size_t rows_per_unit) {
  ResumeState state;
  std::ifstream in(path, std::ios::binary);
  if (!in) return state;
  std::ostringstream ss;
  ss << in.rdbuf();
  in.close();
  const std::string text = ss.str();
  if (text.empty()) return state;

  std::optional<std::size_t> tail;
  const auto rows = read_csv(text, &tail);
  if (rows.empty()) {
    // Only a partial header line: start over.
    std::ofstream(path, std::ios::binary | std::ios::trunc);
    return state;
  }
  if (rows.front() != header) {
    throw InputError("cannot resume: '" + path + "' has a different header");
  }
  state.header_present = true;
  const std::size_t data_rows = rows.size() - 1;
  const std::size_t per = rows_per_unit == 0 ? 1 : rows_per_unit;
  state.completed_units = data_rows / per;
  const std::size_t keep = state.completed_units * per;
  if (keep != data_rows || tail) {
    std::string rebuilt = csv_line(header);
    for (std::size_t r = 1; r <= keep; ++r) rebuilt += csv_line(rows[r]);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << rebuilt;
  }
  return state;
}

namespace {

struct Segment {
  std::size_t edge_a, edge_b;
  ContourPoint a, b;
};

}  // namespace

std::vector<Polyline> contour_lines(const std::vector<double>& xs, const std::vector<double>& ys,
                                    const Eigen::MatrixXd& z, double level) {
  const std::size_t nx = xs.size(), ny = ys.size();
  if (static_cast<std::size_t>(z.rows()) != nx || static_cast<std::size_t>(z.cols()) != ny) {
    throw InputError("contour grid shape mismatch");
  }
  std::vector<Polyline> lines;
  if (nx < 2 || ny < 2) return lines;

  // Edge (i,j)-(i+1,j) has id 2(i ny + j); edge (i,j)-(i,j+1) has id 2(i ny + j) + 1.
  auto x_edge = [&](std::size_t i, std::size_t j) { return 2 * (i * ny + j); };
  auto y_edge = [&](std::size_t i, std::size_t j) { return 2 * (i * ny + j) + 1; };
  auto lerp = [&](double z0, double z1) { return (level - z0) / (z1 - z0); };
  auto x_point = [&](std::size_t i, std::size_t j) {
    const double t = lerp(z(i, j), z(i + 1, j));
    return ContourPoint{xs[i] + t * (xs[i + 1] - xs[i]), ys[j]};
  };
  auto y_point = [&](std::size_t i, std::size_t j) {
    const double t = lerp(z(i, j), z(i, j + 1));
    return ContourPoint{xs[i], ys[j] + t * (ys[j + 1] - ys[j])};
  };

  std::vector<Segment> segs;
  for (std::size_t i = 0; i + 1 < nx; ++i) {
    for (std::size_t j = 0; j + 1 < ny; ++j) {
      const double z00 = z(i, j), z10 = z(i + 1, j), z11 = z(i + 1, j + 1), z01 = z(i, j + 1);
      if (std::isnan(z00) || std::isnan(z10) || std::isnan(z11) || std::isnan(z01)) continue;
      const int code = (z00 >= level ? 1 : 0) | (z10 >= level ? 2 : 0) | (z11 >= level ? 4 : 0) |
                       (z01 >= level ? 8 : 0);
      if (code == 0 || code == 15) continue;
      // Edges: bottom (y = ys[j]), right (x = xs[i+1]), top (y = ys[j+1]), left (x = xs[i]).
      const std::size_t e[4] = {x_edge(i, j), y_edge(i + 1, j), x_edge(i, j + 1), y_edge(i, j)};
      auto point = [&](int k) {
        switch (k) {
          case 0: return x_point(i, j);
          case 1: return y_point(i + 1, j);
          case 2: return x_point(i, j + 1);
          default: return y_point(i, j);
        }
      };
      auto add = [&](int p, int q) { segs.push_back({e[p], e[q], point(p), point(q)}); };
      const bool centre_high = 0.25 * (z00 + z10 + z11 + z01) >= level;
      switch (code) {
        case 1: case 14: add(3, 0); break;
        case 2: case 13: add(0, 1); break;
        case 3: case 12: add(3, 1); break;
        case 4: case 11: add(1, 2); break;
        case 6: case 9: add(0, 2); break;
        case 7: case 8: add(3, 2); break;
        case 5:
          if (centre_high) { add(3, 2); add(0, 1); } else { add(3, 0); add(1, 2); }
          break;
        case 10:
          if (centre_high) { add(3, 0); add(1, 2); } else { add(3, 2); add(0, 1); }
          break;
        default: break;
      }
    }
  }

  std::map<std::size_t, std::vector<std::size_t>> by_edge;
  for (std::size_t s = 0; s < segs.size(); ++s) {
    by_edge[segs[s].edge_a].push_back(s);
    by_edge[segs[s].edge_b].push_back(s);
  }
  std::vector<char> used(segs.size(), 0);

  auto walk = [&](std::size_t start_seg, std::size_t start_edge) {
    Polyline line;
    std::size_t s = start_seg, edge = start_edge;
    line.push_back(segs[s].edge_a == edge ? segs[s].a : segs[s].b);
    while (true) {
      used[s] = 1;
      const bool forward = segs[s].edge_a == edge;
      const std::size_t far_edge = forward ? segs[s].edge_b : segs[s].edge_a;
      line.push_back(forward ? segs[s].b : segs[s].a);
      std::optional<std::size_t> next;
      for (std::size_t t : by_edge[far_edge]) {
        if (!used[t]) next = t;
      }
      if (!next) break;
      s = *next;
      edge = far_edge;
    }
    return line;
  };

  // Open chains start at edges touched by one segment; closed loops follow.
  for (const auto& [edge, list] : by_edge) {
    if (list.size() == 1 && !used[list.front()]) lines.push_back(walk(list.front(), edge));
  }
  for (std::size_t s = 0; s < segs.size(); ++s) {
    if (!used[s]) lines.push_back(walk(s, segs[s].edge_a));
  }
  return lines;
}

}  // namespace thermowork
