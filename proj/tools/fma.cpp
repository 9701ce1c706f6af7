// fma: command-line front end for decomposition, de-aliasing, synthesis and
// the benchmark tables. Data goes out as TSV, metadata as a JSON sidecar.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "naff/analyzer.hpp"
#include "naff/bench.hpp"
#include "naff/corrections.hpp"
#include "naff/dealias.hpp"
#include "naff/qpsignal.hpp"
#include "naff/windows.hpp"

namespace {

using naff::Complex;
using Json = nlohmann::ordered_json;

constexpr int kExitUsage = 2;
constexpr int kExitModule = 3;
constexpr int kExitIo = 4;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string num(double x) {
  if (std::isnan(x)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.15g", x);
  return buf;
}

// Runs f, turning library validation errors into usage errors (exit 2).
template <typename F>
auto validated(F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const naff::DomainError& e) {
    throw UsageError(e.what());
  } catch (const naff::UnsupportedWindow& e) {
    throw UsageError(e.what());
  }
}

naff::WeightWindow parse_window(const std::string& token) {
  return validated([&] { return naff::WeightWindow::parse(token); });
}

// ---------------------------------------------------------------------------
// Output

class Output {
 public:
  explicit Output(const std::string& path) : path_(path) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw IoError("cannot open '" + path + "' for writing");
    }
  }
  std::ostream& stream() { return path_.empty() ? std::cout : file_; }
  void finish() {
    stream().flush();
    if (!stream()) throw IoError("write failed" + (path_.empty() ? "" : ": " + path_));
  }

 private:
  std::string path_;
  std::ofstream file_;
};

void write_row(std::ostream& out, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out << '\t';
    out << cells[i];
  }
  out << '\n';
}

// Sidecar goes to --meta, or next to --out as OUT.json.
void write_meta(const std::string& meta, const std::string& out, const Json& j) {
  const std::string path = !meta.empty() ? meta : (!out.empty() ? out + ".json" : "");
  if (path.empty()) return;
  std::ofstream f(path);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  f << j.dump(2) << '\n';
  if (!f) throw IoError("write failed: " + path);
}

Json config_json(const naff::ExtractionConfig& c) {
  return {{"max_terms", c.max_terms},
          {"amp_floor", c.amp_floor},
          {"min_separation", c.min_separation},
          {"refine_tol", c.refine_tol},
          {"fft_oversample", c.fft_oversample}};
}

// ---------------------------------------------------------------------------
// Signal sources

// "f1", "f2" or "tone:FREQ[pi][@RE[,IM]]", joined with '+'.
struct SynthPart {
  enum class Kind { kF1, kF2, kTone } kind;
  double freq = 0.0;
  Complex amp{1.0, 0.0};
};

double parse_number(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw UsageError("bad " + what + ": '" + text + "'");
  }
  if (used != text.size() || !std::isfinite(v)) throw UsageError("bad " + what + ": '" + text + "'");
  return v;
}

std::vector<SynthPart> parse_synth(const std::string& spec) {
  std::vector<SynthPart> parts;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, '+')) {
    if (item == "f1") {
      parts.push_back({SynthPart::Kind::kF1});
    } else if (item == "f2") {
      parts.push_back({SynthPart::Kind::kF2});
    } else if (item.rfind("tone:", 0) == 0) {
      std::string body = item.substr(5);
      SynthPart p{SynthPart::Kind::kTone};
      if (const auto at = body.find('@'); at != std::string::npos) {
        const std::string amp = body.substr(at + 1);
        body.resize(at);
        if (const auto comma = amp.find(','); comma != std::string::npos) {
          p.amp = {parse_number(amp.substr(0, comma), "amplitude"),
                   parse_number(amp.substr(comma + 1), "amplitude")};
        } else {
          p.amp = {parse_number(amp, "amplitude"), 0.0};
        }
        if (p.amp == Complex{}) throw UsageError("tone amplitude must be nonzero");
      }
      double scale = 1.0;
      if (body.size() > 2 && body.compare(body.size() - 2, 2, "pi") == 0) {
        body.resize(body.size() - 2);
        scale = naff::kPi;
      }
      p.freq = parse_number(body, "tone frequency") * scale;
      parts.push_back(p);
    } else {
      throw UsageError("unknown synth component '" + item + "' (want f1, f2 or tone:FREQ[pi][@AMP])");
    }
  }
  if (parts.empty()) throw UsageError("empty synth spec");
  return parts;
}

naff::SampledSignal synthesize(const std::vector<SynthPart>& parts, double half_span, double step,
                               double omega) {
  std::optional<naff::QPModel> f2;
  for (const SynthPart& p : parts) {
    if (p.kind == SynthPart::Kind::kF2 && !f2) f2 = naff::f2_model(omega);
  }
  auto f = [&](double t) {
    Complex sum{};
    for (const SynthPart& p : parts) {
      switch (p.kind) {
        case SynthPart::Kind::kF1: sum += naff::f1_value(t, omega); break;
        case SynthPart::Kind::kF2: sum += naff::evaluate_model(*f2, t); break;
        case SynthPart::Kind::kTone: sum += p.amp * naff::phasor(p.freq, t); break;
      }
    }
    return sum;
  };
  return naff::sample_function(f, half_span, step);
}

struct GridOptions {
  double span = 0.0;  // T / 2 pi
  double step = naff::kDefaultBenchStep;
  double omega = naff::kDefaultOmega;

  void add(CLI::App* cmd) {
    cmd->add_option("--span", span, "Half span T in units of 2 pi (T = 2 pi * SPAN)");
    cmd->add_option("--step", step, "Sampling step h")->capture_default_str();
    cmd->add_option("--omega", omega, "Second frequency of f1/f2")->capture_default_str();
  }
  double half_span() const {
    if (!(span > 0.0) || !std::isfinite(span)) throw UsageError("--span must be positive");
    if (!(step > 0.0) || !std::isfinite(step)) throw UsageError("--step must be positive");
    return naff::kTwoPi * span;
  }
};

struct LoadedSignal {
  naff::SampledSignal signal;
  double origin;
  Json source;
};

LoadedSignal load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  naff::SignalFile file = validated([&] { return naff::read_signal_csv(in); });
  return {std::move(file.signal), file.origin, Json{{"input", path}}};
}

LoadedSignal load_synth(const std::vector<SynthPart>& parts, const std::string& spec,
                        const GridOptions& grid, double step) {
  const double t_half = grid.half_span();
  if (!(step > 0.0) || !std::isfinite(step)) throw UsageError("sampling step must be positive");
  naff::SampledSignal s =
      validated([&] { return synthesize(parts, t_half, step, grid.omega); });
  return {std::move(s), 0.0, Json{{"synth", spec}, {"omega", grid.omega}}};
}

// ---------------------------------------------------------------------------
// Extraction flags shared by decompose and dealias

struct ExtractionOptions {
  std::string window = "p1";
  naff::ExtractionConfig config;

  void add(CLI::App* cmd) {
    cmd->add_option("--window", window, "Weight window: p0..p8 or exp")->capture_default_str();
    cmd->add_option("--terms", config.max_terms, "Maximum number of terms")->capture_default_str();
    cmd->add_option("--amp-floor", config.amp_floor, "Stop below this fraction of the leading amplitude")
        ->capture_default_str();
    cmd->add_option("--min-separation", config.min_separation,
                    "Reject frequencies closer than this many 2 pi / T")
        ->capture_default_str();
    cmd->add_option("--refine-tol", config.refine_tol, "Relative tolerance of the peak refinement")
        ->capture_default_str();
    cmd->add_option("--oversample", config.fft_oversample, "Zero padding factor of the coarse search")
        ->capture_default_str();
  }
  naff::WeightWindow parsed_window() const { return parse_window(window); }
  void check() const {
    validated([&] {
      config.validate();
      return 0;
    });
  }
};

bool degenerate(naff::StopReason r) {
  return r == naff::StopReason::kBasisDegenerate || r == naff::StopReason::kRefinementFailed;
}

// ---------------------------------------------------------------------------
// decompose

struct DecomposeOptions {
  std::string input;
  std::string synth;
  GridOptions grid;
  ExtractionOptions extraction;
  std::string out;
  std::string meta;
};

int run_decompose(const DecomposeOptions& o) {
  const naff::WeightWindow window = o.extraction.parsed_window();
  o.extraction.check();
  if (o.input.empty() == o.synth.empty()) throw UsageError("give exactly one of --input or --synth");
  std::optional<std::vector<SynthPart>> parts;
  if (!o.synth.empty()) {
    parts = parse_synth(o.synth);
    o.grid.half_span();
  }
  Output out(o.out);
  const LoadedSignal src = parts ? load_synth(*parts, o.synth, o.grid, o.grid.step) : load_csv(o.input);

  const naff::InnerProductSpace space = naff::InnerProductSpace::for_signal(src.signal, window);
  const naff::Decomposition d = naff::decompose(space, src.signal.samples(), o.extraction.config);

  std::ostream& os = out.stream();
  write_row(os, {"index", "freq", "period", "amp_abs", "amp_phase", "residual_norm"});
  for (std::size_t i = 0; i < d.terms.size(); ++i) {
    const naff::QPTerm& t = d.terms[i];
    // No period for a frequency that completes less than 1e-6 cycle over the span.
    const bool constant = std::fabs(t.freq) * d.half_span < naff::kTwoPi * 1e-6;
    write_row(os, {std::to_string(i + 1), num(t.freq),
                   constant ? "" : num(naff::kTwoPi / std::fabs(t.freq)), num(std::abs(t.amp)),
                   num(std::arg(t.amp)), num(d.residual_norms[i + 1])});
  }
  out.finish();

  Json meta = {{"command", "decompose"},
               {"source", src.source},
               {"window", window.token()},
               {"step", src.signal.step()},
               {"half_span", src.signal.half_span()},
               {"samples", src.signal.size()},
               {"time_origin", src.origin},
               {"config", config_json(o.extraction.config)},
               {"terms", d.terms.size()},
               {"status", naff::to_string(d.status)},
               {"initial_norm", d.residual_norms.front()}};
  write_meta(o.meta, o.out, meta);
  if (degenerate(d.status)) {
    std::cerr << "fma: extraction stopped: " << naff::to_string(d.status) << '\n';
    return kExitModule;
  }
  return 0;
}

// ---------------------------------------------------------------------------
// dealias

struct DealiasOptions {
  std::string input_a;
  std::string input_b;
  std::string synth;
  GridOptions grid;
  double step2 = 0.0;
  std::string units = "cycles";
  ExtractionOptions extraction;
  std::string out;
  std::string meta;
};

int run_dealias(const DealiasOptions& o) {
  const naff::WeightWindow window = o.extraction.parsed_window();
  o.extraction.check();
  const bool files = !o.input_a.empty() || !o.input_b.empty();
  if (files == !o.synth.empty()) {
    throw UsageError("give either --input-a and --input-b, or --synth");
  }
  if (files && (o.input_a.empty() || o.input_b.empty())) {
    throw UsageError("--input-a and --input-b go together");
  }
  std::optional<std::vector<SynthPart>> parts;
  if (!files) {
    parts = parse_synth(o.synth);
    o.grid.half_span();
    if (!(o.step2 > o.grid.step)) throw UsageError("--step2 must exceed --step");
  }
  const double scale = o.units == "cycles" ? 1.0 : 2.0;
  Output out(o.out);

  const LoadedSignal a = files ? load_csv(o.input_a) : load_synth(*parts, o.synth, o.grid, o.grid.step);
  const LoadedSignal b = files ? load_csv(o.input_b) : load_synth(*parts, o.synth, o.grid, o.step2);
  if (files && !(b.signal.step() > a.signal.step())) {
    throw UsageError("the second file must use the larger step");
  }

  const naff::DualAnalysis dual =
      naff::analyze_dual(a.signal, b.signal, window, o.extraction.config);
  std::ostream& os = out.stream();
  write_row(os, {"nu0", "nu", "nu_prime", "k", "k_residue", "amp", "note"});
  for (const naff::DualTerm& t : dual.terms) {
    write_row(os, {num(scale * t.nu0), num(scale * t.nu), num(scale * t.nu_prime),
                   t.k ? std::to_string(*t.k) : "", num(t.k_residue), num(std::abs(t.amp)),
                   t.note});
  }
  out.finish();

  Json meta = {{"command", "dealias"},
               {"source_a", a.source},
               {"source_b", b.source},
               {"units", o.units},
               {"window", window.token()},
               {"step", a.signal.step()},
               {"step2", b.signal.step()},
               {"half_span", a.signal.half_span()},
               {"half_span2", b.signal.half_span()},
               {"config", config_json(o.extraction.config)},
               {"status", naff::to_string(dual.first.status)},
               {"status2", naff::to_string(dual.second.status)}};
  write_meta(o.meta, o.out, meta);
  if (degenerate(dual.first.status) || degenerate(dual.second.status)) {
    std::cerr << "fma: extraction stopped: " << naff::to_string(dual.first.status) << " / "
              << naff::to_string(dual.second.status) << '\n';
    return kExitModule;
  }
  return 0;
}

// ---------------------------------------------------------------------------
// synth

struct SynthOptions {
  std::string model;
  std::string from_terms;
  GridOptions grid;
  std::string out;
};

// Reads the freq, amp_abs and amp_phase columns of a decompose table.
std::vector<naff::QPTerm> read_terms(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  auto split = [](const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, '\t')) cells.push_back(cell);
    return cells;
  };
  std::string line;
  if (!std::getline(in, line)) throw UsageError(path + ": empty terms file");
  const std::vector<std::string> header = split(line);
  auto column = [&](const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    throw UsageError(path + ": missing column '" + name + "'");
  };
  const std::size_t c_freq = column("freq");
  const std::size_t c_abs = column("amp_abs");
  const std::size_t c_arg = column("amp_phase");
  std::vector<naff::QPTerm> terms;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::vector<std::string> cells = split(line);
    const std::string where = path + ": line " + std::to_string(line_no);
    if (cells.size() < header.size()) throw UsageError(where + ": expected " +
                                                       std::to_string(header.size()) + " columns");
    terms.push_back({parse_number(cells[c_freq], where + " freq"),
                     std::polar(parse_number(cells[c_abs], where + " amp_abs"),
                                parse_number(cells[c_arg], where + " amp_phase"))});
  }
  if (terms.empty()) throw UsageError(path + ": no terms");
  return terms;
}

int run_synth(const SynthOptions& o) {
  if (o.model.empty() == o.from_terms.empty()) throw UsageError("give exactly one of --model or --from-terms");
  const double t_half = o.grid.half_span();
  std::optional<naff::SampledSignal> s;
  if (!o.model.empty()) {
    const std::vector<SynthPart> parts = parse_synth(o.model);
    Output out(o.out);
    s = validated([&] { return synthesize(parts, t_half, o.grid.step, o.grid.omega); });
    naff::write_signal_csv(out.stream(), *s);
    out.finish();
    return 0;
  }
  const naff::QPModel model = validated([&] { return naff::QPModel(read_terms(o.from_terms)); });
  Output out(o.out);
  s = validated([&] { return naff::sample_model(model, t_half, o.grid.step); });
  naff::write_signal_csv(out.stream(), *s);
  out.finish();
  return 0;
}

// ---------------------------------------------------------------------------
// bench

constexpr const char* kTargetConvention =
    "first frequency = leading (largest amplitude) term: frequency 0, amplitude 1";

struct BenchCommon {
  std::string out;
  std::string meta;
  int threads = naff::default_threads();

  void add(CLI::App* cmd, bool threaded) {
    cmd->add_option("--out", out, "Write the TSV table here instead of stdout");
    cmd->add_option("--meta", meta, "JSON metadata path (default: OUT.json when --out is given)");
    if (threaded) cmd->add_option("--threads", threads, "Worker threads")->capture_default_str();
  }
  void check() const {
    if (threads < 1) throw UsageError("--threads must be >= 1");
  }
};

Json runs_json(const std::vector<naff::ConvergenceRun>& runs, double floor_hi_order) {
  Json arr = Json::array();
  for (const naff::ConvergenceRun& r : runs) {
    Json j = {{"target", r.target}, {"window", r.window.token()}, {"correction", r.correction.label()}};
    const double floor = (r.target == "f1" && r.window.is_cosine() && r.window.order() >= 3)
                             ? floor_hi_order
                             : 1e-15;
    j["fit_floor"] = floor;
    try {
      const naff::SlopeFit f = naff::fit_slope(r, floor);
      j["slope"] = f.slope;
      j["intercept"] = f.intercept;
      j["fit_points"] = f.points;
    } catch (const naff::InsufficientData&) {
      j["slope"] = nullptr;
    }
    arr.push_back(j);
  }
  return arr;
}

void write_curves(const std::string& path, const std::vector<naff::ConvergenceRun>& runs) {
  Output out(path);
  std::ostream& os = out.stream();
  write_row(os, {"target", "window", "correction", "span", "half_span", "error", "estimate",
                 "terms_used", "skipped"});
  for (const naff::ConvergenceRun& r : runs) {
    for (std::size_t i = 0; i < r.t_points.size(); ++i) {
      write_row(os, {r.target, r.window.token(), r.correction.label(),
                     num(r.t_points[i] / naff::kTwoPi), num(r.t_points[i]), num(r.errors[i]),
                     num(r.estimates[i]), std::to_string(r.terms_used[i]),
                     std::to_string(r.skipped[i])});
    }
  }
  out.finish();
}

struct Table1Cli {
  BenchCommon common;
  naff::Table1Options opt;
  std::string curves;
};

int run_table1(Table1Cli o) {
  o.common.check();
  if (o.opt.points < 5) throw UsageError("--points must be >= 5");
  if (!(o.opt.step > 0.0)) throw UsageError("--step must be positive");
  if (o.opt.span_lo < 0.0 || o.opt.span_hi < 0.0) throw UsageError("span range must be positive");
  o.opt.threads = o.common.threads;
  Output out(o.common.out);
  const naff::Table1 t = validated([&] { return naff::table1(o.opt); });

  std::ostream& os = out.stream();
  std::vector<std::string> header{"window"};
  for (const char* c : naff::kTable1Columns) header.emplace_back(c);
  write_row(os, header);
  for (const naff::Table1Row& row : t.rows) {
    std::vector<std::string> cells{row.window.token()};
    for (const naff::Table1Cell& c : row.cells) cells.push_back(c.slope ? num(*c.slope) : "");
    write_row(os, cells);
  }
  out.finish();
  if (!o.curves.empty()) write_curves(o.curves, t.runs);

  Json meta = {{"command", "bench table1"},
               {"quick", o.opt.quick},
               {"span_lo", t.span_lo},
               {"span_hi", t.span_hi},
               {"points", o.opt.points},
               {"step", o.opt.step},
               {"threads", o.common.threads},
               {"seed", nullptr},
               {"omega", naff::kDefaultOmega},
               {"f1_target", kTargetConvention},
               {"f2", "50 largest terms of the F1 expansion"},
               {"fit", "least squares of log10(err) on log10(T/2pi), err >= 1e-15"},
               {"saturation_floor", naff::kSaturationFloor},
               {"runs", runs_json(t.runs, naff::kSaturationFloor)}};
  write_meta(o.common.meta, o.common.out, meta);
  return 0;
}

int run_table2(const BenchCommon& o) {
  Output out(o.out);
  const std::vector<naff::Table2Row> rows = naff::table2();
  std::ostream& os = out.stream();
  write_row(os, {"nu0_over_pi", "nu_over_pi", "diff_over_pi"});
  for (const naff::Table2Row& r : rows) {
    write_row(os, {num(r.nu0_over_pi), num(r.nu_over_pi), num(r.diff_over_pi)});
  }
  out.finish();
  write_meta(o.meta, o.out,
             {{"command", "bench table2"}, {"window", "p1"}, {"step", 1.0}, {"half_span", 1000.0}});
  return 0;
}

int run_table3(const BenchCommon& o) {
  o.check();
  Output out(o.out);
  const std::vector<naff::Table3Row> rows = naff::table3(o.threads);
  std::ostream& os = out.stream();
  write_row(os, {"nu0_over_pi", "nu_over_pi", "nu_prime_over_pi", "nu_prime_hprime_over_pi",
                 "nu_final_over_pi", "k", "k_residue"});
  for (const naff::Table3Row& r : rows) {
    write_row(os, {num(r.nu0_over_pi), num(r.nu_over_pi), num(r.nu_prime_over_pi),
                   num(r.nu_prime_h_over_pi), num(r.nu_final_over_pi), std::to_string(r.k),
                   num(r.k_residue)});
  }
  out.finish();
  write_meta(o.meta, o.out,
             {{"command", "bench table3"},
              {"window", "p1"},
              {"step", 1.0},
              {"step2", 1.001},
              {"half_span", 1000.0},
              {"threads", o.threads}});
  return 0;
}

struct ConvergenceCli {
  BenchCommon common;
  std::string model = "f1";
  std::string window = "p1";
  std::string correct = "none";
  int correct_terms = 50;
  double span_lo = 0.0;
  double span_hi = 0.0;
  int points = 25;
  double step = naff::kDefaultBenchStep;
  double omega = naff::kDefaultOmega;
};

int run_convergence_cmd(const ConvergenceCli& o) {
  o.common.check();
  const naff::WeightWindow window = parse_window(o.window);
  if (o.points < 2) throw UsageError("--points must be >= 2");
  if (!(o.step > 0.0)) throw UsageError("--step must be positive");
  if (o.correct_terms < 0) throw UsageError("--correct-terms must be >= 0");
  naff::CorrectionSpec spec;
  spec.terms = o.correct_terms;
  if (o.correct == "none") {
    spec = {};
  } else if (o.correct == "t1") {
    spec.kind = naff::CorrectionKind::kTheorem1;
    if (!window.is_cosine()) throw UsageError("t1 correction needs a cosine window");
  } else {
    spec.kind = naff::CorrectionKind::kTheorem2;
  }
  const double lo = o.span_lo > 0.0 ? o.span_lo : naff::kSpanLo;
  const double hi = o.span_hi > 0.0 ? o.span_hi : naff::kSpanHiFull;
  if (!(hi > lo)) throw UsageError("--span-hi must exceed --span-lo");

  naff::ConvergenceRequest req;
  req.target = o.model == "f1" ? naff::BenchTarget::f1(o.omega) : naff::BenchTarget::f2(o.omega);
  req.window = window;
  req.corrections = {spec};
  req.half_spans = naff::log_spaced_spans(lo, hi, o.points);
  req.step = o.step;
  req.threads = o.common.threads;
  Output out(o.common.out);
  const std::vector<naff::ConvergenceRun> runs = naff::run_convergence(req);
  const naff::ConvergenceRun& r = runs.front();

  std::ostream& os = out.stream();
  write_row(os, {"span", "half_span", "error", "estimate", "terms_used", "skipped"});
  for (std::size_t i = 0; i < r.t_points.size(); ++i) {
    write_row(os, {num(r.t_points[i] / naff::kTwoPi), num(r.t_points[i]), num(r.errors[i]),
                   num(r.estimates[i]), std::to_string(r.terms_used[i]),
                   std::to_string(r.skipped[i])});
  }
  out.finish();

  Json meta = {{"command", "bench convergence"},
               {"model", o.model},
               {"omega", o.omega},
               {"window", window.token()},
               {"correction", spec.label()},
               {"span_lo", lo},
               {"span_hi", hi},
               {"points", o.points},
               {"step", o.step},
               {"threads", o.common.threads},
               {"seed", nullptr},
               {"f1_target", kTargetConvention},
               {"runs", runs_json(runs, naff::kSaturationFloor)}};
  write_meta(o.common.meta, o.common.out, meta);
  const Json& fit = meta["runs"][0];
  if (fit["slope"].is_number()) {
    std::cerr << "slope " << num(fit["slope"].get<double>()) << " over "
              << fit["fit_points"].get<std::size_t>() << " points\n";
  } else {
    std::cerr << "slope: not enough points above the error floor\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Frequency map analysis: quasiperiodic decomposition of sampled signals"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  DecomposeOptions dec;
  CLI::App* c_dec = app.add_subcommand("decompose", "Extract the quasiperiodic terms of a signal");
  c_dec->add_option("--input", dec.input, "CSV signal file (t,re,im)");
  c_dec->add_option("--synth", dec.synth, "Generated signal: f1, f2, tone:FREQ[pi][@AMP] joined by +");
  dec.grid.add(c_dec);
  dec.extraction.add(c_dec);
  c_dec->add_option("--out", dec.out, "Write the TSV table here instead of stdout");
  c_dec->add_option("--meta", dec.meta, "JSON metadata path (default: OUT.json when --out is given)");

  DealiasOptions dal;
  CLI::App* c_dal = app.add_subcommand("dealias", "Recover frequencies beyond Nyquist from two steps");
  c_dal->add_option("--input-a", dal.input_a, "CSV signal sampled with step h");
  c_dal->add_option("--input-b", dal.input_b, "CSV signal sampled with step h' > h");
  c_dal->add_option("--synth", dal.synth, "Generated signal, sampled with --step and --step2");
  dal.grid.add(c_dal);
  c_dal->add_option("--step2", dal.step2, "Second sampling step h'");
  c_dal->add_option("--units", dal.units, "Frequency units of the output")
      ->check(CLI::IsMember({"cycles", "angular-over-pi"}))
      ->capture_default_str();
  dal.extraction.add(c_dal);
  c_dal->add_option("--out", dal.out, "Write the TSV table here instead of stdout");
  c_dal->add_option("--meta", dal.meta, "JSON metadata path (default: OUT.json when --out is given)");

  SynthOptions syn;
  CLI::App* c_syn = app.add_subcommand("synth", "Write a generated signal as CSV");
  c_syn->add_option("--model,--synth", syn.model, "f1, f2, tone:FREQ[pi][@AMP] joined by +");
  c_syn->add_option("--from-terms", syn.from_terms, "Rebuild from a decompose TSV table");
  syn.grid.add(c_syn);
  c_syn->add_option("--out", syn.out, "Output CSV path (default stdout)");

  CLI::App* c_bench = app.add_subcommand("bench", "Convergence experiments and reference tables");
  c_bench->require_subcommand(1);

  Table1Cli t1;
  CLI::App* c_t1 = c_bench->add_subcommand("table1", "Fitted convergence slopes on F1 and F2");
  c_t1->add_flag("--quick", t1.opt.quick, "Shorter T range and windows p0..p2 only");
  c_t1->add_option("--step", t1.opt.step, "Sampling step h")->capture_default_str();
  c_t1->add_option("--points", t1.opt.points, "T values per run")->capture_default_str();
  c_t1->add_option("--span-lo", t1.opt.span_lo, "Smallest T/2pi (default per mode)");
  c_t1->add_option("--span-hi", t1.opt.span_hi, "Largest T/2pi (default per mode)");
  c_t1->add_option("--curves", t1.curves, "Also write every error curve as TSV");
  t1.common.add(c_t1, true);

  BenchCommon t2;
  CLI::App* c_t2 = c_bench->add_subcommand("table2", "Tones around the Nyquist frequency");
  t2.add(c_t2, false);

  BenchCommon t3;
  CLI::App* c_t3 = c_bench->add_subcommand("table3", "Two-step reconstruction above Nyquist");
  t3.add(c_t3, true);

  ConvergenceCli cv;
  CLI::App* c_cv = c_bench->add_subcommand("convergence", "Error of the first frequency versus T");
  c_cv->add_option("--model", cv.model, "Test function")
      ->check(CLI::IsMember({"f1", "f2"}))
      ->capture_default_str();
  c_cv->add_option("--window", cv.window, "Weight window: p0..p8 or exp")->capture_default_str();
  c_cv->add_option("--correct", cv.correct, "Correction of the first frequency")
      ->check(CLI::IsMember({"none", "t1", "t2"}))
      ->capture_default_str();
  c_cv->add_option("--correct-terms", cv.correct_terms, "Perturbing terms fed to the correction")
      ->capture_default_str();
  c_cv->add_option("--span-lo", cv.span_lo, "Smallest T/2pi");
  c_cv->add_option("--span-hi", cv.span_hi, "Largest T/2pi");
  c_cv->add_option("--points", cv.points, "T values")->capture_default_str();
  c_cv->add_option("--step", cv.step, "Sampling step h")->capture_default_str();
  c_cv->add_option("--omega", cv.omega, "Second frequency of f1/f2")->capture_default_str();
  cv.common.add(c_cv, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*c_dec) return run_decompose(dec);
    if (*c_dal) return run_dealias(dal);
    if (*c_syn) return run_synth(syn);
    if (*c_t1) return run_table1(t1);
    if (*c_t2) return run_table2(t2);
    if (*c_t3) return run_table3(t3);
    if (*c_cv) return run_convergence_cmd(cv);
  } catch (const UsageError& e) {
    std::cerr << "fma: " << e.what() << '\n';
    return kExitUsage;
  } catch (const IoError& e) {
    std::cerr << "fma: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "fma: " << e.what() << '\n';
    return kExitModule;
  }
  return kExitUsage;
}
