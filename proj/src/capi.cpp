// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 dacsfl contributors

#include "dacsfl/dacsfl.h"

#include <new>
#include <sstream>
#include <string>

#include "dacsfl/linearize.hpp"
#include "dacsfl/textfile.hpp"
#include "dacsfl/verify_sim.hpp"

struct dacsfl_system {
  dacsfl::Dacs d;
  std::string text;
};

struct dacsfl_settings {
  dacsfl::Settings s;
};

struct dacsfl_report {
  dacsfl_verdict verdict = DACSFL_UNDECIDED;
  std::string summary;
  std::string text;
  std::string document;
};

namespace {

using namespace dacsfl;

thread_local std::string last_error;

template <typename F>
dacsfl_status guard(F&& body) {
  try {
    body();
    last_error.clear();
    return DACSFL_OK;
  } catch (const Error& e) {
    last_error = e.what();
    return static_cast<dacsfl_status>(static_cast<int>(e.code()));
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
  } catch (const std::exception& e) {
    last_error = e.what();
  } catch (...) {
    last_error = "unknown error";
  }
  return DACSFL_ERR_INTERNAL;
}

void require(const void* p, const char* what) {
  if (p == nullptr) throw Error(ErrorCode::Argument, std::string(what) + " is null");
}

void require_positive(double v, const char* what) {
  if (!(v > 0.0)) throw Error(ErrorCode::Argument, std::string(what) + " must be positive");
}

dacsfl_verdict to_c(Verdict v) { return static_cast<dacsfl_verdict>(static_cast<int>(v)); }

Settings settings_of(const dacsfl_settings* s) { return s ? s->s : Settings(); }

dacsfl_system* wrap(Dacs d) {
  auto* out = new dacsfl_system;
  out->text = format_system(d);
  out->d = std::move(d);
  return out;
}

dacsfl_report* new_report(Verdict v, std::string summary, std::string text, std::string document) {
  auto* r = new dacsfl_report;
  r->verdict = to_c(v);
  r->summary = std::move(summary);
  r->text = std::move(text);
  r->document = std::move(document);
  return r;
}

std::vector<std::string> symbols_of(const Dacs& d) {
  std::vector<std::string> out = d.states;
  for (const auto& [k, v] : d.params) out.push_back(k);
  return out;
}

std::vector<Expr> signals(const char* const* items, std::size_t n, std::size_t expected, const char* what) {
  if (n > 0) require(items, what);
  if (n > expected)
    throw Error(ErrorCode::Argument, std::string(what) + ": " + std::to_string(n) + " given, system has " +
                                         std::to_string(expected));
  std::vector<Expr> out;
  for (std::size_t i = 0; i < n; ++i) {
    require(items[i], what);
    out.push_back(parse_expr(items[i]));
  }
  out.resize(expected, Expr(0));
  return out;
}

struct Pipeline {
  ReductionTrace trace;
  Restriction r;
  Explicitation e;
};

Pipeline explicitated(const Dacs& d, const Settings& st) {
  Pipeline p;
  p.trace = reduce(d, st);
  p.r = restrict_system(d, p.trace, st);
  p.e = explicitate(p.r.system, st);
  return p;
}

}  // namespace

extern "C" {

const char* dacsfl_last_error(void) { return last_error.c_str(); }

const char* dacsfl_status_name(dacsfl_status status) {
  if (status == DACSFL_OK) return "ok";
  if (status == DACSFL_ERR_INTERNAL) return "internal";
  if (status < DACSFL_OK || status > DACSFL_ERR_INTERNAL) return "invalid";
  return error_code_name(static_cast<ErrorCode>(static_cast<int>(status)));
}

const char* dacsfl_version(void) { return "0.1.0"; }

dacsfl_status dacsfl_settings_create(dacsfl_settings** out) {
  return guard([&] {
    require(out, "out");
    *out = new dacsfl_settings;
  });
}

void dacsfl_settings_free(dacsfl_settings* s) { delete s; }

dacsfl_status dacsfl_settings_set_seed(dacsfl_settings* s, uint64_t seed) {
  return guard([&] {
    require(s, "settings");
    s->s.seed = seed;
  });
}

dacsfl_status dacsfl_settings_set_radius(dacsfl_settings* s, double radius) {
  return guard([&] {
    require(s, "settings");
    require_positive(radius, "radius");
    s->s.radius = radius;
  });
}

dacsfl_status dacsfl_settings_set_tol_zero(dacsfl_settings* s, double tol) {
  return guard([&] {
    require(s, "settings");
    require_positive(tol, "zero tolerance");
    s->s.tol_zero = tol;
  });
}

dacsfl_status dacsfl_settings_set_tol_rank(dacsfl_settings* s, double tol) {
  return guard([&] {
    require(s, "settings");
    require_positive(tol, "rank tolerance");
    s->s.tol_rank = tol;
  });
}

dacsfl_status dacsfl_settings_set_step(dacsfl_settings* s, double step) {
  return guard([&] {
    require(s, "settings");
    require_positive(step, "step");
    s->s.step = step;
  });
}

dacsfl_status dacsfl_settings_set_horizon(dacsfl_settings* s, double horizon) {
  return guard([&] {
    require(s, "settings");
    require_positive(horizon, "horizon");
    s->s.horizon = horizon;
  });
}

dacsfl_status dacsfl_system_load(const char* path, dacsfl_system** out) {
  return guard([&] {
    require(path, "path");
    require(out, "out");
    *out = wrap(load_system(path));
  });
}

dacsfl_status dacsfl_system_parse(const char* text, dacsfl_system** out) {
  return guard([&] {
    require(text, "text");
    require(out, "out");
    *out = wrap(parse_system(text));
  });
}

void dacsfl_system_free(dacsfl_system* sys) { delete sys; }

dacsfl_status dacsfl_system_dims(const dacsfl_system* sys, int* l, int* n, int* m) {
  return guard([&] {
    require(sys, "system");
    if (l) *l = sys->d.l();
    if (n) *n = sys->d.n();
    if (m) *m = sys->d.m();
  });
}

const char* dacsfl_system_text(const dacsfl_system* sys) { return sys ? sys->text.c_str() : ""; }

dacsfl_status dacsfl_check(const dacsfl_system* sys, const dacsfl_settings* s, dacsfl_report** out) {
  return guard([&] {
    require(sys, "system");
    require(out, "out");
    const Dacs& d = sys->d;
    Settings st = settings_of(s);
    d.validate();
    ReductionTrace t = reduce(d, st);
    std::ostringstream os;
    os << "system " << d.name << ": l = " << d.l() << ", n = " << d.n() << ", m = " << d.m() << "\n";
    os << format_trace(t, d);
    if (!t.admissible) {
      *out = new_report(Verdict::Fail, "working point is not admissible", os.str(), "");
      return;
    }
    CrResult cr = check_cr(d, t, st);
    os << "rank E T M* = " << cr.rank_etm.rank << (cr.rank_etm.constant ? " (constant)" : " (not constant)")
       << ", rank [E T M*, G] = " << cr.rank_etm_g.rank
       << (cr.rank_etm_g.constant ? " (constant)" : " (not constant)") << "\n";
    os << "r* = " << cr.r_star << ", m* = " << cr.m_star << ", n* = " << cr.n_star << "\n";
    Verdict v = cr.ok ? Verdict::Pass : Verdict::Fail;
    *out = new_report(v, cr.ok ? "condition (CR) holds" : "condition (CR) fails", os.str(), "");
  });
}

dacsfl_status dacsfl_reduce(const dacsfl_system* sys, const dacsfl_settings* s, dacsfl_report** out) {
  return guard([&] {
    require(sys, "system");
    require(out, "out");
    Settings st = settings_of(s);
    ReductionTrace t = reduce(sys->d, st);
    std::string trace = format_trace(t, sys->d);
    if (!t.admissible) {
      *out = new_report(Verdict::Fail, "working point is not admissible", trace, "");
      return;
    }
    Restriction r = restrict_system(sys->d, t, st);
    std::string summary = "k* = " + std::to_string(t.k_star) + ", n* = " + std::to_string(r.n_star) +
                          ", r* = " + std::to_string(r.r_star) + ", m* = " + std::to_string(r.m_star);
    *out = new_report(Verdict::Pass, summary, trace, format_system(r.system));
  });
}

dacsfl_status dacsfl_explicitate(const dacsfl_system* sys, const dacsfl_settings* s, dacsfl_report** out) {
  return guard([&] {
    require(sys, "system");
    require(out, "out");
    Pipeline p = explicitated(sys->d, settings_of(s));
    std::string doc = format_explicitation(p.e);
    std::string summary = "n = " + std::to_string(p.e.n()) + ", m = " + std::to_string(p.e.m()) +
                          ", s = " + std::to_string(p.e.s()) + ", p = " + std::to_string(p.e.p());
    *out = new_report(Verdict::Pass, summary, doc, doc);
  });
}

dacsfl_status dacsfl_distributions(const dacsfl_system* sys, const dacsfl_settings* s, dacsfl_report** out) {
  return guard([&] {
    require(sys, "system");
    require(out, "out");
    Settings st = settings_of(s);
    Pipeline p = explicitated(sys->d, st);
    Distributions dist = build_sequences(p.e, p.r.n_star, st);
    Verdict v = Verdict::Pass;
    for (const auto* seq : {&dist.D, &dist.D_hat})
      for (const auto& lvl : seq->levels) {
        if (!lvl.constant) v = combine(v, Verdict::Fail);
        if (lvl.involutive.verdict == Involutivity::NotInvolutive) v = combine(v, Verdict::Fail);
        if (lvl.involutive.verdict == Involutivity::Unknown) v = combine(v, Verdict::Undecided);
      }
    std::string summary = v == Verdict::Pass ? "all levels constant rank and involutive"
                                             : "some level is not constant rank or not involutive";
    *out = new_report(v, summary, dist.table(), dist.table());
  });
}

dacsfl_status dacsfl_linearize(const dacsfl_system* sys, const dacsfl_settings* s, dacsfl_mode mode,
                               const char* candidates_path, dacsfl_report** out) {
  return guard([&] {
    require(sys, "system");
    require(out, "out");
    if (mode != DACSFL_MODE_INTERNAL && mode != DACSFL_MODE_EXTERNAL)
      throw Error(ErrorCode::Argument, "unknown linearization mode");
    Settings st = settings_of(s);
    CandidateSet c;
    if (candidates_path) c = load_candidates(candidates_path, symbols_of(sys->d));
    LinearizationReport rep =
        mode == DACSFL_MODE_INTERNAL ? check_internal(sys->d, st, c) : check_external(sys->d, st, c);
    *out = new_report(rep.verdict, rep.summary(), rep.text(), rep.document());
  });
}

dacsfl_status dacsfl_simulate(const dacsfl_system* sys, const dacsfl_settings* s, const char* const* u_signals,
                              size_t n_u, const char* const* v_signals, size_t n_v, dacsfl_report** out) {
  return guard([&] {
    require(sys, "system");
    require(out, "out");
    Settings st = settings_of(s);
    Pipeline p = explicitated(sys->d, st);
    auto u = signals(u_signals, n_u, static_cast<std::size_t>(p.e.m()), "input signals");
    auto v = signals(v_signals, n_v, static_cast<std::size_t>(p.e.s()), "driving signals");
    Trajectory tr = simulate_explicitation(p.e, p.e.point, u, v, sim_options(st));
    Trajectory lifted = lift_to_system(tr, p.r, sys->d);
    double res = dacs_residual(sys->d, lifted);
    double drift = constraint_drift(lifted, p.r.constraints, sys->d);
    std::ostringstream os;
    os << "steps = " << tr.size() - 1 << ", step = " << tr.step() << ", horizon = " << tr.t.back() << "\n";
    os << "dacs residual = " << res << "\n";
    os << "constraint drift = " << drift << "\n";
    os << "truncation estimate = " << tr.truncation_estimate << (tr.truncation_flag ? " (above tolerance)" : "")
       << "\n";
    bool ok = res <= 1e-5 && drift <= 1e-6 && !tr.truncation_flag;
    *out = new_report(ok ? Verdict::Pass : Verdict::Fail, ok ? "trajectory solves the system" : "residual too large",
                      os.str(), trajectory_csv(lifted));
  });
}

dacsfl_status dacsfl_verify_equivalence(const dacsfl_system* a, const dacsfl_system* b, const char* witness_path,
                                        const dacsfl_settings* s, dacsfl_report** out) {
  return guard([&] {
    require(a, "system");
    require(b, "target system");
    require(witness_path, "witness path");
    require(out, "out");
    ExFbWitness w = load_witness(witness_path, a->d);
    EquivalenceReport rep = verify_ex_fb_equivalence(a->d, b->d, w, settings_of(s));
    std::string summary = std::string("ex-fb equivalence ") +
                          (rep.verdict == Verdict::Pass   ? "verified"
                           : rep.verdict == Verdict::Fail ? "refuted"
                                                          : "undecided");
    *out = new_report(rep.verdict, summary, rep.text(), rep.text());
  });
}

dacsfl_status dacsfl_verify_correspondence(const dacsfl_system* sys, const dacsfl_settings* s,
                                           const char* candidates_path, const char* const* u_signals, size_t n_u,
                                           const char* const* v_signals, size_t n_v, dacsfl_report** out) {
  return guard([&] {
    require(sys, "system");
    require(out, "out");
    Settings st = settings_of(s);
    Pipeline p = explicitated(sys->d, st);
    CandidateSet c;
    if (candidates_path) c = load_candidates(candidates_path, symbols_of(sys->d));
    ChainIndices idx =
        chain_indices(build_sequences(p.e, p.r.n_star, st), p.r.n_star, p.r.m_star, p.e.s());
    Transform tf = construct_transform(p.e, idx, c, st);
    Explicitation target = brunovsky_explicitation(idx, Point());
    auto u = signals(u_signals, n_u, static_cast<std::size_t>(target.m()), "input signals");
    auto v = signals(v_signals, n_v, static_cast<std::size_t>(target.s()), "driving signals");
    MatchedRun run = simulate_matched(p.e, target, tf.witness, p.e.point, u, v, sim_options(st));
    Trajectory lifted = lift_to_system(run.source, p.r, sys->d);
    double res = dacs_residual(sys->d, lifted);
    std::ostringstream os;
    os << "indices " << idx.str() << "\n";
    os << "state deviation = " << run.correspondence.state_deviation << "\n";
    os << "input residual = " << run.correspondence.input_residual << "\n";
    os << "dacs residual = " << res << "\n";
    bool ok = run.correspondence.state_deviation <= 1e-6 && res <= 1e-5;
    *out = new_report(ok ? Verdict::Pass : Verdict::Fail,
                      ok ? "solutions correspond" : "solutions do not correspond", os.str(),
                      trajectory_csv(lifted));
  });
}

void dacsfl_report_free(dacsfl_report* r) { delete r; }

dacsfl_verdict dacsfl_report_verdict(const dacsfl_report* r) { return r ? r->verdict : DACSFL_UNDECIDED; }

const char* dacsfl_report_summary(const dacsfl_report* r) { return r ? r->summary.c_str() : ""; }

const char* dacsfl_report_text(const dacsfl_report* r) { return r ? r->text.c_str() : ""; }

const char* dacsfl_report_document(const dacsfl_report* r) { return r ? r->document.c_str() : ""; }

}  // extern "C"
