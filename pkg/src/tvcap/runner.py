"""Scenario execution: build domain objects, run models, evaluate checks,
write artifacts.

Each scenario kind has a builder (pure construction and precondition
validation, used by `validate`) and an executor. Executors fill a RunReport
with named key-value blocks and one explicit verdict per declared check.
CSV artifacts are written with fixed formatting so reruns are byte-identical.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import backend
from .circuitsim import (CircuitSpec, EquivalentBranch, TimeVaryingCapBranch,
                         compare_emulation, equivalent_steady_state,
                         simulate_tvc, steady_state_charge)
from .constants import C0, ETA0
from .errors import ScenarioError, TvcapError
from .modsynth import (Capacitance, LossyInductance, ModulationProfile,
                       Resistance, synth_capacitance, synth_inductance,
                       synth_resistance)
from .scenario import SCENARIO_KINDS, validate_schema
from .sheetsim import (PlaneWaveSource, SheetSpec, compare_variants,
                       invisibility_residual, power_balance,
                       reflection_magnitude, simulate_fdtd, simulate_sheet,
                       static_sheet_coefficients, synth_sensor_modulation)
from .signals import HarmonicSignal, Waveform, lowpass
from .stability import (circle_criterion, ideal_nonfoster_transient,
                        modulation_bounds, parallel_resistance)

_FLOAT_FMT = "%.17g"


@dataclass
class CheckResult:
    name: str
    passed: bool
    value: object = None
    limit: object = None
    note: str = ""


@dataclass
class RunReport:
    scenario: dict
    checks: list = field(default_factory=list)
    blocks: dict = field(default_factory=dict)
    wall_time: float = 0.0

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def render(self) -> str:
        lines = [f"scenario: {self.scenario['name']} (kind: {self.scenario['kind']})",
                 f"backend: {backend.backend_name()}", ""]
        for title, block in self.blocks.items():
            lines.append(f"[{title}]")
            for key, val in block.items():
                lines.append(f"  {key} = {val}")
            lines.append("")
        for c in self.checks:
            status = "PASS" if c.passed else "FAIL"
            detail = []
            if c.value is not None:
                detail.append(f"value={c.value}")
            if c.limit is not None:
                detail.append(f"limit={c.limit}")
            if c.note:
                detail.append(c.note)
            lines.append(f"CHECK {c.name}: {status}" +
                         (" (" + ", ".join(detail) + ")" if detail else ""))
        n_pass = sum(1 for c in self.checks if c.passed)
        lines.append("")
        lines.append(f"result: {'PASS' if self.passed else 'FAIL'} "
                     f"({n_pass}/{len(self.checks)} checks)")
        lines.append(f"wall_time_s: {self.wall_time:.3f}")
        return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# construction helpers (shared by validate and run)

def _build_source(p: dict) -> HarmonicSignal:
    return HarmonicSignal(p["v_dc_V"], p["v_ac_V"], 2.0 * math.pi * p["f_Hz"],
                          p.get("phase_rad", 0.0))


def _build_target(p: dict):
    kind = p["type"]
    if kind == "capacitance":
        return Capacitance(p["c_eq_F"])
    if kind == "resistance":
        return Resistance(p["r_eq_ohm"])
    if kind == "lossy-inductance":
        return LossyInductance(p["l_eq_H"], p["r_l_ohm"], p["r_c_ohm"])
    raise ScenarioError(f"unknown target type {kind!r}")


def _build_circuit(params: dict) -> dict:
    source = _build_source(params["source"])
    target = _build_target(params["target"])
    r_s = float(params["r_s_ohm"])
    eq_spec = CircuitSpec(source, r_s, EquivalentBranch(target))
    steady = equivalent_steady_state(eq_spec, source.omega0)
    sim = params.get("sim", {})
    spp = int(sim.get("samples_per_period", 2000))
    periods = int(sim.get("periods", 20))
    settle = float(sim.get("settle_periods", 5)) * source.period
    mod = params.get("modulation", {})
    if mod.get("mode", "external") not in ("external", "filtered-feedback"):
        raise ScenarioError(f"unknown modulation mode {mod.get('mode')!r}")
    return {"source": source, "target": target, "r_s": r_s, "steady": steady,
            "spp": spp, "periods": periods, "settle": settle,
            "mode": mod.get("mode", "external"),
            "constant": mod.get("constant", "auto"),
            "margin": mod.get("margin_F"),
            "filter_cut_over_f": float(mod.get("filter_cut_over_f", 3.0)),
            "initial_charge": sim.get("initial_charge", "steady-state")}


def _synthesize(ctx: dict, v: Waveform, mode: str) -> ModulationProfile:
    target = ctx["target"]
    constant = ctx["constant"]
    margin = ctx["margin"]
    if isinstance(target, Capacitance):
        return synth_capacitance(v, target.c_eq, c1=constant, margin=margin,
                                 mode=mode)
    if isinstance(target, Resistance):
        return synth_resistance(v, target.r_eq, c2=constant, margin=margin,
                                mode=mode)
    i = ctx["steady"].element_current(v.t0, v.dt, len(v))
    return synth_inductance(v, i, target.l_eq, target.r_l, target.r_c,
                            c1=constant, margin=margin, mode=mode)


def _initial_charge(ctx: dict, profile: ModulationProfile):
    ic = ctx["initial_charge"]
    if ic == "steady-state":
        return steady_state_charge(profile, ctx["steady"])
    if ic == "dc":
        return None
    if ic == "zero":
        return 0.0
    return float(ic)


def _run_circuit_once(ctx: dict, v: Waveform, mode: str):
    profile = _synthesize(ctx, v, mode)
    r_par = ctx["target"].r_c if isinstance(ctx["target"], LossyInductance) else None
    spec = CircuitSpec(ctx["source"], ctx["r_s"],
                       TimeVaryingCapBranch(profile, r_par))
    trace = simulate_tvc(spec, v.t_end, q0=_initial_charge(ctx, profile))
    return profile, spec, trace


def _execute_circuit(params: dict, artifacts: dict) -> dict:
    ctx = _build_circuit(params)
    source, steady = ctx["source"], ctx["steady"]
    dt = source.period / ctx["spp"]
    n = ctx["periods"] * ctx["spp"] + 1
    v_elem = steady.element_voltage(0.0, dt, n)

    profile, spec, trace = _run_circuit_once(ctx, v_elem, "external-steady-state")
    if ctx["mode"] == "filtered-feedback":
        f_cut = ctx["filter_cut_over_f"] * source.omega0 / (2.0 * math.pi)
        v_filtered = lowpass(trace.v_cap, f_cut)
        profile, spec, trace = _run_circuit_once(ctx, v_filtered,
                                                 "filtered-feedback")

    emulation = compare_emulation(trace, steady, ctx["settle"]) \
        if not trace.diverged else None
    r_par = spec.branch.r_parallel
    r_eff = parallel_resistance(ctx["r_s"], r_par)
    stability = None
    if profile.c_min > 0:
        a, b = modulation_bounds(profile, r_eff)
        stability = circle_criterion(a, b)

    q_exact = profile.capacitance.samples[:len(trace.q)] * v_elem.samples[:len(trace.q)]
    bound_ratio = float(np.max(np.abs(trace.q.samples))
                        / max(np.max(np.abs(q_exact)), 1e-300))

    artifacts["trace.csv"] = np.column_stack(
        [trace.q.times, trace.q.samples, trace.v_cap.samples, trace.i.samples])
    artifacts["trace.csv_header"] = "t,q,v_cap,i"
    artifacts["profile.csv"] = np.column_stack(
        [profile.capacitance.times, profile.capacitance.samples])
    artifacts["profile.csv_header"] = "t,F"

    blocks = {
        "steady_state": {
            "i_dc_A": steady.i_dc,
            "i_ac_amplitude_A": steady.i_ac.amplitude,
            "i_ac_phase_rad": steady.i_ac.phase,
            "v_elem_dc_V": steady.v_elem_dc,
            "v_elem_ac_amplitude_V": steady.v_elem_ac.amplitude,
        },
        "profile": {
            "target": profile.target,
            "mode": profile.voltage_source_mode,
            "constants": json.dumps(profile.constants, sort_keys=True),
            "c_min_F": profile.c_min,
            "c_max_F": profile.c_max,
            "positivity_margin_F": profile.positivity_margin,
        },
        "simulation": {
            "diverged": trace.diverged,
            "t_diverged_s": trace.t_diverged,
            "bound_ratio": bound_ratio,
        },
    }
    if emulation is not None:
        blocks["emulation"] = {
            "rel_rms_error": emulation.rel_rms_error,
            "periods_compared": len(emulation.period_errors),
            "first_period_error": emulation.period_errors[0],
            "last_period_error": emulation.period_errors[-1],
        }
    if stability is not None:
        blocks["stability"] = stability.as_dict()
    return {"blocks": blocks, "emulation": emulation, "trace": trace,
            "stability": stability, "bound_ratio": bound_ratio}


# --------------------------------------------------------------------------
# stability suite

def _execute_stability_case(case: dict) -> dict:
    kind = case["type"]
    out = {"name": case["name"]}
    if kind == "profile":
        ctx = _build_circuit(case["circuit"])
        source, steady = ctx["source"], ctx["steady"]
        dt = source.period / ctx["spp"]
        periods = int(case.get("periods", ctx["periods"]))
        n = periods * ctx["spp"] + 1
        v_elem = steady.element_voltage(0.0, dt, n)
        profile, spec, trace = _run_circuit_once(ctx, v_elem,
                                                 "external-steady-state")
        r_eff = parallel_resistance(ctx["r_s"], spec.branch.r_parallel)
        a, b = modulation_bounds(profile, r_eff)
        report = circle_criterion(a, b)
        q_exact = profile.capacitance.samples[:len(trace.q)] \
            * v_elem.samples[:len(trace.q)]
        out.update(report.as_dict())
        out["diverged"] = trace.diverged
        out["bound_ratio"] = float(np.max(np.abs(trace.q.samples))
                                   / max(np.max(np.abs(q_exact)), 1e-300))
        out["periods_simulated"] = periods
    elif kind == "frozen-negative":
        c0 = float(case["c0_F"])
        r_s = float(case["r_s_ohm"])
        source = _build_source(case["source"])
        spp = int(case.get("samples_per_period", 2000))
        periods = int(case.get("periods", 5))
        dt = source.period / spp
        n = periods * spp + 1
        prof = ModulationProfile(
            Waveform(0.0, dt, np.full(n, c0), "F"), target="frozen-constant")
        report = circle_criterion(1.0 / (r_s * c0), 1.0 / (r_s * c0))
        spec = CircuitSpec(source, r_s, TimeVaryingCapBranch(prof))
        trace = simulate_tvc(spec, prof.capacitance.t_end)
        out.update(report.as_dict())
        out["diverged"] = trace.diverged
        out["t_diverged_s"] = trace.t_diverged

        # growth-rate evidence: source off, seeded charge, log-slope fit
        law = ideal_nonfoster_transient(r_s, c0)
        t_fit = 3.0 * law.efolding_time
        dt_g = law.efolding_time / 200.0
        n_g = int(round(t_fit / dt_g)) + 1
        prof_g = ModulationProfile(
            Waveform(0.0, dt_g, np.full(max(n_g, 3), c0), "F"),
            target="frozen-constant")
        zero_src = HarmonicSignal(0.0, 0.0, source.omega0)
        spec_g = CircuitSpec(zero_src, r_s, TimeVaryingCapBranch(prof_g))
        trace_g = simulate_tvc(spec_g, prof_g.capacitance.t_end, q0=abs(c0) * 1.0)
        logq = np.log(np.abs(trace_g.q.samples))
        slope = np.polyfit(trace_g.q.times, logq, 1)[0]
        out["growth_rate_measured_per_s"] = float(slope)
        out["growth_rate_expected_per_s"] = law.rate
        out["growth_rate_rel_err"] = abs(slope - law.rate) / abs(law.rate)
    else:
        raise ScenarioError(f"unknown stability case type {kind!r}")
    return out


def _execute_stability(params: dict, artifacts: dict) -> dict:
    cases = {}
    for case in params["cases"]:
        cases[case["name"]] = _execute_stability_case(case)
    blocks = {f"case:{name}": data for name, data in cases.items()}
    rows = []
    for name, data in cases.items():
        rows.append([name, data["verdict"], data.get("a_per_s"),
                     data.get("b_per_s"), data.get("diverged")])
    artifacts["stability_summary.csv"] = rows
    artifacts["stability_summary.csv_header"] = "case,verdict,a_per_s,b_per_s,diverged"
    return {"blocks": blocks, "cases": cases}


# --------------------------------------------------------------------------
# sheet / fdtd

def _build_plane_source(p: dict) -> PlaneWaveSource:
    return PlaneWaveSource(p["e_dc_V_per_m"], p["e0_V_per_m"],
                           2.0 * math.pi * p["f_Hz"])


def _build_sheet(params: dict, want_fdtd: bool) -> dict:
    source = _build_plane_source(params["source"])
    c0_sheet = float(params["c0_sheet_F"])
    r0 = params.get("r0_ohm")
    r0 = float(r0) if r0 is not None else None
    mc = params.get("mod_constants", {})
    c1 = mc.get("c1_F_V_per_m")
    c2 = None
    if c1 is not None and mc.get("c2_over_c1") is not None:
        c2 = float(mc["c2_over_c1"]) * float(c1)
    elif mc.get("c2_over_c1") is not None:
        c2 = float(mc["c2_over_c1"]) * 7.0 * c0_sheet
    sim = params.get("sim", {})
    spp = int(sim.get("samples_per_period", 2000))
    mod = synth_sensor_modulation(source, c0_sheet, r0, c1=c1, c2=c2,
                                  samples_per_period=spp)
    variant = params.get("variant", "two-patch-arrays")
    slab = params.get("slab", {})
    spec = SheetSpec(variant, c0_sheet, r0, source, mod,
                     d=slab.get("d_m"), eps_r=slab.get("eps_r"))
    if want_fdtd and variant != "two-dielectric-slabs":
        raise ScenarioError("fdtd scenarios need variant two-dielectric-slabs")
    modulation_on = params.get("modulation", "on") == "on"
    periods = float(sim.get("periods", 12))
    stop_fraction = float(sim.get("stop_fraction", 0.9))
    t_end = periods * source.period
    if modulation_on and math.isfinite(mod.stop_time):
        t_end = min(t_end, stop_fraction * mod.stop_time)
    settle = float(sim.get("settle_periods", 3)) * source.period
    fd = params.get("fdtd", {})
    return {"source": source, "spec": spec, "mod": mod, "t_end": t_end,
            "settle": settle, "spp": spp, "modulation_on": modulation_on,
            "cells_per_slab": int(fd.get("cells_per_slab", 20)),
            "courant": float(fd.get("courant", 1.0))}


def _sheet_artifacts(rec, artifacts: dict) -> None:
    artifacts["probe_above.csv"] = np.column_stack(
        [rec.e_above.times, rec.e_above.samples, rec.e_inc_above.samples])
    artifacts["probe_above.csv_header"] = "t,e_total,e_incident"
    artifacts["probe_below.csv"] = np.column_stack(
        [rec.e_below.times, rec.e_below.samples, rec.e_inc_below.samples])
    artifacts["probe_below.csv_header"] = "t,e_total,e_incident"
    p_s = rec.p_layers["static"]
    p_m = rec.p_layers["modulated"]
    artifacts["power_layers.csv"] = np.column_stack(
        [p_s.times, p_s.samples, p_m.samples])
    artifacts["power_layers.csv_header"] = "t,p_static,p_modulated"


def _execute_sheet(params: dict, artifacts: dict, want_fdtd: bool) -> dict:
    """Run the scenario's primary mode, plus a modulation-off run for the
    static-reflection oracle when the primary mode is modulated."""
    ctx = _build_sheet(params, want_fdtd)

    def _run(on: bool):
        if want_fdtd:
            return simulate_fdtd(ctx["spec"], ctx["t_end"], on,
                                 cells_per_slab=ctx["cells_per_slab"],
                                 courant=ctx["courant"])
        return simulate_sheet(ctx["spec"], ctx["t_end"], on,
                              samples_per_period=ctx["spp"])

    rec = _run(ctx["modulation_on"])
    want_off = ctx["modulation_on"] and params.get("measure_static_reflection", True)
    rec_off = _run(False) if want_off else rec
    residual = invisibility_residual(rec, ctx["settle"])
    refl_off = reflection_magnitude(rec_off, ctx["settle"])
    power = power_balance(rec, ctx["settle"])
    gamma, _ = static_sheet_coefficients(ctx["spec"].c0_sheet, ctx["spec"].r0,
                                         ctx["source"].omega)
    _sheet_artifacts(rec, artifacts)
    summary = [[ctx["spec"].variant,
                "on" if ctx["modulation_on"] else "off",
                max(residual["above_rel"], residual["below_rel"]),
                power.net]]
    artifacts["summary.csv"] = summary
    artifacts["summary.csv_header"] = "variant,modulation,residual_rel,net_power_W_per_m2"

    blocks = {
        "modulation": {
            "c1_F_V_per_m": ctx["mod"].c1,
            "c2_F_V_per_m": ctx["mod"].c2,
            "stop_time_s": ctx["mod"].stop_time,
            "t_end_s": ctx["t_end"],
            "modulation_on": ctx["modulation_on"],
        },
        "fields": {
            "residual_above_rel_e0": residual["above_rel"],
            "residual_below_rel_e0": residual["below_rel"],
            "static_reflection_magnitude": refl_off,
            "static_reflection_oracle": abs(gamma),
            "diverged": rec.diverged,
        },
        "power": power.as_dict(),
    }
    return {"blocks": blocks, "record": rec, "residual": residual,
            "reflection_off": refl_off, "power": power, "ctx": ctx,
            "gamma_oracle": abs(gamma)}


# --------------------------------------------------------------------------
# sweeps

def _execute_sweep(params: dict, artifacts: dict) -> dict:
    mode = params.get("mode")
    if mode == "variants":
        base = dict(params["sheet"])
        source = _build_plane_source(base["source"])
        c0_sheet = float(base["c0_sheet_F"])
        r0 = base.get("r0_ohm")
        r0 = float(r0) if r0 is not None else None
        sim = base.get("sim", {})
        spp = int(sim.get("samples_per_period", 2000))
        mod = synth_sensor_modulation(source, c0_sheet, r0,
                                      samples_per_period=spp)
        slab = params["slab"]
        specs = {
            "two-patch-arrays": SheetSpec("two-patch-arrays", c0_sheet, r0,
                                          source, mod),
            "patches-on-substrate": SheetSpec("patches-on-substrate", c0_sheet,
                                              r0, source, mod,
                                              d=slab["d_m"], eps_r=slab["eps_r"]),
            "two-dielectric-slabs": SheetSpec("two-dielectric-slabs", c0_sheet,
                                              r0, source, mod,
                                              d=slab["d_m"], eps_r=slab["eps_r"]),
        }
        periods = float(sim.get("periods", 10))
        t_end = min(periods * source.period, 0.9 * mod.stop_time)
        settle = float(sim.get("settle_periods", 3)) * source.period
        fd = params.get("fdtd", {})
        comparison = compare_variants(
            specs, t_end, modulation_on=params.get("modulation", "on") == "on",
            settle=settle, samples_per_period=spp,
            cells_per_slab=int(fd.get("cells_per_slab", 20)))
        blocks = {}
        rows = []
        for (na, nb), diff in comparison.differences.items():
            blocks[f"difference:{na}|{nb}"] = diff
            rows.append([na, nb, diff["above_rel"], diff["below_rel"]])
        artifacts["variant_differences.csv"] = rows
        artifacts["variant_differences.csv_header"] = \
            "variant_a,variant_b,above_rel_e0,below_rel_e0"
        return {"blocks": blocks, "comparison": comparison}

    if mode == "thickness":
        base = params["fdtd_scenario"]
        halvings = int(params.get("halvings", 1))
        runs = {}
        d0 = float(base["slab"]["d_m"])
        eps0 = float(base["slab"]["eps_r"])
        for k in range(halvings + 1):
            scale = 2 ** k
            sub = json.loads(json.dumps(base))
            sub["slab"]["d_m"] = d0 / scale
            sub["slab"]["eps_r"] = (eps0 - 1.0) * scale + 1.0
            sub["measure_static_reflection"] = False
            art = {}
            runs[f"d_over_{scale}"] = _execute_sheet(sub, art, want_fdtd=True)
        blocks = {}
        rows = []
        for name, res in runs.items():
            blocks[f"run:{name}"] = {
                "net_power_W_per_m2": res["power"].net,
                "net_over_static": abs(res["power"].net / res["power"].p_static),
                "residual_below_rel_e0": res["residual"]["below_rel"],
                "residual_above_rel_e0": res["residual"]["above_rel"],
            }
            rows.append([name, res["power"].net,
                         abs(res["power"].net / res["power"].p_static),
                         res["residual"]["below_rel"]])
        artifacts["thickness_sweep.csv"] = rows
        artifacts["thickness_sweep.csv_header"] = \
            "run,net_power_W_per_m2,net_over_static,residual_below_rel_e0"
        return {"blocks": blocks, "runs": runs}

    raise ScenarioError(f"unknown sweep mode {mode!r}")


# --------------------------------------------------------------------------
# checks

def _eval_check(check: dict, kind: str, result: dict, wall: float) -> CheckResult:
    ctype = check["type"]
    name = check["name"]

    if ctype == "runtime":
        limit = float(check["max_seconds"])
        return CheckResult(name, wall <= limit, round(wall, 3), limit)

    if kind == "circuit":
        if ctype == "emulation_rms":
            limit = float(check["max"])
            if result["emulation"] is None:
                return CheckResult(name, False, "diverged", limit)
            val = result["emulation"].rel_rms_error
            return CheckResult(name, val <= limit, val, limit)
        if ctype == "not_diverged":
            return CheckResult(name, not result["trace"].diverged,
                               result["trace"].diverged, False)
        if ctype == "stability_verdict":
            expect = check["expect"]
            verdict = result["stability"].verdict if result["stability"] else "n/a"
            return CheckResult(name, verdict == expect, verdict, expect)
        if ctype == "bounded_charge":
            factor = float(check["factor"])
            return CheckResult(name, result["bound_ratio"] <= factor,
                               result["bound_ratio"], factor)

    if kind == "stability":
        case = result["cases"].get(check.get("case", ""))
        if case is None:
            return CheckResult(name, False, note=f"case {check.get('case')!r} missing")
        if ctype == "case_verdict":
            return CheckResult(name, case["verdict"] == check["expect"],
                               case["verdict"], check["expect"])
        if ctype == "case_diverged":
            expect = bool(check["expect"])
            return CheckResult(name, case["diverged"] == expect,
                               case["diverged"], expect)
        if ctype == "case_bounded":
            factor = float(check["factor"])
            return CheckResult(name, case["bound_ratio"] <= factor,
                               case["bound_ratio"], factor)
        if ctype == "case_growth_rate":
            limit = float(check["max_rel_err"])
            val = case["growth_rate_rel_err"]
            return CheckResult(name, val <= limit, val, limit)

    if kind in ("sheet", "fdtd"):
        if ctype == "reflection_magnitude":
            tol = float(check["abs_tol"])
            expect = float(check.get("expect", result["gamma_oracle"]))
            val = result["reflection_off"]
            return CheckResult(name, abs(val - expect) <= tol, val,
                               f"{expect}+/-{tol}",
                               note="measured with modulation off")
        if ctype == "reflection_vs_sheet":
            limit = float(check["max_rel_diff"])
            oracle = result["gamma_oracle"]
            val = abs(result["reflection_off"] - oracle) / oracle
            return CheckResult(name, val <= limit, val, limit,
                               note=f"sheet oracle {oracle:.4f}, modulation off")
        if ctype == "invisibility_residual":
            val = max(result["residual"]["above_rel"],
                      result["residual"]["below_rel"])
            if result["ctx"]["modulation_on"]:
                limit = float(check["max_rel"])
                return CheckResult(name, val <= limit, val, limit)
            floor = float(check.get("off_min_rel", 0.3))
            return CheckResult(
                name, val >= floor, val, f">={floor}",
                note="expected-fail with modulation off: residual must stay "
                     "at the static-scattering scale")
        if ctype == "power_net":
            power = result["power"]
            if result["ctx"]["modulation_on"]:
                limit = float(check["max_frac_of_static"])
                val = abs(power.net) / abs(power.p_static)
                return CheckResult(name, val <= limit, val, limit)
            ok = power.p_modulated == 0.0 and power.p_static > 0.0
            return CheckResult(name, ok, power.p_modulated, 0.0,
                               note="modulation off: modulated layer must "
                                    "carry exactly zero power")
        if ctype == "flux_balance":
            limit = float(check["max_rel"])
            power = result["power"]
            val = abs(power.balance_error) / power.s_incident
            return CheckResult(name, val <= limit, val, limit)
        if ctype == "c_eff_identity":
            limit = float(check["max_rel"])
            spec = result["ctx"]["spec"]
            c_eff = (spec.eps_r - 1.0) * spec.d / (ETA0 * C0)
            val = abs(c_eff - spec.c0_sheet) / spec.c0_sheet
            return CheckResult(name, val <= limit, val, limit)
        if ctype == "not_diverged":
            rec = result["record"]
            return CheckResult(name, not rec.diverged, rec.diverged, False)

    if kind == "sweep":
        if ctype == "variant_pair_diff":
            pair = tuple(check["pair"])
            diffs = result["comparison"].differences
            diff = diffs.get(pair) or diffs.get((pair[1], pair[0]))
            if diff is None:
                return CheckResult(name, False, note=f"pair {pair} not compared")
            limit = float(check["max_rel"])
            val = max(diff["above_rel"], diff["below_rel"])
            return CheckResult(name, val <= limit, val, limit)
        if ctype == "metric_decreases":
            metric = check["metric"]
            key = {"net_power_abs": "net_over_static",
                   "residual_below": "residual_below_rel_e0"}.get(metric)
            if key is None:
                return CheckResult(name, False, note=f"unknown metric {metric!r}")
            vals = [result["blocks"][f"run:{r}"][key]
                    for r in sorted(result["runs"])]
            ok = all(b < a for a, b in zip(vals, vals[1:]))
            return CheckResult(name, ok, "->".join(f"{v:.3e}" for v in vals),
                               "strictly decreasing")

    return CheckResult(name, False, note=f"unknown check type {ctype!r} "
                                         f"for kind {kind!r}")


# --------------------------------------------------------------------------
# entry points

_EXECUTORS = {
    "circuit": lambda p, a: _execute_circuit(p, a),
    "stability": lambda p, a: _execute_stability(p, a),
    "sheet": lambda p, a: _execute_sheet(p, a, want_fdtd=False),
    "fdtd": lambda p, a: _execute_sheet(p, a, want_fdtd=True),
    "sweep": lambda p, a: _execute_sweep(p, a),
}


def validate_scenario(scenario: dict) -> None:
    """Schema validation plus fail-fast construction of every domain object
    (all module preconditions run before any simulation starts)."""
    validate_schema(scenario)
    kind = scenario["kind"]
    if kind not in SCENARIO_KINDS:
        raise ScenarioError(f"unknown scenario kind {kind!r}")
    params = scenario["params"]
    try:
        if kind == "circuit":
            _build_circuit(params)
        elif kind == "stability":
            for case in params["cases"]:
                if case["type"] == "profile":
                    _build_circuit(case["circuit"])
                elif case["type"] == "frozen-negative":
                    _build_source(case["source"])
                    if float(case["c0_F"]) == 0.0:
                        raise ScenarioError("frozen capacitance cannot be zero")
                else:
                    raise ScenarioError(f"unknown case type {case['type']!r}")
        elif kind in ("sheet", "fdtd"):
            _build_sheet(params, want_fdtd=(kind == "fdtd"))
        elif kind == "sweep":
            mode = params.get("mode")
            if mode == "variants":
                _build_plane_source(params["sheet"]["source"])
                if "slab" not in params:
                    raise ScenarioError("variants sweep needs slab parameters")
            elif mode == "thickness":
                _build_sheet(params["fdtd_scenario"], want_fdtd=True)
            else:
                raise ScenarioError(f"unknown sweep mode {mode!r}")
    except TvcapError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ScenarioError(f"scenario parameters invalid: {exc}") from exc


def run_scenario(scenario: dict, out_dir: Path | str | None = None) -> RunReport:
    """Validate, execute, evaluate checks, and (optionally) write artifacts."""
    validate_scenario(scenario)
    artifacts: dict = {}
    start = time.perf_counter()
    result = _EXECUTORS[scenario["kind"]](scenario["params"], artifacts)
    wall = time.perf_counter() - start

    report = RunReport(scenario=scenario, wall_time=wall,
                       blocks=result["blocks"])
    for check in scenario["checks"]:
        report.checks.append(_eval_check(check, scenario["kind"], result, wall))

    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for key, data in artifacts.items():
            if key.endswith("_header"):
                continue
            header = artifacts.get(f"{key}_header", "")
            path = out / key
            if isinstance(data, np.ndarray):
                np.savetxt(path, data, fmt=_FLOAT_FMT, delimiter=",",
                           header=header, comments="")
            else:
                with open(path, "w", encoding="utf-8") as fh:
                    fh.write(header + "\n")
                    for row in data:
                        fh.write(",".join(_format_cell(c) for c in row) + "\n")
        with open(out / "echo.json", "w", encoding="utf-8") as fh:
            json.dump(scenario, fh, indent=2, sort_keys=True)
            fh.write("\n")
        with open(out / "report.txt", "w", encoding="utf-8") as fh:
            fh.write(report.render())
    return report


def _format_cell(cell) -> str:
    if isinstance(cell, float):
        return _FLOAT_FMT % cell
    return str(cell)
