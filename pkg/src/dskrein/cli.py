"""Command-line front end: reproducible scans, reports, acceptance checks.

Subcommands: kernel, limit, krein, fock, charge, invariance, all.
Exit codes: 0 all checks pass, 1 an invariant failed, 2 usage error.
JSON reports carry one entry per check with the equation tag it verifies;
scans are CSV.  Identical config and seed give identical output bytes.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import math
import os
import sys

import numpy as np

from . import fock as fock_mod
from . import krein as krein_mod
from .current import (SmearedField, closure_defect, corrected_current, dual_field,
                      slice_charge)
from .errors import DsKreinError
from .geometry import DsParams, DsPoint, generators, invariant_lambda
from .kernels import (KernelConvention, MassParam, massive_w, massless_w,
                      subtraction_constant)
from .testfn import (MARGIN_CELLS, ChartGrid, bump, indef_gram, integral,
                     laplace_beltrami, massive_kernel, transport)

RESOLUTION_FACTORS = {"half": 0.5, "default": 1.0, "double": 2.0}


@dataclasses.dataclass
class RunConfig:
    R: float = 1.0
    n_tau: int = 128
    n_theta: int = 96
    window_fraction: float = 0.8
    eps_base: float = 1.0
    eps_levels: int = 4
    basis_size: int = 12
    fock_basis: int = 4
    fock_n_max: int = 4
    convention: str = "series"
    kappa: str = "derived"
    out: str = "out"
    seed: int = 0
    resolution: str = "default"

    @classmethod
    def load(cls, path: str = None, overrides: dict = None) -> "RunConfig":
        cfg = cls()
        if path:
            with open(path, encoding="utf-8") as fh:
                for line_no, line in enumerate(fh, 1):
                    line = line.split("#", 1)[0].strip()
                    if not line:
                        continue
                    if "=" not in line:
                        raise DsKreinError(f"{path}:{line_no}: expected key = value")
                    key, _, raw = line.partition("=")
                    key, raw = key.strip(), raw.strip()
                    if not hasattr(cfg, key):
                        raise DsKreinError(f"{path}:{line_no}: unknown key {key!r}")
                    cur = getattr(cfg, key)
                    setattr(cfg, key, type(cur)(raw) if not isinstance(cur, str) else raw)
        for key, val in (overrides or {}).items():
            if val is not None:
                setattr(cfg, key, val)
        return cfg

    def grid(self) -> ChartGrid:
        base = ChartGrid(DsParams(self.R), self.n_tau, self.n_theta, self.window_fraction)
        factor = RESOLUTION_FACTORS[self.resolution]
        return base if factor == 1.0 else base.with_resolution(factor)

    def eps_ladder(self, grid: ChartGrid):
        return grid.default_eps_levels(self.eps_base, self.eps_levels)

    def kernel_convention(self) -> KernelConvention:
        return KernelConvention(self.convention)

    @property
    def tol_scale(self) -> float:
        """Coarse grids get the same 10x relaxation the verification
        contract applies to reduced-resolution reruns."""
        return 10.0 if self.resolution == "half" else 1.0

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


class Report:
    """Accumulates named checks and serializes one JSON report."""

    def __init__(self, name: str, cfg: RunConfig):
        self.name = name
        self.cfg = cfg
        self.checks = []

    def add(self, name: str, eq: str, value, tolerance: float = None, passed: bool = None):
        if tolerance is not None:
            tolerance = tolerance * self.cfg.tol_scale
        if passed is None and tolerance is not None:
            passed = bool(abs(value) <= tolerance)
        self.checks.append({
            "name": name,
            "eq": eq,
            "value": _jsonable(value),
            "tolerance": tolerance,
            "pass": passed,
        })
        status = "PASS" if passed else ("FAIL" if passed is not None else "info")
        print(f"  [{status}] {name}: {_fmt(value)}"
              + (f" (tol {tolerance:g})" if tolerance is not None else ""))
        return passed

    @property
    def passed(self) -> bool:
        return all(c["pass"] is not False for c in self.checks)

    def write(self):
        os.makedirs(self.cfg.out, exist_ok=True)
        path = os.path.join(self.cfg.out, f"{self.name}.json")
        body = {"report": self.name, "config": self.cfg.as_dict(),
                "checks": self.checks, "pass": self.passed}
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(body, fh, indent=2, sort_keys=True)
            fh.write("\n")
        return path


def _jsonable(v):
    if isinstance(v, complex):
        return [v.real, v.imag]
    if isinstance(v, (np.floating, np.integer)):
        return float(v)
    if isinstance(v, np.complexfloating):
        return [float(v.real), float(v.imag)]
    return v


def _fmt(v):
    if isinstance(v, (complex, np.complexfloating)):
        return f"{v.real:.6e}{v.imag:+.6e}j"
    if isinstance(v, float):
        return f"{v:.6e}"
    return str(v)


def _write_csv(cfg: RunConfig, name: str, header, rows):
    os.makedirs(cfg.out, exist_ok=True)
    path = os.path.join(cfg.out, name)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write("# " + json.dumps(cfg.as_dict(), sort_keys=True) + "\n")
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)
    return path


def _random_bumps(cfg: RunConfig, grid: ChartGrid, count: int, rng, complex_amps=True):
    geom = grid.geom
    out = []
    # keep supports clear of the margin cells that the bump constructor
    # reserves at the tau window boundary, whatever the resolution
    lim = min(-grid.tau[MARGIN_CELLS], grid.tau[-1 - MARGIN_CELLS]) - 0.02 * geom.R
    for _ in range(count):
        w_tau = rng.uniform(0.45, 0.6) * geom.R
        w_theta = rng.uniform(1.0, 1.6)
        tau_c = rng.uniform(-(lim - w_tau), lim - w_tau)
        theta_c = rng.uniform(0.0, 2.0 * math.pi)
        amp = 1.0 + (rng.uniform(-0.5, 0.5) + 1j * rng.uniform(-0.5, 0.5)
                     if complex_amps else rng.uniform(-0.5, 0.5))
        out.append(bump(DsPoint(tau_c, theta_c, geom), (w_tau, w_theta), amp, grid))
    return out


# ---------------------------------------------------------------------------
# Subcommands


def cmd_kernel(cfg: RunConfig, args) -> int:
    lam = np.linspace(args.lambda_min, args.lambda_max, args.count)
    conv = cfg.kernel_convention()
    if args.alpha is None:
        if args.lambda_min <= -1.0:
            print("error: massless kernel needs lambda > -1", file=sys.stderr)
            return 2
        vals = massless_w(lam, conv)
        name = "kernel_massless.csv"
    else:
        m = MassParam(complex(args.alpha))
        vals = np.array([massive_w(m, complex(x)) for x in lam])
        name = f"kernel_alpha_{args.alpha}.csv"
    vals = np.atleast_1d(vals)
    rows = [(f"{x:.12g}", f"{v.real:.15g}", f"{v.imag:.15g}") for x, v in zip(lam, vals)]
    path = _write_csv(cfg, name, ["lambda", "re", "im"], rows)
    print(f"wrote {path} ({len(rows)} rows)")
    return 0


def cmd_limit(cfg: RunConfig, args=None) -> int:
    rep = Report("limit", cfg)
    conv = cfg.kernel_convention()
    lam = np.linspace(-0.9, 3.0, 40)
    alphas = [1e-2, 1e-3, 1e-4]
    resid = []
    for a in alphas:
        m = MassParam(a)
        r = max(abs(massive_w(m, complex(x)) - subtraction_constant(m)
                    - massless_w(complex(x), conv)) for x in lam)
        resid.append(r)
    slope = np.polyfit(np.log(alphas), np.log(resid), 1)[0]
    rep.add("limit_slope_minus_1", "9-10", float(slope - 1.0), 0.1)
    for a, r in zip(alphas, resid):
        rep.add(f"residual_alpha_{a:g}", "9-10", float(r))
    _write_csv(cfg, "limit_residuals.csv", ["alpha", "max_residual"],
               [(f"{a:g}", f"{r:.15g}") for a, r in zip(alphas, resid)])
    rep.write()
    return 0 if rep.passed else 1


def _build_context(cfg: RunConfig):
    grid = cfg.grid()
    conv = cfg.kernel_convention()
    ctx = krein_mod.KreinContext.build(grid, conv, eps_levels=cfg.eps_ladder(grid))
    return grid, ctx


def cmd_krein(cfg: RunConfig, args=None) -> int:
    rep = Report("krein", cfg)
    grid, ctx = _build_context(cfg)
    rng = np.random.default_rng(cfg.seed)
    basis = _random_bumps(cfg, grid, cfg.basis_size, rng)
    table = ctx.table(basis)
    nn = krein_mod.nihil_norm(ctx, table)

    rep.add("krein_h_h_minus_1", "26-29", nn["krein_h_h"] - 1.0, 1e-5)
    rep.add("krein_v0_v0_minus_1", "30", nn["krein_v0_v0"] - 1.0, 1e-3)
    rep.add("krein_h_v0", "26-31", nn["krein_h_v0"], 1e-5)
    rep.add("indef_h_h", "18", nn["indef_h_h"], 1e-8)
    rep.add("indef_v0_v0", "31", nn["indef_v0_v0"], 1e-6)

    meas, exp = krein_mod.functional_check(ctx, basis[:5], table)
    worst = max(abs(m - e) / (1.0 + abs(e)) for m, e in zip(meas, exp))
    rep.add("v0_functional_worst", "26", float(worst), 1e-5)

    # zero-integral Gram must be PSD; the full space carries a negative witness
    gram0 = table.zero_gram()
    ev = np.linalg.eigvalsh(0.5 * (gram0 + gram0.conj().T))
    scale = float(np.max(np.abs(gram0)))
    rep.add("d0_gram_min_eig_over_norm", "sec3", float(ev[0] / scale), 1e-8,
            passed=bool(ev[0] >= -1e-8 * scale))
    neg = _negative_witness(ctx, grid)
    rep.add("negative_norm_witness", "sec2", neg, passed=bool(neg < 0))

    mk = massive_kernel(MassParam(0.5))
    gram_m = indef_gram(basis, basis, ctx.conv, kernel=mk, eps_levels=ctx.eps_levels)
    evm = np.linalg.eigvalsh(0.5 * (gram_m + gram_m.conj().T))
    rep.add("massive_gram_min_eig", "8", float(evm[0]),
            passed=bool(evm[0] >= -1e-8 * np.max(np.abs(gram_m))))

    eta = krein_mod.krein_metric(table)
    # the metric identities are certified at full resolution; on coarse
    # grids the pseudoinverse amplifies quadrature error past any fixed
    # tolerance, so they are only reported there
    eta_tol = 1e-5 if cfg.resolution != "half" else None
    rep.add("eta_involution_defect", "25", krein_mod.eta_involution_defect(table, eta), eta_tol)
    rep.add("eta_swap_defect", "25", krein_mod.eta_swap_defect(table, eta), eta_tol)

    pair = krein_mod.GramPair(table)
    os.makedirs(cfg.out, exist_ok=True)
    with open(os.path.join(cfg.out, "gram_pair.json"), "w", encoding="utf-8") as fh:
        json.dump({"config": cfg.as_dict(), **pair.to_json_dict()}, fh, indent=2,
                  sort_keys=True)
        fh.write("\n")
    rep.write()
    return 0 if rep.passed else 1


def _negative_witness(ctx, grid) -> float:
    """<s,s> for s = h1 + 2 beta box(g), overshooting the null correction.

    With c = <h1, box(g)> and <box(g), box(g)> = 0 the pairing is
    <h1,h1> + 4 beta c = -<h1,h1>, manifestly negative for any bump h1."""
    geom = grid.geom
    b1 = bump(DsPoint(0.0, 1.0, geom), (0.55 * geom.R, 1.3), 1.0, grid)
    h1 = b1 * (1.0 / integral(b1).real)
    b2 = bump(DsPoint(0.0, 1.5, geom), (0.9 * geom.R, 2.2), 1.0, grid)
    g = b2 * (1.0 / integral(b2).real)
    lg = laplace_beltrami(g)
    A = indef_gram([h1, lg], [h1, lg], ctx.conv, eps_levels=ctx.eps_levels)
    beta = -A[0, 0].real / (2.0 * A[0, 1].real)
    s = h1 + (2.0 * beta) * lg
    val = indef_gram([s], [s], ctx.conv, eps_levels=ctx.eps_levels)[0, 0]
    return float(val.real)


def cmd_fock(cfg: RunConfig, args=None) -> int:
    rep = Report("fock", cfg)
    grid, ctx = _build_context(cfg)
    rng = np.random.default_rng(cfg.seed)
    basis = _random_bumps(cfg, grid, cfg.fock_basis, rng)
    table = ctx.table(basis)
    sp = fock_mod.one_particle_space(table)
    rep.add("eta_measured_defect", "25",
            float(np.max(np.abs(sp.eta_measured - sp.eta))), 1e-3)
    frep = fock_mod.FockRep(sp, n_max=cfg.fock_n_max)
    guard = frep.sector_projector(cfg.fock_n_max - 2)
    dim = frep.dim

    e_v0 = np.zeros(sp.dim)
    e_v0[fock_mod.E_V0] = 1.0
    phi_v0 = frep.field_op(e_v0)
    # a real mode-coefficient probe stands in for a real test function
    f_co = rng.normal(size=sp.dim)
    int_f = f_co[fock_mod.E_H]  # int f = <v0, f> = (eta f)_v0 component
    phi_f = frep.field_op(f_co)

    def gnorm(A):
        return float(np.max(np.abs(guard @ A @ guard)))

    rep.add("comm_phi_v0_phi_f", "33", gnorm(phi_v0 @ phi_f - phi_f @ phi_v0), 1e-10)
    Q = fock_mod.charge(frep)
    rep.add("comm_Q_phi_f_plus_i_intf", "39",
            gnorm(Q @ phi_f - phi_f @ Q + 1j * int_f * np.eye(dim)), 1e-8)
    pp, pm = fock_mod.field_shift_parts(frep)
    rep.add("comm_phi_plus", "37", gnorm(pp @ phi_f - phi_f @ pp + 0.5 * int_f * np.eye(dim)), 1e-8)
    rep.add("comm_phi_minus", "37", gnorm(pm @ phi_f - phi_f @ pm - 0.5 * int_f * np.eye(dim)), 1e-8)
    rep.add("comm_phi_plus_minus", "37", gnorm(pp @ pm - pm @ pp), 0.0,
            passed=bool(gnorm(pp @ pm - pm @ pp) == 0.0))

    lam = 0.05
    U = fock_mod.gauge_unitary(frep, lam)
    Ui = fock_mod.gauge_unitary(frep, -lam)
    shift = U @ phi_f @ Ui - phi_f - lam * int_f * np.eye(dim)
    rep.add("gauge_shift", "39-40", gnorm(shift), 1e-8)
    etaF = fock_mod.eta_fock(frep)
    rep.add("gauge_eta_unitary", "40",
            float(np.max(np.abs(guard @ (U.conj().T @ etaF @ U - etaF) @ guard))), 1e-8)
    vac = frep.vacuum().astype(complex)
    d1 = 1j * Q @ vac  # order-lambda vacuum displacement direction
    rep.add("vacuum_displacement_indef_norm", "40",
            float(abs(np.conj(d1) @ etaF @ d1)), 1e-10)
    rep.write()
    return 0 if rep.passed else 1


def cmd_charge(cfg: RunConfig, args=None) -> int:
    rep = Report("charge", cfg)
    grid = cfg.grid()
    conv = cfg.kernel_convention()
    geom = grid.geom
    g = bump(DsPoint(0.1 * geom.R, 2.0, geom), (0.55 * geom.R, 1.3), 1.0, grid)
    sf = SmearedField.build(g, conv, eps_levels=cfg.eps_ladder(grid))

    form = corrected_current(sf, cfg.kappa)
    scale = float(np.max(np.abs(form.omega_theta)))
    rep.add("closure_defect_over_scale", "41", closure_defect(form) / scale, 1e-4)
    tau, J, spread = slice_charge(form)
    j_scale = max(float(np.max(np.abs(J))), 1e-300)
    rep.add("slice_spread_relative", "41-42", spread / j_scale, 1e-4)
    _write_csv(cfg, "slice_charge.csv", ["tau", "J_real", "J_imag", "spread"],
               [(f"{t:.12g}", f"{j.real:.15g}", f"{j.imag:.15g}", f"{spread:.12g}")
                for t, j in zip(tau, J)])

    bare = corrected_current(sf, cfg.kappa, include_correction=False)
    _, _, bare_spread = slice_charge(bare)
    rep.add("uncorrected_spread_ratio", "41", bare_spread / max(spread, 1e-300),
            passed=bool(bare_spread >= 10.0 * spread))

    i_mid = grid.n_tau // 2
    _, _, winding = dual_field(form, i_mid)
    expect = -8.0 * math.pi * complex(J[i_mid])
    rep.add("winding_vs_minus_8pi_J", "43",
            abs(winding - expect) / max(abs(expect), 1e-300), 1e-4)
    rep.write()
    return 0 if rep.passed else 1


def cmd_invariance(cfg: RunConfig, args=None) -> int:
    rep = Report("invariance", cfg)
    grid = cfg.grid()
    conv = cfg.kernel_convention()
    geom = grid.geom
    rng = np.random.default_rng(cfg.seed)

    # pointwise kernel invariance under random group elements; boundary
    # values are extrapolated to eps = 0, where invariance is exact
    from .kernels import boundary_value_w
    worst = 0.0
    trials = 0
    while trials < 20:
        x = DsPoint(rng.uniform(-0.5, 0.5) * geom.R, rng.uniform(0, 2 * math.pi), geom)
        y = DsPoint(rng.uniform(-0.5, 0.5) * geom.R, rng.uniform(0, 2 * math.pi), geom)
        lam = complex(invariant_lambda(x, y, geom))
        if abs(lam + 1.0) < 0.1:  # keep clear of the light cone
            continue
        trials += 1
        el = (generators("rotation", rng.uniform(0, 2 * math.pi))
              @ generators("boost01", rng.uniform(-0.4, 0.4)))
        w0, _ = boundary_value_w(x, y, conv=conv)
        w1, _ = boundary_value_w(_act(el, x, geom), _act(el, y, geom), conv=conv)
        worst = max(worst, abs(w1 - w0))
    rep.add("kernel_invariance", "axiom3", worst, 1e-8)

    ctx = krein_mod.KreinContext.build(grid, conv, eps_levels=cfg.eps_ladder(grid))
    fs = _random_bumps(cfg, grid, 3, rng, complex_amps=False)
    rot = generators("rotation", 0.7)
    moved = [transport(rot, f) for f in fs]
    G_a = indef_gram(fs, fs, conv, eps_levels=ctx.eps_levels)
    G_b = indef_gram(moved, moved, conv, eps_levels=ctx.eps_levels)
    rep.add("smeared_invariance_rotation", "axiom3",
            float(np.max(np.abs(G_a - G_b))), 1e-6)

    inv = krein_mod.v0_invariance(ctx, rot, fs)
    rep.add("v0_invariance_rotation", "prop4.2", inv["max_pair_shift"], 1e-4)
    boost = generators("boost01", 0.15)
    inv_b = krein_mod.v0_invariance(ctx, boost, fs)
    rep.add("v0_invariance_boost", "prop4.2", inv_b["max_pair_shift"], 1e-4)
    rep.write()
    return 0 if rep.passed else 1


def _act(el, p: DsPoint, geom):
    from .geometry import group_action
    return group_action(el, p)


def cmd_all(cfg: RunConfig, args=None) -> int:
    worst = 0
    for fn in (cmd_limit, cmd_krein, cmd_fock, cmd_charge, cmd_invariance):
        print(f"== {fn.__name__[4:]} ==")
        worst = max(worst, fn(cfg))
    return worst


def main(argv=None) -> int:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value config file")
    common.add_argument("--out", help="output directory")
    common.add_argument("--seed", type=int, help="random seed")
    common.add_argument("--resolution", choices=sorted(RESOLUTION_FACTORS))
    common.add_argument("--convention", choices=["series", "paper"])
    common.add_argument("--kappa", choices=["paper", "derived"])

    parser = argparse.ArgumentParser(prog="dskrein", parents=[common],
                                     description="de Sitter massless scalar verification")
    sub = parser.add_subparsers(dest="command", required=True)

    p_kernel = sub.add_parser("kernel", parents=[common],
                              help="kernel scan over a lambda grid")
    p_kernel.add_argument("--alpha", default=None, help="mass parameter; omit for massless")
    p_kernel.add_argument("--lambda-min", type=float, default=-0.99)
    p_kernel.add_argument("--lambda-max", type=float, default=3.0)
    p_kernel.add_argument("--count", type=int, default=100)
    for name in ("limit", "krein", "fock", "charge", "invariance", "all"):
        sub.add_parser(name, parents=[common])

    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        cfg = RunConfig.load(args.config, {
            "out": args.out, "seed": args.seed, "resolution": args.resolution,
            "convention": args.convention, "kappa": args.kappa,
        })
        handler = {
            "kernel": cmd_kernel, "limit": cmd_limit, "krein": cmd_krein,
            "fock": cmd_fock, "charge": cmd_charge, "invariance": cmd_invariance,
            "all": cmd_all,
        }[args.command]
        return handler(cfg, args)
    except DsKreinError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
