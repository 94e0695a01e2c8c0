"""Command-line front end producing CSV or JSON reports.

Energies are in units of hbar*omega. Numbers are printed with 12 significant
digits and rows follow the sweep order, so identical arguments give
identical bytes.
"""
from __future__ import annotations

import argparse
import io
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .bounds import NoAdmissibleThreshold, corollary6_bound, delta_E_bounded, epsilon_prime
from .emin import corollary3_bound, emin_exact_diagonal, emin_primal_small
from .fock import Hamiltonian
from .gates import DisplacementCase, SqueezingCase, displacement_bound, output_pmf, squeezing_bound


class UsageError(ValueError):
    pass


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return "%.12g" % x
    return str(x)


def parse_sweep(text: str, log: bool):
    try:
        lo, hi, n = text.split(":")
        lo, hi, n = float(lo), float(hi), int(n)
    except ValueError:
        raise UsageError(f"sweep must be lo:hi:points, got {text!r}")
    if n < 1 or hi < lo or (log and lo <= 0):
        raise UsageError(f"invalid sweep {text!r}")
    if n == 1:
        return [lo]
    return list(np.geomspace(lo, hi, n) if log else np.linspace(lo, hi, n))


class Table:
    def __init__(self, command: str, columns, meta: dict):
        self.command, self.columns, self.meta = command, list(columns), dict(meta)
        self.rows: list[list] = []
        self.extra: dict[str, "Table"] = {}

    def add(self, *row):
        self.rows.append(list(row))

    def csv(self) -> str:
        out = io.StringIO()
        out.write(f"# gate-energy {__version__}\n# command: {self.command}\n# energy unit: hbar*omega = 1\n")
        for k, v in self.meta.items():
            out.write(f"# {k}: {fmt(v)}\n")
        out.write(",".join(self.columns) + "\n")
        for r in self.rows:
            out.write(",".join(fmt(v) for v in r) + "\n")
        for name, t in self.extra.items():
            out.write(f"\n# table: {name}\n" + ",".join(t.columns) + "\n")
            for r in t.rows:
                out.write(",".join(fmt(v) for v in r) + "\n")
        return out.getvalue()

    def json(self) -> str:
        def conv(v):
            if isinstance(v, (bool, np.bool_)):
                return bool(v)
            if isinstance(v, (float, np.floating)):
                return float(fmt(v)) if math.isfinite(v) else fmt(v)
            if isinstance(v, (int, np.integer)):
                return int(v)
            return v

        def rows(t):
            return [{c: conv(v) for c, v in zip(t.columns, r)} for r in t.rows]

        doc = {"tool": f"gate-energy {__version__}", "command": self.command,
               "energy_unit": "hbar*omega", "meta": {k: conv(v) for k, v in self.meta.items()},
               "rows": rows(self)}
        for name, t in self.extra.items():
            doc[name] = rows(t)
        return json.dumps(doc, indent=2, sort_keys=False) + "\n"


def _ordered_map(fn, items, threads: int):
    if threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(threads) as ex:
        return list(ex.map(fn, items))


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_displacement(a) -> Table:
    if a.sweep_eps and a.sweep_E:
        raise UsageError("choose at most one of --sweep-eps and --sweep-E")
    eps_list = parse_sweep(a.sweep_eps, True) if a.sweep_eps else [a.eps]
    E_list = parse_sweep(a.sweep_E, False) if a.sweep_E else [a.E]
    if any(e is None for e in eps_list) or any(e is None for e in E_list):
        raise UsageError("--eps and --E are required unless swept")
    cases = []
    for eps in eps_list:
        for E in E_list:
            try:
                cases.append(DisplacementCase(complex(a.z), E, eps))
            except ValueError as exc:
                raise UsageError(str(exc))
    t = Table("displacement", ["eps", "E", "nu", "ebar_star", "bound", "term1", "term2", "vacuous_flag"],
              {"z": a.z, "ratio": a.ratio})
    for c, r in zip(cases, _ordered_map(lambda c: displacement_bound(c, ratio=a.ratio), cases, a.threads)):
        t.add(c.eps, c.E, r.extras["nu"], r.ebar_used, r.bound,
              r.components[0][1], -r.components[1][1], r.vacuous)
    return t


def cmd_squeezing(a) -> Table:
    eps_list = parse_sweep(a.sweep_eps, True) if a.sweep_eps else [a.eps]
    if any(e is None for e in eps_list):
        raise UsageError("--eps is required unless swept")
    try:
        cases = [SqueezingCase(a.xi, a.E, eps, a.input) for eps in eps_list]
    except ValueError as exc:
        raise UsageError(str(exc))
    t = Table("squeezing", ["eps", "input", "E_in", "mean_output_energy", "ebar_star", "bound", "vacuous_flag"],
              {"xi": a.xi, "E": a.E, "prefactor": a.prefactor, "coherent_variant": a.coherent_variant,
               "feasibility_cut": "n <= ebar - 1/2"})

    def one(c):
        try:
            return squeezing_bound(c, prefactor=a.prefactor, coherent_variant=a.coherent_variant)
        except NoAdmissibleThreshold:
            return None

    for c, r in zip(cases, _ordered_map(one, cases, a.threads)):
        if r is None:
            t.add(c.eps, c.input_kind, c.input_energy, math.nan, math.nan, math.nan, True)
        else:
            t.add(c.eps, c.input_kind, r.input_energy, r.extras["mean_output_energy"],
                  r.ebar_used, r.bound, r.vacuous)
    if a.emit_pmf:
        pmf = output_pmf(cases[0], a.coherent_variant)
        p = Table("pmf", ["n", "P"], {})
        for n, v in enumerate(pmf.probs):
            p.add(n, float(v))
        t.extra["pmf"] = p
    return t


def _random_unitary(d: int, rng) -> np.ndarray:
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def cmd_bounded(a) -> Table:
    if a.dim < 2 or not 0 < a.eps < 1:
        raise UsageError("need --dim >= 2 and 0 < --eps < 1")
    rng = np.random.default_rng(a.seed)
    H = Hamiltonian(np.arange(a.dim, dtype=float))
    if a.gate == "x":
        U = np.roll(np.eye(a.dim), 1, axis=0).astype(complex)
    else:
        U = _random_unitary(a.dim, rng)
    dE = delta_E_bounded(U, H)
    ep = 2 * math.sqrt(a.eps)
    b = corollary6_bound(dE, H.norm, ep)
    t = Table("bounded", ["dim", "gate", "eps", "delta_E", "normH", "eps_prime", "bound", "vacuous_flag"],
              {"seed": a.seed, "eps_prime_rule": "2 sqrt(eps)"})
    t.add(a.dim, a.gate, a.eps, dE, H.norm, ep, b, b <= 0)
    return t


def cmd_emin(a) -> Table:
    if not 2 <= a.dim <= 64 or not 0 <= a.eps <= 1:
        raise UsageError("need 2 <= --dim <= 64 and 0 <= --eps <= 1")
    rng = np.random.default_rng(a.seed)
    if a.state == "remark":
        H = Hamiltonian(np.arange(a.dim, dtype=float))
        p = np.zeros(a.dim)
        p[0], p[-1] = 1 - 1 / (a.dim - 1), 1 / (a.dim - 1)
    else:
        H = Hamiltonian(np.arange(a.dim, dtype=float) + 0.5)
        p = rng.dirichlet(np.ones(a.dim))
    primal = emin_primal_small(p, H, a.eps)
    greedy = emin_exact_diagonal(p, H, a.eps)
    t = Table("emin", ["ebar", "threshold_bound", "primal", "greedy", "gap"],
              {"dim": a.dim, "eps": a.eps, "state": a.state, "seed": a.seed})
    for eb in np.linspace(H.energies[0] + 0.5, H.norm + 1, a.points):
        t.add(float(eb), corollary3_bound(p, H, a.eps, float(eb)), primal.value, greedy.value, primal.gap)
    return t


def cmd_shift_model(a) -> Table:
    from .finite_models import bound_consistency_check, build_shift_model, implementation_fidelity
    if a.n0 < 1 or a.L < 1 or a.E <= 0:
        raise UsageError("need --n0 >= 1, --L >= 1 and --E > 0")
    model = build_shift_model("qubit_X", a.n0, a.L)
    br = implementation_fidelity(model, a.E)
    rep = bound_consistency_check(model, a.E, max(0.0, 1 - br.lower))
    t = Table("shift-model", ["n0", "L", "E", "fidelity_lower", "fidelity_upper", "eps_measured",
                              "battery_energy", "bound", "slack", "consistent"], {})
    t.add(a.n0, a.L, a.E, br.lower, br.upper, rep.eps_measured, rep.battery_energy,
          rep.bound, rep.slack, rep.consistent)
    return t


def cmd_sweep(a) -> Table:
    """Fixed-parameter data sets: displacement bound against eps or against E,
    and squeezing bounds per probe family against eps."""
    if a.set == "displacement-eps":
        ns = argparse.Namespace(z=1.0, E=4.0, eps=None, sweep_eps="1e-8:1e-2:25", sweep_E=None,
                                ratio=a.ratio, threads=a.threads)
        return cmd_displacement(ns)
    if a.set == "displacement-energy":
        ns = argparse.Namespace(z=1.0, E=None, eps=1e-6, sweep_eps=None, sweep_E="1:10:19",
                                ratio=a.ratio, threads=a.threads)
        return cmd_displacement(ns)
    t = None
    for kind in ("coherent", "squeezed", "number"):
        ns = argparse.Namespace(xi=0.5, E=4.5, eps=None, sweep_eps="1e-8:1e-2:13", input=kind,
                                prefactor="printed", coherent_variant="phase", emit_pmf=False,
                                threads=a.threads)
        part = cmd_squeezing(ns)
        if t is None:
            t = part
            t.meta.pop("E", None)
            t.meta["E"] = 4.5
        else:
            t.rows.extend(part.rows)
    return t


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="gate-energy", description=__doc__.splitlines()[0])
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--output", "-o", default="-")
    p.add_argument("--threads", type=int, default=1)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    d = sub.add_parser("displacement")
    d.add_argument("--z", type=complex, required=True)
    d.add_argument("--E", type=float)
    d.add_argument("--eps", type=float)
    d.add_argument("--sweep-eps")
    d.add_argument("--sweep-E")
    d.add_argument("--ratio", choices=["constraint", "nu"], default="constraint")

    s = sub.add_parser("squeezing")
    s.add_argument("--xi", type=float, required=True)
    s.add_argument("--E", type=float, required=True)
    s.add_argument("--eps", type=float)
    s.add_argument("--sweep-eps")
    s.add_argument("--input", choices=["number", "coherent", "squeezed"], default="coherent")
    s.add_argument("--prefactor", choices=["printed", "text"], default="printed")
    s.add_argument("--coherent-variant", choices=["phase", "printed"], default="phase")
    s.add_argument("--emit-pmf", action="store_true")

    b = sub.add_parser("bounded")
    b.add_argument("--dim", type=int, required=True)
    b.add_argument("--gate", choices=["x", "random"], default="x")
    b.add_argument("--eps", type=float, required=True)
    b.add_argument("--seed", type=int, default=0)

    e = sub.add_parser("emin")
    e.add_argument("--dim", type=int, required=True)
    e.add_argument("--eps", type=float, required=True)
    e.add_argument("--state", choices=["random-diagonal", "remark"], default="random-diagonal")
    e.add_argument("--points", type=int, default=20)
    e.add_argument("--seed", type=int, default=0)

    m = sub.add_parser("shift-model")
    m.add_argument("--n0", type=int, required=True)
    m.add_argument("--L", type=int, required=True)
    m.add_argument("--E", type=float, default=1.0)

    w = sub.add_parser("sweep")
    w.add_argument("--set", choices=["displacement-eps", "displacement-energy", "squeezing-probes"],
                   required=True)
    w.add_argument("--ratio", choices=["constraint", "nu"], default="constraint")
    return p


COMMANDS = {"displacement": cmd_displacement, "squeezing": cmd_squeezing, "bounded": cmd_bounded,
            "emin": cmd_emin, "shift-model": cmd_shift_model, "sweep": cmd_sweep}


def run(argv=None, stdout=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    parser = build_parser()
    try:
        a = parser.parse_args(argv)
        if a.threads < 1:
            raise UsageError("--threads must be >= 1")
        table = COMMANDS[a.command](a)
    except UsageError as exc:
        print(f"gate-energy: error: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except Exception as exc:
        print(f"gate-energy: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    text = table.csv() if a.format == "csv" else table.json()
    if a.output == "-":
        stdout.write(text)
    else:
        with open(a.output, "w") as fh:
            fh.write(text)
    return 0


def main() -> None:
    sys.exit(run())
