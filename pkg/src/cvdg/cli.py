"""``cvdg`` command-line driver.

Every command reads one JSON experiment config and writes CSV (or, for
``validate``, a short text report). Exit codes: 0 ok, 1 usage, 2 invalid
state, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import gaussian as gs
from .correlations import (CentredGaussian, MAX_RECURSION_ORDER, cumulant,
                           truncated_correlation_recursive)
from .degauss import (DegaussedState, Negativity, Sign, SubtractionSpec,
                      classify_negativity, negativity_witness)
from .errors import CVDGError, CutoffError, DegenerateNoiseError, InvalidStateError, VacuumSubtractionError
from .phasespace import random_orthogonal_symplectic
from .reduction import ModeSubset, purity, reduce

EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def write_csv(rows, header, out) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(v) for v in r])
    text = buf.getvalue()
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def worker_count() -> int:
    env = os.environ.get("CVDG_THREADS")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise UsageError(f"CVDG_THREADS must be an integer, got {env!r}") from None
        if n < 1:
            raise UsageError("CVDG_THREADS must be at least 1")
        return n
    return min(8, os.cpu_count() or 1)


def parallel_map(fn, items):
    """Map in worker threads; results come back in input order."""
    items = list(items)
    n = worker_count()
    if n == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


# -- config -------------------------------------------------------------------

@dataclass
class Sweep:
    name: str
    start: float
    stop: float
    steps: int

    @classmethod
    def from_dict(cls, d: dict) -> "Sweep":
        try:
            sw = cls(str(d["name"]), float(d["from"]), float(d["to"]), int(d["steps"]))
        except KeyError as e:
            raise UsageError(f"sweep is missing {e.args[0]!r}") from None
        if sw.steps < 2:
            raise UsageError("sweep needs at least 2 steps")
        return sw

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.steps)


@dataclass
class ExperimentConfig:
    state: dict
    spec: dict | None = None
    sweep: Sweep | None = None
    out: str | None = None
    seed: int = 0
    extra: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, d: dict, base_dir: Path | None = None) -> "ExperimentConfig":
        if "state" not in d:
            raise UsageError("config needs a 'state' entry")
        state = dict(d["state"])
        if "file" in state and base_dir is not None:
            state["file"] = str((base_dir / state["file"]))
        sweep = Sweep.from_dict(d["sweep"]) if "sweep" in d else None
        known = {"state", "spec", "sweep", "out", "seed"}
        return cls(state, d.get("spec"), sweep, d.get("out"), int(d.get("seed", 0)),
                   {k: v for k, v in d.items() if k not in known})

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        path = Path(path)
        try:
            d = json.loads(path.read_text())
        except (OSError, json.JSONDecodeError) as e:
            raise UsageError(f"cannot read config {path}: {e}") from None
        return cls.from_dict(d, path.parent)


CONSTRUCTORS = {
    "vacuum": lambda p: gs.vacuum(int(p.get("m", 1))),
    "thermal": lambda p: gs.thermal(int(p.get("m", 1)), float(p["nu"])),
    "two-mode-squeezed": lambda p: gs.two_mode_squeezed(float(p["s_db"])),
    "squeezed": lambda p: _squeezed(p),
}


def _squeezed(p):
    db = np.atleast_1d(np.asarray(p["db"], dtype=float))
    K = gs.squeezing_matrix(db)
    return K @ K


def build_covariance(state: dict, **overrides) -> np.ndarray:
    """Covariance from a state source, with ``noise`` (delta) added last."""
    p = {**state, **overrides}
    if "file" in p:
        try:
            V = gs.load_covariance(p["file"])
        except OSError as e:
            raise UsageError(f"cannot read covariance file: {e}") from None
    elif "V" in p:
        V = gs.check_symmetric(p["V"])
    else:
        name = p.get("constructor")
        if name not in CONSTRUCTORS:
            raise UsageError(f"unknown state constructor {name!r}; "
                             f"choose from {sorted(CONSTRUCTORS)} or give 'file'")
        try:
            V = CONSTRUCTORS[name](p)
        except KeyError as e:
            raise UsageError(f"constructor {name!r} needs parameter {e.args[0]!r}") from None
    delta = float(p.get("noise", 0.0))
    if delta:
        V = gs.add_noise(V, delta)
    return gs.require_valid(V)


def state_displacement(state: dict, m: int) -> np.ndarray:
    xi = np.asarray(state.get("xi", np.zeros(2 * m)), dtype=float)
    if xi.shape != (2 * m,):
        raise UsageError(f"displacement must have length {2 * m}")
    return xi


def load_spec(d, sign=None) -> SubtractionSpec:
    if d is None:
        raise UsageError("this command needs a 'spec' entry")
    d = dict(d)
    if sign is not None:
        d["sign"] = sign
    try:
        return SubtractionSpec.from_dict(d)
    except KeyError as e:
        raise UsageError(f"spec is missing {e.args[0]!r}") from None


# -- commands -----------------------------------------------------------------

def cmd_validate(V, out=None) -> int:
    verdict = gs.validate(V)
    lines = []
    if verdict.valid:
        spectrum = gs.symplectic_spectrum(V)
        pure = bool(np.all(np.abs(spectrum - 1) < 1e-8))
        lines.append("valid, " + ("pure" if pure else "mixed"))
        lines.append("symplectic spectrum: " + " ".join(fmt(x) for x in spectrum))
        lines.append("purity: " + fmt(gs.gaussian_purity(V)))
    else:
        lines.append("invalid")
    lines.append("min eigenvalue of V + iJ: " + fmt(verdict.min_eigenvalue))
    text = "\n".join(lines) + "\n"
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)
    return EXIT_OK if verdict.valid else EXIT_INVALID


def _mode_pair(cfg: ExperimentConfig, m: int):
    pair = cfg.extra.get("modes")
    if pair is None:
        if m != 2:
            raise UsageError("purity-scan needs 'modes': {'a': [...], 'b': [...]} for m != 2")
        # amplitude of the first supermode and phase of the second
        return np.array([1.0, 0, 0, 0]), np.array([0, 0, 0, 1.0])
    a = np.asarray(pair["a"], dtype=float)
    b = np.asarray(pair["b"], dtype=float)
    if a.shape != (2 * m,) or b.shape != (2 * m,):
        raise UsageError("mode vectors have the wrong length")
    return a, b


def purity_row(V, a, b, x2_sq):
    g = np.sqrt(1.0 - x2_sq) * a + np.sqrt(x2_sq) * b
    g = g / np.linalg.norm(g)
    subset = ModeSubset.from_modes([g])
    mu_g = gs.gaussian_purity(subset.vectors @ V @ subset.vectors.T)
    row = [x2_sq, mu_g]
    for sign in (Sign.SUBTRACT, Sign.ADD):
        try:
            st = DegaussedState.from_covariance(V, SubtractionSpec.single(g, sign))
        except VacuumSubtractionError:
            warnings.warn(f"x2_sq={x2_sq:g}: no photons to subtract, cell left empty")
            row.append(None)
            continue
        row.append(purity(reduce(st, subset)))
    return row


def cmd_purity_scan(cfg: ExperimentConfig, out=None) -> int:
    V = build_covariance(cfg.state)
    m = V.shape[0] // 2
    a, b = _mode_pair(cfg, m)
    sweep = cfg.sweep or Sweep("x2_sq", 0.0, 1.0, 101)
    xs = np.clip(sweep.values(), 0.0, 1.0)
    rows = parallel_map(lambda x: purity_row(V, a, b, x), xs)
    write_csv(rows, ["x2_sq", "mu_gaussian", "mu_subtract", "mu_add"], out)
    return EXIT_OK


def _witness(V, spec):
    try:
        return negativity_witness(DegaussedState.from_covariance(V, spec))
    except VacuumSubtractionError:
        return None


def _negativity_row(V, spec_sub, spec_add, value):
    ws = _witness(V, spec_sub)
    wa = _witness(V, spec_add)
    neg = lambda w: None if w is None else classify_negativity(w) is Negativity.NEGATIVE
    return [value, ws, wa, neg(ws), neg(wa)]


def cmd_negativity_scan(cfg: ExperimentConfig, out=None) -> int:
    if cfg.sweep is None:
        raise UsageError("negativity-scan needs a 'sweep' entry")
    sweep = cfg.sweep
    values = sweep.values()
    if sweep.name == "delta":
        def point(v):
            V = build_covariance(cfg.state, noise=float(cfg.state.get("noise", 0.0)) + v)
            return V, load_spec(cfg.spec, "subtract"), load_spec(cfg.spec, "add")
    elif sweep.name == "squeezing":
        if cfg.state.get("constructor") != "two-mode-squeezed":
            raise UsageError("squeezing sweeps use the two-mode-squeezed constructor")

        def point(v):
            V = build_covariance(cfg.state, s_db=v)
            return V, load_spec(cfg.spec, "subtract"), load_spec(cfg.spec, "add")
    elif sweep.name == "mixture_size":
        V0 = build_covariance(cfg.state)
        m = V0.shape[0] // 2
        basis = cfg.extra.get("basis", "random")
        if basis == "random":
            O = random_orthogonal_symplectic(m, np.random.default_rng(cfg.seed))
            modes = O[:, :m].T
        elif basis == "standard":
            modes = np.eye(2 * m)[:m]
        else:
            raise UsageError("basis must be 'random' or 'standard'")
        values = np.unique(np.clip(np.round(values).astype(int), 1, m))

        def point(k):
            return (V0, SubtractionSpec.uniform(modes[:k], "subtract"),
                    SubtractionSpec.uniform(modes[:k], "add"))
    else:
        raise UsageError(f"unknown sweep {sweep.name!r}; use delta, squeezing or mixture_size")

    rows = parallel_map(lambda v: _negativity_row(*point(v), v), values)
    write_csv(rows, ["sweep_value", "witness_subtract", "witness_add",
                     "negative_subtract", "negative_add"], out)
    return EXIT_OK


def cmd_wigner_slice(cfg: ExperimentConfig, out=None, oracle: bool = False) -> int:
    V = build_covariance(cfg.state)
    m = V.shape[0] // 2
    xi = state_displacement(cfg.state, m)
    spec = load_spec(cfg.spec)
    state = DegaussedState(gs.GaussianState(V, xi), spec)
    plane = cfg.extra.get("plane", {})
    point = np.asarray(plane.get("point", np.zeros(2 * m)), dtype=float)
    u = np.asarray(plane.get("u", np.eye(2 * m)[0]), dtype=float)
    v = np.asarray(plane.get("v", np.eye(2 * m)[m]), dtype=float)
    lo, hi = plane.get("extent", [-3.0, 3.0])
    steps = int(plane.get("steps", 41))
    if steps < 2:
        raise UsageError("plane needs at least 2 steps")
    if not (point.shape == u.shape == v.shape == (2 * m,)):
        raise UsageError("plane vectors have the wrong length")
    grid = np.linspace(lo, hi, steps)
    pts = [(a, b) for a in grid for b in grid]
    betas = np.array([point + a * u + b * v for a, b in pts])
    W = state.wigner(betas)
    header = ["u", "v", "W"]
    rows = [[a, b, w] for (a, b), w in zip(pts, W)]
    if oracle:
        if m > 2:
            raise UsageError("--oracle is limited to m <= 2")
        from . import fockoracle
        rho = fockoracle.build_degaussed_adaptive(V, xi, spec)
        Wo = parallel_map(lambda b: fockoracle.fock_wigner(rho, b), betas)
        header.append("W_oracle")
        for r, w in zip(rows, Wo):
            r.append(w)
    write_csv(rows, header, out)
    return EXIT_OK


def cmd_cumulants(cfg: ExperimentConfig, out=None) -> int:
    V = build_covariance(cfg.state)
    m = V.shape[0] // 2
    state = CentredGaussian(V) if cfg.spec is None else \
        DegaussedState.from_covariance(V, load_spec(cfg.spec))
    f = np.asarray(cfg.extra.get("f", np.eye(2 * m)[0]), dtype=float)
    if f.shape != (2 * m,):
        raise UsageError("'f' has the wrong length")
    orders = [int(n) for n in cfg.extra.get("orders", range(1, 7))]
    if any(n < 1 or n > MAX_RECURSION_ORDER for n in orders):
        raise UsageError(f"orders must lie in 1..{MAX_RECURSION_ORDER}")
    rows = [[n, cumulant(state, f, n), truncated_correlation_recursive(state, [f] * n).real]
            for n in orders]
    write_csv(rows, ["order", "cumulant", "recursive"], out)
    return EXIT_OK


# -- entry point --------------------------------------------------------------

def make_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="cvdg", description="Photon-added and -subtracted Gaussian states.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    v = sub.add_parser("validate", help="check a covariance matrix")
    v.add_argument("file", nargs="?", help="covariance JSON")
    v.add_argument("--config", help="experiment config whose state is checked")
    v.add_argument("--out")

    for name, helptext in [("purity-scan", "reduced purity along x2^2"),
                           ("negativity-scan", "negativity witness sweep"),
                           ("wigner-slice", "Wigner function on a 2-plane"),
                           ("cumulants", "cumulants of one quadrature")]:
        c = sub.add_parser(name, help=helptext)
        c.add_argument("--config", required=True)
        c.add_argument("--out")
        if name == "wigner-slice":
            c.add_argument("--oracle", action="store_true", help=argparse.SUPPRESS)
    return p


def run(args) -> int:
    if args.command == "validate":
        if args.file:
            try:
                V = gs.load_covariance(args.file)
            except (OSError, json.JSONDecodeError, KeyError) as e:
                raise UsageError(f"cannot read covariance file: {e}") from None
        elif args.config:
            cfg = ExperimentConfig.load(args.config)
            state = {k: v for k, v in cfg.state.items()}
            V = _raw_covariance(state)
        else:
            raise UsageError("validate needs a covariance file or --config")
        return cmd_validate(V, args.out)

    cfg = ExperimentConfig.load(args.config)
    out = args.out if args.out is not None else cfg.out
    if args.command == "purity-scan":
        return cmd_purity_scan(cfg, out)
    if args.command == "negativity-scan":
        return cmd_negativity_scan(cfg, out)
    if args.command == "wigner-slice":
        return cmd_wigner_slice(cfg, out, oracle=args.oracle)
    return cmd_cumulants(cfg, out)


def _raw_covariance(state):
    """Like ``build_covariance`` but without the validity check."""
    try:
        return build_covariance(state)
    except InvalidStateError:
        pass
    if "file" in state:
        return gs.load_covariance(state["file"])
    return gs.check_symmetric(state["V"])


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        return run(args)
    except UsageError as e:
        print(f"cvdg: {e}", file=sys.stderr)
        return EXIT_USAGE
    except InvalidStateError as e:
        print(f"cvdg: invalid state: {e}", file=sys.stderr)
        return EXIT_INVALID
    except (VacuumSubtractionError, DegenerateNoiseError, CutoffError,
            np.linalg.LinAlgError) as e:
        print(f"cvdg: numeric failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except (CVDGError, ValueError, KeyError, TypeError) as e:
        print(f"cvdg: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
