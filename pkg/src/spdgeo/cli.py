"""
Command-line front end.

Matrices are read from plain text: whitespace-separated numbers, one matrix
per block, blocks separated by blank lines.  Commands taking several files
pair their blocks in order; a file holding a single block is broadcast.

Exit codes: 0 success, 2 parse or specification error, 3 domain or SPD
violation, 4 unsupported operation.
"""
from __future__ import annotations

import argparse
import os
import sys
import time

import numpy as np

from . import classical_metrics as cm
from .exceptions import (
    DomainError,
    InvalidSpecError,
    NotSPDError,
    NotSymmetricError,
    UnsupportedOperationError,
)
from .geodesic_engine import (
    IntegratorConfig,
    bw_transport_ode,
    connection_transport,
    hamiltonian_geodesic,
)
from .invariant_metrics import default_grid, duality_defect, spectral_triple, validate_triple
from .kernel_family import MEANS, BostSpec, MeanKernelSpec, bost_as_separable, builtin_kernel
from .symlin import as_spd, sym

EXIT_OK, EXIT_PARSE, EXIT_DOMAIN, EXIT_UNSUPPORTED = 0, 2, 3, 4


class ParseError(ValueError):
    pass


# parsing -------------------------------------------------------------------

def parse_matrices(text):
    """Blocks of rows separated by blank lines -> list of symmetrized arrays."""
    blocks, cur = [], []
    for line in text.splitlines():
        s = line.strip()
        if not s or s.startswith("#"):
            if cur:
                blocks.append(cur)
                cur = []
            continue
        try:
            cur.append([float(v) for v in s.split()])
        except ValueError as err:
            raise ParseError(f"bad number in line {line!r}") from err
    if cur:
        blocks.append(cur)
    if not blocks:
        raise ParseError("no matrix found")
    n = len(blocks[0])
    mats = []
    for k, b in enumerate(blocks):
        if len(b) != n or any(len(r) != n for r in b):
            raise ParseError(f"block {k} is not {n}x{n}")
        mats.append(sym(np.array(b)))
    return mats


def read_matrices(path):
    try:
        with open(path) as fh:
            return parse_matrices(fh.read())
    except OSError as err:
        raise ParseError(f"cannot read {path}: {err.strerror}") from err


def _kv(body):
    out = {}
    if not body:
        return out
    for item in body.split(","):
        if "=" not in item:
            raise ParseError(f"expected key=value, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip().lower()] = v.strip()
    return out


def _num(opts, key, default):
    try:
        return float(opts.pop(key, default))
    except ValueError as err:
        raise ParseError(f"{key} must be a number") from err


def parse_metric(text):
    """Parse ``kind[:key=val,...]``.

    Classical kinds (``e``, ``le``, ``ai``, ``pa`` with ``alpha, beta``;
    ``bw``, ``bkm``) give a :class:`MetricId`.  ``kernel:name=..``,
    ``mean:m=..,theta=..,a=..``, ``bost:kernel=..,alpha=..,beta=..`` and
    ``sep:kernel=..,alpha=..,beta=..`` give a builder ``n -> metric``.
    """
    kind, _, body = text.partition(":")
    kind = kind.strip().lower()
    opts = _kv(body)
    try:
        if kind == "kernel":
            k = builtin_kernel(opts.pop("name", ""))
            _no_extra(opts)
            return lambda n: k
        if kind == "mean":
            m = opts.pop("m", "arithmetic")
            if m not in MEANS:
                raise ParseError(f"unknown mean {m!r}; expected one of {sorted(MEANS)}")
            spec = MeanKernelSpec(MEANS[m], _num(opts, "theta", 1.0), _num(opts, "a", 1.0), f"{m}^theta")
            _no_extra(opts)
            return lambda n: spec.kernel()
        if kind in ("bost", "sep"):
            k = builtin_kernel(opts.pop("kernel", ""))
            a, b = _num(opts, "alpha", 1.0), _num(opts, "beta", 0.0)
            _no_extra(opts)
            if kind == "bost":
                return lambda n: BostSpec(k, a, b, n)
            return lambda n: bost_as_separable(BostSpec(k, a, b, n))
        a, b = _num(opts, "alpha", 1.0), _num(opts, "beta", 0.0)
        _no_extra(opts)
        return cm.MetricId(kind, a, b)
    except InvalidSpecError as err:
        raise ParseError(str(err)) from err


def _no_extra(opts):
    if opts:
        raise ParseError(f"unexpected keys {sorted(opts)}")


def _classical(metric):
    if not isinstance(metric, cm.MetricId):
        raise ParseError("this command needs a classical metric (e, le, ai, bw, bkm, pa)")
    return metric


def _spectral(metric, n):
    return metric.spectral_spec(n) if isinstance(metric, cm.MetricId) else metric(n)


# formatting ----------------------------------------------------------------

def fmt(x, prec):
    s = f"{x:.{prec}f}"
    if s.startswith("-") and not s.strip("-0."):
        s = s[1:]
    return s


def fmt_matrix(M, prec):
    return "\n".join(" ".join(fmt(v, prec) for v in row) for row in np.asarray(M))


def _pairs(*lists):
    m = max(len(l) for l in lists)
    for l in lists:
        if len(l) not in (1, m):
            raise ParseError(f"files hold {sorted({len(x) for x in lists})} blocks; counts must match or be 1")
    return [tuple(l[k] if len(l) > 1 else l[0] for l in lists) for k in range(m)]


def _emit_blocks(mats, prec):
    print("\n\n".join(fmt_matrix(M, prec) for M in mats))


# commands ------------------------------------------------------------------

def cmd_dist(args):
    mid = _classical(args.metric)
    for S, L in _pairs(read_matrices(args.a), read_matrices(args.b)):
        print(fmt(cm.dist(mid, S, L), args.precision))


def cmd_exp(args):
    mid = _classical(args.metric)
    out = []
    for S, X in _pairs(read_matrices(args.sigma), read_matrices(args.x)):
        if args.mode == "closed":
            out.append(cm.exp_map(mid, S, X, args.t))
            continue
        tr = hamiltonian_geodesic(mid, S, X, args.t, IntegratorConfig(args.steps))
        if args.trajectory:
            for t, P in zip(tr.times, tr.points):
                print(" ".join(fmt(v, args.precision) for v in [t, *P.ravel()]))
        else:
            out.append(tr.endpoint)
    if out:
        _emit_blocks(out, args.precision)


def cmd_log(args):
    mid = _classical(args.metric)
    pairs = _pairs(read_matrices(args.sigma), read_matrices(args.lam))
    _emit_blocks([cm.log_map(mid, S, L) for S, L in pairs], args.precision)


def cmd_transport(args):
    mid = _classical(args.metric)
    cfg = IntegratorConfig(args.steps)
    out = []
    for S, L, X in _pairs(read_matrices(args.sigma), read_matrices(args.lam), read_matrices(args.x)):
        if args.mode == "closed":
            out.append(cm.parallel_transport(mid, S, L, X))
        elif mid.kind == "bures_wasserstein":
            out.append(bw_transport_ode(S, L, X, cfg))
        else:
            out.append(connection_transport(mid, S, L, X, cfg))
    _emit_blocks(out, args.precision)


def cmd_curvature(args):
    mid = _classical(args.metric)
    for S, X, Y in _pairs(read_matrices(args.sigma), read_matrices(args.x), read_matrices(args.y)):
        print(fmt(cm.sectional_curvature(mid, S, X, Y), args.precision))


def _seed():
    raw = os.environ.get("SPDGEO_SEED", "0")
    try:
        return int(raw)
    except ValueError as err:
        raise ParseError(f"SPDGEO_SEED must be an integer, got {raw!r}") from err


def cmd_validate(args):
    spec = _spectral(args.metric, args.n)
    triple = spectral_triple(spec, args.n)
    report = validate_triple(triple, default_grid(args.n, _seed(), args.samples))
    print(report)
    return EXIT_OK if report.passed else 1


def cmd_cometric_check(args):
    for S in read_matrices(args.sigma):
        S = as_spd(S)
        print(fmt(duality_defect(_spectral(args.metric, S.shape[0]), S), args.precision))


def cmd_bench(args):
    mid = args.metric
    try:
        steps = [int(s) for s in args.steps_list.split(",")]
    except ValueError as err:
        raise ParseError("--steps-list must be comma-separated integers") from err
    S = as_spd(read_matrices(args.sigma)[0])
    X = read_matrices(args.x)[0]
    exact = None
    if isinstance(mid, cm.MetricId) and mid.kind != "bkm":
        exact = cm.exp_map(mid, S, X, args.t)
    spec = mid if isinstance(mid, cm.MetricId) else mid(S.shape[0])
    print("steps error seconds")
    for k in steps:
        t0 = time.perf_counter()
        end = hamiltonian_geodesic(spec, S, X, args.t, IntegratorConfig(k)).endpoint
        dt = time.perf_counter() - t0
        err = "nan" if exact is None else f"{np.max(np.abs(end - exact)):.3e}"
        print(f"{k} {err} {dt:.3f}")


# entry point -----------------------------------------------------------------

def _precision(v):
    p = int(v)
    if not 1 <= p <= 17:
        raise argparse.ArgumentTypeError("precision must lie in [1, 17]")
    return p


def _metric_arg(v):
    try:
        return parse_metric(v)
    except ParseError as err:
        raise argparse.ArgumentTypeError(str(err)) from err


def build_parser():
    p = argparse.ArgumentParser(prog="spdgeo", description="Riemannian geometry of SPD matrices.")
    p.add_argument("--precision", type=_precision, default=12, help="decimals printed (1-17)")
    sub = p.add_subparsers(dest="command", required=True)

    def cmd(name, fn, files, help_):
        c = sub.add_parser(name, help=help_)
        c.add_argument("--metric", type=_metric_arg, required=True)
        for f in files:
            c.add_argument(f)
        c.set_defaults(func=fn)
        return c

    cmd("dist", cmd_dist, ["a", "b"], "geodesic distances between paired blocks")
    c = cmd("exp", cmd_exp, ["sigma", "x"], "exponential map")
    c.add_argument("--t", type=float, default=1.0)
    c.add_argument("--mode", choices=["closed", "hamiltonian"], default="closed")
    c.add_argument("--steps", type=int, default=100)
    c.add_argument("--trajectory", action="store_true", help="print t and row-major entries per step")
    cmd("log", cmd_log, ["sigma", "lam"], "logarithm map")
    c = cmd("transport", cmd_transport, ["sigma", "lam", "x"], "parallel transport")
    c.add_argument("--mode", choices=["closed", "ode"], default="closed")
    c.add_argument("--steps", type=int, default=100)
    cmd("curvature", cmd_curvature, ["sigma", "x", "y"], "sectional curvature")
    c = cmd("validate", cmd_validate, [], "check compatibility, positivity and symmetry")
    c.add_argument("--n", type=int, default=3)
    c.add_argument("--samples", type=int, default=200)
    cmd("cometric-check", cmd_cometric_check, ["sigma"], "max |G G* - I|")
    c = cmd("bench", cmd_bench, ["sigma", "x"], "Hamiltonian integrator against the closed form")
    c.add_argument("--t", type=float, default=1.0)
    c.add_argument("--steps-list", default="25,50,100,200")
    for sp in sub.choices.values():
        sp.add_argument("--precision", type=_precision, default=argparse.SUPPRESS)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if getattr(args, "steps", 1) < 1:
            raise ParseError("--steps must be positive")
        code = args.func(args)
    except (ParseError, InvalidSpecError) as err:
        return _fail(err, EXIT_PARSE)
    except UnsupportedOperationError as err:
        return _fail(err, EXIT_UNSUPPORTED)
    except (NotSPDError, NotSymmetricError, DomainError) as err:
        return _fail(err, EXIT_DOMAIN)
    return code or EXIT_OK


def _fail(err, code):
    msg = " ".join(str(err).split())
    print(f"spdgeo: error: {msg}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
