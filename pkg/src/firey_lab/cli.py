"""Command-line front end.

Every run writes its outputs, a ``manifest.json`` (inputs, versions,
tolerances, checksums) and a ``timings.json`` into ``--out``. Exit codes:
0 success, 1 precondition or verification failure (error JSON on stdout and
in ``error.json``), 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import platform
import sys
import time

import numpy as np

from . import __version__, construct, gclass, geometry, measure, solve2d, symmetrize
from .errors import FireyError, InvalidInput, VerificationFailure
from .geometry import AxisymBody, CircleGrid, ProfileSupport
from .serialize import dumps, sha256_file, write_csv, write_json

DEFAULT_OUT = "firey_out"


# ---------------------------------------------------------------------------
# argument types
# ---------------------------------------------------------------------------

def grid_size(text):
    try:
        N = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if N < 256 or N & (N - 1):
        raise argparse.ArgumentTypeError("grid size must be a power of two >= 256")
    return N


def positive_float(text):
    try:
        x = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not (x > 0 and np.isfinite(x)):
        raise argparse.ArgumentTypeError("must be positive")
    return x


def u64(text):
    try:
        x = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= x < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return x


def point(text):
    try:
        xs = [float(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected x,y but got {text!r}") from None
    if len(xs) != 2:
        raise argparse.ArgumentTypeError(f"expected x,y but got {text!r}")
    return np.array(xs)


def float_list(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated numbers: {text!r}") from None


def int_list(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated integers: {text!r}") from None


# ---------------------------------------------------------------------------
# run bookkeeping
# ---------------------------------------------------------------------------

class Run:
    """Collects outputs, checksums and timings for one invocation."""

    def __init__(self, args):
        self.args = args
        self.out = args.out
        os.makedirs(self.out, exist_ok=True)
        # an error record from an earlier run in the same directory is stale now
        if os.path.isfile(self.path("error.json")):
            os.remove(self.path("error.json"))
        self.outputs = []
        self.inputs = {}
        self.tolerances = {}
        self.timings = {}
        self._t0 = time.perf_counter()

    def path(self, name):
        return os.path.join(self.out, name)

    def add_input(self, path):
        if path and os.path.isfile(path):
            self.inputs[path] = sha256_file(path)

    def json(self, name, obj):
        write_json(self.path(name), obj)
        self.outputs.append(name)

    def csv(self, name, header, rows):
        write_csv(self.path(name), header, rows)
        self.outputs.append(name)

    def emit(self, stem, obj, header, rows):
        """Write ``stem.json`` or ``stem.csv`` depending on --format."""
        if self.args.format == "csv":
            self.csv(stem + ".csv", header, rows)
        else:
            self.json(stem + ".json", obj)

    def body(self, stem, body):
        if self.args.format == "csv":
            L = body.profile if isinstance(body, AxisymBody) else body
            self.csv(stem + ".csv", ["phi", "h"], zip(L.phi, L.h))
        else:
            self.json(stem + ".json", geometry.body_to_dict(body))

    def stage(self, name):
        run = self

        class _Stage:
            def __enter__(self):
                self.t = time.perf_counter()

            def __exit__(self, *exc):
                run.timings[name] = time.perf_counter() - self.t
                return False

        return _Stage()

    def finish(self, status, code):
        self.timings["total"] = time.perf_counter() - self._t0
        config = {k: v for k, v in sorted(vars(self.args).items()) if k not in ("out", "func")}
        manifest = {
            "subcommand": self.args.command,
            "config": {k: (v.tolist() if isinstance(v, np.ndarray) else v) for k, v in config.items()},
            "inputs": self.inputs,
            "versions": versions(),
            "tolerances": self.tolerances,
            "status": status,
            "exit_code": code,
            "outputs": {name: sha256_file(self.path(name)) for name in self.outputs},
        }
        write_json(self.path("manifest.json"), manifest)
        write_json(self.path("timings.json"), self.timings)


def versions():
    import scipy
    out = {"firey_lab": __version__, "python": platform.python_version(),
           "numpy": np.__version__, "scipy": scipy.__version__}
    try:
        import numba
        out["numba"] = numba.__version__
    except ImportError:
        out["numba"] = None
    return out


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------

def _resample(prof: ProfileSupport, N):
    if N is None or N == prof.N:
        return prof
    if not prof.smooth:
        return ProfileSupport.from_polygon(CircleGrid(N), prof.polygon)
    grid = CircleGrid(N)
    return ProfileSupport(grid, prof.evaluate(grid.angles))


def load_body(run: Run, path, planar=False):
    run.add_input(path)
    body = geometry.load_body(path)
    if isinstance(body, AxisymBody):
        if planar:
            raise InvalidInput("this subcommand needs a planar body (n = 2)", n=body.n)
        return AxisymBody(body.n, _resample(body.profile, run.args.grid_n))
    return _resample(body, run.args.grid_n)


def _n_of(body):
    return body.n if isinstance(body, AxisymBody) else 2


def load_G(run: Run, spec, n):
    if spec.endswith(".json"):
        run.add_input(spec)
    return gclass.preset(spec, n, run.args.c1, run.args.c2)


def _residual_rows(rep):
    return zip(rep.phi, rep.h, rep.f, rep.Gh, rep.residual, rep.included)


RESIDUAL_HEADER = ["phi", "h", "f", "G_h", "residual", "included"]


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_density(run, a):
    body = load_body(run, a.body)
    run.tolerances["tol_convex"] = a.tol
    with run.stage("density"):
        D = measure.density(body, mode=a.mode, tol=a.tol)
    run.emit("density", D, ["phi", "f"], zip(D.phi, D.f))
    return {"n": D.n, "min_f": float(D.f.min()), "max_f": float(D.f.max()), "clamped": D.clamped}


def cmd_polar(run, a):
    body = load_body(run, a.body)
    with run.stage("polar"):
        if isinstance(body, AxisymBody):
            P = AxisymBody(body.n, geometry.polar_support(body.profile))
        else:
            P = geometry.polar_support(body)
    run.body("polar_body", P)
    return {"volume": measure.volume(P), "polar_volume_of_input": measure.polar_volume(body)}


def cmd_steiner(run, a):
    L = load_body(run, a.body, planar=True)
    e = geometry.unit(a.angle)
    with run.stage("steiner"):
        S = symmetrize.steiner_symmetral(L, e, sample=a.sample)
    run.body("steiner_body", S)
    return {"direction": e.tolist(), "volume_input": measure.volume(L), "volume_output": measure.volume(S),
            "polar_volume_input": measure.polar_volume(L) if np.all(L.h > 0) else None,
            "polar_volume_output": measure.polar_volume(S)}


def cmd_santalo(run, a):
    L = load_body(run, a.body, planar=True)
    tol = a.tol or 1e-10
    run.tolerances["grad_tol"] = tol
    with run.stage("santalo"):
        res = symmetrize.santalo_point(L, tol=tol, return_info=True)
        bary = symmetrize.polar_barycentre(L, res.point)
    out = {"point": res.point, "polar_volume": res.polar_volume, "grad_norm": res.gradient_norm,
           "iterations": res.iterations, "polar_barycentre": bary}
    run.emit("santalo", out, ["x", "y", "polar_volume", "grad_norm"],
             [[res.point[0], res.point[1], res.polar_volume, res.gradient_norm]])
    return out


def cmd_check_an(run, a):
    G = load_G(run, a.G, a.n)
    with run.stage("check"):
        cert = gclass.check_An(G, a.n, tol=a.tol or 1e-12)
    run.tolerances["flatness_tol"] = a.tol or 1e-12
    run.emit("certificate", cert, ["passed", "n", "min_forward_difference", "min_window_increase"],
             [[cert.passed, cert.n, cert.min_forward_difference, cert.min_window_increase]])
    if not cert.passed:
        raise VerificationFailure("theta G + n H is not strictly increasing", G=a.G,
                                  certificate=cert.to_dict())
    return cert.to_dict()


def cmd_glue(run, a):
    if a.mode == "tangency":
        if not (a.body and a.body2 and a.p is not None and a.q is not None):
            raise InvalidInput("tangency gluing needs --body, --body2, --p and --q")
        T1 = load_body(run, a.body, planar=True)
        T2 = load_body(run, a.body2, planar=True)
        with run.stage("glue"):
            L = construct.tangency_glue(T1, T2, a.p, a.q)
        run.body("glued_body", L)
        return {"mode": a.mode, "seams": list(L.seams)}
    if a.mode == "central":
        if not a.body:
            raise InvalidInput("central gluing needs --body")
        K = load_body(run, a.body)
        with run.stage("glue"):
            S = construct.glue_central_symmetric(K)
        run.body("glued_body", S)
        return {"mode": a.mode, "n": _n_of(S)}
    # caps
    N = a.grid_n or 4096
    if a.body:
        K = load_body(run, a.body)
        n = _n_of(K) if a.n is None else a.n
        T = K.profile if isinstance(K, AxisymBody) else K
        nu1, nu2 = a.nu1, a.nu2
        if nu1 is None or nu2 is None:
            raise InvalidInput("cap gluing of a body file needs --nu1 and --nu2")
    else:
        n = a.n or 3
        s1, s2 = 0.2, 0.8
        T = construct.cubic_cap_profile(CircleGrid(N), a.r1, a.r2, s1, s2)
        nu1, nu2 = np.arcsin(s1), np.arcsin(s2)
    K = AxisymBody(n, T)
    with run.stage("glue"):
        spec = construct.GlueSpec(T, a.r1, a.r2, nu1, nu2, tol=a.tol)
        G = (load_G(run, a.G, n) if a.G else
             construct.profile_gtab(T, n, min(nu1, nu2), max(nu1, nu2), name="profile"))
        cg = construct.glue_spherical_caps(spec, K, G, a.eps)
        rep = cg.residual()
    run.tolerances["residual_tol"] = a.tol or 1e-5
    run.body("glued_body", cg.body)
    run.json("G_eps.json", cg.G_eps)
    run.csv("residual.csv", RESIDUAL_HEADER, _residual_rows(rep))
    out = {"mode": a.mode, "n": n, "eps": a.eps, "excluded_measure": cg.excluded_measure,
           "residual_max": rep.max_abs, "seams": list(cg.seams),
           "G_in_An": cg.certificate_G.passed, "G_eps_in_An": cg.certificate_G_eps.passed}
    if rep.max_abs > (a.tol or 1e-5):
        raise VerificationFailure("glued body residual exceeds tolerance", **out)
    return out


def cmd_counterexample(run, a):
    N = a.grid_n or 4096
    tol = a.tol or 1e-6
    run.tolerances["residual_tol"] = tol
    with run.stage("build"):
        C = construct.build_counterexample(a.n, a.r, a.lam, m=a.m, N=N)
    with run.stage("verify"):
        rep = construct.verify_counterexample(C)
    run.body("body", C.body)
    run.body("shifted_body", C.shifted)
    run.json("G.json", C.G)
    run.csv("residual.csv", RESIDUAL_HEADER, _residual_rows(rep.residual))
    out = {"n": C.n, "m": C.m, "r": C.r, "lambda": C.lam, "report": rep.to_dict(),
           "checks": C.checks.to_dict(), "witness": construct.nonmonotonicity_witness(C)}
    run.json("counterexample.json", out)
    if rep.residual.max_abs > tol:
        raise VerificationFailure("counterexample residual exceeds tolerance",
                                  residual=rep.residual.max_abs, tol=tol)
    return {"m": C.m, "residual": rep.residual.max_abs, "An_min": rep.An_min,
            "nonsphericity": rep.nonsphericity}


def cmd_solve2d(run, a):
    N = a.grid_n or 256
    G = load_G(run, a.G, 2)
    grid = CircleGrid(N)
    seeds = solve2d.default_seeds(G, N, count=a.seeds, seed=a.seed)
    prob = solve2d.BVPProblem(G, grid=grid, seeds=seeds, tol=a.tol or 1e-11)
    run.tolerances["newton_tol"] = prob.tol
    run.tolerances["recheck_tol"] = prob.recheck_tol
    with run.stage("solve"):
        S = solve2d.solve_periodic(prob)
    run.json("solutions.json", S)
    for i, s in enumerate(S.solutions):
        run.csv(f"solution_{i:02d}.csv", ["phi", "h"], zip(grid.angles, s.h))
    return {"G": a.G, "solutions": len(S.solutions), "tags": S.tags(), "failures": len(S.failures)}


def cmd_verify(run, a):
    body = load_body(run, a.body)
    G = load_G(run, a.G, _n_of(body))
    tol = a.tol or 1e-6
    run.tolerances["residual_tol"] = tol
    with run.stage("verify"):
        rep = measure.monge_ampere_residual(body, G, seams=a.seams or (), seam_band=a.seam_band)
    run.emit("residual", rep, RESIDUAL_HEADER, _residual_rows(rep))
    out = {"max_abs": rep.max_abs, "l2": rep.l2_norm, "argmax_phi": rep.argmax_phi}
    if rep.max_abs > tol:
        raise VerificationFailure("f - G(h) exceeds tolerance", tol=tol, **out)
    return out


def cmd_probe_mr(run, a):
    L = load_body(run, a.body, planar=True)
    tol = a.tol or 1e-7
    run.tolerances["second_difference_tol"] = tol
    ts = np.linspace(-1, 1, a.samples)
    with run.stage("probe"):
        F = symmetrize.ShadowFamily(L, geometry.unit(a.angle), sample=a.sample)
        rep = symmetrize.polar_volume_convexity_probe(F, ts, tol=tol)
    rows = []
    for key, vals in rep["inverse_values"].items():
        d2 = np.concatenate([[np.nan], rep["second_differences"][key], [np.nan]])
        rows += [[key, t, v, d] for t, v, d in zip(ts, vals, d2)]
    run.emit("probe", rep, ["series", "t", "value", "second_difference"], rows)
    out = {"min_second_difference": rep["min_second_difference"], "passed": rep["passed"]}
    if not rep["passed"]:
        raise VerificationFailure("negative second difference beyond tolerance", tol=tol, **out)
    return out


def cmd_report(run, a):
    from . import experiments
    if a.source:
        path = os.path.join(a.source, "acceptance.json")
        run.add_input(path)
        with open(path) as fh:
            table = json.load(fh)["criteria"]
        times = {}
        tpath = os.path.join(a.source, "timings.json")
        if os.path.isfile(tpath):
            with open(tpath) as fh:
                times = json.load(fh)
    else:
        results = experiments.run_all(a.criteria)
        table = [r.to_dict() for r in results]
        times = {f"criterion_{r.criterion}": r.runtime_s for r in results}
    rows = []
    for r in table:
        t = times.get(f"criterion_{r['criterion']}")
        in_time = t is None or t < (r["limit_s"] if r["limit_s"] is not None else np.inf)
        ok = bool(r["passed"]) and in_time
        rows.append([r["criterion"], r["title"], ok, r["passed"], in_time])
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {r['criterion']}: {r['title']}"
        if t is not None:
            line += f" ({t:.2f} s)"
        print(line, file=sys.stderr)
    run.json("acceptance.json", {"criteria": table})
    run.csv("acceptance.csv", ["criterion", "title", "passed", "metrics_passed", "within_time"], rows)
    run.timings.update(times)
    failed = [r[0] for r in rows if not r[2]]
    summary = {"criteria": len(rows), "passed": len(rows) - len(failed), "failed": failed}
    if failed:
        raise VerificationFailure("some acceptance criteria fail", **summary)
    return summary


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--grid-n", type=grid_size, default=None,
                        help="grid size (power of two >= 256); bodies are resampled")
    common.add_argument("--tol", type=positive_float, default=None, help="main tolerance of the subcommand")
    common.add_argument("--out", default=DEFAULT_OUT, help="output directory")
    common.add_argument("--seed", type=u64, default=0, help="seed for randomized steps")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--c1", type=positive_float, default=None, help="lower end of the domain of G")
    common.add_argument("--c2", type=positive_float, default=None, help="upper end of the domain of G")

    p = argparse.ArgumentParser(prog="firey-lab", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("density", parents=[common], help="surface-area-measure density of a body")
    s.add_argument("--body", required=True)
    s.add_argument("--mode", choices=("spectral", "fd"), default="spectral")
    s.set_defaults(func=cmd_density)

    s = sub.add_parser("polar", parents=[common], help="polar body")
    s.add_argument("--body", required=True)
    s.set_defaults(func=cmd_polar)

    s = sub.add_parser("steiner", parents=[common], help="Steiner symmetral in direction u(angle)")
    s.add_argument("--body", required=True)
    s.add_argument("--angle", type=float, default=0.0)
    s.add_argument("--sample", type=int, default=symmetrize.DEFAULT_SAMPLE)
    s.set_defaults(func=cmd_steiner)

    s = sub.add_parser("santalo", parents=[common], help="Santalo point and polar volume")
    s.add_argument("--body", required=True)
    s.set_defaults(func=cmd_santalo)

    s = sub.add_parser("check-an", parents=[common], help="certify G in the class A(n)")
    s.add_argument("--G", required=True, help="power:p, const:c, increasing:demo or a GTab JSON path")
    s.add_argument("--n", type=int, default=2)
    s.set_defaults(func=cmd_check_an)

    s = sub.add_parser("glue", parents=[common], help="gluing constructions")
    s.add_argument("--mode", choices=("tangency", "central", "caps"), default="caps")
    s.add_argument("--body")
    s.add_argument("--body2")
    s.add_argument("--p", type=point)
    s.add_argument("--q", type=point)
    s.add_argument("--n", type=int, default=None)
    s.add_argument("--r1", type=positive_float, default=1.0)
    s.add_argument("--r2", type=positive_float, default=1.01)
    s.add_argument("--nu1", type=float, default=None)
    s.add_argument("--nu2", type=float, default=None)
    s.add_argument("--G", default=None)
    s.add_argument("--eps", type=positive_float, default=0.001)
    s.set_defaults(func=cmd_glue)

    s = sub.add_parser("counterexample", parents=[common], help="non-monotone G with a translated solution")
    s.add_argument("--n", type=int, default=3)
    s.add_argument("--r", type=positive_float, default=1.0)
    s.add_argument("--lambda", dest="lam", type=positive_float, default=0.1)
    s.add_argument("--m", type=int, default=None)
    s.set_defaults(func=cmd_counterexample)

    s = sub.add_parser("solve2d", parents=[common], help="periodic solver for h'' + h = G(h)")
    s.add_argument("--G", required=True)
    s.add_argument("--seeds", type=int, default=16)
    s.set_defaults(func=cmd_solve2d)

    s = sub.add_parser("verify", parents=[common], help="residual f - G(h) of a body")
    s.add_argument("--body", required=True)
    s.add_argument("--G", required=True)
    s.add_argument("--seams", type=float_list, default=None)
    s.add_argument("--seam-band", type=int, default=0)
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("probe-mr", parents=[common], help="polar-volume convexity along a shadow system")
    s.add_argument("--body", required=True)
    s.add_argument("--angle", type=float, default=0.0)
    s.add_argument("--samples", type=int, default=21)
    s.add_argument("--sample", type=int, default=symmetrize.DEFAULT_SAMPLE)
    s.set_defaults(func=cmd_probe_mr)

    s = sub.add_parser("report", parents=[common], help="acceptance table")
    s.add_argument("--criteria", type=int_list, default=None)
    s.add_argument("--from", dest="source", default=None,
                   help="rebuild the table from a previous report directory")
    s.set_defaults(func=cmd_report)
    return p


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if getattr(args, "samples", 3) < 3 or getattr(args, "seeds", 1) < 1:
        parser.print_usage(sys.stderr)
        print("firey-lab: error: --samples must be >= 3 and --seeds >= 1", file=sys.stderr)
        return 2
    r = Run(args)
    try:
        summary = args.func(r, args)
    except (FireyError, OSError, ValueError) as exc:
        if isinstance(exc, FireyError):
            err = exc.to_dict()
        else:
            err = {"error": "invalid-input" if isinstance(exc, ValueError) else "io",
                   "message": str(exc), "details": {"type": type(exc).__name__}}
        write_json(r.path("error.json"), err)
        r.outputs.append("error.json")
        r.finish("error", 1)
        sys.stdout.write(dumps(err))
        return 1
    r.finish("ok", 0)
    sys.stdout.write(dumps(summary))
    return 0


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
