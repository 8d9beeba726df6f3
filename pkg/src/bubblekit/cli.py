"""Command-line entry point exposing every module as a subcommand.

Artifacts are JSON (structured reports) or CSV (fields and tables); every
artifact embeds the parsed run configuration and the tool version, and all
floating-point output is formatted to 17 significant digits so identical
configurations produce byte-identical files. Exit status is 0 when all
checks in the run pass, 1 on computation failure, 2 on usage or validation
errors. With --json-errors failures are also reported as structured JSON
on stdout.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import time

import numpy as np

from . import __version__


class _UsageError(Exception):
    """Invalid inputs detected after argument parsing; exits with status 2."""


# ----------------------------------------------------------------------------
# deterministic serialization
# ----------------------------------------------------------------------------


def _fmt_float(x: float) -> str:
    if math.isnan(x) or math.isinf(x):
        return f'"{x!r}"'
    return format(float(x), ".17g")


def to_json(obj, indent: int = 0) -> str:
    """JSON with sorted keys and floats fixed to 17 significant digits."""
    pad = " " * indent
    if isinstance(obj, dict):
        items = [f'{pad}  "{k}": {to_json(obj[k], indent + 2).lstrip()}'
                 for k in sorted(obj)]
        if not items:
            return pad + "{}"
        return pad + "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(np.asarray(obj).tolist()) if isinstance(obj, np.ndarray) \
            else list(obj)
        if not seq:
            return pad + "[]"
        items = [to_json(v, indent + 2) for v in seq]
        return pad + "[\n" + ",\n".join(items) + "\n" + pad + "]"
    if isinstance(obj, bool) or obj is None:
        return pad + {True: "true", False: "false", None: "null"}[obj]
    if isinstance(obj, (int, np.integer)):
        return pad + str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return pad + _fmt_float(float(obj))
    if isinstance(obj, str):
        return pad + '"' + obj.replace("\\", "\\\\").replace('"', '\\"') + '"'
    raise TypeError(f"cannot serialize {type(obj)!r}")


def _artifact(config: dict, payload: dict) -> dict:
    return {"config": config, "version": __version__, **payload}


def _write_text(path: str, text: str) -> None:
    with open(path, "w") as fh:
        fh.write(text)
        if not text.endswith("\n"):
            fh.write("\n")


def _write_csv(path: str, config: dict, header: list[str],
               rows: list[list[float]]) -> None:
    lines = ["# config: " + to_json(config).replace("\n", " "),
             f"# version: {__version__}",
             ",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt_float(v) if isinstance(v, float)
                              else str(v) for v in row))
    _write_text(path, "\n".join(lines))


# ----------------------------------------------------------------------------
# argument helpers
# ----------------------------------------------------------------------------


def _parse_pair(text: str) -> np.ndarray:
    parts = text.split(",")
    if len(parts) != 2:
        raise _UsageError(f"expected 'a,b', got {text!r}")
    try:
        return np.array([float(parts[0]), float(parts[1])])
    except ValueError as exc:
        raise _UsageError(str(exc)) from None


def _parse_points(text: str) -> np.ndarray:
    try:
        return np.array([_parse_pair(chunk) for chunk in text.split(";")])
    except _UsageError:
        raise _UsageError(f"expected 'x1,y1;x2,y2;...', got {text!r}") \
            from None


def _parse_signs(text: str) -> list[int]:
    table = {"+": 1, "-": -1, "+1": 1, "-1": -1, "1": 1}
    try:
        return [table[tok.strip()] for tok in text.split(",")]
    except KeyError as exc:
        raise _UsageError(f"invalid sign token {exc}") from None


def _parse_sweep(text: str) -> list[float]:
    parts = text.split(":")
    if len(parts) != 3:
        raise _UsageError(f"expected 'start:end:count', got {text!r}")
    try:
        start, end, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise _UsageError(str(exc)) from None
    if count < 1 or start <= 0 or end <= 0:
        raise _UsageError("sweep needs positive endpoints and count >= 1")
    if count == 1:
        return [start]
    return list(np.geomspace(start, end, count))


def _load_backend(path: str):
    from . import greens
    if not os.path.exists(path):
        raise _UsageError(f"domain file not found: {path}")
    try:
        spec = greens.DomainSpec.from_json(path)
    except (ValueError, KeyError) as exc:
        raise _UsageError(f"invalid domain file: {exc}") from None
    return greens.build_backend(spec)


def _domain_dict(spec) -> dict:
    if spec.kind == "unit_disk":
        return {"kind": "unit_disk", "radius": spec.radius}
    return {"kind": "parametric", "nodes": spec.nodes}


def _load_ansatz_file(path: str):
    import json

    from . import ansatz as ans_mod
    from . import greens
    if not os.path.exists(path):
        raise _UsageError(f"ansatz file not found: {path}")
    with open(path) as fh:
        data = json.load(fh)
    spec = greens.DomainSpec.from_json(data["domain"])
    backend = greens.build_backend(spec)
    points = np.asarray(data["points"], dtype=float)
    signs = [int(s) for s in data["signs"]]
    p = float(data["p"])
    lam = float(data["lambda"])
    pr = data["params"]
    params = ans_mod.BubbleParams(
        p=p, lam=lam, gamma=float(pr["gamma"]), eps=float(pr["eps"]),
        mu=np.asarray(pr["mu"], dtype=float), d=float(pr["d"]))
    return backend, points, signs, p, lam, params


# ----------------------------------------------------------------------------
# subcommands
# ----------------------------------------------------------------------------


def _cmd_identities(args, config) -> int:
    from . import special_integrals as si
    t0 = time.time()
    records = si.verify_catalog(args.filter, tol=args.tol)
    n_fail = sum(0 if r.passed else 1 for r in records)
    payload = _artifact(config, {
        "records": [r.as_dict() for r in records],
        "n_records": len(records), "n_failed": n_fail,
    })
    if args.out:
        _write_text(args.out, to_json(payload))
    print(f"identities verify: {len(records)} records, {n_fail} failed, "
          f"{time.time() - t0:.2f}s")
    return 0 if n_fail == 0 else 1


def _cmd_greens_eval(args, config) -> int:
    from . import greens
    backend = _load_backend(args.domain)
    x = _parse_pair(args.x)
    y = _parse_pair(args.y)
    try:
        g = greens.green(backend, x, y)
        h = greens.regular_part(backend, x, y)
    except greens.OutsideDomainError as exc:
        raise _UsageError(str(exc)) from None
    payload = _artifact(config, {"green": g, "regular_part": h})
    if args.out:
        _write_text(args.out, to_json(payload))
    print(f"greens eval: G={g:.12g} H={h:.12g}")
    return 0


def _cmd_greens_robin_table(args, config) -> int:
    from . import greens
    backend = _load_backend(args.domain)
    nodes = backend.boundary_nodes
    lo, hi = nodes.min(axis=0), nodes.max(axis=0)
    n = args.grid
    rows = []
    clearance = 2e-3 * backend.diameter
    for yv in np.linspace(lo[1], hi[1], n):
        for xv in np.linspace(lo[0], hi[0], n):
            y = np.array([xv, yv])
            if not backend.contains(y, tol=clearance):
                continue
            rows.append([float(xv), float(yv),
                         float(greens.robin(backend, y))])
    if args.out:
        _write_csv(args.out, config, ["x", "y", "robin"], rows)
    print(f"greens robin-table: {len(rows)} interior points")
    return 0


def _cmd_kr_find(args, config) -> int:
    from . import kirchhoff_routh as kr
    backend = _load_backend(args.domain)
    signs = _parse_signs(args.signs)
    reports = kr.find_critical(backend, signs, starts=args.starts,
                               seed=args.seed)
    payload = _artifact(config, {"reports": [r.as_dict() for r in reports]})
    if args.out:
        _write_text(args.out, to_json(payload))
    else:
        print(to_json(payload))
    print(f"kr find: {len(reports)} critical points")
    return 0 if reports else 1


def _cmd_kr_eval(args, config) -> int:
    from . import greens
    from . import kirchhoff_routh as kr
    if args.domain:
        backend = _load_backend(args.domain)
    else:
        backend = greens.build_backend(greens.DomainSpec.unit_disk())
    points = _parse_points(args.points)
    signs = _parse_signs(args.signs)
    if len(signs) != len(points):
        raise _UsageError("signs and points must have equal length")
    value = kr.phi_m(backend, points, signs)
    print(f"kr eval: phi_m = {value:.12g}")
    return 0


def _cmd_radial_profile(args, config) -> int:
    from . import radial_profiles as rp
    if args.j < 1 or args.j > 3:
        raise _UsageError("layer index j must be 1, 2 or 3")
    prof = rp.correction_profile(args.j, args.p, args.mu)
    f_src = rp.f_source_rescaled(args.j, args.p, args.mu)
    r = np.concatenate([[0.0], np.geomspace(1e-3, 1e4, 400)])
    rows = [[float(t), float(prof.rescaled(t)), float(f_src(t))] for t in r]
    if args.out:
        _write_csv(args.out, config,
                   [f"r", f"omega{args.j}", f"f{args.j}"], rows)
    print(f"radial profile: j={args.j} p={args.p} mu={args.mu}, "
          f"{len(rows)} samples")
    return 0


def _cmd_radial_dconst(args, config) -> int:
    from . import radial_profiles as rp
    d = rp.d_constants(args.p, args.mu)
    payload = _artifact(config, {"D1": d.d1, "D2": d.d2, "D3": d.d3})
    if args.out:
        _write_text(args.out, to_json(payload))
    print(to_json({"D1": d.d1, "D2": d.d2, "D3": d.d3}))
    return 0


def _cmd_ansatz_build(args, config) -> int:
    from . import ansatz as ans_mod
    backend = _load_backend(args.domain)
    points = _parse_points(args.points)
    signs = _parse_signs(args.signs)
    if len(signs) != len(points):
        raise _UsageError("signs and points must have equal length")
    params = ans_mod.make_params(backend, points, signs, args.p,
                                 args.lambda_)
    payload = _artifact(config, {
        "domain": _domain_dict(backend.domain),
        "p": args.p, "lambda": args.lambda_,
        "points": points, "signs": signs,
        "params": {"gamma": params.gamma, "eps": params.eps,
                   "mu": params.mu, "d": params.d},
    })
    _write_text(args.out, to_json(payload))
    print(f"ansatz build: gamma={params.gamma:.10g} eps={params.eps:.6g} "
          f"mu={np.array2string(params.mu, precision=8)}")
    return 0


def _cmd_ansatz_residual(args, config) -> int:
    from . import ansatz as ans_mod
    backend, points, signs, p, lam, params = _load_ansatz_file(args.infile)
    ans = ans_mod.build_ansatz(backend, points, signs, params)
    sigma = None if args.sigma == "auto" else float(args.sigma)
    report = ans_mod.residual_norm(ans, sigma=sigma)
    payload = _artifact(config, {
        "norm": report.norm, "sigma": report.sigma,
        "is_grid_proxy": report.is_grid_proxy,
        "region_max": report.region_max,
        "n_grid": int(report.grid.shape[0]),
        "gamma": params.gamma, "eps": params.eps,
    })
    if args.out:
        _write_text(args.out, to_json(payload))
    if args.field_out:
        rows = []
        for y, e, w in zip(report.grid, report.residual, report.weight):
            x = params.eps * y
            rows.append([float(x[0]), float(x[1]), float(ans.u(x)),
                         float(e), float(w)])
        _write_csv(args.field_out, config,
                   ["x", "y", "U", "E", "weight"], rows)
    print(f"ansatz residual: norm={report.norm:.10g} sigma={report.sigma:.6g}"
          f" (grid proxy)")
    return 0


def _cmd_energy_expand(args, config) -> int:
    from . import ansatz as ans_mod
    from . import energy
    backend, points, signs, p, _, _ = _load_ansatz_file(args.ansatz)
    lams = _parse_sweep(args.sweep)
    rows = []
    for lam in lams:
        params = ans_mod.make_params(backend, points, signs, p, lam)
        ans = ans_mod.build_ansatz(backend, points, signs, params,
                                   exact_projection=True)
        erep = energy.j_lambda(ans)
        brep = energy.beta_lambda(ans)
        rows.append([float(lam), params.gamma, params.eps,
                     erep.j_lambda, erep.f_expansion,
                     brep.beta_direct, brep.beta_formula, brep.deviation])
    if args.out:
        _write_csv(args.out, config,
                   ["lambda", "gamma", "eps", "J", "F_closed",
                    "beta_direct", "beta_formula", "deviation"], rows)
    print(f"energy expand: {len(rows)} sweep points")
    return 0


def _cmd_pde_solve(args, config) -> int:
    from . import ansatz as ans_mod
    from . import pde_solver as pde
    backend, points, signs, p_seed, lam_seed, params = \
        _load_ansatz_file(args.seed)
    p = args.p if args.p is not None else p_seed
    lam = args.lambda_ if args.lambda_ is not None else lam_seed
    if p != p_seed or lam != lam_seed:
        params = ans_mod.make_params(backend, points, signs, p, lam)
    if backend.domain.kind != "unit_disk":
        raise _UsageError("pde solve supports disk domains only")
    cluster = float(params.eps * np.min(params.mu))
    grid = pde.Grid2D.disk(backend.domain.radius, args.nr, args.ntheta,
                           cluster=cluster)
    ans = ans_mod.build_ansatz(backend, points, signs, params,
                               exact_projection=True)
    seed = pde.ansatz_seed(grid, ans)
    u, report = pde.newton_solve(seed, p, lam)
    try:
        nodal = pde.nodal_analysis(u)
        report.nodal_components = nodal["components"]
        report.nodal_boundary_touching = nodal["boundary_touching"]
    except ValueError:
        pass
    if args.out:
        xy = grid.interior_xy()
        rows = [[0.0, 0.0, u.pole]]
        for i in range(xy.shape[0]):
            for j in range(xy.shape[1]):
                rows.append([float(xy[i, j, 0]), float(xy[i, j, 1]),
                             float(u.values[i, j])])
        _write_csv(args.out, config, ["x", "y", "u"], rows)
    if args.report:
        _write_text(args.report, to_json(_artifact(config,
                                                   report.as_dict())))
    print(f"pde solve: converged={report.converged} "
          f"iterations={report.iterations} "
          f"residual={report.residual_max:.4g}")
    return 0 if report.converged else 1


# ----------------------------------------------------------------------------
# dispatch
# ----------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="bubblekit")
    top.add_argument("--json-errors", action="store_true",
                     help="emit structured JSON on failure")
    sub = top.add_subparsers(dest="group", required=True)

    p = sub.add_parser("identities").add_subparsers(dest="action",
                                                    required=True)
    q = p.add_parser("verify")
    q.add_argument("--filter", default=None)
    q.add_argument("--tol", type=float, default=1e-8)
    q.add_argument("--out", default=None)
    q.set_defaults(func=_cmd_identities)

    p = sub.add_parser("greens").add_subparsers(dest="action", required=True)
    q = p.add_parser("eval")
    q.add_argument("--domain", required=True)
    q.add_argument("--x", required=True)
    q.add_argument("--y", required=True)
    q.add_argument("--out", default=None)
    q.set_defaults(func=_cmd_greens_eval)
    q = p.add_parser("robin-table")
    q.add_argument("--domain", required=True)
    q.add_argument("--grid", type=int, default=32)
    q.add_argument("--out", default=None)
    q.set_defaults(func=_cmd_greens_robin_table)

    p = sub.add_parser("kr").add_subparsers(dest="action", required=True)
    q = p.add_parser("find")
    q.add_argument("--domain", required=True)
    q.add_argument("--signs", required=True)
    q.add_argument("--starts", type=int, default=64)
    q.add_argument("--seed", type=int, default=7)
    q.add_argument("--out", default=None)
    q.set_defaults(func=_cmd_kr_find)
    q = p.add_parser("eval")
    q.add_argument("--points", required=True)
    q.add_argument("--signs", required=True)
    q.add_argument("--domain", default=None)
    q.set_defaults(func=_cmd_kr_eval)

    p = sub.add_parser("radial").add_subparsers(dest="action", required=True)
    q = p.add_parser("profile")
    q.add_argument("--j", type=int, required=True)
    q.add_argument("--p", type=float, required=True)
    q.add_argument("--mu", type=float, default=1.0)
    q.add_argument("--out", default=None)
    q.set_defaults(func=_cmd_radial_profile)
    q = p.add_parser("dconst")
    q.add_argument("--p", type=float, required=True)
    q.add_argument("--mu", type=float, default=1.0)
    q.add_argument("--out", default=None)
    q.set_defaults(func=_cmd_radial_dconst)

    p = sub.add_parser("ansatz").add_subparsers(dest="action", required=True)
    q = p.add_parser("build")
    q.add_argument("--domain", required=True)
    q.add_argument("--p", type=float, required=True)
    q.add_argument("--lambda", dest="lambda_", type=float, required=True)
    q.add_argument("--points", required=True)
    q.add_argument("--signs", required=True)
    q.add_argument("--out", required=True)
    q.set_defaults(func=_cmd_ansatz_build)
    q = p.add_parser("residual")
    q.add_argument("--in", dest="infile", required=True)
    q.add_argument("--sigma", default="auto")
    q.add_argument("--out", default=None)
    q.add_argument("--field-out", default=None)
    q.set_defaults(func=_cmd_ansatz_residual)

    p = sub.add_parser("energy").add_subparsers(dest="action", required=True)
    q = p.add_parser("expand")
    q.add_argument("--ansatz", required=True)
    q.add_argument("--sweep", required=True)
    q.add_argument("--out", default=None)
    q.set_defaults(func=_cmd_energy_expand)

    p = sub.add_parser("pde").add_subparsers(dest="action", required=True)
    q = p.add_parser("solve")
    q.add_argument("--domain", default=None)
    q.add_argument("--p", type=float, default=None)
    q.add_argument("--lambda", dest="lambda_", type=float, default=None)
    q.add_argument("--seed", required=True)
    q.add_argument("--nr", type=int, default=512)
    q.add_argument("--ntheta", type=int, default=256)
    q.add_argument("--out", default=None)
    q.add_argument("--report", default=None)
    q.set_defaults(func=_cmd_pde_solve)

    return top


def _config_dict(args) -> dict:
    skip = {"func", "json_errors"}
    out = {}
    for key, val in vars(args).items():
        if key in skip:
            continue
        if isinstance(val, np.ndarray):
            val = val.tolist()
        out[key] = val
    return out


def dispatch(argv=None) -> int:
    n_threads = os.environ.get("BUBBLEKIT_THREADS")
    if n_threads:
        os.environ.setdefault("OMP_NUM_THREADS", n_threads)
        os.environ.setdefault("OPENBLAS_NUM_THREADS", n_threads)
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    config = _config_dict(args)
    try:
        return args.func(args, config)
    except _UsageError as exc:
        if args.json_errors:
            print(to_json({"error": str(exc), "status": 2}))
        else:
            print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        if args.json_errors:
            print(to_json({"error": str(exc), "status": 1,
                           "type": type(exc).__name__}))
        else:
            print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
