"""Command-line orchestrator: subcommands over the library modules, CSV/JSON
artifacts with fixed schemas, and a JSON run manifest (checksums, wall time,
thread count) so any output can be re-validated after the fact.

Exit codes: 0 success, 1 validation failure (including refused scans, with a
printed cost estimate), 2 usage error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, arith, characters, dickman, lfun, model, scan, smooth, stats

TOOL_VERSION = __version__


def _fmt(x) -> str:
    """Full-precision numeric formatting (17 significant digits round-trips)."""
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) if not isinstance(v, str) else v for v in row) + "\n")


def write_table(out_dir: Path, stem: str, header: list[str], rows, fmt: str) -> Path:
    """Fixed-schema table as CSV (default) or row-object JSON."""
    if fmt == "csv":
        path = out_dir / f"{stem}.csv"
        write_csv(path, header, rows)
        return path
    path = out_dir / f"{stem}.json"
    payload = [
        {k: (_fmt(v) if not isinstance(v, str) else v) for k, v in zip(header, row)}
        for row in rows
    ]
    with open(path, "w", encoding="ascii") as fh:
        json.dump(payload, fh, indent=1)
        fh.write("\n")
    return path


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(out_dir: Path, command: str, q, parameters: dict, wall: float,
                   threads, artifacts: list[Path]) -> Path:
    manifest = {
        "command": command,
        "q": q,
        "parameters": parameters,
        "wall_time_s": wall,
        "threads": threads,
        "artifacts": {p.name: _sha256(p) for p in artifacts},
        "tool_version": TOOL_VERSION,
    }
    path = out_dir / "manifest.json"
    with open(path, "w", encoding="ascii") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def validate_manifest(path: Path) -> bool:
    """Recompute artifact checksums recorded by a previous run."""
    with open(path) as fh:
        manifest = json.load(fh)
    base = Path(path).parent
    for name, digest in manifest["artifacts"].items():
        target = base / name
        if not target.exists() or _sha256(target) != digest:
            return False
    return True


def _parse_tau_grid(text: str) -> np.ndarray:
    if ":" in text:
        lo, hi, step = (float(t) for t in text.split(":"))
        return np.round(np.arange(lo, hi + 1e-12, step), 12)
    return np.array([float(t) for t in text.split(",")])


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_scan(args) -> int:
    out = _out_dir(args)
    t0 = time.time()
    if args.q > scan.SCAN_MAX_DEFAULT:
        # refuse before paying for the index table
        raise scan.ScanLimitError(scan.estimate_cost(args.q))
    ctx = characters.build_context(args.q)
    opts = scan.ScanOptions(threads=args.threads)
    res = scan.scan_all(ctx, opts)
    path = write_table(
        out, "characters",
        ["j", "parity", "M", "N", "N_over_q", "m", "tie"],
        (
            (j, res.parity[j - 1], res.M[j - 1], res.N[j - 1],
             res.N[j - 1] / args.q, res.m[j - 1], bool(res.tie[j - 1]))
            for j in res.js
        ),
        args.format,
    )
    write_manifest(out, "scan", args.q, {"threads": args.threads}, time.time() - t0,
                   args.threads, [path])
    print(f"scan q={args.q}: {len(res.js)} characters -> {path}")
    return 0


def cmd_lfun(args) -> int:
    out = _out_dir(args)
    t0 = time.time()
    ctx = characters.build_context(args.q)
    values = lfun.l1_all(ctx)
    path = out / "lvalues.csv"
    write_csv(
        path,
        ["j", "parity", "L1_re", "L1_im", "L1_abs"],
        (
            (j, 1 if j % 2 == 0 else -1, values[j].real, values[j].imag, abs(values[j]))
            for j in range(1, ctx.q - 1)
        ),
    )
    write_manifest(out, "lfun", args.q, {}, time.time() - t0, args.threads, [path])
    print(f"lfun q={args.q} -> {path}")
    return 0


def cmd_dickman(args) -> int:
    out = _out_dir(args)
    t0 = time.time()
    table = dickman.build_table()
    step = max(1, int(round(args.grid_step / table.h))) if args.grid_step else table.steps_per_unit // 4
    idx = np.arange(0, len(table.u), step)
    path = write_table(out, "dickman", ["u", "rho", "P"],
                       ((table.u[i], table.rho_values[i], table.P_values[i]) for i in idx),
                       args.format)
    summary = {
        "bessel_constant_A": dickman.constant_A(),
        "eta": dickman.ETA,
        "max_dde_residual": float(dickman.dde_residual(table).max()),
    }
    spath = out / "dickman_summary.json"
    with open(spath, "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    write_manifest(out, "dickman", None, {}, time.time() - t0, args.threads, [path, spath])
    print(f"dickman table -> {path}; A = {summary['bessel_constant_A']:.8f}")
    return 0


def cmd_smooth_verify(args) -> int:
    out = _out_dir(args)
    t0 = time.time()
    rows = []
    ok = True
    for q in (7, 11, 13):
        ctx = characters.build_context(q)
        for b in range(1, 9):
            for a in (1, b - 1 if b > 2 else 1):
                if math.gcd(a, b) != 1:
                    continue
                for j in (1, (q - 1) // 2):
                    r = smooth.verify_divisor_decomposition(ctx, j, a, b, args.z, args.y)
                    rows.append(("divisor_decomposition", q, j, a, b, r))
                    ok &= r <= 1e-10
    for d in range(1, 61):
        for psi in characters.small_characters(d):
            _, res = characters.gauss_sum_small(psi)
            rows.append(("gauss_sum_induced", d, psi.label, "", "", res))
            ok &= res <= 1e-12
    path = write_table(out, "smooth_verify",
                       ["check", "modulus", "index", "a", "b", "residual"], rows, args.format)
    write_manifest(out, "smooth-verify", None, {"z": args.z, "y": args.y},
                   time.time() - t0, args.threads, [path])
    print(f"smooth-verify: {len(rows)} checks, all pass: {ok} -> {path}")
    return 0 if ok else 1


def cmd_model(args) -> int:
    out = _out_dir(args)
    t0 = time.time()
    cfg = model.ModelConfig(
        y=args.y, u_cut=args.u_cut, samples=args.samples, seed=args.seed,
        grid_size=args.grid,
    )
    cfg.validate()
    m_vals = model.sample_many(cfg)
    taus = _parse_tau_grid(args.tau_grid)
    est = model.estimate_phi(m_vals, taus)
    path = write_table(out, "model_phi", ["tau", "phi_hat", "ci_lo", "ci_hi"],
                       zip(est.taus, est.phi, est.ci_lo, est.ci_hi), args.format)
    mpath = write_table(out, "model_samples", ["sample_index", "m_value"],
                        enumerate(m_vals), args.format)
    params = {
        "y": cfg.y, "u_cut": cfg.u_cut, "grid_size": cfg.R,
        "samples": cfg.samples, "seed": cfg.seed,
        "tail_bound": model.tail_bound(cfg),
    }
    write_manifest(out, "model", None, params, time.time() - t0, args.threads, [path, mpath])
    print(f"model: {cfg.samples} samples, tail bound {params['tail_bound']:.4f} -> {path}")
    return 0


def cmd_structure(args) -> int:
    out = _out_dir(args)
    t0 = time.time()
    ctx = characters.build_context(args.q)
    res = scan.scan_all(ctx, scan.ScanOptions(threads=args.threads))
    l1 = lfun.l1_all(ctx)
    rep = stats.structure_report(ctx, res, l1, args.top_fraction)
    path = out / "structure.json"
    payload = {
        "q": rep.q,
        "top_count": len(rep.top_js),
        "odd_fraction": rep.odd_fraction,
        "b_counts": {str(k): v for k, v in sorted(rep.b_counts.items())},
        "b0_counts": {str(k): v for k, v in sorted(rep.b0_counts.items())},
        "even_b_counts": {str(k): v for k, v in sorted(rep.even_b_counts.items())},
        "even_modal_b": rep.even_modal_b,
        "median_gap_odd": rep.median_gap_odd,
        "odd_pretender_trivial_fraction": rep.odd_pretender_trivial_fraction,
        "even_pretender_mod3_fraction": rep.even_pretender_mod3_fraction,
        "mean_D_odd": rep.mean_D_odd,
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    cpath = out / "top_characters.csv"
    write_csv(
        cpath,
        ["j", "parity", "m", "N_over_q"],
        ((int(j), -1 if j % 2 else 1, res.m[j - 1], res.N[j - 1] / args.q) for j in rep.top_js),
    )
    write_manifest(out, "structure", args.q, {"top_fraction": args.top_fraction},
                   time.time() - t0, args.threads, [path, cpath])
    print(f"structure q={args.q}: odd fraction {rep.odd_fraction:.3f}, "
          f"even modal b {rep.even_modal_b} -> {path}")
    return 0


def cmd_report(args) -> int:
    out = _out_dir(args)
    t0 = time.time()
    ctx = characters.build_context(args.q)
    res = scan.scan_all(ctx, scan.ScanOptions(threads=args.threads))
    l1 = lfun.l1_all(ctx)
    q = args.q
    phi_all = stats.build_distribution(res.m, q - 1)
    odd = res.parity < 0
    phi_minus = stats.build_distribution(res.m[odd], (q - 1) / 2)
    phi_plus = stats.build_distribution(res.m[~odd], (q - 1) / 2)
    eg = math.exp(float(np.euler_gamma))
    absl = np.abs(l1[1:]) / eg
    phi_l = stats.build_distribution(absl, q - 1)
    taus = _parse_tau_grid(args.tau_grid)
    path = write_table(
        out, "distributions",
        ["tau", "phi", "phi_plus", "phi_minus", "phi_L"],
        (
            (t, phi_all.survival(t), phi_plus.survival(t), phi_minus.survival(t),
             phi_l.survival(t))
            for t in taus
        ),
        args.format,
    )
    # per-character table: distance to the constant function over p <= pretender_y
    ps = arith.primes_up_to(min(args.pretender_y, q - 1))
    idx = (res.js[:, None] * ctx.ind[ps][None, :].astype(np.int64)) % (q - 1)
    d_all = np.sqrt(np.maximum(((1.0 - ctx.roots[idx].real) / ps[None, :]).sum(axis=1), 0.0))
    cpath = write_table(
        out, "per_character",
        ["j", "parity", "M", "N_over_q", "m", "L1_abs", "D"],
        (
            (int(j), int(res.parity[j - 1]), res.M[j - 1], res.N[j - 1] / q,
             res.m[j - 1], abs(l1[j]), d_all[j - 1])
            for j in res.js
        ),
        args.format,
    )
    summ = stats.summarize(res.m[odd])
    summ_even = stats.summarize(res.m[~odd])
    spath = out / "summary.json"
    with open(spath, "w") as fh:
        json.dump(
            {
                "q": q,
                "odd": {"min": summ.min, "mean": summ.mean, "q9999": summ.q9999, "max": summ.max},
                "even": {"min": summ_even.min, "mean": summ_even.mean,
                         "q9999": summ_even.q9999, "max": summ_even.max},
            },
            fh, indent=2, sort_keys=True,
        )
        fh.write("\n")
    write_manifest(out, "report", q, {"pretender_y": args.pretender_y},
                   time.time() - t0, args.threads, [path, cpath, spath])
    print(f"report q={q} -> {path}")
    return 0


def cmd_verify_all(args) -> int:
    t0 = time.time()
    failures = []

    def check(name: str, ok: bool, detail: str = "") -> None:
        print(f"  [{'PASS' if ok else 'FAIL'}] {name} {detail}")
        if not ok:
            failures.append(name)

    # divisor/character decomposition, exact
    worst = 0.0
    for q in (7, 11, 13):
        ctx = characters.build_context(q)
        for b in range(1, 9):
            for j in (1, (q - 1) // 2):
                worst = max(worst, smooth.verify_divisor_decomposition(ctx, j, 1, b, 10**3, 50))
    check("divisor decomposition residual <= 1e-10", worst <= 1e-10, f"(worst {worst:.2e})")

    # induced Gauss-sum identity
    worst = max(
        characters.gauss_sum_small(psi)[1]
        for d in range(1, 61)
        for psi in characters.small_characters(d)
    )
    check("gauss sum induction residual <= 1e-12", worst <= 1e-12, f"(worst {worst:.2e})")

    # half-range prefix identity
    worst = 0.0
    for q in (5, 7, 11, 101, 1009):
        ctx = characters.build_context(q)
        worst = max(max(lfun.half_sum_identity(ctx, j) for j in range(1, q - 1, 2)), worst)
    check("half-sum identity residual <= 1e-9", worst <= 1e-9, f"(worst {worst:.2e})")

    # |G(chi)| = sqrt(q)
    worst = 0.0
    for q in (101, 1009, 2003, 5003, 9973):
        g = characters.gauss_sums_all(characters.build_context(q))
        worst = max(worst, float(np.abs(np.abs(g[1:]) - math.sqrt(q)).max() / math.sqrt(q)))
    check("|G(chi)| = sqrt(q) within 1e-9 relative", worst <= 1e-9, f"(worst {worst:.2e})")

    if args.level == "full":
        table = dickman.build_table()
        res = dickman.dde_residual(table).max()
        check("delay equation residual <= 1e-10", res <= 1e-10, f"(max {res:.2e})")
        a_val = dickman.constant_A()
        check("Bessel tail constant matches defining integrals",
              abs(a_val - 0.08932652234355) <= 1e-8, f"(A {a_val:.8f})")

    print(f"verify-all [{args.level}]: {'OK' if not failures else 'FAILED'} "
          f"({time.time() - t0:.1f} s)")
    return 0 if not failures else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="charsum",
        description="Character-sum statistics toolkit: scans, L-values, "
                    "smooth-number identities, and the random multiplicative model.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, q_required=True):
        if q_required:
            p.add_argument("--q", type=int, required=True, help="odd prime modulus")
        p.add_argument("--out", type=str, default="out", help="output directory")
        p.add_argument("--threads", type=int, default=None)
        p.add_argument("--format", choices=("csv", "json"), default="csv",
                       help="data table format (manifests are always JSON)")

    p = sub.add_parser("scan", help="prefix-sum extrema for all characters")
    common(p)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("lfun", help="L(1, chi) for all characters via bulk DFT")
    common(p)
    p.set_defaults(func=cmd_lfun)

    p = sub.add_parser("dickman", help="Dickman rho / P(u) table dump")
    common(p, q_required=False)
    p.add_argument("--grid-step", type=float, default=None)
    p.set_defaults(func=cmd_dickman)

    p = sub.add_parser("smooth-verify", help="exact smooth-sum identity residuals")
    common(p, q_required=False)
    p.add_argument("--z", type=float, default=1e4)
    p.add_argument("--y", type=float, default=50.0)
    p.set_defaults(func=cmd_smooth_verify)

    p = sub.add_parser("model", help="random multiplicative model sampling")
    common(p, q_required=False)
    p.add_argument("--y", type=float, default=20.0)
    p.add_argument("--u-cut", dest="u_cut", type=float, default=4.0)
    p.add_argument("--grid", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples", type=int, default=10000)
    p.add_argument("--tau-grid", dest="tau_grid", type=str, default="0.8:3.0:0.05")
    p.set_defaults(func=cmd_model)

    p = sub.add_parser("structure", help="structure of the top characters")
    common(p)
    p.add_argument("--top-fraction", dest="top_fraction", type=float, default=0.005)
    p.set_defaults(func=cmd_structure)

    p = sub.add_parser("report", help="survival-function tables and summaries")
    common(p)
    p.add_argument("--tau-grid", dest="tau_grid", type=str, default="0.5:3.5:0.05")
    p.add_argument("--pretender-y", dest="pretender_y", type=float, default=100.0)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("verify-all", help="run the exact-identity suites")
    p.add_argument("--level", choices=("fast", "full"), default="fast")
    p.set_defaults(func=cmd_verify_all)

    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except scan.ScanLimitError as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
