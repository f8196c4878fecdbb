"""Batch front-end: parse a scenario config, dispatch computations, and
emit machine-readable reports and plot data.

Subcommands
    criterion   existence verdict for a (domain, family) scenario
    profiles    correction-profile ODE solves, CSV curves + constants
    bubble      bubble gamma ladder with both expansion checks
    extremal    subcritical solver ladder and the two test functions
    verify      the invariant suite as a pass/fail table

Exit codes: 0 ok, 1 error, 2 inconclusive verdict.  Reports are JSON
(with the config hash and tool version embedded) next to CSV curve
files; identical config + seed give byte-identical JSON.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import random
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .criterion import (classify, closed_form_l, limit_l, ratio_curve_csv,
                        DEFAULT_GAMMA_GRID, Verdict)
from .domain import DomainModel, Shape, lambda1, robin_report
from .perturbation import PerturbationFamily, asymptotic_data, phi_N
from .profiles import (A_CONSTANTS, B0_CONSTANT, profile_integrals,
                       s0_explicit, solve_profile)
from .bubble import ladder_reports
from .variational import (lambda_g_report, model_testfun_energy,
                          solve_subcritical, step1_testfun)


class ConfigError(ValueError):
    """Malformed or missing configuration field."""


def _canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def _config_hash(cfg: dict) -> str:
    return hashlib.sha256(_canonical(cfg).encode()).hexdigest()[:16]


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON ({path}): {exc}") from exc


def _family(cfg: dict) -> PerturbationFamily:
    try:
        return PerturbationFamily.from_json(cfg.get("family", {}))
    except (ValueError, KeyError) as exc:
        raise ConfigError(f"field 'family': {exc}") from exc


def _domain(cfg: dict) -> DomainModel:
    try:
        return DomainModel.from_json(cfg.get("domain", {}))
    except (ValueError, KeyError) as exc:
        raise ConfigError(f"field 'domain': {exc}") from exc


def _write_report(out_dir: str, name: str, payload: dict, cfg: dict) -> str:
    payload = dict(payload)
    payload["config_hash"] = _config_hash(cfg)
    payload["version"] = __version__
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, name)
    with open(path, "w") as fh:
        fh.write(json.dumps(payload, sort_keys=True, indent=2))
        fh.write("\n")
    return path


# ---------------------------------------------------------------------------
# criterion


def cmd_criterion(cfg: dict, args) -> int:
    fam = _family(cfg)
    dom = _domain(cfg)
    grid = cfg.get("gamma_grid", list(DEFAULT_GAMMA_GRID))
    if list(grid) != sorted(grid) or len(grid) < 3:
        raise ConfigError("field 'gamma_grid': need >= 3 increasing values")
    data = asymptotic_data(fam)

    rep_robin = robin_report(dom, data.F)
    lam_rep = lambda_g_report(fam, dom)
    l_closed = closed_form_l(fam, rep_robin.M, rep_robin.S)
    l_grid, conf = limit_l(data, rep_robin.M, rep_robin.S, gamma_grid=grid, fam=fam)
    report = classify(rep_robin.M, rep_robin.S, lam_rep["lambda_g"], l_grid, conf,
                      l_closed=l_closed, lambda_gap=lam_rep["gap"],
                      diagnostics={"gamma_grid": list(map(float, grid)),
                                   "lambda_1": lambda1(dom)})
    _write_report(args.out, "criterion.json", report.to_json(), cfg)
    ratio_curve_csv(os.path.join(args.out, "ratio_curve.csv"),
                    data, rep_robin.M, rep_robin.S, gamma_grid=grid)
    print(f"verdict: {report.verdict.value}  l_grid={l_grid:.6f} "
          f"(+-{conf:.2g})  Lambda_g={lam_rep['lambda_g']:.6f}")
    return 2 if report.verdict is Verdict.INCONCLUSIVE else 0


# ---------------------------------------------------------------------------
# profiles


def cmd_profiles(cfg: dict, args) -> int:
    r_max = float(cfg.get("r_max", 2000.0))
    if r_max < 100.0:
        raise ConfigError("field 'r_max': must be >= 100 for the log tail fit")
    indices = cfg.get("indices", [0, 1, 2])
    with ThreadPoolExecutor(max_workers=args.jobs) as pool:
        profs = list(pool.map(lambda i: solve_profile(i, r_max=r_max), indices))
    constants = {}
    for i, P in zip(indices, profs):
        P.to_csv(os.path.join(args.out, f"profile_S{i}.csv"))
        constants[f"S{i}"] = P.metadata()
    ints = profile_integrals(r_max=r_max)
    payload = {"constants": constants, "integrals": ints,
               "reference": {"A": list(A_CONSTANTS), "B0": B0_CONSTANT}}
    _write_report(args.out, "profiles.json", payload, cfg)
    for i in indices:
        print(f"S{i}: A={constants[f'S{i}']['A']:.8f} B={constants[f'S{i}']['B']:.8f}")
    return 0


# ---------------------------------------------------------------------------
# bubble


def cmd_bubble(cfg: dict, args) -> int:
    fam = _family(cfg)
    N = int(cfg.get("N", 1))
    gammas = cfg.get("gamma_ladder", [3.0, 4.0, 5.0])
    eps0 = float(cfg.get("eps0", 0.75))
    M = float(cfg.get("robin_max", 0.0))
    if not math.sqrt(1.0 / math.e) < eps0 < 1.0:
        raise ConfigError("field 'eps0': must lie in (1/sqrt(e), 1)")
    lam_override = cfg.get("lam")
    if lam_override is not None and lam_override <= 0:
        raise ConfigError("field 'lam': must be positive")
    data = asymptotic_data(fam)
    profiles = {i: solve_profile(i) for i in range(3)}
    out = ladder_reports(fam, N, gammas, M=M, eps0=eps0,
                         profiles=profiles, data=data)
    payload = {
        "gammas": out["gammas"],
        "expansion": [r.to_json() for r in out["expansion"]],
        "source": [r.to_json() for r in out["source"]],
        "expansion_nonincreasing": out["expansion_nonincreasing"],
        "source_nonincreasing": out["source_nonincreasing"],
    }
    _write_report(args.out, "bubble.json", payload, cfg)
    for sol in out["solutions"]:
        sol.to_csv(os.path.join(args.out, f"bubble_gamma{sol.gamma:g}.csv"))
    for g, e, s in zip(out["gammas"], out["expansion"], out["source"]):
        print(f"gamma={g:g}: expansion sup={e.sup_normalized:.6f} "
              f"source sup={s.sup_normalized:.6f}")
    print(f"trends: expansion nonincreasing={out['expansion_nonincreasing']} "
          f"source nonincreasing={out['source_nonincreasing']}")
    return 0


# ---------------------------------------------------------------------------
# extremal


def cmd_extremal(cfg: dict, args) -> int:
    fam = _family(cfg)
    dom = _domain(cfg)
    N = int(cfg.get("N", 1))
    fracs = cfg.get("alpha_ladder", [0.7, 0.8, 0.9, 0.95])
    alphas = [f * 4.0 * math.pi for f in fracs]
    if any(a >= 4.0 * math.pi for a in alphas):
        raise ConfigError("field 'alpha_ladder': alpha must stay below 4 pi")
    starts = tuple(cfg.get("starts", ["flat", "bubble", "eigen"]))
    if not starts:
        raise ConfigError("field 'starts': must be nonempty")

    with ThreadPoolExecutor(max_workers=args.jobs) as pool:
        runs = list(pool.map(lambda a: solve_subcritical(fam, N, a, starts=starts),
                             alphas))
    payload = {"runs": [r.to_json() for r in runs]}
    for r in runs:
        r.u.to_csv(os.path.join(args.out, f"extremal_alpha{r.alpha:.4f}.csv"))
        print(f"alpha={r.alpha:.4f}: J={r.J_value:.6f} saturated={r.saturated} "
              f"lambda={r.lam:.6f} el_residual={r.el_residual:.2e}")

    eps = float(cfg.get("step1_eps", 0.005))
    s1 = step1_testfun(dom, fam, eps)
    payload["step1"] = {"eps": eps, **{k: float(v) for k, v in s1.items()}}
    print(f"step1 eps={eps}: J={s1['J']:.6f} (blow-up level "
          f"{math.pi + math.pi * math.e:.6f})")

    gam = float(cfg.get("model_gamma", 5.0))
    data = asymptotic_data(fam)
    profiles = {i: solve_profile(i) for i in range(3)}
    mt = model_testfun_energy(dom, fam, data, profiles, gam)
    payload["model_testfun"] = {
        k: (float(v) if not isinstance(v, list) else [float(x) for x in v])
        for k, v in mt.items()}
    print(f"model gamma={gam:g}: normalized gap={mt['normalized_gap']:+.4f}")
    _write_report(args.out, "extremal.json", payload, cfg)
    return 0


# ---------------------------------------------------------------------------
# verify


def _verify_rows(seed: int, tol_scale: float) -> list:
    rng = random.Random(seed)
    rows = []

    def row(name, ok, detail):
        rows.append((name, bool(ok), detail))

    # Series identities on random triples.  Partial-sum terms t^k/k! are
    # built by the recursion term *= t/(k+1): one rounding per step and no
    # pow overflow at t ~ 400, N ~ 200.
    def series_terms(t, n):
        out, term = [], 1.0
        for k in range(n + 1):
            out.append(term)
            term *= t / (k + 1)
        return out

    worst_alg, worst_phi = 0.0, 0.0
    for _ in range(100):
        N = rng.randint(1, 200)
        T = rng.uniform(0.0, 400.0)
        G = rng.uniform(T, 400.0)
        pT, pG = phi_N(N, T), phi_N(N, G)
        shift = math.exp(G - T)
        lhs = pG - pT * shift
        tG, tT = series_terms(G, N), series_terms(T, N + 3)
        ssum = sum(a - b * shift for a, b in zip(tG, tT))
        # backward-error scale: the largest magnitude appearing in the
        # identity (the tails can be exponentially smaller than the sums)
        scale = max(abs(pG), abs(pT) * shift, max(tG), max(tT) * shift, 1.0)
        worst_alg = max(worst_alg, abs(lhs + ssum) / scale)
        k = rng.randint(0, 3)
        lhs_phi = phi_N(N + k, T)
        rhs_phi = pT - sum(tT[N + 1:N + k + 1])
        worst_phi = max(worst_phi, abs(lhs_phi - rhs_phi) / max(abs(pT), 1e-300))
    row("AlgRelat residual", worst_alg < 1e-12 * tol_scale, f"{worst_alg:.2e}")
    row("FormulaPhi residual", worst_phi < 1e-12 * tol_scale, f"{worst_phi:.2e}")

    # Domain geometry.
    dom = DomainModel(shape=Shape.UNIT_DISK)
    l1 = lambda1(dom)
    row("lambda_1 disk", abs(l1 - 5.783185962946783) < 1e-6 * tol_scale, f"{l1:.9f}")
    data0 = asymptotic_data(PerturbationFamily())
    rr = robin_report(dom, data0.F)
    row("Robin max disk", abs(rr.M) < 1e-8 * tol_scale, f"M={rr.M:.2e}")
    row("Green S integral disk", abs(rr.S - 0.5) < 1e-4 * tol_scale, f"S={rr.S:.8f}")

    # Profile constants ("NoteSi A_i" are the Laplacian integrals).
    ints = profile_integrals()
    for i, (got, want) in enumerate(zip(ints["A_check"], A_CONSTANTS)):
        row(f"NoteSi A_{i}", abs(got - want) < 5e-3 * want * tol_scale,
            f"{got:.6f} vs {want:.6f}")
    row("I_S0 = 0", abs(ints["I_S0"]) < 1e-6 * tol_scale, f"{ints['I_S0']:.2e}")
    row("I_T0sq = 2 pi", abs(ints["I_T0sq"] - 2 * math.pi) < 1e-6 * tol_scale,
        f"{ints['I_T0sq']:.9f}")
    P0 = solve_profile(0)
    rprobe = np.geomspace(1e-3, 100.0, 500)
    gap = float(np.max(np.abs(P0(rprobe) - s0_explicit(rprobe))))
    row("S0 ODE vs explicit", gap < 1e-7 * tol_scale, f"sup={gap:.2e}")
    return rows


def cmd_verify(cfg: dict, args) -> int:
    rows = _verify_rows(args.seed, args.tolerance_scale)
    width = max(len(name) for name, _, _ in rows)
    all_ok = True
    for name, ok, detail in rows:
        status = "pass" if ok else "FAIL"
        all_ok &= ok
        print(f"{name:<{width}}  {status}  {detail}")
    payload = {"rows": [{"name": n, "pass": ok, "detail": d} for n, ok, d in rows],
               "all_pass": all_ok, "seed": args.seed,
               "tolerance_scale": args.tolerance_scale}
    _write_report(args.out, "verify.json", payload, cfg)
    return 0 if all_ok else 1


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="mtcrit",
        description="Existence criterion toolkit for perturbed "
                    "Moser-Trudinger extremals")
    p.add_argument("--version", action="version", version=f"mtcrit {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name, fn, help_ in [
        ("criterion", cmd_criterion, "existence verdict for a scenario"),
        ("profiles", cmd_profiles, "solve the correction profiles"),
        ("bubble", cmd_bubble, "bubble gamma ladder with expansion checks"),
        ("extremal", cmd_extremal, "subcritical solver + test functions"),
        ("verify", cmd_verify, "run the invariant suite"),
    ]:
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--config", default=None, help="JSON scenario file")
        sp.add_argument("--out", default=".", help="output directory")
        sp.add_argument("--jobs", type=int, default=1, help="parallel workers")
        sp.add_argument("--seed", type=int, default=0, help="RNG seed")
        sp.add_argument("--tolerance-scale", type=float, default=1.0,
                        help="multiply verification tolerances")
        sp.set_defaults(func=fn)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.tolerance_scale <= 0:
        print("error: --tolerance-scale must be positive", file=sys.stderr)
        return 1
    try:
        cfg = _load_config(args.config)
        return args.func(cfg, args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # numerical failures map to exit 1 with a name
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
