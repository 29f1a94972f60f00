"""Command-line front end.

Four subcommands:

* ``simulate``          draw truncated beta / gamma / symmetric-gamma
                        processes, one JSONL record per atom
* ``truncation-table``  closed-form truncation error tables
* ``posterior``         beta-process posterior resampling from a prior
                        draw file and an observation-count file
* ``verify``            run the density/moment/distribution check suite

Output is a header record followed by data records, as JSONL (default)
or CSV.  Every float is printed with 17 significant digits, so JSONL and
CSV encodings of one run carry identical numeric values, and a repeated
run with the same seed is byte-identical.  The header includes the seed
(generated and recorded when not supplied), the library version, and the
applicable truncation error.

Replicas fan out over a worker pool, but replica r always owns stream
path [r], so the bytes written are independent of --workers.

Exit codes: 0 success, 1 verification failure, 2 parameter or file
errors.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from scipy import stats

from . import __version__, beta, gamma, posterior, truncation, verify
from .measures import (
    Domain,
    DomainError,
    OracleError,
    PointMeasure,
    UnsupportedParameterError,
    WeightedAtom,
)
from .posterior import InvalidPriorError, ObservationSet
from .streams import RandomStream


class CLIError(ValueError):
    """Bad flags or malformed input files; exits with code 2."""


# families whose atoms carry no sub-round index; h serializes as null
_NO_SUBROUND = ("beta", "stable-beta")

_DENSITY_TARGET_MARGIN = 1e-7  # per-point tail used to pick K from the bound


def _fmt_float(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError("refusing to serialize a non-finite number")
    return f"{float(x):.17g}"


def _json_value(v) -> str:
    if v is None:
        return "null"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return _fmt_float(v)
    if isinstance(v, str):
        return json.dumps(v)
    if isinstance(v, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_json_value(x) for x in v) + "]"
    raise TypeError(f"cannot serialize {type(v).__name__}")


def _json_line(record: dict) -> str:
    parts = (f"{json.dumps(k)}: {_json_value(v)}" for k, v in record.items())
    return "{" + ", ".join(parts) + "}"


def _csv_field(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return _fmt_float(v)
    if isinstance(v, (list, tuple, np.ndarray)):
        return ";".join(_fmt_float(x) for x in v)
    s = str(v)
    if any(ch in s for ch in ",\"\n"):
        s = '"' + s.replace('"', '""') + '"'
    return s


def _emit(args, header: dict, rows: list, columns: list) -> None:
    if args.format == "jsonl":
        lines = [_json_line(header)] + [_json_line(r) for r in rows]
    else:
        lines = ["# " + _json_line(header), ",".join(columns)]
        lines += [",".join(_csv_field(r.get(c)) for c in columns) for r in rows]
    data = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as f:
            f.write(data)
    else:
        sys.stdout.write(data)


def _resolve_seed(args) -> int:
    if args.seed is not None:
        if args.seed < 0:
            raise CLIError("--seed must be nonnegative")
        return args.seed
    return int.from_bytes(os.urandom(8), "big") >> 1


def _parse_h(raw) -> int | None:
    """--H value: a positive integer, or the literal inf (None here)."""
    if raw is None or raw == "inf":
        return None
    try:
        h = int(raw)
    except ValueError:
        raise CLIError(f"--H must be a positive integer or 'inf', got {raw!r}")
    if h < 1:
        raise CLIError("--H must be >= 1")
    return h


def _run_pool(workers: int, fn, indices):
    if workers <= 1:
        return [fn(i) for i in indices]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, indices))


# ---------------------------------------------------------------- simulate


def _simulate_config(args):
    if args.rounds is not None:
        if args.rounds < 1:
            raise CLIError("--rounds must be >= 1")
        K = args.rounds - 1
    elif args.K is not None:
        K = args.K
    else:
        raise CLIError("simulate needs --K (last round index) or --rounds")
    if args.mass <= 0.0:
        raise CLIError("--mass must be positive")
    if args.replicas < 0:
        raise CLIError("--replicas must be >= 0")
    return K


def cmd_simulate(args) -> int:
    family = args.family
    K = _simulate_config(args)
    seed = _resolve_seed(args)
    root = RandomStream(seed)

    if family == "beta":
        if args.c is None or args.c <= 0.0:
            raise CLIError("beta simulation needs --c > 0")
        if K < 0:
            raise CLIError("--K must be >= 0 for the beta family")
        params = beta.BetaProcessParams.homogeneous(args.c, args.mass)
        l1 = truncation.beta_l1_error(params, K)
        header = {
            "command": "simulate",
            "family": family,
            "c": float(args.c),
            "mass": float(args.mass),
            "K": K,
            "replicas": args.replicas,
            "seed": seed,
            "version": __version__,
            "truncation_l1": l1,
        }

        def one(r):
            return beta.simulate_beta_process(params, K, root.child(r))

    elif family in ("gamma", "symmetric-gamma"):
        if args.theta is None or args.theta <= 0.0:
            raise CLIError("gamma simulation needs --theta > 0")
        if K < 1:
            raise CLIError("--K must be >= 1 for the gamma family")
        H = _parse_h(args.H)
        params = gamma.GammaProcessParams.homogeneous(args.theta, args.mass)
        l1 = truncation.gamma_l1_error(K, H)
        header = {
            "command": "simulate",
            "family": family,
            "theta": float(args.theta),
            "mass": float(args.mass),
            "K": K,
            "H": "inf" if H is None else H,
            "replicas": args.replicas,
            "seed": seed,
            "version": __version__,
            "truncation_l1": l1,
        }
        if H is None:
            # simulation cannot run infinitely many sub-rounds; the cap is
            # part of the recorded config so the run stays reproducible
            header["H_sim_cap"] = gamma.SUBROUND_CAP
        sim = (
            gamma.simulate_gamma_process
            if family == "gamma"
            else gamma.simulate_symmetric_gamma
        )

        def one(r):
            return sim(params, K, H, root.child(r))

    else:  # pragma: no cover - argparse choices guard this
        raise CLIError(f"unknown family {family!r}")

    draws = _run_pool(args.workers, one, range(args.replicas))
    rows = []
    for r, draw in enumerate(draws):
        for atom in draw:
            rows.append(
                {
                    "replica": r,
                    "family": family,
                    "k": atom.round_k,
                    "h": None if family in _NO_SUBROUND else atom.subround_h,
                    "location": atom.location,
                    "jump": atom.jump,
                    "origin": atom.origin,
                }
            )
    columns = ["replica", "family", "k", "h", "location", "jump", "origin"]
    _emit(args, header, rows, columns)
    return 0


# -------------------------------------------------------- truncation-table


def cmd_truncation_table(args) -> int:
    if args.mass <= 0.0:
        raise CLIError("--mass must be positive")
    if args.K_max < 0:
        raise CLIError("--K-max must be >= 0")
    seed = _resolve_seed(args)
    rows = []
    if args.family == "beta":
        if args.c is None or args.c <= 0.0:
            raise CLIError("beta tables need --c > 0")
        if args.M is not None and args.M < 1:
            raise CLIError("--M must be >= 1 when supplied")
        params = beta.BetaProcessParams.homogeneous(args.c, args.mass)
        header = {
            "command": "truncation-table",
            "family": "beta",
            "c": float(args.c),
            "mass": float(args.mass),
            "M": args.M,
            "K_max": args.K_max,
            "seed": seed,
            "version": __version__,
            "truncation_l1": None,
        }
        for K in range(args.K_max + 1):
            rep = truncation.beta_truncation_report(params, K, args.M)
            stick_l1, _ = truncation.stick_breaking_bounds(
                args.c, args.mass, K, args.M
            )
            rows.append(
                {
                    "K": K,
                    "l1_error": rep.l1_error,
                    "marginal_bound": rep.marginal_bound,
                    "expected_atoms": rep.expected_atoms,
                    "stick_breaking_l1": stick_l1,
                }
            )
        columns = [
            "K",
            "l1_error",
            "marginal_bound",
            "expected_atoms",
            "stick_breaking_l1",
        ]
    elif args.family == "gamma":
        H = _parse_h(args.H)
        header = {
            "command": "truncation-table",
            "family": "gamma",
            "mass": float(args.mass),
            "H": "inf" if H is None else H,
            "K_max": args.K_max,
            "seed": seed,
            "version": __version__,
            "truncation_l1": None,
        }
        for K in range(1, args.K_max + 1):
            rep = truncation.gamma_truncation_report(args.mass, K, H)
            rows.append(
                {
                    "K": K,
                    "H": "inf" if H is None else H,
                    "l1_error": rep.l1_error,
                    "marginal_bound": None,
                    "expected_atoms": rep.expected_atoms,
                }
            )
        columns = ["K", "H", "l1_error", "marginal_bound", "expected_atoms"]
    else:  # pragma: no cover - argparse choices guard this
        raise CLIError(f"unknown family {args.family!r}")
    _emit(args, header, rows, columns)
    return 0


# ---------------------------------------------------------------- posterior


def _read_jsonl(path):
    try:
        f = open(path, "r", encoding="utf-8")
    except OSError as exc:
        raise CLIError(f"cannot open {path}: {exc.strerror}")
    records = []
    with f:
        for lineno, line in enumerate(f, 1):
            s = line.strip()
            if not s:
                continue
            try:
                rec = json.loads(s)
            except json.JSONDecodeError as exc:
                raise CLIError(f"parse error at {path}:{lineno}: {exc.msg}")
            if not isinstance(rec, dict):
                raise CLIError(
                    f"parse error at {path}:{lineno}: expected a JSON object"
                )
            records.append((lineno, rec))
    return records


def _field(path, lineno, rec, name, kinds, kindname):
    if name not in rec:
        raise CLIError(f"parse error at {path}:{lineno}: missing field {name!r}")
    v = rec[name]
    if not isinstance(v, kinds) or isinstance(v, bool):
        raise CLIError(
            f"parse error at {path}:{lineno}: field {name!r} must be {kindname}"
        )
    return v


def _read_prior_draw(path) -> PointMeasure:
    atoms = []
    dim = None
    for lineno, rec in _read_jsonl(path):
        if "command" in rec:  # header line from a simulate run
            continue
        loc = _field(path, lineno, rec, "location", list, "an array")
        jump = _field(path, lineno, rec, "jump", (int, float), "a number")
        if dim is None:
            dim = len(loc)
        elif len(loc) != dim:
            raise CLIError(
                f"parse error at {path}:{lineno}: location dimension changed"
            )
        if not 0.0 < float(jump) < 1.0:
            raise InvalidPriorError(
                f"prior jump at {path}:{lineno} lies outside (0, 1)"
            )
        k = rec.get("k", 0)
        atoms.append(
            WeightedAtom(
                location=np.asarray(loc, dtype=np.float64),
                jump=float(jump),
                round_k=int(k) if k is not None else 0,
            )
        )
    if not atoms:
        raise CLIError(f"{path} holds no prior atoms")
    return PointMeasure(Domain(dim=dim), atoms)


def _read_observations(path, M: int) -> ObservationSet:
    locs = []
    counts = []
    for lineno, rec in _read_jsonl(path):
        if "command" in rec:
            continue
        loc = _field(path, lineno, rec, "location", list, "an array")
        count = _field(path, lineno, rec, "count", int, "an integer")
        if not 0 <= count <= M:
            raise CLIError(
                f"parse error at {path}:{lineno}: count must lie in [0, {M}]"
            )
        locs.append(loc)
        counts.append(count)
    if not locs:
        raise CLIError(f"{path} holds no observations")
    return ObservationSet(M=M, locations=np.asarray(locs), counts=counts)


def cmd_posterior(args) -> int:
    if args.c is None or args.c <= 0.0:
        raise CLIError("posterior updates need --c > 0")
    if args.mass <= 0.0:
        raise CLIError("--mass must be positive")
    if args.M < 0:
        raise CLIError("--M must be >= 0")
    if args.K < 0:
        raise CLIError("--K must be >= 0")
    if args.draws < 1:
        raise CLIError("--draws must be >= 1")
    new_draws = args.draws if args.new_draws is None else args.new_draws
    if new_draws < 0:
        raise CLIError("--new-draws must be >= 0")
    seed = _resolve_seed(args)
    root = RandomStream(seed)
    c, M, K = float(args.c), args.M, args.K

    prior_draw = _read_prior_draw(args.prior)
    obs = _read_observations(args.obs, M)
    prior = beta.BetaProcessParams.homogeneous(c, args.mass)
    pp = posterior.posterior_params(prior, obs)

    header = {
        "command": "posterior",
        "family": "beta",
        "c": c,
        "mass": float(args.mass),
        "M": M,
        "K": K,
        "draws": args.draws,
        "new_draws": new_draws,
        "prior_atoms": len(prior_draw),
        "seed": seed,
        "version": __version__,
        "truncation_l1": None,
    }
    rows = []
    for i in range(len(obs)):
        m_i = int(obs.counts[i])
        values = posterior.resample_observed_jumps(
            c, M, m_i, K, root.child(0, i), args.draws
        )
        for d in range(args.draws):
            rows.append(
                {
                    "record": "observed-draw",
                    "atom": i,
                    "draw": d,
                    "value": values[d],
                }
            )
        exact = m_i / (c + M)
        a = c + M
        # the undecomposed posterior Beta(m_i, c+M-m_i) exists only for
        # 0 < m_i < c+M; its variance is reported for comparison, never
        # asserted, since the round sum matches it in mean alone
        ref_var = (
            m_i * (a - m_i) / (a * a * (a + 1.0)) if 0 < m_i < a else None
        )
        rows.append(
            {
                "record": "atom-summary",
                "atom": i,
                "location": obs.locations[i],
                "count": m_i,
                "empirical_mean": float(values.mean()),
                "empirical_var": float(values.var(ddof=1)) if args.draws > 1 else 0.0,
                "posterior_mean": exact,
                "beta_ref_var": ref_var,
                "truncated_mean": posterior.resample_truncated_expectation(
                    c, M, m_i, K
                ),
                "frac_above_one": float((values > 1.0).mean()),
            }
        )
    new_ks, new_vals = posterior.sample_new_jumps(c, M, K, root.child(1), new_draws)
    for d in range(new_draws):
        rows.append(
            {"record": "new-draw", "draw": d, "k": int(new_ks[d]), "value": float(new_vals[d])}
        )
    rows.append(
        {
            "record": "summary",
            "c_post": pp.c_post,
            "base_mass": pp.base_post.total_mass,
            "observed_atoms": len(obs),
            "prior_equivalent": M == 0,
        }
    )
    columns = [
        "record",
        "atom",
        "draw",
        "k",
        "location",
        "count",
        "value",
        "empirical_mean",
        "empirical_var",
        "posterior_mean",
        "beta_ref_var",
        "truncated_mean",
        "frac_above_one",
        "c_post",
        "base_mass",
        "observed_atoms",
        "prior_equivalent",
    ]
    _emit(args, header, rows, columns)
    return 0


# ------------------------------------------------------------------- verify


def _density_check_rows(name, family, params, grid, k_for, H=None, tol=1e-6):
    """Max relative error of the partial sum vs the closed form, one row."""
    worst = 0.0
    k_used = 0
    for x in grid:
        target = verify.levy_density(family, params, x)
        K = k_for(x)
        k_used = max(k_used, K)
        part = verify.decomposition_density_partial_sum(family, params, x, K, H)
        worst = max(worst, abs(part.value - target) / target)
    detail = f"max relative error over {len(grid)}-point grid, K up to {k_used}"
    if H is not None:
        detail += f", H={H}"
    return verify.make_report(name, 0.0, worst, tol, "abs", detail)


def _geometric_k(x) -> int:
    # beta-family partial sums have exact relative error (1-x)^(K+1)
    return max(0, math.ceil(math.log(_DENSITY_TARGET_MARGIN) / math.log1p(-x)))


def _gamma_k(p, theta) -> int:
    # the k-tail dominates and decays like exp(-p(K+1)/theta)
    return max(1, math.ceil(-math.log(_DENSITY_TARGET_MARGIN) * theta / p))


def _check_beta_density(args):
    grid = np.linspace(0.05, 0.95, 50)
    rows = []
    for c in (0.5, 1.0, 3.0):
        k_for = (lambda x: args.K) if args.K is not None else _geometric_k
        rows.append(
            _density_check_rows(
                f"beta-density/c={c:g}", "beta", {"c": c}, grid, k_for
            )
        )
    return rows


def _check_stable_beta_density(args):
    grid = np.linspace(0.05, 0.95, 50)
    s = args.sigma
    rows = []
    for c in (0.5, 1.0, 3.0):
        k_for = (lambda x: args.K) if args.K is not None else _geometric_k
        rows.append(
            _density_check_rows(
                f"stable-beta-density/c={c:g},sigma={s:g}",
                "stable-beta",
                {"c": c, "sigma": s},
                grid,
                k_for,
            )
        )
    return rows


def _check_gamma_density(args):
    grid = np.linspace(0.05, 5.0, 50)
    theta = 1.0
    H = _parse_h(args.H) or 60
    if args.K is not None:
        k_for = lambda p: args.K
    else:
        k_for = lambda p: _gamma_k(p, theta)
    return [
        _density_check_rows(
            "gamma-density/theta=1",
            "gamma",
            {"theta": theta},
            grid,
            k_for,
            H=H,
        )
    ]


def _check_moment_closure(args):
    rows = []
    K = 10**4
    for c in (1.0, 3.0):
        params = beta.BetaProcessParams.homogeneous(c, 1.0)
        for label, A in (("domain", None), ("[0,0.3]", (0.0, 0.3))):
            mean, var = beta.cumulative_round_moments(params, K, A)
            for r, computed in ((1, mean), (2, var)):
                target = verify.moment_oracle("beta", params, A, r)
                kind = "mean" if r == 1 else "variance"
                rows.append(
                    verify.make_report(
                        f"moment-closure/c={c:g},A={label},{kind}",
                        target,
                        computed,
                        1e-3,
                        "rel",
                        f"round sum K={K} vs quadrature",
                    )
                )
    return rows


def _check_ibp(args):
    grid = np.linspace(0.1, 0.9, 9)
    c, mass = 1.0, 1.0
    n_final = args.N
    ns = sorted({10**3, 10**4, 10**5, n_final})
    errs = []
    rows = []
    for n in ns:
        worst = 0.0
        for x in grid:
            target = verify.levy_density("beta", {"c": c}, x)
            approx = beta.ibp_levy_density(n, c, mass, x)
            worst = max(worst, abs(approx - target) / target)
        errs.append(worst)
        if n == n_final:
            rows.append(
                verify.make_report(
                    f"ibp/N={n}",
                    0.0,
                    worst,
                    1e-3,
                    "abs",
                    "max relative error over pi in {0.1,...,0.9}",
                )
            )
    decreasing = all(a > b for a, b in zip(errs, errs[1:]))
    rows.append(
        verify.make_report(
            "ibp/monotone",
            1.0,
            1.0 if decreasing else 0.0,
            0.0,
            "abs",
            "errors " + ", ".join(_fmt_float(e) for e in errs),
        )
    )
    return rows


def _check_gamma_marginal(args, root):
    params = gamma.GammaProcessParams.homogeneous(1.0, 2.0)
    K, H = 199, 40
    masses = np.empty(args.replicas, dtype=np.float64)
    for r in range(args.replicas):
        draw = gamma.simulate_gamma_process(params, K, H, root.child(r))
        masses[r] = draw.total_mass
    res = verify.ks_distance(masses, stats.gamma(a=2.0, scale=1.0).cdf)
    return [
        verify.VerificationReport(
            name="gamma-marginal-ks",
            target=0.0,
            computed=res.statistic,
            tolerance=res.critical_value,
            mode="abs",
            passed=res.passed,
            detail=f"total mass vs Gamma(2,1), n={res.n}, K={K}, H={H}",
        )
    ]


def _check_symmetric_variance(args, root):
    params = gamma.GammaProcessParams.homogeneous(1.0, 1.0)
    K, H = 100, 30
    masses = np.empty(args.replicas, dtype=np.float64)
    for r in range(args.replicas):
        draw = gamma.simulate_symmetric_gamma(params, K, H, root.child(r))
        masses[r] = draw.total_mass
    mom = verify.monte_carlo_moments(masses)
    target_var = gamma.symmetric_variance(params, K, H)
    return [
        verify.make_report(
            "symmetric-gamma/mean",
            0.0,
            mom.mean,
            4.0 * mom.se_mean,
            "abs",
            f"signed mass over {mom.n} replicas",
        ),
        verify.make_report(
            "symmetric-gamma/variance",
            target_var,
            mom.variance,
            0.05,
            "rel",
            f"truncation-adjusted target at K={K}, H={H}",
        ),
    ]


def _check_generalized_gate(args):
    rows = []
    for s in (0.1, 0.5, 0.9):
        gate = verify.generalized_gamma_gate(s)
        rows.append(
            verify.VerificationReport(
                name=f"generalized-gate/sigma={s:g}",
                target=0.0,
                computed=gate.max_rel_err_printed,
                tolerance=1e-3,
                mode="abs",
                passed=gate.printed_all_ok,
                detail=(
                    f"gated, never fails the run; fitted constant "
                    f"{_fmt_float(gate.fitted_constant)}; corrected variant "
                    f"max rel err {_fmt_float(gate.max_rel_err_corrected)} "
                    f"({'ok' if gate.corrected_all_ok else 'bad'})"
                ),
            )
        )
    return rows


_DEFAULT_CHECKS = [
    "beta-density",
    "stable-beta-density",
    "gamma-density",
    "moment-closure",
    "ibp",
    "generalized-gate",
]
_SIM_CHECKS = ["gamma-marginal", "symmetric-variance"]
# informational checks; their failures never drive the exit code
_GATED_PREFIX = "generalized-gate"


def cmd_verify(args) -> int:
    requested = args.check or ["default"]
    names: list[str] = []
    for item in requested:
        if item == "default":
            names.extend(_DEFAULT_CHECKS)
        elif item == "all":
            names.extend(_DEFAULT_CHECKS + _SIM_CHECKS)
        else:
            names.append(item)
    seen = set()
    names = [n for n in names if not (n in seen or seen.add(n))]
    if args.replicas < 2:
        raise CLIError("--replicas must be >= 2")
    seed = _resolve_seed(args)
    root = RandomStream(seed)

    runners = {
        "beta-density": lambda: _check_beta_density(args),
        "stable-beta-density": lambda: _check_stable_beta_density(args),
        "gamma-density": lambda: _check_gamma_density(args),
        "moment-closure": lambda: _check_moment_closure(args),
        "ibp": lambda: _check_ibp(args),
        "gamma-marginal": lambda: _check_gamma_marginal(args, root.child(0)),
        "symmetric-variance": lambda: _check_symmetric_variance(
            args, root.child(1)
        ),
        "generalized-gate": lambda: _check_generalized_gate(args),
    }
    reports = []
    for name in names:
        if name not in runners:
            raise CLIError(f"unknown check {name!r}")
        try:
            reports.extend(runners[name]())
        except OracleError as exc:
            reports.append(
                verify.VerificationReport(
                    name=name,
                    target=0.0,
                    computed=0.0,
                    tolerance=0.0,
                    mode="abs",
                    passed=False,
                    detail=f"oracle error: {exc}",
                )
            )

    header = {
        "command": "verify",
        "checks": names,
        "seed": seed,
        "version": __version__,
        "truncation_l1": None,
    }
    rows = [
        {
            "name": rep.name,
            "target": rep.target,
            "computed": rep.computed,
            "tolerance": rep.tolerance,
            "mode": rep.mode,
            "passed": rep.passed,
            "detail": rep.detail,
        }
        for rep in reports
    ]
    columns = ["name", "target", "computed", "tolerance", "mode", "passed", "detail"]
    _emit(args, header, rows, columns)
    failed = [
        rep
        for rep in reports
        if not rep.passed and not rep.name.startswith(_GATED_PREFIX)
    ]
    return 1 if failed else 0


# --------------------------------------------------------------- arg wiring


def _add_output_flags(sp):
    sp.add_argument("--out", help="output path (default: stdout)")
    sp.add_argument("--format", choices=["jsonl", "csv"], default="jsonl")
    sp.add_argument("--seed", type=int, help="stream seed; generated if absent")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="levycrm",
        description="Round-decomposed beta/gamma random measure toolkit",
    )
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("simulate", help="draw truncated processes")
    sp.add_argument(
        "--family",
        required=True,
        choices=["beta", "gamma", "symmetric-gamma"],
    )
    sp.add_argument("--c", type=float, help="beta concentration")
    sp.add_argument("--theta", type=float, help="gamma scale")
    sp.add_argument("--mass", type=float, default=1.0, help="base measure mass")
    group = sp.add_mutually_exclusive_group()
    group.add_argument("--K", type=int, help="last round index (rounds 0..K)")
    group.add_argument(
        "--rounds", type=int, help="number of rounds (equivalent to --K N-1)"
    )
    sp.add_argument("--H", default="inf", help="sub-round cutoff or 'inf'")
    sp.add_argument("--replicas", type=int, default=1)
    sp.add_argument("--workers", type=int, default=1)
    _add_output_flags(sp)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("truncation-table", help="closed-form error tables")
    sp.add_argument("--family", required=True, choices=["beta", "gamma"])
    sp.add_argument("--c", type=float)
    sp.add_argument("--mass", type=float, default=1.0)
    sp.add_argument("--K-max", dest="K_max", type=int, default=20)
    sp.add_argument("--H", default="inf")
    sp.add_argument("--M", type=int, help="data size for the marginal bound")
    _add_output_flags(sp)
    sp.set_defaults(func=cmd_truncation_table)

    sp = sub.add_parser("posterior", help="posterior resampling workflow")
    sp.add_argument("--c", type=float, required=True)
    sp.add_argument("--mass", type=float, default=1.0)
    sp.add_argument("--M", type=int, required=True, help="Bernoulli draw count")
    sp.add_argument("--K", type=int, default=1000, help="round truncation")
    sp.add_argument("--draws", type=int, default=1000)
    sp.add_argument("--new-draws", dest="new_draws", type=int)
    sp.add_argument("--prior", required=True, help="prior draw JSONL file")
    sp.add_argument("--obs", required=True, help="observation-count JSONL file")
    _add_output_flags(sp)
    sp.set_defaults(func=cmd_posterior)

    sp = sub.add_parser("verify", help="run the numerical check suite")
    sp.add_argument(
        "--check",
        action="append",
        help="check name, 'default', or 'all' (repeatable)",
    )
    sp.add_argument("--N", type=int, default=10**6, help="feature-count size")
    sp.add_argument("--K", type=int, help="fixed K for density checks")
    sp.add_argument("--H", help="fixed H for gamma density checks")
    sp.add_argument("--sigma", type=float, default=0.5)
    sp.add_argument("--replicas", type=int, default=2000)
    _add_output_flags(sp)
    sp.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (
        CLIError,
        DomainError,
        UnsupportedParameterError,
        InvalidPriorError,
        ValueError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
