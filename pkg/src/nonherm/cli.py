"""Command-line front end.

Subcommands expose the deterministic solvers (dyson, density, quantiles,
stability, m12, flow) and the Monte Carlo harness (experiment, report).
Exit codes: 0 success / all predicates pass, 1 predicate failure,
2 usage error.  Config files are INI with one section per experiment;
command-line flags override file values.  Floats print with 17
significant digits for bit-faithful replay.
"""

from __future__ import annotations

import argparse
import configparser
import json
import sys

from .blockmat import E1, E2, EMINUS, EPLUS, F, FSTAR
from .dyson import (SpectralPoint, density, density_profile, fluctuation_scale,
                    quantiles, solve_m, support_gap)
from .experiments import (EXPERIMENTS, config_from_echo, default_config,
                          run_experiment)
from .stability import (SolvedPoint, control_params, lemma_beta_report, m12,
                        stability_eigs)

_OBSERVABLES = {"E1": E1, "E2": E2, "E+": EPLUS, "E-": EMINUS,
                "F": F, "F*": FSTAR}


def _fmt(x) -> str:
    if isinstance(x, complex):
        return f"{x.real:.17g}{x.imag:+.17g}j"
    return f"{float(x):.17g}"


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--z", type=complex, default=None)
    p.add_argument("--z2", type=complex, default=None)
    p.add_argument("--eta", type=float, default=None)
    p.add_argument("--eta2", type=float, default=None)
    p.add_argument("--ensemble", choices=["gaussian", "rademacher",
                                          "uniform"], default=None)
    p.add_argument("--field", choices=["real", "complex"], default=None)
    p.add_argument("--config", default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--format", choices=["json", "csv"], default="json")


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="nonherm",
        description="numerical laboratory for non-Hermitian local laws")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dyson", help="solve the scalar cubic at (z, i eta)")
    _add_common(p)
    p.add_argument("--energy", type=float, default=None,
                   help="real part of w (default 0; eta 0 means E + i0+)")

    p = sub.add_parser("density", help="self-consistent density profile")
    _add_common(p)
    p.add_argument("--energy", type=float, default=None)

    p = sub.add_parser("quantiles", help="eigenvalue quantiles gamma_i")
    _add_common(p)
    p.add_argument("--indices", default="1",
                   help="comma-separated indices (negative allowed)")

    p = sub.add_parser("stability", help="stability spectrum and "
                                         "comparability report")
    _add_common(p)

    p = sub.add_parser("m12", help="two-resolvent deterministic "
                                   "approximation")
    _add_common(p)
    p.add_argument("--a", choices=sorted(_OBSERVABLES), default="E+")

    p = sub.add_parser("flow", help="characteristic flow trajectory")
    _add_common(p)
    p.add_argument("--z0", type=complex, required=True)
    p.add_argument("--eta0", type=float, required=True)
    p.add_argument("--T", type=float, required=True)

    p = sub.add_parser("experiment", help="run a Monte Carlo experiment")
    _add_common(p)
    p.add_argument("name", choices=EXPERIMENTS)

    p = sub.add_parser("report", help="re-run an emitted report's config "
                                      "and verify bit-identical output")
    _add_common(p)
    p.add_argument("path", help="path to a previously emitted JSON report")
    return ap


def _experiment_config(args):
    cfg = default_config(args.name)
    if args.config:
        parser = configparser.ConfigParser()
        with open(args.config) as fh:
            parser.read_file(fh)
        if parser.has_section(args.name):
            overrides = {}
            for key, raw in parser[args.name].items():
                if key in ("z", "z2"):
                    overrides[key] = complex(raw)
                elif key in ("n", "trials", "master_seed", "time_samples",
                             "threads"):
                    overrides[key] = int(raw)
                elif key == "n_list":
                    overrides[key] = tuple(
                        int(v) for v in raw.split(",") if v.strip())
                elif key in ("field", "distribution", "name"):
                    overrides[key] = raw
                else:
                    overrides[key] = float(raw)
            from dataclasses import replace

            cfg = replace(cfg, **overrides)
    flag_map = {"seed": "master_seed", "n": "n", "trials": "trials",
                "z": "z", "z2": "z2", "ensemble": "distribution",
                "field": "field", "threads": "threads"}
    overrides = {}
    for flag, field_name in flag_map.items():
        val = getattr(args, flag)
        if val is not None:
            overrides[field_name] = val
    if args.eta is not None:
        overrides.update(eta_coeff=args.eta, eta_exponent=0.0)
    if args.eta2 is not None:
        overrides.update(eta2_coeff=args.eta2, eta2_exponent=0.0)
    if overrides:
        from dataclasses import replace

        cfg = replace(cfg, **overrides)
    return cfg


def _cmd_dyson(args) -> int:
    z = args.z if args.z is not None else 0.0
    eta = args.eta if args.eta is not None else 0.0
    energy = args.energy if args.energy is not None else 0.0
    boundary = eta == 0.0
    sol = solve_m(SpectralPoint(z=z, w=complex(energy, eta),
                                boundary=boundary))
    print(f"z={_fmt(complex(z))} w={_fmt(complex(energy, eta))}"
          f"{' (boundary)' if boundary else ''}")
    print(f"m={_fmt(sol.m)}")
    print(f"u={_fmt(sol.u)}")
    print(f"rho={_fmt(sol.rho)}")
    return 0


def _cmd_density(args) -> int:
    z = args.z if args.z is not None else 0.0
    if args.energy is not None:
        print(f"rho={_fmt(density(z, args.energy))}")
        return 0
    prof = density_profile(z)
    info = support_gap(z)
    print(f"right_edge={_fmt(info.right_edge)} "
          f"gap_delta={_fmt(info.gap_delta)}")
    if args.out:
        with open(args.out, "w") as fh:
            fh.write("energy,rho\n")
            for e, r in zip(prof.energies, prof.rho_values):
                fh.write(f"{e:.17g},{r:.17g}\n")
        print(f"profile written to {args.out}")
    return 0


def _cmd_quantiles(args) -> int:
    z = args.z if args.z is not None else 0.0
    n = args.n if args.n is not None else 256
    idx = [int(v) for v in args.indices.split(",")]
    for i, g in zip(idx, quantiles(z, n, idx)):
        print(f"gamma_{i}={_fmt(g)}")
    print(f"eta_f={_fmt(fluctuation_scale(z, n))}")
    return 0


def _solved_pair(args):
    z1 = args.z if args.z is not None else 0.5
    z2 = args.z2 if args.z2 is not None else z1
    eta1 = args.eta if args.eta is not None else 0.1
    eta2 = args.eta2 if args.eta2 is not None else -eta1
    return SolvedPoint.from_params(z1, eta1), SolvedPoint.from_params(z2, eta2)


def _cmd_stability(args) -> int:
    p1, p2 = _solved_pair(args)
    bundle = stability_eigs(p1, p2)
    ctrl = control_params(p1, p2)
    print(f"beta_plus={_fmt(bundle.beta_plus)}")
    print(f"beta_minus={_fmt(bundle.beta_minus)}")
    print(f"gamma={_fmt(ctrl.gamma)} hat_gamma={_fmt(ctrl.hat_gamma)} "
          f"ell={_fmt(ctrl.ell)}")
    for key, val in sorted(lemma_beta_report(p1, p2).items()):
        print(f"{key}={_fmt(val)}")
    return 0


def _cmd_m12(args) -> int:
    p1, p2 = _solved_pair(args)
    M = m12(p1, _OBSERVABLES[args.a], p2)
    for r in range(2):
        for c in range(2):
            print(f"M12[{r}][{c}]={_fmt(complex(M.b[r, c]))}")
    return 0


def _cmd_flow(args) -> int:
    import numpy as np

    from .characteristics import _ratio, flow_forward, t_star, trajectory_to_rows

    ts = t_star(args.z0, args.eta0)
    T = args.T
    if T >= ts:
        # truncate just above the eta floor and report it
        r0 = _ratio(args.z0, args.eta0)
        T = np.log((r0 + np.pi) / (np.pi + 1e-7))
        print(f"requested T={_fmt(args.T)} exceeds the trajectory lifetime; "
              f"truncated to T={_fmt(T)}")
    traj = flow_forward(args.z0, args.eta0, T)
    print(f"t_star={_fmt(ts)}")
    print(f"samples={len(traj.states)}")
    if args.out:
        with open(args.out, "w") as fh:
            fh.write("t,re_z,im_z,eta,re_m,im_m,rho\n")
            for row in trajectory_to_rows(traj):
                fh.write(",".join(f"{v:.17g}" for v in row) + "\n")
        print(f"trajectory written to {args.out}")
    return 0


def _cmd_experiment(args) -> int:
    cfg = _experiment_config(args)
    report = run_experiment(args.name, cfg)
    for key, stat in sorted(report.statistics.items()):
        verdict = {True: "pass", False: "FAIL", None: "info"}[stat.passed]
        extra = f" slope={_fmt(stat.slope)}" if stat.slope is not None else ""
        print(f"{key}: median={_fmt(stat.median)} p95={_fmt(stat.p95)}"
              f"{extra} [{verdict}]")
    print(f"experiment={args.name} passed={report.passed} "
          f"runtime={report.runtime:.2f}s")
    if args.out:
        report.write_json(args.out + ".json")
        report.write_csv(args.out + ".csv")
        print(f"reports written to {args.out}.json / {args.out}.csv")
    elif args.format == "json":
        print(report.to_json())
    return 0 if report.passed else 1


def _cmd_report(args) -> int:
    with open(args.path) as fh:
        stored = json.load(fh)
    cfg = config_from_echo(stored["config"])
    fresh = run_experiment(cfg.name, cfg)
    identical = fresh.canonical_dict() == stored
    print(f"re-run of {cfg.name}: bit-identical={identical}")
    if args.out:
        fresh.write_json(args.out)
    return 0 if identical else 1


_DISPATCH = {"dyson": _cmd_dyson, "density": _cmd_density,
             "quantiles": _cmd_quantiles, "stability": _cmd_stability,
             "m12": _cmd_m12, "flow": _cmd_flow,
             "experiment": _cmd_experiment, "report": _cmd_report}


def parse_and_dispatch(argv=None) -> int:
    ap = _build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    try:
        return _DISPATCH[args.command](args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(parse_and_dispatch())


if __name__ == "__main__":
    main()
