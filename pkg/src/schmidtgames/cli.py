"""Configuration-driven entry point: play, validate, build, verify, report.

Each subcommand reads a strict JSON config (unknown fields rejected) and
writes its artifacts into an output directory: ``transcript.json``,
``certificates.json``, ``run.json`` for game runs; ``verify.json`` and
``windows.csv`` for verification; ``report.txt`` / ``report.json`` plus PNG
figures for reports.  Runs are deterministic given (config, seed): all
randomness flows from the single seed through named substreams, and no
artifact contains wall-clock data.

Exit codes: 0 success, 2 configuration/schema error, 3 computation or
verification failure (accompanied by a machine-readable ``error.json``).
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path
from typing import Optional

from .engine import GameTranscript, revalidate
from .escape import (
    WindowSchedule,
    check_lacunary,
    check_uniformly_discrete,
    compute_n_r,
    gate_radius,
    run_escape,
    system_from_json,
)
from .fractals import BUILTIN_IFS, ifs_from_json, limit_set_sample
from .geometry import Ball, v_norm
from .linforms import certificate_from_json, run_bad0, window_params_from_opening
from .players import CenterShrinkBob, GreedyThreatBob, RandomBob
from .precision import init_precision, real_to_str, to_real, vec
from .report import render_report, write_csv
from .rng import RngHub
from .verify import (
    badness_inf,
    cf_badness_consistency,
    crosscheck_certified_badness,
    escape_inf,
)


class ConfigError(ValueError):
    """The config file is malformed, incomplete, or out of contract."""


# ---------------------------------------------------------------------------
# Config loading and schema checks

_BOB_FIELDS = {"kind", "shrink_range", "max_tries", "mode", "samples"}

_SCHEMAS: dict[str, tuple[set[str], set[str]]] = {
    # command -> (required fields, optional fields)
    "play-escape": (
        {"command", "system", "target_stages"},
        {"max_rounds", "check_depth", "q_min", "bob", "opening", "precision_bits"},
    ),
    "play-bad0": (
        {"command", "m_rows", "n_cols", "R", "beta", "opening"},
        {"max_phase_index", "budget", "max_rounds", "bob", "precision_bits"},
    ),
    "validate-system": (
        {"command", "system"},
        {"depth", "q_min", "probe_radius", "precision_bits"},
    ),
}


def parse_number(x) -> Fraction:
    """Exact rational from JSON: numbers, "0.3", or "1/4"."""
    try:
        return Fraction(str(x))
    except (ValueError, ZeroDivisionError) as e:
        raise ConfigError(f"not a number: {x!r} ({e})")


def load_config(path: str, command: str) -> dict:
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}")
    except json.JSONDecodeError as e:
        raise ConfigError(f"config {path} is not valid JSON: {e}")
    if not isinstance(cfg, dict):
        raise ConfigError("config root must be a JSON object")
    required, optional = _SCHEMAS[command]
    missing = required - set(cfg)
    unknown = set(cfg) - required - optional
    if missing:
        raise ConfigError(f"config is missing required fields: {sorted(missing)}")
    if unknown:
        raise ConfigError(f"config has unknown fields: {sorted(unknown)}")
    if cfg["command"] != command:
        raise ConfigError(
            f"config command {cfg['command']!r} does not match subcommand {command!r}"
        )
    if "bob" in cfg:
        bob = cfg["bob"]
        if not isinstance(bob, dict) or "kind" not in bob:
            raise ConfigError("bob spec must be an object with a 'kind'")
        bad = set(bob) - _BOB_FIELDS
        if bad:
            raise ConfigError(f"bob spec has unknown fields: {sorted(bad)}")
    system = cfg.get("system")
    beta = cfg.get("beta", system.get("beta") if isinstance(system, dict) else None)
    if beta is not None and not parse_number(beta) < Fraction(1, 3):
        raise ConfigError(
            f"hyperplane variants require beta < 1/3, got {beta}"
        )
    return cfg


def ball_from_config(spec: dict) -> Ball:
    if not isinstance(spec, dict) or set(spec) != {"center", "radius"}:
        raise ConfigError("a ball is {'center': [...], 'radius': ...}")
    return Ball(
        vec([parse_number(c) for c in spec["center"]]),
        to_real(parse_number(spec["radius"])),
    )


def build_bob(spec: Optional[dict], hub: RngHub, opening: Optional[Ball] = None):
    spec = dict(spec or {"kind": "random"})
    kind = spec.get("kind", "random")
    seed = hub.stream("bob").getrandbits(64)
    if kind == "random":
        return RandomBob(
            seed=seed,
            opening=opening,
            shrink_range=tuple(spec.get("shrink_range", (1.0, 2.0))),
            max_tries=int(spec.get("max_tries", 200)),
        )
    if kind == "greedy":
        return GreedyThreatBob(
            seed=seed,
            mode=spec.get("mode", "hug_planes"),
            opening=opening,
            samples=int(spec.get("samples", 60)),
        )
    if kind == "center_shrink":
        return CenterShrinkBob(opening=opening)
    raise ConfigError(f"unknown bob kind {kind!r}")


# ---------------------------------------------------------------------------
# Artifact helpers


def _out_dir(path: str) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_json(path: Path, payload) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _emit_error(out: Optional[Path], kind: str, message: str, **extra) -> None:
    payload = {"error": {"type": kind, "message": message, **extra}}
    print(json.dumps(payload), file=sys.stderr)
    if out is not None and out.is_dir():
        _write_json(out / "error.json", payload)


class VerificationFailed(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# Subcommands


def cmd_play_escape(args) -> int:
    cfg = load_config(args.config, "play-escape")
    init_precision(cfg.get("precision_bits"))
    out = _out_dir(args.out)
    hub = RngHub(args.seed)
    system, beta = system_from_json(cfg["system"])
    opening = ball_from_config(cfg["opening"]) if "opening" in cfg else None
    bob = build_bob(cfg.get("bob"), hub, opening=opening)
    res = run_escape(
        system,
        beta,
        bob,
        target_stages=int(cfg["target_stages"]),
        max_rounds=int(cfg.get("max_rounds", 400)),
        check_depth=int(cfg.get("check_depth", 40)),
        q_min=parse_number(cfg.get("q_min", 1)),
    )
    outcome = res.transcript.outcome or {}
    if outcome.get("kind") == "IllegalMove" and outcome.get("player") == "alice":
        raise VerificationFailed("the escape strategy played an illegal move")
    sched = res.alice.schedule
    constants = {
        "q_ratio": real_to_str(res.q_ratio),
        "delta_sep": real_to_str(res.delta_sep),
        "n": sched.n,
        "r": sched.r,
        "t1": real_to_str(sched.t1),
        "gate_radius": real_to_str(gate_radius(sched, res.delta_sep)),
        "rho1": None if res.alice.rho1 is None else real_to_str(res.alice.rho1),
        "c_value": (
            None if res.alice.c_value() is None else real_to_str(res.alice.c_value())
        ),
    }
    run = {
        "game": "escape",
        "seed": args.seed,
        "config": cfg,
        "constants": constants,
        "result": {
            "stages": res.completed_stages(),
            "rounds": res.transcript.bob_round_count(),
            "outcome": outcome,
        },
    }
    (out / "transcript.json").write_text(res.transcript.to_json() + "\n")
    _write_json(out / "certificates.json", res.certificates_json())
    _write_json(out / "run.json", run)
    print(f"stages completed: {res.completed_stages()}  artifacts: {out}")
    return 0


def cmd_play_bad0(args) -> int:
    cfg = load_config(args.config, "play-bad0")
    init_precision(cfg.get("precision_bits"))
    out = _out_dir(args.out)
    hub = RngHub(args.seed)
    opening = ball_from_config(cfg["opening"])
    bob = build_bob(cfg.get("bob"), hub)
    i_max = int(cfg.get("max_phase_index", 4))
    res = run_bad0(
        m_rows=int(cfg["m_rows"]),
        n_cols=int(cfg["n_cols"]),
        R=parse_number(cfg["R"]),
        beta=parse_number(cfg["beta"]),
        bob=bob,
        opening=opening,
        max_phase_index=i_max,
        budget=int(cfg.get("budget", 500_000)),
        max_rounds=int(cfg.get("max_rounds", 500)),
    )
    outcome = res.transcript.outcome or {}
    if outcome.get("kind") == "IllegalMove" and outcome.get("player") == "alice":
        raise VerificationFailed("the linear-forms strategy played an illegal move")
    W = res.window_params
    constants = {
        "R": real_to_str(W.R),
        "beta": real_to_str(W.beta),
        "sigma": real_to_str(W.sigma),
        "rho0": real_to_str(W.rho0),
        "delta": real_to_str(W.delta),
        "delta_transpose": real_to_str(W.delta_t),
        "observation_constant": real_to_str(W.observation_constant()),
        "k_thresholds": [real_to_str(W.k_threshold(i)) for i in range(i_max + 1)],
        "h_thresholds": [real_to_str(W.h_threshold(j)) for j in range(i_max + 1)],
    }
    final = res.transcript.final_ball
    run = {
        "game": "bad0",
        "seed": args.seed,
        "config": cfg,
        "constants": constants,
        "result": {
            "succeeded_through": max(
                (i for i in range(i_max + 1) if res.succeeded_through(i)), default=-1
            ),
            "rounds": res.transcript.bob_round_count(),
            "outcome": outcome,
            "final_center": [real_to_str(c) for c in final.center],
            "final_radius": real_to_str(final.radius),
        },
    }
    (out / "transcript.json").write_text(res.transcript.to_json() + "\n")
    _write_json(out / "certificates.json", res.certificates_json())
    _write_json(out / "run.json", run)
    print(
        f"phases completed through: {run['result']['succeeded_through']}"
        f"  artifacts: {out}"
    )
    return 0


def cmd_validate_system(args) -> int:
    cfg = load_config(args.config, "validate-system")
    init_precision(cfg.get("precision_bits"))
    depth = int(cfg.get("depth", 12))
    system, beta = system_from_json(cfg["system"])
    q_ratio = check_lacunary(system, depth, q_min=parse_number(cfg.get("q_min", 1)))
    probe = Ball(
        vec([0] * system.m_rows), to_real(parse_number(cfg.get("probe_radius", 2)))
    )
    delta_sep = check_uniformly_discrete(system, depth, probe)
    n, r = compute_n_r(beta, q_ratio)
    sched = WindowSchedule(beta=beta, n=n, r=r, t1=system.t(0))
    payload = {
        "q_ratio": real_to_str(q_ratio),
        "delta_sep": real_to_str(delta_sep),
        "n": n,
        "r": r,
        "t1": real_to_str(sched.t1),
        "gate_radius": real_to_str(gate_radius(sched, delta_sep)),
        "depth": depth,
    }
    if args.out:
        _write_json(_out_dir(args.out) / "system_report.json", payload)
    print(json.dumps(payload, indent=2, sort_keys=True))
    return 0


def cmd_fractal(args) -> int:
    if args.ifs in BUILTIN_IFS:
        name, ifs = args.ifs, BUILTIN_IFS[args.ifs]()
    elif Path(args.ifs).exists():
        name = Path(args.ifs).stem
        ifs = ifs_from_json(Path(args.ifs).read_text())
    else:
        raise ConfigError(
            f"--ifs must be one of {sorted(BUILTIN_IFS)} or a JSON file path, "
            f"got {args.ifs!r}"
        )
    out = _out_dir(args.out)
    osc = ifs.open_set_condition_check()
    points = limit_set_sample(ifs, args.depth)
    payload = {
        "ifs": name,
        "depth": args.depth,
        "n_maps": len(ifs.maps),
        "ratio_max": ifs.ratio_max,
        "similarity_dimension": ifs.similarity_dimension(),
        "open_set_condition": bool(osc),
        "n_points": int(points.shape[0]),
        "ambient_dim": int(points.shape[1]),
    }
    _write_json(out / "fractal.json", payload)
    if args.emit_points:
        header = [f"x{i}" for i in range(points.shape[1])]
        write_csv(
            out / "points.csv",
            [header] + [[repr(float(v)) for v in p] for p in points],
        )
    print(json.dumps(payload, indent=2, sort_keys=True))
    return 0


def _verify_bad0(transcript: GameTranscript, run: Optional[dict], args, out: Path) -> dict:
    final = transcript.final_ball
    if run is None:
        raise VerificationFailed(
            "verifying a linear-forms transcript needs run.json next to it "
            "(for the matrix shape and window parameters)"
        )
    cfg = run["config"]
    m, n = int(cfg["m_rows"]), int(cfg["n_cols"])
    flat = [float(c) for c in final.center]
    matrix = [flat[i * n : (i + 1) * n] for i in range(m)]
    payload: dict = {}
    report = badness_inf(matrix, q_max=args.qmax)
    payload["badness"] = report.to_json_dict()
    write_csv(out / "windows.csv", report.csv_rows())
    cert_path = (
        Path(args.certificates)
        if args.certificates
        else Path(args.transcript).parent / "certificates.json"
    )
    if cert_path.exists():
        with open(cert_path) as fh:
            certs = [certificate_from_json(d) for d in json.load(fh)]
        opening = next(
            t.ball
            for t in transcript.turns
            if t.player == "bob" and t.verdict == "legal"
        )
        W = window_params_from_opening(
            m, n, parse_number(cfg["R"]), parse_number(cfg["beta"]), opening
        )
        i_max = int(run["result"]["succeeded_through"])
        if i_max < 0:
            raise VerificationFailed("the run completed no phase; nothing to verify")
        cross = crosscheck_certified_badness(
            matrix, W, i_max, certs, float(final.radius)
        )
        payload["crosscheck"] = cross.to_json_dict()
        if not cross.passed:
            raise VerificationFailed(f"certified-badness crosscheck: {cross.reason}")
    if m == 1 and n == 1:
        payload["cf_consistency"] = cf_badness_consistency(
            flat[0], depth=30, q_max=args.qmax
        )
        if not payload["cf_consistency"]["ok"]:
            raise VerificationFailed(
                "partial quotients are out of range for the measured badness"
            )
    return payload


def _verify_escape(transcript: GameTranscript, run: Optional[dict], args, out: Path) -> dict:
    if run is None:
        raise VerificationFailed(
            "verifying an escape transcript needs run.json next to it "
            "(for the system definition and constants)"
        )
    system, _ = system_from_json(run["config"]["system"])
    cert_path = (
        Path(args.certificates)
        if args.certificates
        else Path(args.transcript).parent / "certificates.json"
    )
    if not cert_path.exists():
        raise VerificationFailed(f"certificates not found at {cert_path}")
    with open(cert_path) as fh:
        stage_certs = json.load(fh)
    final = transcript.final_ball
    c_value = float(run["constants"]["c_value"])
    rho_f = float(final.radius)
    max_k = max((k for c in stage_certs for k in c["ks"]), default=-1)
    scan = escape_inf(final.center, system, max_k + 1) if max_k >= 0 else None
    rows = []
    for cert in stage_certs:
        for k, t_k in zip(cert["ks"], cert["t_values"]):
            bound = c_value - float(t_k) * rho_f
            dist = scan.rows[k][1]
            rows.append(
                {
                    "stage": cert["stage"],
                    "k": k,
                    "distance": dist,
                    "bound": bound,
                    "ok": bool(dist >= bound),
                }
            )
    payload = {
        "escape_scan": scan.to_json_dict() if scan else None,
        "certified_rows": rows,
        "all_ok": all(r["ok"] for r in rows),
    }
    if not payload["all_ok"]:
        bad = [r for r in rows if not r["ok"]]
        raise VerificationFailed(
            f"{len(bad)} certified index(es) violate the protected distance; "
            f"first: k={bad[0]['k']} distance={bad[0]['distance']} "
            f"bound={bad[0]['bound']}"
        )
    return payload


def cmd_verify(args) -> int:
    t_path = Path(args.transcript)
    if not t_path.exists():
        raise ConfigError(f"transcript not found: {t_path}")
    transcript = GameTranscript.from_json(t_path.read_text())
    out = _out_dir(args.out) if args.out else t_path.parent
    run = None
    run_path = t_path.parent / "run.json"
    if run_path.exists():
        with open(run_path) as fh:
            run = json.load(fh)
    payload: dict = {"transcript": t_path.name, "qmax": args.qmax}
    problems = revalidate(transcript)
    payload["revalidation_discrepancies"] = problems
    if problems:
        _write_json(out / "verify.json", payload)
        raise VerificationFailed(
            f"replay disagrees with the recorded verdicts: {problems[:3]}"
        )
    if transcript.final_ball is None:
        raise VerificationFailed("transcript has no final ball")
    game = run["game"] if run else (
        "bad0" if transcript.params.variant == "hyperplane_absolute" else "escape"
    )
    if game == "bad0":
        payload.update(_verify_bad0(transcript, run, args, out))
    else:
        payload.update(_verify_escape(transcript, run, args, out))
    _write_json(out / "verify.json", payload)
    print(f"verification passed  artifacts: {out / 'verify.json'}")
    return 0


def cmd_report(args) -> int:
    written = render_report(Path(args.dir))
    for path in written:
        print(path)
    return 0


# ---------------------------------------------------------------------------
# Parser and entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sg",
        description="Play Schmidt-style games, verify outputs, emit reports.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    for name in ("play-escape", "play-bad0", "validate-system"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON config file")
        p.add_argument("--seed", type=int, default=0, help="master 64-bit seed")
        p.add_argument(
            "--out",
            required=(name != "validate-system"),
            default=None,
            help="artifact directory",
        )

    p = sub.add_parser("fractal")
    p.add_argument("--ifs", required=True, help="builtin name or JSON file")
    p.add_argument("--depth", type=int, default=8)
    p.add_argument("--emit-points", action="store_true")
    p.add_argument("--out", default=".")

    p = sub.add_parser("verify")
    p.add_argument("--transcript", required=True)
    p.add_argument("--qmax", type=int, default=10_000)
    p.add_argument("--certificates", default=None)
    p.add_argument("--out", default=None)

    p = sub.add_parser("report")
    p.add_argument("--dir", required=True)

    return parser


_HANDLERS = {
    "play-escape": cmd_play_escape,
    "play-bad0": cmd_play_bad0,
    "validate-system": cmd_validate_system,
    "fractal": cmd_fractal,
    "verify": cmd_verify,
    "report": cmd_report,
}


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    out = Path(args.out) if getattr(args, "out", None) else None
    if out is None and getattr(args, "dir", None):
        out = Path(args.dir)
    try:
        return _HANDLERS[args.command](args)
    except ConfigError as e:
        _emit_error(out, "ConfigError", str(e))
        return 2
    except VerificationFailed as e:
        _emit_error(out, "VerificationFailed", str(e))
        return 3
    except Exception as e:  # noqa: BLE001 — boundary: report, don't crash
        _emit_error(out, type(e).__name__, str(e))
        return 3


if __name__ == "__main__":
    sys.exit(main())
