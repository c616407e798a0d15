"""Hand-written transcript checker, independent of the engine's referee.

Works directly on the transcript's JSON dictionary form and re-derives every
rule from scratch: opening freedom, radius ratios, nesting, slab counts, and
avoidance counts.  Comparisons are slightly lenient (relative margin 1e-20)
so that only clear violations are flagged; the engine's own tolerance is far
tighter, hence anything flagged here must also be flagged there.
"""

from fractions import Fraction
from math import ceil

from mpmath import mpf

MARGIN = mpf("1e-20")


def _ball(d):
    return [mpf(c) for c in d["center"]], mpf(d["radius"])


def _dist(a, b):
    return sum((x - y) ** 2 for x, y in zip(a, b)) ** mpf("0.5")


def _slab_dist(point, slab):
    normal = [mpf(x) for x in slab["normal"]]
    offset = mpf(slab["offset"])
    norm = sum(x * x for x in normal) ** mpf("0.5")
    return abs(sum(p * n for p, n in zip(point, normal)) - offset) / norm


def _required(variant, p, n_slabs):
    if variant == "hyperplane_absolute":
        return 1
    need = Fraction(p) * n_slabs
    return ceil(need)


def check_transcript(doc: dict) -> list[str]:
    """All rule violations in a recorded transcript (empty list = clean)."""
    params = doc["params"]
    variant = params["variant"]
    beta = mpf(params["beta"])
    alpha = mpf(params["alpha"]) if params.get("alpha") else None
    p = params.get("p")
    dim = int(params["dimension"])

    violations = []
    current = None  # bob's latest ball (center list, radius)
    last_slabs = None
    last_alice_ball = None

    for idx, turn in enumerate(doc["turns"]):
        if turn["verdict"] != "legal":
            break  # past the first illegal move nothing more is recorded
        if turn["player"] == "bob":
            center, radius = _ball(turn["ball"])
            if len(center) != dim:
                violations.append(f"turn {idx}: bob ball dimension")
            if current is not None:
                c_center, c_radius = current
                if variant == "schmidt":
                    a_center, a_radius = last_alice_ball
                    if abs(radius - beta * a_radius) > MARGIN * a_radius:
                        violations.append(f"turn {idx}: bob radius ratio")
                    if _dist(a_center, center) + radius > a_radius * (1 + MARGIN):
                        violations.append(f"turn {idx}: bob nesting")
                else:
                    if radius < beta * c_radius * (1 - MARGIN):
                        violations.append(f"turn {idx}: bob radius ratio")
                    if _dist(c_center, center) + radius > c_radius * (1 + MARGIN):
                        violations.append(f"turn {idx}: bob nesting")
                    if last_slabs is None:
                        violations.append(f"turn {idx}: bob moved twice")
                    else:
                        avoided = sum(
                            1
                            for s in last_slabs
                            if _slab_dist(center, s)
                            > mpf(s["epsilon"]) + radius + MARGIN
                        )
                        if avoided < _required(variant, p, len(last_slabs)):
                            violations.append(f"turn {idx}: avoidance count")
            current = (center, radius)
            last_slabs = None
        else:
            if current is None:
                violations.append(f"turn {idx}: alice before bob")
                continue
            c_center, c_radius = current
            if variant == "schmidt":
                a_center, a_radius = _ball(turn["ball"])
                last_alice_ball = (a_center, a_radius)
                if abs(a_radius - alpha * c_radius) > MARGIN * c_radius:
                    violations.append(f"turn {idx}: alice radius ratio")
                if _dist(c_center, a_center) + a_radius > c_radius * (1 + MARGIN):
                    violations.append(f"turn {idx}: alice nesting")
                continue
            slabs = turn.get("slabs") or []
            if not slabs:
                violations.append(f"turn {idx}: alice submitted no slab")
            if variant == "hyperplane_absolute" and len(slabs) != 1:
                violations.append(f"turn {idx}: alice slab count")
            for s in slabs:
                if len(s["normal"]) != dim:
                    violations.append(f"turn {idx}: slab dimension")
                if mpf(s["epsilon"]) > beta * c_radius * (1 + MARGIN):
                    violations.append(f"turn {idx}: slab thickness")
            last_slabs = slabs
    return violations
