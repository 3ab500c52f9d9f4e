"""Command-line front end.

Every subcommand prints ``key=value`` lines.  Exit status is 0 on success,
1 when an algorithm fails (no relation, budget exhausted, verification
failed) and 2 on usage errors.  Randomness comes from ``--seed``, then the
ISOQ_SEED environment variable, then OS entropy (the seed used is printed).
"""

from __future__ import annotations

import argparse
import os
import random
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import attack as atk
from . import classgroup as cg
from . import curves as cv
from . import relations as rel
from . import sieve as sv

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

INSTANCE_KEYS = ("p", "A0", "B0", "A1", "B1", "delta", "planted")
REQUIRED_KEYS = ("p", "A0", "B0", "A1", "B1")


class UsageError(ValueError):
    pass


# -- instance files -------------------------------------------------------------


def parse_form(text: str, delta: int | None = None) -> cg.QuadForm:
    parts = text.strip().strip("()").split(",")
    if len(parts) not in (2, 3):
        raise UsageError(f"expected a form (a,b,c) or (a,b), got {text!r}")
    try:
        nums = [int(x, 10) for x in parts]
    except ValueError as exc:
        raise UsageError(f"non-integer form coefficient in {text!r}") from exc
    if len(nums) == 2:
        if delta is None:
            raise UsageError("a two-coefficient form needs a discriminant")
        return cg.form_from_ab(nums[0], nums[1], delta)
    f = cg.QuadForm(*nums)
    if delta is not None and f.delta != delta:
        raise UsageError(f"form {f} has discriminant {f.delta}, expected {delta}")
    return f


def read_instance_file(path: str | Path) -> tuple[atk.Instance, atk.Quotient | None]:
    values: dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if not sep:
            raise UsageError(f"line {lineno}: expected key=value")
        if key not in INSTANCE_KEYS:
            raise UsageError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise UsageError(f"line {lineno}: duplicate key {key!r}")
        values[key] = val
    missing = [k for k in REQUIRED_KEYS if k not in values]
    if missing:
        raise UsageError(f"missing keys: {', '.join(missing)}")
    try:
        ints = {k: int(values[k], 10) for k in REQUIRED_KEYS + ("delta",) if k in values}
    except ValueError as exc:
        raise UsageError(f"non-integer value: {exc}") from exc
    try:
        p = ints["p"]
        E0 = cv.Curve(p, ints["A0"], ints["B0"])
        E1 = cv.Curve(p, ints["A1"], ints["B1"])
        inst = atk.Instance.from_curves(E0, E1, ints.get("delta"))
    except (cv.CurveError, atk.InstanceError) as exc:
        raise UsageError(str(exc)) from exc
    planted = None
    if "planted" in values:
        planted = atk.Quotient(parse_form(values["planted"], inst.delta))
    return inst, planted


def format_instance_file(inst: atk.Instance, planted: atk.Quotient | None = None) -> str:
    lines = [
        f"p={inst.p}",
        f"A0={inst.E0.A}",
        f"B0={inst.E0.B}",
        f"A1={inst.E1.A}",
        f"B1={inst.E1.B}",
        f"delta={inst.delta}",
    ]
    if planted is not None:
        lines.append(f"planted={planted.cls}")
    return "\n".join(lines) + "\n"


# -- helpers ----------------------------------------------------------------------


def _emit(key: str, value) -> None:
    if isinstance(value, bool):
        value = str(value).lower()
    print(f"{key}={value}")


def _ints(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x, 10) for x in text.split(","))
    except ValueError as exc:
        raise UsageError(f"expected comma-separated integers, got {text!r}") from exc


def _seed(args) -> random.Random:
    if args.seed is not None:
        seed, source = args.seed, "flag"
    elif os.environ.get("ISOQ_SEED"):
        try:
            seed, source = int(os.environ["ISOQ_SEED"], 10), "env"
        except ValueError as exc:
            raise UsageError("ISOQ_SEED must be an integer") from exc
    else:
        seed, source = random.SystemRandom().randrange(2**63), "entropy"
    _emit("seed", seed)
    if source != "flag":
        _emit("seed_source", source)
    return random.Random(seed)


# -- subcommands ----------------------------------------------------------------


def cmd_classgroup(args) -> int:
    G = cg.enumerate_class_group(args.disc)
    _emit("delta", G.delta)
    _emit("h", G.class_number)
    _emit("structure", G.structure())
    for g, n in zip(G.generators, G.orders):
        _emit("generator", f"{g} order={n}")
    for f in G.elements:
        _emit("form", f)
    return EXIT_OK


def _relation_trial(job):
    disc, q, n, bound, target, t, seed = job
    fb = _relation_base(disc, q, n, bound)
    return rel.find_relation(fb, target, t, random.Random(seed))


def _relation_base(disc, q, n, bound):
    if bound is None:
        return rel.generating_factor_base(disc, q, n)
    return rel.build_factor_base(disc, q, n, bound=bound)


def cmd_relation(args) -> int:
    rng = _seed(args)
    h = cg.class_number(args.disc)
    fb = _relation_base(args.disc, args.q, args.n, args.bound)
    if args.target:
        target = cg.reduce(parse_form(args.target, args.disc))
    else:
        target = rng.choice(cg.reduced_forms(args.disc))
    t = args.t if args.t is not None else cv.default_walk_length(args.disc, h)
    _emit("delta", args.disc)
    _emit("factor_base", ",".join(map(str, fb.ells())))
    _emit("target", target)
    _emit("t", t)
    jobs = [(args.disc, args.q, args.n, args.bound, target, t, rng.randrange(2**63)) for _ in range(args.trials)]
    if args.jobs > 1:
        with ProcessPoolExecutor(args.jobs) as pool:
            found = list(pool.map(_relation_trial, jobs))
    else:
        found = [_relation_trial(j) for j in jobs]
    r = next((x for x in found if x is not None), None)
    _emit("found", f"{sum(x is not None for x in found)}/{args.trials}")
    if r is None:
        _emit("status", "no-relation")
        return EXIT_FAIL
    ok = rel.evaluate(fb, r.z) == target
    _emit("z", ",".join(map(str, r.z)))
    _emit("l1", r.l1)
    _emit("l1_bound", f"{rel.relation_norm_bound(args.disc, t):.4f}")
    _emit("recomposes", ok)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_star(args) -> int:
    rng = _seed(args)
    ctx = cv.point_count(cv.Curve(args.p, args.A, args.B))
    cls = cg.reduce(parse_form(args.cls, ctx.delta))
    fb = cv.factor_base_for(ctx)
    out = cv.star_curve(ctx, cls, fb, rng=rng)
    _emit("delta", ctx.delta)
    _emit("n", ctx.n)
    _emit("t", ctx.t)
    _emit("class", cls)
    _emit("j_in", ctx.j)
    _emit("j_out", out.j)
    _emit("curve_out", f"A={out.curve.A},B={out.curve.B}")
    return EXIT_OK


def cmd_mixing(args) -> int:
    rng = _seed(args)
    h = cg.class_number(args.disc)
    if args.bound is None:
        fb = rel.mixing_factor_base(args.disc)
    else:
        fb = rel.build_factor_base(args.disc, 1, 1, bound=args.bound)
    _emit("delta", args.disc)
    _emit("h", h)
    _emit("t", args.t)
    _emit("trials", args.trials)
    _emit("factor_base", ",".join(map(str, fb.ells())))
    worst = 1.0
    for f in cg.reduced_forms(args.disc):
        freq = rel.mixing_probability(args.disc, fb, args.t, [f], args.trials, rng)
        worst = min(worst, freq)
        _emit("freq", f"{f} {freq:.5f}")
    _emit("min_freq", f"{worst:.5f}")
    _emit("half_uniform", f"{0.5 / h:.5f}")
    return EXIT_OK


def cmd_gen_instance(args) -> int:
    rng = _seed(args)
    inst, planted = atk.generate_instance(args.p_min, args.p_max, args.h_min, rng, h_max=args.h_max)
    text = format_instance_file(inst, planted)
    if args.out:
        Path(args.out).write_text(text)
        _emit("written", args.out)
    for line in text.splitlines():
        print(line)
    _emit("h", cg.class_number(inst.delta))
    return EXIT_OK


def cmd_attack(args) -> int:
    rng = _seed(args)
    inst, planted = read_instance_file(args.inp)
    config = atk.AttackConfig(budget=args.budget, retries=args.retries)
    q = atk.run_attack(inst, config, rng)
    _emit("delta", inst.delta)
    _emit("h", cg.class_number(inst.delta))
    _emit("quotient", q)
    # independent second evaluation with its own stream
    _emit("verify", atk.verify_quotient(inst, q, rng=random.Random(rng.random())))
    if planted is not None:
        _emit("planted_match", q == planted)
    return EXIT_OK


def cmd_sieve_demo(args) -> int:
    rng = _seed(args)
    G = sv.AbelianGroup(_ints(args.group))
    secret = G.normalize(_ints(args.secret)) if args.secret else G.random_element(rng)
    if args.mode == "cheat":
        oracle = sv.ShiftOracle.cheat(G, secret, random.Random(rng.random()))
    else:
        # a random injective f0 and its shift by the secret
        elems = list(G.elements())
        labels = list(range(len(elems)))
        rng.shuffle(labels)
        table = dict(zip(elems, labels))
        oracle = sv.ShiftOracle.honest(G, table.__getitem__, lambda x: table[G.add(x, secret)], random.Random(rng.random()))
    stats = sv.SieveStats()
    s = sv.solve_hidden_shift(oracle, rng, args.budget, retries=args.retries, stats=stats)
    _emit("group", G)
    _emit("mode", args.mode)
    _emit("s", ",".join(map(str, s)))
    _emit("samples", oracle.samples)
    _emit("combinations", sum(stats.combined.values()))
    _emit("verified", oracle.verify(s))
    return EXIT_OK


def _print_schedule(name: str, sc: sv.SieveSchedule) -> None:
    _emit(f"{name}.k", sc.k)
    _emit(f"{name}.m", sc.m)
    _emit(f"{name}.rho", f"{sc.rho:.6f}")
    _emit(f"{name}.formula_defined", sc.formula_defined)
    for i, b in enumerate(sc.bounds):
        deg = "" if i == 0 else f" degraded={str(sc.stages[i - 1].degraded).lower()}"
        _emit(f"{name}.B{i}", f"{b}{deg}")


def cmd_schedule(args) -> int:
    if args.N < 2:
        raise UsageError("N must be at least 2")
    _emit("N", args.N)
    if args.kind in ("d", "both"):
        _print_schedule("smaller_labels", sv.schedule_smaller_labels(args.N, args.k, args.m))
    if args.kind in ("z", "both"):
        _print_schedule("zero_components", sv.schedule_zero_components(args.N, args.k, args.m))
    return EXIT_OK


# -- parser ---------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="RNG seed (falls back to ISOQ_SEED)")

    p = argparse.ArgumentParser(prog="isoq", description="Isogeny group-action toolkit and hidden-shift sieve simulator")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("classgroup", parents=[common], help="enumerate Cl(delta)")
    s.add_argument("--disc", type=int, required=True)
    s.set_defaults(func=cmd_classgroup)

    s = sub.add_parser("relation", parents=[common], help="express a class over a factor base")
    s.add_argument("--disc", type=int, required=True)
    s.add_argument("--target", help="reduced form (a,b,c); random class if omitted")
    s.add_argument("--t", type=int, default=None, help="walk length")
    s.add_argument("--bound", type=int, default=None, help="factor base bound")
    s.add_argument("--q", type=int, default=1, help="field size excluded from the base")
    s.add_argument("--n", type=int, default=1, help="curve order excluded from the base")
    s.add_argument("--trials", type=int, default=1, help="independent relation searches")
    s.add_argument("--jobs", type=int, default=1, help="worker processes for the searches")
    s.set_defaults(func=cmd_relation)

    s = sub.add_parser("star", parents=[common], help="apply an ideal class to a curve")
    s.add_argument("--p", type=int, required=True)
    s.add_argument("--A", type=int, required=True)
    s.add_argument("--B", type=int, required=True)
    s.add_argument("--class", dest="cls", required=True, help="form (a,b,c) or (a,b)")
    s.set_defaults(func=cmd_star)

    s = sub.add_parser("mixing", parents=[common], help="empirical walk landing frequencies")
    s.add_argument("--disc", type=int, required=True)
    s.add_argument("--t", type=int, required=True)
    s.add_argument("--trials", type=int, default=10_000)
    s.add_argument("--bound", type=int, default=None)
    s.set_defaults(func=cmd_mixing)

    s = sub.add_parser("gen-instance", parents=[common], help="generate a planted instance")
    s.add_argument("--p-min", type=int, default=5)
    s.add_argument("--p-max", type=int, default=500)
    s.add_argument("--h-min", type=int, default=2)
    s.add_argument("--h-max", type=int, default=None)
    s.add_argument("--out", help="write the instance file here")
    s.set_defaults(func=cmd_gen_instance)

    s = sub.add_parser("attack", parents=[common], help="recover the quotient of an instance file")
    s.add_argument("--in", dest="inp", required=True)
    s.add_argument("--budget", type=int, default=200_000)
    s.add_argument("--retries", type=int, default=16)
    s.set_defaults(func=cmd_attack)

    s = sub.add_parser("sieve-demo", parents=[common], help="solve a hidden shift on a small group")
    s.add_argument("--group", required=True, help="moduli, e.g. 15 or 3,4")
    s.add_argument("--secret", help="shift, e.g. 11 or 2,3; random if omitted")
    s.add_argument("--mode", choices=("cheat", "honest"), default="cheat")
    s.add_argument("--budget", type=int, default=200_000)
    s.add_argument("--retries", type=int, default=16)
    s.set_defaults(func=cmd_sieve_demo)

    s = sub.add_parser("schedule", parents=[common], help="print sieve schedules for N")
    s.add_argument("--N", type=int, required=True)
    s.add_argument("--kind", choices=("d", "z", "both"), default="both")
    s.add_argument("--k", type=int, default=None)
    s.add_argument("--m", type=int, default=None)
    s.set_defaults(func=cmd_schedule)
    return p


FAILURES = (
    rel.EmptyFactorBase,
    cv.RelationNotFound,
    atk.AttackError,
    atk.InstanceError,
    sv.SieveFailure,
    sv.HiddenShiftError,
)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FAILURES as exc:
        _emit("status", "failed")
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (cg.FormError, cv.CurveError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
