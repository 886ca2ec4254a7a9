"""Command-line interface: ``wreathgen <command> [options]``.

Every command prints one JSON document (or a flat table) on standard output.
Exit codes: 0 ok, 2 input error, 3 cap exceeded or constant missing,
4 internal invariant violation.
"""

from __future__ import annotations

import argparse
import json
import subprocess
import sys
from dataclasses import dataclass
from pathlib import Path

from . import __version__, certify, genprob, lattice, permcore, semidirect
from . import fixtures as F
from .bounds import int_str
from .cache import Cache, NoCache, default_dir
from .errors import InputError, InvariantError, WreathgenError
from .finite import as_table
from .permcore import Permutation, PermGroup
from .tower import TowerSpec, build_level, orbit_signatures


@dataclass
class RunConfig:
    degree_cap: int = 10_000
    lattice_cap: int = lattice.DEFAULT_LATTICE_CAP
    tuple_cap: int = genprob.EXHAUSTIVE_CAP
    seed: int = 0
    samples: int = 10**4
    cache_dir: Path | None = None
    use_cache: bool = True
    output: str = "json"
    threads: int = 1

    def __post_init__(self):
        for name in ("degree_cap", "lattice_cap", "tuple_cap", "samples", "threads"):
            if getattr(self, name) < 1:
                raise InputError(f"{name.replace('_', '-')} must be positive")

    def cache(self):
        if not self.use_cache:
            return NoCache()
        return Cache(self.cache_dir or default_dir())


# ---------------------------------------------------------------------------
# input


def load_group(text: str) -> PermGroup:
    """A group from a JSON file, an inline JSON object, or a fixture name such as ``A5``."""
    path = Path(text)
    if text.lstrip().startswith("{"):
        return permcore.group_from_json(text)
    if path.suffix == ".json" or path.exists():
        try:
            raw = path.read_text()
        except OSError as exc:
            raise InputError(f"cannot read group file {text}: {exc.strerror}") from None
        try:
            data = json.loads(raw)
        except ValueError as exc:
            raise InputError(f"group file {text} is not valid JSON: {exc}") from None
        return permcore.group_from_json(data)
    try:
        return F.by_name(text)
    except InputError:
        if "x" not in text.lower():
            raise
    parts = [F.by_name(p) for p in text.lower().split("x")]
    return F.direct_product(*parts, name=text)


def load_semidirect(text: str) -> semidirect.SemidirectSpec:
    try:
        data = json.loads(Path(text).read_text()) if not text.lstrip().startswith("{") else json.loads(text)
        X = _group_value(data["X"])
        omegas = tuple(tuple(int(p) for p in o) for o in data["omegas"])
        B = tuple(_group_value(b) for b in data["B"])
    except OSError as exc:
        raise InputError(f"cannot read {text}: {exc.strerror}") from None
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed semidirect description: {exc}") from None
    return semidirect.SemidirectSpec(X, omegas, B)


def _group_value(value) -> PermGroup:
    if isinstance(value, str):
        return load_group(value)
    return permcore.group_from_json(value)


def parse_override(text: str) -> tuple[str, int]:
    name, sep, value = text.partition("=")
    if not sep or not name.strip():
        raise InputError(f"override must look like NAME=VALUE, got {text!r}")
    try:
        return name.strip(), int(value)
    except ValueError:
        raise InputError(f"override value for {name} is not an integer") from None


def _perms(texts, degree: int) -> list[Permutation]:
    return [Permutation.from_cycles(t, degree) for t in texts]


# ---------------------------------------------------------------------------
# commands


def cmd_decide(args, cfg: RunConfig) -> dict:
    g = load_group(args.group)
    return certify.decide(TowerSpec(g), args.pairs, cfg.seed).to_json()


def cmd_decide_universal(args, cfg: RunConfig) -> dict:
    g = load_group(args.group)
    return certify.decide_universal(g, args.pairs, cfg.seed).to_json()


def cmd_tower(args, cfg: RunConfig) -> dict:
    spec = TowerSpec(load_group(args.group))
    level = build_level(spec, args.level, cfg.degree_cap)
    out = {"schema": "wreathgen.tower/1", "level": args.level, "degree": level.degree,
           "order": int_str(level.order()), "expected_order": int_str(spec.level_order(args.level)),
           "orbit_sizes": [len(o) for o in spec.orbits],
           "orbit_signatures": len(orbit_signatures(spec, args.level))}
    if args.generators:
        out["generators"] = [str(s) for s in level.generators]
    return out


def cmd_pk(args, cfg: RunConfig) -> dict:
    g = load_group(args.group)
    request = {"command": "pk", "group": permcore.group_to_json(g, with_name=False), "k": args.k,
               "mode": args.mode, "samples": cfg.samples if args.mode == "mc" else None,
               "seed": cfg.seed if args.mode == "mc" else None, "version": __version__}

    def compute():
        if args.mode == "mc":
            res = genprob.pk_montecarlo(g, args.k, cfg.samples, cfg.seed, threads=cfg.threads)
        else:
            if args.k < 1:
                raise InputError("k must be positive")
            T = as_table(g)
            if T.n**args.k <= cfg.tuple_cap:
                value = genprob.pk_exact_exhaustive(T, args.k, cfg.tuple_cap)
                method = "exhaustive"
            else:
                value = lattice.pk_exact_mobius(T, args.k, cfg.lattice_cap)
                method = "mobius"
            res = genprob.PkResult(g.name or "G", args.k, "exact", value)
            return {**res.to_json(), "method": method}
        return res.to_json()

    return {"schema": "wreathgen.pk/1", **cfg.cache().cached(request, compute)}


def _projection(Y: PermGroup, args):
    if args.onto == "trivial":
        return genprob.trivial_map(Y)
    if args.onto == "identity":
        return genprob.identity_map(Y)
    if not args.kernel:
        raise InputError("--onto quotient needs at least one --kernel element")
    K = permcore.normal_closure(_perms(args.kernel, Y.degree), Y)
    return genprob.quotient_map(Y, semidirect.subgroup_mask(Y, K))


def cmd_zeta(args, cfg: RunConfig) -> dict:
    Y = load_group(args.group)
    request = {"command": "zeta", "group": permcore.group_to_json(Y, with_name=False), "s": args.s,
               "onto": args.onto, "kernel": sorted(args.kernel or []), "inequality": args.inequality,
               "version": __version__}

    def compute():
        pi = _projection(Y, args)
        out = {"quotient_order": pi.target.n, **genprob.zeta(pi.source, pi, args.s, cfg.lattice_cap).to_json()}
        if args.inequality:
            out["inequality"] = genprob.bhattacharjee_check(pi.source, pi, args.inequality).to_json()
        return out

    return {"schema": "wreathgen.zeta/1", **cfg.cache().cached(request, compute)}


def cmd_maximal(args, cfg: RunConfig) -> dict:
    if args.semidirect:
        spec = load_semidirect(args.semidirect)
        Y = semidirect.SemidirectGroup(spec)
        if args.subgroup:
            m = PermGroup(Y.degree, tuple(_perms(args.subgroup, Y.degree)))
            subgroups = [m]
        else:
            subgroups = [semidirect.table_subgroup(Y.group, c.representative.mask)
                         for c in lattice.maximal_subgroups(Y.group, cfg.lattice_cap)]
        reports = [semidirect.classify_maximal(Y, m) for m in subgroups]
        return {"schema": "wreathgen.maximal/1", "order": int_str(Y.order),
                "classes": [r.to_json() for r in reports if args.subgroup or r.surjects]}
    g = load_group(args.group)
    T = as_table(g)
    classes = []
    for c in lattice.maximal_subgroups(T, cfg.lattice_cap):
        gens = [str(Permutation(T.perms[a].tolist())) for a in T.subgroup_generators(c.representative.mask)]
        classes.append({"index": c.index, "class_size": c.class_size,
                        "order": T.n // c.index, "generators": gens})
    return {"schema": "wreathgen.maximal/1", "order": int_str(T.n), "classes": classes}


def cmd_certify(args, cfg: RunConfig) -> dict:
    g = load_group(args.group)
    spec = TowerSpec(g)
    overrides = dict(parse_override(o) for o in args.override or [])
    if args.crude:
        overrides = {**certify.crude_overrides(spec), **overrides}
    request = {"command": "certify", "group": permcore.group_to_json(g, with_name=False),
               "overrides": {k: int_str(v) for k, v in sorted(overrides.items())},
               "horizon": args.horizon, "seed": cfg.seed, "budget": args.budget,
               "version": __version__}

    def compute():
        cert = certify.certified_k(spec, overrides=overrides, horizon=args.horizon,
                                   seed=cfg.seed, budget=args.budget)
        return cert.to_json()

    return cfg.cache().cached(request, compute)


def acceptance_path() -> Path:
    return Path(__file__).resolve().parents[2] / "tests" / "test_acceptance.py"


def cmd_selftest(args, cfg: RunConfig) -> dict:
    path = acceptance_path()
    if not path.exists():
        raise InputError(f"acceptance suite not found at {path}; run from a source checkout")
    proc = subprocess.run([sys.executable, "-m", "pytest", str(path), "-q", "-s", "-p", "no:cacheprovider"],
                          capture_output=True, text=True, cwd=path.parents[1])
    lines = [ln for ln in proc.stdout.splitlines() if ln.startswith(("PASS ", "FAIL "))]
    sys.stderr.write(proc.stdout[-4000:])
    out = {"schema": "wreathgen.selftest/1", "pytest_exit": proc.returncode, "criteria": lines}
    if proc.returncode != 0:
        raise _SelftestFailed(out)
    return out


class _SelftestFailed(WreathgenError):
    exit_code = 4

    def __init__(self, report: dict):
        self.report = report
        super().__init__("acceptance suite failed")


COMMANDS = {
    "decide": cmd_decide,
    "decide-universal": cmd_decide_universal,
    "tower": cmd_tower,
    "pk": cmd_pk,
    "zeta": cmd_zeta,
    "maximal": cmd_maximal,
    "certify": cmd_certify,
    "selftest": cmd_selftest,
}


# ---------------------------------------------------------------------------
# parser and entry point


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=["json", "table"], default="json", dest="output")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--cache-dir", type=Path, default=None,
                        help="cache directory (default: $WREATHGEN_CACHE_DIR or ~/.cache/wreathgen)")
    common.add_argument("--no-cache", action="store_true")
    common.add_argument("--degree-cap", type=int, default=RunConfig.degree_cap)
    common.add_argument("--lattice-cap", type=int, default=RunConfig.lattice_cap)
    common.add_argument("--tuple-cap", type=int, default=RunConfig.tuple_cap)

    p = argparse.ArgumentParser(prog="wreathgen", description="Finite generation of iterated wreath products.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, metavar="command")

    s = sub.add_parser("decide", parents=[common], help="decide topological finite generation of a tower")
    s.add_argument("--group", required=True)
    s.add_argument("--pairs", type=int, default=1000, help="random pairs used to verify witnesses")

    s = sub.add_parser("decide-universal", parents=[common], help="criterion via the point stabilizer of F")
    s.add_argument("--group", required=True)
    s.add_argument("--pairs", type=int, default=1000)

    s = sub.add_parser("tower", parents=[common], help="build a level of the tower")
    s.add_argument("--group", required=True)
    s.add_argument("--level", type=int, required=True)
    s.add_argument("--generators", action="store_true")

    s = sub.add_parser("pk", parents=[common], help="probability that k random elements generate")
    s.add_argument("--group", required=True)
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--mode", choices=["exact", "mc"], default="exact")
    s.add_argument("--samples", type=int, default=RunConfig.samples)

    s = sub.add_parser("zeta", parents=[common], help="sum over maximal classes surjecting onto a quotient")
    s.add_argument("--group", required=True)
    s.add_argument("--s", type=int, required=True)
    s.add_argument("--onto", choices=["trivial", "identity", "quotient"], default="trivial")
    s.add_argument("--kernel", action="append", help="cycle notation; the kernel is their normal closure")
    s.add_argument("--inequality", type=int, metavar="K", help="also compare p_K of both groups")

    s = sub.add_parser("maximal", parents=[common], help="maximal subgroup classes")
    src = s.add_mutually_exclusive_group(required=True)
    src.add_argument("--group")
    src.add_argument("--semidirect", help="JSON with keys X, omegas, B")
    s.add_argument("--subgroup", action="append", help="generator of a subgroup to classify")

    s = sub.add_parser("certify", parents=[common], help="certified number of generators")
    s.add_argument("--group", required=True)
    s.add_argument("--override", action="append", metavar="NAME=VALUE")
    s.add_argument("--crude", action="store_true", help="fill C7 and K with crude but valid values")
    s.add_argument("--horizon", type=int, default=4)
    s.add_argument("--budget", type=int, default=10**5)

    sub.add_parser("selftest", parents=[common], help="run the acceptance suite")
    return p


def _table(obj, prefix: str = "") -> list[str]:
    if isinstance(obj, dict):
        return [ln for k, v in obj.items() for ln in _table(v, f"{prefix}{k}.")]
    if isinstance(obj, list):
        return [ln for i, v in enumerate(obj) for ln in _table(v, f"{prefix}{i}.")]
    return [f"{prefix[:-1]}\t{obj}"]


def render(obj, output: str) -> str:
    if output == "table":
        return "\n".join(_table(obj))
    return json.dumps(obj, indent=2, sort_keys=True)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = RunConfig(args.degree_cap, args.lattice_cap, args.tuple_cap, args.seed,
                        getattr(args, "samples", RunConfig.samples), args.cache_dir,
                        not args.no_cache, args.output, args.threads)
        result = COMMANDS[args.command](args, cfg)
    except _SelftestFailed as exc:
        print(render(exc.report, args.output))
        return exc.exit_code
    except WreathgenError as exc:
        print(f"wreathgen: {exc}", file=sys.stderr)
        return exc.exit_code
    except RecursionError as exc:
        print(f"wreathgen: internal error: {exc}", file=sys.stderr)
        return InvariantError.exit_code
    print(render(result, args.output))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
