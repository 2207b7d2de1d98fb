"""Command line interface: ``trih check|chow|hcoh|ih|verify <file>``.

Input files are JSON objects::

    {"rank": 2,
     "rays": [[1, 0], [0, 1], [-1, -1]],
     "cones": [[0], [1], [2]],
     "weights": {"0": 1, "1": 1, "2": 1}}

``weights`` maps the position of a maximal cone in ``cones`` (as a string) to
a positive integer; missing weights default to 1.  A path of the form
``example:NAME`` loads one of the bundled examples.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from dataclasses import dataclass
from importlib import resources
from typing import Any

from .chow import ChowError, ch_group, pairing_and_num, predicted_ih
from .compactified import (
    CompactifiedCellComplex,
    canonical_compactification,
    is_regular_at_infinity,
    product_complex,
)
from .fans import FanError, TropicalFanCycle, build_fan, is_balanced, make_cycle
from .ihomology import (
    STRUCTURES,
    CheckResult,
    ComplexError,
    DimensionTable,
    hcoh_table,
    ih_table,
    verify_duality,
    verify_kunneth,
    verify_subdivision,
    verify_theorem61,
)
from .qlinalg import is_unimodular

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2
ALLOWED_KEYS = {"rank", "rays", "cones", "weights"}


class InputError(ValueError):
    """Malformed input: exit status 2."""


# ---------------------------------------------------------------------------
# file format


@dataclass(frozen=True)
class FanCycleFile:
    rank: int
    rays: tuple[tuple[int, ...], ...]
    cones: tuple[tuple[int, ...], ...]
    weights: tuple[tuple[str, int], ...]

    def to_json(self) -> dict:
        return {
            "rank": self.rank,
            "rays": [list(r) for r in self.rays],
            "cones": [list(c) for c in self.cones],
            "weights": dict(self.weights),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True) + "\n"

    def weight_map(self) -> dict:
        w = dict(self.weights)
        return {frozenset(c): w.get(str(i), 1) for i, c in enumerate(self.cones)}


def _int(x: Any, what: str) -> int:
    if isinstance(x, bool) or not isinstance(x, int):
        raise InputError(f"{what} must be an integer, got {x!r}")
    return x


def parse_cycle_file(text: str) -> FanCycleFile:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise InputError(f"malformed JSON: {e}") from None
    if not isinstance(data, dict):
        raise InputError("top level must be a JSON object")
    extra = sorted(set(data) - ALLOWED_KEYS)
    if extra:
        raise InputError(f"unknown keys: {extra}")
    for k in ("rank", "rays", "cones"):
        if k not in data:
            raise InputError(f"missing key {k!r}")
    rank = _int(data["rank"], "rank")
    if rank < 0:
        raise InputError("rank must be nonnegative")
    if not isinstance(data["rays"], list):
        raise InputError("rays must be a list")
    rays = []
    for i, r in enumerate(data["rays"]):
        if not isinstance(r, list):
            raise InputError(f"ray {i} must be a list of integers")
        rays.append(tuple(_int(x, f"ray {i} entry") for x in r))
    if not isinstance(data["cones"], list):
        raise InputError("cones must be a list")
    cones = []
    for i, c in enumerate(data["cones"]):
        if not isinstance(c, list):
            raise InputError(f"cone {i} must be a list of ray indices")
        cones.append(tuple(_int(x, f"cone {i} entry") for x in c))
    weights = data.get("weights", {})
    if not isinstance(weights, dict):
        raise InputError("weights must be an object")
    items = []
    for k, v in weights.items():
        if not k.isdigit() or int(k) >= len(cones):
            raise InputError(f"weight key {k!r} is not a cone position")
        items.append((str(int(k)), _int(v, f"weight {k}")))
    return FanCycleFile(rank, tuple(rays), tuple(cones), tuple(sorted(items, key=lambda kv: int(kv[0]))))


def example_names() -> list[str]:
    base = resources.files("trih") / "data"
    return sorted(p.name[:-5] for p in base.iterdir() if p.name.endswith(".json"))


def read_input(path: str) -> str:
    if path.startswith("example:"):
        name = path[len("example:"):]
        res = resources.files("trih") / "data" / f"{name}.json"
        if not res.is_file():
            raise InputError(f"no bundled example {name!r}; available: {example_names()}")
        return res.read_text()
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as e:
        raise InputError(f"cannot read {path}: {e.strerror}") from None


def digest(text: str) -> str:
    return "sha256:" + hashlib.sha256(text.encode()).hexdigest()


# ---------------------------------------------------------------------------
# validation


def input_checks(spec: FanCycleFile, geometric: bool = False) -> tuple[list[CheckResult], CompactifiedCellComplex | None]:
    checks = []
    nrays = len(spec.rays)
    bad = [list(c) for c in spec.cones
           if all(0 <= i < nrays for i in c) and c
           and not is_unimodular([spec.rays[i] for i in sorted(set(c))])]
    checks.append(CheckResult("unimodular", not bad,
                              "every cone is unimodular" if not bad else f"not unimodular: {bad}"))
    try:
        fan = build_fan(spec.rank, spec.rays, spec.cones, geometric=geometric)
    except FanError as e:
        checks.append(CheckResult("fan", False, str(e)))
        return checks, None
    checks.append(CheckResult("fan", True, f"{len(fan.rays)} rays, {len(fan.maximal)} maximal cones"))
    pure = fan.is_pure()
    checks.append(CheckResult("pure", pure, f"pure of dimension {fan.dim}" if pure else "maximal cones differ in dimension"))
    if not pure:
        return checks, None
    try:
        cyc = make_cycle(fan, spec.weight_map(), check_balanced=False)
    except FanError as e:
        checks.append(CheckResult("weights", False, str(e)))
        return checks, None
    ok, where = is_balanced(cyc)
    checks.append(CheckResult(
        "balancing", ok,
        "balanced at every codimension-one cone" if ok
        else "balancing violated at " + ", ".join(str(sorted(q)) if q else "the origin" for q in where)))
    if not ok:
        return checks, None
    x = compactify(cyc)
    reg = is_regular_at_infinity(x)
    checks.append(CheckResult("regular_at_infinity", reg,
                              "closure is regular at infinity" if reg else "closure is not regular at infinity"))
    return checks, x if reg else None


def compactify(cyc: TropicalFanCycle) -> CompactifiedCellComplex:
    return canonical_compactification(cyc)


def load(path: str, geometric: bool, max_dim: int) -> tuple[str, FanCycleFile, list[CheckResult], CompactifiedCellComplex | None]:
    text = read_input(path)
    spec = parse_cycle_file(text)
    if spec.rank > max_dim:
        raise InputError(f"lattice rank {spec.rank} exceeds --max-dim {max_dim}")
    checks, x = input_checks(spec, geometric)
    return text, spec, checks, x


# ---------------------------------------------------------------------------
# commands


def _report(command: str, text: str, tables: dict, checks: list[CheckResult], **extra) -> dict:
    out = {
        "command": command,
        "input_digest": digest(text),
        "tables": tables,
        "checks": [c.to_json() for c in checks],
    }
    out.update(extra)
    return out


def run(args: argparse.Namespace) -> tuple[dict, list[str]]:
    text, spec, checks, x = load(args.file, args.geometric, args.max_dim)
    cmd = args.command
    if x is None or cmd == "check":
        return _report(cmd, text, {}, checks), []
    cyc = x.cycle
    pretty: list[str] = []
    tables: dict = {}
    extra: dict = {}
    if cmd == "ih":
        t = ih_table(x, args.structure or "barycentric")
        tables["ih"] = t.to_json()
        pretty.append("IH\n" + t.pretty())
    elif cmd == "hcoh":
        t = hcoh_table(x, args.structure or "native")
        tables["hcoh"] = t.to_json()
        pretty.append("H\n" + t.pretty())
    elif cmd == "chow":
        fan = cyc.fan
        d = cyc.d
        dims = DimensionTable.from_dict(d, {(p, p): ch_group(fan, p).dim for p in range(d + 1)})
        pairs = [pairing_and_num(fan, cyc, p) for p in range(d + 1)]
        pred = predicted_ih(fan, cyc)
        tables["ch"] = dims.to_json()
        tables["ch_num"] = pred.to_json()
        extra["pairings"] = [pd.to_json() for pd in pairs]
        pretty.append("CH\n" + dims.pretty())
        pretty.append("CH/Num\n" + pred.pretty())
        for pd in pairs:
            rows = "\n".join("  " + " ".join(f"{str(v):>5}" for v in r) for r in pd.matrix.to_lists())
            pretty.append(f"pairing p={pd.p} rank {pd.rank}, dim Num {pd.num_dim}\n{rows}")
    elif cmd == "verify":
        picks = {k for k in ("theorem61", "duality", "subdivision") if getattr(args, k) or args.all}
        if not picks and not args.kunneth:
            picks = {"theorem61", "duality", "subdivision"}
        if "theorem61" in picks:
            checks.append(verify_theorem61(x))
        if "duality" in picks:
            checks.append(verify_duality(x))
        if "subdivision" in picks:
            checks.append(verify_subdivision(x))
        if args.kunneth:
            other_text, _, other_checks, other = load(args.kunneth, args.geometric, args.max_dim)
            if other is None:
                checks.extend(CheckResult("other:" + c.name, c.passed, c.details) for c in other_checks)
            else:
                checks.append(verify_kunneth(x, other, product_complex(x, other)))
                extra["other_digest"] = digest(other_text)
    return _report(cmd, text, tables, checks, **extra), pretty


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="trih", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("file", help="cycle JSON file or example:NAME")
        p.add_argument("--geometric", action="store_true", help="also check that cones meet properly in R^n")
        p.add_argument("--pretty", action="store_true", help="human readable output instead of JSON")
        p.add_argument("--max-dim", type=int, default=4, help="refuse lattices of larger rank (default 4)")

    common(sub.add_parser("check", help="validate a cycle file"))
    common(sub.add_parser("chow", help="Chow groups, pairings and numerical equivalence"))
    for name, helptext in (("hcoh", "tropical cohomology table"), ("ih", "intersection homology table")):
        p = sub.add_parser(name, help=helptext)
        common(p)
        p.add_argument("--structure", choices=STRUCTURES, default=None)
    p = sub.add_parser("verify", help="structural checks on the tables")
    common(p)
    p.add_argument("--all", action="store_true")
    p.add_argument("--theorem61", action="store_true", help="IH against CH/Num")
    p.add_argument("--duality", action="store_true")
    p.add_argument("--subdivision", action="store_true", help="native against barycentric cells")
    p.add_argument("--kunneth", metavar="OTHER", help="compare the product with the convolution")
    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        report, pretty = run(args)
    except InputError as e:
        print(f"trih: input error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except (ComplexError, ChowError, FanError) as e:
        print(f"trih: {e}", file=sys.stderr)
        return EXIT_FAIL
    failed = [c for c in report["checks"] if c["status"] == "fail"]
    if args.pretty:
        lines = "\n".join(f"{c['name']:<20} {c['status']:<5} {c['details']}" for c in report["checks"])
        print("\n\n".join([lines] + pretty))
    else:
        sys.stdout.write(json.dumps(report, sort_keys=True, indent=2) + "\n")
    for c in failed:
        print(f"trih: check {c['name']} failed: {c['details']}", file=sys.stderr)
    return EXIT_FAIL if failed else EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
