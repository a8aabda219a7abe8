"""Command line front end: run a JSON problem file, emit a canonical report.

Exit codes: 0 success, 1 a law check failed, 2 syntax or reference error,
3 invariant violation, 4 truncation bound exceeded.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from fractions import Fraction
from typing import Any

from . import __version__
from .algebra import (
    Poly,
    PreconditionError,
    SuperPolynomial,
    SuperVectorSpace,
    format_coefficient,
    format_superpoly,
    normalize_word,
    parse_superpoly,
)
from .groups import (
    Distribution,
    PairRepresentation,
    SupergroupPair,
    abelian_pair,
    berezin_pair,
    check_action,
    check_pair,
    check_representation,
    convolution_pairing,
    convolve,
    fiberwise_degree_check,
    group_on_TG,
    heisenberg_pair,
    koszul_build,
    morphism_to_rep,
    odd_square_pair,
    rep_to_morphism,
    test_functions,
    underlying_law_matches,
    verify_group,
)
from .lie import (
    LieSuperalgebra,
    check_lie,
    format_uenv,
    loop_ad_experimental,
    parse_uenv,
    superloop_algebra,
)
from .morphisms import (
    Box,
    DomainError,
    InvariantError,
    SpolMorphism,
    compose,
    compose_oracle,
    identity,
    random_morphism,
)
from .weil import WeilAlgebra, weil_apply

FORMAT_VERSION = "supergeom/1"
MAX_ODD = 16

EXIT_OK, EXIT_LAW, EXIT_REFERENCE, EXIT_INVARIANT, EXIT_TRUNCATION = 0, 1, 2, 3, 4


class ReferenceError_(Exception):
    """Syntax problem or unresolved name (exit code 2)."""


class TruncationError(Exception):
    """A computation would exceed an internal bound (exit code 4)."""


def _exit_code(exc: BaseException) -> int:
    if isinstance(exc, ReferenceError_):
        return EXIT_REFERENCE
    if isinstance(exc, TruncationError):
        return EXIT_TRUNCATION
    if isinstance(exc, (InvariantError, PreconditionError, DomainError)):
        return EXIT_INVARIANT
    raise exc


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------


def _no_duplicates(pairs):
    seen = {}
    for k, v in pairs:
        if k in seen:
            raise ReferenceError_(f"duplicate key {k!r}")
        seen[k] = v
    return seen


def _unique(names, where):
    seen = set()
    for n in names:
        if n in seen:
            raise ReferenceError_(f"{where}: duplicate name {n!r}")
        seen.add(n)


def _rational(value, where: str) -> Fraction:
    if not isinstance(value, str):
        raise ReferenceError_(f"{where}: rationals must be given as 'num/den' strings")
    try:
        return Fraction(value)
    except ValueError:
        raise ReferenceError_(f"{where}: bad rational {value!r}") from None


def _poly(space: SuperVectorSpace, text, where: str) -> SuperPolynomial:
    if not isinstance(text, str):
        raise ReferenceError_(f"{where}: polynomials must be strings")
    try:
        return parse_superpoly(space, text)
    except PreconditionError as exc:
        raise ReferenceError_(f"{where}: {exc}") from None


def _even_poly(names, text, where) -> Poly:
    sp = _poly(SuperVectorSpace(tuple(names), ()), text, where)
    return sp.odd_coefficient(())


class Problem:
    """Validated object graph of a problem file."""

    KINDS = ("spaces", "morphisms", "weil", "lie", "pairs", "representations", "distributions")

    def __init__(self, data: dict):
        if not isinstance(data, dict):
            raise ReferenceError_("top level must be an object")
        if data.get("version") != FORMAT_VERSION:
            raise ReferenceError_(f"unsupported version {data.get('version')!r}")
        unknown = set(data) - set(self.KINDS) - {"version", "commands"}
        if unknown:
            raise ReferenceError_(f"unknown sections {sorted(unknown)}")
        self.raw = data
        self.names: dict[str, str] = {}
        self.spaces: dict[str, SuperVectorSpace] = {}
        self.morphisms: dict[str, SpolMorphism] = {}
        self.weil: dict[str, WeilAlgebra] = {}
        self.lie: dict[str, LieSuperalgebra] = {}
        self.pairs: dict[str, SupergroupPair] = {}
        self.reps: dict[str, PairRepresentation] = {}
        self.dists: dict[str, tuple[str, Distribution]] = {}
        self.groups: dict[str, Any] = {}
        for kind in self.KINDS:
            for name in data.get(kind, {}):
                self._claim(name, kind)
        for name, d in data.get("spaces", {}).items():
            self.spaces[name] = self._space(d, name)
        for name, d in data.get("weil", {}).items():
            self.weil[name] = self._weil(d, name)
        for name, d in data.get("morphisms", {}).items():
            self.morphisms[name] = self._morphism(d, name)
        for name, d in data.get("lie", {}).items():
            self.lie[name] = self._lie(d, name)
        for name, d in data.get("pairs", {}).items():
            self.pairs[name] = self._pair(d, name)
        for name, d in data.get("representations", {}).items():
            self.reps[name] = self._rep(d, name)
        for name, d in data.get("distributions", {}).items():
            self.dists[name] = self._dist(d, name)
        self.commands = data.get("commands", [])
        if not isinstance(self.commands, list):
            raise ReferenceError_("commands must be a list")

    def _claim(self, name: str, kind: str):
        if name in self.names:
            raise ReferenceError_(f"name {name!r} defined twice ({self.names[name]}, {kind})")
        self.names[name] = kind

    def _ref(self, table: dict, name, kind: str):
        if not isinstance(name, str) or name not in table:
            raise ReferenceError_(f"unresolved {kind} reference {name!r}")
        return table[name]

    # definitions -------------------------------------------------------
    def _space(self, d, where) -> SuperVectorSpace:
        if isinstance(d, str):
            return self._ref(self.spaces, d, "space")
        try:
            space = SuperVectorSpace(tuple(d.get("even", [])), tuple(d.get("odd", [])))
        except (PreconditionError, InvariantError, ValueError) as exc:
            raise ReferenceError_(f"{where}: {exc}") from None
        if space.q > MAX_ODD:
            raise TruncationError(f"{where}: more than {MAX_ODD} odd coordinates")
        return space

    def _box(self, space, d, where) -> Box:
        if not d:
            return Box.unbounded(space)
        for n in d:
            if n not in space.even:
                raise ReferenceError_(f"{where}: box bound for unknown even coordinate {n!r}")
        bounds = []
        for n in space.even:
            b = d.get(n)
            bounds.append(None if b is None else (_rational(b[0], where), _rational(b[1], where)))
        return Box(tuple(bounds))

    def _morphism(self, d, where) -> SpolMorphism:
        src = self._space(d.get("source"), where)
        tgt = self._space(d.get("target"), where)
        sbox = self._box(src, d.get("source_box"), where)
        tbox = self._box(tgt, d.get("target_box"), where)
        if "pullbacks" in d:
            pull = {}
            for t, text in d["pullbacks"].items():
                if t not in tgt:
                    raise ReferenceError_(f"{where}: unknown target coordinate {t!r}")
                pull[t] = _poly(src, text, f"{where}.{t}")
            return SpolMorphism.from_pullbacks(src, tgt, pull, sbox, tbox)
        comps = {}
        for word, values in d.get("components", {}).items():
            letters = [w for w in word.split("*") if w] if word else []
            for w in letters:
                if w not in src.odd:
                    raise ReferenceError_(f"{where}: {w!r} is not an odd source coordinate")
            sign, normal = normalize_word(src, letters)
            if not sign:
                continue
            key = tuple(src.index(w) for w in normal)
            vals = comps.setdefault(key, {})
            for t, text in values.items():
                if t not in tgt:
                    raise ReferenceError_(f"{where}: unknown target coordinate {t!r}")
                poly = _even_poly(src.even, text, f"{where}[{word}].{t}") * sign
                vals[t] = vals[t] + poly if t in vals else poly
        return SpolMorphism(src, tgt, comps, sbox, tbox)

    def _weil(self, d, where) -> WeilAlgebra:
        gens = [tuple(g) for g in d.get("generators", [])]
        _unique([g[0] for g in gens], where)
        return WeilAlgebra(gens, d.get("ideal", []))

    def _lie(self, d, where) -> LieSuperalgebra:
        basis = [(b[0], int(b[1])) for b in d.get("basis", [])]
        _unique([b[0] for b in basis], where)
        names = {b[0] for b in basis}
        brackets = {}
        for entry in d.get("brackets", []):
            a, b, value = entry
            for n in [a, b, *value]:
                if n not in names:
                    raise ReferenceError_(f"{where}: unknown basis element {n!r}")
            brackets[(a, b)] = {k: _rational(v, where) for k, v in value.items()}
        return LieSuperalgebra(basis, brackets)

    def _pair(self, d, where) -> SupergroupPair:
        if "builtin" in d:
            kind = d["builtin"]
            if kind == "abelian":
                return abelian_pair(int(d.get("p", 0)), int(d.get("q", 0)))
            if kind == "odd-square":
                return odd_square_pair()
            if kind == "heisenberg":
                return heisenberg_pair()
            raise ReferenceError_(f"{where}: unknown builtin pair {kind!r}")
        g = self._ref(self.lie, d.get("lie"), "lie")
        evens = [n for n, p in zip(g.names, g.parities) if not p]
        law_names = [f"1.{n}" for n in evens] + [f"2.{n}" for n in evens]
        for key in ("law", "inverse"):
            for n in d.get(key, {}):
                if n not in evens:
                    raise ReferenceError_(f"{where}.{key}: unknown even coordinate {n!r}")
        law = {n: _even_poly(law_names, d.get("law", {}).get(n, "0"), f"{where}.law") for n in evens}
        inverse = {n: _even_poly(evens, d.get("inverse", {}).get(n, "0"), f"{where}.inverse") for n in evens}
        ad = {}
        for j, col in d.get("ad", {}).items():
            ad[j] = {k: _even_poly(evens, c, f"{where}.ad") for k, c in col.items()}
            for n in [j, *col]:
                if n not in g.names:
                    raise ReferenceError_(f"{where}.ad: unknown basis element {n!r}")
        return SupergroupPair(g, law, inverse, ad, where)

    def _rep(self, d, where) -> PairRepresentation:
        pair = self._ref(self.pairs, d.get("pair"), "pair")
        V = self._space(d.get("space"), where)
        alpha0 = {}
        for j, col in d.get("alpha0", {}).items():
            alpha0[j] = {k: _even_poly(pair.even, c, f"{where}.alpha0") for k, c in col.items()}
            for n in [j, *col]:
                if n not in V:
                    raise ReferenceError_(f"{where}.alpha0: unknown coordinate {n!r}")
        dalpha = {}
        for x, M in d.get("dalpha", {}).items():
            if x not in pair.g.names:
                raise ReferenceError_(f"{where}.dalpha: unknown basis element {x!r}")
            dalpha[x] = {j: {k: _rational(c, where) for k, c in col.items()} for j, col in M.items()}
            for j, col in M.items():
                for n in [j, *col]:
                    if n not in V:
                        raise ReferenceError_(f"{where}.dalpha: unknown coordinate {n!r}")
        return PairRepresentation(pair, V, alpha0, dalpha)

    def _dist(self, d, where):
        pname = d.get("pair")
        pair = self._ref(self.pairs, pname, "pair")
        base = tuple(_rational(c, where) for c in d.get("base", ["0"] * pair.p))
        if len(base) != pair.p:
            raise ReferenceError_(f"{where}: base point has the wrong dimension")
        try:
            u = parse_uenv(pair.g, d.get("u", "1"))
        except PreconditionError as exc:
            raise ReferenceError_(f"{where}: {exc}") from None
        return pname, Distribution(base, u)

    # lookups used by commands -----------------------------------------
    def group(self, pname: str):
        if pname not in self.groups:
            pair = self._ref(self.pairs, pname, "pair")
            self.groups[pname] = koszul_build(pair)
        return self.groups[pname]


def load_problem(text: str) -> Problem:
    try:
        data = json.loads(text, object_pairs_hook=_no_duplicates)
    except json.JSONDecodeError as exc:
        raise ReferenceError_(f"syntax error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return Problem(data)


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------


def space_to_json(space: SuperVectorSpace) -> dict:
    return {"even": list(space.even), "odd": list(space.odd)}


def _box_to_json(space: SuperVectorSpace, box: Box) -> dict:
    return {
        n: [format_coefficient(b[0]), format_coefficient(b[1])]
        for n, b in zip(space.even, box.bounds)
        if b is not None
    }


def morphism_to_json(f: SpolMorphism) -> dict:
    out = {
        "source": space_to_json(f.source),
        "target": space_to_json(f.target),
        "pullbacks": {n: format_superpoly(sp) for n, sp in f.pullbacks().items()},
    }
    if not f.source_box.is_unbounded():
        out["source_box"] = _box_to_json(f.source, f.source_box)
    if not f.target_box.is_unbounded():
        out["target_box"] = _box_to_json(f.target, f.target_box)
    return out


def components_to_json(f: SpolMorphism) -> dict:
    even = SuperVectorSpace(f.source.even, ())
    out = {}
    for odd in sorted(f.components, key=lambda k: (len(k), k)):
        word = "*".join(f.source.odd[j] for j in odd)
        out[word] = {
            t: format_superpoly(SuperPolynomial.from_poly(even, p)) for t, p in sorted(f.components[odd].items())
        }
    return out


def lie_to_json(g: LieSuperalgebra) -> dict:
    brackets = []
    for (i, j) in sorted(g.table):
        brackets.append([g.names[i], g.names[j], {g.names[k]: format_coefficient(c) for k, c in sorted(g.table[(i, j)].items())}])
    return {"basis": [[n, p] for n, p in zip(g.names, g.parities)], "brackets": brackets}


def serialize_problem(problem: Problem) -> dict:
    """Normalized definitions: pullbacks in canonical form, completed brackets."""
    out: dict = {"version": FORMAT_VERSION}
    if problem.spaces:
        out["spaces"] = {n: space_to_json(s) for n, s in problem.spaces.items()}
    if problem.morphisms:
        out["morphisms"] = {n: morphism_to_json(f) for n, f in problem.morphisms.items()}
    if problem.weil:
        out["weil"] = {
            n: {
                "generators": [[g[0], g[1]] + ([g[2]] if g[2] is not None else []) for g in A.generators],
                "ideal": [{A.names[i]: e for i, e in enumerate(f) if e} for f in A.ideal],
            }
            for n, A in problem.weil.items()
        }
    if problem.lie:
        out["lie"] = {n: lie_to_json(g) for n, g in problem.lie.items()}
    for key in ("pairs", "representations", "distributions"):
        if key in problem.raw:
            out[key] = problem.raw[key]
    out["commands"] = problem.commands
    return out


def dumps(data) -> str:
    return json.dumps(data, sort_keys=True, indent=2, ensure_ascii=True) + "\n"


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def _morphism_arg(problem: Problem, cmd: dict, key: str) -> SpolMorphism:
    return problem._ref(problem.morphisms, cmd.get(key), "morphism")


def _store(problem: Problem, cmd: dict, f: SpolMorphism):
    name = cmd.get("as")
    if name:
        problem._claim(name, "morphisms")
        problem.morphisms[name] = f


def cmd_compose(problem, cmd, opts):
    g, f = _morphism_arg(problem, cmd, "g"), _morphism_arg(problem, cmd, "f")
    h = compose(g, f)
    oracle = compose_oracle(g, f) == h
    _store(problem, cmd, h)
    result = {"morphism": morphism_to_json(h), "components": components_to_json(h), "oracle_agrees": oracle}
    return ("ok" if oracle else "fail"), result


def cmd_weil_apply(problem, cmd, opts):
    A = problem._ref(problem.weil, cmd.get("algebra"), "weil algebra")
    f = _morphism_arg(problem, cmd, "f")
    terms = cmd.get("terms")
    if terms is not None and int(terms) < A.height:
        raise TruncationError(f"{terms} Taylor terms cannot reach height {A.height}")
    Tf = weil_apply(A, f, None if terms is None else int(terms))
    _store(problem, cmd, Tf)
    return "ok", {
        "algebra": {"basis": list(A.basis_names), "height": A.height, "width": list(A.width)},
        "morphism": morphism_to_json(Tf),
    }


def _random_chain(rng, dims, degree, nterms):
    spaces = [SuperVectorSpace(tuple(f"x{i}" for i in range(p)), tuple(f"t{i}" for i in range(q))) for p, q in dims]
    return [random_morphism(rng, spaces[i], spaces[i + 1], degree, nterms) for i in range(len(spaces) - 1)]


def _category_laws(f, g, h):
    failures = []
    hg_f = compose(compose(h, g), f)
    h_gf = compose(h, compose(g, f))
    if hg_f != h_gf:
        failures.append(["associativity", repr(hg_f.difference(h_gf))])
    for name, m in (("f", f), ("g", g), ("h", h)):
        if compose(identity(m.target), m) != m:
            failures.append(["left identity", name])
        if compose(m, identity(m.source)) != m:
            failures.append(["right identity", name])
    for name, (a, b) in (("g.f", (g, f)), ("h.g", (h, g))):
        if compose(a, b) != compose_oracle(a, b):
            failures.append(["oracle", name])
    return failures


def cmd_check_category(problem, cmd, opts):
    if "random" in cmd:
        spec = cmd["random"]
        rng = random.Random(opts.seed)
        count = int(spec.get("count", 10))
        dims = spec.get("dims", [[1, 1]] * 4)
        failures = []
        for k in range(count):
            f, g, h = _random_chain(rng, dims, int(spec.get("degree", 2)), int(spec.get("terms", 2)))
            failures += [[k] + item for item in _category_laws(f, g, h)]
        result = {"triples": count, "seed": opts.seed, "failures": failures}
    else:
        f, g, h = (problem._ref(problem.morphisms, n, "morphism") for n in cmd.get("morphisms", []))
        result = {"triples": 1, "failures": _category_laws(f, g, h)}
    return ("fail" if result["failures"] else "ok"), result


def cmd_check_lie(problem, cmd, opts):
    g = problem._ref(problem.lie, cmd.get("lie"), "lie")
    ok, why = check_lie(g)
    return ("ok" if ok else "fail"), {"pass": ok, "violation": None if ok else [why[0], list(why[1])]}


def cmd_superloop(problem, cmd, opts):
    g = problem._ref(problem.lie, cmd.get("lie"), "lie")
    L = superloop_algebra(g)
    ok, _ = check_lie(L)
    return ("ok" if ok else "fail"), {"algebra": lie_to_json(L), "check_lie": ok}


def cmd_loop_ad(problem, cmd, opts):
    if not opts.experimental_loop_ad:
        raise ReferenceError_("loop-ad needs --experimental-loop-ad")
    g = problem._ref(problem.lie, cmd.get("lie"), "lie")
    vec = lambda d: {g.index(k): _rational(v, "loop-ad") for k, v in d.items()}
    ad = {g.index(j): {g.index(k): _rational(c, "loop-ad") for k, c in col.items()} for j, col in cmd.get("ad", {}).items()}
    first, second = loop_ad_experimental(g, ad, vec(cmd.get("x", {})), vec(cmd.get("y", {})), vec(cmd.get("z", {})))
    show = lambda v: {g.names[k]: format_coefficient(c) for k, c in sorted(v.items())}
    return "ok", {"experimental": True, "g_part": show(first), "pi_part": show(second)}


def cmd_build_koszul(problem, cmd, opts):
    pname = cmd.get("pair")
    pair = problem._ref(problem.pairs, pname, "pair")
    ok, why = check_pair(pair)
    if not ok:
        return "fail", {"check_pair": False, "violation": repr(why)}
    kg = problem.group(pname)
    return "ok", {
        "check_pair": True,
        "mult": morphism_to_json(kg.mult),
        "inv": morphism_to_json(kg.inv),
        "unit": morphism_to_json(kg.unit),
    }


def cmd_verify_group(problem, cmd, opts):
    pname = cmd.get("pair")
    kg = problem.group(pname)
    ok, why = verify_group(kg)
    tg = group_on_TG(kg)
    body = underlying_law_matches(kg)
    result = {
        "group_axioms": ok,
        "violation": None if ok else repr(why),
        "underlying_law": body,
        "tangent_law": tg.law_matches,
        "tangent_ad_restricts": tg.ad_restricts,
        "tangent_bracket": tg.bracket_matches,
    }
    passed = ok and body and tg.ok
    result["verdict"] = "pass" if passed else "fail"
    return ("ok" if passed else "fail"), result


def _dist_json(pair, d: Distribution) -> dict:
    return {"base": [format_coefficient(c) for c in d.base], "u": format_uenv(d.u)}


def cmd_convolve(problem, cmd, opts):
    p1, d1 = problem._ref(problem.dists, cmd.get("d1"), "distribution")
    p2, d2 = problem._ref(problem.dists, cmd.get("d2"), "distribution")
    if p1 != p2:
        raise ReferenceError_("distributions on different groups")
    kg = problem.group(p1)
    out = convolve(d1, d2, kg)
    fs = test_functions(kg.G, int(cmd.get("test_degree", 2)))
    agree = all(convolution_pairing(kg, f, d1, d2) == out.pair_with(kg, f) for f in fs)
    if cmd.get("as"):
        problem._claim(cmd["as"], "distributions")
        problem.dists[cmd["as"]] = (p1, out)
    return ("ok" if agree else "fail"), {"result": _dist_json(kg.pair, out), "pairing_agrees": agree, "test_functions": len(fs)}


def cmd_berezin(problem, cmd, opts):
    space = problem._space(cmd.get("space"), "berezin")
    f = _poly(space, cmd.get("f", "0"), "berezin.f")
    density = _poly(space, cmd.get("density", "1"), "berezin.density")
    try:
        value = berezin_pair(f, density)
    except PreconditionError as exc:
        raise InvariantError(str(exc)) from None
    return "ok", {"value": format_coefficient(value)}


def cmd_check_rep(problem, cmd, opts):
    rep = problem._ref(problem.reps, cmd.get("rep"), "representation")
    ok, why = check_representation(rep)
    if not ok:
        return "fail", {"axioms": False, "violation": repr(why)}
    pname = problem.raw["representations"][cmd["rep"]]["pair"]
    kg = problem.group(pname)
    alpha = rep_to_morphism(rep, kg)
    act_ok, act_why = check_action(kg, alpha, rep.V)
    back = morphism_to_rep(alpha, rep.pair, rep.V, kg)
    from .groups import _prefixed

    lin, _ = fiberwise_degree_check(alpha, [_prefixed(alpha.source, rep.V, n) for n in rep.V.names], 1)
    round_trip = back == rep and rep_to_morphism(back, kg) == alpha
    passed = act_ok and round_trip and lin
    return ("ok" if passed else "fail"), {
        "axioms": True,
        "action": act_ok,
        "linear_over_G": lin,
        "round_trip": round_trip,
        "morphism": morphism_to_json(alpha),
    }


COMMANDS = {
    "compose": cmd_compose,
    "weil-apply": cmd_weil_apply,
    "check-category": cmd_check_category,
    "check-lie": cmd_check_lie,
    "superloop": cmd_superloop,
    "loop-ad": cmd_loop_ad,
    "build-koszul": cmd_build_koszul,
    "verify-group": cmd_verify_group,
    "convolve": cmd_convolve,
    "berezin": cmd_berezin,
    "check-rep": cmd_check_rep,
}


def run(problem: Problem, opts) -> tuple[dict, int]:
    results = []
    code = EXIT_OK
    for i, cmd in enumerate(problem.commands):
        op = cmd.get("op") if isinstance(cmd, dict) else None
        entry = {"index": i, "op": op}
        try:
            if op not in COMMANDS:
                raise ReferenceError_(f"unknown command {op!r}")
            status, payload = COMMANDS[op](problem, cmd, opts)
            entry["status"] = status
            entry["result"] = payload
            if status == "fail" and code == EXIT_OK:
                code = EXIT_LAW
        except Exception as exc:  # noqa: BLE001 - mapped to exit codes
            err = _exit_code(exc)
            entry["status"] = "error"
            entry["error"] = str(exc)
            entry["exit_code"] = err
            results.append(entry)
            if code in (EXIT_OK, EXIT_LAW):
                code = err
            if not opts.keep_going:
                break
            continue
        results.append(entry)
    return {"version": FORMAT_VERSION, "results": results, "exit_code": code}, code


def render_text(report: dict) -> str:
    lines = [f"report {report['version']} exit {report['exit_code']}"]
    for r in report["results"]:
        head = f"[{r['index']}] {r['op']}: {r['status']}"
        if r["status"] == "error":
            lines.append(f"{head} ({r['error']})")
            continue
        lines.append(head)
        for key, value in sorted(r["result"].items()):
            if isinstance(value, dict) and "pullbacks" in value:
                for n, sp in sorted(value["pullbacks"].items()):
                    lines.append(f"    {key}.{n} = {sp}")
            else:
                lines.append(f"    {key} = {json.dumps(value, sort_keys=True)}")
    return "\n".join(lines) + "\n"


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="supergeom", description="Exact supergeometry computations from a JSON problem file.")
    ap.add_argument("--input", required=True, help="problem file (JSON), or - for stdin")
    ap.add_argument("--output", default="-", help="report destination, - for stdout")
    ap.add_argument("--keep-going", action="store_true", help="continue after a failing command")
    ap.add_argument("--format", choices=("json", "text"), default="json")
    ap.add_argument("--seed", type=int, default=0, help="seed for randomized checks")
    ap.add_argument("--experimental-loop-ad", action="store_true", help="enable the loop-ad command")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return ap


def main(argv=None) -> int:
    opts = build_parser().parse_args(argv)
    try:
        if opts.input == "-":
            text = sys.stdin.read()
        else:
            with open(opts.input, encoding="utf-8") as fh:
                text = fh.read()
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_REFERENCE
    try:
        problem = load_problem(text)
    except Exception as exc:  # noqa: BLE001
        code = _exit_code(exc)
        print(f"error: {exc}", file=sys.stderr)
        return code
    report, code = run(problem, opts)
    out = dumps(report) if opts.format == "json" else render_text(report)
    if opts.output == "-":
        sys.stdout.write(out)
    else:
        with open(opts.output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(out)
    return code


if __name__ == "__main__":
    sys.exit(main())
