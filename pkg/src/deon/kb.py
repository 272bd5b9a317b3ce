"""Normative knowledge bases: file format, grounding, and the reasoning
tasks (consistency, entailment, compliance, and their failure analyses).

File format (line oriented, UTF-8, # comments)::

    [signature]
    pred process_lawfully/1
    [individuals]
    d1
    [norms]
    a1: O{ process_lawfully(d) | is_protected(d) } forall d
    [facts]
    ~process_lawfully(d1)

Norm kinds are O{..|..} (obligation), P{..|..} (permission) and
F{..|..} (prohibition); `forall v1, v2` binds individual variables used
in body or condition.  Norm bodies, conditions and facts are Boolean
combinations of atoms.

Grounding expands binders over the individuals.  In logic e a norm
becomes the dyadic operator applied to body and condition and facts are
wrapped in box (settled truths constrain every world).  In logic sdl a
conditional obligation O{b|c} is rendered as the classical pair
{c -> O b, O(c -> b)} (factual and deontic detachment), a prohibition
as the same pair for ~b, and a permission as c -> ~O~b; unconditional
norms collapse to the single monadic formula.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from . import formula as F
from . import search as SE
from . import semantics as S

KINDS = {"O": "obligation", "P": "permission", "F": "prohibition"}


class KBError(Exception):
    def __init__(self, message: str, line: int | None = None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


@dataclass(frozen=True)
class Norm:
    id: str
    kind: str  # obligation | permission | prohibition
    body: F.Formula
    cond: F.Formula
    binders: tuple[str, ...] = ()


@dataclass(frozen=True)
class KnowledgeBase:
    signature: F.Signature
    individuals: tuple[str, ...]
    norms: tuple[Norm, ...]
    facts: tuple[F.Formula, ...]
    background: tuple[F.Formula, ...] = ()  # raw formulas, added as given


@dataclass(frozen=True)
class Labeled:
    label: str
    formula: F.Formula


_MODAL = (F.Box, F.Dia, F.Oblig, F.ObligM, F.Perm, F.Forb)
_NORM_RE = re.compile(
    r"(?P<id>[A-Za-z][A-Za-z0-9_]*)\s*:\s*(?P<kind>[OPF])\s*\{(?P<inner>.*)\}"
    r"\s*(?:forall\s+(?P<binders>[A-Za-z][A-Za-z0-9_]*(?:\s*,\s*[A-Za-z][A-Za-z0-9_]*)*))?\s*$"
)


def _boolean_only(f: F.Formula, what: str, line: int) -> None:
    for g in F.subformulas(f):
        if isinstance(g, _MODAL):
            raise KBError(f"{what} must be a Boolean combination of atoms", line)
        if isinstance(g, (F.Forall, F.Exists)):
            raise KBError(f"{what} must not quantify; use the norm's binders", line)


def load_kb(text: str) -> KnowledgeBase:
    """Parse and validate a knowledge-base file."""
    section = None
    predicates: dict[str, int] = {}
    individuals: list[str] = []
    norm_lines: list[tuple[int, str]] = []
    fact_lines: list[tuple[int, str]] = []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if line not in ("[signature]", "[individuals]", "[norms]", "[facts]"):
                raise KBError(f"unknown section {line}", lineno)
            section = line[1:-1]
            continue
        if section == "signature":
            m = re.match(r"pred\s+([A-Za-z][A-Za-z0-9_]*)\s*/\s*(\d+)\s*$", line)
            if not m:
                raise KBError("expected: pred <name>/<arity>", lineno)
            name, arity = m.group(1), int(m.group(2))
            if name in predicates:
                raise KBError(f"duplicate predicate {name!r}", lineno)
            predicates[name] = arity
        elif section == "individuals":
            for name in re.split(r"[,\s]+", line):
                if not name:
                    continue
                if not re.fullmatch(r"[A-Za-z][A-Za-z0-9_]*", name):
                    raise KBError(f"bad individual name {name!r}", lineno)
                if name in individuals:
                    raise KBError(f"duplicate individual {name!r}", lineno)
                individuals.append(name)
        elif section == "norms":
            norm_lines.append((lineno, line))
        elif section == "facts":
            fact_lines.append((lineno, line))
        else:
            raise KBError("content before any section header", lineno)

    try:
        sig = F.Signature(predicates, frozenset(individuals))
    except F.FormulaError as ex:
        raise KBError(str(ex)) from ex

    norms: list[Norm] = []
    seen_ids: set[str] = set()
    for lineno, line in norm_lines:
        m = _NORM_RE.match(line)
        if not m:
            raise KBError("expected: <id>: O{ body | cond } [forall vars]", lineno)
        nid = m.group("id")
        if nid in seen_ids:
            raise KBError(f"duplicate norm id {nid!r}", lineno)
        seen_ids.add(nid)
        binders = tuple(b.strip() for b in (m.group("binders") or "").split(",") if b.strip())
        inner = m.group("inner")
        wrapped = f"O{{{inner}}}"
        for b in binders:
            wrapped = f"forall {b}. {wrapped}"
        try:
            parsed = F.parse(wrapped, sig, logic="e")
        except F.ParseError as ex:
            raise KBError(f"in norm {nid}: {ex}", lineno) from ex
        core = parsed
        for _ in binders:
            core = core.body
        body, cond = core.body, core.cond
        _boolean_only(body, "norm body", lineno)
        _boolean_only(cond, "norm condition", lineno)
        loose = (F.free_vars(body) | F.free_vars(cond)) - set(binders)
        if loose:
            raise KBError(f"norm {nid}: unbound variables {sorted(loose)}", lineno)
        norms.append(Norm(nid, KINDS[m.group("kind")], body, cond, binders))

    facts: list[F.Formula] = []
    for lineno, line in fact_lines:
        try:
            f = F.parse(line, sig, logic="e")
        except F.ParseError as ex:
            raise KBError(str(ex), lineno) from ex
        _boolean_only(f, "fact", lineno)
        if F.free_vars(f):
            raise KBError("facts must be ground", lineno)
        facts.append(f)

    return KnowledgeBase(sig, tuple(individuals), tuple(norms), tuple(facts))


# ---------------------------------------------------------------------------
# Grounding


def _instances(norm: Norm, individuals: tuple[str, ...]):
    if not norm.binders:
        yield "", norm.body, norm.cond
        return
    if not individuals:
        raise KBError(f"norm {norm.id} has binders but the individual set is empty")
    def assign(i, body, cond, picked):
        if i == len(norm.binders):
            yield "[" + ",".join(picked) + "]", body, cond
            return
        for c in individuals:
            yield from assign(i + 1,
                              F.subst_var(body, norm.binders[i], F.Const(c)),
                              F.subst_var(cond, norm.binders[i], F.Const(c)),
                              picked + [c])
    yield from assign(0, norm.body, norm.cond, [])


def _render_norm(norm: Norm, suffix: str, body: F.Formula, cond: F.Formula,
                 logic: str) -> list[Labeled]:
    label = norm.id + suffix
    if logic == "e":
        if norm.kind == "obligation":
            out = F.Oblig(body, cond)
        elif norm.kind == "prohibition":
            out = F.Oblig(F.Not(body), cond)
        else:
            out = F.Not(F.Oblig(F.Not(body), cond))
        return [Labeled(label, out)]
    # SDL rendering
    eff = body if norm.kind == "obligation" else F.Not(body)
    if norm.kind == "permission":
        detached = F.Not(F.ObligM(F.Not(body)))
        if cond == F.TOP:
            return [Labeled(label, detached)]
        return [Labeled(label + ":fd", F.Implies(cond, detached))]
    if cond == F.TOP:
        return [Labeled(label, F.ObligM(eff))]
    return [
        Labeled(label + ":fd", F.Implies(cond, F.ObligM(eff))),
        Labeled(label + ":dd", F.ObligM(F.Implies(cond, eff))),
    ]


def ground_kb(kb: KnowledgeBase, logic: str) -> list[Labeled]:
    """Expand norms over the individuals and render for the logic."""
    if logic not in ("sdl", "e"):
        raise KBError(f"unknown logic {logic!r}")
    out: list[Labeled] = []
    for norm in kb.norms:
        for suffix, body, cond in _instances(norm, kb.individuals):
            out.extend(_render_norm(norm, suffix, body, cond, logic))
    for i, fact in enumerate(kb.facts, start=1):
        rendered = F.Box(fact) if logic == "e" else fact
        out.append(Labeled(f"fact{i}", rendered))
    for i, f in enumerate(kb.background, start=1):
        g = f
        if any(isinstance(x, (F.Forall, F.Exists)) for x in F.subformulas(f)):
            g = F.ground(f, kb.individuals)
        out.append(Labeled(f"bg{i}", g))
    return out


# ---------------------------------------------------------------------------
# Tasks


@dataclass(frozen=True)
class TaskResult:
    task: str
    verdict: SE.Verdict
    labels: tuple[str, ...]            # labels of the grounded input set
    mus: tuple[str, ...] | None = None  # labels of the minimal unsat core


def consistency(kb: KnowledgeBase, cfg: SE.SearchConfig) -> TaskResult:
    """Model search over the grounded set; in complete mode an
    unsatisfiable outcome carries a minimal unsatisfiable core."""
    labeled = ground_kb(kb, cfg.logic)
    fs = [lf.formula for lf in labeled]
    verdict = SE.find_model(fs, cfg)
    mus = None
    if isinstance(verdict, SE.DecidedUnsatisfiable):
        core = SE.minimal_unsat_subset(fs, cfg)
        core_ids = set(map(id, core))
        mus = tuple(lf.label for lf in labeled if id(lf.formula) in core_ids)
    return TaskResult("consistency", verdict, tuple(lf.label for lf in labeled), mus)


def entailment(kb: KnowledgeBase, query: F.Formula, cfg: SE.SearchConfig) -> TaskResult:
    """Does the grounded knowledge base entail the query?"""
    labeled = ground_kb(kb, cfg.logic)
    goal = query
    if any(isinstance(g, (F.Forall, F.Exists)) for g in F.subformulas(query)):
        goal = F.ground(query, kb.individuals)
    verdict = SE.entails([lf.formula for lf in labeled], goal, cfg)
    return TaskResult("entailment", verdict, tuple(lf.label for lf in labeled))


@dataclass(frozen=True)
class ComplianceReport:
    detached: tuple[tuple[str, F.Formula], ...]
    violations: tuple[tuple[str, F.Formula], ...]
    consistent: bool
    witness: object | None          # model when consistent, else None
    mus: tuple[str, ...] | None     # unsat core labels when inconsistent

    @property
    def compliant(self) -> bool:
        return not self.violations


def _prop_atoms(fs) -> tuple[S.AtomKey, ...]:
    keys: dict[S.AtomKey, None] = {}
    for f in fs:
        for a in F.atoms_of(f):
            keys[S.atom_key(a)] = None
    return tuple(keys)


def _prop_value(f: F.Formula, assignment: dict[S.AtomKey, bool]) -> bool:
    if isinstance(f, F.Atom):
        if f.pred == F.RESERVED_ATOM:
            return False
        return assignment[S.atom_key(f)]
    if isinstance(f, F.Not):
        return not _prop_value(f.sub, assignment)
    if isinstance(f, F.And):
        return _prop_value(f.left, assignment) and _prop_value(f.right, assignment)
    if isinstance(f, F.Or):
        return _prop_value(f.left, assignment) or _prop_value(f.right, assignment)
    if isinstance(f, F.Implies):
        return (not _prop_value(f.left, assignment)) or _prop_value(f.right, assignment)
    if isinstance(f, F.Iff):
        return _prop_value(f.left, assignment) == _prop_value(f.right, assignment)
    raise KBError(f"not a Boolean formula: {F.print_formula(f)}")


def prop_entails(premises, goal: F.Formula) -> bool:
    """Classical propositional entailment by truth-table enumeration."""
    premises = list(premises)
    atoms = _prop_atoms(premises + [goal])
    if len(atoms) > 22:
        raise KBError("too many distinct atoms for propositional entailment")
    for bits in range(1 << len(atoms)):
        assignment = {a: bool(bits >> i & 1) for i, a in enumerate(atoms)}
        if all(_prop_value(p, assignment) for p in premises):
            if not _prop_value(goal, assignment):
                return False
    return True


def prop_satisfiable(fs) -> bool:
    return not prop_entails(fs, F.BOT)


def compliance(kb: KnowledgeBase, cfg: SE.SearchConfig) -> ComplianceReport:
    """Detachment-based compliance check.

    A norm instance is detached when the facts propositionally entail
    its condition; a detached obligation (or prohibition) is violated
    when the facts also entail the negation of its effective body.
    Detachment is an extralogical, auditable policy: preference
    semantics alone never licenses factual detachment.  Permissions
    detach nothing and cannot be violated.
    """
    facts = list(kb.facts)
    if not prop_satisfiable(facts):
        raise KBError("facts are propositionally contradictory")
    detached: list[tuple[str, F.Formula]] = []
    violations: list[tuple[str, F.Formula]] = []
    for norm in kb.norms:
        if norm.kind == "permission":
            continue
        for suffix, body, cond in _instances(norm, kb.individuals):
            eff = body if norm.kind == "obligation" else F.Not(body)
            if prop_entails(facts, cond):
                detached.append((norm.id + suffix, eff))
                if prop_entails(facts, F.Not(eff)):
                    violations.append((norm.id + suffix, eff))
    result = consistency(kb, cfg)
    consistent = isinstance(result.verdict, SE.ModelFound)
    witness = result.verdict.model if consistent else None
    return ComplianceReport(tuple(detached), tuple(violations), consistent,
                            witness, result.mus)
