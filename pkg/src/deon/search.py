"""Finite model finding and bounded decision procedures.

Bounded search enumerates candidate models in a fixed canonical order:
increasing world count, then relation bits ascending, then valuation
bits ascending, with non-canonical representatives under world
permutation pruned away.  Every returned witness is re-checked through
the semantics module before it leaves this module.

Complete mode decides satisfiability outright instead of walking the
whole bounded space.  Both logics admit a small-model argument through
"world types":

* SDL (serial Kripke): a type assigns truth to every atom and every
  O-subformula.  Iterated elimination keeps a type only while some
  surviving type can serve as successor (realizing seriality and every
  negative O-bit); the survivors themselves form a model, so the input
  is satisfiable iff a survivor meeting the local constraints remains.
* System E (preference): the box and the dyadic obligation are global,
  so a candidate is a truth assignment to the modal subformulas plus a
  set of realized atom-types.  Such a candidate is realizable by an
  actual betterness relation iff every false obligation O(b/c) has a
  witness type (c and not b) that is not forced optimal into a true
  obligation O(b'/c') whose c'-types are contained in the c-types; a
  larger realized-type set only makes these conditions easier, so only
  the maximal consistent type set needs checking.

Either way a satisfiable input has a model no bigger than 2^|subformulas|,
the bound recorded on Valid/DecidedUnsatisfiable verdicts.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from itertools import permutations

from . import formula as F
from . import semantics as S


class SearchError(Exception):
    pass


class BudgetExceeded(SearchError):
    """The configured node budget ran out before a verdict was reached."""

    def __init__(self, budget: int):
        super().__init__(f"node budget of {budget} exceeded")
        self.budget = budget


def _default_budget() -> int:
    try:
        return int(os.environ.get("DEON_NODE_BUDGET", "") or 10_000_000)
    except ValueError:
        return 10_000_000


@dataclass(frozen=True)
class SearchConfig:
    logic: str = "e"
    frame: S.FrameConditions = S.FrameConditions()
    max_worlds: int = 3
    complete: bool = False
    seed: int = 0  # used by corpus generators only; search is deterministic
    node_budget: int = field(default_factory=_default_budget)

    def __post_init__(self):
        if self.logic not in ("sdl", "e"):
            raise SearchError(f"unknown logic {self.logic!r}")
        if self.max_worlds < 1:
            raise SearchError("max_worlds must be at least 1")


# ---------------------------------------------------------------------------
# Verdicts


@dataclass(frozen=True)
class ModelFound:
    model: object
    tag = "model_found"


@dataclass(frozen=True)
class NoModelUpTo:
    bound: int
    tag = "no_model_up_to"


@dataclass(frozen=True)
class DecidedUnsatisfiable:
    bound_used: int
    tag = "unsatisfiable"


@dataclass(frozen=True)
class Valid:
    bound_used: int
    tag = "valid"


@dataclass(frozen=True)
class CountermodelFound:
    model: object
    world: int
    tag = "countermodel"


Verdict = ModelFound | NoModelUpTo | DecidedUnsatisfiable | Valid | CountermodelFound


class _Budget:
    __slots__ = ("left", "total")

    def __init__(self, total: int):
        self.left = total
        self.total = total

    def tick(self, n: int = 1):
        self.left -= n
        if self.left < 0:
            raise BudgetExceeded(self.total)


def filtration_bound(fs: list[F.Formula]) -> int:
    """2 to the number of distinct subformulas across the input set."""
    seen: dict[F.Formula, None] = {}
    for f in fs:
        for g in F.subformulas(f):
            seen[g] = None
    return 1 << len(seen)


def _require_ground(fs) -> None:
    for f in fs:
        if F.free_vars(f):
            raise SearchError(f"formula has free variables: {sorted(F.free_vars(f))}")
        for g in F.subformulas(f):
            if isinstance(g, (F.Forall, F.Exists)):
                raise SearchError("quantified input: expand with formula.ground first")


def _atoms_and_domain(fs) -> tuple[tuple[S.AtomKey, ...], tuple[str, ...]]:
    atoms: dict[S.AtomKey, None] = {}
    consts: set[str] = set()
    for f in fs:
        for a in F.atoms_of(f):
            atoms[S.atom_key(a)] = None
            consts.update(t.name for t in a.args)
    return tuple(sorted(atoms)), tuple(sorted(consts))


def _check_cfg(cfg: SearchConfig) -> None:
    if cfg.logic == "sdl" and not (cfg.frame.none() or cfg.frame.flags() == ("serial",)):
        raise SearchError("SDL search supports only the (implied) serial frame")
    if cfg.complete and cfg.logic == "e" and not cfg.frame.none():
        raise SearchError("complete mode decides the unrestricted frame only")


# ---------------------------------------------------------------------------
# Canonical bounded enumeration


def _perm_rel_table(n: int, perm: tuple[int, ...]) -> tuple[int, ...]:
    # bit position s*n+t maps to perm[s]*n+perm[t]
    return tuple(perm[s] * n + perm[t] for s in range(n) for t in range(n))


def _apply_bits(bits: int, table: tuple[int, ...]) -> int:
    out = 0
    i = 0
    while bits:
        if bits & 1:
            out |= 1 << table[i]
        bits >>= 1
        i += 1
    return out


class _Enum:
    """Per-size canonical enumeration state."""

    def __init__(self, n: int):
        self.n = n
        perms = [p for p in permutations(range(n)) if p != tuple(range(n))]
        self.rel_tables = [_perm_rel_table(n, p) for p in perms]
        self.world_tables = [p for p in perms]

    def rel_status(self, rel: int) -> tuple[bool, list[tuple[int, ...]]]:
        """Is rel minimal among its permutations, and its stabilizer."""
        stab = []
        for tab, wt in zip(self.rel_tables, self.world_tables):
            pr = _apply_bits(rel, tab)
            if pr < rel:
                return False, []
            if pr == rel:
                stab.append(wt)
        return True, stab

    @staticmethod
    def val_canonical(vals: tuple[int, ...], stab: list[tuple[int, ...]]) -> bool:
        for wt in stab:
            perm_vals = tuple(_apply_bits(v, wt) for v in vals)
            if perm_vals < vals:
                return False
        return True


def _light_model(logic: str, n: int, rows: tuple[int, ...],
                 valuation: dict, domain: tuple[str, ...]):
    cls = S.KripkeModel if logic == "sdl" else S.PreferenceModel
    m = cls.__new__(cls)
    m.n = n
    m.full = (1 << n) - 1
    m.rows = rows
    m.relation = frozenset((s, t) for s in range(n) for t in range(n) if rows[s] >> t & 1)
    m.valuation = valuation
    m.domain = domain
    return m


def _iter_models(n: int, atoms: tuple[S.AtomKey, ...], cfg: SearchConfig,
                 budget: _Budget, domain: tuple[str, ...],
                 frame_mode: str = "require"):
    """Canonical candidates of exactly n worlds.

    frame_mode "require" keeps models satisfying cfg.frame, "violate"
    keeps those failing at least one requested condition.
    """
    enum = _Enum(n)
    k = len(atoms)
    full = (1 << n) - 1
    for rel in range(1 << (n * n)):
        rows = tuple((rel >> (s * n)) & full for s in range(n))
        if cfg.logic == "sdl" and not all(rows):
            continue
        probe = _light_model(cfg.logic, n, rows, {}, domain)
        if not cfg.frame.none():
            ok = S.satisfies_frame(probe, cfg.frame)
            if frame_mode == "require" and not ok:
                continue
            if frame_mode == "violate" and ok:
                continue
        minimal, stab = enum.rel_status(rel)
        if not minimal:
            continue
        for vbits in range(1 << (k * n)):
            budget.tick()
            vals = tuple((vbits >> (i * n)) & full for i in range(k))
            if stab and not enum.val_canonical(vals, stab):
                continue
            valuation = {a: vals[i] for i, a in enumerate(atoms)}
            yield _light_model(cfg.logic, n, rows, valuation, domain)


def _finalize(model) -> object:
    """Rebuild the witness through the public constructor and return it."""
    valuation = {k: list(S._bits(m)) for k, m in model.valuation.items()}
    cls = S.KripkeModel if type(model) is S.KripkeModel else S.PreferenceModel
    return cls(model.n, sorted(model.relation), valuation, model.domain)


def _revalidate(model, fs, logic: str, false_somewhere: F.Formula | None = None,
                world: int | None = None) -> None:
    ev = S.Evaluator(model, logic)
    for f in fs:
        if not ev.valid(f):
            raise SearchError(f"internal error: witness fails {F.print_formula(f)}")
    if false_somewhere is not None:
        if ev.holds(false_somewhere, world):
            raise SearchError("internal error: countermodel does not falsify the goal")


# ---------------------------------------------------------------------------
# Complete decision, system E


def _bit_mask(i: int, n_bits: int) -> int:
    """Mask over all types 0..2^n_bits-1 selecting those with bit i set."""
    width = 1 << (i + 1)
    m = ((1 << (1 << i)) - 1) << (1 << i)
    while width < n_bits:
        m |= m << width
        width <<= 1
    return m


def _type_masks(sigma, atoms: tuple[S.AtomKey, ...], boxes, obls, gbits: int,
                atom_masks: list[int]):
    """Truth of every subformula per atom-type, as bitmasks over types."""
    k = len(atoms)
    full = (1 << (1 << k)) - 1
    atom_pos = {a: i for i, a in enumerate(atoms)}
    box_bit = {b: (gbits >> i) & 1 for i, b in enumerate(boxes)}
    obl_bit = {o: (gbits >> (len(boxes) + i)) & 1 for i, o in enumerate(obls)}
    memo: dict[F.Formula, int] = {}

    def tm(f: F.Formula) -> int:
        got = memo.get(f)
        if got is not None:
            return got
        if isinstance(f, F.Atom):
            if f.pred == F.RESERVED_ATOM:
                m = 0
            else:
                m = atom_masks[atom_pos[S.atom_key(f)]]
        elif isinstance(f, F.Not):
            m = ~tm(f.sub) & full
        elif isinstance(f, F.And):
            m = tm(f.left) & tm(f.right)
        elif isinstance(f, F.Or):
            m = tm(f.left) | tm(f.right)
        elif isinstance(f, F.Implies):
            m = (~tm(f.left) & full) | tm(f.right)
        elif isinstance(f, F.Iff):
            m = ~(tm(f.left) ^ tm(f.right)) & full
        elif isinstance(f, F.Box):
            m = full if box_bit[f] else 0
        elif isinstance(f, F.Oblig):
            m = full if obl_bit[f] else 0
        else:
            raise SearchError(f"unexpected node in complete mode: {f!r}")
        memo[f] = m
        return m

    return tm


def _exact_e(globals_: list[F.Formula], locals_: list[F.Formula], budget: _Budget):
    """Decide satisfiability: all of globals_ valid and every member of
    locals_ true somewhere.  Returns (model, local_worlds) or None."""
    gs = [F.desugar(f, "e") for f in globals_]
    ls = [F.desugar(f, "e") for f in locals_]
    sigma: dict[F.Formula, None] = {}
    for f in gs + ls:
        for g in F.subformulas(f):
            sigma[g] = None
    atoms, domain = _atoms_and_domain(gs + ls)
    boxes = [f for f in sigma if isinstance(f, F.Box)]
    obls = [f for f in sigma if isinstance(f, F.Oblig)]
    k = len(atoms)
    n_types = 1 << k
    work = max(1, (len(sigma) * n_types) >> 6)
    atom_masks = [_bit_mask(i, n_types) for i in range(k)]

    for gbits in range(1 << (len(boxes) + len(obls))):
        budget.tick(work)
        tm = _type_masks(sigma, atoms, boxes, obls, gbits, atom_masks)
        core = (1 << n_types) - 1
        for g in gs:
            core &= tm(g)
        for i, b in enumerate(boxes):
            if gbits >> i & 1:
                core &= tm(b.sub)
        if not core:
            continue
        if any(not (core & ~tm(b.sub)) for i, b in enumerate(boxes)
               if not gbits >> i & 1):
            continue
        witnesses: list[tuple[F.Oblig, int]] = []
        ok = True
        for j, o in enumerate(obls):
            if gbits >> (len(boxes) + j) & 1:
                continue
            cands = core & tm(o.cond) & ~tm(o.body)
            if not cands:
                ok = False
                break
            bad = 0
            for m, om in enumerate(obls):
                if not gbits >> (len(boxes) + m) & 1:
                    continue
                if not (core & tm(om.cond) & ~tm(o.cond)):  # cond_m types inside cond_j's
                    bad |= tm(om.cond) & ~tm(om.body)
            cands &= ~bad
            if not cands:
                ok = False
                break
            witnesses.append((o, (cands & -cands).bit_length() - 1))
        if not ok:
            continue
        local_types = []
        for f in ls:
            hits = core & tm(f)
            if not hits:
                ok = False
                break
            local_types.append((hits & -hits).bit_length() - 1)
        if not ok:
            continue
        return _build_e_witness(core, tm, atoms, domain, boxes, obls, gbits,
                                witnesses, ls, local_types)
    return None


def _build_e_witness(core: int, tm, atoms, domain, boxes, obls, gbits,
                     witnesses, locals_, local_types):
    """Deterministic preference model realizing the chosen type assignment."""
    nboxes = len(boxes)
    needed: dict[int, None] = {}
    for t in local_types:
        needed[t] = None
    for i, b in enumerate(boxes):
        if not gbits >> i & 1:  # a false box needs a realized counterexample type
            wit = core & ~tm(b.sub)
            needed[(wit & -wit).bit_length() - 1] = None
    for o, t in witnesses:
        needed[t] = None
        # separator types breaking the containment for each endangered
        # true obligation
        for m, om in enumerate(obls):
            if not gbits >> (nboxes + m) & 1:
                continue
            danger = tm(om.cond) & ~tm(om.body)
            if danger >> t & 1:
                seps = core & tm(om.cond) & ~tm(o.cond)
                needed[(seps & -seps).bit_length() - 1] = None
    if not needed:
        needed[(core & -core).bit_length() - 1] = None
    base_types = sorted(needed)
    world_type = list(base_types)
    witness_world: dict[int, int] = {}
    for idx, (o, t) in enumerate(witnesses):
        witness_world[idx] = len(world_type)
        world_type.append(t)
    n = len(world_type)
    relation = []
    for idx, (o, t) in enumerate(witnesses):
        w = witness_world[idx]
        cond_mask = tm(o.cond)
        for u, ut in enumerate(world_type):
            if cond_mask >> ut & 1:
                relation.append((w, u))
    valuationat = {}
    for i, a in enumerate(atoms):
        valuation_worlds = [w for w, ut in enumerate(world_type) if ut >> i & 1]
        valuationat[a] = valuation_worlds
    model = S.PreferenceModel(n, relation, valuationat, domain)
    local_worlds = [base_types.index(t) for t in local_types]
    return model, local_worlds


# ---------------------------------------------------------------------------
# Complete decision, SDL


def _exact_sdl(globals_: list[F.Formula], locals_: list[F.Formula], budget: _Budget):
    gs = [F.desugar(f, "sdl") for f in globals_]
    ls = [F.desugar(f, "sdl") for f in locals_]
    sigma: dict[F.Formula, None] = {}
    for f in gs + ls:
        for g in F.subformulas(f):
            sigma[g] = None
    atoms, domain = _atoms_and_domain(gs + ls)
    boxes = [f for f in sigma if isinstance(f, F.ObligM)]
    k, p = len(atoms), len(boxes)
    n_types = 1 << (k + p)
    full = (1 << n_types) - 1
    atom_pos = {a: i for i, a in enumerate(atoms)}
    box_pos = {b: i for i, b in enumerate(boxes)}
    budget.tick(max(1, ((len(sigma) + (1 << p)) * n_types) >> 6))

    bit_masks = [_bit_mask(i, n_types) for i in range(k + p)]

    memo: dict[F.Formula, int] = {}

    def tm(f: F.Formula) -> int:
        got = memo.get(f)
        if got is not None:
            return got
        if isinstance(f, F.Atom):
            m = 0 if f.pred == F.RESERVED_ATOM else bit_masks[atom_pos[S.atom_key(f)]]
        elif isinstance(f, F.Not):
            m = ~tm(f.sub) & full
        elif isinstance(f, F.And):
            m = tm(f.left) & tm(f.right)
        elif isinstance(f, F.Or):
            m = tm(f.left) | tm(f.right)
        elif isinstance(f, F.Implies):
            m = (~tm(f.left) & full) | tm(f.right)
        elif isinstance(f, F.Iff):
            m = ~(tm(f.left) ^ tm(f.right)) & full
        elif isinstance(f, F.ObligM):
            m = bit_masks[k + box_pos[f]]
        else:
            raise SearchError(f"unexpected node in complete mode: {f!r}")
        memo[f] = m
        return m

    survivors = full
    for g in gs:
        survivors &= tm(g)
    # types sharing a box-bit pattern b occupy the contiguous block
    # [b*2^k, (b+1)*2^k)
    block = (1 << (1 << k)) - 1
    pattern_mask = [block << (b << k) for b in range(1 << p)]
    body_mask = [tm(box.sub) for box in boxes]

    while survivors:
        budget.tick(max(1, ((1 << p) * n_types) >> 6))
        keep = 0
        for b in range(1 << p):
            if not survivors & pattern_mask[b]:
                continue
            succ = survivors
            for j in range(p):
                if b >> j & 1:
                    succ &= body_mask[j]
            if not succ:
                continue
            if any(not (succ & ~body_mask[j]) for j in range(p) if not b >> j & 1):
                continue
            keep |= pattern_mask[b]
        new = survivors & keep
        if new == survivors:
            break
        survivors = new
    if not survivors:
        return None
    local_types = []
    for f in ls:
        hits = survivors & tm(f)
        if not hits:
            return None
        local_types.append((hits & -hits).bit_length() - 1)

    # closure construction: start from the needed types, add successors
    start = list(dict.fromkeys(local_types)) or [(survivors & -survivors).bit_length() - 1]
    included: dict[int, None] = dict.fromkeys(start)
    queue = list(included)
    while queue:
        t = queue.pop(0)
        b = t >> k
        succ = survivors
        for j in range(p):
            if b >> j & 1:
                succ &= body_mask[j]
        picks = []
        for j in range(p):
            if not b >> j & 1:
                need = succ & ~body_mask[j]
                hit = next((u for u in included if need >> u & 1), None)
                if hit is None:
                    hit = (need & -need).bit_length() - 1
                picks.append(hit)
        if not picks:
            hit = next((u for u in included if succ >> u & 1), None)
            if hit is None:
                hit = (succ & -succ).bit_length() - 1
            picks.append(hit)
        for u in picks:
            if u not in included:
                included[u] = None
                queue.append(u)
    world_type = sorted(included)
    index = {t: w for w, t in enumerate(world_type)}
    n = len(world_type)
    relation = []
    for t in world_type:
        b = t >> k
        for u in world_type:
            if all(body_mask[j] >> u & 1 for j in range(p) if b >> j & 1):
                relation.append((index[t], index[u]))
    valuation = {a: [index[t] for t in world_type if t >> i & 1]
                 for i, a in enumerate(atoms)}
    model = S.KripkeModel(n, relation, valuation, domain)
    local_worlds = [index[t] for t in local_types]
    return model, local_worlds


def _exact(globals_, locals_, cfg: SearchConfig, budget: _Budget):
    if cfg.logic == "sdl":
        return _exact_sdl(globals_, locals_, budget)
    return _exact_e(globals_, locals_, budget)


# ---------------------------------------------------------------------------
# Public operations


def find_model(fs, cfg: SearchConfig) -> Verdict:
    """First canonical model making every formula valid, or a negative
    verdict; complete mode turns exhaustion into DecidedUnsatisfiable."""
    fs = list(fs)
    _require_ground(fs)
    _check_cfg(cfg)
    atoms, domain = _atoms_and_domain(fs)
    budget = _Budget(cfg.node_budget)

    if cfg.complete:
        got = _exact(fs, [], cfg, budget)
        if got is None:
            return DecidedUnsatisfiable(filtration_bound(fs))
        witness, _ = got
        found = _bounded_scan(fs, None, atoms, domain, cfg, budget, witness.n)
        if found is not None:
            return ModelFound(found[0])
        _revalidate(witness, fs, cfg.logic)
        return ModelFound(witness)

    found = _bounded_scan(fs, None, atoms, domain, cfg, budget, cfg.max_worlds)
    if found is not None:
        return ModelFound(found[0])
    return NoModelUpTo(cfg.max_worlds)


def _bounded_scan(valid_fs, falsify: F.Formula | None, atoms, domain,
                  cfg: SearchConfig, budget: _Budget, max_n: int,
                  frame_mode: str = "require"):
    """Scan sizes 1..max_n; returns (finalized model, world) or None.

    When falsify is given the world is the least world where it fails,
    and candidate models must additionally make it false somewhere.
    """
    try:
        for n in range(1, max_n + 1):
            for cand in _iter_models(n, atoms, cfg, budget, domain, frame_mode):
                ev = S.Evaluator(cand, cfg.logic)
                if not all(ev.valid(f) for f in valid_fs):
                    continue
                world = None
                if falsify is not None:
                    m = ev.mask(falsify)
                    if m == cand.full:
                        continue
                    world = (~m & cand.full)
                    world = (world & -world).bit_length() - 1
                model = _finalize(cand)
                _revalidate(model, valid_fs, cfg.logic,
                            false_somewhere=falsify, world=world)
                return model, world
    except BudgetExceeded:
        if cfg.complete:
            return None  # caller falls back to the constructed witness
        raise
    return None


def entails(assumptions, goal: F.Formula, cfg: SearchConfig) -> Verdict:
    """Countermodel search: assumptions valid, goal false at some world."""
    assumptions = list(assumptions)
    _require_ground(assumptions + [goal])
    _check_cfg(cfg)
    atoms, domain = _atoms_and_domain(assumptions + [goal])
    budget = _Budget(cfg.node_budget)

    if cfg.complete:
        got = _exact(assumptions, [F.Not(goal)], cfg, budget)
        if got is None:
            return Valid(filtration_bound(assumptions + [goal]))
        witness, worlds = got
        found = _bounded_scan(assumptions, goal, atoms, domain, cfg, budget, witness.n)
        if found is not None:
            return CountermodelFound(found[0], found[1])
        _revalidate(witness, assumptions, cfg.logic, false_somewhere=goal,
                    world=worlds[0])
        return CountermodelFound(witness, worlds[0])

    found = _bounded_scan(assumptions, goal, atoms, domain, cfg, budget, cfg.max_worlds)
    if found is not None:
        return CountermodelFound(found[0], found[1])
    return NoModelUpTo(cfg.max_worlds)


def decide_valid(f: F.Formula, cfg: SearchConfig) -> Verdict:
    """Validity via countermodel search; complete mode decides it."""
    _require_ground([f])
    _check_cfg(cfg)
    if cfg.complete and len(F.subformulas(f)) > 20:
        raise SearchError("complete mode rejects formulas with more than 20 subformulas")
    return entails([], f, cfg)


@dataclass(frozen=True)
class CorrespondenceReport:
    schema: F.Formula
    frame: S.FrameConditions
    bound: int
    holds_under_frame: bool
    frame_counterexample: object | None  # model where frame holds, schema fails
    violating_witness: object | None     # model violating frame, schema valid


def correspondence(schema: F.Formula, frame: S.FrameConditions,
                   cfg: SearchConfig) -> CorrespondenceReport:
    """Two frame-correspondence probes for a schema instance.

    (a) is the schema valid in every model satisfying the frame, up to
    the bound; (b) is there a model violating the frame in which the
    schema is still valid.
    """
    _require_ground([schema])
    if cfg.logic != "e":
        raise SearchError("correspondence probes run over preference models")
    if frame.none():
        raise SearchError("correspondence needs at least one frame condition")
    atoms, domain = _atoms_and_domain([schema])
    probe_cfg = SearchConfig(logic="e", frame=frame, max_worlds=cfg.max_worlds,
                             node_budget=cfg.node_budget)
    budget = _Budget(cfg.node_budget)

    counterexample = None
    found = _bounded_scan([], schema, atoms, domain, probe_cfg, budget,
                          cfg.max_worlds, frame_mode="require")
    if found is not None:
        counterexample = found[0]

    budget = _Budget(cfg.node_budget)
    witness = None
    found = _bounded_scan([schema], None, atoms, domain, probe_cfg, budget,
                          cfg.max_worlds, frame_mode="violate")
    if found is not None:
        witness = found[0]
        for check in S.check_frame(witness, frame):
            if check.holds:
                raise SearchError(f"internal error: witness satisfies {check.prop}")

    return CorrespondenceReport(schema, frame, cfg.max_worlds,
                                counterexample is None, counterexample, witness)


def minimal_unsat_subset(fs, cfg: SearchConfig) -> list[F.Formula]:
    """Deletion-based shrink to a minimal unsatisfiable subset.

    Requires complete mode; both the result's unsatisfiability and the
    satisfiability of every one-element-removed subset are re-verified.
    """
    fs = list(fs)
    if not cfg.complete:
        raise SearchError("minimal_unsat_subset needs complete mode")
    verdict = find_model(fs, cfg)
    if not isinstance(verdict, DecidedUnsatisfiable):
        raise SearchError("minimal_unsat_subset expects an unsatisfiable input set")

    core = list(fs)
    i = 0
    while i < len(core):
        trial = core[:i] + core[i + 1:]
        if trial and isinstance(find_model(trial, cfg), DecidedUnsatisfiable):
            core = trial
        else:
            i += 1

    if not isinstance(find_model(core, cfg), DecidedUnsatisfiable):
        raise SearchError("internal error: shrunken core is satisfiable")
    for i in range(len(core)):
        trial = core[:i] + core[i + 1:]
        if trial and not isinstance(find_model(trial, cfg), ModelFound):
            raise SearchError("internal error: core is not minimal")
    return core
